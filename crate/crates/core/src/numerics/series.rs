//! Symmetric two-sided series summation with analytic tail control.
//!
//! Angular-momentum decompositions in this crate sum over m = 0, ±1, ±2, ...
//! with algebraically decaying terms, so "last term is small" is not a valid
//! stopping rule. The driver here requires a caller-supplied analytic bound
//! on the discarded tail and stops only once that bound meets tolerance.

use super::Tolerance;
use crate::error::{Error, Result};

/// Outcome of a symmetric series summation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOutcome<T> {
    /// The summed value.
    pub value: T,
    /// Analytic bound on the discarded tail at the stopping order.
    pub tail_bound: f64,
    /// Largest |m| included in the sum.
    pub terms: i64,
}

/// Sum `term(0) + sum_{m>=1} [term(m) + term(-m)]`, stopping when
/// `tail_bound(m)` — an analytic bound on everything beyond ±m — meets the
/// tolerance against the running value.
///
/// The tail bound is the only stopping criterion; term smallness alone never
/// terminates the sum.
pub fn sum_symmetric<F, B>(mut term: F, tail_bound: B, tol: &Tolerance) -> Result<SeriesOutcome<f64>>
where
    F: FnMut(i64) -> Result<f64>,
    B: Fn(i64) -> f64,
{
    let mut value = term(0)?;
    let mut m = 0i64;
    loop {
        let bound = tail_bound(m);
        if bound.is_finite() && bound >= 0.0 && tol.accepts(bound, value) {
            return Ok(SeriesOutcome {
                value,
                tail_bound: bound,
                terms: m,
            });
        }
        if m as usize >= tol.max_iter {
            return Err(Error::SeriesTail {
                bound,
                tol: tol.target(value),
                terms: m as usize,
            });
        }
        m += 1;
        value += term(m)? + term(-m)?;
    }
}

/// Integral bound on the one-sided inverse-power tail:
/// `sum_{m > M} (m + a)^{-p} <= (M + a)^{1-p} / (p - 1)` for `p > 1`,
/// valid when `M + a > 0`.
pub fn inverse_power_tail(m: f64, a: f64, p: f64) -> f64 {
    debug_assert!(p > 1.0);
    let base = m + a;
    if base <= 0.0 {
        return f64::INFINITY;
    }
    base.powf(1.0 - p) / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // reference: 25-digit multiprecision evaluation of pi*coth(pi)
    const PI_COTH_PI: f64 = 3.153_348_094_937_162_348;

    #[test]
    fn lorentzian_comb_sums_to_pi_coth_pi() {
        // sum_{m in Z} 1/(m^2 + 1) = pi coth(pi). The raw terms decay like
        // 1/m^2, so the bound-driven loop stops only at a loose tolerance.
        let tol = Tolerance::new(1e-3, 1e-3);
        let out = sum_symmetric(
            |m| Ok(1.0 / ((m * m) as f64 + 1.0)),
            |m| {
                if m == 0 {
                    f64::INFINITY
                } else {
                    2.0 * inverse_power_tail(m as f64, 0.0, 2.0)
                }
            },
            &tol,
        )
        .unwrap();
        assert!((out.value - PI_COTH_PI).abs() <= out.tail_bound);
        assert!(out.tail_bound <= tol.target(out.value));
    }

    #[test]
    fn comb_with_subtracted_envelope_reaches_tight_tolerance() {
        // Subtracting the 1/m^2 envelope (whose total is pi^2/3) leaves
        // terms decaying like 1/m^4, reachable at 1e-10 within the budget.
        let tol = Tolerance::new(1e-10, 1e-10);
        let out = sum_symmetric(
            |m| {
                if m == 0 {
                    Ok(1.0)
                } else {
                    let m2 = (m * m) as f64;
                    Ok(1.0 / (m2 + 1.0) - 1.0 / m2)
                }
            },
            |m| {
                if m == 0 {
                    f64::INFINITY
                } else {
                    2.0 * inverse_power_tail(m as f64, 0.0, 4.0)
                }
            },
            &tol,
        )
        .unwrap();
        let pi2_over_3 = std::f64::consts::PI * std::f64::consts::PI / 3.0;
        assert_relative_eq!(out.value + pi2_over_3, PI_COTH_PI, max_relative = 1e-9);
    }

    #[test]
    fn stubborn_tail_bound_errors_out() {
        let tol = Tolerance {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 64,
        };
        let err = sum_symmetric(|m| Ok(1.0 / ((m * m) as f64 + 1.0)), |_| 1.0, &tol);
        match err {
            Err(Error::SeriesTail { terms, .. }) => assert_eq!(terms, 64),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn inverse_power_tail_is_a_true_bound() {
        // Compare against a long direct sum for p = 3.
        let direct: f64 = (101..40_000).map(|m| (m as f64).powi(-3)).sum();
        let bound = inverse_power_tail(100.0, 0.0, 3.0);
        assert!(bound >= direct);
        assert!(bound <= direct * 1.05);
    }
}
