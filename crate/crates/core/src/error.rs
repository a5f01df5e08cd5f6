//! Error taxonomy for the spectral and geometric-phase computations.
//!
//! Every fallible operation in this crate returns [`Result`]. The variants
//! distinguish conditions a caller can act on: domain violations (bad input),
//! numerical non-convergence (tolerance not reached within budget), and
//! structural outcomes such as the absence of a bound level in a spectral gap,
//! which is a legitimate physical result rather than a failure of the method.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the numerical and spectral layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error in {context}: {message}")]
    Domain {
        /// Name of the operation that rejected the input.
        context: &'static str,
        /// Human-readable description of the violated precondition.
        message: String,
    },

    /// An adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimate {estimate:.6e}, residual error {error:.6e}, tolerance {tol:.6e}")]
    QuadratureNonConvergence {
        /// Best available estimate of the integral.
        estimate: f64,
        /// Error estimate attached to that value.
        error: f64,
        /// The tolerance that was requested.
        tol: f64,
    },

    /// A series summation stopped with a tail bound still above tolerance.
    #[error("series tail bound {bound:.6e} exceeds tolerance {tol:.6e} after {terms} terms")]
    SeriesTail {
        /// Analytic bound on the discarded tail.
        bound: f64,
        /// The tolerance that was requested.
        tol: f64,
        /// Number of terms summed before giving up.
        terms: usize,
    },

    /// A root bracket has no sign change.
    #[error("no sign change on [{lo:.6e}, {hi:.6e}]: f(lo) = {flo:.6e}, f(hi) = {fhi:.6e}")]
    NoSignChange {
        /// Lower bracket endpoint.
        lo: f64,
        /// Upper bracket endpoint.
        hi: f64,
        /// Function value at the lower endpoint.
        flo: f64,
        /// Function value at the upper endpoint.
        fhi: f64,
    },

    /// An iteration exceeded its budget without meeting its tolerance.
    #[error("{context} exceeded {max_iter} iterations")]
    MaxIterations {
        /// Name of the iterative procedure.
        context: &'static str,
        /// The iteration budget that was exhausted.
        max_iter: usize,
    },

    /// A Green function was requested at coincident arguments, where it
    /// diverges logarithmically.
    #[error("Green function evaluated at coincident points")]
    Coincidence,

    /// The requested energy lies outside the stated spectral gap.
    #[error("energy {energy:.6e} lies outside the gap ({lo:.6e}, {hi:.6e})")]
    OutsideGap {
        /// The offending energy.
        energy: f64,
        /// Lower gap edge (may be -inf).
        lo: f64,
        /// Upper gap edge.
        hi: f64,
    },

    /// No bound level exists in the requested gap for the given coupling.
    /// This is a legitimate spectral outcome for couplings that push the
    /// level out through a gap edge.
    #[error("no bound level in gap {gap_index} for coupling alpha = {alpha:.6e}")]
    NoSolutionInGap {
        /// Index of the spectral gap that was searched.
        gap_index: usize,
        /// The boundary-condition strength used in the search.
        alpha: f64,
    },

    /// The requested gap index is not defined for this background.
    #[error("gap {index} is not available for the {background} background: {reason}")]
    GapUnavailable {
        /// The requested gap index.
        index: usize,
        /// Which background rejected the request.
        background: &'static str,
        /// Why the gap cannot be provided.
        reason: &'static str,
    },

    /// Composite spectral function hit a pole of its inner resolvent term.
    #[error("inner spectral function has a pole at E = {energy:.6e}; the composite value is undefined there")]
    InnerPole {
        /// Energy at which the inner denominator vanishes.
        energy: f64,
    },

    /// A loop path is degenerate (too few distinct vertices, zero length, ...).
    #[error("degenerate loop: {0}")]
    DegenerateLoop(String),

    /// A loop vertex or edge touches the flux line at the origin, where the
    /// enclosed-flux decomposition is ill-defined.
    #[error("loop passes through the flux line at the origin")]
    LoopThroughOrigin,

    /// Two independent evaluation routes for the same quantity disagree
    /// beyond the cross-validation threshold.
    #[error("evaluation routes disagree in {context}: {a:.12e} vs {b:.12e} (rel. diff {rel:.3e})")]
    RouteDisagreement {
        /// Name of the quantity being cross-validated.
        context: &'static str,
        /// Value from the first route.
        a: f64,
        /// Value from the second route.
        b: f64,
        /// Relative difference between the two.
        rel: f64,
    },

    /// Intermediate values exceeded the floating-point range.
    #[error("overflow in {0}; rescale or use the exponentially scaled variant")]
    Overflow(&'static str),

    /// The requested quantity has no implemented route for this background.
    #[error("{what} is not available for the {background} background")]
    NotAvailable {
        /// Which background lacks the route.
        background: &'static str,
        /// What was requested.
        what: &'static str,
    },
}

impl Error {
    /// Convenience constructor for domain errors.
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}
