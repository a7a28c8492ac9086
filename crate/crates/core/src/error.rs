//! Error type shared by all solvers in the crate.

use thiserror::Error;

/// Failure modes of the parameter checks, integrators and solvers.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// The exponent triple `(p, q, N)` violates the admissibility
    /// hypotheses (`p > 1`, `q > 1`, `N >= 1`, and `q < p* = Np/(N-p)`
    /// when `p < N`).
    #[error("non-admissible parameters: {reason}")]
    NonAdmissible { reason: String },

    /// The shooting trajectory stayed positive up to `r_max`.
    #[error("no zero found up to r = {r_max}")]
    NoZeroFound { r_max: f64 },

    /// The Cauchy problem needs a positive initial value.
    #[error("initial value must be positive, got {c}")]
    NonPositiveInitial { c: f64 },

    /// Multiplier sources need `q >= 2`: the term `|phi|^{q-2}` is not
    /// integrable at the boundary zero for `q < 2`.
    #[error("multiplier source requires q >= 2 (got q = {q})")]
    SingularSource { q: f64 },

    /// Rescaling is exact only for pure eigen-term sources.
    #[error("rescale is only valid for sources with m = 0 (got m = {m})")]
    RescaleWithMultiplier { m: f64 },

    /// The adaptive integrator exceeded its step budget.
    #[error("ODE integrator failed: {reason}")]
    IntegrationFailure { reason: String },

    /// The multi-shooting Newton iteration did not converge; carries the
    /// last iterate `(k, c2, m)` and its residual norm.
    #[error("Newton iteration diverged (|F| = {residual:.3e} at k = {k:.6e}, c2 = {c2:.6e}, m = {m:.6e})")]
    NewtonDivergence { k: f64, c2: f64, m: f64, residual: f64 },

    /// For `q < 2` only the zero-multiplier branch is available; it cannot
    /// satisfy the moment constraint on generically unequal radii.
    #[error("q < 2 with unequal radii: zero-multiplier branch leaves moment residual {moment_residual:.3e}")]
    MultiplierUnsupported { moment_residual: f64 },

    /// The Newton system converged to a trajectory that changes sign in the
    /// interior: the one-sign-per-ball ansatz has no solution here.
    #[error("converged trajectory loses interior positivity (min value {min_value:.3e}); one-sign-per-ball ansatz not attainable")]
    PositivityLost { min_value: f64 },

    /// A direct (discretized gradient-descent) minimizer stalled above its
    /// convergence tolerance.
    #[error("direct minimizer did not converge: {reason}")]
    NonConvergence { reason: String },

    /// The divergence identity presumes the zero-multiplier Euler equation.
    #[error("identity inapplicable: |m| = {m_abs:.3e} exceeds tolerance {tol:.3e}")]
    IdentityInapplicable { m_abs: f64, tol: f64 },

    /// Rearrangement input must be nonnegative.
    #[error("negative values in rearrangement input (min {min_value:.3e})")]
    NegativeValues { min_value: f64 },

    /// The 1D Polya-Szego check needs zero boundary values.
    #[error("piecewise-linear function must vanish at both endpoints")]
    BoundaryNonzero,

    /// The two-ball reduction demo needs a sign-changing input.
    #[error("input does not change sign")]
    NoSignChange,

    /// Invalid construction of a grid, profile or curve.
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
}

impl SolverError {
    pub fn invalid(reason: impl Into<String>) -> Self {
        SolverError::InvalidInput { reason: reason.into() }
    }
}
