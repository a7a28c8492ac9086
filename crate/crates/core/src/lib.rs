//! Numerical toolkit for the first generalized twisted Dirichlet eigenvalue
//!
//! The central object is
//!
//! ```text
//! lambda_{p,q}(D) = inf { ||grad v||_p / ||v||_q :
//!                         v in W^{1,p}_0(D), v != 0,
//!                         integral of |v|^{q-2} v over D = 0 }
//! ```
//!
//! The vanishing signed moment forces every admissible function to change
//! sign, so the minimizer has at least two nodal domains.  On radially
//! symmetric domains (single balls, unions of two balls, 1D intervals) the
//! eigenvalue reduces to a radial quasilinear ODE that can be solved by
//! shooting, and the optimality theory (equal-balls minimality, flux
//! matching at the optimum, the Pohozaev identity, Hadamard-type shape
//! derivatives, rearrangement inequalities) becomes a set of numerically
//! checkable identities.  This crate provides the solvers and the checks:
//!
//! * [`params`] — admissibility of the exponent triple `(p, q, N)` and the
//!   dilation scaling exponent of the quotient.
//! * [`quadrature`] — radial grids, sampled profiles and weighted
//!   quadrature for all norms and moments.
//! * [`shooting`] — the radial Cauchy problem in momentum form, first-zero
//!   detection, the exact two-parameter rescaling family, and the
//!   initial-height comparison check.
//! * [`ball`] — the single-ball eigenvalue by shooting plus scaling, with a
//!   direct discretized Rayleigh-quotient minimizer as oracle.
//! * [`twisted`] — the two-ball eigenpair with the constraint multiplier as
//!   an unknown of a three-dimensional shooting system, cross-validated by
//!   a direct constrained minimizer.
//! * [`shape`] — volume-constrained radius sweeps, location of the optimal
//!   split, and the flux / divergence / Pohozaev / Hadamard identities.
//! * [`wirtinger`] — the 1D generalized Wirtinger constant on `(-1, 1)` and
//!   the associated curve isoperimetric inequality.
//! * [`rearrange`] — decreasing rearrangements with exact equimeasurability
//!   and Polya-Szego checks on piecewise-linear data.

// validation deliberately uses negated comparisons (`!(x > 0.0)`) so that
// NaN inputs fail closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod error;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod rearrange;
pub mod shape;
pub mod shooting;
pub mod twisted;
pub mod wirtinger;

pub use ball::{ball_lambda, ball_lambda_direct, ball_lambda_opts, scaling_check, BallEigenResult};
pub use error::SolverError;
pub use params::{conjugate_exponent, ProblemParams};
pub use quadrature::{unit_ball_measure, RadialGrid, RadialProfile};
pub use rearrange::{
    check_equimeasurable, decreasing_rearrangement, polya_szego_check_1d, two_ball_reduction_demo,
    DomainTag, PiecewiseLinear, SampledFunction,
};
pub use shape::{
    check_divergence_identity, check_flux_equality, find_optimal_split, hadamard_derivative,
    pohozaev_residual, sweep_volume, OptimalSplit, SweepRecord,
};
pub use shooting::{check_comparison, rescale_shot, shoot, ShotResult, SourceSpec};
pub use twisted::{
    multiplier_report, twisted_direct, twisted_structured, MultiplierReport, TwistedConfig,
    TwistedResult,
};
pub use wirtinger::{
    curve_area, curve_length_p, isoperimetric_defect, wirtinger_lambda, wirtinger_lambda_direct,
    ParametricCurve,
};
