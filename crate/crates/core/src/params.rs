//! Problem parameters: the exponent pair `(p, q)` and the dimension `N`.
//!
//! Admissibility follows the standing hypotheses of the eigenvalue problem:
//! `1 < p < infinity` and `1 < q < p*` where `p* = Np/(N-p)` is the Sobolev
//! conjugate for `p < N` (no upper bound on `q` when `p >= N`).  Under these
//! hypotheses the quotient scales under dilation as
//!
//! ```text
//! lambda(t D) = t^sigma lambda(D),   sigma = N/p - 1 - N/q,
//! ```
//!
//! obtained by transplanting `u(x/t)`: the gradient `L^p` norm picks up
//! `t^{N/p - 1}` and the `L^q` norm `t^{N/q}`.  Admissibility is exactly
//! what makes `sigma < 0` (larger domains have smaller eigenvalues).

use crate::error::SolverError;
use serde::{Deserialize, Serialize};

/// Validated exponent triple.  Immutable; freely shareable across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    p: f64,
    q: f64,
    dim: u32,
}

impl ProblemParams {
    /// Validates `(p, q, dim)` against the admissibility hypotheses.
    ///
    /// Rejects `p <= 1`, `q <= 1`, `dim < 1`, non-finite exponents, and
    /// `q >= p*` when `p < N` (the boundary `q = p*` is excluded).
    pub fn validate(p: f64, q: f64, dim: u32) -> Result<Self, SolverError> {
        if !p.is_finite() || p <= 1.0 {
            return Err(SolverError::NonAdmissible {
                reason: format!("p must satisfy 1 < p < infinity, got {p}"),
            });
        }
        if !q.is_finite() || q <= 1.0 {
            return Err(SolverError::NonAdmissible {
                reason: format!("q must satisfy 1 < q, got {q}"),
            });
        }
        if dim < 1 {
            return Err(SolverError::NonAdmissible {
                reason: "dimension must be a positive integer".into(),
            });
        }
        let n = f64::from(dim);
        if p < n {
            let p_star = n * p / (n - p);
            if q >= p_star {
                return Err(SolverError::NonAdmissible {
                    reason: format!("q = {q} >= p* = {p_star} (p = {p} < N = {dim})"),
                });
            }
        }
        Ok(ProblemParams { p, q, dim })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Spatial dimension as a float.
    pub fn n(&self) -> f64 {
        f64::from(self.dim)
    }

    /// Dilation exponent `sigma = N/p - 1 - N/q`; strictly negative for
    /// every admissible triple.
    pub fn scaling_exponent(&self) -> f64 {
        let n = self.n();
        n / self.p - 1.0 - n / self.q
    }
}

/// Conjugate exponent `p' = p / (p - 1)` for `p > 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn classical_linear_case_is_valid() {
        let params = ProblemParams::validate(2.0, 2.0, 2).unwrap();
        assert_eq!(params.p(), 2.0);
        assert_eq!(params.q(), 2.0);
        assert_eq!(params.dim(), 2);
    }

    #[test]
    fn rejects_supercritical_q() {
        // p* = 3*2/(3-2) = 6 < 7
        let err = ProblemParams::validate(2.0, 7.0, 3).unwrap_err();
        assert!(matches!(err, SolverError::NonAdmissible { .. }));
    }

    #[test]
    fn boundary_q_equal_p_star_rejected() {
        // p = 2, N = 3 gives p* = 6 exactly
        assert!(ProblemParams::validate(2.0, 6.0, 3).is_err());
        assert!(ProblemParams::validate(2.0, 5.999, 3).is_ok());
    }

    #[test]
    fn subcritical_fractional_p_is_valid() {
        // p* = 3 * 1.5 / 1.5 = 3 > 2
        assert!(ProblemParams::validate(1.5, 2.0, 3).is_ok());
    }

    #[test]
    fn rejects_low_exponents_and_dim() {
        assert!(ProblemParams::validate(1.0, 2.0, 2).is_err());
        assert!(ProblemParams::validate(0.5, 2.0, 2).is_err());
        assert!(ProblemParams::validate(2.0, 1.0, 2).is_err());
        assert!(ProblemParams::validate(2.0, 2.0, 0).is_err());
        assert!(ProblemParams::validate(f64::INFINITY, 2.0, 2).is_err());
        assert!(ProblemParams::validate(2.0, f64::NAN, 2).is_err());
    }

    #[test]
    fn scaling_exponent_values() {
        let pq = ProblemParams::validate(2.0, 2.0, 3).unwrap();
        assert_relative_eq!(pq.scaling_exponent(), -1.0);
        let pq = ProblemParams::validate(3.0, 3.0, 2).unwrap();
        assert_relative_eq!(pq.scaling_exponent(), -1.0);
        let pq = ProblemParams::validate(2.0, 4.0, 2).unwrap();
        assert_relative_eq!(pq.scaling_exponent(), -0.5);
    }

    #[test]
    fn conjugate_exponent_values() {
        assert_relative_eq!(conjugate_exponent(2.0), 2.0);
        assert_relative_eq!(conjugate_exponent(3.0), 1.5);
        assert_relative_eq!(conjugate_exponent(1.5), 3.0);
    }

    proptest! {
        // sigma < 0 over a randomized admissible grid
        #[test]
        fn scaling_exponent_negative(p in 1.01f64..8.0, t in 0.0f64..0.999, dim in 1u32..6) {
            let n = f64::from(dim);
            // sample q admissibly: below p* when p < N, else in (1, 12)
            let q_hi = if p < n { n * p / (n - p) } else { 12.0 };
            let q = 1.0 + t * (q_hi.min(12.0) - 1.0);
            if q > 1.0 {
                if let Ok(params) = ProblemParams::validate(p, q, dim) {
                    prop_assert!(params.scaling_exponent() < 0.0);
                }
            }
        }

        #[test]
        fn conjugate_is_involution(p in 1.001f64..50.0) {
            let pp = conjugate_exponent(conjugate_exponent(p));
            prop_assert!((pp - p).abs() <= 1e-12 * p);
        }

        // the validator accepts exactly the admissibility region
        #[test]
        fn validate_matches_region(p in 0.5f64..6.0, q in 0.5f64..10.0, dim in 1u32..5) {
            let n = f64::from(dim);
            let admissible = p > 1.0 && q > 1.0 && (p >= n || q < n * p / (n - p));
            prop_assert_eq!(ProblemParams::validate(p, q, dim).is_ok(), admissible);
        }
    }
}
