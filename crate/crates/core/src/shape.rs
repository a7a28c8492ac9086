//! Volume-constrained two-ball sweeps and the optimality identities.
//!
//! With total volume `V` fixed, radius pairs are parametrized by `R1` with
//! `R2 = ((V - omega_N R1^N)/omega_N)^{1/N}`.  Along this path the module
//! verifies the chain of optimality facts for the twisted eigenvalue:
//!
//! * the sweep minimum and the golden-section refinement sit at the equal
//!   split;
//! * at a critical pair the boundary fluxes match, `|f1| = |f2|`;
//! * integrating the zero-multiplier Euler equation over each ball gives
//!   `f1^{p-1} |dB1| = f2^{p-1} |dB2|` (divergence identity, applicable
//!   only when the measured multiplier vanishes);
//! * solutions of the radial Euler equation satisfy the Pohozaev identity
//!   relating interior energy, the nonlinearity primitive and the boundary
//!   flux;
//! * the Hadamard boundary formula for the shape derivative of the
//!   eigenvalue matches a volume-preserving finite difference.

use crate::error::SolverError;
use crate::params::ProblemParams;
use crate::quadrature::{integrate_samples, sphere_measure, unit_ball_measure, RadialProfile};
use crate::shooting::{sgn_pow, SourceSpec};
use crate::twisted::{twisted_structured, TwistedConfig, TwistedResult};
use rayon::prelude::*;
use serde::Serialize;

/// One record of a volume-constrained sweep.  Failed solves keep their
/// radii and carry the failure in `status` with empty numeric fields.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub r1: f64,
    pub r2: f64,
    pub lambda: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub m: Option<f64>,
    pub status: String,
}

/// Short machine-readable tag of a solver failure.
pub(crate) fn status_tag(err: &SolverError) -> &'static str {
    match err {
        SolverError::NewtonDivergence { .. } => "newton_divergence",
        SolverError::PositivityLost { .. } => "positivity_lost",
        SolverError::MultiplierUnsupported { .. } => "multiplier_unsupported",
        SolverError::NoZeroFound { .. } => "no_zero",
        SolverError::IntegrationFailure { .. } => "integration_failure",
        SolverError::NonConvergence { .. } => "non_convergence",
        _ => "error",
    }
}

fn require_shape_dim(params: &ProblemParams) -> Result<(), SolverError> {
    if params.dim() < 2 {
        return Err(SolverError::invalid("shape sweeps need dimension N >= 2"));
    }
    Ok(())
}

/// Complementary radius on the volume-constrained path.
pub fn complement_radius(params: &ProblemParams, total_volume: f64, r1: f64) -> f64 {
    let n = params.n();
    let omega = unit_ball_measure(params.dim());
    ((total_volume - omega * r1.powf(n)) / omega).powf(1.0 / n)
}

/// Radius of the equal split, `(V / (2 omega_N))^{1/N}`.
pub fn equal_split_radius(params: &ProblemParams, total_volume: f64) -> f64 {
    let n = params.n();
    (total_volume / (2.0 * unit_ball_measure(params.dim()))).powf(1.0 / n)
}

/// Solves the twisted problem on the volume-constrained pair at `r1`.
fn solve_at(params: &ProblemParams, total_volume: f64, r1: f64) -> Result<TwistedResult, SolverError> {
    let r2 = complement_radius(params, total_volume, r1);
    let config = TwistedConfig::new(*params, r1, r2)?;
    twisted_structured(&config)
}

/// Volume-constrained sweep: `steps` records with `R1` on a uniform grid
/// over `(0, (V/(2 omega_N))^{1/N}]`, the last record being the equal
/// split.  Records are solved independently (in parallel) and returned in
/// grid order; per-record failures land in `status`.
pub fn sweep_volume(
    params: &ProblemParams,
    total_volume: f64,
    steps: usize,
) -> Result<Vec<SweepRecord>, SolverError> {
    require_shape_dim(params)?;
    if steps < 8 {
        return Err(SolverError::invalid(format!("sweep needs at least 8 steps, got {steps}")));
    }
    if !(total_volume > 0.0) {
        return Err(SolverError::invalid("total volume must be positive"));
    }
    let r_eq = equal_split_radius(params, total_volume);
    let records: Vec<SweepRecord> = (1..=steps)
        .into_par_iter()
        .map(|i| {
            let r1 = r_eq * i as f64 / steps as f64;
            let r2 = complement_radius(params, total_volume, r1);
            match solve_at(params, total_volume, r1) {
                Ok(res) => SweepRecord {
                    r1,
                    r2,
                    lambda: Some(res.lambda),
                    f1: Some(res.f1),
                    f2: Some(res.f2),
                    m: Some(res.m),
                    status: "ok".into(),
                },
                Err(e) => SweepRecord {
                    r1,
                    r2,
                    lambda: None,
                    f1: None,
                    f2: None,
                    m: None,
                    status: status_tag(&e).into(),
                },
            }
        })
        .collect();
    Ok(records)
}

/// Result of the optimal-split search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimalSplit {
    pub r1: f64,
    pub r2: f64,
    pub lambda: f64,
    /// False when golden-section refinement was abandoned (non-unimodal
    /// coarse data) and the coarse minimum is returned instead.
    pub refined: bool,
}

/// Locates the minimizing split: coarse grid minimum refined by
/// golden-section search (the sweep is observed unimodal about the equal
/// split; `lambda(r1)` extends symmetrically past the equal split by
/// swapping the pair).
pub fn find_optimal_split(
    params: &ProblemParams,
    total_volume: f64,
    tol: f64,
) -> Result<OptimalSplit, SolverError> {
    require_shape_dim(params)?;
    if !(tol > 0.0) {
        return Err(SolverError::invalid("tolerance must be positive"));
    }
    let r_eq = equal_split_radius(params, total_volume);
    let lam_at = |r1: f64| -> Result<f64, SolverError> { Ok(solve_at(params, total_volume, r1)?.lambda) };
    // coarse bracket around the equal split; lambda is symmetric in the
    // pair, so parametrize by r1 across the equal split
    let coarse: Vec<f64> = (0..=8).map(|i| r_eq * (0.85 + 0.15 * i as f64 / 8.0)).collect();
    let mut best = (r_eq, f64::INFINITY);
    for &r1 in &coarse {
        let lam = lam_at(r1)?;
        if lam < best.1 {
            best = (r1, lam);
        }
    }
    // golden section on [a, b] = [best bracket, mirrored past the split];
    // past the equal split the pair is evaluated through its swap
    let eval = |r1: f64| -> Result<f64, SolverError> {
        let r1_eff = if r1 > r_eq { mirror_radius(params, total_volume, r1) } else { r1 };
        lam_at(r1_eff)
    };
    let span = coarse[1] - coarse[0];
    let mut a = (best.0 - span).max(coarse[0]);
    let mut b = mirror_radius(params, total_volume, a);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let mut iterations = 0;
    while (b - a) > tol && iterations < 200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?;
        }
        iterations += 1;
    }
    let r1_star = 0.5 * (a + b);
    let r1_eff = if r1_star > r_eq { mirror_radius(params, total_volume, r1_star) } else { r1_star };
    let lam_star = eval(r1_star)?;
    if lam_star > best.1 + 1e-9 * best.1 {
        // refinement did not beat the coarse minimum: report the coarse one
        return Ok(OptimalSplit {
            r1: best.0,
            r2: complement_radius(params, total_volume, best.0),
            lambda: best.1,
            refined: false,
        });
    }
    Ok(OptimalSplit {
        r1: r1_eff,
        r2: complement_radius(params, total_volume, r1_eff),
        lambda: lam_star,
        refined: true,
    })
}

/// `r1` value whose pair is the swap of the pair at `r1` (reflection about
/// the equal split).
fn mirror_radius(params: &ProblemParams, total_volume: f64, r1: f64) -> f64 {
    complement_radius(params, total_volume, r1)
}

/// Relative flux mismatch `|f1 - f2| / max(f1, f2)`; vanishes at critical
/// pairs.
pub fn check_flux_equality(result: &TwistedResult) -> f64 {
    (result.f1 - result.f2).abs() / result.f1.max(result.f2)
}

/// Relative residual of `f1^{p-1} |dB1| = f2^{p-1} |dB2|`, the divergence
/// theorem applied to the zero-multiplier Euler equation.  Errors with
/// [`SolverError::IdentityInapplicable`] when the measured multiplier
/// exceeds `m_tol`: the identity presumes the zero-multiplier equation.
pub fn check_divergence_identity(
    result: &TwistedResult,
    params: &ProblemParams,
    m_tol: f64,
) -> Result<f64, SolverError> {
    if result.m.abs() > m_tol {
        return Err(SolverError::IdentityInapplicable { m_abs: result.m.abs(), tol: m_tol });
    }
    let pm1 = params.p() - 1.0;
    let r1 = result.profiles.0.grid().radius();
    let r2 = result.profiles.1.grid().radius();
    let lhs = result.f1.powf(pm1) * sphere_measure(params.dim(), r1);
    let rhs = result.f2.powf(pm1) * sphere_measure(params.dim(), r2);
    Ok((lhs - rhs).abs() / lhs.max(rhs))
}

/// Relative residual of the Pohozaev identity
///
/// ```text
/// -(p-1)/p int_{dB} |grad u|^p (x . nu) dH
///     = int_B [ (N-p)/p |grad u|^p - N G(u) ] dx
/// ```
///
/// for a radial solution on the origin-centered ball, where
/// `G(u) = k u^q / q + m u^{q-1}` is the primitive of the source and the
/// boundary term reduces to `R |dB| flux^p`.
pub fn pohozaev_residual(
    profile: &RadialProfile,
    params: &ProblemParams,
    source: SourceSpec,
    flux: f64,
) -> f64 {
    let (p, q, nf) = (params.p(), params.q(), params.n());
    let dim = params.dim();
    let radius = profile.grid().radius();
    let lhs = -(p - 1.0) / p * radius * sphere_measure(dim, radius) * flux.powf(p);
    let angular = nf * unit_ball_measure(dim);
    let w = dim as i32 - 1;
    let slopes = profile.slopes();
    let integrand: Vec<f64> = profile
        .grid()
        .nodes()
        .iter()
        .zip(profile.values().iter().zip(&slopes))
        .map(|(&r, (&u, &du))| {
            let grad_term = (nf - p) / p * du.abs().powf(p);
            let primitive = source.k * u.abs().powf(q) / q + source.m * sgn_pow(u, q - 1.0);
            (grad_term - nf * primitive) * r.powi(w)
        })
        .collect();
    let rhs = angular * integrate_samples(profile.grid().nodes(), &integrand);
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
}

/// Both routes to the shape derivative of `lambda` along the
/// volume-preserving path, and their relative gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HadamardReport {
    /// Boundary-formula prediction
    /// `-(p-1)/p lambda^{1-p} [f1^p |dB1| s1 + f2^p |dB2| s2]` with
    /// volume-preserving normal speeds `s1 = 1`, `s2 = -|dB1|/|dB2|`.
    pub predicted: f64,
    /// Richardson-extrapolated central difference of `lambda` along the
    /// exactly volume-preserving radius path.
    pub finite_difference: f64,
    pub rel_gap: f64,
}

/// Compares the Hadamard boundary formula for `d lambda / dt` against a
/// finite difference along the volume-preserving path through `(r1, r2)`,
/// with relative step `h`.
pub fn hadamard_derivative(
    params: &ProblemParams,
    r1: f64,
    r2: f64,
    h: f64,
) -> Result<HadamardReport, SolverError> {
    require_shape_dim(params)?;
    if !(h > 0.0) {
        return Err(SolverError::invalid("finite-difference step must be positive"));
    }
    let p = params.p();
    let n = params.n();
    let omega = unit_ball_measure(params.dim());
    let total_volume = omega * (r1.powf(n) + r2.powf(n));
    let center = solve_at(params, total_volume, r1)?;
    let s1 = sphere_measure(params.dim(), r1);
    let s2 = sphere_measure(params.dim(), r2);
    let speed2 = -s1 / s2;
    let lambda = center.lambda;
    let predicted = -(p - 1.0) / p
        * lambda.powf(1.0 - p)
        * (center.f1.powf(p) * s1 + center.f2.powf(p) * s2 * speed2);
    // central differences at two steps plus Richardson extrapolation
    let h_abs = h * r1;
    let diff = |step: f64| -> Result<f64, SolverError> {
        let plus = solve_at(params, total_volume, r1 + step)?.lambda;
        let minus = solve_at(params, total_volume, r1 - step)?.lambda;
        Ok((plus - minus) / (2.0 * step))
    };
    let d1 = diff(h_abs)?;
    let d2 = diff(0.5 * h_abs)?;
    let finite_difference = (4.0 * d2 - d1) / 3.0;
    let scale = predicted.abs().max(finite_difference.abs());
    let rel_gap = if scale < 1e-9 { 0.0 } else { (predicted - finite_difference).abs() / scale };
    Ok(HadamardReport { predicted, finite_difference, rel_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball_lambda;
    use approx::assert_relative_eq;

    fn params(p: f64, q: f64, dim: u32) -> ProblemParams {
        ProblemParams::validate(p, q, dim).unwrap()
    }

    fn twisted_at(p: f64, q: f64, dim: u32, r1: f64, r2: f64) -> TwistedResult {
        twisted_structured(&TwistedConfig::new(params(p, q, dim), r1, r2).unwrap()).unwrap()
    }

    #[test]
    fn sweep_volume_partition_and_minimum() {
        let pq = params(2.0, 2.0, 2);
        let volume = unit_ball_measure(2);
        let records = sweep_volume(&pq, volume, 8).unwrap();
        assert_eq!(records.len(), 8);
        let omega = unit_ball_measure(2);
        for rec in &records {
            let v = omega * (rec.r1.powi(2) + rec.r2.powi(2));
            assert_relative_eq!(v, volume, max_relative = 1e-12);
        }
        // the equal-split record is last and carries the smallest lambda
        let last = records.last().unwrap();
        assert_eq!(last.status, "ok");
        assert_relative_eq!(last.r1, last.r2, max_relative = 1e-12);
        let lam_eq = last.lambda.unwrap();
        for rec in &records {
            if let Some(lam) = rec.lambda {
                assert!(lam >= lam_eq - 1e-9 * lam_eq, "record below equal-split value");
            }
        }
        assert_relative_eq!(lam_eq, 3.40092, max_relative = 1e-4);
    }

    #[test]
    fn sweep_lambda_is_continuous_in_the_grid() {
        // adjacent converged records differ by O(grid step); the constant
        // is a fixed regression guard calibrated on the observed slope
        let pq = params(2.0, 2.0, 2);
        let volume = unit_ball_measure(2);
        let records = sweep_volume(&pq, volume, 16).unwrap();
        let step = records[1].r1 - records[0].r1;
        const SLOPE_BOUND: f64 = 20.0;
        for pair in records.windows(2) {
            if let (Some(a), Some(b)) = (pair[0].lambda, pair[1].lambda) {
                assert!(
                    (b - a).abs() <= SLOPE_BOUND * step,
                    "jump {} over step {}",
                    (b - a).abs(),
                    step
                );
            }
        }
    }

    #[test]
    fn sweep_rejects_bad_input() {
        let pq = params(2.0, 2.0, 2);
        assert!(sweep_volume(&pq, 1.0, 4).is_err());
        assert!(sweep_volume(&params(2.0, 2.0, 1), 1.0, 8).is_err());
    }

    #[test]
    fn optimal_split_is_equal() {
        let pq = params(2.0, 2.0, 2);
        let volume = unit_ball_measure(2);
        let split = find_optimal_split(&pq, volume, 1e-5).unwrap();
        assert!((split.r1 - split.r2).abs() <= 1e-4, "split ({}, {})", split.r1, split.r2);
        assert_relative_eq!(split.r1, 0.5f64.sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn optimal_split_is_equal_for_nonlinear_exponents() {
        let pq = params(3.0, 2.5, 2);
        let volume = unit_ball_measure(2);
        let split = find_optimal_split(&pq, volume, 1e-5).unwrap();
        assert!((split.r1 - split.r2).abs() <= 1e-4, "split ({}, {})", split.r1, split.r2);
    }

    #[test]
    fn flux_equality_detects_criticality() {
        let eq = twisted_at(2.0, 2.0, 2, 0.7, 0.7);
        assert!(check_flux_equality(&eq) < 1e-8);
        let uneq = twisted_at(2.0, 2.0, 2, 0.6, 0.8);
        assert!(check_flux_equality(&uneq) > 1e-2);
    }

    #[test]
    fn divergence_identity_at_equal_split() {
        let pq = params(2.0, 3.0, 2);
        let eq = twisted_at(2.0, 3.0, 2, 0.75, 0.75);
        let resid = check_divergence_identity(&eq, &pq, 1e-8).unwrap();
        assert!(resid < 1e-8, "residual {resid}");
        // cross-check against the source integral per ball:
        // f^{p-1} |dB| = k int u^{q-1} r^{N-1} dr * N omega_N
        let euler_k = eq.lambda.powf(pq.p());
        for (profile, flux) in [(&eq.profiles.0, eq.f1), (&eq.profiles.1, eq.f2)] {
            let lhs = flux.powf(pq.p() - 1.0) * sphere_measure(2, profile.grid().radius());
            let rhs = euler_k * crate::quadrature::signed_q_moment(profile, pq.q());
            assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        }
        // inapplicable when the multiplier is genuinely nonzero
        let uneq = twisted_at(2.0, 2.0, 2, 0.6, 0.8);
        assert!(matches!(
            check_divergence_identity(&uneq, &params(2.0, 2.0, 2), 1e-8),
            Err(SolverError::IdentityInapplicable { .. })
        ));
    }

    #[test]
    fn pohozaev_on_single_ball_eigenfunctions() {
        for (p, q, dim) in [(2.0, 2.0, 3u32), (2.0, 2.0, 2), (2.0, 3.0, 2), (3.0, 2.0, 2)] {
            let pq = params(p, q, dim);
            let ball = ball_lambda(&pq, 1.0).unwrap();
            let resid = pohozaev_residual(&ball.profile, &pq, SourceSpec::eigen(ball.euler_k), ball.flux);
            assert!(resid < 1e-6, "pohozaev residual {resid} for ({p},{q},{dim})");
        }
    }

    #[test]
    fn pohozaev_interior_term_is_negative() {
        // if the flux vanished, the right side would have to vanish too;
        // under admissibility it is strictly negative, mirroring the
        // contradiction that rules out zero flux
        for (p, q, dim) in [(2.0, 2.0, 3u32), (2.0, 3.0, 2), (1.5, 2.0, 3)] {
            let pq = params(p, q, dim);
            assert!((pq.n() - p) / p - pq.n() / q < 0.0);
            let ball = ball_lambda(&pq, 1.0).unwrap();
            let lhs = -(p - 1.0) / p * sphere_measure(dim, 1.0) * ball.flux.powf(p);
            assert!(lhs < 0.0);
        }
    }

    #[test]
    fn hadamard_matches_finite_difference_off_critical() {
        let pq = params(2.0, 2.0, 2);
        let r1 = 0.65;
        let volume = unit_ball_measure(2);
        let r2 = complement_radius(&pq, volume, r1);
        let report = hadamard_derivative(&pq, r1, r2, 1e-3).unwrap();
        assert!(report.rel_gap < 1e-3, "gap {}", report.rel_gap);
        // moving the smaller ball up drives lambda down toward the equal split
        assert!(report.finite_difference < 0.0);
    }

    #[test]
    fn hadamard_vanishes_at_equal_split() {
        let pq = params(2.0, 2.0, 2);
        let r = 0.5f64.sqrt();
        let report = hadamard_derivative(&pq, r, r, 1e-3).unwrap();
        assert!(report.predicted.abs() < 1e-6, "predicted {}", report.predicted);
        assert!(report.finite_difference.abs() < 1e-6, "fd {}", report.finite_difference);
    }

    #[test]
    fn hadamard_nonlinear_case() {
        let pq = params(2.0, 3.0, 2);
        let volume = unit_ball_measure(2);
        let r1 = 0.65;
        let r2 = complement_radius(&pq, volume, r1);
        let report = hadamard_derivative(&pq, r1, r2, 1e-3).unwrap();
        assert!(report.rel_gap < 1e-3, "gap {}", report.rel_gap);
    }
}
