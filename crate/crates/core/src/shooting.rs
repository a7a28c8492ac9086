//! The radial Cauchy problem in momentum form.
//!
//! For a radial function `phi(r)` on a ball in dimension `N`, the Euler
//! equation of the constrained quotient reduces to
//!
//! ```text
//! -(r^{N-1} |phi'|^{p-2} phi')' = r^{N-1} g(phi),
//! g(phi) = k |phi|^{q-2} phi + m (q-1) |phi|^{q-2},
//! phi(0) = c > 0,  phi'(0) = 0,
//! ```
//!
//! where `k` carries the eigenvalue normalization and `m` the Lagrange
//! multiplier of the signed-moment constraint.  The integration state is
//! `(phi, w)` with the momentum `w = r^{N-1} |phi'|^{p-2} phi'` rather than
//! `(phi, phi')`: the system stays regular at `phi' = 0` for `p < 2`, and
//! the inversion `phi' = sign(w) (|w|/r^{N-1})^{1/(p-1)}` is well defined
//! because `1/(p-1) > 0`.  Three running integrals ride along as extra
//! states so that `I_q`, `I_{q-1}` and `I_grad` inherit integrator accuracy
//! instead of a posteriori quadrature error.
//!
//! The momentum equation is singular at `r = 0` (division by `r^{N-1}`), so
//! integration starts at a small offset `eps` from the series
//!
//! ```text
//! phi(r) ~ c - (g(c)/N)^{1/(p-1)} (p-1)/p * r^{p/(p-1)},
//! ```
//!
//! obtained by integrating `w' = -r^{N-1} g(c)` once and inverting.
//!
//! Rescaling family: if `psi` solves the problem with coefficient `k`, then
//! `u(r) = A psi(B r)` solves it with `k` replaced by `A^{p-q} B^p k`, first
//! zero `rho/B`, boundary slope scaled by `A B`, and integrals scaled by
//! `A^q B^{-N}` (I_q), `A^{q-1} B^{-N}` (I_{q-1}) and `A^p B^{p-N}`
//! (I_grad).  This is exact, so one base shot serves a whole family of
//! radii and amplitudes.

use crate::error::SolverError;
use crate::ode::{self, OdeOptions, StopReason, Trajectory};
use crate::params::ProblemParams;
use crate::quadrature::{integrate_samples, RadialGrid, RadialProfile};

/// Source coefficients of the radial equation: `k` multiplies the eigen
/// term `|phi|^{q-2} phi`, `m` the multiplier term `(q-1) |phi|^{q-2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub k: f64,
    pub m: f64,
}

impl SourceSpec {
    /// Pure eigen-term source.
    pub fn eigen(k: f64) -> Self {
        SourceSpec { k, m: 0.0 }
    }

    /// Validated source for the given exponents: `k > 0`, and a nonzero
    /// multiplier requires `q >= 2` (otherwise `|phi|^{q-2}` is not
    /// integrable at the boundary zero).
    pub fn validated(k: f64, m: f64, params: &ProblemParams) -> Result<Self, SolverError> {
        if !(k > 0.0) {
            return Err(SolverError::invalid(format!("source coefficient k must be positive, got {k}")));
        }
        if m != 0.0 && params.q() < 2.0 {
            return Err(SolverError::SingularSource { q: params.q() });
        }
        Ok(SourceSpec { k, m })
    }

    /// `g(phi)`, extended to negative arguments through the odd eigen term
    /// and the even multiplier weight.
    fn eval(&self, phi: f64, q: f64) -> f64 {
        let mut g = self.k * sgn_pow(phi, q - 1.0);
        if self.m != 0.0 {
            g += self.m * (q - 1.0) * phi.abs().powf(q - 2.0);
        }
        g
    }
}

/// `sign(x) |x|^e`.
pub(crate) fn sgn_pow(x: f64, e: f64) -> f64 {
    x.signum() * x.abs().powf(e)
}

/// One node of the recorded trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub r: f64,
    pub phi: f64,
    /// Momentum `w = r^{N-1} |phi'|^{p-2} phi'`.
    pub momentum: f64,
}

/// Outcome of integrating the Cauchy problem up to its first zero.
#[derive(Debug, Clone)]
pub struct ShotResult {
    params: ProblemParams,
    source: SourceSpec,
    /// Initial value `phi(0)`.
    pub c: f64,
    /// Radius of the first sign change.
    pub first_zero: f64,
    /// `phi'(first_zero)`, strictly negative.
    pub boundary_slope: f64,
    /// `int_0^rho |phi|^q r^{N-1} dr`.
    pub i_q: f64,
    /// `int_0^rho |phi|^{q-2} phi r^{N-1} dr`.
    pub i_q_minus_1: f64,
    /// `int_0^rho |phi'|^p r^{N-1} dr`.
    pub i_grad: f64,
    flow: Flow,
}

/// Startup-series coefficients plus the recorded numerical flow; both are
/// needed to evaluate the solution at arbitrary radii.
#[derive(Debug, Clone)]
struct Flow {
    traj: Trajectory<5>,
    eps: f64,
    series_c: f64,
    series_a: f64,
    p_conj: f64,
}

impl Flow {
    fn phi_at(&self, r: f64) -> f64 {
        if r <= self.eps {
            self.series_c - self.series_a * r.powf(self.p_conj)
        } else {
            self.traj.sample(r)[0]
        }
    }

    fn momentum_at(&self, r: f64) -> f64 {
        if r <= self.eps {
            self.traj.y_start[1] * (r / self.eps).powf(self.p_conj - 1.0)
        } else {
            self.traj.sample(r)[1]
        }
    }
}

impl ShotResult {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn source(&self) -> SourceSpec {
        self.source
    }

    /// Trajectory nodes (accepted integrator steps plus the event point).
    pub fn trajectory(&self) -> Vec<TrajectoryPoint> {
        let mut pts = Vec::with_capacity(self.flow.traj.steps().len() + 1);
        for s in self.flow.traj.steps() {
            pts.push(TrajectoryPoint { r: s.t0, phi: s.y0[0], momentum: s.y0[1] });
        }
        pts.push(TrajectoryPoint {
            r: self.flow.traj.t_end,
            phi: self.flow.traj.y_end[0],
            momentum: self.flow.traj.y_end[1],
        });
        pts
    }

    /// Solution value at radius `r` (startup series below the offset,
    /// Hermite-interpolated flow above).
    pub fn phi_at(&self, r: f64) -> f64 {
        self.flow.phi_at(r)
    }

    /// Slope `phi'(r)` recovered from the momentum.
    pub fn slope_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let w = self.flow.momentum_at(r);
        let rn = r.powi(self.params.dim() as i32 - 1);
        sgn_pow(w / rn, 1.0 / (self.params.p() - 1.0))
    }

    /// Renders the solution on a uniform grid over `[0, first_zero]` as a
    /// profile with analytic slopes.
    pub fn profile(&self, n: usize) -> Result<RadialProfile, SolverError> {
        self.profile_scaled(1.0, n)
    }

    /// Profile of `A * phi` on `[0, first_zero]`.
    pub fn profile_scaled(&self, amplitude: f64, n: usize) -> Result<RadialProfile, SolverError> {
        let grid = RadialGrid::uniform(self.first_zero, n, self.params.dim())?;
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| amplitude * self.phi_at(r)).collect();
        let slopes: Vec<f64> = grid.nodes().iter().map(|&r| amplitude * self.slope_at(r)).collect();
        // the boundary node is the located zero
        *values.last_mut().unwrap() = 0.0;
        RadialProfile::with_slopes(grid, values, slopes)
    }

    /// Maximum residual of the momentum identity
    /// `w(r) + int_0^r s^{N-1} g(phi(s)) ds = 0` over the trajectory nodes,
    /// relative to the largest momentum.  Checked by quadrature of the
    /// stored trajectory, independently of the integrator's own updates.
    pub fn momentum_residual(&self) -> f64 {
        let pts = self.trajectory();
        let q = self.params.q();
        let rs: Vec<f64> = pts.iter().map(|p| p.r).collect();
        let gs: Vec<f64> = pts
            .iter()
            .map(|p| p.r.powi(self.params.dim() as i32 - 1) * self.source.eval(p.phi, q))
            .collect();
        let w_scale = pts.iter().map(|p| p.momentum.abs()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in 1..pts.len() {
            let integral = integrate_samples(&rs[..=i], &gs[..=i]);
            let w0 = pts[0].momentum;
            let resid = (pts[i].momentum - w0 + integral).abs();
            worst = worst.max(resid);
        }
        worst / w_scale
    }
}

fn rhs_factory(params: &ProblemParams, source: SourceSpec) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] {
    let p = params.p();
    let q = params.q();
    let nm1 = params.dim() as i32 - 1;
    move |r: f64, y: &[f64; 5]| {
        let rn = r.powi(nm1);
        let phi = y[0];
        let w = y[1];
        let dphi = sgn_pow(w / rn, 1.0 / (p - 1.0));
        [
            dphi,
            -rn * source.eval(phi, q),
            rn * phi.abs().powf(q),
            rn * sgn_pow(phi, q - 1.0),
            rn * dphi.abs().powf(p),
        ]
    }
}

/// Startup state at offset `eps` from the small-`r` series.
struct Startup {
    eps: f64,
    y: [f64; 5],
    series_a: f64,
    p_conj: f64,
}

fn startup(params: &ProblemParams, source: SourceSpec, c: f64, r_span: f64) -> Startup {
    let p = params.p();
    let q = params.q();
    let n = params.n();
    let p_conj = p / (p - 1.0);
    let gc = source.eval(c, q);
    let series_a = sgn_pow(gc / n, 1.0 / (p - 1.0)) * (p - 1.0) / p;
    let r_scale = if series_a.abs() > 0.0 {
        (c / series_a.abs()).powf(1.0 / p_conj)
    } else {
        r_span
    };
    let eps = 1e-6 * r_scale.min(r_span * 1e3);
    let dim = params.dim() as i32;
    let y = [
        c - series_a * eps.powf(p_conj),
        -gc * eps.powi(dim) / n,
        c.abs().powf(q) * eps.powi(dim) / n,
        sgn_pow(c, q - 1.0) * eps.powi(dim) / n,
        (series_a.abs() * p_conj).powf(p) * eps.powf(p_conj + n) / (p_conj + n),
    ];
    Startup { eps, y, series_a, p_conj }
}

fn ode_options(tol: f64) -> OdeOptions {
    OdeOptions {
        rtol: tol,
        atol: tol * 1e-3,
        // keep steps short so Hermite-interpolated profile values stay far
        // below the identity tolerances they feed into
        max_step_fraction: 1.0 / 128.0,
        ..OdeOptions::default()
    }
}

/// Default absolute tolerance on the located first zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Integrates the Cauchy problem from `phi(0) = c` until the first zero of
/// `phi`, or fails with [`SolverError::NoZeroFound`] if `phi > 0` up to
/// `r_max`.
pub fn shoot(
    params: &ProblemParams,
    source: SourceSpec,
    c: f64,
    r_max: f64,
    tol: f64,
) -> Result<ShotResult, SolverError> {
    shoot_with_zero_tol(params, source, c, r_max, tol, DEFAULT_ZERO_TOL)
}

/// As [`shoot`] with an explicit absolute tolerance on the zero location.
pub fn shoot_with_zero_tol(
    params: &ProblemParams,
    source: SourceSpec,
    c: f64,
    r_max: f64,
    tol: f64,
    zero_tol: f64,
) -> Result<ShotResult, SolverError> {
    if !(c > 0.0) {
        return Err(SolverError::NonPositiveInitial { c });
    }
    if !(tol > 0.0) || !(zero_tol > 0.0) {
        return Err(SolverError::invalid(format!(
            "tolerances must be positive, got tol = {tol}, zero_tol = {zero_tol}"
        )));
    }
    let source = SourceSpec::validated(source.k, source.m, params)?;
    let start = startup(params, source, c, r_max);
    let rhs = rhs_factory(params, source);
    let opts = OdeOptions { event_tol: zero_tol, ..ode_options(tol) };
    let (traj, stop) = ode::integrate(
        rhs,
        start.eps,
        start.y,
        r_max,
        &opts,
        Some(|_r: f64, y: &[f64; 5]| y[0]),
    )?;
    let rho = match stop {
        StopReason::Event { t } => t,
        StopReason::Endpoint => return Err(SolverError::NoZeroFound { r_max }),
    };
    let y_end = traj.y_end;
    let nm1 = params.dim() as i32 - 1;
    let slope = sgn_pow(y_end[1] / rho.powi(nm1), 1.0 / (params.p() - 1.0));
    Ok(ShotResult {
        params: *params,
        source,
        c,
        first_zero: rho,
        boundary_slope: slope,
        i_q: y_end[2],
        i_q_minus_1: y_end[3],
        i_grad: y_end[4],
        flow: Flow {
            traj,
            eps: start.eps,
            series_c: c,
            series_a: start.series_a,
            p_conj: start.p_conj,
        },
    })
}

/// End state of an integration to a fixed radius (no event stop); used by
/// the multi-shooting systems where the boundary residual is `phi(R)`.
pub(crate) struct EndState {
    pub y: [f64; 5],
    /// Minimum of `phi` over the recorded nodes and step midpoints.
    pub min_phi: f64,
    flow: Flow,
}

impl EndState {
    pub fn phi_at(&self, r: f64) -> f64 {
        self.flow.phi_at(r)
    }

    pub fn momentum_at(&self, r: f64) -> f64 {
        self.flow.momentum_at(r)
    }
}

pub(crate) fn integrate_to(
    params: &ProblemParams,
    source: SourceSpec,
    c: f64,
    r_end: f64,
    tol: f64,
) -> Result<EndState, SolverError> {
    let start = startup(params, source, c, r_end);
    let rhs = rhs_factory(params, source);
    let opts = ode_options(tol);
    let (traj, _) = ode::integrate(rhs, start.eps, start.y, r_end, &opts, None::<fn(f64, &[f64; 5]) -> f64>)?;
    let mut min_phi = f64::INFINITY;
    for s in traj.steps() {
        min_phi = min_phi.min(s.y0[0]).min(s.y1[0]).min(s.interpolate(0.5 * (s.t0 + s.t1))[0]);
    }
    Ok(EndState {
        y: traj.y_end,
        min_phi,
        flow: Flow {
            traj,
            eps: start.eps,
            series_c: c,
            series_a: start.series_a,
            p_conj: start.p_conj,
        },
    })
}

/// Exact transformation of a shot under `u(r) = A phi(B r)`.  Only valid
/// for pure eigen sources (`m = 0`): the multiplier term breaks the
/// two-parameter homogeneity.
pub fn rescale_shot(
    shot: &ShotResult,
    params: &ProblemParams,
    amplitude: f64,
    stretch: f64,
) -> Result<ShotResult, SolverError> {
    if shot.source.m != 0.0 {
        return Err(SolverError::RescaleWithMultiplier { m: shot.source.m });
    }
    if !(amplitude > 0.0) || !(stretch > 0.0) {
        return Err(SolverError::invalid("rescale factors must be positive"));
    }
    let (a, b) = (amplitude, stretch);
    let p = params.p();
    let q = params.q();
    let n = params.n();
    let scale = [
        a,
        (a * b).powf(p - 1.0) * b.powf(1.0 - n),
        a.powf(q) * b.powf(-n),
        a.powf(q - 1.0) * b.powf(-n),
        a.powf(p) * b.powf(p - n),
    ];
    let map_state = |y: &[f64; 5]| {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = scale[i] * y[i];
        }
        out
    };
    let map_deriv = |f: &[f64; 5]| {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = scale[i] * b * f[i];
        }
        out
    };
    let steps = shot
        .flow
        .traj
        .steps()
        .iter()
        .map(|s| ode::StepRecord {
            t0: s.t0 / b,
            t1: s.t1 / b,
            y0: map_state(&s.y0),
            y1: map_state(&s.y1),
            f0: map_deriv(&s.f0),
            f1: map_deriv(&s.f1),
        })
        .collect();
    let traj = Trajectory {
        steps,
        t_start: shot.flow.traj.t_start / b,
        y_start: map_state(&shot.flow.traj.y_start),
        t_end: shot.flow.traj.t_end / b,
        y_end: map_state(&shot.flow.traj.y_end),
    };
    Ok(ShotResult {
        params: *params,
        source: SourceSpec::eigen(a.powf(p - q) * b.powf(p) * shot.source.k),
        c: a * shot.c,
        first_zero: shot.first_zero / b,
        boundary_slope: a * b * shot.boundary_slope,
        i_q: scale[2] * shot.i_q,
        i_q_minus_1: scale[3] * shot.i_q_minus_1,
        i_grad: scale[4] * shot.i_grad,
        flow: Flow {
            eps: shot.flow.eps / b,
            series_c: a * shot.flow.series_c,
            // series term A * a_base * (B r)^{p'}
            series_a: a * shot.flow.series_a * b.powf(shot.flow.p_conj),
            p_conj: shot.flow.p_conj,
            traj,
        },
    })
}

/// Residual of the radial Euler equation for a sampled profile, in
/// momentum form: the identity
/// `r^{N-1} |u'|^{p-2} u'(r) + int_0^r s^{N-1} g(u(s)) ds = 0`
/// is evaluated by quadrature at every interior node and the worst
/// violation is reported relative to the largest momentum.  This checks a
/// profile against the equation independently of how it was produced.
pub fn euler_momentum_residual(
    profile: &RadialProfile,
    params: &ProblemParams,
    source: SourceSpec,
) -> f64 {
    let nm1 = params.dim() as i32 - 1;
    let p = params.p();
    let q = params.q();
    let rs = profile.grid().nodes();
    let slopes = profile.slopes();
    let gs: Vec<f64> = rs
        .iter()
        .zip(profile.values())
        .map(|(&r, &u)| r.powi(nm1) * source.eval(u, q))
        .collect();
    let ws: Vec<f64> = rs
        .iter()
        .zip(&slopes)
        .map(|(&r, &du)| r.powi(nm1) * sgn_pow(du, p - 1.0))
        .collect();
    let w_scale = ws.iter().map(|w| w.abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 1..rs.len() {
        let integral = integrate_samples(&rs[..=i], &gs[..=i]);
        worst = worst.max((ws[i] + integral).abs());
    }
    worst / w_scale
}

/// Outcome of the initial-height comparison check.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonReport {
    /// `max (phi_1 - phi_2)` over the common domain.
    pub max_gap: f64,
    /// Right end of the common domain.
    pub common_radius: f64,
    pub pass: bool,
}

/// Checks the pointwise ordering `phi_1 <= phi_2` of two Cauchy solutions
/// with initial heights `c1 < c2` over the common domain `[0, R]` clipped
/// at either first zero.  Declares PASS when the largest violation stays
/// below `tol`.
pub fn check_comparison(
    params: &ProblemParams,
    c1: f64,
    c2: f64,
    r: f64,
    tol: f64,
) -> Result<ComparisonReport, SolverError> {
    if !(c1 < c2) {
        return Err(SolverError::invalid(format!("need c1 < c2, got c1 = {c1}, c2 = {c2}")));
    }
    let ode_tol = 1e-12;
    let shot = |c: f64| -> Result<(Flow, f64), SolverError> {
        match shoot(params, SourceSpec::eigen(1.0), c, r, ode_tol) {
            Ok(s) => {
                let rho = s.first_zero;
                Ok((s.flow, rho))
            }
            Err(SolverError::NoZeroFound { .. }) => {
                let end = integrate_to(params, SourceSpec::eigen(1.0), c, r, ode_tol)?;
                Ok((end.flow, r))
            }
            Err(e) => Err(e),
        }
    };
    let (flow1, rho1) = shot(c1)?;
    let (flow2, rho2) = shot(c2)?;
    let end = rho1.min(rho2).min(r);
    let samples = 2048;
    let mut max_gap = f64::NEG_INFINITY;
    for i in 0..=samples {
        let rr = end * i as f64 / samples as f64;
        let gap = flow1.phi_at(rr) - flow2.phi_at(rr);
        if gap > max_gap {
            max_gap = gap;
        }
    }
    Ok(ComparisonReport { max_gap, common_radius: end, pass: max_gap <= tol })
}
