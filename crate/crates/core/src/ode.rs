//! Embedded Dormand-Prince 5(4) integrator with dense output and event
//! location.
//!
//! The shooting module integrates small first-order systems (state plus
//! running integrals) whose right-hand sides are cheap, so a classic
//! adaptive RK pair with step rejection is the right tool.  Accepted steps
//! are recorded with their endpoint derivatives, giving cubic Hermite
//! interpolation between nodes; events (sign changes of a scalar function
//! of the state) are located by bisection on partial steps re-taken from
//! the last accepted node, which keeps the located point consistent with
//! the numerical flow to integrator accuracy.

use crate::error::SolverError;

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative tolerance of the local error test.
    pub rtol: f64,
    /// Absolute tolerance of the local error test.
    pub atol: f64,
    /// Hard cap on the number of accepted plus rejected steps.
    pub max_steps: usize,
    /// Maximum step as a fraction of the integration span.
    pub max_step_fraction: f64,
    /// Absolute tolerance on the abscissa of a located event.
    pub event_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 1_000_000,
            max_step_fraction: 1.0 / 16.0,
            event_tol: 1e-12,
        }
    }
}

/// One accepted step with endpoint derivatives (cubic Hermite data).
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<const D: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    pub f0: [f64; D],
    pub f1: [f64; D],
}

impl<const D: usize> StepRecord<D> {
    /// Cubic Hermite interpolant at `t` within `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; D] {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut y = [0.0; D];
        for i in 0..D {
            y[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        y
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// Reached the requested endpoint.
    Endpoint,
    /// The event function crossed zero (falling) at the recorded abscissa.
    Event { t: f64 },
}

/// Recorded numerical flow of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory<const D: usize> {
    pub steps: Vec<StepRecord<D>>,
    pub t_start: f64,
    pub y_start: [f64; D],
    pub t_end: f64,
    pub y_end: [f64; D],
}

impl<const D: usize> Trajectory<D> {
    pub fn steps(&self) -> &[StepRecord<D>] {
        &self.steps
    }

    /// State at `t` by Hermite interpolation on the covering step; clamps
    /// to the integration range.
    pub fn sample(&self, t: f64) -> [f64; D] {
        if self.steps.is_empty() || t <= self.t_start {
            return self.y_start;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.steps[mid].t1 < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.steps[lo].interpolate(t)
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step of size `h` from `(t, y)` with known `f(t, y)`.
/// Returns the 5th-order solution, its derivative (FSAL stage) and the
/// embedded error estimate.
fn dp_step<const D: usize, F>(rhs: &F, t: f64, y: &[f64; D], f0: &[f64; D], h: f64) -> ([f64; D], [f64; D], [f64; D])
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut k: [[f64; D]; 7] = [[0.0; D]; 7];
    k[0] = *f0;
    for stage in 0..6 {
        let mut ytmp = [0.0; D];
        for i in 0..D {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                acc += A[stage][j] * kj[i];
            }
            ytmp[i] = y[i] + h * acc;
        }
        k[stage + 1] = rhs(t + C[stage] * h, &ytmp);
    }
    // k[6] is f at the 5th-order solution (FSAL)
    let mut ynew = [0.0; D];
    let mut err = [0.0; D];
    for i in 0..D {
        let mut acc = 0.0;
        let mut e = 0.0;
        for j in 0..6 {
            acc += A[5][j] * k[j][i];
        }
        for j in 0..7 {
            e += E[j] * k[j][i];
        }
        ynew[i] = y[i] + h * acc;
        err[i] = h * e;
    }
    (ynew, k[6], err)
}

fn error_norm<const D: usize>(err: &[f64; D], y0: &[f64; D], y1: &[f64; D], opts: &OdeOptions) -> f64 {
    let mut sum = 0.0;
    for i in 0..D {
        let scale = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / scale;
        sum += r * r;
    }
    (sum / D as f64).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` to `t_end`, optionally
/// stopping at the first falling zero of `event(t, y)`.
pub fn integrate<const D: usize, F, G>(
    rhs: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &OdeOptions,
    event: Option<G>,
) -> Result<(Trajectory<D>, StopReason), SolverError>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    G: Fn(f64, &[f64; D]) -> f64,
{
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(SolverError::IntegrationFailure {
            reason: format!("empty integration span [{t0}, {t_end}]"),
        });
    }
    let h_max = span * opts.max_step_fraction;
    let mut h = (1e-4 * span).min(h_max);
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    let mut traj = Trajectory {
        steps: Vec::new(),
        t_start: t0,
        y_start: y0,
        t_end: t0,
        y_end: y0,
    };
    let mut g_prev = event.as_ref().map(|g| g(t, &y));

    for _ in 0..opts.max_steps {
        if t >= t_end {
            break;
        }
        h = h.min(t_end - t).min(h_max);
        let (ynew, fnew, err) = dp_step(&rhs, t, &y, &f, h);
        let en = error_norm(&err, &y, &ynew, opts);
        if !en.is_finite() {
            h *= 0.25;
            if h < 1e-15 * span {
                return Err(SolverError::IntegrationFailure {
                    reason: format!("step size collapsed at t = {t}"),
                });
            }
            continue;
        }
        if en <= 1.0 {
            let record = StepRecord { t0: t, t1: t + h, y0: y, y1: ynew, f0: f, f1: fnew };
            if let (Some(g), Some(gp)) = (event.as_ref(), g_prev) {
                let g_new = g(t + h, &ynew);
                if gp > 0.0 && g_new <= 0.0 {
                    // falling crossing inside this step: bisect on partial
                    // steps re-taken from (t, y)
                    let (te, ye, fe) = locate_event(&rhs, t, &y, &f, h, g, opts);
                    traj.steps.push(StepRecord { t0: t, t1: te, y0: y, y1: ye, f0: f, f1: fe });
                    traj.t_end = te;
                    traj.y_end = ye;
                    return Ok((traj, StopReason::Event { t: te }));
                }
                g_prev = Some(g_new);
            }
            traj.steps.push(record);
            t += h;
            y = ynew;
            f = fnew;
            traj.t_end = t;
            traj.y_end = y;
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 0.9);
            if h < 1e-15 * span {
                return Err(SolverError::IntegrationFailure {
                    reason: format!("step size collapsed at t = {t}"),
                });
            }
        }
    }
    if t < t_end {
        return Err(SolverError::IntegrationFailure {
            reason: format!("exceeded {} steps at t = {t}", opts.max_steps),
        });
    }
    Ok((traj, StopReason::Endpoint))
}

/// Bisection for the event abscissa within an accepted step `[t, t + h]`.
/// Each trial state is one partial Dormand-Prince step from `(t, y)`, so
/// the located point lies on the same numerical flow.
fn locate_event<const D: usize, F, G>(
    rhs: &F,
    t: f64,
    y: &[f64; D],
    f: &[f64; D],
    h: f64,
    event: &G,
    opts: &OdeOptions,
) -> (f64, [f64; D], [f64; D])
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    G: Fn(f64, &[f64; D]) -> f64,
{
    let mut lo = 0.0f64;
    let mut hi = h;
    let mut best = None;
    for _ in 0..128 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let (ym, fm, _) = dp_step(rhs, t, y, f, mid);
        let gm = event(t + mid, &ym);
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best = Some((t + mid, ym, fm));
        }
        if hi - lo <= opts.event_tol {
            break;
        }
    }
    match best {
        Some(b) => b,
        None => {
            let (ye, fe, _) = dp_step(rhs, t, y, f, hi);
            (t + hi, ye, fe)
        }
    }
}
