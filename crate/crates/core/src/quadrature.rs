//! Radial grids, sampled profiles, and weighted quadrature.
//!
//! Integrals over a ball of radius `R` in dimension `N` reduce to
//!
//! ```text
//! integral over B_R of f(|x|) dx = N omega_N integral_0^R f(r) r^{N-1} dr
//! ```
//!
//! with `omega_N` the unit-ball measure.  Quadrature is composite Simpson
//! on possibly non-uniform grids (local quadratic fits over node triples,
//! trapezoid for a bare two-point grid).  The weight `r^{N-1}` vanishes at
//! the origin but is smooth, so no endpoint treatment is needed.

use crate::error::SolverError;
use serde::{Deserialize, Serialize};

/// Measure of the unit ball in dimension `dim`, via the recursion
/// `omega_N = 2 pi / N * omega_{N-2}` with `omega_0 = 1`, `omega_1 = 2`.
pub fn unit_ball_measure(dim: u32) -> f64 {
    let mut omega = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut n = if dim.is_multiple_of(2) { 2 } else { 3 };
    while n <= dim {
        omega *= 2.0 * std::f64::consts::PI / f64::from(n);
        n += 2;
    }
    omega
}

/// Surface measure of the sphere of radius `r` in dimension `dim`:
/// `N omega_N r^{N-1}`.
pub fn sphere_measure(dim: u32, r: f64) -> f64 {
    f64::from(dim) * unit_ball_measure(dim) * r.powi(dim as i32 - 1)
}

/// Quadratic-fit composite quadrature of samples `(xs, ys)` on a strictly
/// increasing, possibly non-uniform grid.  Falls back to the trapezoid rule
/// when only two samples are given.
pub fn integrate_samples(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "sample length mismatch");
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    // pairs of intervals
    while i + 2 < n {
        let (h0, h1) = (xs[i + 1] - xs[i], xs[i + 2] - xs[i + 1]);
        let h = h0 + h1;
        total += h / 6.0
            * ((2.0 - h1 / h0) * ys[i]
                + h * h / (h0 * h1) * ys[i + 1]
                + (2.0 - h0 / h1) * ys[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // trailing interval: integrate the quadratic through the last three
        // nodes over the final interval only
        let (h0, h1) = (xs[n - 2] - xs[n - 3], xs[n - 1] - xs[n - 2]);
        let c0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        let c1 = h1 * h1 / (6.0 * h0) + 0.5 * h1;
        let c2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
        total += c0 * ys[n - 3] + c1 * ys[n - 2] + c2 * ys[n - 1];
    }
    total
}

/// Discretization carrier for radial functions on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    dim: u32,
}

impl RadialGrid {
    /// Grid from explicit nodes; requires a strictly increasing sequence
    /// starting at 0 with at least 16 nodes.
    pub fn new(nodes: Vec<f64>, dim: u32) -> Result<Self, SolverError> {
        if nodes.len() < 16 {
            return Err(SolverError::invalid(format!(
                "radial grid needs at least 16 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(SolverError::invalid("radial grid must start at r = 0"));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(SolverError::invalid("radial grid nodes must be strictly increasing"));
        }
        if !nodes.iter().all(|r| r.is_finite()) {
            return Err(SolverError::invalid("radial grid nodes must be finite"));
        }
        Ok(RadialGrid { nodes, dim })
    }

    /// Uniform grid of `n` nodes on `[0, radius]`.
    pub fn uniform(radius: f64, n: usize, dim: u32) -> Result<Self, SolverError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SolverError::invalid(format!("radius must be positive, got {radius}")));
        }
        let nodes = (0..n)
            .map(|i| radius * i as f64 / (n - 1) as f64)
            .collect();
        Self::new(nodes, dim)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A sampled radial function `u(r_i)` on a [`RadialGrid`], optionally
/// carrying analytically known slopes `u'(r_i)` (shooting output does, so
/// gradient norms can bypass finite differencing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    slopes: Option<Vec<f64>>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::invalid(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(SolverError::invalid("profile values must be finite"));
        }
        Ok(RadialProfile { grid, values, slopes: None })
    }

    /// Profile with analytically known slopes (same length as values).
    pub fn with_slopes(
        grid: RadialGrid,
        values: Vec<f64>,
        slopes: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if slopes.len() != values.len() {
            return Err(SolverError::invalid("slope/value length mismatch"));
        }
        if !slopes.iter().all(|v| v.is_finite()) {
            return Err(SolverError::invalid("profile slopes must be finite"));
        }
        let mut profile = Self::new(grid, values)?;
        profile.slopes = Some(slopes);
        Ok(profile)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_analytic_slopes(&self) -> bool {
        self.slopes.is_some()
    }

    /// Slopes `u'(r_i)`: the stored analytic ones when present, otherwise
    /// centered finite differences (one-sided second order at endpoints).
    pub fn slopes(&self) -> Vec<f64> {
        if let Some(s) = &self.slopes {
            return s.clone();
        }
        let xs = self.grid.nodes();
        let ys = &self.values;
        let n = xs.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            d[i] = -h1 / (h0 * (h0 + h1)) * ys[i - 1]
                + (h1 - h0) / (h0 * h1) * ys[i]
                + h0 / (h1 * (h0 + h1)) * ys[i + 1];
        }
        let (h0, h1) = (xs[1] - xs[0], xs[2] - xs[1]);
        d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * ys[0]
            + (h0 + h1) / (h0 * h1) * ys[1]
            - h0 / (h1 * (h0 + h1)) * ys[2];
        let (g0, g1) = (xs[n - 2] - xs[n - 3], xs[n - 1] - xs[n - 2]);
        d[n - 1] = g1 / (g0 * (g0 + g1)) * ys[n - 3]
            - (g0 + g1) / (g0 * g1) * ys[n - 2]
            + (g0 + 2.0 * g1) / (g1 * (g0 + g1)) * ys[n - 1];
        d
    }

    /// Maps node-wise `(r, u(r))` to an integrand sample.
    fn weighted(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| f(r, u))
            .collect()
    }
}

/// Full N-dimensional integral `N omega_N int f(r) r^w dr` of a profile,
/// with `w = weight_power` (the natural choice is `N - 1`).
pub fn integrate_radial(profile: &RadialProfile, weight_power: i32) -> f64 {
    let dim = profile.grid().dim();
    let angular = f64::from(dim) * unit_ball_measure(dim);
    let ys = profile.weighted(|r, u| u * r.powi(weight_power));
    angular * integrate_samples(profile.grid().nodes(), &ys)
}

/// `L^q` norm of a profile over the ball: `(int |u|^q dx)^{1/q}`.
pub fn lq_norm(profile: &RadialProfile, q: f64) -> f64 {
    let dim = profile.grid().dim();
    let w = dim as i32 - 1;
    let angular = f64::from(dim) * unit_ball_measure(dim);
    let ys = profile.weighted(|r, u| u.abs().powf(q) * r.powi(w));
    (angular * integrate_samples(profile.grid().nodes(), &ys)).powf(1.0 / q)
}

/// Gradient `L^p` seminorm `(int |u'(r)|^p dx)^{1/p}`, using stored slopes
/// when the profile carries them.
pub fn grad_lp_seminorm(profile: &RadialProfile, p: f64) -> f64 {
    let dim = profile.grid().dim();
    let w = dim as i32 - 1;
    let angular = f64::from(dim) * unit_ball_measure(dim);
    let slopes = profile.slopes();
    let ys: Vec<f64> = profile
        .grid()
        .nodes()
        .iter()
        .zip(&slopes)
        .map(|(&r, &du)| du.abs().powf(p) * r.powi(w))
        .collect();
    (angular * integrate_samples(profile.grid().nodes(), &ys)).powf(1.0 / p)
}

/// Signed moment `int |u|^{q-2} u dx` over the ball.
pub fn signed_q_moment(profile: &RadialProfile, q: f64) -> f64 {
    let dim = profile.grid().dim();
    let w = dim as i32 - 1;
    let angular = f64::from(dim) * unit_ball_measure(dim);
    let ys = profile.weighted(|r, u| u.signum() * u.abs().powf(q - 1.0) * r.powi(w));
    angular * integrate_samples(profile.grid().nodes(), &ys)
}
