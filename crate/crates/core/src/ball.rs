//! Single-ball eigenvalue `Lambda(B_R)`: the infimum of the quotient
//! `||grad u||_p / ||u||_q` over `W^{1,p}_0(B_R)` without the sign
//! constraint, attained at the positive radial first eigenfunction.
//!
//! One base shot (`c = 1`, `k = 1`, `m = 0`) determines everything: if the
//! base solution has first zero `rho*`, stretching with `B = rho*/R` puts
//! the zero at `R`, and the quotient assembles from the shot integrals as
//!
//! ```text
//! lambda = (N omega_N B^{p-N} I_grad)^{1/p} / (N omega_N B^{-N} I_q)^{1/q},
//! ```
//!
//! independent of amplitude by 1-homogeneity.  Stored profiles are
//! normalized to `||u||_{L^q} = 1`, which makes the Euler coefficient of
//! the normalized eigenfunction equal to `lambda^p`.
//!
//! A projected-gradient minimizer of the discretized quotient serves as an
//! independent oracle from above.

use crate::error::SolverError;
use crate::params::ProblemParams;
use crate::quadrature::{unit_ball_measure, RadialProfile};
use crate::shooting::{rescale_shot, sgn_pow, shoot_with_zero_tol, ShotResult, SourceSpec, DEFAULT_ZERO_TOL};

/// Default ODE tolerance for the base shot.
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
/// Default node count of rendered profiles.
pub const DEFAULT_PROFILE_NODES: usize = 1025;

/// Eigenpair of the single ball.
#[derive(Debug, Clone)]
pub struct BallEigenResult {
    /// Value of the quotient.
    pub lambda: f64,
    /// Eigenfunction normalized to unit `L^q` norm, with analytic slopes.
    pub profile: RadialProfile,
    /// Boundary flux `|u'(R)|` of the normalized eigenfunction.
    pub flux: f64,
    /// Euler coefficient of the normalized eigenfunction; equals
    /// `lambda^p` up to the energy-identity residual.
    pub euler_k: f64,
    /// Relative residual `|I_grad - I_q| / I_q` of the base shot.
    pub energy_residual: f64,
}

/// Shoots the base Cauchy problem, extending `r_max` geometrically until
/// the first zero is found.
pub(crate) fn base_shot(
    params: &ProblemParams,
    c: f64,
    tol: f64,
    zero_tol: f64,
) -> Result<ShotResult, SolverError> {
    let mut r_max = 8.0;
    loop {
        match shoot_with_zero_tol(params, SourceSpec::eigen(1.0), c, r_max, tol, zero_tol) {
            Ok(s) => return Ok(s),
            Err(SolverError::NoZeroFound { .. }) if r_max < 600.0 => r_max *= 4.0,
            Err(e) => return Err(e),
        }
    }
}

/// Quotient value assembled from a shot stretched so its zero lands at `R`.
pub(crate) fn assemble_lambda(params: &ProblemParams, shot: &ShotResult, radius: f64) -> f64 {
    let n = params.n();
    let angular = n * unit_ball_measure(params.dim());
    let b = shot.first_zero / radius;
    let grad = (angular * b.powf(params.p() - n) * shot.i_grad).powf(1.0 / params.p());
    let mass = (angular * b.powf(-n) * shot.i_q).powf(1.0 / params.q());
    grad / mass
}

/// First eigenvalue of the ball of radius `radius` with default solver
/// settings.
pub fn ball_lambda(params: &ProblemParams, radius: f64) -> Result<BallEigenResult, SolverError> {
    ball_lambda_opts(params, radius, 1.0, DEFAULT_ODE_TOL, DEFAULT_ZERO_TOL, DEFAULT_PROFILE_NODES)
}

/// As [`ball_lambda`] with explicit base-shot amplitude, ODE tolerance and
/// profile resolution.  The amplitude only changes the numerical path, not
/// the result.
pub fn ball_lambda_opts(
    params: &ProblemParams,
    radius: f64,
    amplitude: f64,
    tol: f64,
    zero_tol: f64,
    profile_nodes: usize,
) -> Result<BallEigenResult, SolverError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(SolverError::invalid(format!("radius must be positive, got {radius}")));
    }
    let shot = base_shot(params, amplitude, tol, zero_tol)?;
    let lambda = assemble_lambda(params, &shot, radius);
    let n = params.n();
    let angular = n * unit_ball_measure(params.dim());
    let b = shot.first_zero / radius;
    // unit q-norm: A^q * angular * B^{-N} * I_q = 1
    let a = (angular * b.powf(-n) * shot.i_q).powf(-1.0 / params.q());
    let scaled = rescale_shot(&shot, params, a, b)?;
    let profile = scaled.profile(profile_nodes)?;
    let energy_residual = (shot.i_grad - shot.i_q).abs() / shot.i_q;
    Ok(BallEigenResult {
        lambda,
        flux: scaled.boundary_slope.abs(),
        euler_k: scaled.source().k,
        energy_residual,
        profile,
    })
}

/// Relative residual of the dilation law
/// `lambda(B_{tR}) = t^sigma lambda(B_R)`.  The two eigenvalues come from
/// genuinely independent integrations (different base-shot amplitudes).
pub fn scaling_check(params: &ProblemParams, radius: f64, t: f64) -> Result<f64, SolverError> {
    if !(t > 0.0) {
        return Err(SolverError::invalid(format!("dilation factor must be positive, got {t}")));
    }
    let lam_r = ball_lambda_opts(params, radius, 1.0, DEFAULT_ODE_TOL, DEFAULT_ZERO_TOL, 33)?.lambda;
    let lam_tr = ball_lambda_opts(params, t * radius, 1.7, DEFAULT_ODE_TOL, DEFAULT_ZERO_TOL, 33)?.lambda;
    let sigma = params.scaling_exponent();
    Ok((lam_tr - t.powf(sigma) * lam_r).abs() / lam_tr)
}

/// Discretized direct minimizer of the Rayleigh quotient: projected
/// gradient descent over nonnegative piecewise-linear radial functions
/// vanishing at `R`, with Barzilai-Borwein steps, Armijo backtracking and
/// amplitude renormalization.  Cross-validation oracle; approximates the
/// eigenvalue from above.
pub fn ball_lambda_direct(
    params: &ProblemParams,
    radius: f64,
    n: usize,
    iters: usize,
) -> Result<f64, SolverError> {
    if n < 64 {
        return Err(SolverError::invalid(format!("direct oracle needs n >= 64, got {n}")));
    }
    let grid: Vec<f64> = (0..=n).map(|i| radius * i as f64 / n as f64).collect();
    let mut v: Vec<f64> = grid.iter().map(|r| 1.0 - (r / radius).powi(2)).collect();
    v[n] = 0.0;
    let mut descent = QuotientDescent::new(params, &grid);
    descent.minimize(&mut v, iters)
}

/// Shared machinery of the direct quotient minimizers: piecewise-linear
/// energies on a radial grid with the `r^{N-1}` weight.
pub(crate) struct QuotientDescent {
    p: f64,
    q: f64,
    grid: Vec<f64>,
    /// exact cell weights `N omega_N (r_{i+1}^N - r_i^N) / N` for the
    /// piecewise-constant gradient term
    cell_w: Vec<f64>,
    /// trapezoid nodal weights of `N omega_N r^{N-1} dr`
    node_w: Vec<f64>,
}

impl QuotientDescent {
    pub(crate) fn new(params: &ProblemParams, grid: &[f64]) -> Self {
        let n_f = params.n();
        let angular = n_f * unit_ball_measure(params.dim());
        let n = grid.len() - 1;
        let cell_w: Vec<f64> = (0..n)
            .map(|i| angular * (grid[i + 1].powf(n_f) - grid[i].powf(n_f)) / n_f)
            .collect();
        let mut node_w = vec![0.0; n + 1];
        for i in 0..n {
            let h = grid[i + 1] - grid[i];
            node_w[i] += 0.5 * h * angular * grid[i].powf(n_f - 1.0);
            node_w[i + 1] += 0.5 * h * angular * grid[i + 1].powf(n_f - 1.0);
        }
        QuotientDescent { p: params.p(), q: params.q(), grid: grid.to_vec(), cell_w, node_w }
    }

    pub(crate) fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub(crate) fn cell_weight(&self, i: usize) -> f64 {
        self.cell_w[i]
    }

    pub(crate) fn node_weight(&self, i: usize) -> f64 {
        self.node_w[i]
    }

    /// Solves `K z = rhs` where `K` is the quadratic (p = 2) Dirichlet
    /// energy Hessian with the boundary node pinned: the Sobolev-gradient
    /// preconditioner that makes descent convergence grid-independent.
    /// `rhs` is full length; the returned vector has a zero boundary entry.
    pub(crate) fn solve_stiffness(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.grid.len() - 1; // free nodes 0..n-1, node n pinned
        let a: Vec<f64> = (0..n)
            .map(|c| {
                let h = self.grid[c + 1] - self.grid[c];
                2.0 * self.cell_w[c] / (h * h)
            })
            .collect();
        // tridiagonal Thomas sweep
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = -a[0] / a[0];
        dp[0] = rhs[0] / a[0];
        for i in 1..n {
            let sub = -a[i - 1];
            let diag = a[i - 1] + a[i];
            let upper = if i + 1 < n { -a[i] } else { 0.0 };
            let denom = diag - sub * cp[i - 1];
            cp[i] = upper / denom;
            dp[i] = (rhs[i] - sub * dp[i - 1]) / denom;
        }
        let mut z = vec![0.0; n + 1];
        z[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            z[i] = dp[i] - cp[i] * z[i + 1];
        }
        z
    }

    /// Gradient p-energy `int |v'|^p dx` (exact on piecewise-linear data).
    pub(crate) fn grad_energy(&self, v: &[f64]) -> f64 {
        let mut g = 0.0;
        for i in 0..self.cell_w.len() {
            let s = (v[i + 1] - v[i]) / (self.grid[i + 1] - self.grid[i]);
            g += s.abs().powf(self.p) * self.cell_w[i];
        }
        g
    }

    /// Mass term `int |v|^q dx` by nodal quadrature.
    pub(crate) fn mass(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.node_w)
            .map(|(&vi, &w)| w * vi.abs().powf(self.q))
            .sum()
    }

    /// Signed moment `int |v|^{q-2} v dx` by nodal quadrature.
    pub(crate) fn moment(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.node_w)
            .map(|(&vi, &w)| w * sgn_pow(vi, self.q - 1.0))
            .sum()
    }

    /// Objective `G / Q^{p/q}` (the p-th power of the quotient) and its
    /// nodal gradient; interior nodes only (the boundary node is pinned).
    fn objective_grad(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let g = self.grad_energy(v);
        let qm = self.mass(v);
        let obj = g / qm.powf(self.p / self.q);
        let n = v.len() - 1;
        let mut grad = vec![0.0; v.len()];
        for i in 0..n {
            let h = self.grid[i + 1] - self.grid[i];
            let s = (v[i + 1] - v[i]) / h;
            let d = self.p * sgn_pow(s, self.p - 1.0) * self.cell_w[i] / h;
            grad[i] -= d;
            grad[i + 1] += d;
        }
        let factor = (self.p / self.q) * g / qm;
        for i in 0..=n {
            let dq = self.q * sgn_pow(v[i], self.q - 1.0) * self.node_w[i];
            grad[i] = (grad[i] - factor * dq) / qm.powf(self.p / self.q);
        }
        grad[n] = 0.0;
        (obj, grad)
    }

    /// Projected-gradient loop with positivity clamp, amplitude
    /// renormalization, Armijo backtracking and the stiffness-inverse
    /// (Sobolev gradient) preconditioner.  Returns the quotient
    /// `obj^{1/p}`.
    fn minimize(&mut self, v: &mut Vec<f64>, iters: usize) -> Result<f64, SolverError> {
        let project = |this: &Self, v: &mut Vec<f64>| {
            for x in v.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            let last = v.len() - 1;
            v[last] = 0.0;
            // renormalize the amplitude (the objective is 0-homogeneous)
            let qm = this.mass(v);
            if qm > 0.0 {
                let a = qm.powf(-1.0 / this.q);
                for x in v.iter_mut() {
                    *x *= a;
                }
            }
        };
        project(self, v);
        let (mut obj, mut grad) = self.objective_grad(v);
        let mut tau = 1.0;
        let mut last_drop = f64::INFINITY;
        let mut exhausted = true;
        for _ in 0..iters {
            let dir: Vec<f64> = self.solve_stiffness(&grad).iter().map(|z| -z).collect();
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            if slope >= 0.0 {
                exhausted = false;
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial: Vec<f64> = v.iter().zip(&dir).map(|(vi, di)| vi + tau * di).collect();
                project(self, &mut trial);
                let (obj_t, grad_t) = self.objective_grad(&trial);
                if obj_t <= obj + 1e-4 * tau * slope {
                    last_drop = (obj - obj_t) / obj;
                    *v = trial;
                    obj = obj_t;
                    grad = grad_t;
                    tau = (tau * 2.0).min(1e4);
                    accepted = true;
                    break;
                }
                tau *= 0.5;
                if tau < 1e-18 {
                    break;
                }
            }
            if !accepted {
                exhausted = false;
                break;
            }
        }
        let lambda = obj.powf(1.0 / self.p);
        if !lambda.is_finite() || lambda <= 0.0 || (exhausted && last_drop > 1e-7) {
            return Err(SolverError::NonConvergence {
                reason: format!("direct minimizer: lambda = {lambda}, last relative drop {last_drop:.3e}"),
            });
        }
        Ok(lambda)
    }
}
