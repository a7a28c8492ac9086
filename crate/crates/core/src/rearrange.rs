//! Decreasing and Schwarz rearrangements with exact verification.
//!
//! Two representations are used, each chosen so the checks are finite sums
//! with no quadrature error:
//!
//! * [`SampledFunction`] — weighted cells `(value_i, weight_i)`.  The
//!   decreasing rearrangement is a sort, so equimeasurability
//!   `int psi(u) = int psi(u*)` is permutation invariance of a finite sum.
//! * [`PiecewiseLinear`] — nodal data on an interval.  The symmetric
//!   decreasing rearrangement of a piecewise-linear function is again
//!   piecewise linear, and both Dirichlet p-energies are computable in
//!   closed form through the level-band decomposition: between consecutive
//!   critical values `c_k < c_{k+1}` the co-area factor
//!   `beta_k = sum 1/|slope|` over crossing segments gives
//!
//!   ```text
//!   int |(u*)'|^p dx  (band k)  =  2^p beta_k^{1-p} (c_{k+1} - c_k),
//!   int psi(u) dx     (band k)  =  beta_k int_{c_k}^{c_{k+1}} psi(c) dc,
//!   ```
//!
//!   plus plateau contributions `psi(v) * length`.  Polya-Szego
//!   (`int |u'|^p >= int |(u*)'|^p`) becomes an exact finite-sum
//!   comparison, and the `(q-1)`-moment is preserved by construction.
//!
//! The two-ball reduction demo applies this machinery to a sign-changing
//! function on a pair of intervals: each signed part is rearranged into a
//! symmetric bump of the same measure, the Rayleigh quotient never
//! increases, and the signed moment is unchanged.

use crate::error::SolverError;
use crate::params::ProblemParams;
use serde::{Deserialize, Serialize};

/// Domain carried by a cell-sampled function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    Interval,
    Ball,
    TwoBalls,
}

/// Weighted cells `(value_i, weight_i)`; the weight is the measure of the
/// cell the value occupies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    values: Vec<f64>,
    weights: Vec<f64>,
    domain: DomainTag,
}

impl SampledFunction {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, domain: DomainTag) -> Result<Self, SolverError> {
        if values.len() != weights.len() {
            return Err(SolverError::invalid("values and weights must have equal length"));
        }
        if values.is_empty() {
            return Err(SolverError::invalid("sampled function must be nonempty"));
        }
        if !weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return Err(SolverError::invalid("weights must be positive and finite"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(SolverError::invalid("values must be finite"));
        }
        Ok(SampledFunction { values, weights, domain })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    /// `int psi(u) dx` with `psi(s) = s^power` over the cells.
    pub fn power_integral(&self, power: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * v.powf(power))
            .sum()
    }
}

/// Measure-preserving decreasing rearrangement: values sorted
/// non-increasing, weights carried along (ties broken by original index).
/// For ball domains the result reads as a radial profile where cell `i`
/// occupies the annulus whose cumulative measure matches the sorted order.
pub fn decreasing_rearrangement(f: &SampledFunction) -> Result<SampledFunction, SolverError> {
    if let Some(min) = f.values.iter().cloned().reduce(f64::min) {
        if min < 0.0 {
            return Err(SolverError::NegativeValues { min_value: min });
        }
    }
    let mut order: Vec<usize> = (0..f.values.len()).collect();
    order.sort_by(|&a, &b| f.values[b].partial_cmp(&f.values[a]).unwrap().then(a.cmp(&b)));
    Ok(SampledFunction {
        values: order.iter().map(|&i| f.values[i]).collect(),
        weights: order.iter().map(|&i| f.weights[i]).collect(),
        domain: f.domain,
    })
}

/// `|int psi(u) - int psi(u*)|` for `psi(s) = s^power`; zero up to
/// floating-point roundoff because both sums range over the same multiset
/// of weighted values.
pub fn check_equimeasurable(f: &SampledFunction, power: f64) -> Result<f64, SolverError> {
    let rearranged = decreasing_rearrangement(f)?;
    Ok((f.power_integral(power) - rearranged.power_integral(power)).abs())
}

/// Nodal piecewise-linear function on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, SolverError> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(SolverError::invalid("piecewise-linear data needs matching node arrays"));
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(SolverError::invalid("piecewise-linear nodes must increase"));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn segments(&self) -> Vec<Segment> {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| Segment { y0: y[0], y1: y[1], len: x[1] - x[0] })
            .collect()
    }

    /// Positive part, with nodes inserted at the exact zero crossings.
    fn positive_part_segments(&self) -> Vec<Segment> {
        let mut segs = Vec::new();
        for i in 0..self.xs.len() - 1 {
            let (y0, y1) = (self.ys[i], self.ys[i + 1]);
            let len = self.xs[i + 1] - self.xs[i];
            if y0 <= 0.0 && y1 <= 0.0 {
                continue;
            }
            if y0 >= 0.0 && y1 >= 0.0 {
                segs.push(Segment { y0, y1, len });
            } else {
                // one sign change: split at the exact crossing
                let frac = y0 / (y0 - y1);
                if y0 > 0.0 {
                    segs.push(Segment { y0, y1: 0.0, len: len * frac });
                } else {
                    segs.push(Segment { y0: 0.0, y1, len: len * (1.0 - frac) });
                }
            }
        }
        segs
    }

    fn negated(&self) -> PiecewiseLinear {
        PiecewiseLinear { xs: self.xs.clone(), ys: self.ys.iter().map(|y| -y).collect() }
    }
}

/// One linear piece by its endpoint values and length.
#[derive(Debug, Clone, Copy)]
struct Segment {
    y0: f64,
    y1: f64,
    len: f64,
}

impl Segment {
    fn slope(&self) -> f64 {
        (self.y1 - self.y0) / self.len
    }

    /// Exact `int u^a dx` along the segment (`u >= 0` assumed).
    fn power_integral(&self, a: f64) -> f64 {
        if self.y1 == self.y0 {
            return self.y0.powf(a) * self.len;
        }
        self.len * (self.y1.powf(a + 1.0) - self.y0.powf(a + 1.0)) / ((a + 1.0) * (self.y1 - self.y0))
    }

    /// Exact `int |u'|^p dx` along the segment.
    fn energy(&self, p: f64) -> f64 {
        self.slope().abs().powf(p) * self.len
    }
}

/// Level-band decomposition of a nonnegative piecewise-linear function
/// given by segments: critical values, co-area factors per band, and
/// plateau lengths.
struct BandData {
    /// ascending distinct levels `c_0 = 0 < c_1 < ... < c_K = max`
    levels: Vec<f64>,
    /// `beta_k = sum 1/|slope|` over segments covering band `k`
    betas: Vec<f64>,
    /// `(value, total length)` of flat segments
    plateaus: Vec<(f64, f64)>,
}

fn band_data(segs: &[Segment]) -> BandData {
    let mut levels: Vec<f64> = vec![0.0];
    for s in segs {
        levels.push(s.y0);
        levels.push(s.y1);
    }
    levels.retain(|v| *v >= 0.0);
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut betas = vec![0.0; levels.len().saturating_sub(1)];
    let mut plateaus = Vec::new();
    for s in segs {
        if s.y0 == s.y1 {
            plateaus.push((s.y0, s.len));
            continue;
        }
        let (lo, hi) = if s.y0 < s.y1 { (s.y0, s.y1) } else { (s.y1, s.y0) };
        let inv_slope = 1.0 / s.slope().abs();
        for k in 0..betas.len() {
            if levels[k] >= lo && levels[k + 1] <= hi {
                betas[k] += inv_slope;
            }
        }
    }
    BandData { levels, betas, plateaus }
}

impl BandData {
    /// Energy of the symmetric decreasing rearrangement.
    fn rearranged_energy(&self, p: f64) -> f64 {
        let mut e = 0.0;
        for k in 0..self.betas.len() {
            if self.betas[k] > 0.0 {
                e += 2.0f64.powf(p) * self.betas[k].powf(1.0 - p) * (self.levels[k + 1] - self.levels[k]);
            }
        }
        e
    }

    /// `int psi(u) dx` with `psi(s) = s^a`, identical for the function and
    /// its rearrangement (the decomposition is equimeasurable data).
    fn power_integral(&self, a: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.betas.len() {
            total += self.betas[k] * (self.levels[k + 1].powf(a + 1.0) - self.levels[k].powf(a + 1.0))
                / (a + 1.0);
        }
        for (v, len) in &self.plateaus {
            total += v.powf(a) * len;
        }
        total
    }

    /// Measure of the support `{u > 0}`.
    #[allow(dead_code)]
    fn support_measure(&self) -> f64 {
        self.power_integral(0.0)
    }
}

/// Outcome of the exact 1D Polya-Szego check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PolyaSzegoReport {
    pub energy_before: f64,
    pub energy_after: f64,
    pub holds: bool,
}

/// Exact comparison `int |u'|^p >= int |(u*)'|^p` for a nonnegative
/// piecewise-linear function vanishing at both interval endpoints.
pub fn polya_szego_check_1d(f: &PiecewiseLinear, p: f64) -> Result<PolyaSzegoReport, SolverError> {
    if let Some(min) = f.ys.iter().cloned().reduce(f64::min) {
        if min < 0.0 {
            return Err(SolverError::NegativeValues { min_value: min });
        }
    }
    if f.ys[0] != 0.0 || *f.ys.last().unwrap() != 0.0 {
        return Err(SolverError::BoundaryNonzero);
    }
    let segs = f.segments();
    let energy_before: f64 = segs.iter().map(|s| s.energy(p)).sum();
    let energy_after = band_data(&segs).rearranged_energy(p);
    Ok(PolyaSzegoReport { energy_before, energy_after, holds: energy_after <= energy_before })
}

/// Outcome of the two-ball reduction demo.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionReport {
    pub quotient_before: f64,
    pub quotient_after: f64,
    /// `int u_+^{q-1} - int u_-^{q-1}` of the input (segment sums).
    pub moment_before: f64,
    /// The same moment after rearranging each part (band sums).
    pub moment_after: f64,
    /// `quotient_after <= quotient_before` up to 1e-12 relative roundoff.
    pub non_increasing: bool,
}

/// Discrete form of the reduction to two balls: splits a sign-changing
/// piecewise-linear function on a pair of intervals into its positive and
/// negative parts, rearranges each into a symmetric decreasing bump of the
/// same measure, and compares the Rayleigh quotients.  All quantities are
/// finite sums.
pub fn two_ball_reduction_demo(
    left: &PiecewiseLinear,
    right: &PiecewiseLinear,
    params: &ProblemParams,
) -> Result<ReductionReport, SolverError> {
    let (p, q) = (params.p(), params.q());
    let all_values = left.ys.iter().chain(right.ys.iter());
    let (mut has_pos, mut has_neg) = (false, false);
    for &v in all_values {
        has_pos |= v > 0.0;
        has_neg |= v < 0.0;
    }
    if !has_pos || !has_neg {
        return Err(SolverError::NoSignChange);
    }
    // signed parts across both components
    let mut pos_segs = left.positive_part_segments();
    pos_segs.extend(right.positive_part_segments());
    let mut neg_segs = left.negated().positive_part_segments();
    neg_segs.extend(right.negated().positive_part_segments());

    let energy = |segs: &[Segment]| -> f64 { segs.iter().map(|s| s.energy(p)).sum() };
    let power = |segs: &[Segment], a: f64| -> f64 { segs.iter().map(|s| s.power_integral(a)).sum() };

    let energy_before = energy(&pos_segs) + energy(&neg_segs);
    let q_before = power(&pos_segs, q) + power(&neg_segs, q);
    let moment_before = power(&pos_segs, q - 1.0) - power(&neg_segs, q - 1.0);

    let pos_bands = band_data(&pos_segs);
    let neg_bands = band_data(&neg_segs);
    let energy_after = pos_bands.rearranged_energy(p) + neg_bands.rearranged_energy(p);
    let q_after = pos_bands.power_integral(q) + neg_bands.power_integral(q);
    let moment_after = pos_bands.power_integral(q - 1.0) - neg_bands.power_integral(q - 1.0);

    let quotient_before = energy_before.powf(1.0 / p) / q_before.powf(1.0 / q);
    let quotient_after = energy_after.powf(1.0 / p) / q_after.powf(1.0 / q);
    Ok(ReductionReport {
        quotient_before,
        quotient_after,
        moment_before,
        moment_after,
        non_increasing: quotient_after <= quotient_before * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sampled(values: Vec<f64>) -> SampledFunction {
        let weights = vec![1.0; values.len()];
        SampledFunction::new(values, weights, DomainTag::Interval).unwrap()
    }

    #[test]
    fn rearrangement_sorts_descending() {
        let f = sampled(vec![1.0, 3.0, 2.0]);
        let r = decreasing_rearrangement(&f).unwrap();
        assert_eq!(r.values(), &[3.0, 2.0, 1.0]);
        // already sorted input and constants are fixed points
        let s = sampled(vec![5.0, 4.0, 1.0]);
        assert_eq!(decreasing_rearrangement(&s).unwrap(), s);
        let c = sampled(vec![2.0; 8]);
        assert_eq!(decreasing_rearrangement(&c).unwrap(), c);
    }

    #[test]
    fn rearrangement_is_idempotent() {
        let f = sampled(vec![0.3, 2.4, 1.1, 1.1, 0.0, 4.2]);
        let once = decreasing_rearrangement(&f).unwrap();
        let twice = decreasing_rearrangement(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rearrangement_rejects_negative_values() {
        let f = sampled(vec![1.0, -0.5, 2.0]);
        assert!(matches!(decreasing_rearrangement(&f), Err(SolverError::NegativeValues { .. })));
    }

    #[test]
    fn equimeasurability_is_machine_exact() {
        let values = vec![0.5, 2.25, 1.0, 1.0, 3.5, 0.125];
        let weights = vec![0.3, 1.0, 0.7, 0.2, 0.9, 1.4];
        let f = SampledFunction::new(values, weights, DomainTag::Ball).unwrap();
        for power in [1.0, 1.5, 2.0, 2.5] {
            let resid = check_equimeasurable(&f, power).unwrap();
            assert!(resid <= 1e-12 * f.power_integral(power).abs(), "residual {resid}");
        }
    }

    fn tent(peak_at: f64, height: f64, length: f64, n: usize) -> PiecewiseLinear {
        let xs: Vec<f64> = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                if x <= peak_at {
                    height * x / peak_at
                } else {
                    height * (length - x) / (length - peak_at)
                }
            })
            .collect();
        PiecewiseLinear::new(xs, ys).unwrap()
    }

    #[test]
    fn symmetric_tent_attains_equality() {
        let f = tent(0.5, 1.0, 1.0, 64);
        let report = polya_szego_check_1d(&f, 2.0).unwrap();
        assert!(report.holds);
        assert_relative_eq!(report.energy_before, report.energy_after, max_relative = 1e-12);
        // closed form: 2^p h^p L^{1-p} with h = L = 1
        assert_relative_eq!(report.energy_after, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn asymmetric_tent_is_strict() {
        let f = tent(0.3, 1.0, 1.0, 60);
        let report = polya_szego_check_1d(&f, 2.0).unwrap();
        assert!(report.holds);
        // exact two-slope comparison: 1/0.3 + 1/0.7 > 4
        assert_relative_eq!(report.energy_before, 1.0 / 0.3 + 1.0 / 0.7, max_relative = 1e-12);
        assert_relative_eq!(report.energy_after, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn two_bump_function_is_strict() {
        let xs: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let ys = vec![0.0, 1.0, 0.5, 0.25, 0.8, 1.5, 0.6, 0.2, 0.0];
        let f = PiecewiseLinear::new(xs, ys).unwrap();
        let report = polya_szego_check_1d(&f, 2.0).unwrap();
        assert!(report.holds);
        assert!(report.energy_after < report.energy_before * (1.0 - 1e-6));
    }

    #[test]
    fn polya_szego_error_paths() {
        let xs: Vec<f64> = (0..=4).map(|i| i as f64).collect();
        let bad_boundary = PiecewiseLinear::new(xs.clone(), vec![0.0, 1.0, 2.0, 1.0, 0.5]).unwrap();
        assert!(matches!(polya_szego_check_1d(&bad_boundary, 2.0), Err(SolverError::BoundaryNonzero)));
        let negative = PiecewiseLinear::new(xs, vec![0.0, 1.0, -0.2, 1.0, 0.0]).unwrap();
        assert!(matches!(polya_szego_check_1d(&negative, 2.0), Err(SolverError::NegativeValues { .. })));
    }

    fn random_pl(rng: &mut ChaCha8Rng, n: usize) -> PiecewiseLinear {
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut ys: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..2.0)).collect();
        ys[0] = 0.0;
        ys[n] = 0.0;
        PiecewiseLinear::new(xs, ys).unwrap()
    }

    #[test]
    fn polya_szego_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [1.5, 2.0, 3.0] {
            for _ in 0..200 {
                let f = random_pl(&mut rng, 24);
                let report = polya_szego_check_1d(&f, p).unwrap();
                assert!(report.holds, "violated at p = {p}");
            }
        }
    }

    #[test]
    fn antisymmetric_pair_keeps_quotient() {
        let params = ProblemParams::validate(2.0, 2.0, 1).unwrap();
        let up = tent(0.5, 1.0, 1.0, 32);
        let down = PiecewiseLinear::new(up.xs().to_vec(), up.ys().iter().map(|y| -y).collect()).unwrap();
        let report = two_ball_reduction_demo(&up, &down, &params).unwrap();
        assert!(report.non_increasing);
        assert_relative_eq!(report.quotient_before, report.quotient_after, max_relative = 1e-12);
        assert!((report.moment_before - report.moment_after).abs() <= 1e-14);
        // antisymmetric input has exactly vanishing signed moment
        assert!(report.moment_before.abs() < 1e-15);
    }

    #[test]
    fn perturbed_pair_strictly_decreases() {
        let params = ProblemParams::validate(2.0, 2.0, 1).unwrap();
        let up = tent(0.3, 1.0, 1.0, 30);
        let down_sym = tent(0.5, 0.9, 1.0, 30);
        let down = PiecewiseLinear::new(
            down_sym.xs().to_vec(),
            down_sym.ys().iter().map(|y| -y).collect(),
        )
        .unwrap();
        let report = two_ball_reduction_demo(&up, &down, &params).unwrap();
        assert!(report.non_increasing);
        assert!(report.quotient_after < report.quotient_before * (1.0 - 1e-6));
        assert!((report.moment_before - report.moment_after).abs() <= 1e-14 * report.moment_before.abs().max(1.0));
    }

    #[test]
    fn reduction_requires_sign_change() {
        let params = ProblemParams::validate(2.0, 2.0, 1).unwrap();
        let up = tent(0.5, 1.0, 1.0, 16);
        let up2 = tent(0.4, 0.5, 1.0, 16);
        assert!(matches!(
            two_ball_reduction_demo(&up, &up2, &params),
            Err(SolverError::NoSignChange)
        ));
    }

    #[test]
    fn reduction_handles_mixed_sign_within_component() {
        // sign change inside one component: the split follows the sign
        // sets, not the components
        let params = ProblemParams::validate(2.0, 3.0, 1).unwrap();
        let xs: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
        let mixed = PiecewiseLinear::new(xs, vec![0.0, 0.8, -0.3, -0.9, 0.4, 0.2, 0.0]).unwrap();
        let down = PiecewiseLinear::new(
            (0..=6).map(|i| i as f64 / 6.0).collect(),
            vec![0.0, -0.5, -1.0, -0.4, -0.2, -0.1, 0.0],
        )
        .unwrap();
        let report = two_ball_reduction_demo(&mixed, &down, &params).unwrap();
        assert!(report.non_increasing);
        assert!((report.moment_before - report.moment_after).abs() <= 1e-13 * report.moment_before.abs().max(1.0));
    }
}
