//! Rate-energy regions.
//!
//! Two independent tracers are provided. [`trace_monte_carlo`] samples split
//! vectors uniformly and keeps the best rate meeting each harvested-power
//! threshold. [`trace_lagrangian`] maximises `R + μQ` stream by stream for a
//! grid of multipliers and bounds the region from above by the tangent lines
//! `R ≤ L(μ) − μQ`; it is exact for separable (interference-free) models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::swipt::{DpsStream, REPoint, RateEnergyModel};

pub const DEFAULT_GRID_SIZE: usize = 200;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_MU_COUNT: usize = 64;
pub const DEFAULT_RHO_GRID: usize = 1024;

/// Samples drawn from one RNG substream. Fixed so results do not depend on
/// how chunks are scheduled across threads.
const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionMethod {
    MonteCarlo,
    Lagrangian,
    Envelope,
}

impl RegionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RegionMethod::MonteCarlo => "monte-carlo",
            RegionMethod::Lagrangian => "lagrangian",
            RegionMethod::Envelope => "envelope",
        }
    }
}

/// A supporting line `rate + μ·harvested = const` of the convexified region,
/// touching it at (`rate`, `harvested`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportLine {
    pub mu: f64,
    pub rate: f64,
    pub harvested: f64,
}

/// Exact description of an envelope, usable at any threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Frontier {
    /// Non-dominated points, harvested ascending and rate descending.
    Staircase { points: Vec<REPoint> },
    /// Tangent-line upper bound on `[0, q_max]`.
    Dual { q_max: f64, lines: Vec<SupportLine> },
}

impl Frontier {
    /// Best rate whose harvested power is at least `threshold`.
    pub fn rate_at(&self, threshold: f64) -> f64 {
        match self {
            Frontier::Staircase { points } => {
                let i = points.partition_point(|p| p.harvested < threshold);
                points.get(i).map_or(0.0, |p| p.rate)
            }
            Frontier::Dual { q_max, lines } => {
                if threshold > *q_max {
                    return 0.0;
                }
                lines
                    .iter()
                    .map(|l| l.rate + l.mu * (l.harvested - threshold))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0)
            }
        }
    }

    pub fn q_max(&self) -> f64 {
        match self {
            Frontier::Staircase { points } => points.last().map_or(0.0, |p| p.harvested),
            Frontier::Dual { q_max, .. } => *q_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RERegion {
    pub method: RegionMethod,
    /// Harvested-power thresholds, W/Hz.
    pub energy_grid: Vec<f64>,
    /// Best rate per threshold, bits/s/Hz.
    pub max_rate: Vec<f64>,
    pub sample_count: usize,
    pub seed: Option<u64>,
    pub frontier: Frontier,
}

impl RERegion {
    fn from_frontier(
        method: RegionMethod,
        frontier: Frontier,
        grid_size: usize,
        sample_count: usize,
        seed: Option<u64>,
    ) -> Self {
        let energy_grid = uniform_grid(frontier.q_max(), grid_size);
        let max_rate = energy_grid.iter().map(|&q| frontier.rate_at(q)).collect();
        Self { method, energy_grid, max_rate, sample_count, seed, frontier }
    }

    pub fn rate_at(&self, threshold: f64) -> f64 {
        self.frontier.rate_at(threshold)
    }

    pub fn q_max(&self) -> f64 {
        self.frontier.q_max()
    }

    /// Rate at zero harvested-power requirement.
    pub fn max_rate(&self) -> f64 {
        self.rate_at(0.0)
    }
}

/// `size` evenly spaced points on `[0, q_max]`, both ends included.
pub fn uniform_grid(q_max: f64, size: usize) -> Vec<f64> {
    let last = (size - 1) as f64;
    (0..size)
        .map(|i| if i + 1 == size { q_max } else { q_max * i as f64 / last })
        .collect()
}

fn validate_grid_size(grid_size: usize) -> Result<()> {
    if grid_size < 2 {
        return Err(SimError::invalid(format!("grid size must be at least 2, got {grid_size}")));
    }
    Ok(())
}

/// Non-dominated subset, harvested ascending.
pub fn pareto_front(points: &[REPoint]) -> Vec<REPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.harvested.total_cmp(&a.harvested).then(b.rate.total_cmp(&a.rate)));
    let mut front: Vec<REPoint> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for p in sorted {
        if p.rate > best {
            best = p.rate;
            front.push(p);
        }
    }
    front.reverse();
    front
}

/// Staircase envelope of `points` on `[0, max harvested]`.
pub fn pareto_envelope(points: &[REPoint], grid_size: usize) -> Result<RERegion> {
    validate_grid_size(grid_size)?;
    if points.is_empty() {
        return Err(SimError::invalid("cannot build an envelope from zero points"));
    }
    check_points(points)?;
    let frontier = Frontier::Staircase { points: pareto_front(points) };
    Ok(RERegion::from_frontier(RegionMethod::Envelope, frontier, grid_size, points.len(), None))
}

fn check_points(points: &[REPoint]) -> Result<()> {
    match points.iter().find(|p| !p.rate.is_finite() || !p.harvested.is_finite()) {
        Some(p) => Err(SimError::invalid(format!("non-finite rate-energy point {p:?}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub parallel: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: 0, grid_size: DEFAULT_GRID_SIZE, parallel: true }
    }
}

fn sample_chunk<M: RateEnergyModel + ?Sized>(model: &M, seed: u64, chunk: usize, len: usize) -> Vec<REPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let dim = model.dim();
    let mut rho = vec![0.0; dim];
    let mut points = Vec::with_capacity(len);
    for _ in 0..len {
        for r in rho.iter_mut() {
            *r = rng.gen::<f64>();
        }
        points.push(model.evaluate(&rho));
    }
    pareto_front(&points)
}

/// Uniform random split vectors plus the all-zeros and all-ones corners.
pub fn trace_monte_carlo<M: RateEnergyModel + ?Sized>(model: &M, config: &MonteCarloConfig) -> Result<RERegion> {
    validate_grid_size(config.grid_size)?;
    if config.samples == 0 {
        return Err(SimError::invalid("at least one sample is required"));
    }
    let dim = model.dim();
    let chunks = config.samples.div_ceil(CHUNK_SIZE);
    let chunk_len = |c: usize| CHUNK_SIZE.min(config.samples - c * CHUNK_SIZE);
    let fronts: Vec<Vec<REPoint>> = if config.parallel {
        (0..chunks)
            .into_par_iter()
            .map(|c| sample_chunk(model, config.seed, c, chunk_len(c)))
            .collect()
    } else {
        (0..chunks).map(|c| sample_chunk(model, config.seed, c, chunk_len(c))).collect()
    };
    let mut points: Vec<REPoint> = fronts.into_iter().flatten().collect();
    points.push(model.evaluate(&vec![0.0; dim]));
    points.push(model.evaluate(&vec![1.0; dim]));
    check_points(&points)?;
    let frontier = Frontier::Staircase { points: pareto_front(&points) };
    Ok(RERegion::from_frontier(
        RegionMethod::MonteCarlo,
        frontier,
        config.grid_size,
        config.samples,
        Some(config.seed),
    ))
}

/// Maximiser of `R(ρ) + μQ(ρ)` for one stream: best point of a uniform ρ grid,
/// refined by bisection on the (decreasing) derivative in the neighbouring cells.
pub fn maximize_stream(stream: &DpsStream, mu: f64, rho_grid_size: usize) -> f64 {
    let objective = |r: f64| stream.rate(r) + mu * stream.harvested(r);
    let last = (rho_grid_size - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..rho_grid_size {
        let v = objective(i as f64 / last);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = best_i.saturating_sub(1) as f64 / last;
    let mut hi = (best_i + 1).min(rho_grid_size - 1) as f64 / last;
    let harvest_slope = mu * stream.efficiency * stream.received();
    let derivative = |r: f64| stream.rate_slope(r) - harvest_slope;
    if derivative(lo) > 0.0 && derivative(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if derivative(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let grid_rho = best_i as f64 / last;
        [lo, hi]
            .into_iter()
            .map(|r| (objective(r), r))
            .fold((best_v, grid_rho), |acc, c| if c.0 > acc.0 { c } else { acc })
            .1
    } else {
        best_i as f64 / last
    }
}

/// Per-multiplier optimum of the separable problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub mu: f64,
    pub rho: Vec<f64>,
    pub point: REPoint,
}

pub fn lagrangian_support(streams: &[DpsStream], mu_grid: &[f64], rho_grid_size: usize) -> Result<Vec<SupportPoint>> {
    if rho_grid_size < 2 {
        return Err(SimError::invalid("ρ grid needs at least 2 points"));
    }
    if mu_grid.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(SimError::invalid("multipliers must be finite and non-negative"));
    }
    if mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::invalid("multiplier grid must be strictly increasing"));
    }
    Ok(mu_grid
        .iter()
        .map(|&mu| {
            let rho: Vec<f64> = streams.iter().map(|s| maximize_stream(s, mu, rho_grid_size)).collect();
            let point = streams.iter().zip(&rho).fold(REPoint { rate: 0.0, harvested: 0.0 }, |acc, (s, &r)| REPoint {
                rate: acc.rate + s.rate(r),
                harvested: acc.harvested + s.harvested(r),
            });
            SupportPoint { mu, rho, point }
        })
        .collect())
}

/// `μ = 0` followed by `count` log-spaced multipliers covering the range of
/// marginal rate-per-watt exchange rates `R'_l(ρ)/Q'_l` over ρ ∈ [0, 1].
pub fn default_mu_grid(streams: &[DpsStream], count: usize) -> Vec<f64> {
    let slopes = |rho: f64| {
        streams
            .iter()
            .filter(|s| s.signal > 0.0)
            .map(move |s| s.rate_slope(rho) / (s.efficiency * s.received()))
    };
    let lo = slopes(1.0).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let mut hi = slopes(0.0).fold(0.0, f64::max);
    if !lo.is_finite() {
        return vec![0.0];
    }
    if !hi.is_finite() {
        // no conversion noise: the slope at ρ = 0 is unbounded
        let rate_scale: f64 = streams.iter().map(|s| s.rate(1.0)).sum();
        let energy_scale: f64 = streams.iter().map(|s| s.harvested(0.0)).sum();
        hi = 1e6 * rate_scale / energy_scale;
    }
    let (lo, hi) = (lo * 0.5, hi.max(lo) * 2.0);
    let mut grid = vec![0.0];
    let steps = count.max(2) - 1;
    grid.extend((0..count).map(|i| lo * (hi / lo).powf(i as f64 / steps as f64)));
    grid
}

/// Tangent-line upper envelope from the per-stream Lagrangian optimum.
/// Fails for models with inter-stream coupling.
pub fn trace_lagrangian<M: RateEnergyModel + ?Sized>(
    model: &M,
    mu_grid: &[f64],
    rho_grid_size: usize,
    grid_size: usize,
) -> Result<RERegion> {
    validate_grid_size(grid_size)?;
    let streams = model.separable_streams().ok_or_else(|| {
        SimError::UnsupportedModel("Lagrangian tracing needs an interference-free, per-stream separable model".into())
    })?;
    let support = lagrangian_support(streams, mu_grid, rho_grid_size)?;
    let q_max = streams.iter().map(|s| s.harvested(0.0)).sum();
    let lines = support
        .iter()
        .map(|s| SupportLine { mu: s.mu, rate: s.point.rate, harvested: s.point.harvested })
        .collect();
    let frontier = Frontier::Dual { q_max, lines };
    Ok(RERegion::from_frontier(RegionMethod::Lagrangian, frontier, grid_size, mu_grid.len(), None))
}

/// [`trace_lagrangian`] with the default multiplier and ρ grids.
pub fn trace_lagrangian_default<M: RateEnergyModel + ?Sized>(model: &M, grid_size: usize) -> Result<RERegion> {
    let streams = model.separable_streams().ok_or_else(|| {
        SimError::UnsupportedModel("Lagrangian tracing needs an interference-free, per-stream separable model".into())
    })?;
    let mu = default_mu_grid(streams, DEFAULT_MU_COUNT);
    trace_lagrangian(model, &mu, DEFAULT_RHO_GRID, grid_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swipt::StreamModel;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn streams() -> Vec<DpsStream> {
        [8.7e-7, 4.5e-7, 4.4e-8, 1.7e-9]
            .iter()
            .map(|&s| DpsStream { signal: 1.25 * s, interference: 0.0, noise: 1e-5, conversion_noise: 5e-7, efficiency: 1.0 })
            .collect()
    }

    fn model() -> crate::swipt::StreamModel {
        StreamModel::new(streams(), true)
    }

    fn pt(rate: f64, harvested: f64) -> REPoint {
        REPoint { rate, harvested }
    }

    #[test]
    fn envelope_of_single_point() {
        let r = pareto_envelope(&[pt(2.0, 3.0)], 4).unwrap();
        assert_eq!(r.energy_grid, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(r.max_rate, vec![2.0; 4]);
        assert_eq!(r.rate_at(3.0), 2.0);
        assert_eq!(r.rate_at(3.5), 0.0);
    }

    #[test]
    fn dominated_point_is_ignored() {
        let a = pareto_envelope(&[pt(2.0, 3.0), pt(1.0, 4.0)], 9).unwrap();
        let b = pareto_envelope(&[pt(2.0, 3.0), pt(1.0, 4.0), pt(1.5, 2.0)], 9).unwrap();
        assert_eq!(a.max_rate, b.max_rate);
        assert_eq!(a.frontier, b.frontier);
    }

    #[test]
    fn incomparable_points_form_two_steps() {
        let r = pareto_envelope(&[pt(2.0, 1.0), pt(1.0, 2.0)], 5).unwrap();
        assert_eq!(r.energy_grid, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(r.max_rate, vec![2.0, 2.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn envelope_errors() {
        assert!(pareto_envelope(&[], 4).is_err());
        assert!(pareto_envelope(&[pt(1.0, 1.0)], 1).is_err());
        assert!(pareto_envelope(&[pt(f64::NAN, 1.0)], 4).is_err());
    }

    #[test]
    fn monte_carlo_corners_are_exact() {
        let m = model();
        let cfg = MonteCarloConfig { samples: 500, seed: 3, grid_size: 50, parallel: false };
        let r = trace_monte_carlo(&m, &cfg).unwrap();
        let top = m.evaluate(&[1.0; 4]);
        let bottom = m.evaluate(&[0.0; 4]);
        assert_eq!(r.max_rate[0], top.rate);
        assert_eq!(*r.energy_grid.last().unwrap(), bottom.harvested);
        assert_eq!(*r.max_rate.last().unwrap(), 0.0);
        assert_eq!(r.seed, Some(3));
        assert_eq!(r.sample_count, 500);
    }

    #[test]
    fn monte_carlo_parallel_matches_serial() {
        let m = model();
        let serial = MonteCarloConfig { samples: 20_000, seed: 11, grid_size: 200, parallel: false };
        let parallel = MonteCarloConfig { parallel: true, ..serial };
        let a = trace_monte_carlo(&m, &serial).unwrap();
        let b = trace_monte_carlo(&m, &parallel).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = trace_monte_carlo(&m, &MonteCarloConfig { seed: 12, ..serial }).unwrap();
        assert_ne!(a.frontier, c.frontier);
    }

    #[test]
    fn lagrangian_extremes() {
        let m = model();
        let mu = default_mu_grid(m.streams(), 64);
        assert_eq!(mu[0], 0.0);
        let support = lagrangian_support(m.streams(), &mu, 1024).unwrap();
        assert!(support[0].rho.iter().all(|&r| r == 1.0));
        assert!(support.last().unwrap().rho.iter().all(|&r| r == 0.0));
        let r = trace_lagrangian(&m, &mu, 1024, 200).unwrap();
        assert_eq!(r.max_rate[0], m.evaluate(&[1.0; 4]).rate);
        assert!(r.max_rate.last().unwrap().abs() < 1e-15);
    }

    #[test]
    fn lagrangian_rejects_coupled_model() {
        let coupled = crate::swipt::ZeroForcingModel::new(
            &crate::channel::ChannelMatrix::from_entries(
                nalgebra::DMatrix::identity(2, 2) * num_complex::Complex64::new(1e-3, 0.0),
                1.0,
            )
            .unwrap(),
            &crate::swipt::LinkBudget::equal_split(10.0, 2, 1e-5, 0.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(trace_lagrangian_default(&coupled, 10), Err(SimError::UnsupportedModel(_))));
    }

    #[test]
    fn lagrangian_rejects_bad_grids() {
        let m = model();
        assert!(trace_lagrangian(&m, &[0.0, -1.0], 16, 10).is_err());
        assert!(trace_lagrangian(&m, &[1.0, 0.5], 16, 10).is_err());
        assert!(trace_lagrangian(&m, &[0.0], 1, 10).is_err());
    }

    #[test]
    fn stream_maximiser_beats_fine_scan() {
        for s in streams() {
            for mu in [0.0, 1e3, 3e4, 1e5, 1e6] {
                let rho = maximize_stream(&s, mu, 1024);
                let v = s.rate(rho) + mu * s.harvested(rho);
                let best_scan = (0..=200_000)
                    .map(|i| i as f64 / 200_000.0)
                    .map(|r| s.rate(r) + mu * s.harvested(r))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(v >= best_scan - 1e-15 * best_scan.abs(), "mu={mu}");
            }
        }
    }

    #[test]
    fn weak_duality_against_samples() {
        let m = model();
        let mu = default_mu_grid(m.streams(), 16);
        let support = lagrangian_support(m.streams(), &mu, 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let rho: Vec<f64> = (0..4).map(|_| Rng::gen::<f64>(&mut rng)).collect();
            let p = m.evaluate(&rho);
            for s in &support {
                assert!(s.point.rate + s.mu * s.point.harvested >= p.rate + s.mu * p.harvested);
            }
        }
    }

    proptest! {
        #[test]
        fn envelope_is_non_increasing(pts in proptest::collection::vec((0.0f64..10.0, 0.0f64..5.0), 1..60), grid in 2usize..80) {
            let points: Vec<REPoint> = pts.iter().map(|&(r, q)| pt(r, q)).collect();
            let env = pareto_envelope(&points, grid).unwrap();
            prop_assert!(env.max_rate.windows(2).all(|w| w[0] >= w[1]));
            // brute-force oracle on every grid threshold
            for (q, r) in env.energy_grid.iter().zip(&env.max_rate) {
                let brute = points.iter().filter(|p| p.harvested >= *q).map(|p| p.rate).fold(0.0, f64::max);
                prop_assert_eq!(*r, brute);
            }
        }
    }
}
