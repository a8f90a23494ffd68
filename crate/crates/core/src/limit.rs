//! Brownian motion with parabolic drift, its excursions above the running
//! infimum, and the limit sequence of strongly connected components built on
//! those excursions.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::continuum::{continuum_sccs, ExcursionPath, IdentificationProcess};
use crate::error::{invalid_param, Result};
use crate::mdm::{by_length_desc, Mdm};
use crate::rng::Seed;

/// `W(t) + lambda t - t^2 / 2` on the grid `k * step`, `k = 0..=horizon/step`.
#[derive(Debug, Clone, Serialize)]
pub struct DriftPath {
    pub lambda: f64,
    pub horizon: f64,
    pub step: f64,
    values: Vec<f64>,
}

fn check(horizon: f64, step: f64) -> Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid_param(format!("horizon must be positive, got {horizon}")));
    }
    if !(step > 0.0 && step <= horizon / 100.0) {
        return Err(invalid_param(format!("step must lie in (0, horizon/100], got {step}")));
    }
    Ok((horizon / step).round() as usize)
}

impl DriftPath {
    /// The drift alone, without noise.
    pub fn deterministic(lambda: f64, horizon: f64, step: f64) -> Result<Self> {
        let m = check(horizon, step)?;
        let values = (0..=m).map(|k| drift(lambda, k as f64 * step)).collect();
        Ok(DriftPath { lambda, horizon, step, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

fn drift(lambda: f64, t: f64) -> f64 {
    lambda * t - 0.5 * t * t
}

pub fn sample_drift_path(lambda: f64, horizon: f64, step: f64, seed: Seed) -> Result<DriftPath> {
    let m = check(horizon, step)?;
    let mut rng = seed.rng();
    let sd = step.sqrt();
    let mut w = 0.0;
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    for k in 1..=m {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        values.push(w + drift(lambda, k as f64 * step));
    }
    Ok(DriftPath { lambda, horizon, step, values })
}

/// Grid index ranges `(a, b)` of the excursions of `W - inf W`: the
/// reflected path is 0 at `a` and `b` and positive strictly between.
/// Excursions still open at the horizon are dropped.
fn excursion_ranges(path: &DriftPath) -> Vec<(usize, usize)> {
    let mut low = f64::INFINITY;
    let mut last_zero = 0;
    let mut out = Vec::new();
    for (k, &w) in path.values.iter().enumerate() {
        if w <= low {
            low = w;
            if k > last_zero + 1 {
                out.push((last_zero, k));
            }
            last_zero = k;
        }
    }
    out
}

/// Excursions above the running infimum, longest first (ties: earliest).
pub fn extract_excursions(path: &DriftPath) -> Vec<ExcursionPath> {
    let mut ranges = excursion_ranges(path);
    ranges.sort_by_key(|&(a, b)| (std::cmp::Reverse(b - a), a));
    ranges.into_iter().map(|r| reflected_piece(path, r)).collect()
}

fn reflected_piece(path: &DriftPath, (a, b): (usize, usize)) -> ExcursionPath {
    let floor = path.values[a];
    let mut values: Vec<f64> = path.values[a..=b].iter().map(|w| (w - floor).max(0.0)).collect();
    values[0] = 0.0;
    values[b - a] = 0.0;
    ExcursionPath::new((b - a) as f64 * path.step, values).expect("reflected path is an excursion")
}

/// `sum_i sigma_i^alpha` over the excursion lengths.
pub fn excursion_moment_sum(path: &DriftPath, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid_param(format!("alpha must be positive, got {alpha}")));
    }
    Ok(excursion_ranges(path).iter().map(|&(a, b)| ((b - a) as f64 * path.step).powf(alpha)).sum())
}

/// One draw of the limit object on `[0, horizon]`.
#[derive(Debug, Clone, Serialize)]
pub struct LimitSample {
    /// Excursion lengths, longest first.
    pub lengths: Vec<f64>,
    /// All components, longest first.
    pub components: Vec<Mdm>,
    pub ancestral: usize,
    pub nonancestral: usize,
}

impl LimitSample {
    pub fn complex_count(&self) -> usize {
        self.components.iter().filter(|c| !c.is_loop()).count()
    }

    pub fn loop_count(&self) -> usize {
        self.components.iter().filter(|c| c.is_loop()).count()
    }

    /// The first `k` components, padded with zero-length loops.
    pub fn top(&self, k: usize) -> Vec<Mdm> {
        let mut out: Vec<Mdm> = self.components.iter().take(k).cloned().collect();
        out.resize_with(k, Mdm::degenerate_loop);
        out
    }
}

/// Runs the identification process with `f = 2 e` on every excursion `e` of
/// the reflected drift path and pools the resulting components. Excursions
/// of the reflected path already carry the area tilt given their lengths.
pub fn sample_limit(lambda: f64, horizon: f64, step: f64, seed: Seed) -> Result<LimitSample> {
    let path = sample_drift_path(lambda, horizon, step, seed.derive(0))?;
    let marks = seed.derive(1);
    let mut ranges = excursion_ranges(&path);
    let mut components = Vec::new();
    let (mut ancestral, mut nonancestral) = (0, 0);
    for (j, &(a, b)) in ranges.iter().enumerate() {
        let f = reflected_piece(&path, (a, b)).scaled(2.0);
        let mt = IdentificationProcess::new(&f).run_with(&mut marks.stream(j as u64))?;
        ancestral += mt.n_ancestral();
        nonancestral += mt.n_nonancestral();
        components.extend(continuum_sccs(&mt));
    }
    components.sort_by(by_length_desc);
    ranges.sort_by_key(|&(a, b)| (std::cmp::Reverse(b - a), a));
    let lengths = ranges.iter().map(|&(a, b)| (b - a) as f64 * step).collect();
    Ok(LimitSample { lengths, components, ancestral, nonancestral })
}

/// The first `k` components of the limit object, longest first, padded.
pub fn sample_limit_components(lambda: f64, horizon: f64, step: f64, k: usize, seed: Seed) -> Result<Vec<Mdm>> {
    Ok(sample_limit(lambda, horizon, step, seed)?.top(k))
}

/// `replicas` independent limit samples on derived seeds, in parallel.
pub fn sample_limit_replicas(
    lambda: f64,
    horizon: f64,
    step: f64,
    replicas: usize,
    seed: Seed,
) -> Result<Vec<LimitSample>> {
    (0..replicas as u64).into_par_iter().map(|r| sample_limit(lambda, horizon, step, seed.derive(r))).collect()
}
