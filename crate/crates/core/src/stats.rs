//! Goodness-of-fit tests and summary helpers used by the experiments.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p_approx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub stat: f64,
    pub dof: usize,
    pub p: f64,
}

/// Kolmogorov tail `Q(x) = 2 Σ (-1)^{j-1} exp(-2 j² x²)`.
fn kolmogorov_q(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = sign * (-2.0 * (j * j) as f64 * x * x).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value
/// (effective size corrected as `(√n_e + 0.12 + 0.11/√n_e) D`).
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid_input("KS needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(invalid_input("KS samples contain NaN"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let p_approx = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    Ok(KsResult { d, p_approx })
}

/// Groups consecutive bins until each group's weight reaches `min`; a short
/// tail joins the last group.
fn merge_bins(weights: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let (mut start, mut acc) = (0, 0.0);
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.end = weights.len(),
            None => groups.push(0..weights.len()),
        }
    }
    groups
}

fn chi_square_p(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(stat)
}

/// Pearson goodness of fit of `observed` counts against `expected`
/// probabilities (renormalized); bins with expected count below 5 are merged
/// with their right neighbours.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() {
        return Err(invalid_input("observed and expected have different lengths"));
    }
    let total_p: f64 = expected.iter().sum();
    if !(total_p > 0.0) || expected.iter().any(|p| !(*p >= 0.0)) {
        return Err(invalid_input("expected probabilities must be nonnegative with positive sum"));
    }
    let n: u64 = observed.iter().sum();
    let e: Vec<f64> = expected.iter().map(|p| p / total_p * n as f64).collect();
    let groups = merge_bins(&e, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let o: u64 = observed[g.clone()].iter().sum();
        let ex: f64 = e[g.clone()].iter().sum();
        if ex > 0.0 {
            stat += (o as f64 - ex).powi(2) / ex;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquareResult { stat, dof, p: chi_square_p(stat, dof) })
}

/// Chi-square test of homogeneity between two count vectors over the same
/// bins, merging bins whose pooled expected count is below 5.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.len() != b.len() {
        return Err(invalid_input("count vectors have different lengths"));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(invalid_input("both samples must be nonempty"));
    }
    let pooled: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64).collect();
    let weight = na.min(nb) / (na + nb);
    let min_expected: Vec<f64> = pooled.iter().map(|c| c * weight).collect();
    let groups = merge_bins(&min_expected, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let oa: u64 = a[g.clone()].iter().sum();
        let ob: u64 = b[g.clone()].iter().sum();
        let tot = (oa + ob) as f64;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        if tot > 0.0 {
            stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
        }
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquareResult { stat, dof, p: chi_square_p(stat, dof) })
}

/// Histogram of nonnegative integer observations into `0..bins`, the last bin
/// collecting everything larger.
pub fn count_histogram(values: impl IntoIterator<Item = usize>, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for v in values {
        h[v.min(bins - 1)] += 1;
    }
    h
}

/// Poisson probabilities for `0..bins`, the last bin holding the upper tail.
pub fn poisson_probs(mean: f64, bins: usize) -> Vec<f64> {
    let d = Poisson::new(mean).expect("positive mean");
    let mut p: Vec<f64> = (0..bins as u64).map(|k| d.pmf(k)).collect();
    let head: f64 = p[..bins - 1].iter().sum();
    p[bins - 1] = (1.0 - head).max(0.0);
    p
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}
