use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid_input, invalid_param, Result};
use crate::rng::{Rng, Seed};

/// A nonnegative function on `[0, sigma]` sampled on a uniform grid of `m`
/// steps, zero at both ends, read as piecewise linear between grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionPath {
    sigma: f64,
    values: Vec<f64>,
}

impl ExcursionPath {
    pub fn new(sigma: f64, values: Vec<f64>) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid_param(format!("excursion length must be positive, got {sigma}")));
        }
        if values.len() < 2 {
            return Err(invalid_input("an excursion needs at least one grid step"));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(invalid_input("an excursion vanishes at both ends"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid_input("excursion values must be finite and nonnegative"));
        }
        Ok(ExcursionPath { sigma, values })
    }

    /// Samples `g` on the grid, forcing the endpoints to zero.
    pub fn from_fn(sigma: f64, m: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = sigma / m as f64;
        let mut values: Vec<f64> = (0..=m).map(|k| g(k as f64 * dt)).collect();
        values[0] = 0.0;
        values[m] = 0.0;
        ExcursionPath::new(sigma, values)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of grid steps.
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.sigma / self.m() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Exact integral of the interpolant.
    pub fn area(&self) -> f64 {
        let inner: f64 = self.values[1..self.m()].iter().sum();
        inner * self.step()
    }

    pub fn scaled(&self, factor: f64) -> ExcursionPath {
        ExcursionPath { sigma: self.sigma, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Grid cell containing `t` and the fractional offset inside it.
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = (t / self.step()).clamp(0.0, self.m() as f64);
        let k = (x.floor() as usize).min(self.m() - 1);
        (k, x - k as f64)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (k, r) = self.locate(t);
        self.values[k] + r * (self.values[k + 1] - self.values[k])
    }

    /// Breakpoints of the interpolant in `[a, b]`: the ends plus every grid
    /// point strictly inside.
    fn knots(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        let first = (a / h).floor() as usize + 1;
        let last = ((b / h).ceil() as usize).min(self.m() + 1);
        std::iter::once(a)
            .chain((first..last).map(move |k| k as f64 * h).filter(move |&t| t > a && t < b))
            .chain(std::iter::once(b))
    }

    /// `min f` over `[a, b]` by a linear scan; the identification process
    /// uses a range-minimum table instead.
    pub fn min_between(&self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.knots(a, b).map(|t| self.eval(t)).fold(f64::INFINITY, f64::min)
    }

    /// `∫_a^b f`, exact for the interpolant.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for t in self.knots(a, b) {
            let y = self.eval(t);
            if let Some((t0, y0)) = prev {
                total += 0.5 * (y0 + y) * (t - t0);
            }
            prev = Some((t, y));
        }
        total
    }

    /// `∫_a^b min_{[a,t]} f dt`, exact for the interpolant.
    pub fn running_min_integral(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut low = self.eval(a);
        let mut prev = (a, low);
        for t in self.knots(a, b).skip(1) {
            let (t0, y0) = prev;
            let y1 = self.eval(t);
            let dt = t - t0;
            if y1 >= low {
                total += low * dt;
            } else {
                // f falls from y0 >= low to y1 < low; it meets low at t*.
                let cross = if y0 > low { (y0 - low) / (y0 - y1) * dt } else { 0.0 };
                total += low * cross + 0.5 * (low + y1) * (dt - cross);
                low = y1;
            }
            prev = (t, y1);
        }
        total
    }
}

/// Grid values of a standard excursion on `[0, 1]`: the Euclidean norm of a
/// three-dimensional Brownian bridge, which has exactly the excursion's
/// finite-dimensional laws.
pub fn unit_excursion(m: usize, rng: &mut Rng) -> Vec<f64> {
    let sd = (1.0 / m as f64).sqrt();
    let mut walk = vec![[0.0f64; 3]; m + 1];
    for k in 1..=m {
        for c in 0..3 {
            let z: f64 = StandardNormal.sample(rng);
            walk[k][c] = walk[k - 1][c] + sd * z;
        }
    }
    let end = walk[m];
    let mut values: Vec<f64> = walk
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let r = k as f64 / m as f64;
            let b = [w[0] - r * end[0], w[1] - r * end[1], w[2] - r * end[2]];
            (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt()
        })
        .collect();
    values[0] = 0.0;
    values[m] = 0.0;
    values
}

fn unit_area(values: &[f64]) -> f64 {
    let m = values.len() - 1;
    values[1..m].iter().sum::<f64>() / m as f64
}

fn check_grid(sigma: f64, m: usize) -> Result<()> {
    if m < 8 {
        return Err(invalid_param(format!("grid must have at least 8 steps, got {m}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid_param(format!("excursion length must be positive, got {sigma}")));
    }
    Ok(())
}

/// Standard Brownian excursion of length `sigma` on an `m`-step grid,
/// `sqrt(sigma) * e(t / sigma)`.
pub fn sample_excursion(sigma: f64, m: usize, seed: Seed) -> Result<ExcursionPath> {
    check_grid(sigma, m)?;
    let values = unit_excursion(m, &mut seed.rng());
    Ok(ExcursionPath { sigma, values }.scaled(sigma.sqrt()))
}

#[derive(Debug, Clone, Serialize)]
pub struct TiltedExcursion {
    pub path: ExcursionPath,
    /// Effective sample size of the importance weights.
    pub ess: f64,
}

/// Excursion of length `sigma` tilted by `exp(sigma^{3/2} * area)`, by
/// sampling-importance-resampling from `pool` standard proposals. Proposal
/// `k` is drawn from stream `k`, so only the chosen one is regenerated.
pub fn sample_tilted_excursion(sigma: f64, m: usize, pool: usize, seed: Seed) -> Result<TiltedExcursion> {
    check_grid(sigma, m)?;
    if pool < 100 {
        return Err(invalid_param(format!("proposal pool must hold at least 100 paths, got {pool}")));
    }
    let base = seed.derive(0);
    let tilt = sigma.powf(1.5);
    let log_w: Vec<f64> = (0..pool as u64)
        .map(|k| tilt * unit_area(&unit_excursion(m, &mut base.stream(k))))
        .collect();
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = w.iter().sum();
    let ess = sum * sum / w.iter().map(|x| x * x).sum::<f64>();
    if ess < 10.0 {
        log::warn!("degenerate tilt at sigma={sigma}: effective sample size {ess:.1} of {pool}");
    }
    let mut u = rand::Rng::random::<f64>(&mut seed.derive(1).rng()) * sum;
    let mut pick = pool - 1;
    for (k, wk) in w.iter().enumerate() {
        if u < *wk {
            pick = k;
            break;
        }
        u -= wk;
    }
    let values = unit_excursion(m, &mut base.stream(pick as u64));
    Ok(TiltedExcursion { path: ExcursionPath { sigma, values }.scaled(sigma.sqrt()), ess })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> ExcursionPath {
        ExcursionPath::from_fn(2.0, 8, |t| if t <= 1.0 { t } else { 2.0 - t }).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ExcursionPath::new(1.0, vec![0.0, 1.0, 0.5]).is_err());
        assert!(ExcursionPath::new(0.0, vec![0.0, 1.0, 0.0]).is_err());
        assert!(ExcursionPath::new(1.0, vec![0.0, -1.0, 0.0]).is_err());
        assert!(sample_excursion(1.0, 4, Seed(1)).is_err());
        assert!(sample_tilted_excursion(1.0, 16, 50, Seed(1)).is_err());
    }

    #[test]
    fn piecewise_linear_calculus() {
        let f = triangle();
        assert_eq!(f.eval(0.5), 0.5);
        assert!((f.eval(1.3) - 0.7).abs() < 1e-12);
        assert!((f.area() - 1.0).abs() < 1e-12);
        assert!((f.integral(0.5, 1.5) - 0.75).abs() < 1e-12);
        assert!((f.min_between(0.5, 1.7) - 0.3).abs() < 1e-12);
        // running min from 0.5: 0.5 until t = 1.5, then 2 - t
        assert!((f.running_min_integral(0.5, 2.0) - (0.5 + 0.125)).abs() < 1e-12);
        assert!((f.running_min_integral(0.2, 0.9) - 0.2 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn samples_are_excursions() {
        let e = sample_excursion(4.0, 64, Seed(3)).unwrap();
        assert_eq!(e.values()[0], 0.0);
        assert_eq!(e.values()[64], 0.0);
        assert!(e.values()[1..64].iter().all(|&v| v > 0.0));
        assert_eq!(e, sample_excursion(4.0, 64, Seed(3)).unwrap());
        let t = sample_tilted_excursion(1.0, 32, 100, Seed(5)).unwrap();
        assert_eq!(t.path, sample_tilted_excursion(1.0, 32, 100, Seed(5)).unwrap().path);
        assert!(t.ess > 10.0 && t.ess <= 100.0);
    }
}
