use std::cell::OnceCell;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use super::excursion::ExcursionPath;
use super::rmq::SparseMin;
use super::tree::{ReducedTree, TreePoint};
use crate::error::{invalid_input, Error, Result};
use crate::rng::{Rng, Seed};

/// Hard cap on identifications per excursion. The number is finite almost
/// surely; hitting the cap points at a broken input.
pub const DEFAULT_MARK_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mark {
    /// Time of the leaf `x_i` in `[0, sigma]`.
    pub s: f64,
    /// Whether `y_i` is an ancestor of `x_i`.
    pub ancestral: bool,
    pub y: TreePoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkedTree {
    sigma: f64,
    marks: Vec<Mark>,
    tree: ReducedTree,
}

impl MarkedTree {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn tree(&self) -> &ReducedTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.marks.len()
    }

    pub fn n_ancestral(&self) -> usize {
        self.marks.iter().filter(|m| m.ancestral).count()
    }

    pub fn n_nonancestral(&self) -> usize {
        self.n() - self.n_ancestral()
    }
}

/// The identification process on the tree coded by `f`. The range-minimum
/// table is only built once a first mark appears, which keeps the many tiny
/// excursions of a limit sample cheap.
pub struct IdentificationProcess<'a> {
    f: &'a ExcursionPath,
    max: f64,
    cap: usize,
    rmq: OnceCell<SparseMin>,
}

impl<'a> IdentificationProcess<'a> {
    pub fn new(f: &'a ExcursionPath) -> Self {
        IdentificationProcess { f, max: f.max(), cap: DEFAULT_MARK_CAP, rmq: OnceCell::new() }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// `min f` over `[a, b]`, `a <= b`.
    pub fn fhat(&self, a: f64, b: f64) -> f64 {
        let f = self.f;
        let ends = f.eval(a).min(f.eval(b));
        let h = f.step();
        let lo = (a / h).floor() as usize + 1;
        let hi = ((b / h).ceil() as usize).saturating_sub(1).min(f.m());
        if lo > hi {
            return ends;
        }
        let rmq = self.rmq.get_or_init(|| SparseMin::new(f.values()));
        ends.min(rmq.min(lo, hi))
    }

    /// `l_i(t)`: length of the tree spanned by the root, the marked leaves
    /// and the point at time `t`, for `t` past the last mark `last`.
    /// `base` is the length spanned by the marked leaves alone.
    pub fn rate(&self, base: f64, last: Option<f64>, t: f64) -> f64 {
        match last {
            None => self.f.eval(t),
            Some(s) => base + self.f.eval(t) - self.fhat(s, t),
        }
    }

    pub fn run(&self, seed: Seed) -> Result<MarkedTree> {
        self.run_with(&mut seed.rng())
    }

    pub fn run_with(&self, rng: &mut Rng) -> Result<MarkedTree> {
        let sigma = self.f.sigma();
        let mut tree = ReducedTree::default();
        let mut marks: Vec<Mark> = Vec::new();
        let mut spanned = 0.0;
        let mut t = 0.0;
        loop {
            let last = marks.last().map(|m| m.s);
            let bound = spanned + self.max;
            if bound <= 0.0 {
                break;
            }
            let accepted = loop {
                let e: f64 = Exp1.sample(rng);
                t += e / bound;
                if t >= sigma {
                    break None;
                }
                let rate = self.rate(spanned, last, t);
                debug_assert!(rate <= (marks.len() + 1) as f64 * self.max * (1.0 + 1e-12));
                if rng.random::<f64>() * bound < rate {
                    break Some(rate);
                }
            };
            let Some(rate) = accepted else { break };
            if marks.len() == self.cap {
                return Err(Error::RunawayMarking { cap: self.cap });
            }
            let top = self.f.eval(t);
            let base = last.map_or(0.0, |s| self.fhat(s, t));
            let k = tree.push_leaf(t, base, top);
            let u = rng.random::<f64>() * rate;
            let (y, ancestral) = if u < top - base {
                (tree.normalize(TreePoint { spine: k, height: base + u }), true)
            } else {
                let y = tree.point_at(u - (top - base));
                (y, y.height <= self.fhat(tree.spines()[y.spine].s, t))
            };
            marks.push(Mark { s: t, ancestral, y });
            spanned += top - base;
        }
        Ok(MarkedTree { sigma, marks, tree })
    }
}

pub fn run_identification(f: &ExcursionPath, seed: Seed) -> Result<MarkedTree> {
    IdentificationProcess::new(f).run(seed)
}

/// Density of `(N = n, s_1 ∈ dt_1, ..., s_n ∈ dt_n)` at strictly increasing
/// times in `(0, sigma)`. Integrals are exact for the interpolated `f`.
pub fn mark_density(f: &ExcursionPath, times: &[f64]) -> Result<f64> {
    let sigma = f.sigma();
    if times.iter().any(|&t| !(t > 0.0 && t < sigma)) || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid_input("mark times must increase strictly inside (0, sigma)"));
    }
    let proc = IdentificationProcess::new(f);
    let mut product = 1.0;
    let mut spanned = 0.0;
    let mut prev = 0.0;
    // Up to the first mark the rate is f itself.
    let mut exponent = f.integral(0.0, times.first().copied().unwrap_or(sigma));
    for (i, &t) in times.iter().enumerate() {
        let base = if i == 0 { 0.0 } else { proc.fhat(prev, t) };
        spanned += f.eval(t) - base;
        product *= spanned;
        let next = times.get(i + 1).copied().unwrap_or(sigma);
        exponent += spanned * (next - t) + f.integral(t, next) - f.running_min_integral(t, next);
        prev = t;
    }
    Ok(product * (-exponent).exp())
}

/// `P[no non-ancestral identification | exactly one ancestral, at s1]`.
/// With one leaf at `s1`, the tree spanned also by the point at `t` has
/// `f(s1) - fhat(s1, t)` of its length off the path to `t`, and that is the
/// non-ancestral rate.
pub fn no_nonancestral_prob(f: &ExcursionPath, s1: f64) -> Result<f64> {
    let sigma = f.sigma();
    if !(s1 > 0.0 && s1 <= sigma) {
        return Err(invalid_input(format!("s1 = {s1} outside (0, {sigma}]")));
    }
    let rate_integral = f.eval(s1) * (sigma - s1) - f.running_min_integral(s1, sigma);
    Ok((-rate_integral).exp())
}
