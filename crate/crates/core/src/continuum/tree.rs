use std::collections::HashMap;

use serde::Serialize;

use super::identification::MarkedTree;
use crate::mdm::{by_length_desc, Mdm};
use crate::scc::multigraph_components;

/// The new part of the reduced tree added by one marked leaf: the heights
/// `(base, top]` on the path from the root to the leaf that are not already
/// in the tree. It hangs off `parent` at height `base`; the first spine hangs
/// off the root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spine {
    /// Time of the leaf in `[0, sigma]`.
    pub s: f64,
    pub base: f64,
    pub top: f64,
    pub parent: Option<usize>,
}

impl Spine {
    pub fn length(&self) -> f64 {
        self.top - self.base
    }
}

/// A point of the reduced tree: a height on a spine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreePoint {
    pub spine: usize,
    pub height: f64,
}

/// The subtree spanned by the root and the marked leaves.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ReducedTree {
    spines: Vec<Spine>,
}

impl ReducedTree {
    pub fn spines(&self) -> &[Spine] {
        &self.spines
    }

    pub fn total_length(&self) -> f64 {
        self.spines.iter().map(Spine::length).sum()
    }

    /// Adds the leaf at time `s` with height `top`, joining the tree at
    /// height `base` on the path to the previous leaf.
    pub(crate) fn push_leaf(&mut self, s: f64, base: f64, top: f64) -> usize {
        let parent = self.spines.len().checked_sub(1).map(|mut k| {
            while k > 0 && base <= self.spines[k].base {
                k = self.spines[k].parent.expect("only the first spine is parentless");
            }
            k
        });
        self.spines.push(Spine { s, base, top, parent });
        self.spines.len() - 1
    }

    /// The same point, moved to the spine that owns its height.
    pub fn normalize(&self, mut p: TreePoint) -> TreePoint {
        while p.spine > 0 && p.height <= self.spines[p.spine].base {
            p.spine = self.spines[p.spine].parent.unwrap();
        }
        p
    }

    /// No marked leaf is an ancestor of another. Brownian trees never fail
    /// this; a piecewise-linear coding function does with probability of the
    /// order of its grid step, and then glued vertices may get degree 4.
    pub fn is_generic(&self) -> bool {
        self.spines.iter().enumerate().all(|(k, sp)| {
            sp.length() > 0.0
                && sp.parent.is_none_or(|q| sp.base < self.spines[q].top)
                && (k == 0 || sp.base > 0.0)
        })
    }

    pub fn leaf(&self, i: usize) -> TreePoint {
        TreePoint { spine: i, height: self.spines[i].top }
    }

    /// The point at arc-length `u` when spines are laid end to end.
    pub(crate) fn point_at(&self, mut u: f64) -> TreePoint {
        for (k, sp) in self.spines.iter().enumerate() {
            if u < sp.length() || k + 1 == self.spines.len() {
                return self.normalize(TreePoint { spine: k, height: sp.base + u.min(sp.length()) });
            }
            u -= sp.length();
        }
        unreachable!("point_at on an empty tree")
    }

    /// `(spine, highest height on it)` along the path from `p` to the root.
    fn root_path(&self, p: TreePoint) -> Vec<(usize, f64)> {
        let mut out = vec![(p.spine, p.height)];
        let mut k = p.spine;
        while let Some(q) = self.spines[k].parent {
            out.push((q, self.spines[k].base));
            k = q;
        }
        out
    }

    pub fn distance(&self, a: TreePoint, b: TreePoint) -> f64 {
        let (a, b) = (self.normalize(a), self.normalize(b));
        let pa = self.root_path(a);
        let pb = self.root_path(b);
        let meet = pa
            .iter()
            .filter_map(|&(k, ha)| pb.iter().find(|&&(j, _)| j == k).map(|&(_, hb)| ha.min(hb)))
            .fold(0.0, f64::max);
        a.height + b.height - 2.0 * meet
    }
}

fn intern(ids: &mut HashMap<(usize, u64), usize>, key: (usize, u64)) -> usize {
    let n = ids.len();
    *ids.entry(key).or_insert(n)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// The strongly connected components of the reduced tree with every leaf
/// `x_i` glued to its partner `y_i`, smoothed and ranked longest first.
///
/// Each leaf is its own node, hanging from the last tree point below it.
/// When a grid coincidence puts a leaf exactly on the path to a later leaf,
/// that edge has length 0: reachability is that of a Brownian tree (where
/// the branch sits just below the leaf), and the zero-length edges left
/// after smoothing are contracted.
pub fn continuum_sccs(mt: &MarkedTree) -> Vec<Mdm> {
    let tree = mt.tree();
    if mt.marks().is_empty() {
        return Vec::new();
    }
    let spines = tree.spines();
    let leaf_key = |k: usize| (k, u64::MAX);
    let point_key = |p: TreePoint| if p.height > 0.0 { (p.spine, p.height.to_bits()) } else { (0, 0) };
    let mut ids: HashMap<(usize, u64), usize> = HashMap::new();
    let root = intern(&mut ids, (0, 0));

    let mut heights: Vec<Vec<f64>> = vec![Vec::new(); spines.len()];
    for sp in &spines[1..] {
        if sp.base > 0.0 {
            heights[sp.parent.unwrap()].push(sp.base);
        }
    }
    let ys: Vec<TreePoint> = mt.marks().iter().map(|m| tree.normalize(m.y)).collect();
    for y in &ys {
        if y.height > 0.0 {
            heights[y.spine].push(y.height);
        }
    }

    let mut edges = Vec::new();
    for (k, sp) in spines.iter().enumerate() {
        let hs = &mut heights[k];
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        let (mut prev, mut prev_h) = match sp.parent {
            Some(q) if sp.base > 0.0 => (intern(&mut ids, point_key(TreePoint { spine: q, height: sp.base })), sp.base),
            _ => (root, 0.0),
        };
        for &h in hs.iter() {
            let v = intern(&mut ids, point_key(TreePoint { spine: k, height: h }));
            edges.push((prev, v, h - prev_h));
            prev = v;
            prev_h = h;
        }
        let leaf = intern(&mut ids, leaf_key(k));
        edges.push((prev, leaf, sp.top - prev_h));
    }

    let mut uf = UnionFind((0..ids.len()).collect());
    for (i, y) in ys.iter().enumerate() {
        let y = ids[&point_key(*y)];
        uf.union(ids[&leaf_key(i)], y);
    }
    let edges: Vec<(usize, usize, f64)> = edges.into_iter().map(|(u, v, l)| (uf.find(u), uf.find(v), l)).collect();
    let mut out: Vec<Mdm> = multigraph_components(ids.len(), &edges)
        .into_iter()
        .map(|(_, m)| m.smoothed().contract_zero_edges().smoothed())
        .collect();
    debug_assert!(out.iter().all(|m| Mdm::new(m.labels().to_vec(), m.edges().to_vec()).is_ok()));
    out.sort_by(by_length_desc);
    out
}
