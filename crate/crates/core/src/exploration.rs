//! Forward depth-first exploration of a graph on `1..=n`.
//!
//! The open vertices form a stack whose head is explored next. Exploring `v`
//! pops it and pushes its unseen out-neighbours (all neighbours for an
//! undirected graph) in increasing order, smallest on top. When the stack
//! runs dry it is reseeded with the smallest unexplored label, which starts a
//! new tree. The exploration order is a planar order of the resulting forest.
//!
//! Instead of storing every stack state we record, for each vertex, the step
//! at which it was pushed; it then stays on the stack until the step at which
//! it is explored. Two vertices are co-resident iff these intervals overlap.

use serde::Serialize;

use crate::error::{invalid_input, Result};
use crate::graph::{bernoulli_indices, DirectedGraph, Neighbours, UndirectedGraph};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exploration {
    n: usize,
    order: Vec<usize>,
    #[serde(skip)]
    position: Vec<usize>,
    #[serde(skip)]
    parent: Vec<Option<usize>>,
    #[serde(skip)]
    children: Vec<Vec<usize>>,
    #[serde(skip)]
    tree_index: Vec<usize>,
    roots: Vec<usize>,
    #[serde(skip)]
    pushed_at: Vec<usize>,
    #[serde(skip)]
    subtree_size: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Unseen,
    Open,
    Explored,
}

/// Runs the exploration. Works for directed and undirected graphs alike: the
/// only input is the sorted neighbour list of each vertex.
pub fn forward_dfs<G: Neighbours + ?Sized>(g: &G) -> Exploration {
    let n = g.vertex_count();
    let mut state = vec![State::Unseen; n + 1];
    let mut stack: Vec<usize> = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut position = vec![usize::MAX; n + 1];
    let mut parent = vec![None; n + 1];
    let mut children = vec![Vec::new(); n + 1];
    let mut tree_index = vec![usize::MAX; n + 1];
    let mut pushed_at = vec![usize::MAX; n + 1];
    let mut roots = Vec::new();
    let mut next_seed = 1;

    for step in 0..n {
        if stack.is_empty() {
            while state[next_seed] != State::Unseen {
                next_seed += 1;
            }
            let r = next_seed;
            state[r] = State::Open;
            pushed_at[r] = step;
            tree_index[r] = roots.len();
            roots.push(r);
            stack.push(r);
        }
        let v = stack.pop().expect("stack reseeded above");
        state[v] = State::Explored;
        position[v] = step;
        order.push(v);
        let tree = tree_index[v];
        let mut fresh = Vec::new();
        for &w in g.neighbours(v) {
            if state[w] == State::Unseen {
                state[w] = State::Open;
                parent[w] = Some(v);
                pushed_at[w] = step + 1;
                tree_index[w] = tree;
                fresh.push(w);
            }
        }
        stack.extend(fresh.iter().rev());
        children[v] = fresh;
    }

    let mut subtree_size = vec![1usize; n + 1];
    subtree_size[0] = 0;
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            subtree_size[p] += subtree_size[v];
        }
    }

    Exploration { n, order, position, parent, children, tree_index, roots, pushed_at, subtree_size }
}

impl Exploration {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(v_0, ..., v_{n-1})`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn tree_index(&self, v: usize) -> usize {
        self.tree_index[v]
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn tree_count(&self) -> usize {
        self.roots.len()
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.subtree_size[v]
    }

    /// Sizes of the trees in discovery order.
    pub fn tree_sizes(&self) -> Vec<usize> {
        self.roots.iter().map(|&r| self.subtree_size[r]).collect()
    }

    /// `(push step, explore step)`: the vertex sits on the stack for every
    /// step in this closed interval.
    pub fn stack_interval(&self, v: usize) -> (usize, usize) {
        (self.pushed_at[v], self.position[v])
    }

    /// True if `a` lies on the forest path from its root to `b` (inclusive).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let pa = self.position[a];
        let pb = self.position[b];
        pa <= pb && pb < pa + self.subtree_size[a]
    }

    /// `(u, v)` with `v` later in the order and both on the stack at some step.
    pub fn is_permitted(&self, u: usize, v: usize) -> bool {
        u != v && self.position[u] < self.position[v] && self.pushed_at[v] <= self.position[u]
    }

    /// All permitted pairs, lexicographic. Quadratic; intended for small graphs.
    pub fn permitted_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 1..=self.n {
            for v in 1..=self.n {
                if self.is_permitted(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Forest edges `(parent, child)`, lexicographic.
    pub fn tree_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> =
            (1..=self.n).filter_map(|v| self.parent[v].map(|p| (p, v))).collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeClassification {
    pub tree: Vec<(usize, usize)>,
    pub surplus: Vec<(usize, usize)>,
    pub back: Vec<(usize, usize)>,
    pub ancestral_back: Vec<(usize, usize)>,
}

/// Splits the edges of `g` by position in the planar order of `ex`.
pub fn classify_edges(g: &DirectedGraph, ex: &Exploration) -> Result<EdgeClassification> {
    if g.n() != ex.n {
        return Err(invalid_input(format!(
            "exploration has {} vertices, graph has {}",
            ex.n,
            g.n()
        )));
    }
    let mut out = EdgeClassification::default();
    let mut tree_seen = 0usize;
    for (u, v) in g.edges() {
        if ex.parent[v] == Some(u) {
            out.tree.push((u, v));
            tree_seen += 1;
        } else if ex.position[u] < ex.position[v] {
            out.surplus.push((u, v));
        } else {
            out.back.push((u, v));
            if ex.is_ancestor(v, u) {
                out.ancestral_back.push((u, v));
            }
        }
    }
    if tree_seen != ex.n - ex.roots.len() {
        return Err(invalid_input("exploration forest is not a subgraph of the graph"));
    }
    Ok(out)
}

/// Samples G(n,p), explores it, orients its edges forward and then adds each
/// decreasing pair `(v_i, v_j)`, `j < i`, independently with probability `p`.
pub fn coupled_sample(n: usize, p: f64, seed: Seed) -> Result<DirectedGraph> {
    let undirected = crate::graph::sample_undirected_gnp(n, p, seed.derive(0))?;
    Ok(coupled_from_undirected(&undirected, p, seed.derive(1)))
}

pub(crate) fn coupled_from_undirected(g: &UndirectedGraph, p: f64, seed: Seed) -> DirectedGraph {
    let n = g.n();
    let ex = forward_dfs(g);
    let mut rows = vec![Vec::new(); n + 1];
    for (a, b) in g.edges() {
        if ex.position[a] < ex.position[b] {
            rows[a].push(b);
        } else {
            rows[b].push(a);
        }
    }
    for (i, &vi) in ex.order.iter().enumerate() {
        let mut rng = seed.stream(i as u64);
        bernoulli_indices(i, p, &mut rng, |j| rows[vi].push(ex.order[j]));
    }
    for row in rows.iter_mut() {
        row.sort_unstable();
    }
    DirectedGraph::from_sorted_rows(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dg(n: usize, e: &[(usize, usize)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn empty_graph_gives_singleton_trees() {
        let ex = forward_dfs(&DirectedGraph::empty(3));
        assert_eq!(ex.order(), &[1, 2, 3]);
        assert_eq!(ex.tree_count(), 3);
        assert_eq!(ex.tree_sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn four_vertex_example() {
        let g = dg(4, &[(1, 2), (1, 3), (3, 2), (4, 1)]);
        let ex = forward_dfs(&g);
        assert_eq!(ex.order(), &[1, 2, 3, 4]);
        assert_eq!(ex.children(1), &[2, 3]);
        assert_eq!(ex.roots(), &[1, 4]);
        assert_eq!(ex.tree_index(4), 1);

        let c = classify_edges(&g, &ex).unwrap();
        assert_eq!(c.tree, vec![(1, 2), (1, 3)]);
        assert!(c.surplus.is_empty());
        assert_eq!(c.back, vec![(3, 2), (4, 1)]);
        assert!(c.ancestral_back.is_empty());

        assert_eq!(ex.permitted_pairs(), vec![(2, 3)]);
    }

    #[test]
    fn path_example() {
        let g = dg(4, &[(1, 3), (3, 2), (2, 4)]);
        let ex = forward_dfs(&g);
        assert_eq!(ex.order(), &[1, 3, 2, 4]);
        assert_eq!(ex.tree_edges(), vec![(1, 3), (2, 4), (3, 2)]);
        assert_eq!(ex.tree_count(), 1);
        assert!(ex.permitted_pairs().is_empty());
    }

    #[test]
    fn two_cycle_has_ancestral_back_edge() {
        let g = dg(2, &[(1, 2), (2, 1)]);
        let c = classify_edges(&g, &forward_dfs(&g)).unwrap();
        assert_eq!(c.tree, vec![(1, 2)]);
        assert_eq!(c.back, vec![(2, 1)]);
        assert_eq!(c.ancestral_back, vec![(2, 1)]);
    }

    #[test]
    fn increasing_dag_has_no_back_edges() {
        let edges: Vec<_> = (1..=6).flat_map(|i| (i + 1..=6).map(move |j| (i, j))).collect();
        let g = dg(6, &edges);
        let ex = forward_dfs(&g);
        assert_eq!(ex.order(), &[1, 2, 3, 4, 5, 6]);
        assert!(classify_edges(&g, &ex).unwrap().back.is_empty());
    }

    #[test]
    fn star_permitted_pairs() {
        let g = dg(4, &[(1, 2), (1, 3), (1, 4)]);
        assert_eq!(forward_dfs(&g).permitted_pairs(), vec![(2, 3), (2, 4), (3, 4)]);
    }

    #[test]
    fn undirected_uses_both_orientations() {
        let g = UndirectedGraph::from_edges(3, [(2, 1), (3, 2)]).unwrap();
        let ex = forward_dfs(&g);
        assert_eq!(ex.order(), &[1, 2, 3]);
        assert_eq!(ex.tree_count(), 1);
    }

    #[test]
    fn mismatched_exploration_is_rejected() {
        let ex = forward_dfs(&dg(3, &[(1, 2)]));
        assert!(classify_edges(&dg(4, &[]), &ex).is_err());
        assert!(classify_edges(&dg(3, &[(2, 3)]), &ex).is_err());
    }

    #[test]
    fn coupled_sample_extremes() {
        assert_eq!(coupled_sample(6, 0.0, Seed(1)).unwrap().edge_count(), 0);
        assert_eq!(coupled_sample(6, 1.0, Seed(1)).unwrap().edge_count(), 30);
    }
}
