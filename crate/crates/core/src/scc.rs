//! Strongly connected components: Tarjan's algorithm, the back-edge marking
//! procedure on plane trees, and conversion of components into MDMs.

use serde::Serialize;

use crate::error::{invalid_input, Result};
use crate::exploration::Exploration;
use crate::graph::DirectedGraph;
use crate::mdm::{Mdm, MdmEdge};

/// Component id of every vertex of the multigraph with successor lists
/// `succ` (vertices `0..succ.len()`), and the number of components.
/// Iterative, so deep graphs do not overflow the call stack.
pub(crate) fn tarjan(succ: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut count = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut child)) = calls.last_mut() {
            if let Some(&w) = succ[v].get(*child) {
                *child += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("v is still on the stack");
                    on_stack[w] = false;
                    comp[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count)
}

/// Partition of `1..=n` into strongly connected blocks. Blocks are sorted
/// internally and listed by smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccPartition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl SccPartition {
    fn from_labels(n: usize, comp: &[usize], count: usize) -> Self {
        let mut blocks = vec![Vec::new(); count];
        for v in 1..=n {
            blocks[comp[v]].push(v);
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = vec![usize::MAX; n + 1];
        for (i, b) in blocks.iter().enumerate() {
            for &v in b {
                block_of[v] = i;
            }
        }
        SccPartition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    /// Blocks with at least two vertices.
    pub fn nontrivial_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.len() >= 2).count()
    }

    /// Blocks ordered by size descending, ties by smallest label.
    pub fn ranked(&self) -> Vec<&[usize]> {
        let mut r: Vec<&[usize]> = self.blocks.iter().map(Vec::as_slice).collect();
        r.sort_by_key(|b| (std::cmp::Reverse(b.len()), b[0]));
        r
    }
}

pub fn tarjan_scc(g: &DirectedGraph) -> SccPartition {
    let succ: Vec<Vec<usize>> = (0..=g.n())
        .map(|v| if v == 0 { Vec::new() } else { g.out_neighbours(v).to_vec() })
        .collect();
    let (comp, count) = tarjan(&succ);
    SccPartition::from_labels(g.n(), &comp, count)
}

/// A rooted plane forest on labels `1..=n`: parent links plus a planar order
/// in which every parent precedes its children.
#[derive(Debug, Clone)]
pub struct PlaneTree {
    n: usize,
    parent: Vec<Option<usize>>,
    order: Vec<usize>,
    position: Vec<usize>,
    // Euler-tour interval [enter, exit) for ancestor queries.
    enter: Vec<usize>,
    exit: Vec<usize>,
}

impl PlaneTree {
    /// `parent[v]` for `v` in `1..=n` (index 0 ignored); `order` lists every
    /// vertex once with parents first.
    pub fn new(parent: Vec<Option<usize>>, order: Vec<usize>) -> Result<Self> {
        let n = parent.len().saturating_sub(1);
        if order.len() != n {
            return Err(invalid_input("planar order must list every vertex once"));
        }
        let mut position = vec![usize::MAX; n + 1];
        for (i, &v) in order.iter().enumerate() {
            if v == 0 || v > n || position[v] != usize::MAX {
                return Err(invalid_input("planar order must list every vertex once"));
            }
            position[v] = i;
        }
        let mut children = vec![Vec::new(); n + 1];
        for &v in &order {
            if let Some(p) = parent[v] {
                if p == 0 || p > n || position[p] >= position[v] {
                    return Err(invalid_input(format!("edge ({p},{v}) is not increasing")));
                }
                children[p].push(v);
            }
        }
        let mut enter = vec![0; n + 1];
        let mut exit = vec![0; n + 1];
        let mut clock = 0;
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for &r in order.iter().filter(|&&v| parent[v].is_none()) {
            stack.push((r, 0));
            enter[r] = clock;
            clock += 1;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if let Some(&c) = children[v].get(*i) {
                    *i += 1;
                    enter[c] = clock;
                    clock += 1;
                    stack.push((c, 0));
                } else {
                    exit[v] = clock;
                    stack.pop();
                }
            }
        }
        if clock != n {
            return Err(invalid_input("parent links contain a cycle"));
        }
        Ok(PlaneTree { n, parent, order, position, enter, exit })
    }

    /// The exploration forest with the exploration order.
    pub fn from_exploration(ex: &Exploration) -> Self {
        PlaneTree::new(ex.parents().to_vec(), ex.order().to_vec())
            .expect("exploration forests are planar")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `a` is on the path from the root to `b` (inclusive).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.enter[a] <= self.enter[b] && self.enter[b] < self.exit[a]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).filter_map(move |v| self.parent[v].map(|p| (p, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkedBackEdges {
    pub marked: Vec<(usize, usize)>,
}

impl MarkedBackEdges {
    pub fn count(&self) -> usize {
        self.marked.len()
    }
}

/// Marks back edges inductively: at each round, the lexicographically
/// smallest unmarked `(x, y)` (planar positions) whose head lies on the union
/// of root paths of the already marked tails, or on the root path of `x`.
pub fn mark_back_edges(tree: &PlaneTree, back: &[(usize, usize)]) -> Result<MarkedBackEdges> {
    for &(x, y) in back {
        if x == 0 || y == 0 || x > tree.n || y > tree.n {
            return Err(invalid_input(format!("back edge ({x},{y}) outside the tree")));
        }
        if tree.position[x] <= tree.position[y] {
            return Err(invalid_input(format!("edge ({x},{y}) is not decreasing")));
        }
    }
    let mut pending: Vec<(usize, usize)> = back.to_vec();
    pending.sort_unstable_by_key(|&(x, y)| (tree.position[x], tree.position[y]));
    pending.dedup();
    let mut on_marked_paths = vec![false; tree.n + 1];
    let mut marked = Vec::new();
    loop {
        let pick = pending
            .iter()
            .position(|&(x, y)| on_marked_paths[y] || tree.is_ancestor(y, x));
        let Some(i) = pick else { break };
        let (x, y) = pending.remove(i);
        let mut v = Some(x);
        while let Some(u) = v {
            if on_marked_paths[u] {
                break;
            }
            on_marked_paths[u] = true;
            v = tree.parent[u];
        }
        marked.push((x, y));
    }
    Ok(MarkedBackEdges { marked })
}

/// Tree edges plus only the marked back edges.
pub fn star_reduction(tree: &PlaneTree, back: &[(usize, usize)]) -> Result<DirectedGraph> {
    let marks = mark_back_edges(tree, back)?;
    DirectedGraph::from_edges(tree.n, tree.edges().chain(marks.marked.iter().copied()))
}

/// Tree edges plus all of `back`.
pub fn tree_with_back_edges(tree: &PlaneTree, back: &[(usize, usize)]) -> Result<DirectedGraph> {
    let mut all: Vec<(usize, usize)> = tree.edges().chain(back.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    DirectedGraph::from_edges(tree.n, all)
}

/// The block as an MDM: induced edges with unit length, then smoothed. A
/// singleton block is the zero-length loop.
pub fn component_to_mdm(g: &DirectedGraph, block: &[usize]) -> Result<Mdm> {
    let mut verts: Vec<usize> = block.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if verts.is_empty() || verts.iter().any(|&v| v == 0 || v > g.n()) {
        return Err(invalid_input("block must be a nonempty set of vertices"));
    }
    if verts.len() == 1 {
        return Ok(Mdm::loop_at(verts[0], 0.0));
    }
    let local = |v: usize| verts.binary_search(&v).ok();
    let mut edges = Vec::new();
    let mut succ = vec![Vec::new(); verts.len()];
    for (i, &u) in verts.iter().enumerate() {
        for &w in g.out_neighbours(u) {
            if let Some(j) = local(w) {
                edges.push(MdmEdge { tail: i, head: j, length: 1.0 });
                succ[i].push(j);
            }
        }
    }
    let (_, count) = tarjan(&succ);
    if count != 1 {
        return Err(invalid_input("block is not strongly connected"));
    }
    Ok(Mdm::new(verts, edges)?.smoothed())
}

/// The first `k` components ranked by vertex count (ties: smallest label),
/// as MDMs, padded with zero-length loops.
pub fn ranked_scc_sequence(g: &DirectedGraph, k: usize) -> Vec<Mdm> {
    let part = tarjan_scc(g);
    let mut out: Vec<Mdm> = part
        .ranked()
        .into_iter()
        .take(k)
        .map(|b| component_to_mdm(g, b).expect("blocks of the partition are strongly connected"))
        .collect();
    out.resize_with(k, Mdm::degenerate_loop);
    out
}

/// Strongly connected parts of a multigraph on `0..n` with lengths: every
/// component carrying at least one edge, restricted to its internal edges
/// and listed by smallest vertex. Not smoothed, and lengths are not checked.
pub(crate) fn multigraph_components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<(Vec<usize>, Mdm)> {
    let mut succ = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        succ[u].push(v);
    }
    let (comp, count) = tarjan(&succ);
    let mut members = vec![Vec::new(); count];
    for v in 0..n {
        members[comp[v]].push(v);
    }
    let mut inner: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); count];
    for &(u, v, l) in edges {
        if comp[u] == comp[v] {
            inner[comp[u]].push((u, v, l));
        }
    }
    let mut out = Vec::new();
    for c in 0..count {
        if inner[c].is_empty() {
            continue;
        }
        let verts = &members[c];
        let idx = |v: usize| verts.binary_search(&v).unwrap();
        let mdm_edges =
            inner[c].iter().map(|&(u, v, length)| MdmEdge { tail: idx(u), head: idx(v), length }).collect();
        out.push((verts.clone(), Mdm::from_parts(verts.clone(), mdm_edges)));
    }
    out.sort_by_key(|(v, _)| v[0]);
    out
}

/// `(blocks with >= 2 vertices, surplus + ancestral back edges)`; the first
/// never exceeds the second.
pub fn count_bound(g: &DirectedGraph) -> (usize, usize) {
    let ex = crate::exploration::forward_dfs(g);
    let c = crate::exploration::classify_edges(g, &ex).expect("exploration of g itself");
    (tarjan_scc(g).nontrivial_count(), c.surplus.len() + c.ancestral_back.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dg(n: usize, e: &[(usize, usize)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn tarjan_small_cases() {
        let cyc = tarjan_scc(&dg(3, &[(1, 2), (2, 3), (3, 1)]));
        assert_eq!(cyc.blocks(), &[vec![1, 2, 3]]);
        let dag = tarjan_scc(&dg(3, &[(1, 2), (2, 3)]));
        assert_eq!(dag.blocks(), &[vec![1], vec![2], vec![3]]);
    }

    fn path3() -> PlaneTree {
        PlaneTree::new(vec![None, None, Some(1), Some(2)], vec![1, 2, 3]).unwrap()
    }

    #[test]
    fn marking_on_a_path() {
        let m = mark_back_edges(&path3(), &[(3, 2), (3, 1)]).unwrap();
        assert_eq!(m.marked, vec![(3, 1), (3, 2)]);
        let x = star_reduction(&path3(), &[(3, 1), (3, 2)]).unwrap();
        assert_eq!(x.edge_count(), 4);
        assert_eq!(mark_back_edges(&path3(), &[]).unwrap().count(), 0);
    }

    #[test]
    fn non_ancestral_edge_alone_is_not_marked() {
        // root 1, subtree 2 -> 3, leaf 4
        let t = PlaneTree::new(vec![None, None, Some(1), Some(2), Some(1)], vec![1, 2, 3, 4]).unwrap();
        assert_eq!(mark_back_edges(&t, &[(4, 3)]).unwrap().count(), 0);

        // root 1, children 2 and 4 (labels kept, 3 is a child of 1 too)
        let reduced = star_reduction(&t, &[(4, 2)]).unwrap();
        assert_eq!(reduced.edge_count(), 3);
        assert_eq!(tarjan_scc(&reduced).nontrivial_count(), 0);
        let full = tree_with_back_edges(&t, &[(4, 2)]).unwrap();
        assert_eq!(tarjan_scc(&full), tarjan_scc(&reduced));
    }

    #[test]
    fn marking_rejects_increasing_edges() {
        assert!(mark_back_edges(&path3(), &[(1, 3)]).is_err());
    }

    #[test]
    fn plane_tree_validation() {
        assert!(PlaneTree::new(vec![None, Some(2), None], vec![1, 2]).is_err());
        assert!(PlaneTree::new(vec![None, None, Some(1)], vec![1]).is_err());
    }

    #[test]
    fn components_as_mdms() {
        let g = dg(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]);
        let part = tarjan_scc(&g);
        let m = component_to_mdm(&g, &part.blocks()[0]).unwrap();
        assert!(m.is_loop());
        assert_eq!(m.total_length(), 5.0);

        let single = component_to_mdm(&g, &[3]).unwrap();
        assert!(single.is_degenerate_loop());

        let g = dg(4, &[(1, 2), (2, 3), (3, 1), (2, 4), (4, 1)]);
        let m = component_to_mdm(&g, &[1, 2, 3, 4]).unwrap();
        assert_eq!(m.vertex_count(), 2);
        assert_eq!(m.labels(), &[1, 2]);
        let mut lens: Vec<f64> = m.edges().iter().map(|e| e.length).collect();
        lens.sort_by(f64::total_cmp);
        assert_eq!(lens, vec![1.0, 2.0, 2.0]);
        let s = m.stats();
        assert!(s.is_three_regular);
        assert_eq!(s.total_length, 5.0);

        assert!(component_to_mdm(&dg(3, &[(1, 2)]), &[1, 2]).is_err());
    }

    #[test]
    fn ranking() {
        let empty = ranked_scc_sequence(&DirectedGraph::empty(4), 3);
        assert!(empty.iter().all(Mdm::is_degenerate_loop));
        assert_eq!(empty.len(), 3);

        let g = dg(5, &[(2, 4), (4, 5), (5, 2)]);
        let r = ranked_scc_sequence(&g, 2);
        assert_eq!(r[0].total_length(), 3.0);
        assert!(r[1].is_degenerate_loop());

        // two 4-cycles; the one through vertex 1 comes first
        let g = dg(8, &[(5, 6), (6, 7), (7, 8), (8, 5), (1, 2), (2, 3), (3, 4), (4, 1)]);
        let part = tarjan_scc(&g);
        assert_eq!(part.ranked()[0], &[1, 2, 3, 4]);
        assert_eq!(ranked_scc_sequence(&g, 1)[0].labels(), &[1]);
    }

    #[test]
    fn multigraph_components_keep_internal_edges() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3
        let parts = multigraph_components(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 1, 0.25), (2, 3, 2.0)]);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, vec![1, 2]);
        assert_eq!(parts[0].1.total_length(), 0.75);
    }
}
