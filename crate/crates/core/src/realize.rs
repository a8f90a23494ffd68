//! Realizing 3-regular strongly connected directed multigraphs as a plane
//! tree plus backward identifications of leaves with internal vertices.

use serde::Serialize;

use crate::error::{invalid_input, Result};
use crate::mdm::{canonical_code, Mdm, MdmEdge};
use crate::scc::{multigraph_components, tarjan};

/// A rooted plane tree on nodes `0..len` (root 0) with out-degrees at most
/// 2, and pairs `(x, y)` gluing leaf `x` to an internal vertex `y` of
/// out-degree one that precedes it in depth-first order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneTreeWithPairs {
    children: Vec<Vec<usize>>,
    pairs: Vec<(usize, usize)>,
}

impl PlaneTreeWithPairs {
    pub fn new(children: Vec<Vec<usize>>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let t = PlaneTreeWithPairs { children, pairs };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Depth-first (planar) order from the root.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(invalid_input("a tree has at least a root"));
        }
        let order = self.preorder();
        if order.len() != n {
            return Err(invalid_input("children lists do not form a tree rooted at 0"));
        }
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if pos[v] != usize::MAX {
                return Err(invalid_input("children lists do not form a tree rooted at 0"));
            }
            pos[v] = i;
        }
        if self.children.iter().any(|c| c.len() > 2) {
            return Err(invalid_input("out-degrees must be at most 2"));
        }
        let mut used_x = vec![false; n];
        let mut used_y = vec![false; n];
        for &(x, y) in &self.pairs {
            if x >= n || y >= n {
                return Err(invalid_input(format!("pair ({x},{y}) outside the tree")));
            }
            if !self.children[x].is_empty() || self.children[y].len() != 1 || y == 0 {
                return Err(invalid_input(format!("pair ({x},{y}) must join a leaf to a non-root unary vertex")));
            }
            if pos[y] >= pos[x] {
                return Err(invalid_input(format!("pair ({x},{y}) does not go backwards")));
            }
            if std::mem::replace(&mut used_x[x], true) || std::mem::replace(&mut used_y[y], true) {
                return Err(invalid_input("a vertex appears in two pairs"));
            }
        }
        Ok(())
    }
}

/// In- and out-degrees of a multigraph, by vertex index.
fn degrees(g: &Mdm) -> (Vec<usize>, Vec<usize>) {
    let mut indeg = vec![0; g.vertex_count()];
    let mut outdeg = vec![0; g.vertex_count()];
    for e in g.edges() {
        outdeg[e.tail] += 1;
        indeg[e.head] += 1;
    }
    (indeg, outdeg)
}

fn check_realizable(g: &Mdm) -> Result<()> {
    let (indeg, outdeg) = degrees(g);
    if g.vertex_count() < 2 || indeg.iter().zip(&outdeg).any(|p| !matches!(p, (1, 2) | (2, 1))) {
        return Err(invalid_input("every vertex needs (in, out) degree (1, 2) or (2, 1)"));
    }
    let mut succ = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        succ[e.tail].push(e.head);
    }
    if tarjan(&succ).1 != 1 {
        return Err(invalid_input("multigraph is not strongly connected"));
    }
    Ok(())
}

struct Builder {
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl Builder {
    fn add(&mut self, parent: Option<usize>) -> usize {
        let v = self.children.len();
        self.children.push(Vec::new());
        self.depth.push(parent.map_or(0, |p| self.depth[p] + 1));
        if let Some(p) = parent {
            self.children[p].push(v);
        }
        v
    }

    /// Grows the subtree for `g` below `anchor`: `anchor -> rho0 -> a1`.
    fn grow(&mut self, anchor: usize, g: &Mdm) {
        let (indeg, _) = degrees(g);
        let a1 = (0..g.vertex_count())
            .filter(|&a| indeg[a] == 1)
            .find(|&a| g.edges().iter().any(|e| e.head == a && indeg[e.tail] == 2))
            .expect("a strongly connected graph has an edge into some in-degree-one vertex");
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
        for (i, e) in g.edges().iter().enumerate() {
            out_edges[e.tail].push(i);
        }
        let rho0 = self.add(Some(anchor));
        let mut node_of = vec![usize::MAX; g.vertex_count()];
        let mut vertex_at: Vec<Option<usize>> = vec![None; self.children.len()];
        let first = self.add(Some(rho0));
        node_of[a1] = first;
        vertex_at.resize(self.children.len(), None);
        vertex_at[first] = Some(a1);
        // unfeatured out-edges per tree node, lowest index first
        let mut open: Vec<Vec<usize>> = vec![Vec::new(); self.children.len()];
        open[first] = out_edges[a1].clone();

        loop {
            let order = self.preorder_from(rho0);
            let Some(z) = order
                .iter()
                .copied()
                .filter(|&v| open.get(v).is_some_and(|o| !o.is_empty()))
                .max_by_key(|&v| (self.depth[v], std::cmp::Reverse(order.iter().position(|&w| w == v))))
            else {
                break;
            };
            let e = open[z].remove(0);
            let u = g.edges()[e].head;
            let child = self.add(Some(z));
            open.resize(self.children.len(), Vec::new());
            if node_of[u] == usize::MAX {
                node_of[u] = child;
                open[child] = out_edges[u].clone();
            } else if u == a1 {
                self.pairs.push((child, rho0));
            } else {
                self.pairs.push((child, node_of[u]));
            }
        }
    }

    fn preorder_from(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }
}

/// A plane tree with pairs whose identification gives back `gs`, in order.
/// For several graphs the subtrees hang off a comb below the root.
pub fn realize_sequence(gs: &[Mdm]) -> Result<PlaneTreeWithPairs> {
    for g in gs {
        check_realizable(g)?;
    }
    let mut b = Builder { children: Vec::new(), depth: Vec::new(), pairs: Vec::new() };
    let root = b.add(None);
    let mut anchors = vec![root];
    for _ in 1..gs.len() {
        let prev = *anchors.last().unwrap();
        anchors.push(b.add(Some(prev)));
    }
    // the comb spine is laid first; each subtree goes before the next tooth
    for (g, &anchor) in gs.iter().zip(&anchors) {
        b.grow(anchor, g);
        let kids = &mut b.children[anchor];
        if kids.len() == 2 {
            kids.swap(0, 1);
        }
    }
    let t = PlaneTreeWithPairs { children: b.children, pairs: b.pairs };
    debug_assert!(t.validate().is_ok(), "{t:?}");
    Ok(t)
}

/// Glues every leaf to its partner, keeps the strongly connected components
/// (edges of unit length, directed away from the root) and smooths each
/// one's vertex of degree 2. Components come out in depth-first order of
/// their first vertex.
pub fn apply_identifications(tp: &PlaneTreeWithPairs) -> Vec<Mdm> {
    identified_components(tp).into_iter().map(|(m, _)| m.smoothed()).collect()
}

/// Components before smoothing, with the number of their vertices of total
/// degree 2.
pub fn identified_components(tp: &PlaneTreeWithPairs) -> Vec<(Mdm, usize)> {
    let n = tp.len();
    let mut rep: Vec<usize> = (0..n).collect();
    for &(x, y) in &tp.pairs {
        rep[x] = y;
    }
    let order = tp.preorder();
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut edges = Vec::new();
    for (p, kids) in tp.children.iter().enumerate() {
        for &c in kids {
            edges.push((rank[rep[p]], rank[rep[c]], 1.0));
        }
    }
    multigraph_components(n, &edges)
        .into_iter()
        .map(|(_, m)| {
            let (indeg, outdeg) = degrees(&m);
            let two = indeg.iter().zip(&outdeg).filter(|(i, o)| *i + *o == 2).count();
            (m, two)
        })
        .collect()
}

/// Every 3-regular strongly connected directed multigraph with at most
/// `max_vertices` vertices, one per isomorphism class, by exhaustive search.
pub fn catalog(max_vertices: usize) -> Vec<Mdm> {
    let mut out: Vec<Mdm> = Vec::new();
    let mut codes = Vec::new();
    for half in 1..=max_vertices / 2 {
        let v = 2 * half;
        // vertices 0..half have (in, out) = (1, 2), the rest (2, 1)
        let outdeg: Vec<usize> = (0..v).map(|i| if i < half { 2 } else { 1 }).collect();
        let indeg: Vec<usize> = (0..v).map(|i| if i < half { 1 } else { 2 }).collect();
        let mut matrix = vec![0usize; v * v];
        let mut col = vec![0usize; v];
        fill_rows(0, 0, v, &outdeg, &indeg, &mut matrix, &mut col, &mut |m| {
            let mut edges = Vec::new();
            for t in 0..v {
                for h in 0..v {
                    for _ in 0..m[t * v + h] {
                        edges.push(MdmEdge { tail: t, head: h, length: 1.0 });
                    }
                }
            }
            let g = Mdm::new((0..v).collect(), edges).expect("unit lengths");
            if check_realizable(&g).is_ok() {
                let code = canonical_code(&g);
                if !codes.contains(&code) {
                    codes.push(code);
                    out.push(g);
                }
            }
        });
    }
    out
}

/// Enumerates multiplicity matrices with the given row and column sums and
/// no diagonal, row by row.
#[allow(clippy::too_many_arguments)]
fn fill_rows(
    row: usize,
    colstart: usize,
    v: usize,
    outdeg: &[usize],
    indeg: &[usize],
    m: &mut [usize],
    col: &mut [usize],
    emit: &mut impl FnMut(&[usize]),
) {
    if row == v {
        if col.iter().zip(indeg).all(|(c, d)| c == d) {
            emit(m);
        }
        return;
    }
    let placed: usize = (0..v).map(|h| m[row * v + h]).sum();
    if placed == outdeg[row] {
        fill_rows(row + 1, 0, v, outdeg, indeg, m, col, emit);
        return;
    }
    for h in colstart..v {
        if h == row || col[h] == indeg[h] {
            continue;
        }
        m[row * v + h] += 1;
        col[h] += 1;
        fill_rows(row, h, v, outdeg, indeg, m, col, emit);
        m[row * v + h] -= 1;
        col[h] -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> Mdm {
        Mdm::from_triples(2, &[(0, 1, 1.0), (0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    #[test]
    fn two_vertex_round_trip() {
        let t = realize_sequence(&[c2()]).unwrap();
        assert_eq!(t.pairs().len(), 2);
        let back = apply_identifications(&t);
        assert_eq!(back.len(), 1);
        assert_eq!(canonical_code(&back[0]), canonical_code(&c2()));
    }

    #[test]
    fn empty_sequence() {
        let t = realize_sequence(&[]).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.pairs().is_empty());
        assert!(apply_identifications(&t).is_empty());
    }

    #[test]
    fn path_with_one_pair_is_a_loop() {
        // 0 -> 1 -> 2 -> 3, leaf 3 glued to 1
        let t = PlaneTreeWithPairs::new(vec![vec![1], vec![2], vec![3], vec![]], vec![(3, 1)]).unwrap();
        let comps = apply_identifications(&t);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].is_loop());
        assert_eq!(comps[0].total_length(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(realize_sequence(&[Mdm::loop_of(1.0)]).is_err());
        let not_strong = Mdm::from_triples(2, &[(0, 1, 1.0), (0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(realize_sequence(&[not_strong]).is_err());
        assert!(PlaneTreeWithPairs::new(vec![vec![1], vec![2], vec![]], vec![(1, 2)]).is_err());
        assert!(PlaneTreeWithPairs::new(vec![vec![1, 2, 3], vec![], vec![], vec![]], vec![]).is_err());
    }

    #[test]
    fn catalog_sizes() {
        let cat = catalog(4);
        assert_eq!(cat.len(), 5);
        assert_eq!(cat.iter().filter(|g| g.vertex_count() == 2).count(), 1);
        assert!(cat.iter().all(|g| g.stats().is_three_regular && g.stats().excess == g.vertex_count() as i64 / 2));
    }
}
