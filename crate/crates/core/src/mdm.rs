//! Metric directed multigraphs (MDMs): finite directed multigraphs whose edges
//! carry lengths, compared through the isomorphism distance
//!
//! ```text
//! d(X, X') = min over isomorphisms (f, g) of max_e |len(e) - len'(g(e))|
//! ```
//!
//! which is `+inf` when the underlying multigraphs are not isomorphic.
//!
//! Once a vertex bijection is fixed, the parallel edges between each ordered
//! pair of vertices may still be permuted freely; the bottleneck-optimal way
//! to match two equal-size multisets of reals is to pair them in sorted
//! order, so only vertex bijections are searched.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdmEdge {
    /// Index into the vertex list.
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

/// A finite metric directed multigraph. Vertices are indexed `0..len`; each
/// carries an external label (graph vertex, tree node id, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Mdm {
    labels: Vec<usize>,
    edges: Vec<MdmEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdmStats {
    pub excess: i64,
    pub total_length: f64,
    pub is_loop: bool,
    pub is_three_regular: bool,
    pub is_complex: bool,
}

impl Mdm {
    /// Validates indices and lengths. Every length must be finite and
    /// positive, except for the single zero-length loop.
    pub fn new(labels: Vec<usize>, edges: Vec<MdmEdge>) -> Result<Self> {
        let n = labels.len();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(invalid_input("edge endpoint out of range"));
            }
            if !e.length.is_finite() || e.length < 0.0 {
                return Err(invalid_input(format!("bad edge length {}", e.length)));
            }
        }
        let degenerate = n == 1 && edges.len() == 1;
        if !degenerate && edges.iter().any(|e| e.length <= 0.0) {
            return Err(invalid_input("zero-length edge outside the degenerate loop"));
        }
        Ok(Mdm { labels, edges })
    }

    /// The loop of length 0.
    pub fn degenerate_loop() -> Self {
        Self::loop_at(0, 0.0)
    }

    pub fn loop_of(length: f64) -> Self {
        Self::loop_at(0, length)
    }

    pub(crate) fn loop_at(label: usize, length: f64) -> Self {
        Mdm { labels: vec![label], edges: vec![MdmEdge { tail: 0, head: 0, length }] }
    }

    /// Convenience constructor from `(tail, head, length)` triples over `0..n`.
    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Mdm::new(
            (0..n).collect(),
            triples.iter().map(|&(tail, head, length)| MdmEdge { tail, head, length }).collect(),
        )
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[MdmEdge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn is_loop(&self) -> bool {
        self.labels.len() == 1 && self.edges.len() == 1
    }

    pub fn is_degenerate_loop(&self) -> bool {
        self.is_loop() && self.edges[0].length == 0.0
    }

    pub(crate) fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.labels.len();
        let mut indeg = vec![0; n];
        let mut outdeg = vec![0; n];
        for e in &self.edges {
            outdeg[e.tail] += 1;
            indeg[e.head] += 1;
        }
        (indeg, outdeg)
    }

    pub fn stats(&self) -> MdmStats {
        let (indeg, outdeg) = self.degrees();
        let is_loop = self.is_loop();
        MdmStats {
            excess: self.edges.len() as i64 - self.labels.len() as i64,
            total_length: self.total_length(),
            is_loop,
            is_three_regular: !self.labels.is_empty()
                && indeg.iter().zip(&outdeg).all(|(i, o)| i + o == 3),
            is_complex: !is_loop,
        }
    }

    /// Applies a vertex permutation: old vertex `v` becomes `perm[v]`.
    /// Edge order is shuffled by `edge_perm` (old edge `e` goes to slot
    /// `edge_perm[e]`).
    pub fn relabelled(&self, perm: &[usize], edge_perm: &[usize]) -> Mdm {
        let n = self.labels.len();
        let mut labels = vec![0; n];
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[v];
        }
        let mut edges = vec![MdmEdge { tail: 0, head: 0, length: 0.0 }; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            edges[edge_perm[i]] = MdmEdge { tail: perm[e.tail], head: perm[e.head], length: e.length };
        }
        Mdm { labels, edges }
    }

    /// Repeatedly merges the two edges at every vertex of in- and out-degree
    /// one (unless they are the same self-loop), summing lengths. A component
    /// that is a bare directed cycle becomes a loop anchored at its smallest
    /// label.
    pub fn smoothed(&self) -> Mdm {
        let n = self.labels.len();
        let (indeg, outdeg) = self.degrees();
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out_edges[e.tail].push(i);
        }
        let removable: Vec<bool> = (0..n)
            .map(|v| {
                indeg[v] == 1 && outdeg[v] == 1 && {
                    let e = &self.edges[out_edges[v][0]];
                    e.head != v
                }
            })
            .collect();

        let mut new_index = vec![usize::MAX; n];
        let mut labels = Vec::new();
        for v in 0..n {
            if !removable[v] {
                new_index[v] = labels.len();
                labels.push(self.labels[v]);
            }
        }
        let mut visited = vec![false; n];
        let mut edges = Vec::new();
        for v in 0..n {
            if removable[v] {
                continue;
            }
            for &ei in &out_edges[v] {
                let mut length = self.edges[ei].length;
                let mut h = self.edges[ei].head;
                while removable[h] {
                    visited[h] = true;
                    let next = &self.edges[out_edges[h][0]];
                    length += next.length;
                    h = next.head;
                }
                edges.push(MdmEdge { tail: new_index[v], head: new_index[h], length });
            }
        }
        // Whatever removable vertex is left lies on a bare cycle.
        for start in 0..n {
            if !removable[start] || visited[start] {
                continue;
            }
            let mut length = 0.0;
            let mut anchor = start;
            let mut v = start;
            loop {
                visited[v] = true;
                if self.labels[v] < self.labels[anchor] {
                    anchor = v;
                }
                let e = &self.edges[out_edges[v][0]];
                length += e.length;
                v = e.head;
                if v == start {
                    break;
                }
            }
            let idx = labels.len();
            labels.push(self.labels[anchor]);
            edges.push(MdmEdge { tail: idx, head: idx, length });
        }
        Mdm { labels, edges }
    }

    /// Merges the endpoints of every zero-length edge that is not a loop and
    /// drops the edge. The merged vertex keeps the smallest label.
    pub(crate) fn contract_zero_edges(&self) -> Mdm {
        let n = self.labels.len();
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], mut x: usize) -> usize {
            while rep[x] != x {
                rep[x] = rep[rep[x]];
                x = rep[x];
            }
            x
        }
        let mut dropped = vec![false; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.length == 0.0 && e.tail != e.head {
                let (a, b) = (find(&mut rep, e.tail), find(&mut rep, e.head));
                dropped[i] = true;
                if a != b {
                    let (keep, gone) = if self.labels[a] <= self.labels[b] { (a, b) } else { (b, a) };
                    rep[gone] = keep;
                }
            }
        }
        if !dropped.contains(&true) {
            return self.clone();
        }
        let mut new_index = vec![usize::MAX; n];
        let mut labels = Vec::new();
        for v in 0..n {
            if find(&mut rep, v) == v {
                new_index[v] = labels.len();
                labels.push(self.labels[v]);
            }
        }
        let edges = self
            .edges
            .iter()
            .zip(&dropped)
            .filter(|(_, &d)| !d)
            .map(|(e, _)| MdmEdge {
                tail: new_index[find(&mut rep, e.tail)],
                head: new_index[find(&mut rep, e.head)],
                length: e.length,
            })
            .collect();
        Mdm { labels, edges }
    }

    /// Skips validation; for internal constructions whose zero-length edges
    /// are contracted afterwards.
    pub(crate) fn from_parts(labels: Vec<usize>, edges: Vec<MdmEdge>) -> Mdm {
        Mdm { labels, edges }
    }

    /// Dense multiplicity matrix, row-major, `m[u * n + v]`.
    fn multiplicities(&self) -> Vec<u32> {
        let n = self.labels.len();
        let mut m = vec![0u32; n * n];
        for e in &self.edges {
            m[e.tail * n + e.head] += 1;
        }
        m
    }
}

#[derive(Serialize, Deserialize)]
struct MdmWire {
    vertices: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl Serialize for Mdm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MdmWire {
            vertices: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (self.labels[e.tail], self.labels[e.head], e.length))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mdm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = MdmWire::deserialize(d)?;
        let index = |label: usize| {
            wire.vertices
                .iter()
                .position(|&l| l == label)
                .ok_or_else(|| D::Error::custom(format!("edge references unknown vertex {label}")))
        };
        let mut edges = Vec::with_capacity(wire.edges.len());
        for &(t, h, length) in &wire.edges {
            edges.push(MdmEdge { tail: index(t)?, head: index(h)?, length });
        }
        let mut sorted = wire.vertices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wire.vertices.len() {
            return Err(D::Error::custom("duplicate vertex label"));
        }
        Mdm::new(wire.vertices, edges).map_err(D::Error::custom)
    }
}

/// Per vertex `(in, out, self-loops)`.
fn signatures(x: &Mdm) -> Vec<(usize, usize, usize)> {
    let (indeg, outdeg) = x.degrees();
    let mut loops = vec![0; x.vertex_count()];
    for e in x.edges() {
        if e.tail == e.head {
            loops[e.tail] += 1;
        }
    }
    (0..x.vertex_count()).map(|v| (indeg[v], outdeg[v], loops[v])).collect()
}

/// Largest gap when two equal-size sorted lists are paired in order.
fn sorted_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct IsoSearch<'a> {
    n: usize,
    sig_a: Vec<(usize, usize, usize)>,
    sig_b: Vec<(usize, usize, usize)>,
    mult_a: Vec<u32>,
    mult_b: Vec<u32>,
    len_a: &'a [Vec<f64>],
    len_b: &'a [Vec<f64>],
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    best: f64,
}

impl IsoSearch<'_> {
    fn extend(&mut self, depth: usize, cost: f64) {
        if cost >= self.best {
            return;
        }
        if depth == self.n {
            self.best = cost;
            return;
        }
        let n = self.n;
        let v = self.order[depth];
        for c in 0..n {
            if self.used[c] || self.sig_a[v] != self.sig_b[c] {
                continue;
            }
            self.map[v] = c;
            let mut ok = true;
            let mut new_cost = cost;
            for &w in self.order[..=depth].iter() {
                let fw = self.map[w];
                for (x, y, fx, fy) in [(v, w, c, fw), (w, v, fw, c)] {
                    let (ia, ib) = (x * n + y, fx * n + fy);
                    if self.mult_a[ia] != self.mult_b[ib] {
                        ok = false;
                        break;
                    }
                    if self.mult_a[ia] > 0 {
                        new_cost = new_cost.max(sorted_gap(&self.len_a[ia], &self.len_b[ib]));
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.used[c] = true;
                self.extend(depth + 1, new_cost);
                self.used[c] = false;
            }
        }
    }
}

fn sorted_lengths(x: &Mdm) -> Vec<Vec<f64>> {
    let n = x.vertex_count();
    let mut lens = vec![Vec::new(); n * n];
    for e in x.edges() {
        lens[e.tail * n + e.head].push(e.length);
    }
    for l in lens.iter_mut() {
        l.sort_by(f64::total_cmp);
    }
    lens
}

/// Exact isomorphism distance; `f64::INFINITY` when no isomorphism exists.
pub fn mdm_distance(a: &Mdm, b: &Mdm) -> f64 {
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edge_count() != b.edge_count() {
        return f64::INFINITY;
    }
    let sig_a = signatures(a);
    let sig_b = signatures(b);
    let mut sa = sig_a.clone();
    let mut sb = sig_b.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return f64::INFINITY;
    }
    if n == 0 {
        return 0.0;
    }
    // Visit vertices so that each one is adjacent to an earlier one when
    // possible; consistency checks then prune early.
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut adjacency = vec![Vec::new(); n];
    for e in a.edges() {
        adjacency[e.tail].push(e.head);
        adjacency[e.head].push(e.tail);
    }
    for s in 0..n {
        if placed[s] {
            continue;
        }
        placed[s] = true;
        order.push(s);
        let mut i = order.len() - 1;
        while i < order.len() {
            let v = order[i];
            for &w in &adjacency[v] {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    let len_a = sorted_lengths(a);
    let len_b = sorted_lengths(b);
    let mut search = IsoSearch {
        n,
        sig_a,
        sig_b,
        mult_a: a.multiplicities(),
        mult_b: b.multiplicities(),
        len_a: &len_a,
        len_b: &len_b,
        order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        best: f64::INFINITY,
    };
    search.extend(0, 0.0);
    search.best
}

/// `sum_{i < k} d(A_i, B_i)`, reading missing entries as the zero-length loop.
pub fn sequence_distance(a: &[Mdm], b: &[Mdm], k: usize) -> f64 {
    let pad = Mdm::degenerate_loop();
    (0..k)
        .map(|i| mdm_distance(a.get(i).unwrap_or(&pad), b.get(i).unwrap_or(&pad)))
        .sum()
}

/// Isomorphism-invariant code of the underlying multigraph (lengths ignored).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u8>);

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Ranks `keys` densely: equal keys share a colour, colours follow key order.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

struct Canon<'a> {
    n: usize,
    mult: &'a [u32],
    best: Option<Vec<u8>>,
}

impl Canon<'_> {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let n = self.n;
        loop {
            let count = colors.iter().max().map_or(0, |&c| c + 1);
            let keys: Vec<(usize, Vec<(usize, u32)>, Vec<(usize, u32)>)> = (0..n)
                .map(|v| {
                    let mut outs: Vec<(usize, u32)> = (0..n)
                        .filter(|&w| self.mult[v * n + w] > 0)
                        .map(|w| (colors[w], self.mult[v * n + w]))
                        .collect();
                    let mut ins: Vec<(usize, u32)> = (0..n)
                        .filter(|&w| self.mult[w * n + v] > 0)
                        .map(|w| (colors[w], self.mult[w * n + v]))
                        .collect();
                    outs.sort_unstable();
                    ins.sort_unstable();
                    (colors[v], outs, ins)
                })
                .collect();
            let next = dense_ranks(&keys);
            let next_count = next.iter().max().map_or(0, |&c| c + 1);
            colors = next;
            if next_count == count {
                return colors;
            }
        }
    }

    fn encode(&self, colors: &[usize]) -> Vec<u8> {
        let n = self.n;
        let mut at = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            at[c] = v;
        }
        let mut code = Vec::with_capacity(8 + 2 * n * n);
        code.extend_from_slice(&(n as u32).to_be_bytes());
        let m: u32 = self.mult.iter().sum();
        code.extend_from_slice(&m.to_be_bytes());
        for &u in &at {
            for &v in &at {
                code.extend_from_slice(&(self.mult[u * n + v] as u16).to_be_bytes());
            }
        }
        code
    }

    fn search(&mut self, colors: Vec<usize>) {
        let colors = self.refine(colors);
        let n = self.n;
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        let Some(cell) = (0..n).find(|&c| counts[c] > 1) else {
            let code = self.encode(&colors);
            if self.best.as_ref().is_none_or(|b| code < *b) {
                self.best = Some(code);
            }
            return;
        };
        for v in (0..n).filter(|&v| colors[v] == cell) {
            let split: Vec<usize> = colors
                .iter()
                .enumerate()
                .map(|(u, &c)| 2 * c + usize::from(c == cell && u != v))
                .collect();
            self.search(dense_ranks(&split));
        }
    }
}

/// Minimal adjacency encoding over all canonical-refinement leaves. Two MDMs
/// get equal codes iff their underlying directed multigraphs are isomorphic.
pub fn canonical_code(x: &Mdm) -> CanonicalCode {
    let n = x.vertex_count();
    let mult = x.multiplicities();
    let sig = signatures(x);
    let mut canon = Canon { n, mult: &mult, best: None };
    if n == 0 {
        return CanonicalCode(canon.encode(&[]));
    }
    canon.search(dense_ranks(&sig));
    CanonicalCode(canon.best.expect("search reaches at least one leaf"))
}

/// Total order used to rank continuum components: longest first.
pub(crate) fn by_length_desc(a: &Mdm, b: &Mdm) -> Ordering {
    b.total_length().total_cmp(&a.total_length())
}
