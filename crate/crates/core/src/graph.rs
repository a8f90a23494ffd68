//! Simple labelled graphs on `1..=n` and their G(n,p) samplers.
//!
//! Adjacency lists are kept sorted ascending, which is the order the
//! depth-first exploration consumes neighbours in.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{invalid_param, Error, Result};
use crate::rng::{Rng, Seed};

/// Anything the exploration can walk: vertices `1..=n`, sorted neighbour lists.
pub trait Neighbours {
    fn vertex_count(&self) -> usize;
    fn neighbours(&self, v: usize) -> &[usize];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    // out[0] is unused so that vertex labels index directly.
    out: Vec<Vec<usize>>,
    m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    m: usize,
}

fn check_endpoint(n: usize, v: usize) -> Result<()> {
    if v == 0 || v > n {
        return Err(Error::InvalidInput(format!("vertex {v} outside 1..={n}")));
    }
    Ok(())
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        DirectedGraph { n, out: vec![Vec::new(); n + 1], m: 0 }
    }

    /// Builds a graph from ordered pairs. Self-loops, duplicates and labels
    /// outside `1..=n` are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = vec![Vec::new(); n + 1];
        for (u, v) in edges {
            check_endpoint(n, u)?;
            check_endpoint(n, v)?;
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            out[u].push(v);
        }
        let mut m = 0;
        for list in out.iter_mut() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidInput("duplicate edge".into()));
            }
            m += list.len();
        }
        Ok(DirectedGraph { n, out, m })
    }

    pub(crate) fn from_sorted_rows(n: usize, out: Vec<Vec<usize>>) -> Self {
        debug_assert_eq!(out.len(), n + 1);
        let m = out.iter().map(Vec::len).sum();
        DirectedGraph { n, out, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn out_neighbours(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u >= 1 && u <= self.n && self.out[u].binary_search(&v).is_ok()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).flat_map(move |u| self.out[u].iter().map(move |&v| (u, v)))
    }

    pub fn reversed(&self) -> DirectedGraph {
        let mut rows = vec![Vec::new(); self.n + 1];
        for (u, v) in self.edges() {
            rows[v].push(u);
        }
        DirectedGraph::from_sorted_rows(self.n, rows)
    }
}

impl Neighbours for DirectedGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn neighbours(&self, v: usize) -> &[usize] {
        &self.out[v]
    }
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        UndirectedGraph { n, adj: vec![Vec::new(); n + 1], m: 0 }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n + 1];
        for (u, v) in edges {
            check_endpoint(n, u)?;
            check_endpoint(n, v)?;
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidInput("duplicate edge".into()));
            }
            twice += list.len();
        }
        Ok(UndirectedGraph { n, adj, m: twice / 2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u >= 1 && u <= self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).flat_map(move |u| {
            self.adj[u].iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }
}

impl Neighbours for UndirectedGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
}

/// `clamp(1/n + lambda * n^(-4/3), 0, 1)`.
pub fn critical_probability(n: usize, lambda: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid_param(format!("critical_probability needs n >= 2, got {n}")));
    }
    if !lambda.is_finite() {
        return Err(invalid_param("lambda must be finite"));
    }
    let nf = n as f64;
    Ok((1.0 / nf + lambda * nf.powf(-4.0 / 3.0)).clamp(0.0, 1.0))
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid_param(format!("probability {p} outside [0,1]")));
    }
    Ok(())
}

/// Calls `hit(k)` for each `k < count` selected independently with
/// probability `p`, in increasing order, using geometric gaps.
pub(crate) fn bernoulli_indices(count: usize, p: f64, rng: &mut Rng, mut hit: impl FnMut(usize)) {
    if count == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k: usize = 0;
    loop {
        // 1 - U lies in (0, 1], so the logarithm is finite.
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if gap >= (count - k) as f64 {
            return;
        }
        k += gap as usize;
        hit(k);
        k += 1;
        if k >= count {
            return;
        }
    }
}

/// Directed G(n,p): every ordered pair `(i, j)`, `i != j`, independently with
/// probability `p`. Row `i` is drawn from ChaCha stream `i` of `seed`.
pub fn sample_directed_gnp(n: usize, p: f64, seed: Seed) -> Result<DirectedGraph> {
    if n == 0 {
        return Err(invalid_param("n must be >= 1"));
    }
    check_p(p)?;
    let rows: Vec<Vec<usize>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            if i == 0 {
                return row;
            }
            let mut rng = seed.stream(i as u64);
            bernoulli_indices(n - 1, p, &mut rng, |c| {
                let j = c + 1;
                row.push(if j < i { j } else { j + 1 });
            });
            row
        })
        .collect();
    Ok(DirectedGraph::from_sorted_rows(n, rows))
}

/// Undirected G(n,p): row `i` decides the pairs `{i, j}` with `j > i`.
pub fn sample_undirected_gnp(n: usize, p: f64, seed: Seed) -> Result<UndirectedGraph> {
    if n == 0 {
        return Err(invalid_param("n must be >= 1"));
    }
    check_p(p)?;
    let upper: Vec<Vec<usize>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            if i == 0 {
                return row;
            }
            let mut rng = seed.stream(i as u64);
            bernoulli_indices(n - i, p, &mut rng, |c| row.push(i + 1 + c));
            row
        })
        .collect();
    let mut adj = vec![Vec::new(); n + 1];
    let mut m = 0;
    for (i, row) in upper.iter().enumerate() {
        for &j in row {
            adj[i].push(j);
            adj[j].push(i);
            m += 1;
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    Ok(UndirectedGraph { n, adj, m })
}

/// Either flavour, as read back from a graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyGraph {
    Directed(DirectedGraph),
    Undirected(UndirectedGraph),
}

impl AnyGraph {
    pub fn n(&self) -> usize {
        match self {
            AnyGraph::Directed(g) => g.n(),
            AnyGraph::Undirected(g) => g.n(),
        }
    }
}

pub fn write_directed<W: Write>(g: &DirectedGraph, mut w: W) -> Result<()> {
    writeln!(w, "n={} directed=1", g.n())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_undirected<W: Write>(g: &UndirectedGraph, mut w: W) -> Result<()> {
    writeln!(w, "n={} directed=0", g.n())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_graph<W: Write>(g: &AnyGraph, w: W) -> Result<()> {
    match g {
        AnyGraph::Directed(g) => write_directed(g, w),
        AnyGraph::Undirected(g) => write_undirected(g, w),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads the `n=<int> directed=<0|1>` format written by [`write_graph`].
pub fn read_graph<R: BufRead>(r: R) -> Result<AnyGraph> {
    let mut lines = r.lines().enumerate();
    let (n, directed) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(parse_err(1, "missing header"));
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut n = None;
        let mut directed = None;
        for tok in line.split_whitespace() {
            match tok.split_once('=') {
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("directed", "0")) => directed = Some(false),
                Some(("directed", "1")) => directed = Some(true),
                _ => return Err(parse_err(idx + 1, format!("bad header token `{tok}`"))),
            }
        }
        match (n, directed) {
            (Some(n), Some(d)) => break (n, d),
            _ => return Err(parse_err(idx + 1, "header must be `n=<int> directed=<0|1>`")),
        }
    };
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => return Err(parse_err(idx + 1, format!("expected `i j`, got `{line}`"))),
        }
    }
    Ok(if directed {
        AnyGraph::Directed(DirectedGraph::from_edges(n, edges)?)
    } else {
        AnyGraph::Undirected(UndirectedGraph::from_edges(n, edges)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_probability_examples() {
        assert_eq!(critical_probability(1000, 0.0).unwrap(), 0.001);
        // 1e-4 + 10000^(-4/3) = 1e-4 + 10^(-16/3)
        let want = 1e-4 + 10f64.powf(-16.0 / 3.0);
        let got = critical_probability(10_000, 1.0).unwrap();
        assert!((got - want).abs() < 1e-18);
        assert!((got - 1.046416e-4).abs() < 1e-9);
        assert_eq!(critical_probability(2, -10.0).unwrap(), 0.0);
        assert!(matches!(critical_probability(1, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn degenerate_probabilities() {
        assert_eq!(sample_directed_gnp(5, 0.0, Seed(1)).unwrap().edge_count(), 0);
        let full = sample_directed_gnp(3, 1.0, Seed(9)).unwrap();
        assert_eq!(
            full.edges().collect::<Vec<_>>(),
            vec![(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]
        );
        assert_eq!(sample_undirected_gnp(4, 1.0, Seed(3)).unwrap().edge_count(), 6);
        assert_eq!(sample_undirected_gnp(4, 0.0, Seed(3)).unwrap().edge_count(), 0);
        assert!(sample_directed_gnp(4, 1.5, Seed(0)).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_directed_gnp(200, 0.02, Seed(11)).unwrap();
        let b = sample_directed_gnp(200, 0.02, Seed(11)).unwrap();
        let c = sample_directed_gnp(200, 0.02, Seed(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (u, v) in a.edges() {
            assert_ne!(u, v);
        }
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(DirectedGraph::from_edges(3, [(1, 1)]).is_err());
        assert!(DirectedGraph::from_edges(3, [(1, 2), (1, 2)]).is_err());
        assert!(DirectedGraph::from_edges(3, [(0, 2)]).is_err());
        assert!(UndirectedGraph::from_edges(3, [(1, 2), (2, 1)]).is_err());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let g = AnyGraph::Directed(sample_directed_gnp(60, 0.05, Seed(5)).unwrap());
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let back = read_graph(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        let mut again = Vec::new();
        write_graph(&back, &mut again).unwrap();
        assert_eq!(buf, again);

        let u = AnyGraph::Undirected(sample_undirected_gnp(40, 0.1, Seed(5)).unwrap());
        let mut buf = Vec::new();
        write_graph(&u, &mut buf).unwrap();
        assert!(buf.starts_with(b"n=40 directed=0\n"));
        assert_eq!(read_graph(buf.as_slice()).unwrap(), u);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_graph("n=3 directed=1\n1 2\n2 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(read_graph("".as_bytes()).is_err());
    }
}
