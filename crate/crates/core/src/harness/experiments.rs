use rand::Rng as _;
use rayon::prelude::*;

use super::{ExperimentConfig, ResultRecord};
use crate::continuum::{
    mark_density as density_at, no_nonancestral_prob, run_identification, sample_tilted_excursion, unit_excursion,
    continuum_sccs, ExcursionPath,
};
use crate::error::Result;
use crate::exploration::{coupled_from_undirected, forward_dfs};
use crate::graph::{critical_probability, sample_directed_gnp, sample_undirected_gnp, DirectedGraph};
use crate::limit::{excursion_moment_sum, sample_drift_path, sample_limit};
use crate::mdm::{canonical_code, Mdm};
use crate::realize::{apply_identifications, catalog, realize_sequence};
use crate::rng::Seed;
use crate::scc::{component_to_mdm, count_bound, star_reduction, tarjan_scc, tree_with_back_edges, PlaneTree};
use crate::stats::{chi_square, chi_square_two_sample, count_histogram, mean_se, median, poisson_probs, ks_statistic};

fn replicate<T: Send>(replicas: usize, seed: Seed, f: impl Fn(Seed) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..replicas as u64).into_par_iter().map(|r| f(seed.derive(r))).collect()
}

fn b(x: bool) -> f64 {
    if x { 1.0 } else { 0.0 }
}

/// Strongly connected structure of a discrete graph.
struct DiscreteSccs {
    /// Edge counts of the blocks with at least two vertices, largest first.
    lengths: Vec<usize>,
    largest_vertices: usize,
    violations: usize,
}

fn discrete_sccs(g: &DirectedGraph) -> Result<DiscreteSccs> {
    let part = tarjan_scc(g);
    let mut lengths: Vec<usize> = Vec::new();
    let mut violations = 0;
    for block in part.blocks().iter().filter(|b| b.len() >= 2) {
        let id = part.block_of(block[0]);
        lengths.push(block.iter().map(|&v| g.out_neighbours(v).iter().filter(|&&w| part.block_of(w) == id).count()).sum());
        let s = component_to_mdm(g, block)?.stats();
        violations += usize::from(!(s.is_three_regular || s.is_loop));
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    let largest_vertices = part.blocks().iter().map(Vec::len).max().unwrap_or(0);
    Ok(DiscreteSccs { lengths, largest_vertices, violations })
}

/// Counts replicas whose SCC count exceeds the surplus plus ancestral back
/// edge count.
fn bound_violations(rows: &[Vec<f64>], lhs: usize, rhs: usize) -> f64 {
    rows.iter().filter(|r| r[lhs] > r[rhs]).count() as f64
}

pub(super) fn coupling_forest(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let n = cfg.count(cfg.n, 300, "n", 1)?;
    let lambda = cfg.finite(cfg.lambda, 0.0, "lambda")?;
    let replicas = cfg.replicas(2000)?;
    let p = critical_probability(n, lambda)?;
    let seed = Seed(cfg.seed);
    let mut rec = ResultRecord::new(
        cfg,
        &["arm", "tree_count", "first_tree_size", "forest_mismatch", "bound_lhs", "bound_rhs"],
    );
    let directed = replicate(replicas, seed.derive(0), |s| {
        let g = sample_directed_gnp(n, p, s)?;
        let ex = forward_dfs(&g);
        let (lhs, rhs) = count_bound(&g);
        Ok(vec![0.0, ex.tree_count() as f64, ex.tree_sizes()[0] as f64, 0.0, lhs as f64, rhs as f64])
    })?;
    let undirected = replicate(replicas, seed.derive(1), |s| {
        let u = sample_undirected_gnp(n, p, s.derive(0))?;
        let ex = forward_dfs(&u);
        let d = coupled_from_undirected(&u, p, s.derive(1));
        let mismatch = forward_dfs(&d).parents() != ex.parents();
        let (lhs, rhs) = count_bound(&d);
        Ok(vec![1.0, ex.tree_count() as f64, ex.tree_sizes()[0] as f64, b(mismatch), lhs as f64, rhs as f64])
    })?;
    let hist = |rows: &[Vec<f64>], col: usize| count_histogram(rows.iter().map(|r| r[col] as usize), n + 1);
    let trees = chi_square_two_sample(&hist(&directed, 1), &hist(&undirected, 1))?;
    let first = chi_square_two_sample(&hist(&directed, 2), &hist(&undirected, 2))?;
    rec.set("tree_count_stat", trees.stat);
    rec.set("tree_count_dof", trees.dof as f64);
    rec.set("tree_count_p", trees.p);
    rec.set("first_tree_stat", first.stat);
    rec.set("first_tree_dof", first.dof as f64);
    rec.set("first_tree_p", first.p);
    for (arm, rows) in [("directed", &directed), ("undirected", &undirected)] {
        let (m, se) = mean_se(&rows.iter().map(|r| r[1]).collect::<Vec<_>>());
        rec.set(format!("tree_count_mean_{arm}"), m);
        rec.set(format!("tree_count_se_{arm}"), se);
    }
    rec.set("forest_mismatches", undirected.iter().map(|r| r[3]).sum());
    let all: Vec<Vec<f64>> = directed.into_iter().chain(undirected).collect();
    rec.set("count_bound_violations", bound_violations(&all, 4, 5));
    all.into_iter().for_each(|r| rec.push(r));
    Ok(rec)
}

pub(super) fn star_equivalence(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let n_max = cfg.count(cfg.n, 200, "n", 1)?;
    let replicas = cfg.replicas(10_000)?;
    let mut rec = ResultRecord::new(cfg, &["n", "back_edges", "marked", "partition_mismatch", "bound_lhs", "bound_rhs"]);
    let rows = replicate(replicas, Seed(cfg.seed), |s| {
        let mut rng = s.derive(1).rng();
        let n = rng.random_range(1..=n_max);
        let tree_density = rng.random_range(0.5..3.0) / n as f64;
        let back_density = (rng.random_range(0.2..3.0) / n as f64).min(1.0);
        let g = sample_directed_gnp(n, tree_density.min(1.0), s.derive(0))?;
        let tree = PlaneTree::from_exploration(&forward_dfs(&g));
        let order = tree.order().to_vec();
        let mut back = Vec::new();
        for i in 0..n {
            for j in 0..i {
                if rng.random_bool(back_density) {
                    back.push((order[i], order[j]));
                }
            }
        }
        let x = tree_with_back_edges(&tree, &back)?;
        let star = star_reduction(&tree, &back)?;
        let marked = crate::scc::mark_back_edges(&tree, &back)?.count();
        let mismatch = tarjan_scc(&x).blocks() != tarjan_scc(&star).blocks();
        let (lhs, rhs) = count_bound(&x);
        Ok(vec![n as f64, back.len() as f64, marked as f64, b(mismatch), lhs as f64, rhs as f64])
    })?;
    rec.set("partition_mismatches", rows.iter().map(|r| r[3]).sum());
    rec.set("count_bound_violations", bound_violations(&rows, 4, 5));
    rows.into_iter().for_each(|r| rec.push(r));
    Ok(rec)
}

pub(super) fn ls_scaling(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let n = cfg.count(cfg.n, 100_000, "n", 2)?;
    let gamma = cfg.positive(cfg.gamma, 3.0, "gamma")?;
    let replicas = cfg.replicas(50)?;
    let nf = n as f64;
    let p = ((1.0 + gamma * nf.powf(-1.0 / 3.0)) / nf).min(1.0);
    let mut rec = ResultRecord::new(cfg, &["largest_scc_vertices", "largest_scc_edges", "bound_lhs", "bound_rhs"]);
    let rows = replicate(replicas, Seed(cfg.seed), |s| {
        let g = sample_directed_gnp(n, p, s)?;
        let d = discrete_sccs(&g)?;
        let (lhs, rhs) = count_bound(&g);
        Ok(vec![
            d.largest_vertices as f64,
            d.lengths.first().copied().unwrap_or(0) as f64,
            lhs as f64,
            rhs as f64,
        ])
    })?;
    let target = 4.0 * gamma * gamma * nf.cbrt();
    let med = median(&rows.iter().map(|r| r[0]).collect::<Vec<_>>());
    rec.set("p", p);
    rec.set("median_largest_vertices", med);
    rec.set("target", target);
    rec.set("ratio", med / target);
    rec.set("count_bound_violations", bound_violations(&rows, 2, 3));
    rows.into_iter().for_each(|r| rec.push(r));
    Ok(rec)
}

/// Mean area of a standard excursion by plain Monte Carlo.
pub(crate) fn mean_excursion_area(samples: usize, m: usize, seed: Seed) -> Result<(f64, f64)> {
    let areas = replicate(samples, seed, |s| Ok(ExcursionPath::new(1.0, unit_excursion(m, &mut s.rng()))?.area()))?;
    Ok(mean_se(&areas))
}

fn key(prefix: &str, x: f64) -> String {
    format!("{prefix}_{x}")
}

pub(super) fn poisson_bounds(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let sigmas = cfg.list(&cfg.sigma, &[0.1, 0.2], "sigma")?;
    let replicas = cfg.replicas(10_000)?;
    let m = cfg.count(cfg.grid, 256, "grid", 8)?;
    let pool = cfg.count(cfg.pool, 100, "pool", 100)?;
    let area_samples = cfg.count(cfg.area_samples, 100_000, "area_samples", 2)?;
    let seed = Seed(cfg.seed);
    let (c, c_se) = mean_excursion_area(area_samples, 2000, seed.derive(0))?;
    let mut rec = ResultRecord::new(
        cfg,
        &["sigma", "n_ancestral", "n_nonancestral", "ess", "p_none_cond", "p_one_clean_cond"],
    );
    rec.set("c", c);
    rec.set("c_se", c_se);
    for (k, &sigma) in sigmas.iter().enumerate() {
        let rows = replicate(replicas, seed.derive(1 + k as u64), |s| {
            let t = sample_tilted_excursion(sigma, m, pool, s.derive(0))?;
            let f = t.path.scaled(2.0);
            let mt = run_identification(&f, s.derive(1))?;
            let (none, clean) = conditional_probs(&f)?;
            Ok(vec![sigma, mt.n_ancestral() as f64, mt.n_nonancestral() as f64, t.ess, none, clean])
        })?;
        let r = replicas as f64;
        let small = 2.0 * c * sigma.powf(1.5);
        let p0 = rows.iter().filter(|x| x[1] == 0.0).count() as f64 / r;
        let p10 = rows.iter().filter(|x| x[1] == 1.0 && x[2] == 0.0).count() as f64 / r;
        for (col, name, emp, pred) in [(4, "p_none", p0, 1.0 - small), (5, "p_one_clean", p10, small)] {
            let se = (emp * (1.0 - emp) / r).sqrt();
            rec.set(key(&format!("{name}_emp"), sigma), emp);
            rec.set(key(&format!("{name}_pred"), sigma), pred);
            rec.set(key(&format!("{name}_se"), sigma), se);
            rec.set(key(&format!("{name}_z"), sigma), (emp - pred) / se);
            // same event averaged given each sampled path: no expansion error
            let hit: Vec<f64> = rows
                .iter()
                .map(|x| if col == 4 { b(x[1] == 0.0) } else { b(x[1] == 1.0 && x[2] == 0.0) } - x[col])
                .collect();
            let (dm, dse) = mean_se(&hit);
            rec.set(key(&format!("{name}_cond"), sigma), emp - dm);
            rec.set(key(&format!("{name}_cond_z"), sigma), dm / dse);
        }
        rows.into_iter().for_each(|x| rec.push(x));
    }
    Ok(rec)
}

/// Given `f`: the chance of no ancestral mark, `exp(-∫f)`, and of exactly
/// one mark in total, `exp(-∫f) ∫ f(s) q(s) ds` with `q` the chance that a
/// lone ancestral mark at `s` gets no non-ancestral follower.
fn conditional_probs(f: &ExcursionPath) -> Result<(f64, f64)> {
    let none = (-f.area()).exp();
    let h = f.step();
    let mut inner = 0.0;
    for k in 1..f.m() {
        inner += f.values()[k] * no_nonancestral_prob(f, k as f64 * h)?;
    }
    Ok((none, none * inner * h))
}

/// `f(t) = t` on `[0, 1]`, `2 - t` on `[1, 2]`: unit area.
pub fn triangle() -> ExcursionPath {
    ExcursionPath::from_fn(2.0, 8, |t| if t <= 1.0 { t } else { 2.0 - t }).expect("valid triangle")
}

/// Integral of `g` over `[a, b]` by composite Simpson with `panels` panels.
fn simpson(a: f64, b: f64, panels: usize, g: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / (2 * panels) as f64;
    let mut s = g(a) + g(b);
    for i in 1..2 * panels {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub(super) fn mark_density(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let replicas = cfg.replicas(50_000)?;
    let bins = cfg.count(cfg.bins, 20, "bins", 2)?;
    let f = triangle();
    let sigma = f.sigma();
    let mut rec = ResultRecord::new(cfg, &["n_ancestral", "n_nonancestral", "s1"]);
    let rows = replicate(replicas, Seed(cfg.seed), |s| {
        let mt = run_identification(&f, s)?;
        let s1 = mt.marks().first().map_or(f64::NAN, |mk| mk.s);
        Ok(vec![mt.n_ancestral() as f64, mt.n_nonancestral() as f64, s1])
    })?;
    let r = replicas as f64;

    let anc = count_histogram(rows.iter().map(|x| x[0] as usize), 8);
    let fit = chi_square(&anc, &poisson_probs(f.area(), 8))?;
    rec.set("ancestral_chi2_stat", fit.stat);
    rec.set("ancestral_chi2_p", fit.p);

    let width = sigma / bins as f64;
    let bin_of = |t: f64| ((t / width) as usize).min(bins - 1);
    let mut emp = vec![0.0; bins];
    let mut single_anc = vec![0u64; bins];
    for x in &rows {
        if x[0] + x[1] == 1.0 {
            emp[bin_of(x[2])] += 1.0 / r;
        }
        if x[0] == 1.0 {
            single_anc[bin_of(x[2])] += 1;
        }
    }
    let mut tv = 0.0;
    for (i, e) in emp.iter().enumerate() {
        let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
        let exact = simpson(a, b, 32, |t| {
            if t <= 0.0 || t >= sigma { 0.0 } else { density_at(&f, &[t]).expect("t inside the excursion") }
        });
        tv += 0.5 * (e - exact).abs();
    }
    rec.set("single_mark_tv", tv);
    rec.set("single_mark_emp", emp.iter().sum());
    // the lone ancestral time has density proportional to f
    let shape: Vec<f64> = (0..bins).map(|i| f.integral(i as f64 * width, (i + 1) as f64 * width)).collect();
    let cond = chi_square(&single_anc, &shape)?;
    rec.set("s1_shape_chi2_p", cond.p);

    let (mut hits, mut expected, mut var) = (0.0, 0.0, 0.0);
    for x in rows.iter().filter(|x| x[0] == 1.0) {
        let q = if x[2] < sigma { no_nonancestral_prob(&f, x[2])? } else { 1.0 };
        hits += b(x[1] == 0.0);
        expected += q;
        var += q * (1.0 - q);
    }
    let se = var.sqrt();
    rec.set("clean_given_one_emp", hits);
    rec.set("clean_given_one_pred", expected);
    rec.set("clean_given_one_se", se);
    rec.set("clean_given_one_z", (hits - expected) / se);
    rows.into_iter().for_each(|x| rec.push(x));
    Ok(rec)
}

pub(super) fn theorem_main(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let n = cfg.count(cfg.n, 50_000, "n", 2)?;
    let lambda = cfg.finite(cfg.lambda, 0.0, "lambda")?;
    let replicas = cfg.replicas(500)?;
    let horizon = cfg.list(&cfg.horizon, &[10.0], "horizon")?[0];
    let step = cfg.positive(cfg.step, 1e-4, "step")?;
    let k = cfg.count(cfg.top_k, 1, "top_k", 1)?;
    let p = critical_probability(n, lambda)?;
    let scale = (n as f64).powf(-1.0 / 3.0);
    let seed = Seed(cfg.seed);

    let mut columns = vec!["arm".to_string(), "scaled_len".to_string()];
    columns.extend((2..=k).map(|i| format!("scaled_len_{i}")));
    columns.extend(["components", "complex", "violations", "bound_lhs", "bound_rhs"].map(String::from));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut rec = ResultRecord::new(cfg, &cols);

    let discrete = replicate(replicas, seed.derive(0), |s| {
        let g = sample_directed_gnp(n, p, s)?;
        let d = discrete_sccs(&g)?;
        let (lhs, rhs) = count_bound(&g);
        let mut row = vec![0.0];
        row.extend((0..k).map(|i| d.lengths.get(i).map_or(0.0, |&l| l as f64 * scale)));
        row.extend([d.lengths.len() as f64, f64::NAN, d.violations as f64, lhs as f64, rhs as f64]);
        Ok(row)
    })?;
    let continuum = replicate(replicas, seed.derive(1), |s| {
        let ls = sample_limit(lambda, horizon, step, s)?;
        let mut row = vec![1.0];
        row.extend((0..k).map(|i| ls.components.get(i).map_or(0.0, Mdm::total_length)));
        let bad = ls.components.iter().filter(|c| !(c.is_loop() || c.stats().is_three_regular)).count();
        row.extend([ls.components.len() as f64, ls.complex_count() as f64, bad as f64, f64::NAN, f64::NAN]);
        Ok(row)
    })?;
    for i in 0..k {
        let a: Vec<f64> = discrete.iter().map(|r| r[1 + i]).collect();
        let c: Vec<f64> = continuum.iter().map(|r| r[1 + i]).collect();
        let ks = ks_statistic(&a, &c)?;
        let suffix = if i == 0 { String::new() } else { format!("_{}", i + 1) };
        rec.set(format!("ks_d{suffix}"), ks.d);
        rec.set(format!("ks_p{suffix}"), ks.p_approx);
        rec.set(format!("mean_discrete{suffix}"), mean_se(&a).0);
        rec.set(format!("mean_continuum{suffix}"), mean_se(&c).0);
    }
    let comps: f64 = discrete.iter().map(|r| r[k + 1]).sum();
    let bad: f64 = discrete.iter().map(|r| r[k + 3]).sum();
    rec.set("discrete_components", comps);
    rec.set("discrete_violations", bad);
    rec.set("discrete_violation_fraction", if comps > 0.0 { bad / comps } else { 0.0 });
    rec.set("continuum_violations", continuum.iter().map(|r| r[k + 3]).sum());
    rec.set("count_bound_violations", bound_violations(&discrete, k + 4, k + 5));
    discrete.into_iter().chain(continuum).for_each(|r| rec.push(r));
    Ok(rec)
}

pub(super) fn limit_moments(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let lambda = cfg.finite(cfg.lambda, 0.0, "lambda")?;
    let mut horizons = cfg.list(&cfg.horizon, &[6.0, 10.0, 20.0], "horizon")?;
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();
    let step = cfg.positive(cfg.step, 1e-4, "step")?;
    let replicas = cfg.replicas(400)?;
    let mut rec = ResultRecord::new(
        cfg,
        &["replica", "horizon", "complex_count", "loop_count", "sum_alpha_1_5", "sum_alpha_2"],
    );
    // every horizon reuses the replica's seed, so longer paths extend shorter ones
    let per_replica = replicate(replicas, Seed(cfg.seed), |s| {
        horizons
            .iter()
            .map(|&t| {
                let ls = sample_limit(lambda, t, step, s)?;
                let path = sample_drift_path(lambda, t, step, s.derive(0))?;
                Ok([
                    t,
                    ls.complex_count() as f64,
                    ls.loop_count() as f64,
                    excursion_moment_sum(&path, 1.5)?,
                    excursion_moment_sum(&path, 2.0)?,
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let names = ["complex", "loops", "sum_alpha_1_5", "sum_alpha_2"];
    for (h, &t) in horizons.iter().enumerate() {
        for (j, name) in names.iter().enumerate() {
            let xs: Vec<f64> = per_replica.iter().map(|r| r[h][1 + j]).collect();
            let (m, se) = mean_se(&xs);
            rec.set(key(&format!("{name}_mean"), t), m);
            rec.set(key(&format!("{name}_se"), t), se);
            if h > 0 {
                let d: Vec<f64> = per_replica.iter().map(|r| r[h][1 + j] - r[h - 1][1 + j]).collect();
                let (dm, dse) = mean_se(&d);
                let from = horizons[h - 1];
                rec.set(format!("{name}_diff_mean_{from}_{t}"), dm);
                rec.set(format!("{name}_diff_se_{from}_{t}"), dse);
            }
        }
    }
    for (i, r) in per_replica.into_iter().enumerate() {
        for row in r {
            let mut v = vec![i as f64];
            v.extend(row);
            rec.push(v);
        }
    }
    Ok(rec)
}

pub(super) fn realize_roundtrip(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let max_vertices = cfg.count(cfg.n, 4, "n", 2)?;
    let replicas = cfg.replicas(100)?;
    let max_len = cfg.count(cfg.top_k, 3, "top_k", 1)?;
    let cat = catalog(max_vertices);
    let mut rec = ResultRecord::new(cfg, &["kind", "length", "round_trip_ok"]);
    let check = |gs: &[Mdm]| -> Result<bool> {
        let back = apply_identifications(&realize_sequence(gs)?);
        Ok(back.len() == gs.len() && back.iter().zip(gs).all(|(a, b)| canonical_code(a) == canonical_code(b)))
    };
    let mut failures = 0.0;
    for g in &cat {
        let ok = check(std::slice::from_ref(g))?;
        failures += b(!ok);
        rec.push(vec![0.0, 1.0, b(ok)]);
    }
    let seqs = replicate(replicas, Seed(cfg.seed), |s| {
        let mut rng = s.rng();
        let len = rng.random_range(0..=max_len);
        Ok((0..len).map(|_| cat[rng.random_range(0..cat.len())].clone()).collect::<Vec<_>>())
    })?;
    for gs in &seqs {
        let ok = check(gs)?;
        failures += b(!ok);
        rec.push(vec![1.0, gs.len() as f64, b(ok)]);
    }
    rec.set("catalog_size", cat.len() as f64);
    rec.set("failures", failures);
    Ok(rec)
}

pub(super) fn full_support(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let sigma = cfg.list(&cfg.sigma, &[2.0], "sigma")?[0];
    let replicas = cfg.replicas(20_000)?;
    let m = cfg.count(cfg.grid, 256, "grid", 8)?;
    let pool = cfg.count(cfg.pool, 100, "pool", 100)?;
    let c2 = canonical_code(&Mdm::from_triples(2, &[(0, 1, 1.0), (0, 1, 1.0), (1, 0, 1.0)])?);
    let mut rec = ResultRecord::new(cfg, &["components", "complex", "has_c2"]);
    let rows = replicate(replicas, Seed(cfg.seed), |s| {
        let t = sample_tilted_excursion(sigma, m, pool, s.derive(0))?;
        let comps = continuum_sccs(&run_identification(&t.path.scaled(2.0), s.derive(1))?);
        let complex = comps.iter().filter(|c| !c.is_loop()).count();
        let hit = comps.iter().any(|c| canonical_code(c) == c2);
        Ok(vec![comps.len() as f64, complex as f64, b(hit)])
    })?;
    let hits: f64 = rows.iter().map(|r| r[2]).sum();
    rec.set("c2_hits", hits);
    rec.set("c2_fraction", hits / replicas as f64);
    rows.into_iter().for_each(|r| rec.push(r));
    Ok(rec)
}
