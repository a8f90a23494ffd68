use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use scclab_core::graph::{read_graph, write_directed, write_undirected, AnyGraph};
use scclab_core::scc::{component_to_mdm, count_bound};
use scclab_core::{
    canonical_code, classify_edges, continuum_sccs, critical_probability, forward_dfs, realize_sequence,
    run_experiment, run_identification, sample_directed_gnp, sample_excursion, sample_limit, sample_tilted_excursion,
    sample_undirected_gnp, tarjan_scc, Experiment, ExperimentConfig, Mdm, Result, Seed,
};

#[derive(Parser)]
#[command(name = "lab", version, about = "Strongly connected components of critical random digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and write it in the text graph format.
    Sample {
        #[arg(long)]
        n: usize,
        /// Edge probability; defaults to 1/n + lambda n^{-4/3}.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        undirected: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Depth-first exploration report of a graph file.
    Explore { graph: PathBuf },
    /// Strongly connected components of a directed graph file.
    Scc {
        graph: PathBuf,
        /// Number of ranked components to report.
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Identification process on sampled excursions, one JSON line each.
    ContinuumSample {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long)]
        seed: u64,
        /// Proposal pool for the area tilt.
        #[arg(long, default_value_t = 100)]
        pool: usize,
        /// Use a plain excursion instead of the area-tilted one.
        #[arg(long)]
        untilted: bool,
    },
    /// Ranked limit components, one JSON line per replica.
    LimitSample {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
    },
    /// Plane tree with backward pairs realizing a list of multigraphs
    /// (JSON array, or a single multigraph) read from a file or stdin.
    Realize { input: Option<PathBuf> },
    CouplingForest(ExperimentArgs),
    StarEquivalence(ExperimentArgs),
    LsScaling(ExperimentArgs),
    Poissonbounds(ExperimentArgs),
    MarkDensity(ExperimentArgs),
    TheoremMain(ExperimentArgs),
    LimitMoments(ExperimentArgs),
    RealizeRoundtrip(ExperimentArgs),
    FullSupport(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_graph(path: &Path) -> Result<AnyGraph> {
    read_graph(BufReader::new(File::open(path)?))
}

#[derive(Serialize)]
struct ComponentSummary {
    code: String,
    length: f64,
    vertices: usize,
    edges: usize,
    is_loop: bool,
}

fn summarize(m: &Mdm) -> ComponentSummary {
    ComponentSummary {
        code: canonical_code(m).to_string(),
        length: m.total_length(),
        vertices: m.vertex_count(),
        edges: m.edge_count(),
        is_loop: m.is_loop(),
    }
}

fn run_experiment_command(e: Experiment, args: ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.kind()? != e {
        log::warn!("config names `{}`, running `{}`", cfg.experiment, e.name());
        cfg.experiment = e.name().to_string();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let rec = run_experiment(&cfg)?;
    let mut text = serde_json::to_string_pretty(&rec)?;
    text.push('\n');
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Sample { n, p, lambda, undirected, seed, out: path } => {
            let p = match p {
                Some(p) => p,
                None => critical_probability(n, lambda)?,
            };
            let mut sink: Box<dyn Write> = match path {
                Some(path) => Box::new(BufWriter::new(File::create(path)?)),
                None => Box::new(&mut out),
            };
            if undirected {
                write_undirected(&sample_undirected_gnp(n, p, Seed(seed))?, &mut sink)?;
            } else {
                write_directed(&sample_directed_gnp(n, p, Seed(seed))?, &mut sink)?;
            }
            sink.flush()?;
        }
        Command::Explore { graph } => {
            let g = load_graph(&graph)?;
            let report = match &g {
                AnyGraph::Directed(d) => {
                    let ex = forward_dfs(d);
                    let classes = classify_edges(d, &ex)?;
                    json!({ "n": d.n(), "directed": true, "exploration": ex, "edges": classes })
                }
                AnyGraph::Undirected(u) => {
                    json!({ "n": u.n(), "directed": false, "exploration": forward_dfs(u) })
                }
            };
            print_json(&mut out, &report)?;
        }
        Command::Scc { graph, top_k } => {
            let AnyGraph::Directed(g) = load_graph(&graph)? else {
                return Err(scclab_core::Error::InvalidInput("scc needs a directed graph".into()));
            };
            let part = tarjan_scc(&g);
            let mut ranked = Vec::new();
            for block in part.blocks().iter().filter(|b| b.len() >= 2) {
                ranked.push((block.clone(), component_to_mdm(&g, block)?));
            }
            ranked.sort_by(|a, b| b.1.total_length().total_cmp(&a.1.total_length()).then(a.0[0].cmp(&b.0[0])));
            ranked.truncate(top_k);
            let (nontrivial, bound) = count_bound(&g);
            let components: Vec<_> = ranked
                .iter()
                .map(|(block, m)| json!({ "vertices": block, "mdm": m, "summary": summarize(m), "stats": m.stats() }))
                .collect();
            let blocks: Vec<_> = part.blocks().iter().filter(|b| b.len() >= 2).collect();
            let report = json!({
                "n": g.n(),
                "blocks": blocks,
                "nontrivial": nontrivial,
                "surplus_plus_ancestral": bound,
                "ranked": components,
            });
            print_json(&mut out, &report)?;
        }
        Command::ContinuumSample { sigma, grid, replicas, seed, pool, untilted } => {
            let rows: Vec<Result<serde_json::Value>> = (0..replicas as u64)
                .into_par_iter()
                .map(|r| {
                    let s = Seed(seed).derive(r);
                    let path = if untilted {
                        sample_excursion(sigma, grid, s.derive(0))?
                    } else {
                        sample_tilted_excursion(sigma, grid, pool, s.derive(0))?.path
                    };
                    let mt = run_identification(&path.scaled(2.0), s.derive(1))?;
                    let comps: Vec<_> = continuum_sccs(&mt).iter().map(summarize).collect();
                    Ok(json!({
                        "replica": r,
                        "seed": s.0,
                        "n": mt.n(),
                        "n_ancestral": mt.n_ancestral(),
                        "n_nonancestral": mt.n_nonancestral(),
                        "components": comps,
                    }))
                })
                .collect();
            for row in rows {
                print_json(&mut out, &row?)?;
            }
        }
        Command::LimitSample { lambda, horizon, step, replicas, seed, top_k } => {
            let rows: Vec<Result<serde_json::Value>> = (0..replicas as u64)
                .into_par_iter()
                .map(|r| {
                    let s = Seed(seed).derive(r);
                    let ls = sample_limit(lambda, horizon, step, s)?;
                    let top: Vec<_> = ls.top(top_k).iter().map(summarize).collect();
                    Ok(json!({
                        "replica": r,
                        "seed": s.0,
                        "excursions": ls.lengths.len(),
                        "complex_count": ls.complex_count(),
                        "loop_count": ls.loop_count(),
                        "components": top,
                    }))
                })
                .collect();
            for row in rows {
                print_json(&mut out, &row?)?;
            }
        }
        Command::Realize { input } => {
            let mut text = String::new();
            match input {
                Some(path) => File::open(path)?.read_to_string(&mut text)?,
                None => io::stdin().lock().read_to_string(&mut text)?,
            };
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let gs: Vec<Mdm> = if value.is_array() {
                serde_json::from_value(value)?
            } else {
                vec![serde_json::from_value(value)?]
            };
            print_json(&mut out, &realize_sequence(&gs)?)?;
        }
        Command::CouplingForest(a) => run_experiment_command(Experiment::CouplingForest, a, &mut out)?,
        Command::StarEquivalence(a) => run_experiment_command(Experiment::StarEquivalence, a, &mut out)?,
        Command::LsScaling(a) => run_experiment_command(Experiment::LsScaling, a, &mut out)?,
        Command::Poissonbounds(a) => run_experiment_command(Experiment::PoissonBounds, a, &mut out)?,
        Command::MarkDensity(a) => run_experiment_command(Experiment::MarkDensity, a, &mut out)?,
        Command::TheoremMain(a) => run_experiment_command(Experiment::TheoremMain, a, &mut out)?,
        Command::LimitMoments(a) => run_experiment_command(Experiment::LimitMoments, a, &mut out)?,
        Command::RealizeRoundtrip(a) => run_experiment_command(Experiment::RealizeRoundtrip, a, &mut out)?,
        Command::FullSupport(a) => run_experiment_command(Experiment::FullSupport, a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
