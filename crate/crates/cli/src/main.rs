use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use diracflow::dirac::DiracOperator;
use diracflow::eigh::SpectralWindow;
use diracflow::fields::{degree_map, maurer_cartan};
use diracflow::sfl::SflResult;
use diracflow::topology::{degree, winding_number};
use diracflow_cli::cache::Cache;
use diracflow_cli::config::{RunConfig, SolverChoice};
use diracflow_cli::{pipeline, svg};
use std::path::PathBuf;

/// Spectral flow of twisted Dirac operators on the flat 3-torus, with
/// mapping-degree and winding-number cross checks.
#[derive(Parser)]
#[command(name = "diracflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Declarative TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Winding indices, comma separated (e.g. "-2,-1,0,1,2").
    #[arg(long, short, allow_hyphen_values = true, global = true)]
    k: Option<String>,
    /// Operator grid points per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Twisting bundle rank N (>= 2).
    #[arg(long, global = true)]
    rank: Option<usize>,
    /// Spin structure, e.g. "1,1,1".
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Spectral window half-width.
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Eigenvalue solver for the flow walk.
    #[arg(long, value_enum, global = true)]
    solver: Option<SolverChoice>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parallel per-k workers.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for iterative solvers and probe vectors.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Disable the content-addressed cache.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification suite and write report.json, CSVs and SVGs.
    Verify(CommonFlags),
    /// Windowed eigenvalues of the operator at one path parameter, as CSV.
    Spectrum {
        #[command(flatten)]
        flags: CommonFlags,
        /// Path parameter in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Spectral flow for a single k; writes sfl_k{K}.json, CSV and SVG.
    Sfl(CommonFlags),
    /// Mapping degree of f_k by quadrature.
    Degree(CommonFlags),
    /// Chern-Simons winding number of F_k.
    Winding(CommonFlags),
    /// Render an SVG diagram from a stored spectral-flow JSON record.
    Plot {
        /// SflResult JSON produced by `sfl` or the cache.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Title text for the diagram.
        #[arg(long, default_value = "spectral flow")]
        title: String,
    },
    /// Drop cache entries (stale-format ones by default).
    CacheGc {
        #[command(flatten)]
        flags: CommonFlags,
        /// Remove every entry, not just stale ones.
        #[arg(long)]
        all: bool,
    },
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().context("parsing k list"))
        .collect()
}

fn build_config(flags: &CommonFlags) -> Result<RunConfig> {
    let mut config = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(k) = &flags.k {
        config.k_list = parse_list(k)?;
    }
    if let Some(grid) = flags.grid {
        config.grid = grid;
    }
    if let Some(rank) = flags.rank {
        config.rank = rank;
    }
    if let Some(delta) = &flags.delta {
        let parts: Vec<u8> = delta
            .split(',')
            .map(|p| p.trim().parse::<u8>().context("parsing delta"))
            .collect::<Result<_>>()?;
        if parts.len() != 3 {
            bail!("delta needs exactly three entries");
        }
        config.delta = [parts[0], parts[1], parts[2]];
    }
    if let Some(window) = flags.window {
        config.window = window;
    }
    if let Some(solver) = flags.solver {
        config.solver = solver;
    }
    if let Some(out) = &flags.out {
        config.out_dir = out.clone();
    }
    if let Some(workers) = flags.workers {
        config.workers = workers;
    }
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if flags.no_cache {
        config.cache = false;
    }
    config.validate()?;
    Ok(config)
}

fn single_k(config: &RunConfig) -> Result<i64> {
    if config.k_list.len() != 1 {
        bail!("this subcommand needs exactly one k (use --k)");
    }
    Ok(config.k_list[0])
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(flags) => {
            let config = build_config(&flags)?;
            let (report, flows) = pipeline::verify(&config)?;
            pipeline::write_outputs(&config, &report, &flows)?;
            for r in &report.records {
                println!(
                    "k={:+}: degree={:+.6} winding={:+.6} index={:+.6} flow={:+} residual={:.3e} [{}]",
                    r.k,
                    r.degree,
                    r.winding,
                    r.mapping_torus_index,
                    r.spectral_flow,
                    r.conjugation_residual,
                    if r.pass { "pass" } else { "FAIL" }
                );
                for d in &r.diagnostics {
                    println!("    note: {d}");
                }
            }
            println!(
                "pairwise distinct flows: {} | report: {}",
                report.pairwise_distinct_flows,
                config.out_dir.join("report.json").display()
            );
            if let Err(e) = report.validate() {
                bail!("report validator: {e}");
            }
            if !report.all_pass {
                std::process::exit(1);
            }
        }
        Command::Spectrum { flags, t } => {
            let config = build_config(&flags)?;
            let k = single_k(&config)?;
            if !(0.0..=1.0).contains(&t) {
                bail!("t must lie in [0, 1]");
            }
            let cache = Cache::new(&config.out_dir, config.cache);
            let field = pipeline::cached_gauge_field(&config, &cache, k, config.grid)?;
            let alpha = maurer_cartan(&field)?;
            let op = DiracOperator::assemble(&alpha, t, config.spin_structure(), f64::INFINITY)?;
            let window = SpectralWindow::with_default_guard(config.window)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let eigs = op.window_eigs(&window, config.solver.into(), config.seed)?;
            println!("t,eigenvalue_index,eigenvalue,residual");
            for (i, ev) in eigs.values.iter().enumerate() {
                println!("{},{},{},{:e}", t, i, ev, eigs.residual_bound);
            }
            if eigs.hazard {
                eprintln!("note: eigenvalue within the guard band of the window boundary");
            }
        }
        Command::Sfl(flags) => {
            let config = build_config(&flags)?;
            let k = single_k(&config)?;
            let cache = Cache::new(&config.out_dir, config.cache);
            let flow = pipeline::flow_for_k(&config, &cache, k, config.grid, config.solver)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let json_path = config.out_dir.join(format!("sfl_k{k}.json"));
            std::fs::write(&json_path, serde_json::to_vec_pretty(&flow)?)?;
            std::fs::write(
                config.out_dir.join(format!("sfl_k{k}.csv")),
                flow.eigenvalue_csv(),
            )?;
            std::fs::write(
                config.out_dir.join(format!("flow_k{k}.svg")),
                svg::render_flow(&flow, &format!("k = {k}, grid {}", config.grid)),
            )?;
            println!(
                "flow = {} (solves {}, refinements {}) -> {}",
                flow.flow,
                flow.diagnostics.solves,
                flow.diagnostics.refinements,
                json_path.display()
            );
        }
        Command::Degree(flags) => {
            let config = build_config(&flags)?;
            let k = single_k(&config)?;
            let profile = config.collapse_profile()?;
            let map = degree_map::<f64>(k, config.topo_grid, &profile)?;
            let d = degree(&map)?;
            println!(
                "{{\"k\":{},\"grid\":{},\"degree\":{},\"rounded\":{}}}",
                k,
                config.topo_grid,
                d,
                d.round() as i64
            );
        }
        Command::Winding(flags) => {
            let config = build_config(&flags)?;
            let k = single_k(&config)?;
            let cache = Cache::new(&config.out_dir, config.cache);
            let field = pipeline::cached_gauge_field(&config, &cache, k, config.topo_grid)?;
            let w = winding_number(&field)?;
            println!(
                "{{\"k\":{},\"grid\":{},\"winding\":{},\"rounded\":{}}}",
                k,
                config.topo_grid,
                w,
                w.round() as i64
            );
        }
        Command::Plot { input, out, title } => {
            let bytes = std::fs::read(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let flow: SflResult<f64> =
                serde_json::from_slice(&bytes).context("parsing spectral-flow record")?;
            let rendered = svg::render_flow(&flow, &title);
            let out = out.unwrap_or_else(|| input.with_extension("svg"));
            std::fs::write(&out, rendered)?;
            println!("wrote {}", out.display());
        }
        Command::CacheGc { flags, all } => {
            let config = build_config(&flags)?;
            let cache = Cache::new(&config.out_dir, true);
            let removed = cache.gc(all)?;
            println!("removed {removed} cache entries under {}", cache.root().display());
        }
    }
    Ok(())
}
