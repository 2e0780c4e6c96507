use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use traffic_qubo::pipeline::{self, PipelineConfig, RunDir};
use traffic_qubo::qubo::QuboInstance;
use traffic_qubo::solvers::{self, ResultRecord};

#[derive(Parser)]
#[command(name = "traffic-qubo", version, about = "Traffic route assignment as a QUBO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

macro_rules! config_flags {
    ($($field:ident),* $(,)?) => {
        /// Overrides for config file keys; flags win over the file.
        #[derive(Args, Debug, Default)]
        struct ConfigArgs {
            /// Flat `key = value` config file
            #[arg(long, global = true)]
            config: Option<PathBuf>,
            $(
                #[arg(long, global = true, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl ConfigArgs {
            fn overrides(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field), v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

config_flags!(
    network,
    grid_rows,
    grid_cols,
    grid_spacing,
    grid_speed,
    grid_speed_jitter,
    center_lat,
    center_lon,
    radius_km,
    attraction_lat,
    attraction_lon,
    attraction_radius,
    n,
    l_min,
    l_max,
    k,
    alpha,
    w,
    gamma,
    rho,
    m,
    max_clusters,
    clustering,
    seed,
    solver,
    time_limit,
    sweeps,
    reads,
    t_initial,
    t_final,
    cooling,
    tenure,
    max_stagnation,
    iterations,
    exhaustive_mode,
    output_dir,
);

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p).with_context(|| format!("config {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        for (key, value) in self.overrides() {
            cfg.set(key, value).with_context(|| format!("flag --{}", key.replace('_', "-")))?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Network, vehicles and alternative routes
    Generate,
    /// Congestion weights and duration penalties
    Weights,
    /// Conflict-graph clustering
    Cluster,
    /// One QUBO file per cluster
    BuildQubo,
    /// Solve the run's QUBOs, or a single QUBO file with --qubo
    Solve {
        /// Standalone COO file to solve instead of the run directory
        #[arg(long)]
        qubo: Option<PathBuf>,
        /// Results CSV for --qubo mode
        #[arg(long, requires = "qubo")]
        out: Option<PathBuf>,
        /// Bitstring output for --qubo mode
        #[arg(long, requires = "qubo")]
        solution: Option<PathBuf>,
    },
    /// Metrics report; each pair of --compare files adds an energy gap
    Evaluate {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Vec<PathBuf>,
    },
    /// Heatmap and LP exports
    Export {
        #[arg(long)]
        heatmap: bool,
        #[arg(long)]
        lp: bool,
    },
    /// Every stage in order, with manifest
    RunAll,
}

fn solve_file(cfg: &PipelineConfig, qubo: &Path, out: Option<PathBuf>, solution: Option<PathBuf>) -> Result<()> {
    let q = QuboInstance::<f64>::load(qubo)?;
    let mut sc = cfg.solver_config.clone();
    sc.seed = cfg.seed;
    let result = solvers::solver_by_name::<f64>(&cfg.solver, &sc)?.solve(&q)?;
    let fixed = solvers::repair(&q, &result.assignment)?;
    let record = ResultRecord::new(&result, fixed != result.assignment);
    let out = out.unwrap_or_else(|| qubo.with_extension("results.csv"));
    solvers::write_results(&out, &[record])?;
    if let Some(path) = solution {
        std::fs::write(path, format!("{}\n", result.assignment.to_bitstring()))?;
    }
    println!("{} energy {} valid {}", result.solver, result.energy, result.valid);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.config.resolve()?;
    let dir = RunDir::new(&cfg.output_dir);
    match cli.command {
        Command::Generate => pipeline::stage_generate(&cfg, &dir)?,
        Command::Weights => pipeline::stage_weights(&cfg, &dir)?,
        Command::Cluster => pipeline::stage_cluster(&cfg, &dir)?,
        Command::BuildQubo => pipeline::stage_build_qubo(&cfg, &dir)?,
        Command::Solve { qubo: Some(q), out, solution } => solve_file(&cfg, &q, out, solution)?,
        Command::Solve { qubo: None, .. } => pipeline::stage_solve(&cfg, &dir)?,
        Command::Evaluate { compare } => {
            let deltas = compare
                .chunks(2)
                .map(|p| pipeline::compare_results(&p[0], &p[1]))
                .collect::<traffic_qubo::Result<Vec<_>>>()?;
            let report = pipeline::stage_evaluate(&cfg, &dir, &deltas)?;
            println!(
                "total cost {:.3} s, shortest {:.3} s, random {:.3} s",
                report.total_cost, report.shortest_cost, report.random_cost
            );
        }
        Command::Export { heatmap, lp } => {
            let both = !heatmap && !lp;
            pipeline::stage_export(&cfg, &dir, heatmap || both, lp || both)?;
        }
        Command::RunAll => {
            let manifest = pipeline::run_pipeline(&cfg)?;
            println!("{} artifacts in {}", manifest.artifacts.len(), dir.root.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
