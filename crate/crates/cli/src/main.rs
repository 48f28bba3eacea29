//! `blockroute`: block permutation routing simulator on expander hosts.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use blockroute::ft_budget::FtParams;
use blockroute_cli::config::{OutputFormat, RawConfig};
use blockroute_cli::{config, emit, exit_code, runner, CliError, Result};

#[derive(Parser)]
#[command(
    name = "blockroute",
    about = "Block permutation routing of rigid logical patches on expander hosts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Flat TOML config file; command-line flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Host graph size N_phys.
    #[arg(long = "n")]
    n_vertices: Option<usize>,
    /// Host degree d'.
    #[arg(long)]
    d_prime: Option<usize>,
    /// Hypergraph uniformity r (host degree d' = d(r-1)).
    #[arg(long)]
    r: Option<u32>,
    /// Code distance d_C (block size d_C^2).
    #[arg(long)]
    d_c: Option<u32>,
    /// Number of blocks N_L.
    #[arg(long)]
    n_l: Option<usize>,
    /// Guard distance in hops.
    #[arg(long)]
    guard: Option<u32>,
    /// Independent trials.
    #[arg(long)]
    trials: Option<u32>,
    /// Base seed; trial i uses base_seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker pool size (default: available cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Generate hosts, place blocks, route, schedule, and decompose one hop
    /// per trial; emit per-trial records plus the aggregate row.
    Simulate(CommonOpts),
    /// Sweep host degrees at fixed (d_C, N_L): spectral ratios, regime
    /// thresholds, verdicts, routing depth.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated host degrees, e.g. 50,100,200,400.
        #[arg(long, value_delimiter = ',')]
        d_prime_list: Option<Vec<usize>>,
    },
    /// Minimum base degree for the high-connectivity regime per code
    /// distance (tight and loose forms).
    Regime {
        /// Comma-separated code distances.
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,9")]
        d_c_list: Vec<u32>,
        #[arg(long, default_value = "3")]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Fault-tolerance budget: K_max (closed form and exact), logical error
    /// rates, operating-point table, syndrome composition, discrepancy notes.
    FtBudget {
        /// Physical per-gate error rate.
        #[arg(long, default_value = "1e-4")]
        p_phys: f64,
        #[arg(long, default_value = "7")]
        d_c: u32,
        #[arg(long, default_value = "100")]
        n_l: u32,
        /// Per-block failure target for the syndrome interval.
        #[arg(long, default_value = "1e-9")]
        p_target: f64,
        /// Circuit-level inflation factor.
        #[arg(long, default_value = "10")]
        c_circ: f64,
        /// Fail (exit 5) when the syndrome composition is infeasible instead
        /// of reporting a note.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Sample block hops and decompose them into physical matching rounds.
    Decompose {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of hops to sample.
        #[arg(long)]
        hops: Option<u32>,
    },
}

fn overrides_from(common: &CommonOpts) -> RawConfig {
    RawConfig {
        n_vertices: common.n_vertices,
        d_prime: common.d_prime,
        r: common.r,
        d_c: common.d_c,
        n_l: common.n_l,
        guard: common.guard,
        trials: common.trials,
        base_seed: common.seed,
        parallelism: common.parallelism,
        d_prime_list: None,
        hops: None,
    }
}

fn load_config(common: &CommonOpts, extra: RawConfig) -> Result<config::ExperimentConfig> {
    let base = match &common.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    base.merged(overrides_from(common))
        .merged(extra)
        .validated()
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load_config(&common, RawConfig::default())?;
            let report = runner::run_simulate(&cfg)?;
            let content = match common.format {
                OutputFormat::Csv => runner::simulate_csv(&report),
                OutputFormat::Json => runner::to_json(&report),
            };
            emit::write_output(common.out.as_deref(), &content)?;
            Ok(())
        }
        Command::Sweep {
            common,
            d_prime_list,
        } => {
            let extra = RawConfig {
                d_prime_list,
                ..Default::default()
            };
            let cfg = load_config(&common, extra)?;
            let report = runner::run_sweep(&cfg)?;
            let content = match common.format {
                OutputFormat::Csv => runner::sweep_csv(&report),
                OutputFormat::Json => runner::to_json(&report),
            };
            emit::write_output(common.out.as_deref(), &content)?;
            Ok(())
        }
        Command::Regime {
            d_c_list,
            r,
            out,
            format,
        } => {
            let report = runner::run_regime(&d_c_list, r)?;
            let content = match format {
                OutputFormat::Csv => runner::regime_csv(&report),
                OutputFormat::Json => runner::to_json(&report),
            };
            emit::write_output(out.as_deref(), &content)?;
            Ok(())
        }
        Command::FtBudget {
            p_phys,
            d_c,
            n_l,
            p_target,
            c_circ,
            strict,
            out,
            format,
        } => {
            let params = FtParams::new(p_phys, d_c, n_l, p_target)?.with_c_circ(c_circ)?;
            let report = runner::run_ft_budget(&params)?;
            let infeasible = report.composed_correlated.is_none();
            let content = match format {
                OutputFormat::Csv => runner::ft_csv(&report),
                OutputFormat::Json => runner::to_json(&report),
            };
            emit::write_output(out.as_deref(), &content)?;
            if strict && infeasible {
                return Err(CliError::Core(blockroute::Error::BudgetInfeasible));
            }
            Ok(())
        }
        Command::Decompose { common, hops } => {
            let extra = RawConfig {
                hops,
                ..Default::default()
            };
            let cfg = load_config(&common, extra)?;
            let report = runner::run_decompose(&cfg)?;
            let content = match common.format {
                OutputFormat::Csv => runner::decompose_csv(&report),
                OutputFormat::Json => runner::to_json(&report),
            };
            emit::write_output(common.out.as_deref(), &content)?;
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
