//! Experiment drivers: simulate, sweep, regime, ft-budget, decompose.
//!
//! Trials are dispatched to a rayon pool and collected in trial order, so
//! output is deterministic regardless of completion order. Trial i uses
//! seed base_seed + i; adding trials never perturbs earlier ones.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use blockroute::blocks::place_blocks;
use blockroute::ft_budget::{self, FtParams};
use blockroute::graphs::generate_regular;
use blockroute::quotient::{self, build_quotient_with, regime_check};
use blockroute::routing::{
    decompose_hop_into_matchings, plan_block_hop, sample_hop_target, schedule_greedy,
    valiant_route, validate_schedule,
};
use blockroute::spectral::{spectral_ratio, SpectralOptions};

use crate::config::ExperimentConfig;
use crate::emit::{csv_document, fmt_sig};
use crate::{CliError, Result};

/// Residual tolerance for host spectral ratios; quotient summaries use the
/// library default.
const HOST_SPECTRAL_TOL: f64 = 1e-6;

const STREAM_PI: u64 = 0xC11_0001;
const STREAM_HOP_CHOICE: u64 = 0xC11_0002;

/// One simulation trial: all measured quantities for a row of the report.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub d_c: u32,
    pub n_l: usize,
    pub d_prime: usize,
    pub seed: u64,
    pub beta_host: f64,
    pub beta_q: f64,
    pub d_q_avg: f64,
    pub diameter_q: u32,
    pub c_q: u32,
    pub d_q: u32,
    pub t_sched: u32,
    pub t_physical: u64,
    pub hop_rounds: u32,
    /// Diagnostic only; excluded from serialized output so that identical
    /// configs produce identical bytes.
    #[serde(skip)]
    pub wall_time_ms: u64,
}

/// Means over the trial ensemble plus the normalized depth ratio alpha.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateAggregate {
    pub trials: u32,
    pub mean_beta_host: f64,
    pub mean_beta_q: f64,
    pub max_beta_q: f64,
    pub mean_c_q: f64,
    pub mean_d_q: f64,
    pub mean_t_sched: f64,
    pub mean_t_physical: f64,
    pub mean_hop_rounds: f64,
    /// mean T_physical / (d_C log2 N_L).
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregate: SimulateAggregate,
}

/// Runs the full pipeline for one trial.
fn run_trial(cfg: &ExperimentConfig, trial: u32) -> Result<TrialRecord> {
    let start = std::time::Instant::now();
    let seed = cfg.base_seed.wrapping_add(trial as u64);

    let host = generate_regular(cfg.n_vertices, cfg.d_prime, seed)?;
    let host_spec = spectral_ratio(
        &host,
        cfg.d_prime as f64,
        &SpectralOptions {
            tol: HOST_SPECTRAL_TOL,
            seed,
            ..Default::default()
        },
    )?;
    let beta_host = host_spec.beta.expect("spectral_ratio fills beta");

    let placement = place_blocks(&host, cfg.n_l, cfg.d_c, cfg.guard, seed)?;
    placement.validate(&host)?;

    let q = build_quotient_with(
        &host,
        &placement,
        &SpectralOptions {
            seed,
            ..Default::default()
        },
    )?;
    q.validate(Some((&host, &placement)))?;
    audit_quotient_properties(cfg, &host, &placement, &q, beta_host)?;

    let mut pi_rng = ChaCha8Rng::seed_from_u64(seed);
    pi_rng.set_stream(STREAM_PI);
    let mut pi: Vec<u32> = (0..cfg.n_l as u32).collect();
    pi.shuffle(&mut pi_rng);

    let outcome = valiant_route(&q, &pi, seed)?;
    let outcome = schedule_greedy(outcome)?;
    validate_schedule(&q, &outcome)?;

    // Sample one hop decomposition on a randomly chosen block.
    let mut hop_rng = ChaCha8Rng::seed_from_u64(seed);
    hop_rng.set_stream(STREAM_HOP_CHOICE);
    let mut order: Vec<u32> = (0..cfg.n_l as u32).collect();
    order.shuffle(&mut hop_rng);
    let mut hop_rounds = None;
    for &block in &order {
        if let Some(target) = sample_hop_target(&host, &placement, block, seed) {
            let plan = plan_block_hop(&host, &placement, block, &target)?;
            let plan = decompose_hop_into_matchings(plan);
            let rounds = plan.rounds().unwrap_or(0) as u32;
            if rounds < plan.congestion.max(plan.dilation) {
                return Err(CliError::Core(blockroute::Error::InvariantViolated(
                    format!(
                        "hop rounds {rounds} below max(C_phys, D_phys) = {}",
                        plan.congestion.max(plan.dilation)
                    ),
                )));
            }
            hop_rounds = Some(rounds);
            break;
        }
    }
    let hop_rounds = hop_rounds.ok_or_else(|| {
        CliError::Core(blockroute::Error::InvariantViolated(
            "no block admits a hop target at this occupancy".into(),
        ))
    })?;

    Ok(TrialRecord {
        trial,
        d_c: cfg.d_c,
        n_l: cfg.n_l,
        d_prime: cfg.d_prime,
        seed,
        beta_host,
        beta_q: q.beta(),
        d_q_avg: q.avg_degree(),
        diameter_q: q.diameter(),
        c_q: outcome.congestion,
        d_q: outcome.dilation,
        t_sched: outcome.t_sched().unwrap_or(0),
        t_physical: outcome.t_physical,
        hop_rounds,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

/// Per-quotient property audits: the lambda_2 sweep cut lifts to a host cut
/// clearing the Cheeger bound (tolerance 0.05), and in-regime quotients obey
/// the spectral diameter bound with slack 3.
fn audit_quotient_properties(
    cfg: &ExperimentConfig,
    host: &blockroute::HostGraph,
    placement: &blockroute::BlockConfiguration,
    q: &blockroute::QuotientGraph,
    beta_host: f64,
) -> Result<()> {
    let cheeger = quotient::lifted_cheeger_check(host, placement, q, beta_host)?;
    if cheeger.host_conductance < cheeger.host_bound - 0.05 {
        return Err(CliError::Core(blockroute::Error::InvariantViolated(
            format!(
                "lifted sweep-cut conductance {:.4} below host bound {:.4}",
                cheeger.host_conductance, cheeger.host_bound
            ),
        )));
    }
    let verdict = regime_check(cfg.d_prime as u32, cfg.d_c, cfg.r, beta_host)?;
    if verdict.in_loose {
        if let Some(bound) = q.diameter_bound(3) {
            if q.diameter() > bound {
                return Err(CliError::Core(blockroute::Error::InvariantViolated(
                    format!("quotient diameter {} above bound {bound}", q.diameter()),
                )));
            }
        }
    }
    Ok(())
}

fn in_pool<T: Send>(parallelism: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = parallelism {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateReport> {
    cfg.check()?;
    let trials: Vec<Result<TrialRecord>> = in_pool(cfg.parallelism, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t))
            .collect()
    })?;
    let mut records = Vec::with_capacity(trials.len());
    for r in trials {
        records.push(r?);
    }
    let aggregate = aggregate_records(cfg, &records);
    Ok(SimulateReport {
        schema: "sim-v1",
        config: cfg.clone(),
        records,
        aggregate,
    })
}

fn aggregate_records(cfg: &ExperimentConfig, records: &[TrialRecord]) -> SimulateAggregate {
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let mean_t_physical = mean(&|r| r.t_physical as f64);
    let denom = cfg.d_c as f64 * (cfg.n_l as f64).log2();
    SimulateAggregate {
        trials: records.len() as u32,
        mean_beta_host: mean(&|r| r.beta_host),
        mean_beta_q: mean(&|r| r.beta_q),
        max_beta_q: records.iter().map(|r| r.beta_q).fold(0.0, f64::max),
        mean_c_q: mean(&|r| r.c_q as f64),
        mean_d_q: mean(&|r| r.d_q as f64),
        mean_t_sched: mean(&|r| r.t_sched as f64),
        mean_t_physical,
        mean_hop_rounds: mean(&|r| r.hop_rounds as f64),
        alpha: mean_t_physical / denom,
    }
}

const SIMULATE_HEADER: [&str; 16] = [
    "schema",
    "trial",
    "d_c",
    "n_l",
    "d_prime",
    "seed",
    "beta_host",
    "beta_q",
    "d_q_avg",
    "diameter_q",
    "c_q",
    "d_q",
    "t_sched",
    "t_physical",
    "hop_rounds",
    "alpha",
];

pub fn simulate_csv(report: &SimulateReport) -> String {
    let mut rows = Vec::with_capacity(report.records.len() + 1);
    for r in &report.records {
        rows.push(vec![
            report.schema.to_string(),
            r.trial.to_string(),
            r.d_c.to_string(),
            r.n_l.to_string(),
            r.d_prime.to_string(),
            r.seed.to_string(),
            fmt_sig(r.beta_host),
            fmt_sig(r.beta_q),
            fmt_sig(r.d_q_avg),
            r.diameter_q.to_string(),
            r.c_q.to_string(),
            r.d_q.to_string(),
            r.t_sched.to_string(),
            r.t_physical.to_string(),
            r.hop_rounds.to_string(),
            String::new(),
        ]);
    }
    let a = &report.aggregate;
    rows.push(vec![
        report.schema.to_string(),
        "mean".to_string(),
        report.config.d_c.to_string(),
        report.config.n_l.to_string(),
        report.config.d_prime.to_string(),
        String::new(),
        fmt_sig(a.mean_beta_host),
        fmt_sig(a.mean_beta_q),
        String::new(),
        String::new(),
        fmt_sig(a.mean_c_q),
        fmt_sig(a.mean_d_q),
        fmt_sig(a.mean_t_sched),
        fmt_sig(a.mean_t_physical),
        fmt_sig(a.mean_hop_rounds),
        fmt_sig(a.alpha),
    ]);
    csv_document(&SIMULATE_HEADER, &rows)
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d_prime: usize,
    pub beta_host: f64,
    /// d_C^2 (r-1) / (1 - beta_host) at the measured mean beta.
    pub threshold: f64,
    pub verdict: String,
    pub t_physical_mean: f64,
    pub beta_q_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    if cfg.d_prime_list.is_empty() {
        return Err(CliError::Config(
            "sweep needs d_prime_list (or --d-prime-list)".into(),
        ));
    }
    let mut rows = Vec::new();
    for &d_prime in &cfg.d_prime_list {
        let sub = cfg.with_d_prime(d_prime);
        let report = run_simulate(&sub)?;
        let beta_host = report.aggregate.mean_beta_host;
        let verdict = regime_check(d_prime as u32, cfg.d_c, cfg.r, beta_host)?;
        rows.push(SweepRow {
            d_prime,
            beta_host,
            threshold: verdict.loose_threshold,
            verdict: verdict.label().to_string(),
            t_physical_mean: report.aggregate.mean_t_physical,
            beta_q_mean: report.aggregate.mean_beta_q,
        });
    }
    Ok(SweepReport {
        schema: "sweep-v1",
        config: cfg.clone(),
        rows,
    })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let header = [
        "schema",
        "d_prime",
        "beta_host",
        "threshold",
        "verdict",
        "t_physical_mean",
        "beta_q_mean",
    ];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                report.schema.to_string(),
                r.d_prime.to_string(),
                fmt_sig(r.beta_host),
                fmt_sig(r.threshold),
                r.verdict.clone(),
                fmt_sig(r.t_physical_mean),
                fmt_sig(r.beta_q_mean),
            ]
        })
        .collect();
    csv_document(&header, &rows)
}

// ---------------------------------------------------------------------------
// Regime (minimum-degree table)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RegimeRow {
    pub d_c: u32,
    pub min_d_tight: u32,
    pub d_prime_tight: u32,
    pub min_d_loose: u32,
    pub d_prime_loose: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub schema: &'static str,
    pub r: u32,
    pub rows: Vec<RegimeRow>,
}

pub fn run_regime(d_c_list: &[u32], r: u32) -> Result<RegimeReport> {
    if r < 3 {
        return Err(CliError::Config("r must be >= 3".into()));
    }
    let rows = d_c_list
        .iter()
        .map(|&d_c| {
            let tight = quotient::min_degree_for_regime(d_c, r);
            let loose = quotient::min_degree_for_regime_loose(d_c, r);
            RegimeRow {
                d_c,
                min_d_tight: tight,
                d_prime_tight: tight * (r - 1),
                min_d_loose: loose,
                d_prime_loose: loose * (r - 1),
            }
        })
        .collect();
    Ok(RegimeReport {
        schema: "regime-v1",
        r,
        rows,
    })
}

pub fn regime_csv(report: &RegimeReport) -> String {
    let header = [
        "schema",
        "d_c",
        "r",
        "min_d_tight",
        "d_prime_tight",
        "min_d_loose",
        "d_prime_loose",
    ];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            vec![
                report.schema.to_string(),
                row.d_c.to_string(),
                report.r.to_string(),
                row.min_d_tight.to_string(),
                row.d_prime_tight.to_string(),
                row.min_d_loose.to_string(),
                row.d_prime_loose.to_string(),
            ]
        })
        .collect();
    csv_document(&header, &rows)
}

// ---------------------------------------------------------------------------
// FT budget
// ---------------------------------------------------------------------------

/// Quoted syndrome-interval reference values that do not follow from the
/// closed-form bound; reported as unreconciled whenever the computation
/// lands on one of these parameter points.
const KMAX_REFERENCE_POINTS: [(u32, f64, f64, u64); 3] = [
    (5, 1e-3, 1e-9, 24),
    (7, 1e-3, 1e-9, 23),
    (7, 1e-3, 1e-3, 60),
];

#[derive(Debug, Clone, Serialize)]
pub struct FtReport {
    pub schema: &'static str,
    pub params: FtParams,
    pub budget: ft_budget::FtBudget,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composed_correlated: Option<ft_budget::ComposedDepth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composed_uncorrelated: Option<ft_budget::ComposedDepth>,
    pub operating_points: Vec<ft_budget::OperatingPoint>,
    pub notes: Vec<String>,
}

pub fn run_ft_budget(params: &FtParams) -> Result<FtReport> {
    params.validate()?;
    let budget = ft_budget::total_logical_error(params);
    let mut notes = Vec::new();

    for &(d_c, p_eff, p_target, quoted) in &KMAX_REFERENCE_POINTS {
        if params.d_c == d_c
            && (params.p_eff() - p_eff).abs() < 1e-12
            && (params.p_target - p_target).abs() < p_target * 1e-6
            && budget.k_max_chernoff != quoted
        {
            notes.push(format!(
                "K_max discrepancy: closed-form bound gives {} and the exact binomial scan \
                 gives {}; the quoted reference value K_max ~ {} at (d_C={}, p_eff={:.0e}, \
                 p_target={:.0e}) is unreconciled with both",
                budget.k_max_chernoff, budget.k_max_exact.k_max, quoted, d_c, p_eff, p_target
            ));
        }
    }

    let composed_correlated = match ft_budget::compose_syndrome_budget(params, true) {
        Ok(c) => Some(c),
        Err(blockroute::Error::BudgetInfeasible) => {
            notes.push(
                "syndrome composition infeasible: exact K_max = 0 at these parameters".into(),
            );
            None
        }
        Err(e) => return Err(e.into()),
    };
    let composed_uncorrelated = ft_budget::compose_syndrome_budget(params, false).ok();

    let operating_points = ft_budget::operating_point_table(&[5e-3, 1e-3, 1e-4, 1e-5], &[5, 7, 9]);
    for op in &operating_points {
        if let Some(note) = &op.note {
            notes.push(format!(
                "operating-point row p_phys={:.0e}: {note}",
                op.p_phys
            ));
        }
    }

    Ok(FtReport {
        schema: "ft-v1",
        params: params.clone(),
        budget,
        composed_correlated,
        composed_uncorrelated,
        operating_points,
        notes,
    })
}

pub fn ft_csv(report: &FtReport) -> String {
    let header = [
        "schema",
        "section",
        "p_phys",
        "p_eff",
        "ratio",
        "pl_exponents",
        "regime",
        "text",
    ];
    let mut rows: Vec<Vec<String>> = Vec::new();
    for op in &report.operating_points {
        let exps = op
            .log10_p_l
            .iter()
            .map(|(_, v)| match v {
                Some(x) => fmt_sig(*x),
                None => "-".to_string(),
            })
            .collect::<Vec<_>>()
            .join("/");
        rows.push(vec![
            report.schema.to_string(),
            "operating_point".to_string(),
            fmt_sig(op.p_phys),
            fmt_sig(op.p_eff),
            fmt_sig(op.ratio),
            exps,
            op.regime.to_string(),
            String::new(),
        ]);
    }
    let b = &report.budget;
    let mut summary = |section: &str, text: String| {
        rows.push(vec![
            report.schema.to_string(),
            section.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            text,
        ]);
    };
    summary("k_max_chernoff", b.k_max_chernoff.to_string());
    summary(
        "k_max_exact",
        if b.k_max_exact.capped {
            format!("{} (capped)", b.k_max_exact.k_max)
        } else {
            b.k_max_exact.k_max.to_string()
        },
    );
    summary("p_l", fmt_sig(b.p_l));
    summary("t_routing", b.t_routing.to_string());
    summary("p_l_total", fmt_sig(b.p_l_total));
    summary("p_l_total_exact", fmt_sig(b.p_l_total_exact));
    if let Some(c) = &report.composed_correlated {
        summary(
            "composed_correlated",
            format!(
                "routing {} + syndrome {} = {} (windows {})",
                c.routing_rounds, c.syndrome_rounds, c.total, c.windows
            ),
        );
    }
    if let Some(c) = &report.composed_uncorrelated {
        summary(
            "composed_uncorrelated",
            format!(
                "routing {} + syndrome {} = {} (windows {})",
                c.routing_rounds, c.syndrome_rounds, c.total, c.windows
            ),
        );
    }
    for note in &report.notes {
        summary("note", note.clone());
    }
    csv_document(&header, &rows)
}

// ---------------------------------------------------------------------------
// Decompose
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HopRecord {
    pub hop: u32,
    pub block: u32,
    pub c_phys: u32,
    pub d_phys: u32,
    pub rounds: u32,
    pub exact_coloring: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub records: Vec<HopRecord>,
    pub max_rounds: u32,
    /// Serialization budget 3 d_C used by the round audits.
    pub round_bound: u32,
}

pub fn run_decompose(cfg: &ExperimentConfig) -> Result<DecomposeReport> {
    cfg.check()?;
    let host = generate_regular(cfg.n_vertices, cfg.d_prime, cfg.base_seed)?;
    let placement = place_blocks(&host, cfg.n_l, cfg.d_c, cfg.guard, cfg.base_seed)?;
    placement.validate(&host)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
    rng.set_stream(STREAM_HOP_CHOICE);
    let mut records = Vec::new();
    let mut hop = 0u32;
    let mut attempts = 0u32;
    while records.len() < cfg.hops as usize && attempts < 20 * cfg.hops {
        attempts += 1;
        let block = {
            use rand::Rng;
            rng.gen_range(0..cfg.n_l as u32)
        };
        let Some(target) =
            sample_hop_target(&host, &placement, block, cfg.base_seed + attempts as u64)
        else {
            continue;
        };
        let plan = plan_block_hop(&host, &placement, block, &target)?;
        let plan = decompose_hop_into_matchings(plan);
        records.push(HopRecord {
            hop,
            block,
            c_phys: plan.congestion,
            d_phys: plan.dilation,
            rounds: plan.rounds().unwrap_or(0) as u32,
            exact_coloring: plan.exact_coloring,
        });
        hop += 1;
    }
    if records.len() < cfg.hops as usize {
        return Err(CliError::Core(blockroute::Error::InvariantViolated(
            format!("only {} of {} hops found targets", records.len(), cfg.hops),
        )));
    }
    let max_rounds = records.iter().map(|r| r.rounds).max().unwrap_or(0);
    Ok(DecomposeReport {
        schema: "decompose-v1",
        config: cfg.clone(),
        records,
        max_rounds,
        round_bound: 3 * cfg.d_c,
    })
}

pub fn decompose_csv(report: &DecomposeReport) -> String {
    let header = [
        "schema",
        "hop",
        "block",
        "d_c",
        "c_phys",
        "d_phys",
        "rounds",
        "round_bound",
        "exact_coloring",
    ];
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                report.schema.to_string(),
                r.hop.to_string(),
                r.block.to_string(),
                report.config.d_c.to_string(),
                r.c_phys.to_string(),
                r.d_phys.to_string(),
                r.rounds.to_string(),
                report.round_bound.to_string(),
                r.exact_coloring.to_string(),
            ]
        })
        .collect();
    csv_document(&header, &rows)
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
