//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Criteria are serialized through a mutex so wall-clock budgets and worker
//! pools do not contend.

use std::sync::Mutex;
use std::time::Instant;

use blockroute::blocks::place_blocks;
use blockroute::ft_budget::{
    self, k_max_chernoff, k_max_exact_capped, total_logical_error, FtParams, RegimeLabel,
};
use blockroute::graphs::generate_regular;
use blockroute::quotient::{build_quotient, min_degree_for_regime};
use blockroute::routing::{
    decompose_hop_into_matchings, schedule_greedy, valiant_route, validate_schedule, AtomMove,
    HopPlan,
};
use blockroute::spectral::{extreme_eigenvalues, spectral_ratio, SpectralOptions};
use blockroute_cli::config::{ExperimentConfig, RawConfig};
use blockroute_cli::runner::{run_ft_budget, run_simulate};
use blockroute_testutil::{jacobi_eigenvalues, min_edge_coloring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn pass(name: &str, detail: &str) {
    println!("[PASS] {name}: {detail}");
}

fn sim_config(n: usize, d_prime: usize, d_c: u32, n_l: usize, trials: u32) -> ExperimentConfig {
    RawConfig {
        n_vertices: Some(n),
        d_prime: Some(d_prime),
        d_c: Some(d_c),
        n_l: Some(n_l),
        trials: Some(trials),
        base_seed: Some(1),
        ..Default::default()
    }
    .validated()
    .expect("valid acceptance config")
}

/// Criterion 1: measured host spectral ratios at n = 2000 match the
/// reference column {0.280, 0.199, 0.140, 0.098} within 0.03, three seeds
/// per degree, in under 60 s.
#[test]
fn c01_spectral_baseline() {
    let _guard = serial();
    let start = Instant::now();
    let reference = [
        (50usize, 0.280f64),
        (100, 0.199),
        (200, 0.140),
        (400, 0.098),
    ];
    for &(d_prime, expected) in &reference {
        for seed in 0..3u64 {
            let g = generate_regular(2000, d_prime, seed).unwrap();
            let s = spectral_ratio(
                &g,
                d_prime as f64,
                &SpectralOptions {
                    tol: 1e-6,
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            let beta = s.beta.unwrap();
            assert!(
                (beta - expected).abs() <= 0.03,
                "d'={d_prime} seed={seed}: beta {beta} vs {expected}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    pass(
        "criterion 1",
        &format!("host beta within 0.03 of reference for d' in {{50,100,200,400}} ({elapsed:?})"),
    );
}

/// Criterion 2: 98/(1-beta) reproduces the reference threshold column
/// {136.1, 122.4, 113.9, 108.7} within 0.05 when fed the printed beta values
/// {0.280, 0.199, 0.140, 0.098}.
///
/// KNOWN DEFECT, left red: the printed thresholds were computed from
/// unrounded beta values, so feeding the printed (3-decimal) betas gives
/// 122.347/113.953/108.647, off the printed column by ~0.053, just over the
/// stated 0.05. Only the 136.1 row reproduces. The failure message carries
/// the exact deltas.
#[test]
fn c02_threshold_column() {
    let _guard = serial();
    let start = Instant::now();
    let rows = [
        (0.280f64, 136.1f64),
        (0.199, 122.4),
        (0.140, 113.9),
        (0.098, 108.7),
    ];
    let mut failures = Vec::new();
    for &(beta, printed) in &rows {
        let computed = 98.0 / (1.0 - beta);
        let delta = (computed - printed).abs();
        if delta > 0.05 {
            failures.push(format!(
                "beta={beta}: 98/(1-beta) = {computed:.6} vs printed {printed} (|delta| = {delta:.6} > 0.05)"
            ));
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1);
    if failures.is_empty() {
        pass("criterion 2", "threshold column reproduced within 0.05");
    } else {
        println!("[FAIL] criterion 2: threshold column not reproducible from printed beta values");
        for f in &failures {
            println!("       {f}");
        }
        println!(
            "       analysis: the printed thresholds follow from unrounded beta values \
             (e.g. beta = 0.19935 gives 122.4); from the printed 3-decimal betas the \
             formula is off by ~0.053 on three of four rows"
        );
        panic!("criterion 2 fails as stated; see analysis above");
    }
}

const TABLE3_BETA_Q_DC7: [(usize, f64); 4] = [(8, 0.172), (16, 0.096), (32, 0.069), (64, 0.043)];

/// Host size per simulated row. The reference protocol does not pin
/// N_phys; these sizes were calibrated so that the d_C = 7 quotient spectral
/// ratios land inside the reference bands (see README).
fn host_size(d_c: u32, n_l: usize) -> usize {
    match (d_c, n_l) {
        (3, 64) => 2304,
        (3, _) => 1200,
        (5, _) => 6250,
        (7, 8) => 6000,
        (7, _) => 10000,
        _ => unreachable!("unexpected acceptance row"),
    }
}

fn host_degree(d_c: u32) -> usize {
    if d_c == 7 {
        200
    } else {
        100
    }
}

/// Criterion 3: all 12 simulated rows satisfy alpha in [0.4, 1.2],
/// mean T_physical <= 1.2 d_C log2(N_L) + d_C, beta_Q < 1 in every trial,
/// and the d_C = 7 rows land within 0.05 of the reference beta_Q column.
/// Budget 10 minutes.
#[test]
fn c03_table3_bands() {
    let _guard = serial();
    let start = Instant::now();
    for d_c in [3u32, 5, 7] {
        for n_l in [8usize, 16, 32, 64] {
            let cfg = sim_config(host_size(d_c, n_l), host_degree(d_c), d_c, n_l, 5);
            let report = run_simulate(&cfg).unwrap();
            let a = &report.aggregate;
            assert!(
                (0.4..=1.2).contains(&a.alpha),
                "d_C={d_c} N_L={n_l}: alpha {}",
                a.alpha
            );
            let bound = 1.2 * d_c as f64 * (n_l as f64).log2() + d_c as f64;
            assert!(
                a.mean_t_physical <= bound,
                "d_C={d_c} N_L={n_l}: mean T {} above {bound}",
                a.mean_t_physical
            );
            assert!(
                report.records.iter().all(|r| r.beta_q < 1.0),
                "d_C={d_c} N_L={n_l}: some trial has beta_Q >= 1"
            );
            if d_c == 7 {
                let expected = TABLE3_BETA_Q_DC7
                    .iter()
                    .find(|(nl, _)| *nl == n_l)
                    .unwrap()
                    .1;
                assert!(
                    (a.mean_beta_q - expected).abs() <= 0.05,
                    "d_C=7 N_L={n_l}: mean beta_Q {} vs reference {expected}",
                    a.mean_beta_q
                );
            }
            // Reference alpha values for two spot rows, with their bands.
            if (d_c, n_l) == (3, 8) {
                assert!((a.alpha - 0.89).abs() <= 0.3, "alpha {}", a.alpha);
            }
            if (d_c, n_l) == (5, 64) {
                assert!((a.alpha - 0.50).abs() <= 0.2, "alpha {}", a.alpha);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}, budget 10 min");
    pass(
        "criterion 3",
        &format!("12 rows in band, beta_Q < 1 everywhere, d_C=7 spectral bands hit ({elapsed:?})"),
    );
}

/// Criterion 4: saturation floor. d_C = 7, N_L in {16, 32, 64}, d' = 200:
/// mean T_physical = 21 +- 2.
#[test]
fn c04_saturation_floor() {
    let _guard = serial();
    let start = Instant::now();
    for n_l in [16usize, 32, 64] {
        let cfg = sim_config(10000, 200, 7, n_l, 15);
        let report = run_simulate(&cfg).unwrap();
        let mean = report.aggregate.mean_t_physical;
        assert!(
            (19.0..=23.0).contains(&mean),
            "N_L={n_l}: mean T_physical {mean} outside 21 +- 2"
        );
    }
    pass(
        "criterion 4",
        &format!(
            "mean T_physical within 21 +- 2 at N_L 16/32/64 ({:?})",
            start.elapsed()
        ),
    );
}

/// Criterion 5: worked fault-tolerance example. p_eff = 1e-3, N_L = 100:
/// d_C = 7 gives T = 49, p_L = 1e-4, P_L in [0.45, 0.52]; d_C = 9 gives
/// P_L in [0.058, 0.068]. Under 1 s.
#[test]
fn c05_ft_worked_example() {
    let _guard = serial();
    let start = Instant::now();
    let b7 = total_logical_error(&FtParams::new(1e-4, 7, 100, 1e-9).unwrap());
    assert_eq!(b7.t_routing, 49);
    assert!((b7.p_l - 1e-4).abs() < 1e-12, "p_L = {}", b7.p_l);
    assert!(
        (0.45..=0.52).contains(&b7.p_l_total),
        "P_L = {}",
        b7.p_l_total
    );

    let b9 = total_logical_error(&FtParams::new(1e-4, 9, 100, 1e-9).unwrap());
    assert_eq!(b9.t_routing, 63);
    assert!(
        (0.058..=0.068).contains(&b9.p_l_total),
        "P_L = {}",
        b9.p_l_total
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1);
    pass(
        "criterion 5",
        &format!(
            "T=49, p_L=1e-4, P_L={:.3}; d_C=9: T=63, P_L={:.3}",
            b7.p_l_total, b9.p_l_total
        ),
    );
}

/// Criterion 6: minimum-degree table matches (3,7), (5,10), (7,12), (9,15)
/// exactly. Under 1 s.
#[test]
fn c06_min_degree_table() {
    let _guard = serial();
    let start = Instant::now();
    let expected = [(3u32, 7u32), (5, 10), (7, 12), (9, 15)];
    for &(d_c, d) in &expected {
        let got = min_degree_for_regime(d_c, 3);
        assert_eq!(got, d, "d_C={d_c}: min d = {got}, expected {d}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1);
    pass("criterion 6", "minimum-degree rows match exactly");
}

/// Criterion 7: all four operating-point regime labels and the 1e-4 row
/// exponents (-3/-4/-5) reproduce; the 1e-5 row is emitted as a flagged
/// note rather than silently matched.
#[test]
fn c07_operating_points() {
    let _guard = serial();
    let table = ft_budget::operating_point_table(&[5e-3, 1e-3, 1e-4, 1e-5], &[5, 7, 9]);
    let labels: Vec<RegimeLabel> = table.iter().map(|r| r.regime).collect();
    assert_eq!(
        labels,
        vec![
            RegimeLabel::Supercritical,
            RegimeLabel::AtThreshold,
            RegimeLabel::FtViable,
            RegimeLabel::StronglySuppressed,
        ]
    );
    let exps: Vec<i64> = table[2]
        .log10_p_l
        .iter()
        .map(|(_, v)| v.unwrap().round() as i64)
        .collect();
    assert_eq!(exps, vec![-3, -4, -5]);

    // The 1e-5 row: computed exponents follow p_eff/p_th (-6/-8/-10), and
    // the discrepancy with the quoted -9/-12 is flagged.
    let row5 = &table[3];
    let exps5: Vec<i64> = row5
        .log10_p_l
        .iter()
        .map(|(_, v)| v.unwrap().round() as i64)
        .collect();
    assert_eq!(exps5, vec![-6, -8, -10]);
    assert!(
        row5.note.is_some(),
        "1e-5 row must carry a discrepancy note"
    );

    // The note also surfaces in the CLI report.
    let report = run_ft_budget(&FtParams::new(1e-4, 7, 100, 1e-9).unwrap()).unwrap();
    assert!(report
        .notes
        .iter()
        .any(|n| n.contains("p_phys=1e-5") && n.contains("-9/-12")));
    pass(
        "criterion 7",
        "regime labels and 1e-4 exponents reproduced; 1e-5 row flagged",
    );
}

/// Criterion 8: on 200 random bipartite length-1 move multigraphs with at
/// most 12 edges, the decomposition returns exactly Delta matchings, equal
/// to the brute-force minimum edge coloring.
#[test]
fn c08_konig_property() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for trial in 0..200 {
        let left = rng.gen_range(1..=5u32);
        let right = rng.gen_range(1..=5u32);
        let m = rng.gen_range(1..=12usize);
        let edges: Vec<(u32, u32)> = (0..m)
            .map(|_| (rng.gen_range(0..left), 1000 + rng.gen_range(0..right)))
            .collect();

        let moves: Vec<AtomMove> = edges
            .iter()
            .map(|&(a, b)| AtomMove {
                from: a,
                path: vec![a, b],
            })
            .collect();
        let mut multiplicity = std::collections::HashMap::new();
        for &(a, b) in &edges {
            *multiplicity.entry((a, b)).or_insert(0u32) += 1;
        }
        let congestion = multiplicity.values().copied().max().unwrap();
        let plan = HopPlan {
            block: 0,
            moves,
            congestion,
            dilation: 1,
            matchings: None,
            exact_coloring: false,
        };
        let plan = decompose_hop_into_matchings(plan);
        assert!(plan.exact_coloring, "trial {trial}: expected exact path");
        let rounds = plan.rounds().unwrap();

        let mut degree = std::collections::HashMap::new();
        for &(a, b) in &edges {
            *degree.entry(a).or_insert(0usize) += 1;
            *degree.entry(b).or_insert(0usize) += 1;
        }
        let delta = degree.values().copied().max().unwrap();
        let brute = min_edge_coloring(&edges);
        assert_eq!(rounds, delta, "trial {trial}: rounds != Delta");
        assert_eq!(
            rounds, brute,
            "trial {trial}: rounds != brute-force optimum"
        );

        // Each round is a proper matching of the move multigraph.
        for round in plan.matchings.as_ref().unwrap() {
            let mut seen = std::collections::HashSet::new();
            for &(a, b) in round {
                assert!(
                    seen.insert(a) && seen.insert(b),
                    "trial {trial}: round not a matching"
                );
            }
        }
    }
    pass(
        "criterion 8",
        "200 bipartite multigraphs decomposed into exactly Delta matchings",
    );
}

/// Criterion 9: Lanczos extreme eigenvalues match the dense full-spectrum
/// oracle within 1e-6 on 50 random graphs with at most 200 vertices.
#[test]
fn c09_oracle_eigensolver() {
    let _guard = serial();
    let start = Instant::now();
    for i in 0..50usize {
        let n = 20 + (i * 117) % 181;
        let mut d = 3 + i % 9;
        if n * d % 2 == 1 {
            d += 1;
        }
        let g = generate_regular(n, d, 9000 + i as u64).unwrap();
        let s = extreme_eigenvalues(&g, &SpectralOptions::default()).unwrap();
        let mut rows = vec![vec![0.0f64; n]; n];
        for v in 0..n as u32 {
            for &w in g.neighbors(v) {
                rows[v as usize][w as usize] = 1.0;
            }
        }
        let eig = jacobi_eigenvalues(&rows);
        assert!(
            (s.lambda_max - eig[n - 1]).abs() < 1e-6,
            "case {i}: lambda_max"
        );
        assert!((s.lambda_2 - eig[n - 2]).abs() < 1e-6, "case {i}: lambda_2");
        assert!((s.lambda_min - eig[0]).abs() < 1e-6, "case {i}: lambda_min");
    }
    pass(
        "criterion 9",
        &format!(
            "50 graphs within 1e-6 of the dense oracle ({:?})",
            start.elapsed()
        ),
    );
}

/// Criterion 10: schedule validity. On simulated trials, machine-check
/// path-shortestness, per-step edge-disjointness, delivery of pi, and
/// T_sched >= max(C_Q, D_Q).
#[test]
fn c10_schedule_validity() {
    let _guard = serial();
    use rand::seq::SliceRandom;
    let mut checked = 0;
    for (n, d_prime, d_c, n_l) in [
        (1200usize, 100usize, 3u32, 16usize),
        (1200, 100, 3, 32),
        (6250, 100, 5, 32),
    ] {
        for seed in 0..4u64 {
            let g = generate_regular(n, d_prime, seed).unwrap();
            let cfg = place_blocks(&g, n_l, d_c, 1, seed).unwrap();
            let q = build_quotient(&g, &cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pi: Vec<u32> = (0..n_l as u32).collect();
            pi.shuffle(&mut rng);
            let out = valiant_route(&q, &pi, seed).unwrap();
            let scheduled = schedule_greedy(out).unwrap();
            validate_schedule(&q, &scheduled).unwrap();
            let t = scheduled.t_sched().unwrap();
            assert!(
                t >= scheduled.congestion.max(scheduled.dilation),
                "T_sched {t} below max(C_Q, D_Q)"
            );
            checked += 1;
        }
    }
    pass(
        "criterion 10",
        &format!("{checked} trials pass shortest-path, matching, delivery, and bound audits"),
    );
}

/// Criterion 11: the K_max discrepancy is reported, not patched over:
/// the closed form clamps to 0 at (d_C=5, p_eff=1e-3, p_target=1e-9) while
/// the report cites the unreconciled quoted value ~24; and the exact scan
/// dominates the closed form across a parameter grid wherever the closed
/// form is positive.
#[test]
fn c11_kmax_discrepancy() {
    let _guard = serial();
    let params = FtParams::new(1e-4, 5, 100, 1e-9).unwrap();
    assert!((params.p_eff() - 1e-3).abs() < 1e-15);
    assert_eq!(k_max_chernoff(&params), 0, "closed form must clamp to 0");

    let report = run_ft_budget(&params).unwrap();
    assert!(
        report
            .notes
            .iter()
            .any(|n| n.contains("24") && n.contains("unreconciled")),
        "report must cite the unreconciled reference value 24: {:?}",
        report.notes
    );

    // Grid: 5 distances x 5 rates x 4 targets = 100 points.
    let mut positive = 0;
    for &d_c in &[3u32, 5, 7, 9, 11] {
        for i in 0..5 {
            let p_eff = 10f64.powf(-5.0 + 2.5 * (i as f64) / 4.0);
            for &p_target in &[1e-9, 1e-6, 1e-3, 0.5] {
                let p = FtParams {
                    p_phys: p_eff / 10.0,
                    c_circ: 10.0,
                    p_th: 1e-2,
                    d_c,
                    n_l: 64,
                    p_target,
                };
                let chern = k_max_chernoff(&p);
                if chern >= 1 {
                    positive += 1;
                    let exact = k_max_exact_capped(&p, 50_000_000);
                    assert!(
                        chern <= exact.k_max,
                        "d_C={d_c} p_eff={p_eff:.2e} p_target={p_target:.0e}: \
                         chernoff {chern} > exact {}",
                        exact.k_max
                    );
                }
            }
        }
    }
    assert!(
        positive >= 10,
        "grid has too few positive closed-form points"
    );
    pass(
        "criterion 11",
        &format!("clamped closed form reported as unreconciled; exact >= chernoff at {positive} grid points"),
    );
}
