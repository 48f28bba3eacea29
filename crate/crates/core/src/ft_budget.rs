//! Fault-tolerance budget arithmetic: effective error rates, syndrome
//! interval bounds (closed-form Chernoff and exact binomial oracle), logical
//! error rates, routing-depth totals, operating-point tables, and the
//! correlated-decoding depth composition.

use serde::Serialize;

use crate::error::{Error, Result};

/// Scan cap for the exact binomial search.
pub const K_CAP_DEFAULT: u64 = 1_000_000;

/// Error-model parameters.
///
/// Probabilities live in (0,1); `p_target` additionally admits 1 (no
/// failure budget, used in limiting cases). `c_circ` is the circuit-level
/// inflation factor, constrained to [5, 15].
#[derive(Debug, Clone, Serialize)]
pub struct FtParams {
    pub p_phys: f64,
    pub c_circ: f64,
    pub p_th: f64,
    pub d_c: u32,
    pub n_l: u32,
    pub p_target: f64,
}

impl FtParams {
    pub fn new(p_phys: f64, d_c: u32, n_l: u32, p_target: f64) -> Result<Self> {
        let params = FtParams {
            p_phys,
            c_circ: 10.0,
            p_th: 1e-2,
            d_c,
            n_l,
            p_target,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_c_circ(mut self, c_circ: f64) -> Result<Self> {
        self.c_circ = c_circ;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_phys", self.p_phys), ("p_th", self.p_th)] {
            if !(0.0..1.0).contains(&p) || p == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0,1), got {p}"
                )));
            }
        }
        if !(self.p_target > 0.0 && self.p_target <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "p_target must lie in (0,1], got {}",
                self.p_target
            )));
        }
        if !(5.0..=15.0).contains(&self.c_circ) {
            return Err(Error::InvalidInput(format!(
                "c_circ must lie in [5,15], got {}",
                self.c_circ
            )));
        }
        let p_eff = self.p_eff();
        if !(0.0..1.0).contains(&p_eff) || p_eff == 0.0 {
            return Err(Error::InvalidInput(format!(
                "effective rate p_eff = {p_eff} must lie in (0,1)"
            )));
        }
        if self.d_c == 0 || self.n_l == 0 {
            return Err(Error::InvalidInput("d_C and N_L must be positive".into()));
        }
        Ok(())
    }

    /// Effective per-atom-per-step error rate C_circ * p_phys.
    pub fn p_eff(&self) -> f64 {
        self.c_circ * self.p_phys
    }

    /// Correctable errors t = floor((d_C - 1)/2).
    pub fn t(&self) -> u32 {
        (self.d_c - 1) / 2
    }
}

/// Closed-form syndrome interval: floor of
/// (t - sqrt(2 t ln(1/p_target))) / (d_C^2 p_eff), clamped at 0 when the
/// numerator is negative. Clamping keeps parameter sweeps total; the
/// composition step turns a zero into an explicit infeasibility.
pub fn k_max_chernoff(params: &FtParams) -> u64 {
    let t = params.t() as f64;
    let numerator = t - (2.0 * t * (1.0 / params.p_target).ln()).sqrt();
    if numerator <= 0.0 {
        return 0;
    }
    let denom = (params.d_c as f64).powi(2) * params.p_eff();
    (numerator / denom).floor() as u64
}

/// Result of the exact binomial scan; `capped` marks hitting the scan cap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KMaxExact {
    pub k_max: u64,
    pub capped: bool,
}

/// Largest K >= 0 such that P(X > t) <= p_target for
/// X ~ Binomial(K d_C^2, p_eff). Ascending scan with early exit; the upper
/// tail is monotone in K.
pub fn k_max_exact(params: &FtParams) -> KMaxExact {
    k_max_exact_capped(params, K_CAP_DEFAULT)
}

pub fn k_max_exact_capped(params: &FtParams, cap: u64) -> KMaxExact {
    if params.p_target >= 1.0 {
        return KMaxExact {
            k_max: cap,
            capped: true,
        };
    }
    let t = params.t() as u64;
    let s = (params.d_c as u64).pow(2);
    let p = params.p_eff();
    let mut k = 0u64;
    while k < cap {
        let tail = binomial_upper_tail((k + 1) * s, p, t);
        if tail > params.p_target {
            return KMaxExact {
                k_max: k,
                capped: false,
            };
        }
        k += 1;
    }
    KMaxExact {
        k_max: cap,
        capped: true,
    }
}

/// Exact upper tail P(X > t) for X ~ Binomial(n, p), by term recurrence from
/// k = t+1 with compensated (Kahan) summation. ln C(n, t+1) is accumulated
/// directly, so small t needs no lgamma.
pub fn binomial_upper_tail(n: u64, p: f64, t: u64) -> f64 {
    if t >= n {
        return 0.0;
    }
    let q = 1.0 - p;
    let k0 = t + 1;
    // ln C(n, k0) = sum_{i=0..k0-1} ln(n-i) - ln(i+1)
    let mut log_c = 0.0f64;
    for i in 0..k0 {
        log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    let log_term0 = log_c + (k0 as f64) * p.ln() + ((n - k0) as f64) * q.ln();

    // When the mean sits above k0 the tail is large; the recurrence below
    // still converges (ratios drop below 1 past the mode).
    let mut term = log_term0.exp();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    let mut k = k0;
    loop {
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if k == n {
            break;
        }
        let ratio = ((n - k) as f64) * p / (((k + 1) as f64) * q);
        term *= ratio;
        if term < sum * 1e-18 || term < 1e-308 {
            break;
        }
        k += 1;
    }
    sum.min(1.0)
}

/// Per-round logical error rate (p_eff / p_th)^((d_C+1)/2), with unit
/// leading constant.
pub fn logical_error_rate(params: &FtParams) -> f64 {
    let exponent = (params.d_c as f64 + 1.0) / 2.0;
    (params.p_eff() / params.p_th).powf(exponent)
}

/// Full budget: routing depth, per-round and total logical error, and both
/// syndrome-interval estimates.
#[derive(Debug, Clone, Serialize)]
pub struct FtBudget {
    pub p_eff: f64,
    pub t: u32,
    pub k_max_chernoff: u64,
    pub k_max_exact: KMaxExact,
    pub p_l: f64,
    /// Routing depth T = d_C * ceil(log2 N_L).
    pub t_routing: u64,
    /// min(1, N_L * T * p_L), the union-bound approximation.
    pub p_l_total: f64,
    /// 1 - (1 - p_L)^(N_L * T), the exact form.
    pub p_l_total_exact: f64,
}

/// Ceiling of log2(n) for n >= 1.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

pub fn total_logical_error(params: &FtParams) -> FtBudget {
    let p_l = logical_error_rate(params);
    let t_routing = params.d_c as u64 * ceil_log2(params.n_l as u64) as u64;
    let exposures = params.n_l as f64 * t_routing as f64;
    let p_l_total = (exposures * p_l).min(1.0);
    let p_l_total_exact = if p_l >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - p_l).powf(exposures)
    };
    FtBudget {
        p_eff: params.p_eff(),
        t: params.t(),
        k_max_chernoff: k_max_chernoff(params),
        k_max_exact: k_max_exact(params),
        p_l,
        t_routing,
        p_l_total,
        p_l_total_exact,
    }
}

/// Routing plus syndrome-extraction depth for stop-and-correct windows.
#[derive(Debug, Clone, Serialize)]
pub struct ComposedDepth {
    pub routing_rounds: u64,
    pub k_max: u64,
    pub windows: u64,
    pub syndrome_rounds: u64,
    pub total: u64,
    pub correlated: bool,
}

/// Composes the routing depth with syndrome extraction every K_max rounds:
/// windows = ceil(routing / K_max); each window costs one round under
/// correlated decoding and d_C rounds otherwise. Errors when K_max = 0.
pub fn compose_syndrome_budget(params: &FtParams, correlated: bool) -> Result<ComposedDepth> {
    let k_max = k_max_exact(params).k_max;
    let routing_rounds = params.d_c as u64 * ceil_log2(params.n_l as u64) as u64;
    compose_with_k_max(routing_rounds, k_max, params.d_c, correlated)
}

/// Window arithmetic with an explicit K_max.
pub fn compose_with_k_max(
    routing_rounds: u64,
    k_max: u64,
    d_c: u32,
    correlated: bool,
) -> Result<ComposedDepth> {
    if k_max == 0 {
        return Err(Error::BudgetInfeasible);
    }
    let windows = routing_rounds.div_ceil(k_max);
    let syndrome_rounds = windows * if correlated { 1 } else { d_c as u64 };
    Ok(ComposedDepth {
        routing_rounds,
        k_max,
        windows,
        syndrome_rounds,
        total: routing_rounds + syndrome_rounds,
        correlated,
    })
}

/// Qualitative regime of an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeLabel {
    Supercritical,
    AtThreshold,
    FtViable,
    StronglySuppressed,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeLabel::Supercritical => "supercritical",
            RegimeLabel::AtThreshold => "at threshold",
            RegimeLabel::FtViable => "FT-viable for d_C >= 5",
            RegimeLabel::StronglySuppressed => "strongly suppressed",
        };
        f.write_str(s)
    }
}

fn regime_label(ratio: f64) -> RegimeLabel {
    if ratio >= 2.0 {
        RegimeLabel::Supercritical
    } else if ratio >= 0.5 {
        RegimeLabel::AtThreshold
    } else if ratio > 0.02 {
        RegimeLabel::FtViable
    } else {
        RegimeLabel::StronglySuppressed
    }
}

/// One operating-point row: effective rate, threshold ratio, per-d_C
/// log10(p_L) (absent when there is no suppression), regime label, and an
/// optional discrepancy note.
#[derive(Debug, Clone, Serialize)]
pub struct OperatingPoint {
    pub p_phys: f64,
    pub p_eff: f64,
    pub ratio: f64,
    /// (d_C, log10 p_L); `None` when ratio >= 1 (no suppression).
    pub log10_p_l: Vec<(u32, Option<f64>)>,
    pub regime: RegimeLabel,
    pub note: Option<String>,
}

/// Reference-row exponents for p_phys = 1e-5 that follow the p_phys/p_th
/// ratio instead of p_eff/p_th. Kept as a flagged note, not matched.
const REFERENCE_1E5_ROW: &str = "reference row lists exponents -9/-12 (d_C=5/7), which track \
     p_phys/p_th; computed from p_eff/p_th they are -6/-8; flagged, not matched";

/// Operating-point table over physical error rates and code distances, with
/// C_circ = 10 fixed.
pub fn operating_point_table(p_phys_rows: &[f64], d_c_set: &[u32]) -> Vec<OperatingPoint> {
    p_phys_rows
        .iter()
        .map(|&p_phys| {
            let p_eff = 10.0 * p_phys;
            let ratio = p_eff / 1e-2;
            let log10_p_l = d_c_set
                .iter()
                .map(|&d_c| {
                    let value = (ratio < 1.0).then(|| {
                        let exponent = (d_c as f64 + 1.0) / 2.0;
                        exponent * ratio.log10()
                    });
                    (d_c, value)
                })
                .collect();
            let note = ((p_phys - 1e-5).abs() < 1e-17).then(|| REFERENCE_1E5_ROW.to_string());
            OperatingPoint {
                p_phys,
                p_eff,
                ratio,
                log10_p_l,
                regime: regime_label(ratio),
                note,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p_phys: f64, d_c: u32, n_l: u32, p_target: f64) -> FtParams {
        FtParams::new(p_phys, d_c, n_l, p_target).unwrap()
    }

    #[test]
    fn chernoff_clamps_negative_numerator() {
        // t=2, sqrt(4 ln 1e9) = 9.10 > 2.
        let p = params(1e-4, 5, 100, 1e-9);
        assert!((p.p_eff() - 1e-3).abs() < 1e-18);
        assert_eq!(k_max_chernoff(&p), 0);
    }

    #[test]
    fn chernoff_limit_p_target_one() {
        let p = params(1e-4, 5, 100, 1.0);
        // ln(1) = 0: floor(2 / 0.025) = 80.
        assert_eq!(k_max_chernoff(&p), 80);
    }

    #[test]
    fn chernoff_zero_numerator() {
        // t=1, p_target = e^{-1/2}: numerator exactly 0.
        let p = params(1e-4, 3, 8, (-0.5f64).exp());
        assert_eq!(k_max_chernoff(&p), 0);
    }

    #[test]
    fn binomial_tail_exact_small_case() {
        // P(Bin(9, 0.5) > 1) = 502/512.
        let tail = binomial_upper_tail(9, 0.5, 1);
        assert!((tail - 502.0 / 512.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_tail_matches_direct_summation() {
        for &(n, p, t) in &[
            (20u64, 0.3f64, 4u64),
            (50, 0.02, 2),
            (9, 0.5, 0),
            (12, 0.9, 8),
        ] {
            let direct: f64 = (t + 1..=n)
                .map(|k| {
                    let mut c = 0.0f64;
                    for i in 0..k {
                        c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
                    }
                    (c + (k as f64) * p.ln() + ((n - k) as f64) * (1.0 - p).ln()).exp()
                })
                .sum();
            let tail = binomial_upper_tail(n, p, t);
            assert!((tail - direct).abs() < 1e-12, "n={n} p={p} t={t}");
        }
    }

    #[test]
    fn k_max_exact_examples() {
        // Bin(9, 0.5): P(X > 1) = 0.98 > 0.25 already at K=1.
        let p = FtParams::new(0.05, 3, 8, 0.25).unwrap();
        assert!((p.p_eff() - 0.5).abs() < 1e-15);
        let exact = k_max_exact(&p);
        assert_eq!(exact.k_max, 0);
        assert!(!exact.capped);

        // p_target = 1: capped at the configured limit.
        let p = params(1e-4, 5, 100, 1.0);
        let exact = k_max_exact_capped(&p, 1000);
        assert_eq!(exact.k_max, 1000);
        assert!(exact.capped);

        // Worked discrepancy point: both estimates collapse to zero.
        let p = params(1e-4, 5, 100, 1e-9);
        let exact = k_max_exact(&p);
        assert_eq!(exact.k_max, 0);
        assert!(exact.k_max >= k_max_chernoff(&p));
    }

    #[test]
    fn chernoff_below_exact_on_grid() {
        // Chernoff is an upper bound on the tail, so its admissible window
        // can only be shorter.
        let mut checked = 0;
        for &d_c in &[3u32, 5, 7, 9, 11] {
            for i in 0..10 {
                let p_eff = 10f64.powf(-5.0 + 3.0 * (i as f64) / 9.0);
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
                        checked += 1;
                        let exact = k_max_exact_capped(&p, 10_000_000);
                        assert!(
                            chern <= exact.k_max,
                            "chernoff {chern} > exact {} at d_C={d_c} p_eff={p_eff} p_target={p_target}",
                            exact.k_max
                        );
                    }
                }
            }
        }
        assert!(checked >= 30, "grid too sparse: {checked} points");
    }

    #[test]
    fn logical_error_rate_worked_values() {
        let p = params(1e-4, 7, 100, 1e-9);
        assert!((logical_error_rate(&p) - 1e-4).abs() < 1e-12);

        let p9 = params(1e-4, 9, 100, 1e-9);
        assert!((logical_error_rate(&p9) - 1e-5).abs() < 1e-13);

        // p_eff = p_th: p_L = 1 for any d_C.
        let at = FtParams {
            p_phys: 1e-3,
            c_circ: 10.0,
            p_th: 1e-2,
            d_c: 11,
            n_l: 16,
            p_target: 1e-9,
        };
        assert!((logical_error_rate(&at) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_of_logical_error_rate() {
        // Increasing in p_eff.
        let mut last = 0.0;
        for i in 1..10 {
            let p = FtParams {
                p_phys: i as f64 * 1e-5,
                c_circ: 10.0,
                p_th: 1e-2,
                d_c: 7,
                n_l: 16,
                p_target: 1e-9,
            };
            let v = logical_error_rate(&p);
            assert!(v > last);
            last = v;
        }
        // Decreasing in d_C below threshold.
        let mut last = f64::INFINITY;
        for d_c in [3, 5, 7, 9, 11] {
            let p = params(1e-4, d_c, 16, 1e-9);
            let v = logical_error_rate(&p);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn total_logical_error_worked_examples() {
        let b = total_logical_error(&params(1e-4, 7, 100, 1e-9));
        assert_eq!(b.t_routing, 49);
        assert!((b.p_l - 1e-4).abs() < 1e-12);
        assert!((b.p_l_total - 0.49).abs() < 1e-10);

        let b9 = total_logical_error(&params(1e-4, 9, 100, 1e-9));
        assert_eq!(b9.t_routing, 63);
        assert!((b9.p_l_total - 0.063).abs() < 1e-10);
    }

    #[test]
    fn approximation_close_to_exact_when_small() {
        for &(p_phys, d_c, n_l) in &[(1e-5, 7u32, 100u32), (1e-4, 9, 16), (3e-5, 5, 8)] {
            let b = total_logical_error(&params(p_phys, d_c, n_l, 1e-9));
            if b.p_l_total <= 0.1 && b.p_l_total > 0.0 {
                let rel = (b.p_l_total - b.p_l_total_exact).abs() / b.p_l_total;
                assert!(rel < 0.10, "rel error {rel}");
            }
        }
    }

    #[test]
    fn compose_window_arithmetic() {
        let c = compose_with_k_max(49, 23, 7, true).unwrap();
        assert_eq!(c.windows, 3);
        assert_eq!(c.syndrome_rounds, 3);
        assert_eq!(c.total, 52);

        let u = compose_with_k_max(49, 23, 7, false).unwrap();
        assert_eq!(u.syndrome_rounds, 21);
        assert_eq!(u.total, 70);

        assert!(matches!(
            compose_with_k_max(49, 0, 7, true),
            Err(Error::BudgetInfeasible)
        ));
    }

    #[test]
    fn compose_uses_exact_k_max() {
        // At these rates the exact oracle gives a positive window.
        let p = params(1e-5, 7, 100, 1e-3);
        let exact = k_max_exact(&p);
        assert!(exact.k_max >= 1, "k_max_exact = {}", exact.k_max);
        let c = compose_syndrome_budget(&p, true).unwrap();
        assert_eq!(c.k_max, exact.k_max);

        // Infeasible point propagates the error.
        let bad = params(1e-4, 5, 100, 1e-9);
        assert!(matches!(
            compose_syndrome_budget(&bad, true),
            Err(Error::BudgetInfeasible)
        ));
    }

    #[test]
    fn operating_points_reproduce_reference_rows() {
        let table = operating_point_table(&[5e-3, 1e-3, 1e-4, 1e-5], &[5, 7, 9]);
        let labels: Vec<RegimeLabel> = table.iter().map(|r| r.regime).collect();
        assert_eq!(
            labels,
            vec![
                RegimeLabel::Supercritical,
                RegimeLabel::AtThreshold,
                RegimeLabel::FtViable,
                RegimeLabel::StronglySuppressed
            ]
        );
        // 1e-4 row: exponents -3/-4/-5.
        let row = &table[2];
        let exps: Vec<i64> = row
            .log10_p_l
            .iter()
            .map(|(_, v)| v.unwrap().round() as i64)
            .collect();
        assert_eq!(exps, vec![-3, -4, -5]);
        assert!(row.note.is_none());
        // 1e-5 row is flagged, not matched.
        assert!(table[3].note.is_some());
        let exps5: Vec<i64> = table[3]
            .log10_p_l
            .iter()
            .map(|(_, v)| v.unwrap().round() as i64)
            .collect();
        assert_eq!(exps5, vec![-6, -8, -10]);
        // Rows at or above threshold report no suppression.
        assert!(table[0].log10_p_l.iter().all(|(_, v)| v.is_none()));
        assert!(table[1].log10_p_l.iter().all(|(_, v)| v.is_none()));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(ceil_log2(100), 7);
    }

    #[test]
    fn params_validation() {
        assert!(FtParams::new(0.0, 7, 8, 1e-9).is_err());
        assert!(FtParams::new(1e-3, 0, 8, 1e-9).is_err());
        assert!(FtParams::new(1e-3, 7, 8, 0.0).is_err());
        assert!(FtParams::new(1e-3, 7, 8, 1e-9)
            .unwrap()
            .with_c_circ(20.0)
            .is_err());
        // p_eff must stay below 1: p_phys = 0.2 with c_circ 10 fails.
        assert!(FtParams::new(0.2, 7, 8, 1e-9).is_err());
    }
}
