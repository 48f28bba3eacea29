//! Weighted quotient graph over a block configuration, its spectral ratio,
//! and the high-connectivity regime arithmetic.

use std::collections::VecDeque;

use serde::Serialize;

use crate::blocks::BlockConfiguration;
use crate::error::{Error, Result};
use crate::graphs::HostGraph;
use crate::spectral::{self, DenseSym, SpectralOptions, SpectralSummary};

/// Below this fraction of the loose threshold the verdict is "no";
/// between it and the threshold, "marginal".
pub const MARGINAL_RATIO: f64 = 0.8;

/// Weighted supervertex graph: one node per block, weight = inter-block host
/// edge count normalized by sqrt(|B_i||B_j|) (count/s for uniform blocks).
#[derive(Debug, Clone)]
pub struct QuotientGraph {
    weights: Vec<Vec<f64>>,
    support: Vec<Vec<u32>>,
    avg_degree: f64,
    spectral: SpectralSummary,
    diameter: u32,
    block_size: usize,
    code_distance: u32,
}

impl QuotientGraph {
    /// Builds a quotient directly from a weight matrix (symmetric, zero
    /// diagonal). Used for synthetic quotients in tests and by
    /// [`build_quotient`].
    pub fn from_weights(
        weights: Vec<Vec<f64>>,
        block_size: usize,
        code_distance: u32,
        opts: &SpectralOptions,
    ) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(Error::InvalidInput("quotient needs >= 2 blocks".into()));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "weight row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight diagonal must be zero, got {} at {i}",
                    row[i]
                )));
            }
            if row.iter().any(|&w| w < 0.0) {
                return Err(Error::InvalidInput(format!("negative weight in row {i}")));
            }
        }
        let dense = DenseSym::from_rows(&weights)?;

        let support: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && weights[i][j] > 0.0)
                    .map(|j| j as u32)
                    .collect()
            })
            .collect();

        let (diameter, reachable) = support_diameter(&support);
        if reachable != n {
            return Err(Error::QuotientDisconnected {
                n_blocks: n,
                reachable,
            });
        }

        let avg_degree = weights
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .sum::<f64>()
            / n as f64;
        let spectral = spectral::spectral_ratio(&dense, avg_degree, opts)?;

        Ok(QuotientGraph {
            weights,
            support,
            avg_degree,
            spectral,
            diameter,
            block_size,
            code_distance,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight(&self, i: u32, j: u32) -> f64 {
        self.weights[i as usize][j as usize]
    }

    /// Unweighted support adjacency (sorted).
    pub fn support(&self, i: u32) -> &[u32] {
        &self.support[i as usize]
    }

    pub fn support_has_edge(&self, i: u32, j: u32) -> bool {
        self.support[i as usize].binary_search(&j).is_ok()
    }

    pub fn support_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.support.iter().enumerate().flat_map(|(i, list)| {
            let i = i as u32;
            list.iter()
                .copied()
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    /// Average row sum d'_Q.
    pub fn avg_degree(&self) -> f64 {
        self.avg_degree
    }

    pub fn spectral(&self) -> &SpectralSummary {
        &self.spectral
    }

    /// Spectral ratio beta_Q = lambda*/d'_Q.
    pub fn beta(&self) -> f64 {
        self.spectral
            .beta
            .expect("quotient spectral ratio is always filled")
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn code_distance(&self) -> u32 {
        self.code_distance
    }

    /// Spectral diameter bound ceil(log N_L / log(1/beta_Q)) + 2, times a
    /// slack factor. Meaningful only when beta_Q < 1.
    pub fn diameter_bound(&self, slack: u32) -> Option<u32> {
        let beta = self.beta();
        if !(0.0..1.0).contains(&beta) {
            return None;
        }
        let n = self.n_blocks() as f64;
        let base = if beta == 0.0 {
            1.0
        } else {
            (n.ln() / (1.0 / beta).ln()).ceil()
        };
        Some(slack * (base as u32 + 2))
    }

    /// Symmetry/support audit: weights symmetric with zero diagonal, support
    /// exactly the positive-weight pairs, and the host-edge condition when a
    /// host and configuration are supplied.
    pub fn validate(&self, host_cfg: Option<(&HostGraph, &BlockConfiguration)>) -> Result<()> {
        let n = self.n_blocks();
        for i in 0..n {
            if self.weights[i][i] != 0.0 {
                return Err(Error::InvariantViolated(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if self.weights[i][j] != self.weights[j][i] {
                    return Err(Error::InvariantViolated(format!(
                        "asymmetric weights at ({i},{j})"
                    )));
                }
                if i != j && (self.weights[i][j] > 0.0) != self.support_has_edge(i as u32, j as u32)
                {
                    return Err(Error::InvariantViolated(format!(
                        "support disagrees with weights at ({i},{j})"
                    )));
                }
            }
        }
        if let Some((g, cfg)) = host_cfg {
            // Support edge iff some host edge joins the two blocks, which
            // implies set distance 1 <= g+1.
            let mut counts = vec![vec![0u32; n]; n];
            for (u, v) in g.edges() {
                if let (Some(a), Some(b)) = (cfg.owner(u), cfg.owner(v)) {
                    if a != b {
                        counts[a as usize][b as usize] += 1;
                        counts[b as usize][a as usize] += 1;
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if (counts[i][j] > 0) != self.support_has_edge(i as u32, j as u32) {
                        return Err(Error::InvariantViolated(format!(
                            "support edge ({i},{j}) disagrees with host adjacency"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn support_diameter(support: &[Vec<u32>]) -> (u32, usize) {
    let n = support.len();
    let mut diameter = 0;
    let mut reachable = 0;
    // BFS from vertex 0 establishes connectivity; eccentricity maximized over
    // all sources gives the diameter (n is small).
    for src in 0..n as u32 {
        let mut dist = vec![u32::MAX; n];
        dist[src as usize] = 0;
        let mut q = VecDeque::from([src]);
        let mut seen = 1;
        let mut ecc = 0;
        while let Some(u) = q.pop_front() {
            for &w in &support[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    ecc = ecc.max(dist[w as usize]);
                    seen += 1;
                    q.push_back(w);
                }
            }
        }
        if src == 0 {
            reachable = seen;
            if seen != n {
                return (0, reachable);
            }
        }
        diameter = diameter.max(ecc);
    }
    (diameter, reachable)
}

/// General normalized quotient D_B^{-1/2} S^T A S D_B^{-1/2} of a host under
/// a vertex partition (blocks need not be uniform).
pub fn normalized_quotient(g: &HostGraph, blocks: &[Vec<u32>]) -> Vec<Vec<f64>> {
    let n = blocks.len();
    let mut owner = vec![None; g.n_vertices()];
    for (i, b) in blocks.iter().enumerate() {
        for &v in b {
            owner[v as usize] = Some(i);
        }
    }
    let mut counts = vec![vec![0u64; n]; n];
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (owner[u as usize], owner[v as usize]) {
            if a != b {
                counts[a][b] += 1;
                counts[b][a] += 1;
            }
        }
    }
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && counts[i][j] > 0 {
                let norm = ((blocks[i].len() as f64) * (blocks[j].len() as f64)).sqrt();
                weights[i][j] = counts[i][j] as f64 / norm;
            }
        }
    }
    weights
}

/// Builds the weighted quotient of a block configuration with default
/// spectral options.
pub fn build_quotient(g: &HostGraph, cfg: &BlockConfiguration) -> Result<QuotientGraph> {
    build_quotient_with(g, cfg, &SpectralOptions::default())
}

/// [`build_quotient`] with explicit eigensolver controls.
pub fn build_quotient_with(
    g: &HostGraph,
    cfg: &BlockConfiguration,
    opts: &SpectralOptions,
) -> Result<QuotientGraph> {
    let weights = normalized_quotient(g, cfg.blocks());
    let q = QuotientGraph::from_weights(weights, cfg.block_size(), cfg.code_distance(), opts)?;
    debug_assert!(q.validate(Some((g, cfg))).is_ok());
    Ok(q)
}

/// High-connectivity regime thresholds and verdicts for a host degree.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeVerdict {
    /// d_C^2 (r-1) / (1 - beta)
    pub loose_threshold: f64,
    /// d_C (r-1) / (1 - beta)
    pub tight_threshold: f64,
    pub in_loose: bool,
    pub in_tight: bool,
    pub d_prime: u32,
}

impl RegimeVerdict {
    /// Three-way label against the loose threshold: "yes" above it,
    /// "marginal" within [`MARGINAL_RATIO`] of it, "no" otherwise.
    pub fn label(&self) -> &'static str {
        if self.in_loose {
            "yes"
        } else if (self.d_prime as f64) > MARGINAL_RATIO * self.loose_threshold {
            "marginal"
        } else {
            "no"
        }
    }
}

/// Evaluates both regime thresholds at a measured host spectral ratio.
pub fn regime_check(d_prime: u32, d_c: u32, r: u32, beta_host: f64) -> Result<RegimeVerdict> {
    if !(0.0..1.0).contains(&beta_host) {
        return Err(Error::InvalidInput(format!(
            "beta_host must lie in [0,1), got {beta_host}"
        )));
    }
    let dc = d_c as f64;
    let rm1 = (r - 1) as f64;
    let loose = dc * dc * rm1 / (1.0 - beta_host);
    let tight = dc * rm1 / (1.0 - beta_host);
    Ok(RegimeVerdict {
        loose_threshold: loose,
        tight_threshold: tight,
        in_loose: (d_prime as f64) > loose,
        in_tight: (d_prime as f64) > tight,
        d_prime,
    })
}

/// Smallest base degree d such that d' = d(r-1) clears the tight regime
/// threshold with the Ramanujan-saturating ratio beta = 2 sqrt(d'-1)/d'.
pub fn min_degree_for_regime(d_c: u32, r: u32) -> u32 {
    min_degree_scan(d_c, r, false)
}

/// Loose-form variant of [`min_degree_for_regime`], with threshold
/// d_C^2 (r-1)/(1-beta).
pub fn min_degree_for_regime_loose(d_c: u32, r: u32) -> u32 {
    min_degree_scan(d_c, r, true)
}

fn min_degree_scan(d_c: u32, r: u32, loose: bool) -> u32 {
    assert!(d_c >= 2 && r >= 3, "need d_C >= 2 and r >= 3");
    for d in 2u32.. {
        let d_prime = d * (r - 1);
        if d_prime < 3 {
            continue;
        }
        let beta = spectral::alon_boppana_reference(d_prime);
        if beta >= 1.0 {
            continue;
        }
        let dc = d_c as f64;
        let rm1 = (r - 1) as f64;
        let threshold = if loose {
            dc * dc * rm1 / (1.0 - beta)
        } else {
            dc * rm1 / (1.0 - beta)
        };
        if (d_prime as f64) > threshold {
            return d;
        }
    }
    unreachable!("threshold is eventually cleared: beta -> 0 as d grows")
}

/// Sweep-cut certificate that quotient expansion lifts to a host cut.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerCheck {
    /// Best sweep-cut conductance found on the quotient support.
    pub quotient_conductance: f64,
    /// Host conductance of the lifted cut.
    pub host_conductance: f64,
    /// (1 - beta_host)/2, the Cheeger guarantee for the host.
    pub host_bound: f64,
}

/// Lifts the best lambda_2 sweep cut of the quotient to the host and
/// measures both conductances. The host conductance of the lifted cut must
/// sit above (1-beta_host)/2 up to the caller's tolerance.
pub fn lifted_cheeger_check(
    g: &HostGraph,
    cfg: &BlockConfiguration,
    q: &QuotientGraph,
    beta_host: f64,
) -> Result<CheegerCheck> {
    let dense = DenseSym::from_rows(q.weights())?;
    let (_, fiedler) = spectral::lambda2_eigenpair(&dense, &SpectralOptions::default())?;
    let n = q.n_blocks();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fiedler[a].partial_cmp(&fiedler[b]).unwrap());

    // Weighted sweep over prefixes.
    let total_weight: f64 = q.weights().iter().flatten().sum::<f64>() / 2.0;
    let mut in_cut = vec![false; n];
    let mut cut_weight = 0.0;
    let mut side_weight = 0.0;
    let mut best = (f64::INFINITY, 0usize);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for j in 0..n {
            if j != v {
                if in_cut[j] {
                    cut_weight -= q.weights()[v][j];
                } else {
                    cut_weight += q.weights()[v][j];
                }
            }
        }
        in_cut[v] = true;
        side_weight += q.weights()[v].iter().sum::<f64>();
        let vol = side_weight.min(2.0 * total_weight - side_weight);
        if vol > 0.0 {
            let cond = cut_weight / vol;
            if cond < best.0 {
                best = (cond, k + 1);
            }
        }
    }

    // Lift: union of blocks on the smaller-indexed side of the best sweep.
    let cut_blocks: Vec<usize> = order[..best.1].to_vec();
    let mut in_t = vec![false; g.n_vertices()];
    let mut t_size = 0usize;
    for &b in &cut_blocks {
        for &v in cfg.block(b as u32) {
            in_t[v as usize] = true;
            t_size += 1;
        }
    }
    let mut cut_edges = 0u64;
    for (u, v) in g.edges() {
        if in_t[u as usize] != in_t[v as usize] {
            cut_edges += 1;
        }
    }
    let d_prime = g
        .degree()
        .ok_or_else(|| Error::InvalidInput("cheeger lift needs a regular host".into()))?
        as f64;
    let occupied = cfg.n_blocks() * cfg.block_size();
    let t_small = t_size.min(occupied - t_size).max(1);
    let host_conductance = cut_edges as f64 / (d_prime * t_small as f64);

    Ok(CheegerCheck {
        quotient_conductance: best.0,
        host_conductance,
        host_bound: (1.0 - beta_host) / 2.0,
    })
}
