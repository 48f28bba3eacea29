//! Valiant two-phase block routing on the quotient graph: congestion and
//! dilation accounting, greedy matching scheduling, and serialization of a
//! single block hop into physical matchings.

mod hop;

pub use hop::{decompose_hop_into_matchings, plan_block_hop, sample_hop_target, AtomMove, HopPlan};

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quotient::QuotientGraph;

const STREAM_SIGMA: u64 = 0xB10C_0003;

/// One block advancing one hop within a scheduled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMove {
    pub block: u32,
    pub from: u32,
    pub to: u32,
}

/// Result of a two-phase routing instance on the quotient graph.
///
/// Congestion C_Q is the maximum combined (scatter plus gather) load on an
/// undirected support edge. Dilation D_Q is the maximum length of a single
/// routed leg. The physical-depth estimate is d_C * (C_Q + D_Q).
#[derive(Debug, Clone)]
pub struct RoutingOutcome {
    /// Target permutation pi.
    pub permutation: Vec<u32>,
    /// Random intermediate permutation sigma.
    pub intermediate: Vec<u32>,
    /// Per-block shortest path i -> sigma(i), vertex sequence incl. endpoints.
    pub scatter_paths: Vec<Vec<u32>>,
    /// Per-block shortest path sigma(i) -> pi(i).
    pub gather_paths: Vec<Vec<u32>>,
    /// Combined traversal count per undirected support edge (u < v keys).
    pub edge_loads: BTreeMap<(u32, u32), u32>,
    /// C_Q: max combined edge load.
    pub congestion: u32,
    /// D_Q: max single-leg path length.
    pub dilation: u32,
    /// Max over blocks of scatter + gather length (diagnostic).
    pub max_block_path: u32,
    /// d_C * (C_Q + D_Q).
    pub t_physical: u64,
    /// Greedy matching schedule, filled by [`schedule_greedy`].
    pub schedule: Option<Vec<Vec<BlockMove>>>,
}

impl RoutingOutcome {
    /// Scheduled step count T_sched; 0 when the schedule is empty.
    pub fn t_sched(&self) -> Option<u32> {
        self.schedule.as_ref().map(|s| s.len() as u32)
    }
}

/// Routes a target permutation through a uniformly random intermediate
/// permutation drawn from `seed` by Fisher-Yates.
pub fn valiant_route(q: &QuotientGraph, pi: &[u32], seed: u64) -> Result<RoutingOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_SIGMA);
    let mut sigma: Vec<u32> = (0..q.n_blocks() as u32).collect();
    sigma.shuffle(&mut rng);
    valiant_route_with_sigma(q, pi, &sigma)
}

/// Two-phase routing with an explicit intermediate permutation (test hook).
pub fn valiant_route_with_sigma(
    q: &QuotientGraph,
    pi: &[u32],
    sigma: &[u32],
) -> Result<RoutingOutcome> {
    let n = q.n_blocks();
    validate_permutation(pi, n, "pi")?;
    validate_permutation(sigma, n, "sigma")?;

    let mut trees: HashMap<u32, ShortestPathTree> = HashMap::new();
    let mut tree = |dst: u32| -> ShortestPathTree {
        trees
            .entry(dst)
            .or_insert_with(|| ShortestPathTree::new(q, dst))
            .clone()
    };

    let mut scatter_paths = Vec::with_capacity(n);
    let mut gather_paths = Vec::with_capacity(n);
    let mut edge_loads: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut dilation = 0u32;
    let mut max_block_path = 0u32;

    for i in 0..n as u32 {
        let scatter = tree(sigma[i as usize]).path_from(i)?;
        let gather = tree(pi[i as usize]).path_from(sigma[i as usize])?;
        let leg_s = scatter.len() as u32 - 1;
        let leg_g = gather.len() as u32 - 1;
        dilation = dilation.max(leg_s).max(leg_g);
        max_block_path = max_block_path.max(leg_s + leg_g);
        for path in [&scatter, &gather] {
            for w in path.windows(2) {
                let key = (w[0].min(w[1]), w[0].max(w[1]));
                *edge_loads.entry(key).or_insert(0) += 1;
            }
        }
        scatter_paths.push(scatter);
        gather_paths.push(gather);
    }

    let congestion = edge_loads.values().copied().max().unwrap_or(0);
    let t_physical = q.code_distance() as u64 * (congestion as u64 + dilation as u64);

    Ok(RoutingOutcome {
        permutation: pi.to_vec(),
        intermediate: sigma.to_vec(),
        scatter_paths,
        gather_paths,
        edge_loads,
        congestion,
        dilation,
        max_block_path,
        t_physical,
        schedule: None,
    })
}

fn validate_permutation(p: &[u32], n: usize, name: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidInput(format!(
            "{name} has length {}, expected {n}",
            p.len()
        )));
    }
    let mut seen = vec![false; n];
    for &x in p {
        if (x as usize) >= n || seen[x as usize] {
            return Err(Error::InvalidInput(format!(
                "{name} is not a permutation of 0..{n}"
            )));
        }
        seen[x as usize] = true;
    }
    Ok(())
}

/// BFS tree rooted at the destination. Parents point one hop closer to the
/// destination; ties broken toward the smallest vertex id, so paths are
/// deterministic for a fixed support graph.
#[derive(Clone)]
struct ShortestPathTree {
    dst: u32,
    dist: Vec<u32>,
    parent: Vec<u32>,
}

impl ShortestPathTree {
    fn new(q: &QuotientGraph, dst: u32) -> Self {
        let n = q.n_blocks();
        let mut dist = vec![u32::MAX; n];
        dist[dst as usize] = 0;
        let mut queue = VecDeque::from([dst]);
        while let Some(u) = queue.pop_front() {
            for &w in q.support(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        // Smallest-id neighbor one hop closer; support lists are sorted.
        let mut parent = vec![u32::MAX; n];
        for v in 0..n as u32 {
            if dist[v as usize] == u32::MAX || v == dst {
                continue;
            }
            for &w in q.support(v) {
                if dist[w as usize] + 1 == dist[v as usize] {
                    parent[v as usize] = w;
                    break;
                }
            }
        }
        ShortestPathTree { dst, dist, parent }
    }

    fn path_from(&self, src: u32) -> Result<Vec<u32>> {
        if self.dist[src as usize] == u32::MAX {
            return Err(Error::QuotientDisconnected {
                n_blocks: self.dist.len(),
                reachable: self.dist.iter().filter(|&&d| d != u32::MAX).count(),
            });
        }
        let mut path = vec![src];
        let mut v = src;
        while v != self.dst {
            v = self.parent[v as usize];
            path.push(v);
        }
        Ok(path)
    }
}

/// Greedily advances a maximal set of blocks one hop per step along their
/// residual scatter-then-gather paths, subject to unit capacity per support
/// edge and at most one block entering any supervertex per step. Fills
/// `outcome.schedule`.
pub fn schedule_greedy(mut outcome: RoutingOutcome) -> Result<RoutingOutcome> {
    let n = outcome.permutation.len();
    // Residual full path per block: scatter then gather, junction deduplicated.
    let mut paths: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = outcome.scatter_paths[i].clone();
        p.extend_from_slice(&outcome.gather_paths[i][1..]);
        paths.push(p);
    }
    let mut pos = vec![0usize; n];
    let mut schedule = Vec::new();

    loop {
        let pending: Vec<usize> = (0..n).filter(|&i| pos[i] + 1 < paths[i].len()).collect();
        if pending.is_empty() {
            break;
        }
        let mut step = Vec::new();
        let mut used_edges = std::collections::HashSet::new();
        let mut entered = std::collections::HashSet::new();
        for &i in &pending {
            let from = paths[i][pos[i]];
            let to = paths[i][pos[i] + 1];
            let key = (from.min(to), from.max(to));
            if used_edges.contains(&key) || entered.contains(&to) {
                continue;
            }
            used_edges.insert(key);
            entered.insert(to);
            step.push(BlockMove {
                block: i as u32,
                from,
                to,
            });
            pos[i] += 1;
        }
        if step.is_empty() {
            return Err(Error::ScheduleStalled {
                remaining: pending.len(),
            });
        }
        schedule.push(step);
    }

    outcome.schedule = Some(schedule);
    Ok(outcome)
}

/// Machine-checks a routed (and optionally scheduled) outcome:
/// paths are support-valid shortest paths, loads account exactly, schedule
/// steps are edge-disjoint single-entry matchings, all blocks are delivered
/// to pi, and T_sched >= max(C_Q, D_Q).
pub fn validate_schedule(q: &QuotientGraph, outcome: &RoutingOutcome) -> Result<()> {
    let n = q.n_blocks();

    // Shortest-path audit against independent BFS distances.
    let mut total_len = 0u64;
    for i in 0..n as u32 {
        for (path, from, to) in [
            (
                &outcome.scatter_paths[i as usize],
                i,
                outcome.intermediate[i as usize],
            ),
            (
                &outcome.gather_paths[i as usize],
                outcome.intermediate[i as usize],
                outcome.permutation[i as usize],
            ),
        ] {
            if path.first() != Some(&from) || path.last() != Some(&to) {
                return Err(Error::InvariantViolated(format!(
                    "path of block {i} has wrong endpoints"
                )));
            }
            for w in path.windows(2) {
                if !q.support_has_edge(w[0], w[1]) {
                    return Err(Error::InvariantViolated(format!(
                        "path of block {i} uses non-support edge ({},{})",
                        w[0], w[1]
                    )));
                }
            }
            let dist = bfs_distance(q, from, to);
            if path.len() as u32 - 1 != dist {
                return Err(Error::InvariantViolated(format!(
                    "path of block {i} has length {} but BFS distance is {dist}",
                    path.len() - 1
                )));
            }
            total_len += path.len() as u64 - 1;
        }
    }

    // Load accounting: sum of loads equals sum of path lengths.
    let load_sum: u64 = outcome.edge_loads.values().map(|&c| c as u64).sum();
    if load_sum != total_len {
        return Err(Error::InvariantViolated(format!(
            "edge loads sum to {load_sum}, path lengths to {total_len}"
        )));
    }
    if outcome.congestion != outcome.edge_loads.values().copied().max().unwrap_or(0) {
        return Err(Error::InvariantViolated("C_Q is not the max load".into()));
    }

    let Some(schedule) = &outcome.schedule else {
        return Ok(());
    };

    let mut position: Vec<u32> = (0..n as u32).collect();
    for (t, step) in schedule.iter().enumerate() {
        let mut used_edges = std::collections::HashSet::new();
        let mut entered = std::collections::HashSet::new();
        let mut moved = std::collections::HashSet::new();
        for mv in step {
            if !moved.insert(mv.block) {
                return Err(Error::InvariantViolated(format!(
                    "block {} moves twice in step {t}",
                    mv.block
                )));
            }
            if position[mv.block as usize] != mv.from {
                return Err(Error::InvariantViolated(format!(
                    "block {} moves from {} but sits at {}",
                    mv.block, mv.from, position[mv.block as usize]
                )));
            }
            if !q.support_has_edge(mv.from, mv.to) {
                return Err(Error::InvariantViolated(format!(
                    "step {t} moves block {} along a non-support edge",
                    mv.block
                )));
            }
            let key = (mv.from.min(mv.to), mv.from.max(mv.to));
            if !used_edges.insert(key) {
                return Err(Error::InvariantViolated(format!(
                    "step {t} reuses support edge ({},{})",
                    key.0, key.1
                )));
            }
            if !entered.insert(mv.to) {
                return Err(Error::InvariantViolated(format!(
                    "step {t} moves two blocks into supervertex {}",
                    mv.to
                )));
            }
            position[mv.block as usize] = mv.to;
        }
    }
    for i in 0..n {
        if position[i] != outcome.permutation[i] {
            return Err(Error::InvariantViolated(format!(
                "block {i} delivered to {} instead of {}",
                position[i], outcome.permutation[i]
            )));
        }
    }

    let t_sched = schedule.len() as u32;
    if t_sched < outcome.congestion.max(outcome.dilation) {
        return Err(Error::InvariantViolated(format!(
            "T_sched {t_sched} below max(C_Q, D_Q) = {}",
            outcome.congestion.max(outcome.dilation)
        )));
    }
    Ok(())
}

fn bfs_distance(q: &QuotientGraph, from: u32, to: u32) -> u32 {
    if from == to {
        return 0;
    }
    let n = q.n_blocks();
    let mut dist = vec![u32::MAX; n];
    dist[from as usize] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in q.support(u) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                if w == to {
                    return dist[w as usize];
                }
                queue.push_back(w);
            }
        }
    }
    u32::MAX
}
