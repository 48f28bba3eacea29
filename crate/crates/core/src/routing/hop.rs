//! Physical serialization of one block hop: optimal atom-to-target
//! assignment, per-atom shortest paths, and decomposition of the move set
//! into edge-disjoint matching rounds.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blocks::BlockConfiguration;
use crate::error::{Error, Result};
use crate::graphs::{bfs_distances, HostGraph, UNREACHABLE};

const STREAM_HOP: u64 = 0xB10C_0004;

/// One atom's move: its source vertex and the host path to its target
/// (vertex sequence including both endpoints; a single vertex if stationary).
#[derive(Debug, Clone)]
pub struct AtomMove {
    pub from: u32,
    pub path: Vec<u32>,
}

impl AtomMove {
    pub fn target(&self) -> u32 {
        *self.path.last().expect("paths include their endpoints")
    }

    pub fn len(&self) -> usize {
        self.path.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.path.len() <= 1
    }
}

/// Serialized plan for translating one block to a target footprint.
#[derive(Debug, Clone)]
pub struct HopPlan {
    pub block: u32,
    pub moves: Vec<AtomMove>,
    /// C_phys: max host-edge load over the atom paths.
    pub congestion: u32,
    /// D_phys: max atom path length.
    pub dilation: u32,
    /// Edge-disjoint rounds; each entry is a set of (from, to) atom steps.
    pub matchings: Option<Vec<Vec<(u32, u32)>>>,
    /// True when the rounds came from the exact bipartite edge coloring
    /// (all paths length <= 1 and disjoint source/target sets).
    pub exact_coloring: bool,
}

impl HopPlan {
    pub fn rounds(&self) -> Option<usize> {
        self.matchings.as_ref().map(Vec::len)
    }
}

/// Plans a single near-rigid block hop: assigns atoms to target vertices by
/// minimum-total-distance optimal assignment, with individual moves capped at
/// d_C + g + 1 hops, and extracts per-atom shortest paths.
///
/// The target must have exactly s vertices, be disjoint from every other
/// block, and keep guard distance to every other block. Overlap with the
/// moving block's own footprint is allowed.
pub fn plan_block_hop(
    g: &HostGraph,
    cfg: &BlockConfiguration,
    block: u32,
    target: &[u32],
) -> Result<HopPlan> {
    let s = cfg.block_size();
    if target.len() != s {
        return Err(Error::InvalidInput(format!(
            "target footprint has {} vertices, expected {s}",
            target.len()
        )));
    }
    let mut distinct = HashSet::new();
    for &v in target {
        if !distinct.insert(v) {
            return Err(Error::InvalidInput(format!(
                "target footprint repeats vertex {v}"
            )));
        }
        match cfg.owner(v) {
            Some(b) if b != block => {
                return Err(Error::InvalidInput(format!(
                    "target vertex {v} is occupied by block {b}"
                )));
            }
            _ => {}
        }
    }
    // Guard distance to every other block.
    if cfg.guard() >= 2 {
        let dist = bfs_distances(g, target);
        for (v, &d) in dist.iter().enumerate() {
            if d != UNREACHABLE && d < cfg.guard() {
                if let Some(b) = cfg.owner(v as u32) {
                    if b != block {
                        return Err(Error::InvalidInput(format!(
                            "target violates guard distance to block {b}"
                        )));
                    }
                }
            }
        }
    }

    let range = (cfg.code_distance() + cfg.guard() + 1) as usize;
    let atoms = cfg.block(block);

    // Per-target bounded BFS gives both the assignment costs and the parent
    // pointers for path reconstruction; ties toward smaller vertex ids.
    let mut searches = Vec::with_capacity(s);
    for &t in target {
        searches.push(bounded_bfs(g, t, range as u32, atoms));
    }

    let mut cost = vec![vec![FORBIDDEN_COST; s]; s];
    for (ti, search) in searches.iter().enumerate() {
        for (ai, &a) in atoms.iter().enumerate() {
            if let Some(d) = search.dist(a) {
                cost[ai][ti] = d as i64;
            }
        }
    }

    let assignment = hungarian_min(&cost);
    let feasible = assignment
        .iter()
        .enumerate()
        .all(|(ai, &ti)| cost[ai][ti] < FORBIDDEN_COST);
    if !feasible {
        return Err(Error::HopInfeasible {
            block: block as usize,
            range,
        });
    }

    let mut moves = Vec::with_capacity(s);
    let mut loads: HashMap<(u32, u32), u32> = HashMap::new();
    let mut dilation = 0u32;
    for (ai, &ti) in assignment.iter().enumerate() {
        let path = searches[ti].path_from(atoms[ai]);
        dilation = dilation.max(path.len() as u32 - 1);
        for w in path.windows(2) {
            *loads.entry((w[0].min(w[1]), w[0].max(w[1]))).or_insert(0) += 1;
        }
        moves.push(AtomMove {
            from: atoms[ai],
            path,
        });
    }
    let congestion = loads.values().copied().max().unwrap_or(0);

    Ok(HopPlan {
        block,
        moves,
        congestion,
        dilation,
        matchings: None,
        exact_coloring: false,
    })
}

/// Decomposes a hop plan into edge-disjoint matching rounds.
///
/// When every move is a single hop and the moving sources are disjoint from
/// the targets, the move multigraph is bipartite and the rounds are an exact
/// minimum edge coloring with Delta colors. Otherwise rounds come from the
/// greedy schedule that advances a maximal edge-disjoint set of next-hops.
pub fn decompose_hop_into_matchings(mut plan: HopPlan) -> HopPlan {
    let movers: Vec<&AtomMove> = plan.moves.iter().filter(|m| !m.is_empty()).collect();
    if movers.is_empty() {
        plan.matchings = Some(Vec::new());
        plan.exact_coloring = true;
        return plan;
    }

    let single_hop = movers.iter().all(|m| m.len() == 1);
    let bipartite = {
        let sources: HashSet<u32> = movers.iter().map(|m| m.from).collect();
        movers.iter().all(|m| !sources.contains(&m.target()))
    };

    if single_hop && bipartite {
        let edges: Vec<(u32, u32)> = movers.iter().map(|m| (m.from, m.target())).collect();
        let coloring = konig_edge_coloring(&edges);
        let n_colors = coloring.iter().copied().max().map_or(0, |c| c + 1);
        let mut rounds = vec![Vec::new(); n_colors];
        for (e, &c) in edges.iter().zip(&coloring) {
            rounds[c].push(*e);
        }
        plan.matchings = Some(rounds);
        plan.exact_coloring = true;
        return plan;
    }

    // Greedy rounds over residual paths.
    let mut pos: Vec<usize> = vec![0; plan.moves.len()];
    let mut rounds = Vec::new();
    loop {
        let pending: Vec<usize> = (0..plan.moves.len())
            .filter(|&i| pos[i] + 1 < plan.moves[i].path.len())
            .collect();
        if pending.is_empty() {
            break;
        }
        let mut round = Vec::new();
        let mut used = HashSet::new();
        for &i in &pending {
            let from = plan.moves[i].path[pos[i]];
            let to = plan.moves[i].path[pos[i] + 1];
            let key = (from.min(to), from.max(to));
            if used.contains(&key) {
                continue;
            }
            used.insert(key);
            round.push((from, to));
            pos[i] += 1;
        }
        debug_assert!(!round.is_empty(), "first pending move always advances");
        rounds.push(round);
    }
    plan.matchings = Some(rounds);
    plan.exact_coloring = false;
    plan
}

/// Samples a connected target footprint for a block hop: grown by BFS from a
/// free vertex adjacent to the block, over vertices unoccupied and clear of
/// other blocks' guard zones. Returns `None` when no admissible target of
/// size s exists near the block.
pub fn sample_hop_target(
    g: &HostGraph,
    cfg: &BlockConfiguration,
    block: u32,
    seed: u64,
) -> Option<Vec<u32>> {
    let s = cfg.block_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_HOP);

    // Admissible: unoccupied and not within guard-1 hops of another block.
    let mut admissible = vec![true; g.n_vertices()];
    for (v, owner) in cfg.footprint().iter().enumerate() {
        if owner.is_some() {
            admissible[v] = false;
        }
    }
    if cfg.guard() >= 2 {
        for other in 0..cfg.n_blocks() as u32 {
            if other == block {
                continue;
            }
            let dist = bfs_distances(g, cfg.block(other));
            for (v, &d) in dist.iter().enumerate() {
                if d != UNREACHABLE && d < cfg.guard() {
                    admissible[v] = false;
                }
            }
        }
    }

    let mut seeds: Vec<u32> = cfg
        .block(block)
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|&w| admissible[w as usize])
        .collect();
    seeds.sort_unstable();
    seeds.dedup();
    seeds.shuffle(&mut rng);

    for &v0 in seeds.iter().take(20) {
        let mut target = Vec::with_capacity(s);
        let mut seen = HashSet::new();
        let mut frontier = vec![v0];
        seen.insert(v0);
        while !frontier.is_empty() && target.len() < s {
            frontier.sort_unstable();
            let mut next = Vec::new();
            for &u in &frontier {
                if target.len() == s {
                    break;
                }
                target.push(u);
                for &w in g.neighbors(u) {
                    if admissible[w as usize] && seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        if target.len() == s {
            return Some(target);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Bounded BFS with parent pointers
// ---------------------------------------------------------------------------

struct BoundedSearch {
    root: u32,
    dist: HashMap<u32, u32>,
    parent: HashMap<u32, u32>,
}

impl BoundedSearch {
    fn dist(&self, v: u32) -> Option<u32> {
        self.dist.get(&v).copied()
    }

    /// Walks parent pointers from `src` back to the root; the returned path
    /// runs src -> root.
    fn path_from(&self, src: u32) -> Vec<u32> {
        let mut path = vec![src];
        let mut v = src;
        while v != self.root {
            v = self.parent[&v];
            path.push(v);
        }
        path
    }
}

/// BFS from `root` out to `radius` hops, stopping early once all `wanted`
/// vertices are reached. Parent = first discoverer; neighbor lists are
/// sorted, so parents tie-break toward smaller ids.
fn bounded_bfs(g: &HostGraph, root: u32, radius: u32, wanted: &[u32]) -> BoundedSearch {
    let want: HashSet<u32> = wanted.iter().copied().collect();
    let mut remaining = want.len();
    let mut dist = HashMap::new();
    let mut parent = HashMap::new();
    dist.insert(root, 0);
    if want.contains(&root) {
        remaining -= 1;
    }
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        if remaining == 0 {
            break;
        }
        let du = dist[&u];
        if du == radius {
            continue;
        }
        for &w in g.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(du + 1);
                parent.insert(w, u);
                if want.contains(&w) {
                    remaining -= 1;
                }
                queue.push_back(w);
            }
        }
    }
    BoundedSearch { root, dist, parent }
}

// ---------------------------------------------------------------------------
// Hungarian assignment (shortest augmenting paths with potentials)
// ---------------------------------------------------------------------------

/// Sentinel cost for forbidden pairs: dominates any sum of real hop
/// distances while keeping potential sums (bounded by n * max cost) far from
/// i64 overflow even when whole rows are forbidden.
const FORBIDDEN_COST: i64 = 1 << 30;

/// Minimum-cost perfect assignment on a square cost matrix. Returns
/// `assign[row] = col`. Forbidden pairs carry [`FORBIDDEN_COST`]; the caller
/// checks whether the optimum avoids them.
fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column -> row (1-based, 0 = free)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![usize::MAX; n];
    for j in 1..=n {
        if matched_row[j] != 0 {
            assign[matched_row[j] - 1] = j - 1;
        }
    }
    assign
}

// ---------------------------------------------------------------------------
// Bipartite multigraph edge coloring (exactly Delta colors)
// ---------------------------------------------------------------------------

/// Proper edge coloring of a bipartite multigraph with exactly Delta colors,
/// by alternating-chain flips. Returns a color per edge.
fn konig_edge_coloring(edges: &[(u32, u32)]) -> Vec<usize> {
    let mut degree: HashMap<u32, usize> = HashMap::new();
    for &(a, b) in edges {
        *degree.entry(a).or_insert(0) += 1;
        *degree.entry(b).or_insert(0) += 1;
    }
    let delta = degree.values().copied().max().unwrap_or(0);

    // at[v][c] = edge index colored c incident to v.
    let mut at: HashMap<u32, Vec<Option<usize>>> = HashMap::new();
    let slot = |at: &mut HashMap<u32, Vec<Option<usize>>>, v: u32| {
        at.entry(v).or_insert_with(|| vec![None; delta]).clone()
    };
    let mut colors = vec![usize::MAX; edges.len()];

    for (idx, &(a, b)) in edges.iter().enumerate() {
        let free_a = first_free(&slot(&mut at, a));
        let free_b = first_free(&slot(&mut at, b));
        if free_a == free_b {
            assign(&mut at, idx, (a, b), free_a, delta);
            colors[idx] = free_a;
            continue;
        }
        // Flip the (free_a, free_b)-alternating chain starting at b so that
        // free_a becomes free at b. The chain cannot reach a: it would have
        // to arrive on color free_a, which is free at a. Collect the chain
        // first, then recolor.
        let (ca, cb) = (free_a, free_b);
        let mut chain: Vec<usize> = Vec::new();
        let mut cur = b;
        let mut col = ca;
        loop {
            let next_edge = at.get(&cur).and_then(|s| s[col]);
            match next_edge {
                Some(e) => {
                    chain.push(e);
                    let (x, y) = edges[e];
                    cur = if x == cur { y } else { x };
                    col = if col == ca { cb } else { ca };
                }
                None => break,
            }
        }
        for &e in &chain {
            let old = colors[e];
            let (x, y) = edges[e];
            at.get_mut(&x).unwrap()[old] = None;
            at.get_mut(&y).unwrap()[old] = None;
        }
        for &e in &chain {
            let old = colors[e];
            let new = if old == ca { cb } else { ca };
            colors[e] = new;
            let (x, y) = edges[e];
            at.get_mut(&x).unwrap()[new] = Some(e);
            at.get_mut(&y).unwrap()[new] = Some(e);
        }
        assign(&mut at, idx, (a, b), ca, delta);
        colors[idx] = ca;
    }
    colors
}

fn first_free(slots: &[Option<usize>]) -> usize {
    slots
        .iter()
        .position(Option::is_none)
        .expect("a vertex of degree <= Delta always has a free color")
}

fn assign(
    at: &mut HashMap<u32, Vec<Option<usize>>>,
    idx: usize,
    (a, b): (u32, u32),
    color: usize,
    delta: usize,
) {
    at.entry(a).or_insert_with(|| vec![None; delta])[color] = Some(idx);
    at.entry(b).or_insert_with(|| vec![None; delta])[color] = Some(idx);
}
