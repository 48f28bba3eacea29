//! Host graph generation and distance queries.
//!
//! Hosts are simple undirected graphs with dense vertex ids `0..n`.
//! Random regular hosts come from the configuration model with
//! edge-deduplication and degree repair; hypergraph hosts come from the
//! clique expansion.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Distance marker for vertices not reachable from the BFS sources.
pub const UNREACHABLE: u32 = u32::MAX;

/// RNG stream tag for host generation (keeps stage RNGs independent when the
/// same 64-bit seed feeds several stages of a trial).
const STREAM_HOST_GEN: u64 = 0xB10C_0001;

/// Simple undirected host graph with sorted neighbor lists.
///
/// `degree` is `Some(d')` iff the graph is d'-regular.
#[derive(Debug, Clone)]
pub struct HostGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
    degree: Option<u32>,
    seed: u64,
}

impl HostGraph {
    /// Builds a host from an edge list, validating simplicity and symmetry.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "duplicate edge incident to vertex {v}"
                )));
            }
        }
        let degree = uniform_degree(&adj);
        Ok(HostGraph {
            n,
            adj,
            degree,
            seed: 0,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Uniform degree, present iff the graph is regular.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn generation_seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Iterates each undirected edge once, as (u, v) with u < v.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let dist = bfs_distances(self, &[0]);
        dist.iter().all(|&d| d != UNREACHABLE)
    }

    /// Audits simplicity, symmetry, and (when the degree field is set)
    /// exact regularity.
    pub fn validate(&self) -> Result<()> {
        for (u, list) in self.adj.iter().enumerate() {
            let u = u as u32;
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvariantViolated(format!(
                    "neighbor list of {u} not sorted/deduplicated"
                )));
            }
            if list.binary_search(&u).is_ok() {
                return Err(Error::InvariantViolated(format!("self-loop at {u}")));
            }
            for &v in list {
                if !self.has_edge(v, u) {
                    return Err(Error::InvariantViolated(format!(
                        "asymmetric edge ({u},{v})"
                    )));
                }
            }
            if let Some(d) = self.degree {
                if list.len() != d as usize {
                    return Err(Error::InvariantViolated(format!(
                        "vertex {u} has degree {} in a declared {d}-regular graph",
                        list.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn uniform_degree(adj: &[Vec<u32>]) -> Option<u32> {
    let first = adj.first()?.len();
    adj.iter().all(|l| l.len() == first).then_some(first as u32)
}

/// r-uniform hypergraph; `d` is the per-vertex hyperedge degree, present iff
/// every vertex lies in the same number of hyperedges.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    n_vertices: usize,
    hyperedges: Vec<Vec<u32>>,
    r: usize,
    d: Option<u32>,
}

impl Hypergraph {
    pub fn new(n_vertices: usize, hyperedges: Vec<Vec<u32>>, r: usize) -> Result<Self> {
        let mut counts = vec![0u32; n_vertices];
        for (i, e) in hyperedges.iter().enumerate() {
            if e.len() != r {
                return Err(Error::InvalidInput(format!(
                    "hyperedge {i} has {} vertices, expected r={r}",
                    e.len()
                )));
            }
            let mut sorted = e.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "hyperedge {i} repeats a vertex"
                )));
            }
            for &v in e {
                if v as usize >= n_vertices {
                    return Err(Error::InvalidInput(format!(
                        "hyperedge {i} references vertex {v} >= n={n_vertices}"
                    )));
                }
                counts[v as usize] += 1;
            }
        }
        let d = counts
            .first()
            .and_then(|&c| counts.iter().all(|&x| x == c).then_some(c));
        Ok(Hypergraph {
            n_vertices,
            hyperedges,
            r,
            d,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn hyperedges(&self) -> &[Vec<u32>] {
        &self.hyperedges
    }

    pub fn uniformity(&self) -> usize {
        self.r
    }

    /// Per-vertex hyperedge degree when the hypergraph is regular.
    pub fn hyperedge_degree(&self) -> Option<u32> {
        self.d
    }
}

/// Generates a connected simple d'-regular graph on n vertices.
///
/// Stubs are paired uniformly, self-loops and multi-edges dropped, and degree
/// deficits repaired by random rewiring. If repair cannot restore exact
/// regularity within 50 passes, or the result is disconnected, the attempt is
/// discarded and a new one starts from the next seed. Deterministic for fixed
/// (n, d', seed).
pub fn generate_regular(n: usize, d_prime: usize, seed: u64) -> Result<HostGraph> {
    const MAX_ATTEMPTS: usize = 100;
    const MAX_REPAIR_PASSES: usize = 50;

    if d_prime >= n {
        return Err(Error::InvalidInput(format!(
            "degree d'={d_prime} must be smaller than n={n}"
        )));
    }
    if !(n * d_prime).is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "n*d' = {n}*{d_prime} is odd; no regular graph exists"
        )));
    }
    if d_prime == 0 {
        return Err(Error::InvalidInput("degree d'=0 is not routable".into()));
    }

    let mut last_failure = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        rng.set_stream(STREAM_HOST_GEN);
        match try_configuration_model(n, d_prime, &mut rng, MAX_REPAIR_PASSES) {
            Ok(adj) => {
                let graph = HostGraph {
                    n,
                    adj,
                    degree: Some(d_prime as u32),
                    seed: attempt_seed,
                };
                if graph.is_connected() {
                    debug_assert!(graph.validate().is_ok());
                    return Ok(graph);
                }
                last_failure = "disconnected".into();
            }
            Err(reason) => last_failure = reason,
        }
    }
    Err(Error::GenerationFailed {
        n,
        degree: d_prime,
        attempts: MAX_ATTEMPTS,
        last_failure,
    })
}

/// One configuration-model attempt: pair stubs, drop bad edges, repair
/// deficits. Returns sorted adjacency on success, failure reason otherwise.
fn try_configuration_model(
    n: usize,
    d_prime: usize,
    rng: &mut ChaCha8Rng,
    max_repair_passes: usize,
) -> std::result::Result<Vec<Vec<u32>>, String> {
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, d_prime))
        .collect();
    stubs.shuffle(rng);

    // Canonical packed pairs, sorted for O(E log E) dedup.
    let mut packed: Vec<u64> = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u == v {
            continue; // drop self-loop
        }
        let (a, b) = (u.min(v), u.max(v));
        packed.push((a as u64) << 32 | b as u64);
    }
    packed.sort_unstable();
    packed.dedup();

    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d_prime); n];
    for &p in &packed {
        let u = (p >> 32) as u32;
        let v = (p & 0xFFFF_FFFF) as u32;
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    // Deficient stubs: vertex v appears (d' - deg(v)) times.
    let mut deficient: Vec<u32> = Vec::new();
    for (v, list) in adj.iter().enumerate() {
        for _ in list.len()..d_prime {
            deficient.push(v as u32);
        }
    }

    let mut edge_list: Vec<(u32, u32)> = packed
        .iter()
        .map(|&p| ((p >> 32) as u32, (p & 0xFFFF_FFFF) as u32))
        .collect();

    for _pass in 0..max_repair_passes {
        if deficient.is_empty() {
            break;
        }
        deficient.shuffle(rng);
        let mut still_deficient = Vec::new();
        let mut progressed = false;
        let mut idx = 0;
        while idx + 1 < deficient.len() {
            let (u, v) = (deficient[idx], deficient[idx + 1]);
            idx += 2;
            if u != v && !contains_sorted(&adj[u as usize], v) {
                insert_sorted(&mut adj[u as usize], v);
                insert_sorted(&mut adj[v as usize], u);
                edge_list.push((u.min(v), u.max(v)));
                progressed = true;
            } else if rewire_pair(u, v, &mut adj, &mut edge_list, rng) {
                progressed = true;
            } else {
                still_deficient.push(u);
                still_deficient.push(v);
            }
        }
        if idx < deficient.len() {
            still_deficient.push(deficient[idx]);
        }
        deficient = still_deficient;
        if !progressed && !deficient.is_empty() {
            return Err(format!(
                "repair stalled with {} deficient stubs",
                deficient.len()
            ));
        }
    }
    if !deficient.is_empty() {
        return Err(format!(
            "repair exhausted with {} deficient stubs",
            deficient.len()
        ));
    }
    Ok(adj)
}

/// Fixes a stuck deficient pair (u, v) by splitting a random existing edge
/// (x, y): remove (x, y), add (u, x) and (v, y). Degree of x and y is
/// unchanged while u and v each gain one.
fn rewire_pair(
    u: u32,
    v: u32,
    adj: &mut [Vec<u32>],
    edge_list: &mut Vec<(u32, u32)>,
    rng: &mut ChaCha8Rng,
) -> bool {
    const TRIES: usize = 200;
    if edge_list.is_empty() {
        return false;
    }
    for _ in 0..TRIES {
        let k = rng.gen_range(0..edge_list.len());
        let (mut x, mut y) = edge_list[k];
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut x, &mut y);
        }
        if x == u || y == v || {
            // (u,x) and (v,y) must both be fresh simple edges
            contains_sorted(&adj[u as usize], x) || contains_sorted(&adj[v as usize], y)
        } {
            continue;
        }
        remove_sorted(&mut adj[x as usize], y);
        remove_sorted(&mut adj[y as usize], x);
        edge_list.swap_remove(k);
        insert_sorted(&mut adj[u as usize], x);
        insert_sorted(&mut adj[x as usize], u);
        insert_sorted(&mut adj[v as usize], y);
        insert_sorted(&mut adj[y as usize], v);
        edge_list.push((u.min(x), u.max(x)));
        edge_list.push((v.min(y), v.max(y)));
        return true;
    }
    false
}

fn contains_sorted(list: &[u32], x: u32) -> bool {
    list.binary_search(&x).is_ok()
}

fn insert_sorted(list: &mut Vec<u32>, x: u32) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}

fn remove_sorted(list: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = list.binary_search(&x) {
        list.remove(pos);
    }
}

/// Clique expansion: vertices preserved; (u, v) is an edge iff u and v
/// co-occur in at least one hyperedge.
///
/// The degree field is set only when the result is regular and no edge was
/// contributed by two different hyperedges (so the expected host degree
/// d' = d(r-1) is exact).
pub fn clique_expansion(h: &Hypergraph) -> HostGraph {
    let n = h.n_vertices();
    let mut packed: Vec<u64> = Vec::new();
    for e in h.hyperedges() {
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let (a, b) = (e[i].min(e[j]), e[i].max(e[j]));
                packed.push((a as u64) << 32 | b as u64);
            }
        }
    }
    packed.sort_unstable();
    let mut merged = false;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut k = 0;
    while k < packed.len() {
        let p = packed[k];
        let mut run = 1;
        while k + run < packed.len() && packed[k + run] == p {
            run += 1;
        }
        if run > 1 {
            merged = true;
        }
        let u = (p >> 32) as u32;
        let v = (p & 0xFFFF_FFFF) as u32;
        adj[u as usize].push(v);
        adj[v as usize].push(u);
        k += run;
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let degree = if merged { None } else { uniform_degree(&adj) };
    HostGraph {
        n,
        adj,
        degree,
        seed: 0,
    }
}

/// Multi-source BFS hop distances. Unreachable vertices get [`UNREACHABLE`].
///
/// Panics if `sources` is empty.
pub fn bfs_distances(g: &HostGraph, sources: &[u32]) -> Vec<u32> {
    assert!(!sources.is_empty(), "bfs_distances requires a source set");
    let mut dist = vec![UNREACHABLE; g.n_vertices()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        if dist[s as usize] == UNREACHABLE {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &w in g.neighbors(u) {
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Minimum pairwise hop distance between two vertex sets; 0 iff they
/// intersect, `None` if no path connects them.
///
/// Panics if either set is empty.
pub fn set_distance(g: &HostGraph, a: &[u32], b: &[u32]) -> Option<u32> {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "set_distance requires nonempty sets"
    );
    let mut in_b = vec![false; g.n_vertices()];
    for &v in b {
        in_b[v as usize] = true;
    }
    if a.iter().any(|&v| in_b[v as usize]) {
        return Some(0);
    }
    // BFS from A, stop at the first vertex of B.
    let mut dist = vec![UNREACHABLE; g.n_vertices()];
    let mut queue = std::collections::VecDeque::new();
    for &s in a {
        if dist[s as usize] == UNREACHABLE {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &w in g.neighbors(u) {
            if dist[w as usize] == UNREACHABLE {
                if in_b[w as usize] {
                    return Some(du + 1);
                }
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    None
}
