//! BFS-based placement of disjoint guarded blocks, and the deformation
//! energy of a positioned block template.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::{bfs_distances, set_distance, HostGraph, UNREACHABLE};

const STREAM_PLACEMENT: u64 = 0xB10C_0002;

/// Disjoint connected blocks of size s = d_C^2 with pairwise hop distance
/// at least `guard`.
#[derive(Debug, Clone)]
pub struct BlockConfiguration {
    blocks: Vec<Vec<u32>>,
    block_size: usize,
    code_distance: u32,
    guard: u32,
    /// vertex -> owning block, for occupied vertices.
    footprint: Vec<Option<u32>>,
    occupancy: f64,
}

impl BlockConfiguration {
    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, id: u32) -> &[u32] {
        &self.blocks[id as usize]
    }

    /// Block size s = d_C^2.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn code_distance(&self) -> u32 {
        self.code_distance
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// Owning block of a vertex, if occupied.
    pub fn owner(&self, v: u32) -> Option<u32> {
        self.footprint[v as usize]
    }

    pub fn footprint(&self) -> &[Option<u32>] {
        &self.footprint
    }

    /// Occupancy rho = N_L * s / N_phys.
    pub fn occupancy(&self) -> f64 {
        self.occupancy
    }

    /// Audits every configuration invariant against the host: exact sizes,
    /// disjointness, per-block connectivity, and pairwise guard distance.
    pub fn validate(&self, g: &HostGraph) -> Result<()> {
        let mut seen = vec![false; g.n_vertices()];
        for (i, block) in self.blocks.iter().enumerate() {
            if block.len() != self.block_size {
                return Err(Error::InvariantViolated(format!(
                    "block {i} has {} vertices, expected {}",
                    block.len(),
                    self.block_size
                )));
            }
            for &v in block {
                if seen[v as usize] {
                    return Err(Error::InvariantViolated(format!(
                        "vertex {v} occupied by two blocks"
                    )));
                }
                seen[v as usize] = true;
                if self.footprint[v as usize] != Some(i as u32) {
                    return Err(Error::InvariantViolated(format!(
                        "footprint map disagrees at vertex {v}"
                    )));
                }
            }
            if !induced_connected(g, block) {
                return Err(Error::InvariantViolated(format!(
                    "block {i} does not induce a connected subgraph"
                )));
            }
        }
        if self.footprint.iter().filter(|o| o.is_some()).count()
            != self.blocks.len() * self.block_size
        {
            return Err(Error::InvariantViolated(
                "footprint map has stray entries".into(),
            ));
        }
        for i in 0..self.blocks.len() {
            for j in i + 1..self.blocks.len() {
                let d = set_distance(g, &self.blocks[i], &self.blocks[j]);
                if d.is_some_and(|d| d < self.guard) {
                    return Err(Error::InvariantViolated(format!(
                        "blocks {i} and {j} at distance {:?} < guard {}",
                        d, self.guard
                    )));
                }
            }
        }
        if self.occupancy > 1.0 {
            return Err(Error::InvariantViolated(format!(
                "occupancy {} exceeds 1",
                self.occupancy
            )));
        }
        Ok(())
    }
}

fn induced_connected(g: &HostGraph, block: &[u32]) -> bool {
    if block.is_empty() {
        return true;
    }
    let member: std::collections::HashSet<u32> = block.iter().copied().collect();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(block[0]);
    queue.push_back(block[0]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if member.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == block.len()
}

/// Places `n_blocks` disjoint connected blocks of size d_C^2, each grown by
/// BFS from a random unoccupied seed, excluding vertices within `guard` hops
/// of already-placed blocks. The BFS frontier is processed in ascending
/// vertex id, so placement is deterministic for a fixed seed.
///
/// Per block up to 50 seed retries; on exhaustion the whole placement
/// restarts, up to 10 times.
pub fn place_blocks(
    g: &HostGraph,
    n_blocks: usize,
    d_c: u32,
    guard: u32,
    seed: u64,
) -> Result<BlockConfiguration> {
    const SEED_TRIES_PER_BLOCK: usize = 50;
    const MAX_RESTARTS: usize = 10;

    let s = (d_c as usize) * (d_c as usize);
    let n = g.n_vertices();
    if d_c == 0 || n_blocks == 0 {
        return Err(Error::InvalidInput(
            "need at least one block of positive size".into(),
        ));
    }
    if n_blocks * s > n {
        return Err(Error::PlacementFailed {
            n,
            requested: n_blocks,
            placed_blocks: 0,
            block_size: s,
            restarts: 0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_PLACEMENT);

    let mut best_progress = 0usize;
    for _restart in 0..MAX_RESTARTS {
        // blocked = occupied or within guard-1 hops of a placed block.
        let mut blocked = vec![false; n];
        let mut footprint: Vec<Option<u32>> = vec![None; n];
        let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(n_blocks);

        'next_block: for block_id in 0..n_blocks {
            for _try in 0..SEED_TRIES_PER_BLOCK {
                let v0 = rng.gen_range(0..n as u32);
                if blocked[v0 as usize] {
                    continue;
                }
                if let Some(mut block) = grow_block(g, v0, s, &blocked) {
                    block.sort_unstable();
                    for &v in &block {
                        blocked[v as usize] = true;
                        footprint[v as usize] = Some(block_id as u32);
                    }
                    mark_guard_zone(g, &block, guard, &mut blocked);
                    blocks.push(block);
                    continue 'next_block;
                }
            }
            best_progress = best_progress.max(blocks.len());
            // Seed retries exhausted; full restart.
            break 'next_block;
        }

        if blocks.len() == n_blocks {
            let cfg = BlockConfiguration {
                blocks,
                block_size: s,
                code_distance: d_c,
                guard,
                footprint,
                occupancy: (n_blocks * s) as f64 / n as f64,
            };
            debug_assert!(cfg.validate(g).is_ok());
            return Ok(cfg);
        }
    }
    Err(Error::PlacementFailed {
        n,
        requested: n_blocks,
        placed_blocks: best_progress,
        block_size: s,
        restarts: MAX_RESTARTS,
    })
}

/// BFS ball of exactly `s` admissible vertices around `v0`, frontier in
/// ascending vertex id. `None` when the free pocket is smaller than `s`.
fn grow_block(g: &HostGraph, v0: u32, s: usize, blocked: &[bool]) -> Option<Vec<u32>> {
    let mut block = Vec::with_capacity(s);
    let mut seen = std::collections::HashSet::new();
    let mut frontier = vec![v0];
    seen.insert(v0);
    while !frontier.is_empty() && block.len() < s {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &u in &frontier {
            if block.len() == s {
                break;
            }
            block.push(u);
            for &w in g.neighbors(u) {
                if !blocked[w as usize] && seen.insert(w) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    (block.len() == s).then_some(block)
}

/// Marks vertices within guard-1 hops of the block (future blocks must stay
/// at distance >= guard). The block itself is already blocked as occupied.
fn mark_guard_zone(g: &HostGraph, block: &[u32], guard: u32, blocked: &mut [bool]) {
    if guard <= 1 {
        return; // distance >= 1 is disjointness, already enforced
    }
    let dist = bfs_distances(g, block);
    for (v, &d) in dist.iter().enumerate() {
        if d != UNREACHABLE && d < guard {
            blocked[v] = true;
        }
    }
}

/// Rigid block template: edge set plus a map from template vertices to host
/// positions.
#[derive(Debug, Clone)]
pub struct BlockTemplate {
    edges: Vec<(u32, u32)>,
    positions: std::collections::BTreeMap<u32, u32>,
}

impl BlockTemplate {
    /// Validates that edges are proper (no self-loops), every endpoint is
    /// positioned, and positions are injective.
    pub fn new(
        edges: Vec<(u32, u32)>,
        positions: std::collections::BTreeMap<u32, u32>,
    ) -> Result<Self> {
        let mut used = std::collections::HashSet::new();
        for (&t, &x) in &positions {
            if !used.insert(x) {
                return Err(Error::InvalidInput(format!(
                    "positions not injective: host vertex {x} reused (template vertex {t})"
                )));
            }
        }
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::InvalidInput(format!("template self-loop at {u}")));
            }
            if !positions.contains_key(&u) || !positions.contains_key(&v) {
                return Err(Error::InvalidInput(format!(
                    "template edge ({u},{v}) has an unpositioned endpoint"
                )));
            }
        }
        Ok(BlockTemplate { edges, positions })
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn position(&self, t: u32) -> Option<u32> {
        self.positions.get(&t).copied()
    }
}

/// Deformation energy: sum over template edges of the host distance between
/// the endpoint positions, minus the template edge count. Zero iff every
/// template edge maps to a host edge.
pub fn deformation_energy(g: &HostGraph, t: &BlockTemplate) -> Result<u64> {
    // One BFS per distinct source position.
    let mut dist_cache: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    let mut total = 0u64;
    for &(a, b) in t.edges() {
        let xa = t.position(a).expect("validated endpoint");
        let xb = t.position(b).expect("validated endpoint");
        let dist = dist_cache
            .entry(xa)
            .or_insert_with(|| bfs_distances(g, &[xa]));
        let d = dist[xb as usize];
        if d == UNREACHABLE {
            return Err(Error::InvalidInput(format!(
                "template edge ({a},{b}) spans disconnected host vertices ({xa},{xb})"
            )));
        }
        total += d as u64;
    }
    Ok(total - t.edges().len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::generate_regular;
    use std::collections::BTreeMap;

    fn k4() -> HostGraph {
        HostGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn place_single_block_on_k4() {
        let g = k4();
        let cfg = place_blocks(&g, 1, 2, 0, 3).unwrap();
        assert_eq!(cfg.blocks(), &[vec![0, 1, 2, 3]]);
        assert_eq!(cfg.occupancy(), 1.0);
        cfg.validate(&g).unwrap();
    }

    #[test]
    fn place_over_capacity_fails() {
        // 3 blocks of size 4 on 10 vertices.
        let g = generate_regular(10, 3, 1).unwrap();
        match place_blocks(&g, 3, 2, 1, 0) {
            Err(Error::PlacementFailed { requested: 3, .. }) => {}
            other => panic!("expected PlacementFailed, got {other:?}"),
        }
    }

    #[test]
    fn placement_is_deterministic() {
        let g = generate_regular(400, 8, 5).unwrap();
        let a = place_blocks(&g, 6, 3, 1, 11).unwrap();
        let b = place_blocks(&g, 6, 3, 1, 11).unwrap();
        assert_eq!(a.blocks(), b.blocks());
    }

    #[test]
    fn placement_audit_with_guards() {
        // Host large enough that guard-3 exclusion balls (radius 2 around
        // each block) leave room for all five blocks.
        for guard in [0, 1, 2, 3] {
            let g = generate_regular(6000, 6, guard as u64).unwrap();
            let cfg = place_blocks(&g, 5, 3, guard, 23).unwrap();
            cfg.validate(&g).unwrap();
            for i in 0..5u32 {
                for j in (i + 1)..5 {
                    let d = set_distance(&g, cfg.block(i), cfg.block(j)).unwrap();
                    assert!(d >= guard, "guard {guard} violated: dist {d}");
                }
            }
        }
    }

    #[test]
    fn placement_at_dense_occupancy() {
        // 32 blocks of 49 on 2000 vertices: 78% occupancy.
        for seed in [0, 1] {
            let g = generate_regular(2000, 100, seed).unwrap();
            let cfg = place_blocks(&g, 32, 7, 1, seed).unwrap();
            cfg.validate(&g).unwrap();
            assert!((cfg.occupancy() - 0.784).abs() < 1e-12);
        }
    }

    #[test]
    fn deformation_energy_rigid_is_zero() {
        let g = k4();
        let positions: BTreeMap<u32, u32> = [(0, 0), (1, 1), (2, 2)].into();
        let t = BlockTemplate::new(vec![(0, 1), (1, 2), (0, 2)], positions).unwrap();
        assert_eq!(deformation_energy(&g, &t).unwrap(), 0);
    }

    #[test]
    fn deformation_energy_single_stretch() {
        // Path 0-1-2-3; template edge (0,1) mapped to hosts 0 and 2.
        let g = HostGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let positions: BTreeMap<u32, u32> = [(0, 0), (1, 2), (2, 3)].into();
        let t = BlockTemplate::new(vec![(0, 1), (1, 2)], positions).unwrap();
        // dist(0,2)=2 and dist(2,3)=1: psi = 3 - 2 = 1.
        assert_eq!(deformation_energy(&g, &t).unwrap(), 1);
    }

    #[test]
    fn deformation_energy_triangle_on_path() {
        // Triangle template mapped onto path 0-1-2: (1+1+2) - 3 = 1.
        let g = HostGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let positions: BTreeMap<u32, u32> = [(0, 0), (1, 1), (2, 2)].into();
        let t = BlockTemplate::new(vec![(0, 1), (1, 2), (0, 2)], positions).unwrap();
        assert_eq!(deformation_energy(&g, &t).unwrap(), 1);
    }

    #[test]
    fn deformation_energy_unreachable_pair_errors() {
        let g = HostGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let positions: BTreeMap<u32, u32> = [(0, 0), (1, 2)].into();
        let t = BlockTemplate::new(vec![(0, 1)], positions).unwrap();
        assert!(deformation_energy(&g, &t).is_err());
    }

    #[test]
    fn deformation_energy_invariant_under_relabeling() {
        let g = HostGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let pos_a: BTreeMap<u32, u32> = [(0, 0), (1, 1), (2, 3)].into();
        let t_a = BlockTemplate::new(vec![(0, 1), (1, 2)], pos_a).unwrap();
        // Same shape, template ids permuted.
        let pos_b: BTreeMap<u32, u32> = [(7, 0), (5, 1), (9, 3)].into();
        let t_b = BlockTemplate::new(vec![(7, 5), (5, 9)], pos_b).unwrap();
        assert_eq!(
            deformation_energy(&g, &t_a).unwrap(),
            deformation_energy(&g, &t_b).unwrap()
        );
    }

    #[test]
    fn template_rejects_non_injective_positions() {
        let positions: BTreeMap<u32, u32> = [(0, 1), (1, 1)].into();
        assert!(BlockTemplate::new(vec![(0, 1)], positions).is_err());
    }
}
