//! Independent oracles for the test suites.
//!
//! Everything here is deliberately decoupled from the main crate: the dense
//! eigensolver is cyclic Jacobi, edge coloring and assignment are exhaustive
//! search. Slow and simple on purpose.

/// Full spectrum of a dense symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues sorted ascending.
///
/// Suitable for n up to a few hundred.
pub fn jacobi_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<f64> = rows.iter().flatten().copied().collect();
    let idx = |i: usize, j: usize| i * n + j;

    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Minimum number of colors in a proper edge coloring of a multigraph,
/// found by backtracking. Edges are endpoint pairs; vertices are arbitrary
/// ids. Feasible for up to ~14 edges.
pub fn min_edge_coloring(edges: &[(u32, u32)]) -> usize {
    if edges.is_empty() {
        return 0;
    }
    let max_degree = {
        let mut deg = std::collections::HashMap::new();
        for &(u, v) in edges {
            *deg.entry(u).or_insert(0usize) += 1;
            *deg.entry(v).or_insert(0usize) += 1;
        }
        deg.values().copied().max().unwrap()
    };
    for k in max_degree..=edges.len() {
        let mut colors = vec![usize::MAX; edges.len()];
        if backtrack_color(edges, &mut colors, 0, k) {
            return k;
        }
    }
    edges.len()
}

fn backtrack_color(edges: &[(u32, u32)], colors: &mut [usize], e: usize, k: usize) -> bool {
    if e == edges.len() {
        return true;
    }
    let (u, v) = edges[e];
    'next_color: for c in 0..k {
        for prior in 0..e {
            if colors[prior] == c {
                let (x, y) = edges[prior];
                if x == u || x == v || y == u || y == v {
                    continue 'next_color;
                }
            }
        }
        colors[e] = c;
        if backtrack_color(edges, colors, e + 1, k) {
            return true;
        }
        colors[e] = usize::MAX;
    }
    false
}

/// Minimum-cost perfect assignment by exhaustive permutation search.
/// `cost[i][j]` is the cost of pairing row i with column j; `None` entries
/// are forbidden. Returns the minimum total, or `None` when no feasible
/// perfect assignment exists. Feasible for n <= 8.
pub fn brute_force_assignment(cost: &[Vec<Option<u64>>]) -> Option<u64> {
    let n = cost.len();
    assert!(n <= 8, "brute force assignment is exponential");
    let mut cols: Vec<usize> = (0..n).collect();
    let mut best: Option<u64> = None;
    permute(&mut cols, 0, &mut |perm| {
        let mut total = 0u64;
        for (i, &j) in perm.iter().enumerate() {
            match cost[i][j] {
                Some(c) => total += c,
                None => return,
            }
        }
        best = Some(best.map_or(total, |b: u64| b.min(total)));
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
