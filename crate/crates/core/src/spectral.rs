//! Extreme-eigenvalue estimation for symmetric adjacency structures.
//!
//! Lanczos with full reorthogonalization; λ_2 is obtained by deflating the
//! Perron vector (the normalized all-ones vector for regular graphs,
//! otherwise the computed Perron Ritz vector). Extreme eigenvalues of the
//! tridiagonal matrix come from Sturm bisection, Ritz residuals from inverse
//! iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::HostGraph;

/// Symmetric linear operator given by matrix-vector products.
pub trait SymmetricOp {
    fn dim(&self) -> usize;

    /// y = A x.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Analytically known Perron vector, if any (normalized). Regular graphs
    /// return the constant vector.
    fn known_perron(&self) -> Option<Vec<f64>> {
        None
    }
}

impl SymmetricOp for HostGraph {
    fn dim(&self) -> usize {
        self.n_vertices()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (u, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &w in self.neighbors(u as u32) {
                acc += x[w as usize];
            }
            *out = acc;
        }
    }

    fn known_perron(&self) -> Option<Vec<f64>> {
        self.degree()?;
        let n = self.n_vertices();
        Some(vec![1.0 / (n as f64).sqrt(); n])
    }
}

/// Dense symmetric matrix in row-major storage. Construction validates
/// symmetry, which is where the asymmetric-input contract is enforced.
#[derive(Debug, Clone)]
pub struct DenseSym {
    n: usize,
    data: Vec<f64>,
}

impl DenseSym {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * rows[i][j].abs().max(1.0) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(DenseSym { n, data })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl SymmetricOp for DenseSym {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *out = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Eigensolver controls. `max_iter` defaults to 5n per run.
#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iter: Option<usize>,
    /// Seed for the Lanczos starting vectors.
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-8,
            max_iter: None,
            seed: 0,
        }
    }
}

/// Extreme eigenvalues plus the derived spectral ratio.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub lambda_max: f64,
    pub lambda_2: f64,
    pub lambda_min: f64,
    /// max(λ_2, |λ_min|)
    pub lambda_star: f64,
    /// λ* / reference_degree, filled by [`spectral_ratio`].
    pub beta: Option<f64>,
    pub reference_degree: Option<f64>,
    /// Largest Ritz residual among the converged extreme pairs.
    pub residual: f64,
    /// Total Lanczos iterations across both runs.
    pub iterations: usize,
}

/// Computes λ_max, λ_2, λ_min of a symmetric operator with connected support.
///
/// Run 1 (undeflated) yields λ_max and λ_min; run 2, deflated against the
/// Perron vector, yields λ_2. Deterministic for a fixed options seed.
pub fn extreme_eigenvalues(
    op: &(impl SymmetricOp + ?Sized),
    opts: &SpectralOptions,
) -> Result<SpectralSummary> {
    let n = op.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "spectral summary needs dimension >= 2".into(),
        ));
    }
    let max_iter = opts.max_iter.unwrap_or(5 * n);

    let run_a = lanczos(op, &[], opts.seed, opts.tol, max_iter, Ends::Both)?;
    let lambda_max = run_a.top;
    let perron = match op.known_perron() {
        Some(v) => v,
        None => run_a
            .top_vector
            .clone()
            .expect("undeflated run retains the top Ritz vector"),
    };

    let run_b = lanczos(
        op,
        &[perron],
        opts.seed ^ 0x9E37_79B9,
        opts.tol,
        max_iter,
        Ends::Top,
    )?;
    let lambda_2 = run_b.top.min(lambda_max);
    let lambda_min = run_a.bottom.min(run_b.bottom);

    Ok(SpectralSummary {
        lambda_max,
        lambda_2,
        lambda_min,
        lambda_star: lambda_2.max(lambda_min.abs()),
        beta: None,
        reference_degree: None,
        residual: run_a.residual.max(run_b.residual),
        iterations: run_a.iterations + run_b.iterations,
    })
}

/// Extreme eigenvalues plus β = λ*/reference_degree.
pub fn spectral_ratio(
    op: &(impl SymmetricOp + ?Sized),
    reference_degree: f64,
    opts: &SpectralOptions,
) -> Result<SpectralSummary> {
    if reference_degree <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "reference degree must be positive, got {reference_degree}"
        )));
    }
    let mut summary = extreme_eigenvalues(op, opts)?;
    summary.beta = Some(summary.lambda_star / reference_degree);
    summary.reference_degree = Some(reference_degree);
    Ok(summary)
}

/// λ_2 eigenvalue and eigenvector (deflated-run Ritz pair), for sweep cuts.
pub fn lambda2_eigenpair(
    op: &(impl SymmetricOp + ?Sized),
    opts: &SpectralOptions,
) -> Result<(f64, Vec<f64>)> {
    let n = op.dim();
    if n < 2 {
        return Err(Error::InvalidInput("eigenpair needs dimension >= 2".into()));
    }
    let max_iter = opts.max_iter.unwrap_or(5 * n);
    let perron = match op.known_perron() {
        Some(v) => v,
        None => {
            let run = lanczos(op, &[], opts.seed, opts.tol, max_iter, Ends::Top)?;
            run.top_vector.expect("top Ritz vector retained")
        }
    };
    let run = lanczos(
        op,
        &[perron],
        opts.seed ^ 0x9E37_79B9,
        opts.tol,
        max_iter,
        Ends::Top,
    )?;
    let vec = run.top_vector.expect("top Ritz vector retained");
    Ok((run.top, vec))
}

/// Ramanujan bound 2 sqrt(d'-1) / d' on the spectral ratio of a d'-regular
/// graph.
pub fn alon_boppana_reference(d_prime: u32) -> f64 {
    assert!(d_prime >= 2, "alon_boppana_reference needs d' >= 2");
    let d = d_prime as f64;
    2.0 * (d - 1.0).sqrt() / d
}

// ---------------------------------------------------------------------------
// Lanczos machinery
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Ends {
    /// Converge both extreme Ritz values.
    Both,
    /// Converge the top Ritz value only.
    Top,
}

struct LanczosRun {
    top: f64,
    bottom: f64,
    top_vector: Option<Vec<f64>>,
    residual: f64,
    iterations: usize,
}

fn lanczos(
    op: &(impl SymmetricOp + ?Sized),
    deflate: &[Vec<f64>],
    seed: u64,
    tol: f64,
    max_iter: usize,
    ends: Ends,
) -> Result<LanczosRun> {
    let n = op.dim();
    let m = max_iter.min(n.saturating_sub(deflate.len()).max(1));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    orthogonalize(&mut v, deflate);
    if normalize(&mut v) < 1e-300 {
        return Err(Error::InvalidInput(
            "start vector vanished under deflation".into(),
        ));
    }

    let mut alphas: Vec<f64> = Vec::with_capacity(m.min(1024));
    let mut betas: Vec<f64> = Vec::with_capacity(m.min(1024));
    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut w = vec![0.0; n];
    let mut v_prev: Vec<f64> = vec![0.0; n];
    let mut beta_prev = 0.0;
    let mut residual = f64::INFINITY;

    for k in 0..m {
        op.apply(&v, &mut w);
        let alpha = dot(&v, &w);
        for i in 0..n {
            w[i] -= alpha * v[i] + beta_prev * v_prev[i];
        }
        // Full reorthogonalization, two Gram-Schmidt passes.
        for _ in 0..2 {
            orthogonalize(&mut w, deflate);
            orthogonalize_slice(&mut w, &basis);
        }
        alphas.push(alpha);

        let beta = norm(&w);
        let scale = alphas.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(beta);
        let exhausted = k + 1 == m;
        let breakdown = beta <= 1e-14 * scale.max(1.0);

        if breakdown || exhausted || k >= 1 {
            let (theta_top, theta_bot) = tridiag_extremes(&alphas, &betas);
            let r_top = ritz_residual(&alphas, &betas, theta_top, beta);
            let r_bot = ritz_residual(&alphas, &betas, theta_bot, beta);
            residual = match ends {
                Ends::Both => r_top.max(r_bot),
                Ends::Top => r_top,
            };
            let ok_top = r_top <= tol * theta_top.abs().max(1.0);
            let ok_bot = r_bot <= tol * theta_bot.abs().max(1.0);
            let converged = match ends {
                Ends::Both => ok_top && ok_bot,
                Ends::Top => ok_top,
            };
            if converged || breakdown {
                // An exact invariant subspace (breakdown) makes the tridiagonal
                // spectrum exact; report zero residual in that case.
                if breakdown {
                    residual = 0.0;
                }
                let top_vector = ritz_vector(&alphas, &betas, theta_top, &basis);
                return Ok(LanczosRun {
                    top: theta_top,
                    bottom: theta_bot,
                    top_vector: Some(top_vector),
                    residual,
                    iterations: k + 1,
                });
            }
            if exhausted {
                return Err(Error::NoConvergence {
                    iterations: k + 1,
                    residual,
                });
            }
        }

        betas.push(beta);
        v_prev = std::mem::replace(&mut v, w.clone());
        beta_prev = beta;
        for x in &mut v {
            *x /= beta;
        }
        basis.push(v.clone());
    }
    Err(Error::NoConvergence {
        iterations: m,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        for x in a.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c = dot(w, u);
        for i in 0..w.len() {
            w[i] -= c * u[i];
        }
    }
}

fn orthogonalize_slice(w: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize(w, basis)
}

/// Extreme eigenvalues of the symmetric tridiagonal (alphas, betas) via
/// Sturm-count bisection.
fn tridiag_extremes(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let off = if i > 0 { betas[i - 1].abs() } else { 0.0 }
            + if i < k - 1 { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - off);
        hi = hi.max(alphas[i] + off);
    }
    if k == 1 {
        return (alphas[0], alphas[0]);
    }
    let top = bisect_eigenvalue(alphas, betas, k - 1, lo, hi);
    let bot = bisect_eigenvalue(alphas, betas, 0, lo, hi);
    (top, bot)
}

/// Number of eigenvalues of the tridiagonal strictly below x (Sturm count
/// via the LDL^T recurrence).
fn sturm_count(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..alphas.len() {
        let off2 = if i > 0 {
            betas[i - 1] * betas[i - 1]
        } else {
            0.0
        };
        d = alphas[i] - x - off2 / d;
        if d.abs() < 1e-300 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisection for the (index)-th eigenvalue (ascending, 0-based).
fn bisect_eigenvalue(alphas: &[f64], betas: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(alphas, betas, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the tridiagonal at θ by inverse iteration (two passes of a
/// pivoted tridiagonal solve).
fn tridiag_eigenvector(alphas: &[f64], betas: &[f64], theta: f64) -> Vec<f64> {
    let k = alphas.len();
    let shift = theta + 1e-12 * theta.abs().max(1.0);
    let mut u = vec![1.0 / (k as f64).sqrt(); k];
    for _ in 0..2 {
        u = solve_tridiag_shifted(alphas, betas, shift, &u);
        let nrm = norm(&u);
        if nrm > 0.0 {
            for x in &mut u {
                *x /= nrm;
            }
        }
    }
    u
}

/// Solves (T - shift I) x = b with partial pivoting (band storage with one
/// fill-in superdiagonal, LAPACK dgtsv-style).
fn solve_tridiag_shifted(alphas: &[f64], betas: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    let mut d: Vec<f64> = alphas.iter().map(|&a| a - shift).collect();
    let mut e: Vec<f64> = (0..k)
        .map(|i| if i + 1 < k { betas[i] } else { 0.0 })
        .collect();
    let mut f = vec![0.0; k];
    let low: Vec<f64> = e.clone();
    let mut rhs = b.to_vec();

    for i in 0..k.saturating_sub(1) {
        if low[i].abs() > d[i].abs() {
            // Swap rows i and i+1, then eliminate the (moved-down) old row i.
            let (di, ei, fi) = (d[i], e[i], f[i]);
            d[i] = low[i];
            e[i] = d[i + 1];
            f[i] = if i + 2 < k { e[i + 1] } else { 0.0 };
            rhs.swap(i, i + 1);
            let factor = di / d[i];
            d[i + 1] = ei - factor * e[i];
            e[i + 1] = fi - factor * f[i];
            rhs[i + 1] -= factor * rhs[i];
        } else {
            let pivot = if d[i].abs() < 1e-300 { 1e-300 } else { d[i] };
            let factor = low[i] / pivot;
            d[i + 1] -= factor * e[i];
            if i + 2 < k {
                e[i + 1] -= factor * f[i];
            }
            rhs[i + 1] -= factor * rhs[i];
        }
    }

    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        if i + 1 < k {
            acc -= e[i] * x[i + 1];
        }
        if i + 2 < k {
            acc -= f[i] * x[i + 2];
        }
        let pivot = if d[i].abs() < 1e-300 { 1e-300 } else { d[i] };
        x[i] = acc / pivot;
    }
    x
}

/// Ritz residual estimate |β_k * u_last| for the tridiagonal eigenpair at θ.
fn ritz_residual(alphas: &[f64], betas: &[f64], theta: f64, beta_k: f64) -> f64 {
    let u = tridiag_eigenvector(alphas, betas, theta);
    beta_k.abs() * u.last().copied().unwrap_or(1.0).abs()
}

/// Lifts the tridiagonal eigenvector at θ through the stored Lanczos basis.
fn ritz_vector(alphas: &[f64], betas: &[f64], theta: f64, basis: &[Vec<f64>]) -> Vec<f64> {
    let u = tridiag_eigenvector(alphas, betas, theta);
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (c, q) in u.iter().zip(basis) {
        for i in 0..n {
            out[i] += c * q[i];
        }
    }
    let nrm = norm(&out);
    if nrm > 0.0 {
        for x in &mut out {
            *x /= nrm;
        }
    }
    out
}
