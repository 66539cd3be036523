//! Levenberg–Marquardt feasibility search for the constraint system on the
//! coefficient vectors `W₁, …, W_d ∈ ℂ²ⁿ`.
//!
//! The real unknowns are the real and imaginary parts of all `W_α` entries,
//! ordered `(α, k, re/im)` with `W_α = (a₁^{(α)}, a₂^{(α)})`. The residual
//! vector is the concatenation of
//!
//! 1. real and imaginary parts of the entries of `V_β`, β ∈ {1} ∪ {d+1, …, 2d};
//! 2. `|W_α|² + |V_α|² − C(d, α)` for α = 1..=d;
//! 3. real and imaginary parts of `⟨W_α, W_β⟩ + ⟨V_α, V_β⟩` for α < β.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, DEFAULT_CC_TOL, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::exterior::{binomial, herm_dot, wedge_vectors_into};
use crate::invariants::tail_probe;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_RESTARTS: usize = 200;
/// Restarts run in batches of this size.
const BATCH: usize = 16;
pub const NO_SOLUTION_LABEL: &str = "no solution found under budget (search evidence, not proof)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeFix {
    /// Pin `a₁^{(1)} = (s, 0, …)`, `a₂^{(1)} = (0, t, 0, …)` with s, t real.
    pub fix_a1_svd: bool,
    /// Rescale each starting `W_α` to `|W_α| = √C(d, α)`.
    pub fix_scale: bool,
}

impl Default for GaugeFix {
    fn default() -> Self {
        Self { fix_a1_svd: true, fix_scale: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub n: usize,
    pub d: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol_feasible: f64,
    pub gauge_fix: GaugeFix,
    pub rng_seed: u64,
}

impl SearchProblem {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            tol_feasible: DEFAULT_CC_TOL,
            gauge_fix: GaugeFix::default(),
            rng_seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidCurve(format!("search needs n >= 2, got {}", self.n)));
        }
        if self.d < 1 {
            return Err(Error::InvalidCurve("search needs d >= 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidCurve("search needs at least one restart".into()));
        }
        if !(self.tol_feasible > 0.0) {
            return Err(Error::InvalidCurve(format!("tolerance must be positive, got {}", self.tol_feasible)));
        }
        if self.n > crate::curve::MAX_N || self.d > crate::curve::MAX_D {
            return Err(Error::InvalidCurve(format!("(n, d) = ({}, {}) is out of range", self.n, self.d)));
        }
        Ok(())
    }

}

/// Count of restarts whose final residual norm fell in `(lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchReport {
    pub n: usize,
    pub d: usize,
    pub feasible: bool,
    pub best_curve: Option<Curve>,
    /// Smallest final residual norm among restarts that ended linearly full.
    pub best_residual: Option<f64>,
    /// Smallest final residual norm among all restarts.
    pub best_residual_any: f64,
    pub full: bool,
    pub fullness_rank: usize,
    /// 1-based index of the first feasible restart. The reported curve may
    /// come from a later restart that converged more cleanly.
    pub restarts_to_hit: Option<usize>,
    pub restarts_run: usize,
    pub restart_stats: Vec<HistogramBin>,
    pub wall_time: f64,
    pub verdict: String,
}

/// Per-restart outcome.
#[derive(Clone, Debug)]
pub struct RestartResult {
    pub index: usize,
    pub residual: f64,
    pub iterations: usize,
    pub full: bool,
    pub fullness_rank: usize,
    pub curve: Curve,
}

/// Splits a packed real vector into `W₁, …, W_d`.
pub fn unpack(n: usize, d: usize, x: &[f64]) -> Vec<Vec<Complex64>> {
    assert_eq!(x.len(), 4 * n * d, "packed vector has wrong length");
    x.chunks(4 * n).map(|w| w.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()).collect()
}

pub fn pack(w: &[Vec<Complex64>]) -> Vec<f64> {
    w.iter().flat_map(|v| v.iter().flat_map(|z| [z.re, z.im])).collect()
}

pub fn curve_from_w(w: &[Vec<Complex64>]) -> Result<Curve> {
    let d = w.len();
    let n = w.first().map_or(0, |v| v.len() / 2);
    let f1: Vec<Vec<Complex64>> = w.iter().map(|v| v[..n].to_vec()).collect();
    let f2: Vec<Vec<Complex64>> = w.iter().map(|v| v[n..].to_vec()).collect();
    Curve::from_rows(n, d, &f1, &f2)
}

pub fn w_from_curve(c: &Curve) -> Vec<Vec<Complex64>> {
    c.coefficient_vectors().all_w().to_vec()
}

fn dims(w: &[Vec<Complex64>]) -> (usize, usize) {
    let d = w.len();
    let n = w.first().map_or(0, |v| v.len() / 2);
    assert!(w.iter().all(|v| v.len() == 2 * n), "all W_α must have length 2n");
    (n, d)
}

/// `V_p` for p = 0..=2d (V₀ = 0).
fn wedge_coeffs(w: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let d = w.len();
    let m = binomial(n, 2);
    let mut v = vec![vec![ZERO; m]; 2 * d + 1];
    for a in 1..=d {
        for b in 1..=d {
            wedge_vectors_into(&w[a - 1][..n], &w[b - 1][n..], Complex64::new(1.0, 0.0), &mut v[a + b]);
        }
    }
    v
}

/// Number of residual components for (n, d).
pub fn residual_len(n: usize, d: usize) -> usize {
    2 * binomial(n, 2) * (d + 1) + d + d * (d - 1)
}

pub fn residuals(w: &[Vec<Complex64>]) -> DVector<f64> {
    let (n, d) = dims(w);
    let v = wedge_coeffs(w, n);
    let mut out = Vec::with_capacity(residual_len(n, d));
    for beta in std::iter::once(1).chain(d + 1..=2 * d) {
        for z in &v[beta] {
            out.extend([z.re, z.im]);
        }
    }
    for a in 1..=d {
        let norm = herm_dot(&w[a - 1], &w[a - 1]).re + herm_dot(&v[a], &v[a]).re;
        out.push(norm - binomial(d, a) as f64);
    }
    for a in 1..=d {
        for b in a + 1..=d {
            let z = herm_dot(&w[a - 1], &w[b - 1]) + herm_dot(&v[a], &v[b]);
            out.extend([z.re, z.im]);
        }
    }
    DVector::from_vec(out)
}

/// Exact Jacobian of [`residuals`] with respect to the packed unknowns.
pub fn jacobian(w: &[Vec<Complex64>]) -> DMatrix<f64> {
    let (n, d) = dims(w);
    let m = binomial(n, 2);
    let v = wedge_coeffs(w, n);
    let rows = residual_len(n, d);
    let mut jac = DMatrix::zeros(rows, 4 * n * d);
    let diag_start = 2 * m * (d + 1);
    let off_start = diag_start + d;
    // dv[p]: holomorphic derivative of V_p along the current entry
    let mut dv = vec![vec![ZERO; m]; 2 * d + 1];
    let one = Complex64::new(1.0, 0.0);
    for alpha in 1..=d {
        for k in 0..2 * n {
            for x in dv.iter_mut() {
                x.fill(ZERO);
            }
            let mut e = vec![ZERO; n];
            e[k % n] = one;
            for other in 1..=d {
                let p = alpha + other;
                if k < n {
                    wedge_vectors_into(&e, &w[other - 1][n..], one, &mut dv[p]);
                } else {
                    wedge_vectors_into(&w[other - 1][..n], &e, one, &mut dv[p]);
                }
            }
            let col = 2 * ((alpha - 1) * 2 * n + k);
            // group 1: holomorphic entries
            let mut row = 0;
            for beta in std::iter::once(1).chain(d + 1..=2 * d) {
                for c in &dv[beta] {
                    jac[(row, col)] = c.re;
                    jac[(row + 1, col)] = c.im;
                    jac[(row, col + 1)] = -c.im;
                    jac[(row + 1, col + 1)] = c.re;
                    row += 2;
                }
            }
            // Hermitian forms h(a, b) = ⟨W_a, W_b⟩ + ⟨V_a, V_b⟩: along re the
            // derivative is ⟨∂a, b⟩ + ⟨a, ∂b⟩, along im it is i⟨∂a, b⟩ − i⟨a, ∂b⟩
            let left = |a: usize, b: usize| -> Complex64 {
                let wpart = if a == alpha { w[b - 1][k].conj() } else { ZERO };
                wpart + herm_dot(&dv[a], &v[b])
            };
            let right = |a: usize, b: usize| -> Complex64 {
                let wpart = if b == alpha { w[a - 1][k] } else { ZERO };
                wpart + herm_dot(&v[a], &dv[b])
            };
            for a in 1..=d {
                let (l, r) = (left(a, a), right(a, a));
                jac[(diag_start + a - 1, col)] = (l + r).re;
                jac[(diag_start + a - 1, col + 1)] = (I * l - I * r).re;
            }
            let mut row = off_start;
            for a in 1..=d {
                for b in a + 1..=d {
                    let (l, r) = (left(a, b), right(a, b));
                    let dre = l + r;
                    let dim = I * l - I * r;
                    jac[(row, col)] = dre.re;
                    jac[(row + 1, col)] = dre.im;
                    jac[(row, col + 1)] = dim.re;
                    jac[(row + 1, col + 1)] = dim.im;
                    row += 2;
                }
            }
        }
    }
    jac
}

/// Packed indices left free by the gauge fix.
fn free_indices(n: usize, d: usize, fix: bool) -> Vec<usize> {
    let pinned = |i: usize| -> bool {
        if !fix || i >= 4 * n {
            return false;
        }
        // W₁: entry k, part i % 2; keep re(a₁₀) and re(a₂₁)
        let (k, part) = (i / 2, i % 2);
        !(part == 0 && (k == 0 || k == n + 1))
    };
    (0..4 * n * d).filter(|&i| !pinned(i)).collect()
}

fn initial_point(p: &SearchProblem, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let n = p.n;
    let mut w: Vec<Vec<Complex64>> = (0..p.d)
        .map(|_| {
            (0..2 * n)
                .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect()
        })
        .collect();
    if p.gauge_fix.fix_a1_svd {
        let (s, t) = (w[0][0].norm(), w[0][n + 1].norm());
        w[0].fill(ZERO);
        w[0][0] = Complex64::new(s, 0.0);
        w[0][n + 1] = Complex64::new(t, 0.0);
    }
    if p.gauge_fix.fix_scale {
        for (a, wa) in w.iter_mut().enumerate() {
            let norm = herm_dot(wa, wa).re.sqrt();
            let target = (binomial(p.d, a + 1) as f64).sqrt();
            if norm > 0.0 {
                wa.iter_mut().for_each(|z| *z *= target / norm);
            }
        }
    }
    w
}

/// Damped Gauss–Newton from `x`; returns the final point, residual norm and
/// iteration count. Stops once the residual norm is below `target`.
fn levenberg_marquardt(
    n: usize,
    d: usize,
    mut x: Vec<f64>,
    free: &[usize],
    max_iters: usize,
    target: f64,
) -> (Vec<f64>, f64, usize) {
    let mut w = unpack(n, d, &x);
    let mut r = residuals(&w);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut iters = 0;
    while iters < max_iters && cost.sqrt() > target {
        iters += 1;
        let jac = jacobian(&w).select_columns(free);
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let grad = &jt * &r;
        let mut accepted = false;
        while mu < 1e16 {
            let mut damped = normal.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += mu * (1.0 + normal[(i, i)]);
            }
            let Some(chol) = damped.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&grad);
            let mut trial = x.clone();
            for (s, &i) in step.iter().zip(free) {
                trial[i] -= s;
            }
            let tw = unpack(n, d, &trial);
            let tr = residuals(&tw);
            let tc = tr.norm_squared();
            if tc < cost {
                x = trial;
                w = tw;
                r = tr;
                cost = tc;
                mu = (mu * 0.1).max(1e-15);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (x, cost.sqrt(), iters)
}

/// Undamped Gauss–Newton with minimum-norm steps from the SVD of J, which
/// avoids the squared conditioning of the normal equations near the end.
/// Near singular solutions several singular-value cutoffs are tried and the
/// best step is kept.
fn polish(n: usize, d: usize, mut x: Vec<f64>, free: &[usize], steps: usize) -> (Vec<f64>, f64) {
    let mut r = residuals(&unpack(n, d, &x));
    let mut cost = r.norm_squared();
    for _ in 0..steps {
        if cost == 0.0 {
            break;
        }
        let jac = jacobian(&unpack(n, d, &x)).select_columns(free);
        let svd = jac.svd(true, true);
        let top = svd.singular_values.max();
        let mut best: Option<(Vec<f64>, DVector<f64>, f64)> = None;
        for cutoff in [1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4] {
            let Ok(step) = svd.solve(&r, cutoff * top) else { continue };
            let mut trial = x.clone();
            for (s, &i) in step.iter().zip(free) {
                trial[i] -= s;
            }
            let tr = residuals(&unpack(n, d, &trial));
            let tc = tr.norm_squared();
            if tc < best.as_ref().map_or(cost, |b| b.2) {
                best = Some((trial, tr, tc));
            }
        }
        let Some((bx, br, bc)) = best else { break };
        x = bx;
        r = br;
        cost = bc;
    }
    (x, cost.sqrt())
}

/// Polishes, then zeroes every `W_α` with `|W_α|` below the `√tol` level the
/// residual can resolve and polishes again with those entries frozen.
fn finish(n: usize, d: usize, x: Vec<f64>, free: &[usize], tol: f64) -> (Vec<f64>, f64) {
    let (x, res) = polish(n, d, x, free, 100);
    let cutoff = tol.sqrt() * 0.1;
    let mut snapped = x.clone();
    let mut frozen = Vec::new();
    for (a, chunk) in snapped.chunks_mut(4 * n).enumerate() {
        if chunk.iter().map(|v| v * v).sum::<f64>().sqrt() < cutoff {
            chunk.fill(0.0);
            frozen.push(a);
        }
    }
    if frozen.is_empty() {
        return (x, res);
    }
    let kept: Vec<usize> = free.iter().copied().filter(|i| !frozen.contains(&(i / (4 * n)))).collect();
    let (sx, sres) = polish(n, d, snapped, &kept, 100);
    if sres <= res.max(tol * 1e-3) {
        (sx, sres)
    } else {
        (x, res)
    }
}

/// Gauss–Newton refinement of a nearly constantly curved curve over all
/// coefficients; returns the refined curve and its residual norm.
pub fn refine(c: &Curve, steps: usize) -> Result<(Curve, f64)> {
    let (n, d) = (c.n(), c.d());
    let free: Vec<usize> = (0..4 * n * d).collect();
    let (x, res) = polish(n, d, pack(&w_from_curve(c)), &free, steps);
    Ok((curve_from_w(&unpack(n, d, &x))?, res))
}

/// A feasible restart at or below this residual ends the search early.
const SETTLED_RESIDUAL: f64 = 1e-14;

/// Residual at which a restart stops iterating.
fn converged_level(tol: f64) -> f64 {
    (tol * 1e-3).max(1e-14)
}

fn run_restart(p: &SearchProblem, index: usize, free: &[usize]) -> RestartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    rng.set_stream(index as u64);
    let start = pack(&initial_point(p, &mut rng));
    // polish well below the feasibility threshold before judging rank
    let target = converged_level(p.tol_feasible);
    let (x, residual, iterations) = levenberg_marquardt(p.n, p.d, start, free, p.max_iters, target);
    let (x, residual) = if residual <= 1e-4 { finish(p.n, p.d, x, free, p.tol_feasible) } else { (x, residual) };
    let curve = curve_from_w(&unpack(p.n, p.d, &x)).expect("solver iterates are finite");
    let fullness_rank = curve.fullness_rank(DEFAULT_RANK_TOL);
    RestartResult { index, residual, iterations, full: fullness_rank == p.n, fullness_rank, curve }
}

/// Runs the given restart indices in parallel; results are in index order.
pub fn run_restarts(p: &SearchProblem, indices: std::ops::Range<usize>) -> Vec<RestartResult> {
    let free = free_indices(p.n, p.d, p.gauge_fix.fix_a1_svd);
    indices.into_par_iter().map(|i| run_restart(p, i, &free)).collect()
}

fn is_feasible(p: &SearchProblem, r: &RestartResult) -> bool {
    r.residual <= p.tol_feasible && r.full && r.curve.verify(p.tol_feasible).passed()
}

fn histogram(residuals: &[f64]) -> Vec<HistogramBin> {
    let mut edges = vec![0.0];
    edges.extend((-14..=2).map(|e| 10f64.powi(e)));
    edges.push(f64::INFINITY);
    edges
        .windows(2)
        .map(|e| HistogramBin {
            lower: e[0],
            upper: e[1],
            count: residuals.iter().filter(|&&r| r > e[0] && r <= e[1] || (e[0] == 0.0 && r == 0.0)).count(),
        })
        .filter(|b| b.count > 0)
        .collect()
}

/// Runs restarts until one is feasible or the budget is spent.
pub fn search(p: &SearchProblem) -> Result<SearchReport> {
    p.validate()?;
    let clock = Instant::now();
    let mut results: Vec<RestartResult> = Vec::new();
    // a feasible restart settles the verdict; the search continues until one
    // also converges cleanly, since slow convergence to a singular solution
    // leaves the coefficients accurate only to about √residual
    let clean = SETTLED_RESIDUAL.min(p.tol_feasible);
    let mut winner = None;
    let mut settled = false;
    let mut next = 0;
    while next < p.restarts && !settled {
        let end = (next + BATCH).min(p.restarts);
        let batch = run_restarts(p, next..end);
        let feasible: Vec<&RestartResult> = batch.iter().filter(|r| is_feasible(p, r)).collect();
        if winner.is_none() {
            winner = feasible.first().map(|r| r.index);
        }
        settled = feasible.iter().any(|r| r.residual <= clean);
        results.extend(batch);
        next = end;
    }
    let residuals: Vec<f64> = results.iter().map(|r| r.residual).collect();
    let best_any = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let best_full = results.iter().filter(|r| r.full).min_by(|a, b| a.residual.total_cmp(&b.residual));
    let chosen = match winner {
        Some(_) => results
            .iter()
            .filter(|r| is_feasible(p, r))
            .find(|r| r.residual <= clean)
            .or_else(|| results.iter().filter(|r| is_feasible(p, r)).min_by(|a, b| a.residual.total_cmp(&b.residual))),
        None => best_full.or_else(|| results.iter().min_by(|a, b| a.residual.total_cmp(&b.residual))),
    };
    let feasible = winner.is_some();
    Ok(SearchReport {
        n: p.n,
        d: p.d,
        feasible,
        best_curve: chosen.map(|r| r.curve.clone()),
        best_residual: best_full.map(|r| r.residual),
        best_residual_any: best_any,
        full: chosen.is_some_and(|r| r.full),
        fullness_rank: chosen.map_or(0, |r| r.fullness_rank),
        restarts_to_hit: winner.map(|i| i + 1),
        restarts_run: results.len(),
        restart_stats: histogram(&residuals),
        wall_time: clock.elapsed().as_secs_f64(),
        verdict: if feasible { "feasible".into() } else { NO_SOLUTION_LABEL.into() },
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub d: usize,
    pub feasible: bool,
    pub best_residual: Option<f64>,
    pub best_residual_any: f64,
    pub restarts_to_hit: Option<usize>,
    pub fullness_rank: usize,
    pub verdict: String,
}

impl From<&SearchReport> for ScanRow {
    fn from(r: &SearchReport) -> Self {
        Self {
            d: r.d,
            feasible: r.feasible,
            best_residual: r.best_residual,
            best_residual_any: r.best_residual_any,
            restarts_to_hit: r.restarts_to_hit,
            fullness_rank: r.fullness_rank,
            verdict: r.verdict.clone(),
        }
    }
}

/// Independent searches for each d in `d_range`, using `template` for
/// everything but (n, d).
pub fn feasibility_scan(
    n: usize,
    d_range: std::ops::RangeInclusive<usize>,
    template: &SearchProblem,
) -> Result<Vec<SearchReport>> {
    if d_range.is_empty() {
        return Err(Error::InvalidCurve("empty degree range".into()));
    }
    d_range.map(|d| search(&SearchProblem { n, d, ..template.clone() })).collect()
}

/// Sanity check used by callers that persist found curves.
pub fn check_found(c: &Curve, tol: f64) -> Result<()> {
    let rep = c.verify(tol);
    if !rep.passed() {
        return Err(Error::InvalidCurve(format!("found curve fails verification: {rep:?}")));
    }
    let probe = tail_probe(c, tol)?;
    if !probe.dim_bound_ok {
        return Err(Error::Probe("dimension bound violated".into()));
    }
    Ok(())
}
