//! Analytic invariants of a curve `f = [I₂, F]`.
//!
//! The g-vector packs the four wedge polynomials
//!
//! ```text
//! ∂F₁∧∂F₂,  ∂F₁∧∂F₂∧F₁,  ∂F₁∧∂F₂∧F₂,  ∂F₁∧∂F₂∧F₁∧F₂
//! ```
//!
//! into one ℂ^{C(n+2,4)}-valued polynomial `g(z)`. For a constantly curved
//! curve of degree d, `|det A₁|² = |g|² / (d² (1 + |z|²)^{2d−4})` and
//! `K = 4 − 8|det A₁|² − |A|²/2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::exterior::{binomial, wedge_vectors_into, MultiVec};
use crate::poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default relative threshold below which g is treated as identically zero.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

/// A vector-valued polynomial: `coeffs[m]` is the ℂᴸ coefficient of `z^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVec {
    len: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl PolyVec {
    pub fn zeros(len: usize, terms: usize) -> Self {
        Self { len, coeffs: vec![vec![ZERO; len]; terms] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    /// Component `i` as an ascending coefficient list.
    pub fn component(&self, i: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c[i]).collect()
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        let mut acc = vec![ZERO; self.len];
        for c in self.coeffs.iter().rev() {
            for (a, x) in acc.iter_mut().zip(c) {
                *a = *a * z + x;
            }
        }
        acc
    }

    /// Highest index with a coefficient above `tol`; `None` when ≡ 0.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.iter().any(|x| x.norm() > tol))
    }

    /// Drops trailing coefficient blocks whose entries are all ≤ `tol`.
    pub fn trim(&mut self, tol: f64) {
        let keep = self.degree(tol).map_or(0, |d| d + 1);
        self.coeffs.truncate(keep);
    }

    fn max_abs(&self, range: std::ops::Range<usize>) -> f64 {
        self.coeffs.iter().flat_map(|c| c[range.clone()].iter()).map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Offsets of the R | S | T | X blocks inside g.
#[derive(Clone, Debug)]
pub struct GBlocks {
    pub r: std::ops::Range<usize>,
    pub s: std::ops::Range<usize>,
    pub t: std::ops::Range<usize>,
    pub x: std::ops::Range<usize>,
}

impl GBlocks {
    pub fn new(n: usize) -> Self {
        let (c2, c3, c4) = (binomial(n, 2), binomial(n, 3), binomial(n, 4));
        Self { r: 0..c2, s: c2..c2 + c3, t: c2 + c3..c2 + 2 * c3, x: c2 + 2 * c3..c2 + 2 * c3 + c4 }
    }
}

/// `∂F₁∧∂F₂ = Σ_m R[m] z^m` with `R[m] = Σ_{α+β=m+2} αβ a₁^{(α)}∧a₂^{(β)}`.
pub fn derivative_wedge(c: &Curve) -> Vec<MultiVec> {
    let n = c.n();
    let k = c.coeffs().len();
    let terms = (2 * k).saturating_sub(1);
    let mut out = vec![vec![ZERO; binomial(n, 2)]; terms];
    for alpha in 1..=k {
        let a1 = c.row(0, alpha);
        for beta in 1..=k {
            let a2 = c.row(1, beta);
            let s = Complex64::new((alpha * beta) as f64, 0.0);
            wedge_vectors_into(&a1, &a2, s, &mut out[alpha + beta - 2]);
        }
    }
    out.into_iter().map(|v| MultiVec::from_coeffs(n, 2, v).expect("grade-2 size")).collect()
}

/// The g-vector `(R_{ij}, S_{ijk}, T_{ijk}, X_{ijkl})` as a polynomial in z.
pub fn g_vector(c: &Curve) -> PolyVec {
    let n = c.n();
    let blocks = GBlocks::new(n);
    let k = c.coeffs().len();
    let r = derivative_wedge(c);
    let cv = c.coefficient_vectors();
    let terms = if k == 0 { 0 } else { 4 * k - 1 };
    let mut g = PolyVec::zeros(blocks.x.end, terms);
    for (m, rm) in r.iter().enumerate() {
        for (i, x) in rm.coeffs().iter().enumerate() {
            g.coeffs[m][blocks.r.start + i] += x;
        }
        if n >= 3 {
            for gamma in 1..=k {
                let s = rm.wedge(&MultiVec::vector(&c.row(0, gamma))).expect("grade 3");
                let t = rm.wedge(&MultiVec::vector(&c.row(1, gamma))).expect("grade 3");
                for (i, (xs, xt)) in s.coeffs().iter().zip(t.coeffs()).enumerate() {
                    g.coeffs[m + gamma][blocks.s.start + i] += xs;
                    g.coeffs[m + gamma][blocks.t.start + i] += xt;
                }
            }
        }
        if n >= 4 {
            for p in 2..=2 * k {
                let v = cv.v(p);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let x = rm.wedge(v).expect("grade 4");
                for (i, xx) in x.coeffs().iter().enumerate() {
                    g.coeffs[m + p][blocks.x.start + i] += xx;
                }
            }
        }
    }
    g
}

/// `|det A₁|²(z) = |g(z)|² / (d² (1 + |z|²)^{2d−4})`.
pub fn det_a1_sq(c: &Curve, z: Complex64) -> Result<f64> {
    det_a1_sq_with(c, &g_vector(c), z)
}

/// As [`det_a1_sq`] with a precomputed g-vector.
pub fn det_a1_sq_with(c: &Curve, g: &PolyVec, z: Complex64) -> Result<f64> {
    let d = c.d();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let gz = g.eval(z);
    let num: f64 = gz.iter().map(|x| x.norm_sqr()).sum();
    Ok(num / ((d * d) as f64 * (1.0 + z.norm_sqr()).powi(2 * d as i32 - 4)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamificationReport {
    /// g ≡ 0 within tolerance.
    pub degenerate: bool,
    /// `r(f) = (2d − 4) − deg([g])`; absent for degenerate curves.
    pub r_index: Option<i64>,
    /// `deg([g])`: degree of g after dividing out the common factor.
    pub deg_g: Option<i64>,
    /// Largest degree among the components of g before content removal.
    pub max_component_degree: Option<usize>,
    /// Roots of the common factor of the components, with multiplicity.
    pub finite_zeros: Vec<(Complex64, usize)>,
    /// `(2d − 4) − max_component_degree`. Negative only when the curve is not
    /// constantly curved.
    pub zero_at_infinity_mult: i64,
    /// Largest root-cluster spread relative to `1 + |root|`.
    pub cluster_spread: f64,
    /// Set when root clusters are poorly separated or unusually wide.
    pub ill_conditioned: bool,
}

/// Radius, relative to `1 + |z|`, within which roots are merged.
const CLUSTER_RADIUS: f64 = 1e-4;
/// Floor of the relative singular-value threshold for the multiplication
/// matrix rank.
const RANK_TOL: f64 = 1e-7;
/// Ceiling of the same threshold.
const RANK_TOL_MAX: f64 = 1e-3;

/// Number of common zeros on ℙ¹, with multiplicity, of binary forms of degree
/// `top` given by their ascending coefficients.
///
/// Multiplying every form by all monomials of degree `top` spans the degree
/// `2·top` multiples of their gcd, so the rank deficit is the gcd degree.
fn common_zero_count(forms: &[Vec<Complex64>], top: usize, rel_tol: f64) -> i64 {
    if top == 0 {
        return 0;
    }
    let rows = 2 * top + 1;
    let mut m = DMatrix::<Complex64>::zeros(rows, forms.len() * (top + 1));
    for (j, p) in forms.iter().enumerate() {
        for k in 0..=top {
            for (i, x) in p.iter().enumerate() {
                m[(i + k, j * (top + 1) + k)] = *x;
            }
        }
    }
    let sv = m.singular_values();
    let cut = rel_tol * sv.max();
    let rank = sv.iter().filter(|s| **s > cut).count();
    (rows - rank) as i64
}

pub fn ramification(c: &Curve, tol: f64) -> Result<RamificationReport> {
    let d = c.d();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let g = g_vector(c);
    let blocks = GBlocks::new(c.n());
    let s = c.max_abs_entry().max(f64::MIN_POSITIVE);
    let units = [
        (blocks.r.clone(), s * s),
        (blocks.s.clone(), s.powi(3)),
        (blocks.t.clone(), s.powi(3)),
        (blocks.x.clone(), s.powi(4)),
    ];
    let degenerate = units.iter().all(|(range, u)| range.is_empty() || g.max_abs(range.clone()) <= tol * u);
    if degenerate {
        return Ok(RamificationReport {
            degenerate: true,
            r_index: None,
            deg_g: None,
            max_component_degree: None,
            finite_zeros: Vec::new(),
            zero_at_infinity_mult: 0,
            cluster_spread: 0.0,
            ill_conditioned: false,
        });
    }

    // components scaled by their block's homogeneity, negligible ones dropped
    let top = 2 * d - 4;
    let mut comps: Vec<Vec<Complex64>> = Vec::new();
    for (range, unit) in &units {
        for i in range.clone() {
            let p = g.component(i);
            if p.iter().all(|x| x.norm() <= tol * unit) {
                continue;
            }
            comps.push(p.iter().map(|x| x / unit).collect());
        }
    }
    // coefficients of an approximate solution are known to about √residual
    let gram = c.gram_residual(tol).max_abs;
    let noise = (100.0 * gram.sqrt()).clamp(RANK_TOL, RANK_TOL_MAX);
    let big = comps.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    let degs: Vec<usize> = comps.iter().map(|p| poly::degree(p, noise * big).unwrap_or(0)).collect();
    let max_deg = degs.iter().copied().max().unwrap_or(0);
    // formal degree; exceeds 2d − 4 only off the constant-curvature locus
    let formal = top.max(max_deg);
    for p in comps.iter_mut() {
        p.resize(formal + 1, ZERO);
        p.truncate(formal + 1);
    }
    let r_index = common_zero_count(&comps, formal, noise) - (formal - top) as i64;
    let zero_inf = (top as i64 - max_deg as i64).min(r_index);
    let finite_total = (r_index - zero_inf).max(0) as usize;

    // the finite common zeros: roots of the lowest-degree component ranked by
    // how nearly the other components vanish there
    let (pi, _) = degs.iter().enumerate().min_by_key(|(_, k)| **k).expect("non-degenerate g has a component");
    let pivot = &comps[pi][..=degs[pi]];
    let roots = poly::roots(pivot, 1e-13 * big);
    let mut scored: Vec<(f64, Complex64)> = roots
        .iter()
        .map(|z| {
            let w = (1.0 + z.norm()).powi(formal as i32);
            let worst = comps.iter().map(|p| poly::eval(p, *z).norm() / w).fold(0.0, f64::max);
            (worst, *z)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let chosen: Vec<Complex64> = scored.iter().take(finite_total).map(|(_, z)| *z).collect();
    let scale = chosen.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clusters = poly::cluster(&chosen, CLUSTER_RADIUS * (1.0 + scale));
    let mut finite_zeros = Vec::new();
    let mut spread: f64 = 0.0;
    for (z0, count, sp) in &clusters {
        spread = spread.max(sp / (1.0 + z0.norm()));
        finite_zeros.push((*z0, *count));
    }
    let mut ill = spread > 1e-5 || chosen.len() < finite_total;
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            if (a.0 - b.0).norm() < 1e-3 * (1.0 + scale) {
                ill = true;
            }
        }
    }
    Ok(RamificationReport {
        degenerate: false,
        r_index: Some(r_index),
        deg_g: Some(2 * d as i64 - 4 - r_index),
        max_component_degree: Some(max_deg),
        finite_zeros,
        zero_at_infinity_mult: zero_inf,
        cluster_spread: spread,
        ill_conditioned: ill,
    })
}

/// Mixed partials `∂_z^i ∂_z̄^j P` (i, j ≤ 2) of the bivariate Hermitian
/// polynomial `P = Σ G_{pq} z^p z̄^q`.
fn mixed_partials(gram: &nalgebra::DMatrix<Complex64>, z: Complex64) -> [[Complex64; 3]; 3] {
    let size = gram.nrows();
    // basis[i][p] = p!/(p−i)! z^{p−i}
    let mut basis = [vec![ZERO; size], vec![ZERO; size], vec![ZERO; size]];
    let mut powers = vec![Complex64::new(1.0, 0.0); size];
    for p in 1..size {
        powers[p] = powers[p - 1] * z;
    }
    for (i, b) in basis.iter_mut().enumerate() {
        for p in i..size {
            let ff: f64 = (0..i).map(|t| (p - t) as f64).product();
            b[p] = powers[p - i] * ff;
        }
    }
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        // row vector u_i^T G
        let ug: Vec<Complex64> = (0..size).map(|q| (0..size).map(|p| basis[i][p] * gram[(p, q)]).sum()).collect();
        for j in 0..3 {
            out[i][j] = ug.iter().zip(&basis[j]).map(|(a, b)| a * b.conj()).sum();
        }
    }
    out
}

/// Gauss curvature at z of the metric `λ² |dz|²`, `λ² = ∂∂̄ log P` with
/// `P = det(I₂ + F F*)`, evaluated by exact differentiation of P.
pub fn curvature_at(c: &Curve, z: Complex64) -> Result<f64> {
    let gram = c.gram_residual(f64::INFINITY).actual;
    curvature_from_gram(&gram, z)
}

/// As [`curvature_at`] with a precomputed Gram coefficient matrix.
pub fn curvature_from_gram(gram: &nalgebra::DMatrix<Complex64>, z: Complex64) -> Result<f64> {
    let p = mixed_partials(gram, z);
    let pp = p[0][0].re;
    let p10 = p[1][0];
    let p11 = p[1][1].re;
    let p20 = p[2][0];
    let p21 = p[2][1];
    let p22 = p[2][2].re;
    // N = P P_{zz̄} − |P_z|², λ² = N / P²
    let nn = pp * p11 - p10.norm_sqr();
    let density = nn / (pp * pp);
    if !(nn > 1e-12 * pp * p11.abs()) || !density.is_finite() {
        return Err(Error::NotImmersion { z, density });
    }
    let n10 = p21 * pp - p20 * p10.conj();
    let n11 = pp * p22 - p20.norm_sqr();
    let ddbar_log_n = (nn * n11 - n10.norm_sqr()) / (nn * nn);
    let ddbar_log_density = ddbar_log_n - 2.0 * nn / (pp * pp);
    Ok(-2.0 * ddbar_log_density / density)
}

/// `4 − K − 8|det A₁|²`, i.e. `|A|²/2` by the Gauss equation.
pub fn gauss_slack(c: &Curve, z: Complex64) -> Result<f64> {
    Ok(4.0 - curvature_at(c, z)? - 8.0 * det_a1_sq(c, z)?)
}

/// The double sum `Σ_{k=1}^{d−ρ−1} Σ_{j=0}^{k−1} λ_{d−j} a₁^{(ρ+k)} ∧ a₁^{(d−k+j)}`.
///
/// `lambda[i]` holds `λ_i` and `a1[α−1]` holds `a₁^{(α)}`.
pub fn lemma_q(d: usize, rho: usize, lambda: &[Complex64], a1: &[Vec<Complex64>]) -> Result<MultiVec> {
    if rho == 0 || rho > d {
        return Err(Error::MissingIndex(format!("rho = {rho} outside 1..={d}")));
    }
    let n = a1.first().map_or(0, Vec::len);
    if a1.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("a1 vectors of differing lengths".into()));
    }
    let mut q = vec![ZERO; binomial(n, 2)];
    let get = |alpha: usize| -> Result<&Vec<Complex64>> {
        a1.get(alpha.wrapping_sub(1)).ok_or_else(|| Error::MissingIndex(format!("a1^({alpha})")))
    };
    for k in 1..d.saturating_sub(rho) {
        for j in 0..k {
            let l = *lambda.get(d - j).ok_or_else(|| Error::MissingIndex(format!("lambda_{}", d - j)))?;
            wedge_vectors_into(get(rho + k)?, get(d - k + j)?, l, &mut q);
        }
    }
    MultiVec::from_coeffs(n, 2, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbe {
    /// Largest α with `|W_α| > tol`.
    pub tau: usize,
    /// `(ρ, λ_ρ)` for ρ = τ down to d − τ + 1.
    pub lambda: Vec<(usize, Complex64)>,
    /// Largest deviation `|a₂^{(ρ)} − Σ_j λ_{τ−j} a₁^{(ρ+j)}|`.
    pub residual: f64,
    pub fullness_rank: usize,
    /// `fullness_rank ≤ d`.
    pub dim_bound_ok: bool,
    /// The two rows were exchanged so that `a₁^{(τ)}` is the larger one.
    pub rows_swapped: bool,
}

/// Fits the constants λ of the chain `a₂^{(ρ)} = Σ_{j=0}^{τ−ρ} λ_{τ−j} a₁^{(ρ+j)}`,
/// ρ = d − τ + 1..=τ, jointly by least squares.
///
/// The residual only sees `|W_α|²`, so `τ` is the largest α with
/// `|W_α| > √tol`.
pub fn tail_probe(c: &Curve, tol: f64) -> Result<TailProbe> {
    let d = c.d();
    let n = c.n();
    let gram = c.gram_residual(tol);
    if !gram.is_cc {
        return Err(Error::Probe(format!("curve is not constantly curved (residual {:e})", gram.max_abs)));
    }
    let cv = c.coefficient_vectors();
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let cutoff = tol.sqrt().max(tol);
    let tau = (1..=d).rev().find(|&a| norm(cv.w(a)) > cutoff).ok_or_else(|| Error::Probe("all W vanish".into()))?;
    if tau < d.div_ceil(2) {
        return Err(Error::Probe(format!("tau = {tau} below ceil(d/2) = {}", d.div_ceil(2))));
    }
    let swapped = norm(&c.row(1, tau)) > norm(&c.row(0, tau));
    let (r1, r2) = if swapped { (1, 0) } else { (0, 1) };
    let a1 = |alpha: usize| c.row(r1, alpha);
    let a2 = |alpha: usize| c.row(r2, alpha);

    let lo = d - tau + 1;
    let rank = c.fullness_rank(DEFAULT_RANK_TOL);
    if lo > tau {
        return Ok(TailProbe {
            tau,
            lambda: Vec::new(),
            residual: 0.0,
            fullness_rank: rank,
            dim_bound_ok: rank <= d,
            rows_swapped: swapped,
        });
    }
    // unknown i - lo stands for λ_i; equation block ρ - lo for the chain at ρ
    let count = tau - lo + 1;
    let mut m = DMatrix::from_element(count * n, count, ZERO);
    let mut rhs = DVector::from_element(count * n, ZERO);
    for rho in lo..=tau {
        let row0 = (rho - lo) * n;
        for (k, x) in a2(rho).into_iter().enumerate() {
            rhs[row0 + k] = x;
        }
        for i in rho..=tau {
            for (k, x) in a1(rho + tau - i).into_iter().enumerate() {
                m[(row0 + k, i - lo)] = x;
            }
        }
    }
    let sol = m
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::Probe(format!("least-squares solve failed: {e}")))?;
    let fit = &m * &sol - &rhs;
    let residual = (0..count)
        .map(|b| fit.rows(b * n, n).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let lambda = (lo..=tau).rev().map(|i| (i, sol[i - lo])).collect();
    Ok(TailProbe { tau, lambda, residual, fullness_rank: rank, dim_bound_ok: rank <= d, rows_swapped: swapped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::DEFAULT_CC_TOL;
    use crate::families::{family_d2n, family_dn};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn random_curve(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Curve {
        let coeffs = (0..d).map(|_| DMatrix::from_fn(2, n, |_, _| cplx(rng))).collect();
        Curve::new(n, d, coeffs).unwrap()
    }

    /// Direct transcription of the component formulas with
    /// `a_{ij}^{(αβ)} = a_{1i}^{(α)} a_{2j}^{(β)} − a_{1j}^{(α)} a_{2i}^{(β)}`.
    fn g_by_index_formulas(c: &Curve) -> PolyVec {
        let n = c.n();
        let k = c.coeffs().len();
        let a = |row: usize, alpha: usize, i: usize| c.row(row, alpha)[i];
        let aa = |i: usize, j: usize, al: usize, be: usize| a(0, al, i) * a(1, be, j) - a(0, al, j) * a(1, be, i);
        let blocks = GBlocks::new(n);
        let mut g = PolyVec::zeros(blocks.x.end, 4 * k - 1);
        let mut slot = 0;
        for i in 0..n {
            for j in i + 1..n {
                for al in 1..=k {
                    for be in 1..=k {
                        g.coeffs[al + be - 2][slot] += aa(i, j, al, be) * (al * be) as f64;
                    }
                }
                slot += 1;
            }
        }
        for row in 0..2 {
            for i in 0..n {
                for j in i + 1..n {
                    for l in j + 1..n {
                        for al in 1..=k {
                            for be in 1..=k {
                                for ga in 1..=k {
                                    let term = aa(i, j, al, be) * a(row, ga, l)
                                        + aa(j, l, al, be) * a(row, ga, i)
                                        + aa(l, i, al, be) * a(row, ga, j);
                                    g.coeffs[al + be + ga - 2][slot] += term * (al * be) as f64;
                                }
                            }
                        }
                        slot += 1;
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for kk in j + 1..n {
                    for l in kk + 1..n {
                        for al in 1..=k {
                            for be in 1..=k {
                                for ga in 1..=k {
                                    for de in 1..=k {
                                        let term = aa(i, j, al, be) * aa(kk, l, ga, de)
                                            - aa(i, kk, al, be) * aa(j, l, ga, de)
                                            + aa(i, l, al, be) * aa(j, kk, ga, de)
                                            + aa(j, kk, al, be) * aa(i, l, ga, de)
                                            - aa(j, l, al, be) * aa(i, kk, ga, de)
                                            + aa(kk, l, al, be) * aa(i, j, ga, de);
                                        g.coeffs[al + be + ga + de - 2][slot] += term * (al * be) as f64;
                                    }
                                }
                            }
                        }
                        slot += 1;
                    }
                }
            }
        }
        assert_eq!(slot, binomial(n + 2, 4));
        g
    }

    #[test]
    fn g_vector_matches_index_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (n, d) in [(2, 3), (3, 3), (4, 2), (5, 3)] {
            let c = random_curve(&mut rng, n, d);
            let g = g_vector(&c);
            let oracle = g_by_index_formulas(&c);
            assert_eq!(g.len(), binomial(n + 2, 4));
            for (x, y) in g.coeffs().iter().flatten().zip(oracle.coeffs().iter().flatten()) {
                assert!((x - y).norm() < 1e-12, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn g_vector_of_families_vanishes() {
        for n in 2..=5 {
            let g = g_vector(&family_d2n(n).unwrap());
            assert!(g.degree(1e-12).is_none(), "d2n({n})");
            let g = g_vector(&family_dn(n).unwrap());
            assert!(g.degree(0.0).is_none(), "dn({n})");
        }
        // ∂F₁∧∂F₂ = 2√3z·2√3z − 6z²·2 for the n = 2 degree-4 family
        let r = derivative_wedge(&family_d2n(2).unwrap());
        assert!(r.iter().all(|m| m.norm_sqr() < 1e-24));
    }

    #[test]
    fn det_a1_sq_examples() {
        let c = family_d2n(3).unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.7, -1.2)] {
            assert!(det_a1_sq(&c, z).unwrap() < 1e-24);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_curve(&mut rng, 3, 3);
        let g0: f64 = g_vector(&c).coeffs()[0].iter().map(|x| x.norm_sqr()).sum();
        let v = det_a1_sq(&c, Complex64::new(0.0, 0.0)).unwrap();
        assert!((v - g0 / 9.0).abs() <= 1e-14 * (1.0 + v));
        assert!(matches!(det_a1_sq(&Curve::zero(2, 1).unwrap(), Complex64::new(0.0, 0.0)), Err(Error::DegreeTooSmall(1))));
    }

    #[test]
    fn ramification_of_degenerate_families() {
        let r = ramification(&family_dn(2).unwrap(), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(r.degenerate && r.r_index.is_none());
        let r = ramification(&family_d2n(3).unwrap(), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(r.degenerate);
        assert!(ramification(&Curve::zero(2, 1).unwrap(), DEFAULT_DEGENERACY_TOL).is_err());
    }

    #[test]
    fn ramification_of_synthetic_single_component() {
        // n = 2, d = 4, ∂F₁∧∂F₂ = z²(z − 1) · const
        // choose F₂ = (0, z) so ∂F₂ = e₂ and ∂F₁ ∧ e₂ = (∂F₁)₁
        // (∂F₁)₁ = z³ − z² ⇒ F₁₁ = z⁴/4 − z³/3
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        let f1 = vec![vec![z, z], vec![z, z], vec![r(-1.0 / 3.0), z], vec![r(0.25), z]];
        let f2 = vec![vec![z, r(1.0)]];
        let c = Curve::from_rows(2, 4, &f1, &f2).unwrap();
        let rep = ramification(&c, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(!rep.degenerate);
        assert_eq!(rep.max_component_degree, Some(3));
        assert_eq!(rep.zero_at_infinity_mult, 1);
        let mut zeros = rep.finite_zeros.clone();
        zeros.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        assert_eq!(zeros.len(), 2);
        assert!(zeros[0].0.norm() < 1e-6 && zeros[0].1 == 2);
        assert!((zeros[1].0 - r(1.0)).norm() < 1e-8 && zeros[1].1 == 1);
        // a single component has itself as content: deg([g]) = 0
        assert_eq!(rep.r_index, Some(4));
        assert_eq!(rep.deg_g, Some(0));
    }

    #[test]
    fn common_zeros_of_binary_forms() {
        let r = |x: f64| Complex64::new(x, 0.0);
        // (z − 1)(z − 2) and (z − 1)(z + 3)
        let p = vec![r(2.0), r(-3.0), r(1.0)];
        let q = vec![r(-3.0), r(2.0), r(1.0)];
        assert_eq!(common_zero_count(&[p.clone(), q.clone()], 2, RANK_TOL), 1);
        // as cubic forms both also vanish at ∞
        let pad = |mut v: Vec<Complex64>| {
            v.push(r(0.0));
            v
        };
        assert_eq!(common_zero_count(&[pad(p.clone()), pad(q.clone())], 3, RANK_TOL), 2);
        assert_eq!(common_zero_count(std::slice::from_ref(&p), 2, RANK_TOL), 2);
        assert_eq!(common_zero_count(&[p, vec![r(1.0), r(0.0), r(1.0)]], 2, RANK_TOL), 0);
    }

    #[test]
    fn ramification_common_factor_across_components() {
        // n = 3 curve, random; components share no root generically
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_curve(&mut rng, 3, 3);
        let rep = ramification(&c, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(!rep.degenerate);
        assert!(rep.finite_zeros.is_empty());
        let max = rep.max_component_degree.unwrap() as i64;
        assert_eq!(rep.deg_g, Some(max));
    }

    #[test]
    fn curvature_of_families() {
        let z = Complex64::new(0.3, 0.4);
        let k = curvature_at(&family_dn(2).unwrap(), z).unwrap();
        assert!((k - 2.0).abs() < 1e-10, "{k}");
        let k = curvature_at(&family_d2n(2).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
        assert!((k - 1.0).abs() < 1e-10, "{k}");
    }

    #[test]
    fn gauss_slack_of_families() {
        let z = Complex64::new(-0.2, 0.9);
        for n in 2..=5 {
            let s = gauss_slack(&family_dn(n).unwrap(), z).unwrap();
            assert!((s - (4.0 - 4.0 / n as f64)).abs() < 1e-9);
        }
        let s = gauss_slack(&family_d2n(2).unwrap(), z).unwrap();
        assert!((s - 3.0).abs() < 1e-9);
    }

    #[test]
    fn curvature_rejects_non_immersion() {
        // F = (z², 0) in G(2,3): f'(0) = 0
        let z = Complex64::new(0.0, 0.0);
        let c = Curve::from_rows(1, 2, &[vec![z], vec![Complex64::new(1.0, 0.0)]], &[]).unwrap();
        assert!(matches!(curvature_at(&c, z), Err(Error::NotImmersion { .. })));
    }

    /// Eighth-order central second derivative along one axis.
    fn d2(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64, axis: usize) -> f64 {
        const W: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        let at = |s: f64| if axis == 0 { f(x + s * h, y) } else { f(x, y + s * h) };
        let mut acc = W[0] * at(0.0);
        for (k, w) in W.iter().enumerate().skip(1) {
            acc += w * (at(k as f64) + at(-(k as f64)));
        }
        acc / (h * h)
    }

    fn laplacian(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        d2(f, x, y, h, 0) + d2(f, x, y, h, 1)
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (n, d) in [(2, 2), (2, 3), (3, 3)] {
            let c = random_curve(&mut rng, n, d);
            let log_p = |x: f64, y: f64| c.plucker_norm_sqr(Complex64::new(x, y)).ln();
            // λ² = ∂∂̄ log P = Δ log P / 4
            let density = |x: f64, y: f64| laplacian(&log_p, x, y, 1e-2) / 4.0;
            let log_density = |x: f64, y: f64| density(x, y).ln();
            let mut values = Vec::new();
            for _ in 0..5 {
                let (x, y) = (rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
                let k_fd = -laplacian(&log_density, x, y, 2e-2) / (2.0 * density(x, y));
                let k = curvature_at(&c, Complex64::new(x, y)).unwrap();
                assert!((k - k_fd).abs() <= 1e-6 * (1.0 + k.abs()), "n={n} d={d}: {k} vs {k_fd}");
                values.push(k);
            }
            let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread > 1e-6, "random curve should not have constant curvature");
        }
    }

    #[test]
    fn lemma_q_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a1: Vec<Vec<Complex64>> = (0..8).map(|_| (0..3).map(|_| cplx(&mut rng)).collect()).collect();
        let lambda: Vec<Complex64> = (0..10).map(|_| cplx(&mut rng)).collect();
        assert!(lemma_q(3, 1, &lambda, &a1).unwrap().norm_sqr() == 0.0);
        let q = lemma_q(5, 2, &lambda, &a1).unwrap();
        assert!(q.norm_sqr().sqrt() <= 1e-12);
        let a4: Vec<Vec<Complex64>> = (0..8).map(|_| (0..4).map(|_| cplx(&mut rng)).collect()).collect();
        assert!(lemma_q(9, 1, &lambda, &a4).unwrap().norm_sqr().sqrt() <= 1e-11);
        assert!(lemma_q(9, 0, &lambda, &a4).is_err());
        assert!(lemma_q(9, 1, &lambda[..5], &a4).is_err());
        assert!(lemma_q(9, 1, &lambda, &a4[..3]).is_err());
    }

    #[test]
    fn lemma_q_double_sum_is_nontrivial_termwise() {
        // the individual terms do not vanish; only their sum does
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a1: Vec<Vec<Complex64>> = (0..8).map(|_| (0..3).map(|_| cplx(&mut rng)).collect()).collect();
        let lambda: Vec<Complex64> = (0..10).map(|_| cplx(&mut rng)).collect();
        let (d, rho) = (7, 1);
        let mut total = 0.0;
        for k in 1..d - rho {
            for j in 0..k {
                let t = MultiVec::vector(&a1[rho + k - 1]).wedge(&MultiVec::vector(&a1[d - k + j - 1])).unwrap();
                total += t.scale(lambda[d - j]).norm_sqr();
            }
        }
        assert!(total > 1e-3);
        assert!(lemma_q(d, rho, &lambda, &a1).unwrap().norm_sqr().sqrt() < 1e-12);
    }

    #[test]
    fn tail_probe_of_families() {
        let p = tail_probe(&family_d2n(2).unwrap(), DEFAULT_CC_TOL).unwrap();
        assert_eq!(p.tau, 3);
        assert!(!p.rows_swapped);
        let l3 = p.lambda.iter().find(|(r, _)| *r == 3).unwrap().1;
        let l2 = p.lambda.iter().find(|(r, _)| *r == 2).unwrap().1;
        assert!(l3.norm() < 1e-14);
        assert!((l2 - Complex64::new(3f64.sqrt() / 2.0, 0.0)).norm() < 1e-14);
        assert!(p.residual <= 1e-12);
        assert!(p.dim_bound_ok);

        for n in 2..=5 {
            let p = tail_probe(&family_dn(n).unwrap(), DEFAULT_CC_TOL).unwrap();
            assert!(p.lambda.iter().all(|(_, l)| l.norm() == 0.0));
            assert_eq!(p.residual, 0.0);
            assert!(p.dim_bound_ok && n <= p.tau);
        }
    }

    #[test]
    fn tail_probe_rejects_non_cc() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        assert!(matches!(tail_probe(&random_curve(&mut rng, 2, 3), DEFAULT_CC_TOL), Err(Error::Probe(_))));
    }
}
