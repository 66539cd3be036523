//! Congruence moves on curves.
//!
//! - [`apply_gl2`]: `F ↦ M F`, the frame change `f_M = M [I₂, F] diag(M⁻¹, Iₙ)`.
//! - [`apply_unitary`]: `A_α ↦ A_α U` for `U ∈ U(n)`.
//! - [`apply_mobius`]: reparametrisation `z = m(w)`, renormalised back into
//!   the chart `[I₂, F']` with `F'(0) = 0` by a constant unitary of ℂⁿ⁺².
//! - [`canonicalize_a1`]: SVD normal form of `A₁`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exterior::{binomial, herm_dot, wedge_vectors};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Self { a, b, c, d };
        let scale = [a, b, c, d].iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
        if !(m.det().norm() > 1e-12 * scale) {
            return Err(Error::Singular(format!("Möbius determinant {} vanishes", m.det())));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Image of z; `None` at the pole.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        if den == ZERO {
            None
        } else {
            Some((self.a * z + self.b) / den)
        }
    }

    /// Image of z as a homogeneous pair `(z₀, z₁)` with `z = z₁ / z₀`.
    pub fn apply_homogeneous(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.c * z + self.d, self.a * z + self.b)
    }

    /// Whether the normalised matrix lies in U(2), i.e. m is a rotation of S².
    pub fn is_rotation(&self, tol: f64) -> bool {
        let s = self.det().sqrt();
        let (a, b, c, d) = (self.a / s, self.b / s, self.c / s, self.d / s);
        let cols = (a.norm_sqr() + c.norm_sqr() - 1.0).abs() + (b.norm_sqr() + d.norm_sqr() - 1.0).abs();
        cols + (a.conj() * b + c.conj() * d).norm() <= tol
    }

    /// A Haar-random rotation of the sphere, `((a, b), (−b̄, ā))` with
    /// `|a|² + |b|² = 1`.
    pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = Complex64::new(v[0], v[1]) / norm;
        let b = Complex64::new(v[2], v[3]) / norm;
        Self { a, b, c: -b.conj(), d: a.conj() }
    }
}

/// A Haar-random n×n unitary (QR of a complex Gaussian matrix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `A_α ↦ M A_α` for an invertible 2×2 matrix M.
pub fn apply_gl2(c: &Curve, m: &DMatrix<Complex64>) -> Result<Curve> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!("frame change must be 2x2, got {}x{}", m.nrows(), m.ncols())));
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let scale = m.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    if !(det.norm() > 1e-12 * scale) {
        return Err(Error::Singular("frame change matrix is singular".into()));
    }
    c.map_coeffs(|a| m * a)
}

/// `A_α ↦ A_α U` for `U ∈ U(n)`.
pub fn apply_unitary(c: &Curve, u: &DMatrix<Complex64>) -> Result<Curve> {
    if u.nrows() != c.n() || u.ncols() != c.n() {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be {0}x{0}, got {1}x{2}",
            c.n(),
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    c.map_coeffs(|a| a * u)
}

/// Plücker polynomial `(1, F₂, −F₁, F₁∧F₂)` as ascending coefficient vectors.
fn plucker_poly(c: &Curve) -> Vec<Vec<Complex64>> {
    let n = c.n();
    let len = binomial(n + 2, 2);
    let cv = c.coefficient_vectors();
    let top = 2 * c.d();
    let mut out = vec![vec![ZERO; len]; top + 1];
    out[0][0] = ONE;
    for alpha in 1..=c.d() {
        let (a1, a2) = (c.row(0, alpha), c.row(1, alpha));
        for j in 0..n {
            out[alpha][1 + j] = a2[j];
            out[alpha][1 + n + j] = -a1[j];
        }
    }
    for (p, row) in out.iter_mut().enumerate().skip(1) {
        row[1 + 2 * n..].copy_from_slice(cv.v(p).coeffs());
    }
    // noise in the top coefficients would dominate the plane at ∞
    let scale = out.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    while out.len() > 1 && out.last().is_some_and(|r| r.iter().all(|x| x.norm() <= 1e-8 * scale)) {
        out.pop();
    }
    out
}

/// Entry `ω_{ik}` of an antisymmetric bivector stored in lexicographic order.
fn bivector_entry(omega: &[Complex64], dim: usize, i: usize, k: usize) -> Complex64 {
    use std::cmp::Ordering::*;
    let rank = |a: usize, b: usize| a * dim - a * (a + 1) / 2 + (b - a - 1);
    match i.cmp(&k) {
        Equal => ZERO,
        Less => omega[rank(i, k)],
        Greater => -omega[rank(k, i)],
    }
}

/// Orthonormalises `vectors` against `basis` (rows), appending the survivors.
fn gram_schmidt_extend(basis: &mut Vec<Vec<Complex64>>, vectors: impl IntoIterator<Item = Vec<Complex64>>, tol: f64) {
    for mut v in vectors {
        for _ in 0..2 {
            for b in basis.iter() {
                let p = herm_dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// A unitary B whose first two rows span the plane of the decomposable
/// bivector ω, chosen close to the identity when possible.
fn plane_frame(omega: &[Complex64], dim: usize) -> Result<DMatrix<Complex64>> {
    let norm = omega.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ChartFailure("zero Plücker vector".into()));
    }
    // spanning vectors of the plane by contraction with the dominant entry
    let (mut bi, mut bk, mut best) = (0, 1, 0.0);
    for i in 0..dim {
        for k in i + 1..dim {
            let v = bivector_entry(omega, dim, i, k).norm();
            if v > best {
                (bi, bk, best) = (i, k, v);
            }
        }
    }
    let x: Vec<Complex64> = (0..dim).map(|k| bivector_entry(omega, dim, bi, k)).collect();
    let y: Vec<Complex64> = (0..dim).map(|k| bivector_entry(omega, dim, bk, k)).collect();
    let mut plane = Vec::new();
    gram_schmidt_extend(&mut plane, [x, y], 1e-12 * norm);
    if plane.len() != 2 {
        return Err(Error::ChartFailure("Plücker vector is not decomposable".into()));
    }
    // Löwdin-orthonormalise the projections of e₁, e₂ when they span the plane,
    // so that a plane already equal to span(e₁, e₂) yields the identity.
    let proj = DMatrix::from_fn(2, 2, |r, s| plane[s][r].conj());
    let pm = DMatrix::from_fn(2, dim, |r, k| (0..2).map(|s| proj[(r, s)] * plane[s][k]).sum::<Complex64>());
    let gram = &pm * pm.adjoint();
    let eig = gram.clone().symmetric_eigen();
    let rows = if eig.eigenvalues.iter().all(|&l| l > 1e-6) {
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)))
            * eig.eigenvectors.adjoint();
        let b = inv_sqrt * pm;
        vec![b.row(0).iter().copied().collect::<Vec<_>>(), b.row(1).iter().copied().collect()]
    } else {
        plane
    };
    // re-orthonormalise: the Löwdin step loses accuracy for small eigenvalues
    let mut basis = Vec::new();
    gram_schmidt_extend(&mut basis, rows, 1e-3);
    if basis.len() != 2 {
        return Err(Error::ChartFailure("could not orthonormalise the plane".into()));
    }
    let standard = (0..dim).map(|i| {
        let mut e = vec![ZERO; dim];
        e[i] = ONE;
        e
    });
    gram_schmidt_extend(&mut basis, standard, 1e-8);
    if basis.len() != dim {
        return Err(Error::ChartFailure("could not complete a unitary frame".into()));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, k| basis[r][k]))
}

fn inverse_2x2(m: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let scale = m.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    if !(det.norm() > 1e-13 * scale) {
        return None;
    }
    Some(DMatrix::from_row_slice(2, 2, &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det]))
}

/// Reparametrises by `z = m(w)` and renormalises into the chart at `w = 0`.
///
/// The moved curve is expressed as `[I₂, F'(w)]` with respect to a constant
/// unitary frame of ℂⁿ⁺² adapted to the plane `f(m(0))`. For constantly
/// curved curves and rotations m the result is again polynomial of degree
/// `≤ d`; otherwise the chart is rational and [`Error::ChartFailure`] is
/// returned.
pub fn apply_mobius(c: &Curve, m: &Mobius) -> Result<Curve> {
    let n = c.n();
    let d = c.d();
    let dim = n + 2;
    let pl = plucker_poly(c);
    let top = pl.len() - 1;

    // plane at w = 0 in homogeneous form
    let (z0, z1) = m.apply_homogeneous(ZERO);
    let mut omega = vec![ZERO; binomial(dim, 2)];
    for (p, coeff) in pl.iter().enumerate() {
        let w = z1.powu(p as u32) * z0.powu((top - p) as u32);
        for (o, x) in omega.iter_mut().zip(coeff) {
            *o += x * w;
        }
    }
    let frame = plane_frame(&omega, dim)?;
    let rot = frame.adjoint();

    // homogeneous frame [z₀ᵈ I, Σ A_α z₁^α z₀^{d−α}] at a unit representative of m(w)
    let chart = |w: Complex64| -> Result<DMatrix<Complex64>> {
        let (z0, z1) = m.apply_homogeneous(w);
        let norm = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
        let (z0, z1) = (z0 / norm, z1 / norm);
        let mut x = DMatrix::from_element(2, dim, ZERO);
        let lead = z0.powu(d as u32);
        x[(0, 0)] = lead;
        x[(1, 1)] = lead;
        for (alpha, a) in c.coeffs().iter().enumerate() {
            let weight = z1.powu(alpha as u32 + 1) * z0.powu((d - alpha - 1) as u32);
            for r in 0..2 {
                for j in 0..n {
                    x[(r, 2 + j)] += a[(r, j)] * weight;
                }
            }
        }
        let moved = x * &rot;
        let left = moved.columns(0, 2).into_owned();
        let inv = inverse_2x2(&left)
            .ok_or_else(|| Error::ChartFailure(format!("chart is singular at w = {w}: basepoint outside the chart")))?;
        Ok(inv * moved.columns(2, n))
    };

    // the frame loses rank where m(w) = ∞ whenever ∞ is a ramification point,
    // so the sampling circle keeps a factor of two away from that point
    let radius = match (m.c.norm() > 1e-300).then(|| (-m.d / m.c).norm()) {
        Some(r) if (1.0..2.0).contains(&r) => r / 2.0,
        Some(r) if r > 0.5 && r < 1.0 => 2.0 * r,
        _ => 1.0,
    };
    let samples = 2 * (d + 1);
    let mut values = Vec::with_capacity(samples);
    for j in 0..samples {
        let w = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64);
        values.push(chart(w)?);
    }
    let scale = values.iter().flat_map(|v| v.iter()).map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
    let mut fitted = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut acc = DMatrix::from_element(2, n, ZERO);
        for (j, v) in values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / samples as f64);
            acc += v * phase;
        }
        fitted.push(acc / Complex64::new(samples as f64 * radius.powi(k as i32), 0.0));
    }
    for (k, a) in fitted.iter().enumerate() {
        let size = a.iter().map(|x| x.norm()).fold(0.0, f64::max) * radius.powi(k as i32);
        if (k == 0 || k > d) && size > 1e-9 * scale {
            return Err(Error::ChartFailure(format!(
                "moved chart has a z^{k} component of size {size:e}; the result is not a degree-{d} polynomial"
            )));
        }
    }
    let snap = 1e-14 * scale;
    let coeffs: Vec<DMatrix<Complex64>> = fitted[1..=d]
        .iter()
        .map(|a| {
            a.map(|x| {
                Complex64::new(if x.re.abs() < snap { 0.0 } else { x.re }, if x.im.abs() < snap { 0.0 } else { x.im })
            })
        })
        .collect();
    let moved = Curve::new(n, d, coeffs)?;

    // confirm the fit between the sample points
    for j in [0.5, 3.5, 7.5] {
        let w = Complex64::from_polar(radius, std::f64::consts::TAU * j / samples as f64);
        let Ok(direct) = chart(w) else { continue };
        let err = (moved.evaluate(w) - direct).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if err > 1e-8 * scale {
            return Err(Error::ChartFailure(format!("polynomial fit misses the moved chart by {err:e} at w = {w}")));
        }
    }
    Ok(moved)
}

/// Normal form `a₁^{(1)} = (s₁, 0, …)`, `a₂^{(1)} = (0, s₂, 0, …)` with
/// `s₁ ≥ s₂ ≥ 0`, reached by a unitary frame change and a unitary of ℂⁿ.
/// Columns beyond the rank of `A₁` are phased so that their first nonzero
/// coefficient (α ascending, row 1 before row 2) is real and positive.
pub fn canonicalize_a1(c: &Curve) -> Result<Curve> {
    let n = c.n();
    let a1 = c.a(1);
    let scale = c.max_abs_entry();
    let h = &a1 * a1.adjoint();
    let (h11, h22, h12) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)]);
    if h11 + h22 <= (1e-14 * scale).powi(2) || h11 + h22 == 0.0 {
        return Err(Error::InvalidCurve("A_1 = 0: the curve is not immersive at the origin".into()));
    }
    let tiny = 1e-15 * (h11 + h22);
    // left singular vectors p₁, p₂ as rows of M = Pᴴ
    let m = if h12.norm() <= tiny {
        if h11 >= h22 - tiny {
            DMatrix::identity(2, 2)
        } else {
            DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
        }
    } else {
        let mean = 0.5 * (h11 + h22);
        let gap = (0.25 * (h11 - h22).powi(2) + h12.norm_sqr()).sqrt();
        let top = mean + gap;
        let cand1 = [h12, Complex64::new(top - h11, 0.0)];
        let cand2 = [Complex64::new(top - h22, 0.0), h12.conj()];
        let n1 = cand1.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let n2 = cand2.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let (v, nv) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
        let mut p1 = v.map(|x| x / nv.sqrt());
        normalize_phase(&mut p1);
        let mut p2 = [-p1[1].conj(), p1[0].conj()];
        normalize_phase(&mut p2);
        DMatrix::from_row_slice(2, 2, &[p1[0].conj(), p1[1].conj(), p2[0].conj(), p2[1].conj()])
    };
    let rows = &m * &a1;
    let s: Vec<f64> = (0..2).map(|r| rows.row(r).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    for r in 0..2 {
        if s[r] > 1e-12 * s[0] {
            cols.push(rows.row(r).iter().map(|x| x.conj() / s[r]).collect());
        }
    }
    let rank = cols.len();
    let standard = (0..n).map(|i| {
        let mut e = vec![ZERO; n];
        e[i] = ONE;
        e
    });
    gram_schmidt_extend(&mut cols, standard, 1e-8);
    let u = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let moved = apply_unitary(&apply_gl2(c, &m)?, &u)?;

    // fix the residual phase freedom of the trailing columns
    let mut phases = vec![ONE; n];
    let thresh = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for (j, ph) in phases.iter_mut().enumerate().skip(rank) {
        let first = moved.coeffs().iter().flat_map(|a| [a[(0, j)], a[(1, j)]]).find(|x| x.norm() > thresh);
        if let Some(x) = first {
            *ph = x.conj() / x.norm();
        }
    }
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
    let mut out = moved.map_coeffs(|a| a * &diag)?;
    // exact zeros and real singular values in the pinned block
    let mut coeffs = out.coeffs().to_vec();
    if let Some(a) = coeffs.first_mut() {
        for r in 0..2 {
            for j in 0..n {
                a[(r, j)] = if j == r && r < rank { Complex64::new(s[r], 0.0) } else { ZERO };
            }
        }
    }
    out = Curve::new(n, c.d(), coeffs)?;
    Ok(out)
}

/// Makes the first entry of non-negligible modulus real and positive.
fn normalize_phase(v: &mut [Complex64; 2]) {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if let Some(x) = v.iter().find(|x| x.norm() > 1e-14 * norm).copied() {
        let ph = x.conj() / x.norm();
        for y in v.iter_mut() {
            *y *= ph;
        }
    }
}

/// Plücker image of `f` moved by the ambient map `diag(M⁻¹, Iₙ)`, i.e. what
/// [`apply_gl2`] produces up to a scalar.
pub fn plucker_after_frame_change(c: &Curve, m: &DMatrix<Complex64>, z: Complex64) -> Result<Vec<Complex64>> {
    let n = c.n();
    let inv = inverse_2x2(m).ok_or_else(|| Error::Singular("frame change matrix is singular".into()))?;
    let f = c.evaluate(z);
    let mut rows = Vec::with_capacity(2);
    for r in 0..2 {
        let mut v = vec![ZERO; n + 2];
        v[0] = inv[(r, 0)];
        v[1] = inv[(r, 1)];
        for j in 0..n {
            v[2 + j] = f[(r, j)];
        }
        rows.push(v);
    }
    Ok(wedge_vectors(&rows[0], &rows[1]))
}
