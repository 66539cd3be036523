//! The curve model `f(z) = [I₂, F(z)]` with `F(z) = Σ_{α=1}^{d} A_α z^α`.
//!
//! Each `A_α` is a 2×n complex matrix whose rows are `a₁^{(α)}` and
//! `a₂^{(α)}`. Constant curvature `4/d` is equivalent to the polynomial
//! identity
//!
//! ```text
//! 1 + |F₁|² + |F₂|² + |F₁∧F₂|² = (1 + z z̄)^d
//! ```
//!
//! which, coefficient by coefficient, is the Hermitian Gram system checked by
//! [`Curve::gram_residual`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, herm_dot, wedge_vectors, wedge_vectors_into, MultiVec};

/// Default tolerance on `max |Δ|` for declaring a curve constantly curved.
pub const DEFAULT_CC_TOL: f64 = 1e-10;
/// Default relative tolerance for the numerical rank of the coefficient span.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Version tag written into every curve file.
pub const SCHEMA_VERSION: u32 = 1;
/// Size caps for curves accepted from files.
pub const MAX_N: usize = 32;
pub const MAX_D: usize = 128;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "CurveFile", try_from = "CurveFile")]
pub struct Curve {
    n: usize,
    d: usize,
    coeffs: Vec<DMatrix<Complex64>>,
}

/// First-order coefficient vectors `W_α ∈ ℂ²ⁿ` (α = 1..d) and the wedge
/// coefficients `V_p ∈ Λ²ℂⁿ` of `F₁∧F₂` (p = 1..2d).
#[derive(Clone, Debug)]
pub struct CoeffVectors {
    w: Vec<Vec<Complex64>>,
    v: Vec<MultiVec>,
}

impl CoeffVectors {
    /// `W_α` for `1 ≤ α ≤ d`; zero beyond.
    pub fn w(&self, alpha: usize) -> &[Complex64] {
        &self.w[alpha - 1]
    }

    /// `V_p` for `1 ≤ p ≤ 2d`.
    pub fn v(&self, p: usize) -> &MultiVec {
        &self.v[p - 1]
    }

    pub fn all_w(&self) -> &[Vec<Complex64>] {
        &self.w
    }

    pub fn all_v(&self) -> &[MultiVec] {
        &self.v
    }
}

/// Coefficient matrix of `|Pl∘f|²` against its binomial target.
#[derive(Clone, Debug)]
pub struct GramReport {
    /// Actual coefficient of `z^p z̄^q` in `1 + |F₁|² + |F₂|² + |F₁∧F₂|²`,
    /// indexed `p, q = 0..=2d`.
    pub actual: DMatrix<Complex64>,
    /// `actual − δ_{pq} C(d, p)`.
    pub residual: DMatrix<Complex64>,
    pub max_abs: f64,
    pub frobenius: f64,
    pub is_cc: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub is_cc: bool,
    pub is_full: bool,
    /// `d ≤ C(n+2, 2) − 1`.
    pub degree_ok: bool,
    /// The Gram diagonal matches the binomial targets of the claimed `d`.
    pub degree_consistent: bool,
    pub max_residual: f64,
    pub fullness_rank: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.is_cc && self.is_full && self.degree_ok
    }
}

impl Curve {
    /// Builds a curve from `A_1, …, A_k` (`k ≤ d`), each a 2×n matrix.
    pub fn new(n: usize, d: usize, coeffs: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidCurve(format!("n = {n} and d = {d} must both be positive")));
        }
        if n > MAX_N || d > MAX_D {
            return Err(Error::InvalidCurve(format!(
                "n = {n}, d = {d} exceed the supported size (n <= {MAX_N}, d <= {MAX_D})"
            )));
        }
        if coeffs.len() > d {
            return Err(Error::InvalidCurve(format!(
                "{} coefficient matrices for claimed degree {d}",
                coeffs.len()
            )));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if a.nrows() != 2 || a.ncols() != n {
                return Err(Error::InvalidCurve(format!(
                    "A_{} is {}x{}, expected 2x{n}",
                    i + 1,
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidCurve(format!("A_{} has a non-finite entry", i + 1)));
            }
        }
        Ok(Self { n, d, coeffs })
    }

    /// Builds a curve from its two rows given as coefficient lists:
    /// `f1[α-1]` is `a₁^{(α)}`.
    pub fn from_rows(n: usize, d: usize, f1: &[Vec<Complex64>], f2: &[Vec<Complex64>]) -> Result<Self> {
        let len = f1.len().max(f2.len());
        let mut coeffs = Vec::with_capacity(len);
        for alpha in 0..len {
            let mut a = DMatrix::from_element(2, n, ZERO);
            for (row, src) in [f1, f2].iter().enumerate() {
                if let Some(v) = src.get(alpha) {
                    if v.len() != n {
                        return Err(Error::InvalidCurve(format!(
                            "row {} of A_{} has length {}, expected {n}",
                            row + 1,
                            alpha + 1,
                            v.len()
                        )));
                    }
                    for (j, x) in v.iter().enumerate() {
                        a[(row, j)] = *x;
                    }
                }
            }
            coeffs.push(a);
        }
        Self::new(n, d, coeffs)
    }

    /// The curve with every `A_α = 0`.
    pub fn zero(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![DMatrix::from_element(2, n, ZERO); d])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[DMatrix<Complex64>] {
        &self.coeffs
    }

    /// `A_α` for `1 ≤ α ≤ d`, zero when not stored.
    pub fn a(&self, alpha: usize) -> DMatrix<Complex64> {
        self.coeffs.get(alpha.wrapping_sub(1)).cloned().unwrap_or_else(|| DMatrix::from_element(2, self.n, ZERO))
    }

    /// Row `row ∈ {0, 1}` of `A_α` as a vector (`a₁^{(α)}` or `a₂^{(α)}`).
    pub fn row(&self, row: usize, alpha: usize) -> Vec<Complex64> {
        match self.coeffs.get(alpha.wrapping_sub(1)) {
            Some(a) => a.row(row).iter().copied().collect(),
            None => vec![ZERO; self.n],
        }
    }

    /// The same coefficients with a different claimed degree.
    pub fn with_degree(&self, d: usize) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > d && coeffs.last().is_some_and(|a| a.iter().all(|c| *c == ZERO)) {
            coeffs.pop();
        }
        Self::new(self.n, d, coeffs)
    }

    /// Applies `f` to every coefficient matrix.
    pub fn map_coeffs(&self, f: impl Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>) -> Result<Self> {
        Self::new(self.n, self.d, self.coeffs.iter().map(f).collect())
    }

    /// Index of the highest nonzero `A_α`, 0 for the zero curve.
    pub fn polynomial_degree(&self) -> usize {
        self.coeffs.iter().rposition(|a| a.iter().any(|c| *c != ZERO)).map_or(0, |i| i + 1)
    }

    /// Largest modulus among all coefficient entries.
    pub fn max_abs_entry(&self) -> f64 {
        self.coeffs.iter().flat_map(|a| a.iter()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn coefficient_vectors(&self) -> CoeffVectors {
        let (n, d) = (self.n, self.d);
        let w = (1..=d)
            .map(|alpha| {
                let mut v = self.row(0, alpha);
                v.extend(self.row(1, alpha));
                v
            })
            .collect();
        let m = binomial(n, 2);
        let mut v = vec![vec![ZERO; m]; 2 * d];
        let k = self.coeffs.len();
        for alpha in 1..=k {
            let a1 = self.row(0, alpha);
            for beta in 1..=k {
                let a2 = self.row(1, beta);
                wedge_vectors_into(&a1, &a2, ONE, &mut v[alpha + beta - 1]);
            }
        }
        let v = v.into_iter().map(|c| MultiVec::from_coeffs(n, 2, c).expect("grade-2 size")).collect();
        CoeffVectors { w, v }
    }

    /// Gram residual of `|Pl∘f|²` against `(1 + z z̄)^d`.
    pub fn gram_residual(&self, tol: f64) -> GramReport {
        let d = self.d;
        let cv = self.coefficient_vectors();
        let size = 2 * d + 1;
        let zero_w = vec![ZERO; 2 * self.n];
        let w = |p: usize| -> &[Complex64] {
            if (1..=d).contains(&p) {
                cv.w(p)
            } else {
                &zero_w
            }
        };
        let mut actual = DMatrix::from_element(size, size, ZERO);
        actual[(0, 0)] = ONE;
        for p in 1..size {
            for q in p..size {
                let g = herm_dot(w(p), w(q)) + herm_dot(cv.v(p).coeffs(), cv.v(q).coeffs());
                actual[(p, q)] = g;
                actual[(q, p)] = g.conj();
            }
        }
        let mut residual = actual.clone();
        for p in 0..=d {
            residual[(p, p)] -= binomial(d, p) as f64;
        }
        let max_abs = residual.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let frobenius = residual.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        GramReport { actual, residual, max_abs, frobenius, is_cc: max_abs <= tol }
    }

    /// Numerical rank of the 2d×n matrix stacking every `a₁^{(α)}`, `a₂^{(α)}`.
    pub fn fullness_rank(&self, tol: f64) -> usize {
        if self.coeffs.is_empty() {
            return 0;
        }
        let rows = 2 * self.coeffs.len();
        let m = DMatrix::from_fn(rows, self.n, |r, j| self.coeffs[r / 2][(r % 2, j)]);
        let sv = m.svd(false, false).singular_values;
        let top = sv.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * top).count()
    }

    pub fn verify(&self, tol: f64) -> VerifyReport {
        self.verify_with(tol, DEFAULT_RANK_TOL)
    }

    pub fn verify_with(&self, cc_tol: f64, rank_tol: f64) -> VerifyReport {
        let gram = self.gram_residual(cc_tol);
        let rank = self.fullness_rank(rank_tol);
        // the z z̄ coefficient is the degree itself for any curve of constant curvature
        let g11 = if self.d >= 1 { gram.actual[(1, 1)].re } else { 0.0 };
        let degree_consistent =
            self.polynomial_degree() <= self.d && (g11 - self.d as f64).abs() <= cc_tol.max(1e-12) * self.d as f64;
        VerifyReport {
            is_cc: gram.is_cc,
            is_full: rank == self.n,
            degree_ok: self.d < binomial(self.n + 2, 2),
            degree_consistent,
            max_residual: gram.max_abs,
            fullness_rank: rank,
        }
    }

    /// `F(z)` as a 2×n matrix, by Horner's rule.
    pub fn evaluate(&self, z: Complex64) -> DMatrix<Complex64> {
        let mut acc = DMatrix::from_element(2, self.n, ZERO);
        for a in self.coeffs.iter().rev() {
            acc = (acc + a) * z;
        }
        acc
    }

    /// Plücker coordinates `(1, F₂, −F₁, F₁∧F₂)` of `f(z)`, i.e. the
    /// lexicographic Λ²ℂⁿ⁺² coordinates of `(1, 0, F₁) ∧ (0, 1, F₂)`.
    pub fn plucker(&self, z: Complex64) -> Vec<Complex64> {
        let f = self.evaluate(z);
        let f1: Vec<_> = f.row(0).iter().copied().collect();
        let f2: Vec<_> = f.row(1).iter().copied().collect();
        let mut out = Vec::with_capacity(binomial(self.n + 2, 2));
        out.push(ONE);
        out.extend(f2.iter().copied());
        out.extend(f1.iter().map(|c| -c));
        out.extend(wedge_vectors(&f1, &f2));
        out
    }

    /// `1 + |F₁|² + |F₂|² + |F₁∧F₂|²` evaluated directly at `z`.
    pub fn plucker_norm_sqr(&self, z: Complex64) -> f64 {
        self.plucker(z).iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CurveFile::from(self)).expect("curve serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&CurveFile::from(self)).expect("curve serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

/// On-disk curve schema:
/// `{"schema_version": 1, "n": .., "d": .., "coeffs": [[[[re, im]; n]; 2]; k]}`
/// with `coeffs[α-1]` holding `A_α`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<[Vec<[f64; 2]>; 2]>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl From<&Curve> for CurveFile {
    fn from(c: &Curve) -> Self {
        let coeffs = c
            .coeffs
            .iter()
            .map(|a| [0, 1].map(|r| a.row(r).iter().map(|z| [z.re, z.im]).collect()))
            .collect();
        Self { schema_version: SCHEMA_VERSION, n: c.n, d: c.d, coeffs }
    }
}

impl From<Curve> for CurveFile {
    fn from(c: Curve) -> Self {
        Self::from(&c)
    }
}

impl TryFrom<CurveFile> for Curve {
    type Error = Error;

    fn try_from(f: CurveFile) -> Result<Self> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", f.schema_version)));
        }
        if f.n == 0 || f.n > MAX_N {
            return Err(Error::InvalidCurve(format!("n = {} outside 1..={MAX_N}", f.n)));
        }
        let mut coeffs = Vec::with_capacity(f.coeffs.len());
        for (i, rows) in f.coeffs.iter().enumerate() {
            let mut a = DMatrix::from_element(2, f.n, ZERO);
            for (r, row) in rows.iter().enumerate() {
                if row.len() != f.n {
                    return Err(Error::InvalidCurve(format!(
                        "row {} of A_{} has {} entries, expected {}",
                        r + 1,
                        i + 1,
                        row.len(),
                        f.n
                    )));
                }
                for (j, [re, im]) in row.iter().enumerate() {
                    a[(r, j)] = Complex64::new(*re, *im);
                }
            }
            coeffs.push(a);
        }
        Curve::new(f.n, f.d, coeffs)
    }
}
