//! Exterior algebra over ℂⁿ for grades 1 through 4.
//!
//! Elements of Λᵏℂⁿ are stored densely in the lexicographic basis of strictly
//! increasing index tuples `i₁ < … < i_k`. Indices are zero-based throughout:
//! the basis element `ε₀∧ε₁` of Λ²ℂ³ has rank 0, `ε₁∧ε₂` has rank 2.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest grade supported by [`MultiVec`].
pub const MAX_GRADE: usize = 4;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Lexicographic rank of a strictly increasing tuple drawn from `0..n`.
pub fn tuple_rank(tuple: &[usize], n: usize) -> Result<usize> {
    let k = tuple.len();
    for w in tuple.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidTuple(format!("{tuple:?} is not strictly increasing")));
        }
    }
    if let Some(&last) = tuple.last() {
        if last >= n {
            return Err(Error::InvalidTuple(format!("{tuple:?} has an index >= n = {n}")));
        }
    }
    // Count tuples that precede `tuple`: for each slot, every smaller admissible
    // value contributes C(n - 1 - v, k - 1 - slot) completions.
    let mut rank = 0;
    let mut lo = 0;
    for (slot, &t) in tuple.iter().enumerate() {
        for v in lo..t {
            rank += binomial(n - 1 - v, k - 1 - slot);
        }
        lo = t + 1;
    }
    Ok(rank)
}

/// Inverse of [`tuple_rank`].
pub fn rank_tuple(rank: usize, n: usize, k: usize) -> Result<Vec<usize>> {
    let total = binomial(n, k);
    if rank >= total {
        return Err(Error::InvalidTuple(format!(
            "rank {rank} out of range for C({n},{k}) = {total}"
        )));
    }
    let mut out = Vec::with_capacity(k);
    let mut rest = rank;
    let mut v = 0;
    for slot in 0..k {
        loop {
            let block = binomial(n - 1 - v, k - 1 - slot);
            if rest < block {
                break;
            }
            rest -= block;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    Ok(out)
}

/// All strictly increasing `k`-tuples from `0..n` in lexicographic order.
pub fn basis_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// An element of Λᵏℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiVec {
    n: usize,
    grade: usize,
    coeffs: Vec<Complex64>,
}

impl MultiVec {
    pub fn zeros(n: usize, grade: usize) -> Result<Self> {
        if grade == 0 || grade > MAX_GRADE {
            return Err(Error::GradeOverflow(grade));
        }
        Ok(Self { n, grade, coeffs: vec![Complex64::new(0.0, 0.0); binomial(n, grade)] })
    }

    pub fn from_coeffs(n: usize, grade: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if grade == 0 || grade > MAX_GRADE {
            return Err(Error::GradeOverflow(grade));
        }
        let expected = binomial(n, grade);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "grade-{grade} element of Λ(C^{n}) needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { n, grade, coeffs })
    }

    /// Grade-1 element with the given components.
    pub fn vector(v: &[Complex64]) -> Self {
        Self { n: v.len(), grade: 1, coeffs: v.to_vec() }
    }

    /// Basis element `ε_{i₁}∧…∧ε_{i_k}`.
    pub fn basis(n: usize, tuple: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(n, tuple.len())?;
        let r = tuple_rank(tuple, n)?;
        out.coeffs[r] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient on the basis element indexed by `tuple`.
    pub fn get(&self, tuple: &[usize]) -> Result<Complex64> {
        if tuple.len() != self.grade {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for a grade-{} element",
                tuple.len(),
                self.grade
            )));
        }
        Ok(self.coeffs[tuple_rank(tuple, self.n)?])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { n: self.n, grade: self.grade, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.grade != other.grade {
            return Err(Error::DimensionMismatch(format!(
                "Λ^{}(C^{}) vs Λ^{}(C^{})",
                self.grade, self.n, other.grade, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, grade: self.grade, coeffs })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    /// Hermitian inner product `⟨u, v⟩ = Σ u_I · conj(v_I)`, conjugate-linear
    /// in the second slot.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(herm_dot(&self.coeffs, &other.coeffs))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Exterior product. Fails when the ambient dimensions differ or the
    /// resulting grade exceeds [`MAX_GRADE`].
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "wedge of elements over C^{} and C^{}",
                self.n, other.n
            )));
        }
        let grade = self.grade + other.grade;
        if grade > MAX_GRADE {
            return Err(Error::GradeOverflow(grade));
        }
        let n = self.n;
        let mut out = Self::zeros(n, grade)?;
        let left = basis_tuples(n, self.grade);
        let right = basis_tuples(n, other.grade);
        let mut merged = Vec::with_capacity(grade);
        for (i, ti) in left.iter().enumerate() {
            let a = self.coeffs[i];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, tj) in right.iter().enumerate() {
                let b = other.coeffs[j];
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(sign) = shuffle_sign(ti, tj, &mut merged) {
                    let r = tuple_rank(&merged, n)?;
                    out.coeffs[r] += a * b * sign;
                }
            }
        }
        Ok(out)
    }
}

/// Merge two increasing tuples; returns the parity of the shuffle or `None`
/// when they share an index.
fn shuffle_sign(a: &[usize], b: &[usize], merged: &mut Vec<usize>) -> Option<f64> {
    merged.clear();
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            merged.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining a's
            inversions += a.len() - i;
            merged.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some(if inversions.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// `Σ u_i · conj(v_i)`.
pub fn herm_dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Fast path for the wedge of two vectors: the Λ² coefficients
/// `u_i v_j − u_j v_i` for `i < j` in lexicographic order.
pub fn wedge_vectors(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    debug_assert_eq!(n, v.len());
    let mut out = Vec::with_capacity(binomial(n, 2));
    for i in 0..n {
        for j in i + 1..n {
            out.push(u[i] * v[j] - u[j] * v[i]);
        }
    }
    out
}

/// Accumulating form of [`wedge_vectors`]: `out += s · (u ∧ v)`.
pub fn wedge_vectors_into(u: &[Complex64], v: &[Complex64], s: Complex64, out: &mut [Complex64]) {
    let n = u.len();
    let mut r = 0;
    for i in 0..n {
        for j in i + 1..n {
            out[r] += s * (u[i] * v[j] - u[j] * v[i]);
            r += 1;
        }
    }
}
