//! Explicit constantly curved curves: the Veronese coefficients and the two
//! degenerate families `V₀⁽ⁿ⁾ ⊕ v₀` (degree n) and `V₀⁽ⁿ⁺¹⁾ ⊕ V₁⁽ⁿ⁺¹⁾`
//! (degree 2n).
//!
//! Coefficients are the floating-point values of exact surds `√m`.

use num_complex::Complex64;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exterior::binomial;

/// Coefficients `√C(d, k)`, k = 0..=d, of the Veronese curve `V₀⁽ᵈ⁾`.
pub fn veronese(d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidCurve("Veronese degree must be positive".into()));
    }
    Ok((0..=d).map(|k| (binomial(d, k) as f64).sqrt()).collect())
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidCurve(format!("family needs n >= 2, got {n}")));
    }
    Ok(())
}

/// `F₁ = (√C(n,1) z, …, √C(n,n) zⁿ)`, `F₂ = 0`, degree n.
pub fn family_dn(n: usize) -> Result<Curve> {
    check_n(n)?;
    let zero = Complex64::new(0.0, 0.0);
    let ver = veronese(n)?;
    // a₁^{(α)} has its single entry √C(n, α) in column α
    let f1: Vec<Vec<Complex64>> = (1..=n)
        .map(|alpha| {
            let mut row = vec![zero; n];
            row[alpha - 1] = Complex64::new(ver[alpha], 0.0);
            row
        })
        .collect();
    Curve::from_rows(n, n, &f1, &[])
}

/// Degree-2n family. Column `k−1` (k = 2..=n+1) carries
/// `F₁ = (k−1)√C(n+1,k) z^k` and `F₂ = √(C(n,k−1)·k) z^{k−1}`.
pub fn family_d2n(n: usize) -> Result<Curve> {
    check_n(n)?;
    let zero = Complex64::new(0.0, 0.0);
    let d = 2 * n;
    let mut f1 = vec![vec![zero; n]; n + 1];
    let mut f2 = vec![vec![zero; n]; n + 1];
    for k in 2..=n + 1 {
        let col = k - 2;
        f1[k - 1][col] = Complex64::new((k - 1) as f64 * (binomial(n + 1, k) as f64).sqrt(), 0.0);
        f2[k - 2][col] = Complex64::new(((binomial(n, k - 1) * k) as f64).sqrt(), 0.0);
    }
    Curve::from_rows(n, d, &f1, &f2)
}
