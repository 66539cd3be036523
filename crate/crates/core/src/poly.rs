//! Univariate complex polynomials stored as ascending coefficient slices.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Index of the highest coefficient with modulus above `tol`.
pub fn degree(coeffs: &[Complex64], tol: f64) -> Option<usize> {
    coeffs.iter().rposition(|c| c.norm() > tol)
}

/// Taylor coefficients `p^{(k)}(z0) / k!` for k = 0..len, together with a
/// matching bound on their rounding error (`Σ_i C(i,k) |c_i| |z0|^{i−k}`).
pub fn taylor_at(coeffs: &[Complex64], z0: Complex64) -> (Vec<Complex64>, Vec<f64>) {
    let mut shifted = coeffs.to_vec();
    let mut bound: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    let r = z0.norm();
    let len = shifted.len();
    // repeated synthetic division
    for k in 0..len {
        for i in (k + 1..len).rev() {
            let hi = shifted[i];
            shifted[i - 1] += hi * z0;
            bound[i - 1] += bound[i] * r;
        }
    }
    (shifted, bound)
}

/// Order of vanishing of `p` at `z0`, judged relative to the rounding bound.
pub fn vanishing_order(coeffs: &[Complex64], z0: Complex64, rel_tol: f64) -> usize {
    let (t, b) = taylor_at(coeffs, z0);
    t.iter().zip(&b).position(|(c, bound)| c.norm() > rel_tol * bound.max(f64::MIN_POSITIVE)).unwrap_or(t.len())
}

/// All roots of `p` (with repetition) from the eigenvalues of its companion
/// matrix. Coefficients at or below `tol` at the top are trimmed first.
pub fn roots(coeffs: &[Complex64], tol: f64) -> Vec<Complex64> {
    let Some(deg) = degree(coeffs, tol) else {
        return Vec::new();
    };
    // leading zeros contribute roots at the origin exactly
    let low = coeffs.iter().position(|c| c.norm() > tol).unwrap_or(0);
    let mut out = vec![ZERO; low];
    let p = &coeffs[low..=deg];
    let m = p.len() - 1;
    if m == 0 {
        return out;
    }
    let lead = p[m];
    let mut comp = DMatrix::from_element(m, m, ZERO);
    for i in 1..m {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..m {
        comp[(i, m - 1)] = -p[i] / lead;
    }
    let ev = Schur::new(comp).eigenvalues().expect("complex Schur form is triangular");
    out.extend(ev.iter().map(|z| polish(p, *z)));
    out
}

/// A few Newton steps; stops as soon as the residual stops improving.
fn polish(p: &[Complex64], mut z: Complex64) -> Complex64 {
    let dp: Vec<Complex64> = p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    let mut best = eval(p, z).norm();
    for _ in 0..4 {
        let d = eval(&dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - eval(p, z) / d;
        let v = eval(p, cand).norm();
        if !(v < best) {
            break;
        }
        best = v;
        z = cand;
    }
    z
}

/// Groups points that lie within `radius` of each other (single linkage) and
/// returns `(centroid, count, spread)` per group, where spread is the largest
/// distance from the centroid.
pub fn cluster(points: &[Complex64], radius: f64) -> Vec<(Complex64, usize, f64)> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.push(points[i]),
            None => groups.push((r, vec![points[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let c = g.iter().sum::<Complex64>() / g.len() as f64;
            let spread = g.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
            (c, g.len(), spread)
        })
        .collect()
}

/// Product `Π (z − r_i)`, ascending coefficients.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![ZERO; p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_product() {
        let rs = [c(1.0, 0.0), c(-0.5, 2.0), c(0.0, -1.0)];
        let p = from_roots(&rs);
        let mut found = roots(&p, 1e-14);
        assert_eq!(found.len(), 3);
        for r in rs {
            let (i, _) = found
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
                .unwrap();
            assert!((found[i] - r).norm() < 1e-12);
            found.remove(i);
        }
    }

    #[test]
    fn zero_roots_and_trimming() {
        // z^2 (z - 1) with a tiny trailing coefficient
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1e-18, 0.0)];
        let rs = roots(&p, 1e-14);
        assert_eq!(rs.len(), 3);
        assert_eq!(rs.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn vanishing_orders() {
        let p = from_roots(&[c(0.5, 0.5), c(0.5, 0.5), c(-1.0, 0.0)]);
        assert_eq!(vanishing_order(&p, c(0.5, 0.5), 1e-8), 2);
        assert_eq!(vanishing_order(&p, c(-1.0, 0.0), 1e-8), 1);
        assert_eq!(vanishing_order(&p, c(3.0, 0.0), 1e-8), 0);
    }

    #[test]
    fn clustering_groups_double_root() {
        let p = from_roots(&[c(0.3, 0.0), c(0.3, 0.0), c(2.0, 1.0)]);
        let rs = roots(&p, 1e-14);
        let groups = cluster(&rs, 1e-4);
        assert_eq!(groups.len(), 2);
        let double = groups.iter().find(|g| g.1 == 2).unwrap();
        assert!((double.0 - c(0.3, 0.0)).norm() < 1e-7);
    }
}
