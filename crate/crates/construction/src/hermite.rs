use crate::ConstructionError;

/// Two-point Hermite interpolant on `[a, b]`, stored as monomial
/// coefficients in the local coordinate `t = (x − a)/(b − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitePoly {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

fn poly_pow(p: &[f64], e: usize) -> Vec<f64> {
    (0..e).fold(vec![1.0], |acc, _| poly_mul(&acc, p))
}

fn poly_add_scaled(acc: &mut Vec<f64>, p: &[f64], s: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, &b) in acc.iter_mut().zip(p) {
        *a += s * b;
    }
}

/// Basis polynomial `(1−t)^m t^j/j! Σ_{k<m−j} C(m−1+k, k) t^k`, whose
/// derivatives at 0 are `δ_{ij}` for `i < m` and which vanishes to order
/// `m` at 1.
fn left_basis(m: usize, j: usize) -> Vec<f64> {
    let mut inner = vec![0.0; m - j];
    for (k, c) in inner.iter_mut().enumerate() {
        *c = binom(m - 1 + k, k);
    }
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    let mut tj = vec![0.0; j + 1];
    tj[j] = 1.0 / fact;
    poly_mul(&poly_mul(&poly_pow(&[1.0, -1.0], m), &tj), &inner)
}

/// `p(t) ↦ p(1 − t)`.
fn reflect(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (k, &c) in p.iter().enumerate() {
        poly_add_scaled(&mut out, &poly_pow(&[1.0, -1.0], k), c);
    }
    out
}

impl HermitePoly {
    /// The unique polynomial of degree `2m − 1` with `f^{(j)}(a) = left[j]`
    /// and `f^{(j)}(b) = right[j]`, `j < m`.
    pub fn interpolate(a: f64, b: f64, left: &[f64], right: &[f64]) -> Result<Self, ConstructionError> {
        assert_eq!(left.len(), right.len(), "matching derivative orders");
        let h = b - a;
        if !(h.abs() >= 1e-12) {
            return Err(ConstructionError::IllConditioned { width: h });
        }
        let m = left.len();
        let mut coeffs = vec![0.0; 2 * m];
        for j in 0..m {
            let lb = left_basis(m, j);
            // derivative data in t: d^j/dt^j = h^j d^j/dx^j
            let hj = h.powi(j as i32);
            poly_add_scaled(&mut coeffs, &lb, left[j] * hj);
            // right basis: reflect, with d/dt flipping sign
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            poly_add_scaled(&mut coeffs, &reflect(&lb), sign * right[j] * hj);
        }
        Ok(HermitePoly { a, b, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `k`-th derivative in `x` at `x`.
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        let h = self.b - self.a;
        let t = (x - self.a) / h;
        let n = self.coeffs.len();
        if k >= n {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in (k..n).rev() {
            let falling: f64 = (0..k).map(|r| (i - r) as f64).product();
            acc = acc * t + self.coeffs[i] * falling;
        }
        acc / h.powi(k as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero() {
        let p = HermitePoly::interpolate(0.0, 1.0, &[0.0; 3], &[0.0; 3]).unwrap();
        assert!(p.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn classical_cubic() {
        let p = HermitePoly::interpolate(0.0, 1.0, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        let want = [1.0, 0.0, -3.0, 2.0];
        for (c, w) in p.coeffs.iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }
    }

    #[test]
    fn random_data_is_matched() {
        let left = [0.3, -1.2, 4.0, 7.5];
        let right = [-0.8, 2.0, -3.0, 11.0];
        let (a, b) = (0.7, 1.9);
        let p = HermitePoly::interpolate(a, b, &left, &right).unwrap();
        assert_eq!(p.degree(), 7);
        for j in 0..4 {
            assert!((p.deriv(a, j) - left[j]).abs() < 1e-9, "left {j}");
            assert!((p.deriv(b, j) - right[j]).abs() < 1e-9, "right {j}");
        }
    }

    #[test]
    fn rejects_degenerate_width() {
        assert!(HermitePoly::interpolate(1.0, 1.0 + 1e-14, &[1.0], &[0.0]).is_err());
    }
}
