use std::ops::Mul;

use crate::Sl2Error;

/// Real 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a11: 1.0, a12: 0.0, a21: 0.0, a22: 1.0 };

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Inverse through the adjugate. For unimodular input this is exact up to
    /// one rounding per entry.
    pub fn inv(&self) -> Mat2 {
        let d = self.det();
        Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    /// Adjugate; equals the inverse when det = 1 and avoids the division.
    pub fn adj(&self) -> Mat2 {
        Mat2::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn scale(&self, c: f64) -> Mat2 {
        Mat2::new(self.a11 * c, self.a12 * c, self.a21 * c, self.a22 * c)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// Singular values `(σ1, σ2)` with `σ1 ≥ σ2 ≥ 0`.
    pub fn singular_values(&self) -> (f64, f64) {
        let e = 0.5 * (self.a11 + self.a22);
        let f = 0.5 * (self.a11 - self.a22);
        let g = 0.5 * (self.a21 + self.a12);
        let h = 0.5 * (self.a21 - self.a12);
        let q = e.hypot(h);
        let r = f.hypot(g);
        (q + r, (q - r).abs())
    }

    /// Operator norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    /// Entrywise difference in the max norm.
    pub fn dist_max(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Divides by `sqrt(det)` when the determinant has drifted by more than
    /// `1e-10` from one.
    pub fn renormalize_det(&self) -> Mat2 {
        let d = self.det();
        if d > 0.0 && (d - 1.0).abs() > 1e-10 {
            self.scale(1.0 / d.sqrt())
        } else {
            *self
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

pub fn make_rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, -s, s, c)
}

pub fn make_diag(lambda: f64) -> Result<Mat2, Sl2Error> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Sl2Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(Mat2::new(lambda, 0.0, 0.0, 1.0 / lambda))
}

/// `Λ · R_{π/2 − φ}`, written out so that no rotation matrix is formed.
pub fn cocycle_matrix(lambda: f64, phi: f64) -> Result<Mat2, Sl2Error> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Sl2Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(cocycle_matrix_unchecked(lambda, phi))
}

#[inline]
pub(crate) fn cocycle_matrix_unchecked(lambda: f64, phi: f64) -> Mat2 {
    // R_{π/2−φ} = [[sin φ, −cos φ], [cos φ, sin φ]]
    let (s, c) = phi.sin_cos();
    let il = 1.0 / lambda;
    Mat2::new(lambda * s, -lambda * c, il * c, il * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rotation_basics() {
        assert_eq!(make_rotation(0.0), Mat2::IDENTITY);
        let q = make_rotation(FRAC_PI_2);
        assert!(q.dist_max(&Mat2::new(0.0, -1.0, 1.0, 0.0)) < 1e-16);
        let v = make_rotation(0.3).apply([1.0, 0.0]);
        assert!((v[1].atan2(v[0]) - 0.3).abs() < 1e-15);
        assert!((v[0] - 0.3f64.cos()).abs() < 1e-16 && (v[1] - 0.3f64.sin()).abs() < 1e-16);
    }

    #[test]
    fn diag_and_cocycle() {
        assert_eq!(make_diag(1.0).unwrap(), Mat2::IDENTITY);
        assert_eq!(make_diag(2.0).unwrap(), Mat2::new(2.0, 0.0, 0.0, 0.5));
        assert!(make_diag(0.0).is_err());
        assert!(make_diag(-3.0).is_err());
        for &phi in &[0.0, 0.4, 1.0, PI, -2.5] {
            let a = cocycle_matrix(3.0, phi).unwrap();
            let b = make_diag(3.0).unwrap() * make_rotation(FRAC_PI_2 - phi);
            assert!(a.dist_max(&b) < 1e-14);
            assert!((a.norm() - 3.0).abs() < 1e-13);
            assert!((a.det() - 1.0).abs() < 1e-14);
        }
        let a = cocycle_matrix(3.0, 0.0).unwrap();
        let img = a.apply([1.0, 0.0]);
        assert!(img[0].abs() < 1e-16 && (img[1] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn norm_matches_gram() {
        let a = Mat2::new(3.0, -1.5, 0.25, 2.0);
        let g = a.transpose() * a;
        let tr = g.trace();
        let disc = (tr * tr - 4.0 * g.det()).sqrt();
        let gram_norm = (0.5 * (tr + disc)).sqrt();
        assert!((a.norm() - gram_norm).abs() < 1e-13);
        let (s1, s2) = a.singular_values();
        assert!((s1 * s2 - a.det().abs()).abs() < 1e-12);
    }

    #[test]
    fn renormalize_only_on_drift() {
        let a = make_rotation(0.2);
        assert_eq!(a.renormalize_det(), a);
        let b = a.scale(1.01).renormalize_det();
        assert!((b.det() - 1.0).abs() < 1e-14);
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `a·b + c·d` with roughly twice the working precision.
pub(crate) fn dot2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let (p, ep) = two_prod(a, b);
    let (q, eq) = two_prod(c, d);
    let (s, es) = two_sum(p, q);
    s + (ep + eq + es)
}

impl Mat2 {
    /// Matrix-vector product with compensated dot products; used where the
    /// result is much smaller than the entries.
    pub fn apply_compensated(&self, v: [f64; 2]) -> [f64; 2] {
        [dot2(self.a11, v[0], self.a12, v[1]), dot2(self.a21, v[0], self.a22, v[1])]
    }

    pub fn det_compensated(&self) -> f64 {
        dot2(self.a11, self.a22, -self.a12, self.a21)
    }
}
