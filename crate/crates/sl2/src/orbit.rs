use crate::{svd_frame, Mat2, Sl2Error, SvdFrame, TWO_PI};

/// Steps between renormalizations of a running product.
pub const K_RENORM: usize = 32;

const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// A matrix-valued function over the rotation `x ↦ x + step()`.
pub trait Cocycle: Sync {
    fn matrix(&self, x: f64) -> Mat2;

    /// Rotation angle per step, `2πω`.
    fn step(&self) -> f64;

    /// `A(x)^{-1}`; the default uses the adjugate, which is exact for det 1.
    fn inverse_matrix(&self, x: f64) -> Mat2 {
        self.matrix(x).adj()
    }
}

impl<C: Cocycle + ?Sized> Cocycle for &C {
    fn matrix(&self, x: f64) -> Mat2 {
        (**self).matrix(x)
    }
    fn step(&self) -> f64 {
        (**self).step()
    }
    fn inverse_matrix(&self, x: f64) -> Mat2 {
        (**self).inverse_matrix(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// `x0 + k·step` reduced into `[0, 2π)`, computed directly rather than by
/// repeated addition.
pub fn orbit_point(x0: f64, step: f64, k: i64) -> f64 {
    let kf = k as f64;
    let p = kf * step;
    let pe = kf.mul_add(step, -p);
    let n = ((p + x0) / TWO_PI).floor();
    let r = (-n).mul_add(TWO_PI, p);
    let y = (r - n * TWO_PI_LO) + pe + x0;
    let y = y.rem_euclid(TWO_PI);
    if y >= TWO_PI {
        0.0
    } else {
        y
    }
}

/// Product along an orbit, kept as a unit-norm matrix times `exp(log_norm)`.
#[derive(Debug, Clone)]
pub struct OrbitProduct {
    pub unit: Mat2,
    pub log_norm: f64,
    pub partial_log_norms: Vec<f64>,
}

impl OrbitProduct {
    pub fn frame(&self) -> Result<SvdFrame, Sl2Error> {
        let mut f = svd_frame(&self.unit)?;
        f.norm = self.log_norm.exp();
        f.sigma_min = (-self.log_norm).exp();
        Ok(f)
    }
}

pub fn orbit_product<C: Cocycle + ?Sized>(
    cocycle: &C,
    x0: f64,
    n: usize,
    direction: Direction,
    partials: bool,
) -> OrbitProduct {
    orbit_product_with(cocycle, x0, n, direction, partials, K_RENORM)
}

/// As [`orbit_product`] with an explicit renormalization period.
///
/// Forward: `A(T^{n-1}x)⋯A(x)`. Backward: `A^{-1}(T^{-n}x)⋯A^{-1}(T^{-1}x)`.
pub fn orbit_product_with<C: Cocycle + ?Sized>(
    cocycle: &C,
    x0: f64,
    n: usize,
    direction: Direction,
    partials: bool,
    k_renorm: usize,
) -> OrbitProduct {
    let step = cocycle.step();
    let mut m = Mat2::IDENTITY;
    let mut acc = 0.0;
    let mut parts = Vec::with_capacity(if partials { n } else { 0 });
    let k_renorm = k_renorm.max(1);
    for i in 0..n {
        let f = match direction {
            Direction::Forward => cocycle.matrix(orbit_point(x0, step, i as i64)),
            Direction::Backward => cocycle.inverse_matrix(orbit_point(x0, step, -(i as i64) - 1)),
        };
        m = f * m;
        let last = i + 1 == n;
        if (i + 1) % k_renorm == 0 || last {
            let nm = m.norm();
            m = m.scale(1.0 / nm);
            acc += nm.ln();
            if partials {
                parts.push(acc);
            }
        } else if partials {
            parts.push(acc + m.norm().ln());
        }
    }
    OrbitProduct { unit: m, log_norm: acc, partial_log_norms: parts }
}

/// Cocycle defined by a closure.
pub struct FnCocycle<F> {
    pub f: F,
    pub step: f64,
}

impl<F: Fn(f64) -> Mat2 + Sync> Cocycle for FnCocycle<F> {
    fn matrix(&self, x: f64) -> Mat2 {
        (self.f)(x)
    }
    fn step(&self) -> f64 {
        self.step
    }
}
