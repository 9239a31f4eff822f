use std::f64::consts::PI;

use qpc_construction::PhiFunction;
use qpc_sl2::{orbit_point, wrap_half, Cocycle, Mat2, TWO_PI};
use rayon::prelude::*;

use crate::{Result, SchrodingerError};

/// Smallest admissible `|det B_1|` on the grid.
pub const MIN_FRAME_DET: f64 = 1e-9;

/// Tolerance on the structural entries `(1,2) = −1`, `(2,2) = 0`.
pub const SHAPE_TOL: f64 = 1e-8;

/// `max |φ|` over `samples` points; errors unless it is below `π/10`.
pub fn check_phi_bound(phi: &PhiFunction, samples: usize) -> Result<f64> {
    let max_phi = phi.sample(samples).iter().map(|v| wrap_half(*v).abs()).fold(0.0, f64::max);
    if max_phi < PI / 10.0 {
        Ok(max_phi)
    } else {
        Err(SchrodingerError::PhiTooLarge { max_phi })
    }
}

/// `B_1(x) = (−D(x − 2πω)·α, α)` with `α = (0, 1)ᵀ`.
pub fn b1_matrix<C: Cocycle + ?Sized>(d: &C, x: f64) -> Mat2 {
    let m = d.matrix(orbit_point(x, d.step(), -1));
    Mat2::new(-m.a12, 0.0, -m.a22, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub grid: usize,
    pub min_abs_det: f64,
    pub max_abs_det: f64,
    /// Sign of `det B_1`, constant over the grid.
    pub sign: f64,
}

fn grid_points(m: usize) -> Vec<f64> {
    (0..m).map(|j| TWO_PI * j as f64 / m as f64).collect()
}

/// Scans `det B_1` over `grid` equispaced points.
pub fn frame_b1<C: Cocycle + ?Sized>(d: &C, grid: usize) -> Result<FrameReport> {
    if grid == 0 {
        return Err(SchrodingerError::InvalidInput("empty grid".into()));
    }
    let dets: Vec<f64> = grid_points(grid).par_iter().map(|&x| b1_matrix(d, x).det()).collect();
    let min_abs_det = dets.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let max_abs_det = dets.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(min_abs_det >= MIN_FRAME_DET) {
        return Err(SchrodingerError::DegenerateFrame { min_det: min_abs_det });
    }
    let sign = dets[0].signum();
    if dets.iter().any(|v| v.signum() != sign) {
        return Err(SchrodingerError::FrameSignChange);
    }
    Ok(FrameReport { grid, min_abs_det, max_abs_det, sign })
}

/// `S(x) = B_1(x + 2πω)^{-1}·D(x)·B_1(x)`.
pub(crate) fn reduced_matrix<C: Cocycle + ?Sized>(d: &C, x: f64) -> Mat2 {
    let next = b1_matrix(d, orbit_point(x, d.step(), 1));
    next.inv() * d.matrix(x) * b1_matrix(d, x)
}

/// `a(x)` and `c(x)` after checking the structural entries of `S(x)`.
pub(crate) fn reduce_at<C: Cocycle + ?Sized>(d: &C, x: f64) -> Result<(f64, f64, f64)> {
    let s = reduced_matrix(d, x);
    let e12 = (s.a12 + 1.0).abs();
    let e22 = s.a22.abs();
    if !(e12 <= SHAPE_TOL) {
        return Err(SchrodingerError::ShapeViolation { x, entry: "(1,2)", value: s.a12 });
    }
    if !(e22 <= SHAPE_TOL) {
        return Err(SchrodingerError::ShapeViolation { x, entry: "(2,2)", value: s.a22 });
    }
    if !(s.a21 > 0.0) {
        return Err(SchrodingerError::ShapeViolation { x, entry: "(2,1)", value: s.a21 });
    }
    Ok((s.a11, s.a21, e12.max(e22)))
}

/// `a` and `f = log c` sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub f: Vec<f64>,
    /// `max |S_12 + 1|, |S_22|` over the grid.
    pub shape_defect: f64,
}

pub fn reduce_to_s<C: Cocycle + ?Sized>(d: &C, grid: usize) -> Result<Reduced> {
    let x = grid_points(grid);
    let rows: Vec<(f64, f64, f64)> = x.par_iter().map(|&t| reduce_at(d, t)).collect::<Result<_>>()?;
    let a = rows.iter().map(|r| r.0).collect();
    let f = rows.iter().map(|r| r.1.ln()).collect();
    let shape_defect = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(Reduced { x, a, f, shape_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpc_sl2::{cocycle_matrix, make_diag, FnCocycle};

    const OMEGA: f64 = 0.618_033_988_749_894_8;

    fn tilted(lambda: f64, amp: f64) -> FnCocycle<impl Fn(f64) -> Mat2 + Sync> {
        FnCocycle { f: move |x: f64| cocycle_matrix(lambda, amp * (3.0 * x).sin()).unwrap(), step: TWO_PI * OMEGA }
    }

    #[test]
    fn constant_hyperbolic_frame_is_degenerate() {
        let d = FnCocycle { f: |_| make_diag(5.0).unwrap(), step: TWO_PI * OMEGA };
        let err = frame_b1(&d, 64).unwrap_err();
        assert!(matches!(err, SchrodingerError::DegenerateFrame { .. }));
    }

    #[test]
    fn frame_determinant_is_lambda_cos_phi() {
        let (lambda, amp) = (40.0, 0.25);
        let d = tilted(lambda, amp);
        for k in 0..50 {
            let x = 0.13 * k as f64;
            let prev = (x - TWO_PI * OMEGA).rem_euclid(TWO_PI);
            let want = lambda * (amp * (3.0 * prev).sin()).cos();
            assert!((b1_matrix(&d, x).det() - want).abs() < 1e-12 * lambda);
        }
        let rep = frame_b1(&d, 512).unwrap();
        assert_eq!(rep.sign, 1.0);
        assert!(rep.min_abs_det >= lambda * amp.cos() - 1e-9);
    }

    #[test]
    fn reduced_matrix_has_schrodinger_shape() {
        let d = tilted(40.0, 0.25);
        let r = reduce_to_s(&d, 256).unwrap();
        assert!(r.shape_defect < 1e-12);
        // c(x) = cos φ(x − 2πω) / cos φ(x)
        for (x, f) in r.x.iter().zip(&r.f) {
            let phi = |t: f64| 0.25 * (3.0 * t).sin();
            let want = (phi(x - TWO_PI * OMEGA).cos() / phi(*x).cos()).ln();
            assert!((f - want).abs() < 1e-12);
        }
    }
}
