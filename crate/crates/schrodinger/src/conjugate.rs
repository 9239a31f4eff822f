use std::fmt::Write as _;

use qpc_lyapunov::{le_samples, sample_points, LEEstimate, Method, Sampling};
use qpc_sl2::{orbit_point, Cocycle, Mat2, TWO_PI};
use rayon::prelude::*;

use crate::cohomology::{solve_cohomological, Cohomology, FourierSeries};
use crate::frame::{b1_matrix, frame_b1, reduce_to_s, FrameReport};
use crate::{schrodinger_matrix, Result, SchrodingerError};

/// Sampled potential of `S_{v,E}` on the grid of [`ConjugationResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerPotential {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub energy: f64,
}

impl SchrodingerPotential {
    pub const CSV_HEADER: &'static str = "x_rad,v";

    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(self.v.len() * 48);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (x, v) in self.x.iter().zip(&self.v) {
            let _ = writeln!(out, "{x:?},{v:?}");
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `sup |v − w|` and `sup |(v − w)'|`, the latter by centered differences.
    pub fn distance(&self, other: &SchrodingerPotential) -> (f64, f64) {
        let m = self.v.len();
        assert_eq!(m, other.v.len(), "potentials on different grids");
        let diff: Vec<f64> = self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect();
        let h = TWO_PI / m as f64;
        let c0 = diff.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let c1 = (0..m).map(|j| ((diff[(j + 1) % m] - diff[(j + m - 1) % m]) / (2.0 * h)).abs()).fold(0.0, f64::max);
        (c0, c1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationResult {
    /// `B̃` on the grid.
    pub btilde: Vec<Mat2>,
    pub v: SchrodingerPotential,
    pub f_mean: f64,
    /// The constant `e` with `det B = e`, estimated by the geometric mean.
    pub det_constant: f64,
    /// `sup ‖B̃(x + 2πω)^{-1} D(x) B̃(x) − S_{v,0}(x)‖_max`.
    pub residual_conj: f64,
    pub residual_coh: f64,
    /// Fourier modes kept in `d`.
    pub truncation: usize,
    /// `sup |det B̃ − 1|`.
    pub det_defect: f64,
    pub shape_defect: f64,
    pub frame: FrameReport,
    pub d: FourierSeries,
    pub step: f64,
}

impl ConjugationResult {
    /// `S_{v,0}` with `v` evaluated off the grid from the same frame.
    pub fn potential<'a, C: Cocycle + ?Sized>(&'a self, cocycle: &'a C) -> Potential<'a, C> {
        Potential { cocycle, d: &self.d }
    }

    /// `sup ‖B̃‖ · sup ‖B̃^{-1}‖` over the grid, in the operator norm.
    pub fn condition(&self) -> f64 {
        let big = self.btilde.iter().map(op_norm).fold(0.0, f64::max);
        let inv = self.btilde.iter().map(|m| op_norm(&m.inv())).fold(0.0, f64::max);
        big * inv
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 11] = [
            ("modes", self.truncation.to_string()),
            ("grid", self.v.x.len().to_string()),
            ("f_mean", format!("{:e}", self.f_mean)),
            ("det_constant", format!("{:e}", self.det_constant)),
            ("det_defect", format!("{:e}", self.det_defect)),
            ("shape_defect", format!("{:e}", self.shape_defect)),
            ("residual_coh", format!("{:e}", self.residual_coh)),
            ("residual_conj", format!("{:e}", self.residual_conj)),
            ("min_det_b1", format!("{:e}", self.frame.min_abs_det)),
            ("sup_v", format!("{:e}", self.v.sup_norm())),
            ("condition", format!("{:e}", self.condition())),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn op_norm(m: &Mat2) -> f64 {
    let fro = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    let det = m.det();
    (0.5 * (fro + (fro * fro - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

/// `x ↦ S_{v(x),0}` for the potential produced by [`conjugate_full`].
pub struct Potential<'a, C: ?Sized> {
    cocycle: &'a C,
    d: &'a FourierSeries,
}

impl<C: Cocycle + ?Sized> Potential<'_, C> {
    /// `v(x) = −a(x)·e^{d(x) − d(x + 2πω)}`.
    pub fn eval(&self, x: f64) -> f64 {
        let s = crate::frame::reduced_matrix(self.cocycle, x);
        let next = orbit_point(x, self.cocycle.step(), 1);
        -s.a11 * (self.d.eval(x) - self.d.eval(next)).exp()
    }
}

impl<C: Cocycle + ?Sized> Cocycle for Potential<'_, C> {
    fn matrix(&self, x: f64) -> Mat2 {
        schrodinger_matrix(self.eval(x), 0.0)
    }

    fn step(&self) -> f64 {
        self.cocycle.step()
    }
}

/// `B(x) = B_1(x)·diag(e^{d(x)}, e^{d(x + 2πω)})`.
fn frame_b<C: Cocycle + ?Sized>(d: &C, coh: &FourierSeries, x: f64) -> Mat2 {
    let next = orbit_point(x, d.step(), 1);
    b1_matrix(d, x) * Mat2::new(coh.eval(x).exp(), 0.0, 0.0, coh.eval(next).exp())
}

/// Conjugates `D` to `S_{v,0}` on `grid` points, keeping `modes` Fourier
/// modes of `d`. `tol_conj` bounds the returned conjugation residual.
pub fn conjugate_full<C: Cocycle + ?Sized>(d: &C, grid: usize, modes: usize, tol_conj: f64) -> Result<ConjugationResult> {
    let frame = frame_b1(d, grid)?;
    let red = reduce_to_s(d, grid)?;
    let h = d.step();
    let coh: Cohomology = solve_cohomological(&red.f, 2.0 * h, modes)?;
    let f_sup = red.f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol_mean = 1e-4 * f_sup;
    if coh.f_mean.abs() > tol_mean {
        return Err(SchrodingerError::MeanNotVanishing { mean: coh.f_mean, tol: tol_mean });
    }

    let b: Vec<Mat2> = red.x.par_iter().map(|&x| frame_b(d, &coh.d, x)).collect();
    let log_det: f64 = b.iter().map(|m| m.det().abs().ln()).sum::<f64>() / grid as f64;
    let det_constant = log_det.exp();
    let norm = (-0.5 * log_det).exp();
    let btilde: Vec<Mat2> = b.iter().map(|m| m.scale(norm)).collect();
    let det_defect = btilde.iter().map(|m| (m.det() - 1.0).abs()).fold(0.0, f64::max);

    let rows: Vec<(f64, f64)> = red
        .x
        .par_iter()
        .enumerate()
        .map(|(j, &x)| {
            let next = orbit_point(x, h, 1);
            let bn = frame_b(d, &coh.d, next).scale(norm);
            let p = bn.inv() * d.matrix(x) * btilde[j];
            let v = -p.a11;
            (v, p.dist_max(&schrodinger_matrix(v, 0.0)))
        })
        .collect();
    let residual_conj = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if !(residual_conj <= tol_conj) {
        return Err(SchrodingerError::ConjugationResidual { residual: residual_conj, tol: tol_conj });
    }
    let v = SchrodingerPotential { x: red.x.clone(), v: rows.iter().map(|r| r.0).collect(), energy: 0.0 };
    Ok(ConjugationResult {
        btilde,
        v,
        f_mean: coh.f_mean,
        det_constant,
        residual_conj,
        residual_coh: coh.residual,
        truncation: modes,
        det_defect,
        shape_defect: red.shape_defect,
        frame,
        d: coh.d,
        step: h,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportRow {
    pub index: usize,
    /// `sup |v_n − v|`.
    pub c0: f64,
    /// `sup |(v_n − v)'|`.
    pub c1: f64,
    pub residual_conj: f64,
    pub le_v: LEEstimate,
    pub le_vn: LEEstimate,
    /// `L_K(S_{v,0}) − L_K(S_{v_n,0})`.
    pub gap: f64,
}

impl TransportRow {
    pub const CSV_HEADER: &'static str =
        "index,sup_dv,sup_dv_prime,residual_conj,LE_v,LE_vn,gap_nats_per_step,K,samples,stderr_v,stderr_vn";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:.12},{:.12},{:.12},{},{},{:e},{:e}",
            self.index,
            self.c0,
            self.c1,
            self.residual_conj,
            self.le_v.value,
            self.le_vn.value,
            self.gap,
            self.le_v.k,
            self.le_v.sample_count,
            self.le_v.stderr,
            self.le_vn.stderr
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSummary {
    pub base: ConjugationResult,
    pub potentials: Vec<SchrodingerPotential>,
    pub rows: Vec<TransportRow>,
}

/// Conjugates `base` and each of `perturbed` to Schrödinger form and compares
/// the potentials and their finite exponents at horizon `k` over `samples`
/// grid points.
pub fn perturbation_transport<C: Cocycle>(
    base: &C,
    perturbed: &[C],
    grid: usize,
    modes: usize,
    tol_conj: f64,
    k: usize,
    samples: usize,
) -> Result<TransportSummary> {
    if k == 0 || samples == 0 {
        return Err(SchrodingerError::InvalidInput("horizon and sample count must be positive".into()));
    }
    let res = conjugate_full(base, grid, modes, tol_conj)?;
    let points = sample_points(&Sampling::Grid(samples), k, base.step());
    let le_v = LEEstimate::from_samples(k, &le_samples(&res.potential(base), k, &points), Method::Grid);
    let mut potentials = Vec::with_capacity(perturbed.len());
    let mut rows = Vec::with_capacity(perturbed.len());
    for (index, c) in perturbed.iter().enumerate() {
        let r = conjugate_full(c, grid, modes, tol_conj)?;
        let (c0, c1) = r.v.distance(&res.v);
        let le_vn = LEEstimate::from_samples(k, &le_samples(&r.potential(c), k, &points), Method::Grid);
        let gap = le_v.value - le_vn.value;
        rows.push(TransportRow { index, c0, c1, residual_conj: r.residual_conj, le_v: le_v.clone(), le_vn, gap });
        potentials.push(r.v);
    }
    Ok(TransportSummary { base: res, potentials, rows })
}

#[cfg(test)]
/// `v` at one point directly from the frame; used to cross-check the grid.
pub(crate) fn potential_direct<C: Cocycle + ?Sized>(d: &C, coh: &FourierSeries, x: f64) -> Result<f64> {
    let (a, _, _) = crate::frame::reduce_at(d, x)?;
    let next = orbit_point(x, d.step(), 1);
    Ok(-a * (coh.eval(x) - coh.eval(next)).exp())
}
