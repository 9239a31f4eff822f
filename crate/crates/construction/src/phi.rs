use qpc_rotation::CriticalGeometry;
use qpc_sl2::{cocycle_matrix, Cocycle, Mat2, TWO_PI};

use crate::cheb::ChebSeries;
use crate::hermite::HermitePoly;
use crate::profile::{phi0_at, phi0_deriv_at, smooth_bump, BaseProfile};
use crate::Mode;

/// Shape of a correction piece, in the offset `d = x − c_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum PieceKind {
    Cheb(ChebSeries),
    Hermite(HermitePoly),
    /// `scale · φ_0(d)`.
    Phi0 { scale: f64 },
    /// `f_n(d) · (scale · φ_0(d) + core(d))`, core split at `d = 0`.
    Bumped { level: usize, scale: f64, core: Vec<ChebSeries> },
}

/// A correction supported on `c_i + [lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    /// Construction level that introduced the piece.
    pub level: usize,
    pub center: usize,
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

impl Piece {
    fn covers(&self, d: f64) -> bool {
        d >= self.lo && d < self.hi
    }

    fn value(&self, d: f64, base: &BaseProfile, geom: &CriticalGeometry) -> f64 {
        match &self.kind {
            PieceKind::Cheb(s) => s.eval(d),
            PieceKind::Hermite(h) => h.eval(d),
            PieceKind::Phi0 { scale } => scale * phi0_at(base.mode, base.variant, self.center, d),
            PieceKind::Bumped { level, scale, core } => {
                let f = smooth_bump(*level, geom, d);
                if f == 0.0 {
                    return 0.0;
                }
                let c = core.iter().find(|s| d >= s.a && d <= s.b).map_or(0.0, |s| s.eval(d));
                f * (scale * phi0_at(base.mode, base.variant, self.center, d) + c)
            }
        }
    }

    /// `k`-th derivative; analytic except for bumped pieces, which use
    /// Richardson-extrapolated central differences.
    fn deriv(&self, d: f64, k: usize, base: &BaseProfile, geom: &CriticalGeometry) -> f64 {
        match (&self.kind, base.mode) {
            (PieceKind::Cheb(s), _) => s.derivs_at(d, k)[k],
            (PieceKind::Hermite(h), _) => h.deriv(d, k),
            (PieceKind::Phi0 { scale }, Mode::Finite { l }) => {
                scale * phi0_deriv_at(l, base.variant, self.center, d, k as u32)
            }
            _ => {
                let width = self.hi - self.lo;
                richardson_deriv(|u| self.value(u, base, geom), d, k, width * 1e-3)
            }
        }
    }
}

/// Central difference of order `k` with step `h`, extrapolated from `h`
/// and `h/2`.
pub fn richardson_deriv(f: impl Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let cd = |h: f64| -> f64 {
        // k-th central difference on points x + (i − k/2)h
        let mut s = 0.0;
        let mut c = 1.0;
        for i in 0..=k {
            let off = i as f64 - k as f64 / 2.0;
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * c * f(x + off * h);
            c = c * (k - i) as f64 / (i + 1) as f64;
        }
        s / h.powi(k as i32)
    };
    if k == 0 {
        return f(x);
    }
    let a = cd(h);
    let b = cd(0.5 * h);
    (4.0 * b - a) / 3.0
}

/// `φ_n = φ + Σ pieces`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    pub base: BaseProfile,
    pub geometry: CriticalGeometry,
    pub pieces: Vec<Piece>,
}

impl PhiFunction {
    pub fn new(base: BaseProfile, geometry: CriticalGeometry) -> Self {
        PhiFunction { base, geometry, pieces: Vec::new() }
    }

    pub fn winding(&self) -> i32 {
        self.base.variant.winding()
    }

    /// Sum of the corrections at `x`.
    pub fn correction(&self, x: f64) -> f64 {
        self.correction_from(x, 0)
    }

    /// Sum of corrections introduced at levels `≥ min_level`.
    pub fn correction_from(&self, x: f64, min_level: usize) -> f64 {
        let mut s = 0.0;
        let offs = [self.geometry.offset(x, 0), self.geometry.offset(x, 1)];
        for p in self.pieces.iter().filter(|p| p.level >= min_level) {
            let d = offs[p.center];
            if p.covers(d) {
                s += p.value(d, &self.base, &self.geometry);
            }
        }
        s
    }

    /// `k`-th derivative of the corrections of exactly `level`.
    pub fn level_deriv(&self, x: f64, level: usize, k: usize) -> f64 {
        let offs = [self.geometry.offset(x, 0), self.geometry.offset(x, 1)];
        self.pieces
            .iter()
            .filter(|p| p.level == level && p.covers(offs[p.center]))
            .map(|p| p.deriv(offs[p.center], k, &self.base, &self.geometry))
            .sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.base.eval(x) + self.correction(x)
    }

    /// `φ` on `samples` equispaced points of `[0, 2π)`.
    pub fn sample(&self, samples: usize) -> Vec<f64> {
        (0..samples).map(|k| self.eval(TWO_PI * k as f64 / samples as f64)).collect()
    }

    pub fn with_pieces(&self, extra: impl IntoIterator<Item = Piece>) -> PhiFunction {
        let mut out = self.clone();
        out.pieces.extend(extra);
        out
    }

    /// Highest level among the pieces.
    pub fn top_level(&self) -> Option<usize> {
        self.pieces.iter().map(|p| p.level).max()
    }
}

/// `A(x) = Λ·R_{π/2 − φ(x)}` over the rotation by `step`.
pub struct PhiCocycle<'a> {
    pub phi: &'a PhiFunction,
    pub lambda: f64,
    pub step: f64,
}

impl Cocycle for PhiCocycle<'_> {
    fn matrix(&self, x: f64) -> Mat2 {
        cocycle_matrix(self.lambda, self.phi.eval(x)).expect("lambda validated")
    }

    fn step(&self) -> f64 {
        self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_matches_known_derivatives() {
        for k in 0..5 {
            let d = richardson_deriv(f64::exp, 0.3, k, 1e-2);
            assert!((d - 0.3f64.exp()).abs() < 1e-5, "k={k} {d}");
        }
        let d = richardson_deriv(f64::sin, 0.3, 1, 1e-3);
        assert!((d - 0.3f64.cos()).abs() < 1e-12);
    }
}
