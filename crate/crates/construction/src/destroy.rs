use qpc_sl2::{wrap_half, TWO_PI};
use rayon::prelude::*;

use crate::cheb::ChebSeries;
use crate::fields::{field_difference, level_returns};
use crate::hermite::HermitePoly;
use crate::level::{level_sup_derivs, LevelState};
use crate::phi::{PhiFunction, Piece, PieceKind};
use crate::profile::{phi0_at, phi0_deriv_at};
use crate::report::{Clause, LevelReport};
use crate::{ConstructionError, ConstructionParams, Mode};

/// `φ̃_n = φ_n + ẽ_n`, with `ẽ_n = σ(s_n − s'_n)` on `I_n/10`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeCocycle {
    pub n: usize,
    pub q_n: u64,
    pub phi: PhiFunction,
    /// The sign `σ` that achieved `s̃_n = s̃'_n`.
    pub sign: f64,
    /// `sup |s̃_n − s̃'_n|` on `I_n/10` for the chosen sign.
    pub residual: f64,
    /// The same for the rejected sign.
    pub residual_other: f64,
    /// `sup |d^k (φ̃_n − φ_n)|`, `k = 0, 1, …`.
    pub size: Vec<f64>,
    pub report: LevelReport,
}

impl TildeCocycle {
    /// `‖φ̃_n − φ_n‖` in `C^k`: the top derivative's sup, which carries
    /// the `q_n^{−2}` scaling.
    pub fn seminorm(&self, k: usize) -> f64 {
        self.size.get(k).copied().unwrap_or(0.0)
    }
}

/// `ẽ_n` pieces for sign `sign`: `sign·(φ_0 + D)` where `D = s_n − s'_n − φ_0`
/// is sampled on Chebyshev nodes.
fn destruction_pieces(
    state: &LevelState,
    params: &ConstructionParams,
    sign: f64,
    defect: &[[ChebSeries; 2]; 2],
) -> Result<Vec<Piece>, ConstructionError> {
    let n = state.n;
    let g = &params.geometry;
    let r_in = g.radius(n, 10.0);
    let r_out = g.radius(n, 1.0);
    let mut pieces = Vec::new();
    for (i, halves) in defect.iter().enumerate() {
        let scaled: Vec<ChebSeries> = halves
            .iter()
            .map(|h| ChebSeries { a: h.a, b: h.b, coeffs: h.coeffs.iter().map(|c| sign * c).collect() })
            .collect();
        let mk = |lo, hi, kind| Piece { level: n, center: i, lo, hi, kind };
        match params.mode {
            Mode::Finite { l } => {
                let total = |d: f64, j: u32, s: &ChebSeries| {
                    sign * phi0_deriv_at(l, params.variant, i, d, j) + s.derivs_at(d, j as usize)[j as usize]
                };
                let right: Vec<f64> = (0..=l).map(|j| total(r_in, j, &scaled[1])).collect();
                let left: Vec<f64> = (0..=l).map(|j| total(-r_in, j, &scaled[0])).collect();
                let zeros = vec![0.0; l as usize + 1];
                pieces.push(mk(-r_out, -r_in, PieceKind::Hermite(HermitePoly::interpolate(-r_out, -r_in, &zeros, &left)?)));
                pieces.push(mk(-r_in, r_in, PieceKind::Phi0 { scale: sign }));
                pieces.push(mk(-r_in, 0.0, PieceKind::Cheb(scaled[0].clone())));
                pieces.push(mk(0.0, r_in, PieceKind::Cheb(scaled[1].clone())));
                pieces.push(mk(r_in, r_out, PieceKind::Hermite(HermitePoly::interpolate(r_in, r_out, &right, &zeros)?)));
            }
            Mode::Smooth { .. } => {
                let reach = 2.0 * r_in;
                pieces.push(mk(-reach, reach, PieceKind::Bumped { level: n, scale: sign, core: scaled }));
            }
        }
    }
    Ok(pieces)
}

/// `sup |s − s'|` on `I_n/10` for the cocycle `phi`.
fn inner_alignment(phi: &PhiFunction, params: &ConstructionParams, n: usize) -> Result<f64, ConstructionError> {
    let g = &params.geometry;
    let long = level_returns(params, n)?;
    let m = params.samples_for(2.0 * g.radius(n, 10.0));
    let pts: Vec<f64> = (0..2).flat_map(|i| g.grid(n, 10.0, i, m)).collect();
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&x| field_difference(phi, params, x, long).map(|(a, b)| wrap_half(a - b).abs()))
        .collect::<Result<_, _>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Builds `φ̃_n` from a verified level.
///
/// The two sources disagree on the sign of `ẽ_n`; both are built and the
/// one whose fields align on `I_n/10` is kept.
pub fn destroy_level(state: &LevelState, params: &ConstructionParams) -> Result<TildeCocycle, ConstructionError> {
    let n = state.n;
    let g = &params.geometry;
    let long = level_returns(params, n)?;
    let r_in = g.radius(n, 10.0);
    let reach = match params.mode {
        Mode::Finite { .. } => r_in,
        Mode::Smooth { .. } => 2.0 * r_in,
    };
    let mut defect: Vec<[ChebSeries; 2]> = Vec::new();
    for (i, &c) in g.centers().iter().enumerate() {
        let mut halves = Vec::new();
        for (lo, hi) in [(-reach, 0.0), (0.0, reach)] {
            let nodes = ChebSeries::nodes(lo, hi, params.cheb_nodes);
            let vals: Vec<f64> = nodes
                .par_iter()
                .map(|&d| {
                    let x = (c + d).rem_euclid(TWO_PI);
                    let (s, sp) = field_difference(&state.phi, params, x, long)?;
                    Ok(wrap_half(s - sp - phi0_at(params.mode, params.variant, i, g.offset(x, i))))
                })
                .collect::<Result<_, ConstructionError>>()?;
            halves.push(ChebSeries::from_values(lo, hi, &vals));
        }
        defect.push([halves[0].clone(), halves[1].clone()]);
    }
    let defect: [[ChebSeries; 2]; 2] = [defect[0].clone(), defect[1].clone()];

    let mut built = Vec::new();
    for sign in [-1.0, 1.0] {
        let pieces = destruction_pieces(state, params, sign, &defect)?;
        let phi = state.phi.with_pieces(pieces.clone());
        let res = inner_alignment(&phi, params, n)?;
        built.push((sign, phi, pieces, res));
    }
    built.sort_by(|a, b| a.3.total_cmp(&b.3));
    let residual_other = built[1].3;
    let (sign, phi, pieces, residual) = built.swap_remove(0);
    if !(residual < params.tol_align) {
        return Err(ConstructionError::AlignmentNotDestroyed { level: n, plus: residual, minus: residual_other });
    }

    let order = match params.mode {
        Mode::Finite { l } => l as usize,
        Mode::Smooth { .. } => 4,
    };
    let only = PhiFunction { base: state.phi.base, geometry: g.clone(), pieces };
    let size = level_sup_derivs(&only, params, n, n, order);

    let mut report = LevelReport::new(n);
    report.push(Clause::upper("destroyed_alignment", residual, params.tol_align, true));
    // outside I_n the two functions agree exactly
    let outside = (0..4096)
        .map(|k| TWO_PI * (k as f64 + 0.5) / 4096.0)
        .filter(|&x| !g.contains(x, n, 1.0))
        .map(|x| (phi.eval(x) - state.phi.eval(x)).abs())
        .fold(0.0, f64::max);
    report.push(Clause::upper("outside_unchanged", outside, 0.0, true));
    let q = params.q(n) as f64;
    report.push(Clause::new(
        "size_fit",
        true,
        0.0,
        false,
        format!("C0*q^2={:e} Cl*q^2={:e}", size[0] * q * q, size[order] * q * q),
    ));
    if let Mode::Smooth { a } = params.mode {
        report.push(Clause::upper("smooth_size", size[0], (-(q.powf(2.0 * a)) / 8.0).exp(), true));
    }
    Ok(TildeCocycle { n, q_n: params.q(n), phi, sign, residual, residual_other, size, report })
}
