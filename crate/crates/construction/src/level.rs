use std::f64::consts::PI;

use qpc_lyapunov::{block_along_orbit, check_mu_hyperbolic};
use qpc_rotation::{default_cap, ReturnScanner};
use qpc_sl2::{make_rotation, orbit_point, orbit_product, wrap_half, Cocycle, Direction, Sl2Error, TWO_PI};
use rayon::prelude::*;

use crate::cheb::ChebSeries;
use crate::fields::{continuous_branch, field_difference, field_point, level_returns};
use crate::hermite::HermitePoly;
use crate::phi::{PhiCocycle, PhiFunction, Piece, PieceKind};
use crate::profile::{critical_profile, phi0_at, BaseProfile};
use crate::report::{Clause, LevelReport};
use crate::schedule::lambda_schedule;
use crate::{ConstructionError, ConstructionParams, Mode};

/// Sampled direction fields on `I_n`, ordered by component then offset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSamples {
    pub x: Vec<f64>,
    pub component: Vec<u8>,
    pub s: Vec<f64>,
    pub s_prime: Vec<f64>,
    pub s_bar: Vec<f64>,
    pub s_bar_prime: Vec<f64>,
}

impl FieldSamples {
    pub const CSV_HEADER: &'static str = "x_rad,component,s_rad,s_prime_rad,s_bar_rad,s_bar_prime_rad";

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Size of `φ_n − φ_{n−1}` on `I_n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceRecord {
    /// `sup |d^k e_n|`, `k = 0, 1, …`.
    pub sup_deriv: Vec<f64>,
    /// `ln sup |e_n|` over the core nodes, finite even when `e_n`
    /// underflows in double precision.
    pub log_sup_core: f64,
}

impl ConvergenceRecord {
    pub fn c0(&self) -> f64 {
        self.sup_deriv.first().copied().unwrap_or(0.0)
    }

    pub fn c1(&self) -> f64 {
        self.sup_deriv.get(1).copied().unwrap_or(0.0)
    }

    /// `max_{k ≤ order} sup |d^k e_n|`.
    pub fn ck_norm(&self, order: usize) -> f64 {
        self.sup_deriv.iter().take(order + 1).fold(0.0, |m, &v| m.max(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub n: usize,
    pub q_n: u64,
    pub phi: PhiFunction,
    pub lambda_n: f64,
    /// Rate used for the hyperbolicity check.
    pub mu: f64,
    /// Minimal return times `(r_n⁺, r_n⁻)` to `I_n`.
    pub returns: (u64, u64),
    pub fields: FieldSamples,
    pub report: LevelReport,
    pub convergence: ConvergenceRecord,
}

impl LevelState {
    pub fn is_base(&self) -> bool {
        self.phi.top_level().map_or(true, |t| t < self.n)
    }

    /// Error naming the first failing hard clause, if any.
    pub fn require_pass(&self) -> Result<(), ConstructionError> {
        match self.report.first_failure() {
            None => Ok(()),
            Some(c) => Err(ConstructionError::LevelVerificationFailed {
                level: self.n,
                clause: format!("{} ({})", c.name, c.detail),
            }),
        }
    }
}

fn hyp_err(level: usize, x: f64) -> impl Fn(ConstructionError) -> ConstructionError {
    move |e| match e {
        ConstructionError::Sl2(Sl2Error::NotHyperbolic { .. }) => ConstructionError::NotHyperbolic { level, x },
        other => other,
    }
}

/// `φ` itself, checked against `|φ(x) − kπ| > g(δ0)` away from the
/// critical points on a 2¹⁶ grid.
pub fn base_phi(params: &ConstructionParams) -> Result<PhiFunction, ConstructionError> {
    params.validate()?;
    let base = BaseProfile::from_params(params);
    let bound = critical_profile(params.mode, params.delta0).abs();
    let found = base.min_distance_to_k_pi(&params.geometry, 1 << 16);
    if !(found > bound) {
        return Err(ConstructionError::ConditionBViolated { found, bound });
    }
    Ok(PhiFunction::new(base, params.geometry.clone()))
}

/// The state below level `N`: the base cocycle, nothing verified.
pub fn base_state(params: &ConstructionParams) -> Result<LevelState, ConstructionError> {
    let phi = base_phi(params)?;
    let n = params.big_n - 1;
    Ok(LevelState {
        n,
        q_n: params.q(n),
        phi,
        lambda_n: params.lambda,
        mu: params.lambda,
        returns: (1, 1),
        fields: FieldSamples::default(),
        report: LevelReport::new(n),
        convergence: ConvergenceRecord { sup_deriv: Vec::new(), log_sup_core: f64::NEG_INFINITY },
    })
}

/// Pieces of `e_n` and the log-size of the sampled core.
#[derive(Debug, Clone)]
pub struct Correction {
    pub pieces: Vec<Piece>,
    pub log_sup_core: f64,
    /// `sup |h_n^±|` over the glue pieces (finite mode).
    pub glue_sup: f64,
}

/// `e_n` on Chebyshev nodes of each half of `I_n/10` (finite mode, with
/// Hermite glue to zero at `∂I_n`) or of the bump support (smooth mode).
pub fn compute_correction(
    prev: &PhiFunction,
    params: &ConstructionParams,
    n: usize,
) -> Result<Correction, ConstructionError> {
    let short = level_returns(params, n - 1)?;
    let long = level_returns(params, n)?;
    let g = &params.geometry;
    let r_in = g.radius(n, 10.0);
    let r_out = g.radius(n, 1.0);
    let reach = match params.mode {
        Mode::Finite { .. } => r_in,
        Mode::Smooth { .. } => 2.0 * r_in,
    };
    let mut pieces = Vec::new();
    let mut log_sup = f64::NEG_INFINITY;
    let mut glue_sup: f64 = 0.0;
    for (i, &c) in g.centers().iter().enumerate() {
        let mut halves = Vec::new();
        for (lo, hi) in [(-reach, 0.0), (0.0, reach)] {
            let nodes = ChebSeries::nodes(lo, hi, params.cheb_nodes);
            let pts: Vec<_> = nodes
                .par_iter()
                .map(|&d| {
                    let x = (c + d).rem_euclid(TWO_PI);
                    field_point(prev, params, x, short, long).map_err(hyp_err(n, x))
                })
                .collect::<Result<_, _>>()?;
            log_sup = pts.iter().fold(log_sup, |m, p| m.max(p.log_abs_e));
            let vals: Vec<f64> = pts.iter().map(|p| p.e).collect();
            halves.push(ChebSeries::from_values(lo, hi, &vals));
        }
        match params.mode {
            Mode::Finite { l } => {
                let l = l as usize;
                let zeros = vec![0.0; l + 1];
                let right = halves[1].derivs_at(r_in, l);
                let left = halves[0].derivs_at(-r_in, l);
                let hr = HermitePoly::interpolate(r_in, r_out, &right, &zeros)?;
                let hl = HermitePoly::interpolate(-r_out, -r_in, &zeros, &left)?;
                for k in 0..=64 {
                    let t = k as f64 / 64.0;
                    glue_sup = glue_sup.max(hr.eval(r_in + t * (r_out - r_in)).abs());
                    glue_sup = glue_sup.max(hl.eval(-r_out + t * (r_out - r_in)).abs());
                }
                let mk = |lo, hi, kind| Piece { level: n, center: i, lo, hi, kind };
                pieces.push(mk(-r_out, -r_in, PieceKind::Hermite(hl)));
                pieces.push(mk(-r_in, 0.0, PieceKind::Cheb(halves[0].clone())));
                pieces.push(mk(0.0, r_in, PieceKind::Cheb(halves[1].clone())));
                pieces.push(mk(r_in, r_out, PieceKind::Hermite(hr)));
            }
            Mode::Smooth { .. } => pieces.push(Piece {
                level: n,
                center: i,
                lo: -reach,
                hi: reach,
                kind: PieceKind::Bumped { level: n, scale: 0.0, core: halves },
            }),
        }
    }
    Ok(Correction { pieces, log_sup_core: log_sup, glue_sup })
}

/// `sup |d^k (pieces of `level`)|` over `I_n`, `k ≤ order`.
pub fn level_sup_derivs(phi: &PhiFunction, params: &ConstructionParams, level: usize, n: usize, order: usize) -> Vec<f64> {
    let g = &params.geometry;
    let pts: Vec<f64> = (0..2).flat_map(|i| g.grid(n, 1.0, i, 2049)).collect();
    (0..=order)
        .map(|k| pts.par_iter().map(|&x| phi.level_deriv(x, level, k).abs()).reduce(|| 0.0, f64::max))
        .collect()
}

/// `‖φ‖_{C¹}` of the base function, from a 2¹⁴ grid.
pub fn base_c1_norm(base: &BaseProfile) -> f64 {
    let m = 1 << 14;
    let h = TWO_PI / m as f64;
    (0..m)
        .map(|k| {
            let x = k as f64 * h;
            let v = base.eval(x);
            // the non-homotopic lift jumps by 2π at c1; differences are taken modulo 2π
            let diff = (base.eval(x + 1e-6) - base.eval(x - 1e-6) + PI).rem_euclid(TWO_PI) - PI;
            let d = diff / 2e-6;
            v.abs().max(d.abs())
        })
        .fold(0.0, f64::max)
}

/// Per-point verification data.
#[derive(Debug, Clone, Copy)]
struct PointCheck {
    x: f64,
    comp: usize,
    d: f64,
    inner: bool,
    s: f64,
    sp: f64,
    sb: f64,
    sbp: f64,
    phi0: f64,
    prev_diff: f64,
    hyp_pass: bool,
    hyp_margin: f64,
    insert_unit: f64,
    insert_log: f64,
}

/// Verification points: `I_n/10` and the two sides of `I_n \ I_n/10`.
fn verification_offsets(params: &ConstructionParams, n: usize) -> Vec<(f64, bool)> {
    let g = &params.geometry;
    let r_in = g.radius(n, 10.0);
    let r_out = g.radius(n, 1.0);
    let m1 = params.samples_for(2.0 * r_in);
    let m2 = params.samples_for(r_out - r_in);
    let mut v = Vec::with_capacity(m1 + 2 * m2);
    for k in 0..m2 {
        v.push((-r_out + (r_out - r_in) * k as f64 / m2 as f64, false));
    }
    for k in 0..m1 {
        v.push((-r_in + 2.0 * r_in * k as f64 / (m1 - 1) as f64, true));
    }
    for k in 0..m2 {
        v.push((r_in + (r_out - r_in) * (k + 1) as f64 / m2 as f64, false));
    }
    v
}

/// Alignment, lower-bound, hyperbolicity and stability checks of `phi` at
/// level `n` against `prev`.
pub fn verify_level(
    prev: &PhiFunction,
    phi: &PhiFunction,
    params: &ConstructionParams,
    n: usize,
    mu: f64,
) -> Result<(FieldSamples, LevelReport), ConstructionError> {
    let g = &params.geometry;
    let short = level_returns(params, n - 1)?;
    let long = level_returns(params, n)?;
    let scanner = ReturnScanner::new(&params.rot, g, n, 1.0, default_cap(g, n, 1.0));
    let cur = PhiCocycle { phi, lambda: params.lambda, step: params.rot.step() };
    let old = PhiCocycle { phi: prev, lambda: params.lambda, step: params.rot.step() };
    let offsets = verification_offsets(params, n);
    let jobs: Vec<(usize, f64, bool)> =
        (0..2).flat_map(|i| offsets.iter().map(move |&(d, inner)| (i, d, inner))).collect();
    let checks: Vec<PointCheck> = jobs
        .par_iter()
        .map(|&(comp, d, inner)| -> Result<PointCheck, ConstructionError> {
            let x = (g.centers()[comp] + d).rem_euclid(TWO_PI);
            // offsets below the spacing of doubles near c_i collapse onto c_i
            let d = g.offset(x, comp);
            let err = hyp_err(n, x);
            let (s, sp) = field_difference(phi, params, x, long).map_err(&err)?;
            let (sb, sbp) = field_difference(prev, params, x, long).map_err(&err)?;
            let prev_diff = if inner {
                0.0
            } else {
                let (a, b) = field_difference(prev, params, x, short).map_err(&err)?;
                wrap_half(a - b)
            };
            let r = scanner.return_time(x, Direction::Forward)? as usize;
            let block = block_along_orbit(&cur, x, r);
            let hyp = check_mu_hyperbolic(&block, mu, params.lambda, params.epsilon_desk);
            // A_n^{r(x)}(x) against A_{n−1}^{r(x)}(x)·R_{−e_n(x)}
            let full = orbit_product(&cur, x, r, Direction::Forward, false);
            let tail = orbit_product(&old, orbit_point(x, cur.step(), 1), r - 1, Direction::Forward, false);
            let e = phi.correction_from(x, n);
            let m = tail.unit * old.matrix(x) * make_rotation(-e);
            let nm = m.norm();
            let unit0 = m.scale(1.0 / nm);
            let log0 = tail.log_norm + nm.ln();
            Ok(PointCheck {
                x,
                comp,
                d,
                inner,
                s,
                sp,
                sb,
                sbp,
                phi0: phi0_at(params.mode, params.variant, comp, d),
                prev_diff,
                hyp_pass: hyp.pass,
                hyp_margin: hyp.worst_log_margin,
                insert_unit: full.unit.dist_max(&unit0),
                insert_log: (full.log_norm - log0).abs() / full.log_norm.abs().max(1.0),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut report = LevelReport::new(n);
    let q = params.q(n) as f64;

    let align = checks
        .iter()
        .filter(|c| c.inner)
        .map(|c| wrap_half(c.s - c.sp - c.phi0).abs())
        .fold(0.0, f64::max);
    report.push(Clause::upper("alignment", align, params.tol_align, true));

    let outer: Vec<&PointCheck> = checks.iter().filter(|c| !c.inner).collect();
    match params.mode {
        Mode::Finite { l } => {
            let floor = (20.0 * q * q).powi(-(l as i32 + 1));
            // |s − s'| ≥ ½|φ_0|, constant relaxed ×10
            let worst = outer
                .iter()
                .map(|c| wrap_half(c.s - c.sp).abs() / (0.05 * c.phi0.abs()))
                .fold(f64::INFINITY, f64::min);
            report.push(Clause::lower("lower_bound", worst, 1.0, true));
            let half_phi0 = outer.iter().map(|c| 0.5 * c.phi0.abs()).fold(f64::INFINITY, f64::min);
            report.push(Clause::lower("lower_bound_floor", half_phi0, floor, true));
            let drift = outer
                .iter()
                .map(|c| wrap_half(wrap_half(c.s - c.sp) - c.prev_diff).abs())
                .fold(0.0, f64::max);
            report.push(Clause::upper("stability", drift, 10.0 * floor, true));
        }
        Mode::Smooth { a } => {
            let bound = 0.05 * (-(10.0 * q * q).powf(a)).exp();
            let worst = outer.iter().map(|c| wrap_half(c.s - c.sp).abs()).fold(f64::INFINITY, f64::min);
            report.push(Clause::lower("lower_bound", worst, bound, true));
        }
    }

    let hyp_ok = checks.iter().all(|c| c.hyp_pass);
    let hyp_margin = checks.iter().map(|c| c.hyp_margin).fold(f64::INFINITY, f64::min);
    report.push(Clause::new(
        "hyperbolic",
        hyp_ok,
        hyp_margin,
        true,
        format!(
            "mu={mu:e} eps={} blocks={} failing={}",
            params.epsilon_desk,
            checks.len(),
            checks.iter().filter(|c| !c.hyp_pass).count()
        ),
    ));

    let ins = checks.iter().map(|c| c.insert_unit.max(c.insert_log)).fold(0.0, f64::max);
    report.push(Clause::upper("rotation_insertion", ins, 1e-8, true));

    let mut fields = FieldSamples::default();
    for comp in 0..2 {
        let mut pts: Vec<&PointCheck> = checks.iter().filter(|c| c.comp == comp).collect();
        pts.sort_by(|a, b| a.d.total_cmp(&b.d));
        let mut cols = [
            pts.iter().map(|c| c.s).collect::<Vec<_>>(),
            pts.iter().map(|c| c.sp).collect(),
            pts.iter().map(|c| c.sb).collect(),
            pts.iter().map(|c| c.sbp).collect(),
        ];
        for col in cols.iter_mut() {
            continuous_branch(col);
        }
        let [s, sp, sb, sbp] = cols;
        fields.x.extend(pts.iter().map(|c| c.x));
        fields.component.extend(std::iter::repeat(comp as u8).take(pts.len()));
        fields.s.extend(s);
        fields.s_prime.extend(sp);
        fields.s_bar.extend(sb);
        fields.s_bar_prime.extend(sbp);
    }
    Ok((fields, report))
}

/// One inductive step: `φ_n = φ_{n−1} + e_n`, then verification.
///
/// The returned state always carries its report; use
/// [`LevelState::require_pass`] to turn a failed hard clause into an error.
pub fn advance_level(prev: &LevelState, params: &ConstructionParams) -> Result<LevelState, ConstructionError> {
    let n = prev.n + 1;
    if n + 2 > params.geometry.max_level() {
        return Err(ConstructionError::InvalidParameter(format!("level {n} exceeds the convergent table")));
    }
    let sched = lambda_schedule(params, n);
    let lambda_n = sched.lambda(n);
    let ll = params.lambda.ln();
    let mu = lambda_n.max(params.lambda.powf(1.0 - params.epsilon_desk));
    let corr = compute_correction(&prev.phi, params, n)?;
    let phi = prev.phi.with_pieces(corr.pieces);
    let (fields, mut report) = verify_level(&prev.phi, &phi, params, n, mu)?;

    let order = match params.mode {
        Mode::Finite { l } => l as usize,
        Mode::Smooth { .. } => 4,
    };
    let sup_deriv = level_sup_derivs(&phi, params, n, n, order);
    let convergence = ConvergenceRecord { sup_deriv, log_sup_core: corr.log_sup_core };

    if n > params.big_n {
        let prev_log = prev.convergence.log_sup_core;
        let cur_log = convergence.log_sup_core;
        let (pass, margin) = if cur_log == f64::NEG_INFINITY {
            (true, f64::INFINITY)
        } else {
            let m = 0.1f64.ln() - (cur_log - prev_log);
            (m >= 0.0, m)
        };
        report.push(Clause::new(
            "contraction",
            pass,
            margin,
            true,
            format!("ln sup|e_n|={cur_log:.3} ln sup|e_n-1|={prev_log:.3} (ratio <= 0.1)"),
        ));
    }

    let floor = (1.0 - 2.0 * params.epsilon_desk) * ll;
    report.push(Clause::new(
        "lambda_floor",
        lambda_n.ln() > floor,
        lambda_n.ln() - floor,
        false,
        format!("lambda_n={lambda_n:e} floor={:e}", floor.exp()),
    ));
    match params.mode {
        Mode::Finite { .. } => {
            let qp = params.q(n - 1) as f64;
            let bound = (-(qp.powf(0.1)) * lambda_n.ln()).exp();
            report.push(Clause::upper("correction_smallness", convergence.ck_norm(order), bound, false));
            let glue_bound = if n == params.big_n {
                4.0 * base_c1_norm(&phi.base) * params.lambda.powf(-(1.0 - params.epsilon_desk))
            } else {
                let r = level_returns(params, n - 1)?.0 as f64;
                params.lambda.powf(-(1.0 / 3.0) * r.powf(2.0 / 3.0))
            };
            report.push(Clause::upper("glue_bound", corr.glue_sup, glue_bound, false));
        }
        Mode::Smooth { .. } => {
            let q = params.q(n) as f64;
            let bound = (-(q.powf(0.1)) * lambda_n.ln()).exp();
            report.push(Clause::upper("smooth_step_c1", convergence.ck_norm(1), bound, true));
        }
    }
    Ok(LevelState {
        n,
        q_n: params.q(n),
        phi,
        lambda_n,
        mu,
        returns: level_returns(params, n)?,
        fields,
        report,
        convergence,
    })
}

/// `levels` consecutive levels `N, …, N + levels − 1` after the base state.
pub fn construct(params: &ConstructionParams, levels: usize) -> Result<Vec<LevelState>, ConstructionError> {
    params.check_resolution(levels)?;
    let mut states = vec![base_state(params)?];
    for _ in 0..levels {
        let next = advance_level(states.last().unwrap(), params)?;
        states.push(next);
    }
    Ok(states)
}
