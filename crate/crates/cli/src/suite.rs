//! Property checks shared by `qpc verify` and the acceptance runner. Each
//! returns a [`Check`] with a signed log margin (non-negative means pass).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use qpc_construction::{
    critical_profile, default_horizon, gap_experiment, gap_row, richardson_deriv, GapRow, smooth_bump, ConstructionParams,
    LevelState, Mode, PhiCocycle, TildeCocycle,
};
use qpc_lyapunov::{
    cancellation_upper_bound_check, check_mu_hyperbolic, direction_decay_check, le_samples, sample_points, Sampling,
};
use qpc_rotation::{check_bounded_type, nonresonant_fraction, return_stats, RotationNumber};
use qpc_schrodinger::{
    conjugate_full, perturbation_transport, reduce_to_s, solve_cohomological, ConjugationResult, TransportSummary,
};
use qpc_sl2::{make_diag, make_rotation, proj_act, proj_deriv, svd_frame, wrap_half, Mat2, ProjAngle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SchrodingerSection;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// `ln(bound / worst)` or an equivalent signed margin.
    pub margin: f64,
    pub detail: String,
}

impl Check {
    pub const CSV_HEADER: &'static str = "property,pass,log_margin,detail";

    pub fn new(name: &str, pass: bool, margin: f64, detail: String) -> Self {
        Check { name: name.to_string(), pass, margin, detail }
    }

    /// Pass iff `worst <= bound`.
    pub fn upper(name: &str, worst: f64, bound: f64) -> Self {
        let margin = log_ratio(bound, worst);
        Check::new(name, worst <= bound, margin, format!("worst={worst:e} bound={bound:e}"))
    }

    /// Pass iff every part passes; the margin is the smallest one.
    pub fn all(name: &str, parts: Vec<Check>) -> Self {
        let pass = parts.iter().all(|c| c.pass);
        let margin = parts.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        let detail = parts.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
        Check::new(name, pass, margin, detail)
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6e},\"{}\"", self.name, self.pass, self.margin, self.detail.replace('"', "'"))
    }
}

fn log_ratio(big: f64, small: f64) -> f64 {
    if small == 0.0 {
        f64::INFINITY
    } else if big == 0.0 || !small.is_finite() {
        f64::NEG_INFINITY
    } else {
        (big / small).ln()
    }
}

fn random_unimodular(rng: &mut ChaCha8Rng, max_log_sigma: f64) -> Mat2 {
    let sigma = (rng.gen::<f64>() * max_log_sigma).exp();
    make_rotation(rng.gen::<f64>() * TAU) * make_diag(sigma).unwrap() * make_rotation(rng.gen::<f64>() * TAU)
}

/// `|A·ŝ|·‖A‖ = 1` and `s ⊥ u` for matrices of condition number up to 10⁶.
pub fn svd_identities(seed: u64, count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_norm, mut worst_perp) = (0.0f64, 0.0f64);
    for _ in 0..count {
        // condition number σ² ≤ 10⁶
        let a = random_unimodular(&mut rng, 1e3f64.ln());
        let Ok(f) = svd_frame(&a) else {
            return Check::new("svd_identities", false, f64::NEG_INFINITY, "svd_frame rejected a matrix".into());
        };
        let w = a.apply_compensated(f.s.unit());
        worst_norm = worst_norm.max((w[0].hypot(w[1]) * f.norm / a.det_compensated().abs() - 1.0).abs());
        let (s, u) = (f.s.unit(), f.u.unit());
        worst_perp = worst_perp.max((s[0] * u[0] + s[1] * u[1]).abs());
    }
    let mut c = Check::upper("svd_identities", worst_norm.max(worst_perp), 1e-10);
    c.detail = format!("{count} matrices; max||As|*|A|-1|={worst_norm:e} max|s.u|={worst_perp:e} bound=1e-10");
    c
}

/// Exact values of the projective derivative of `Λ` and agreement with
/// finite differences of the projective action.
pub fn projective_derivative(seed: u64, count: usize) -> Check {
    let mut worst_exact = 0.0f64;
    for lambda in [1.5f64, 7.0, 50.0] {
        let d = make_diag(lambda).unwrap();
        worst_exact = worst_exact.max((proj_deriv(&d, ProjAngle::new(FRAC_PI_2)) - lambda * lambda).abs());
        worst_exact = worst_exact.max((proj_deriv(&d, ProjAngle::new(0.0)) - lambda.powi(-2)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_fd = 0.0f64;
    for _ in 0..count {
        let a = random_unimodular(&mut rng, 2.0);
        let th = rng.gen::<f64>() * PI;
        let h = 1e-6;
        let fd = proj_act(&a, ProjAngle::new(th + h)).diff(proj_act(&a, ProjAngle::new(th - h))) / (2.0 * h);
        worst_fd = worst_fd.max((fd / proj_deriv(&a, ProjAngle::new(th)) - 1.0).abs());
    }
    let exact = Check::upper("exact", worst_exact, 1e-10);
    let fd = Check::upper("finite_differences", worst_fd, 1e-6);
    Check::all("projective_derivative", vec![exact, fd])
}

/// Golden convergents are Fibonacci numbers; bounded type with `M = 2`
/// but not with `M = 1.5`.
pub fn continued_fractions() -> Check {
    let r = RotationNumber::golden();
    let (mut a, mut b) = (1u64, 1u64);
    let mut mismatch = None;
    for k in 0..=30 {
        if r.q(k) != a {
            mismatch = Some(k);
            break;
        }
        (a, b) = (b, a + b);
    }
    let m2 = check_bounded_type(&r, 2.0);
    let m15 = check_bounded_type(&r, 1.5);
    let pass = mismatch.is_none() && m2 && !m15;
    let detail = format!("fibonacci through q30: {}; M=2: {m2}; M=1.5: {m15}", mismatch.map_or("yes".into(), |k| format!("no (k={k})")));
    Check::new("continued_fractions", pass, if pass { 0.0 } else { f64::NEG_INFINITY }, detail)
}

/// Return times to `I_n` on five consecutive golden levels: `r_n ≥ q_n`, at
/// most three distinct values and `min r / max r ≥ M^{-19}`.
pub fn return_structure(grid: usize) -> Check {
    let r = RotationNumber::golden();
    let g = qpc_rotation::CriticalGeometry::new(1.0, &r);
    let first = r.level_with_q_at_least(13).unwrap();
    let floor = 2f64.powi(-19);
    let mut parts = Vec::new();
    for n in first..first + 5 {
        let c = match return_stats(&r, &g, n, grid) {
            Ok(st) => {
                let min_r = st.r_plus_min.min(st.r_minus_min);
                let ok = min_r >= st.q_n && st.distinct_forward.len() <= 3 && st.ratio >= floor;
                let margin = log_ratio(st.ratio, floor).min(log_ratio(min_r as f64, st.q_n as f64));
                let detail =
                    format!("q={} min_r={min_r} distinct={:?} ratio={:.4}", st.q_n, st.distinct_forward, st.ratio);
                Check::new(&format!("n={n}"), ok, margin, detail)
            }
            Err(e) => Check::new(&format!("n={n}"), false, f64::NEG_INFINITY, e.to_string()),
        };
        parts.push(c);
    }
    Check::all("return_structure", parts)
}

/// Upper bound on `‖BA‖` for pairs where `B` expands the image of the
/// contracted direction of `A`.
pub fn cancellation_lemma(seed: u64, count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..count {
        let (al, be, ga) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * PI, rng.gen::<f64>() * PI);
        let sa = (rng.gen::<f64>() * 7.0).exp() + 0.01;
        let sb = (rng.gen::<f64>() * 7.0).exp() + 0.01;
        let a = make_rotation(al) * make_diag(sa).unwrap() * make_rotation(be);
        let b = make_rotation(ga) * make_diag(sb).unwrap() * make_rotation(-(al + FRAC_PI_2));
        if !cancellation_upper_bound_check(&a, &b).unwrap_or(false) {
            failures += 1;
        }
    }
    let pass = failures == 0;
    Check::new("cancellation_lemma", pass, if pass { 0.0 } else { -(failures as f64) }, format!("{count} pairs, {failures} failures"))
}

fn candidate_block(rng: &mut ChaCha8Rng, mu: f64, eps: f64, len: usize) -> Vec<Mat2> {
    let conj = make_rotation(rng.gen::<f64>() * PI);
    (0..len)
        .map(|_| {
            let sigma = mu.powf(0.95 + rng.gen::<f64>() * (0.05 + eps));
            let th = (rng.gen::<f64>() - 0.5) * 0.6;
            conj * make_rotation(th) * make_diag(sigma).unwrap() * conj.adj()
        })
        .collect()
}

/// Decay of partial contracted directions on random μ-hyperbolic blocks.
pub fn decay_lemma(seed: u64, count: usize) -> Check {
    let (mu, eps, max_len) = (10.0f64, 0.1, 50);
    let cap = mu.powf(1.0 + eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut found, mut failures, mut margin) = (0, 0, f64::INFINITY);
    while found < count {
        let len = rng.gen_range(1..=max_len);
        let b = candidate_block(&mut rng, mu, eps, len);
        if !check_mu_hyperbolic(&b, mu, cap, eps).pass {
            continue;
        }
        found += 1;
        match direction_decay_check(&b, mu, cap, eps) {
            Ok(r) => {
                if !r.pass {
                    failures += 1;
                }
                margin = margin.min(r.worst_log_margin_a).min(r.worst_log_margin_b);
            }
            Err(_) => failures += 1,
        }
    }
    Check::new("decay_lemma", failures == 0, margin, format!("{count} blocks (mu=10, eps=0.1, len<=50), {failures} failures"))
}

/// Fraction of nonresonant points against `1 − Σ 1/q_k`.
pub fn nonresonance(samples: usize) -> Check {
    let r = RotationNumber::golden();
    let g = qpc_rotation::CriticalGeometry::new(1.0, &r);
    let big_n = r.level_with_q_at_least(13).unwrap();
    let n = big_n + 3;
    let (p, sigma) = nonresonant_fraction(&r, &g, big_n, n, samples);
    let bound = 1.0 - (big_n..n).map(|k| 1.0 / g.q(k) as f64).sum::<f64>() - 3.0 * sigma;
    let pass = p >= bound;
    Check::new("nonresonance", pass, log_ratio(p, bound), format!("fraction={p:.6} bound={bound:.6} samples={samples}"))
}

/// `s(A·R_{−θ}) = s(A) + θ` and `s(R_θ·A) = s(A)`.
pub fn contracted_direction_rotation(seed: u64, count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let a = random_unimodular(&mut rng, 50f64.ln());
        let theta = rng.gen_range(-PI..PI);
        let s = svd_frame(&a).unwrap().s.theta();
        let right = svd_frame(&(a * make_rotation(-theta))).unwrap().s.theta();
        let left = svd_frame(&(make_rotation(theta) * a)).unwrap().s.theta();
        worst = worst.max(wrap_half(right - s - theta).abs()).max(wrap_half(left - s).abs());
    }
    Check::upper("contracted_direction_rotation", worst, 1e-10)
}

/// Named clauses of every constructed level plus the per-level contraction
/// `‖φ_{n+1} − φ_n‖ ≤ 0.1·‖φ_n − φ_{n−1}‖`.
pub fn construction_levels(name: &str, states: &[LevelState]) -> Check {
    let mut parts = Vec::new();
    for s in states.iter().filter(|s| !s.is_base()) {
        for clause in ["alignment", "lower_bound", "hyperbolic", "rotation_insertion"] {
            let c = match s.report.get(clause) {
                Some(c) => Check::new(&format!("L{} {clause}", s.n), c.pass, c.margin, c.detail.clone()),
                None => Check::new(&format!("L{} {clause}", s.n), false, f64::NEG_INFINITY, "missing".into()),
            };
            parts.push(c);
        }
        if let Some(c) = s.report.first_failure() {
            parts.push(Check::new(&format!("L{} {}", s.n, c.name), false, c.margin, c.detail.clone()));
        }
    }
    let levels: Vec<&LevelState> = states.iter().filter(|s| !s.is_base()).collect();
    for w in levels.windows(2) {
        let (a, b) = (w[0].convergence.log_sup_core, w[1].convergence.log_sup_core);
        let margin = a + 0.1f64.ln() - b;
        parts.push(Check::new(
            &format!("L{} contraction", w[1].n),
            margin >= 0.0,
            margin,
            format!("ln sup e: {a:.3} -> {b:.3}"),
        ));
    }
    Check::all(name, parts)
}

/// `sup |f_n^{(r)}| ≤ q_n^{3r}` for `1 ≤ r ≤ r_max` on a dense grid.
pub fn bump_bound(params: &ConstructionParams, n: usize, r_max: usize) -> Check {
    let g = &params.geometry;
    let q = g.q(n) as f64;
    let rho = g.radius(n, 5.0);
    let mut parts = Vec::new();
    for r in 1..=r_max {
        let mut sup = 0.0f64;
        for k in 0..=4000 {
            let d = -rho + 2.0 * rho * k as f64 / 4000.0;
            sup = sup.max(richardson_deriv(|u| smooth_bump(n, g, u), d, r, rho * 1e-3).abs());
        }
        parts.push(Check::upper(&format!("q={q} r={r}"), sup, q.powi(3 * r as i32)));
    }
    Check::all("bump_bound", parts)
}

/// `sup_{I_n} |φ_0^{(r)}| ≤ exp(−q_n^{2a}/4)` for `0 ≤ r ≤ r_max`, with
/// offsets spread logarithmically down to `10⁻⁴⁰` so the peak of each
/// derivative is resolved.
pub fn phi0_derivative_bound(params: &ConstructionParams, n: usize, r_max: usize) -> Check {
    let Mode::Smooth { a } = params.mode else {
        return Check::new("phi0_derivative_bound", false, f64::NEG_INFINITY, "needs smooth mode".into());
    };
    let q = params.q(n) as f64;
    let rho = params.geometry.radius(n, 1.0);
    let bound = (-(q.powf(2.0 * a)) / 4.0).exp();
    let offsets: Vec<f64> = (0..=4000).map(|k| rho * 10f64.powf(-40.0 * (1.0 - k as f64 / 4000.0))).collect();
    let mut parts = Vec::new();
    for r in 0..=r_max {
        let sup = offsets
            .iter()
            .map(|&d| richardson_deriv(|u| critical_profile(params.mode, u), d, r, d * 0.05 / (r.max(1) as f64)).abs())
            .fold(0.0, f64::max);
        parts.push(Check::upper(&format!("q={q} r={r}"), sup, bound));
    }
    Check::all("phi0_derivative_bound", parts)
}

/// The exponent gap at the deepest level and its vanishing without
/// destruction.
pub fn gap_criterion(params: &ConstructionParams, states: &[LevelState], tildes: &[TildeCocycle], samples: usize) -> Check {
    let rows = match gap_experiment(params, states, tildes, None, samples) {
        Ok(r) => r,
        Err(e) => return Check::new("gap", false, f64::NEG_INFINITY, e.to_string()),
    };
    let row = rows.last().unwrap();
    let target = 0.05 * params.lambda.ln();
    let size = Check::new(
        "gap_size",
        row.gap >= target,
        log_ratio(row.gap.max(0.0), target),
        format!("level {} gap={:.4e} target={target:.4e} K={}", row.n, row.gap, row.k),
    );
    let sig = Check::new(
        "gap_significance",
        row.gap > 5.0 * row.stderr(),
        log_ratio(row.gap.max(0.0), 5.0 * row.stderr()),
        format!("gap={:.3e} 5*stderr={:.3e}", row.gap, 5.0 * row.stderr()),
    );
    let state = states.iter().find(|s| s.n == row.n).unwrap();
    let tilde = tildes.iter().find(|t| t.n == row.n).unwrap();
    let off = gap_row(params, state, &undestroyed(state, tilde), row.k, samples);
    let null = Check::new(
        "gap_without_destruction",
        off.gap.abs() < 3.0 * off.stderr(),
        log_ratio(3.0 * off.stderr(), off.gap.abs()),
        format!("gap={:.3e} 3*stderr={:.3e}", off.gap, 3.0 * off.stderr()),
    );
    Check::all("gap", vec![size, sig, null])
}

/// `Ã_n := A_n`, keeping the bookkeeping of `tilde`.
pub fn undestroyed(state: &LevelState, tilde: &TildeCocycle) -> TildeCocycle {
    TildeCocycle { phi: state.phi.clone(), ..tilde.clone() }
}

fn golden_shift() -> f64 {
    2.0 * RotationNumber::golden().step()
}

/// Residual of the cohomological equation for a random band-limited `f`
/// with 64 modes and the shift `2·2πω`.
pub fn cohomology_band_limited(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..=64)
        .map(|k| {
            let s = 1.0 / (1.0 + k as f64).powi(2);
            (s * rng.gen_range(-1.0..1.0), s * rng.gen_range(-1.0..1.0))
        })
        .collect();
    let m = 1024;
    let f: Vec<f64> = (0..m)
        .map(|j| {
            let x = TAU * j as f64 / m as f64;
            coeffs.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin()).sum()
        })
        .collect();
    match solve_cohomological(&f, golden_shift(), 128) {
        Ok(sol) => Check::upper("cohomology_band_limited", sol.residual, 1e-8),
        Err(e) => Check::new("cohomology_band_limited", false, f64::NEG_INFINITY, e.to_string()),
    }
}

/// `d(f₁ + f₂) = d(f₁) + d(f₂)`.
pub fn cohomology_linearity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 512;
    let mut f1: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f2: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // smooth the white noise so the coefficients decay
    for f in [&mut f1, &mut f2] {
        for _ in 0..8 {
            let g = f.clone();
            for j in 0..m {
                f[j] = 0.25 * g[(j + m - 1) % m] + 0.5 * g[j] + 0.25 * g[(j + 1) % m];
            }
        }
    }
    let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    let solve = |f: &[f64]| solve_cohomological(f, golden_shift(), 100).map(|s| s.d);
    let (Ok(d1), Ok(d2), Ok(d12)) = (solve(&f1), solve(&f2), solve(&sum)) else {
        return Check::new("cohomology_linearity", false, f64::NEG_INFINITY, "solver error".into());
    };
    let worst = (0..300)
        .map(|j| {
            let x = 0.021 * j as f64;
            (d12.eval(x) - d1.eval(x) - d2.eval(x)).abs()
        })
        .fold(0.0, f64::max);
    Check::upper("cohomology_linearity", worst, 1e-12)
}

/// Results of the Schrödinger pipeline on one constructed run.
pub struct SchrodingerRun {
    pub conjugation: ConjugationResult,
    pub checks: Vec<Check>,
    /// Transport of the destroyed levels and the matching construction gaps.
    pub transport: Option<(TransportSummary, Vec<GapRow>)>,
}

/// Structural entries, conjugation residuals, exponent invariance and the
/// transported gap for the deepest level of `states`.
pub fn schrodinger_checks(
    params: &ConstructionParams,
    states: &[LevelState],
    tildes: &[TildeCocycle],
    cfg: &SchrodingerSection,
) -> Result<SchrodingerRun, qpc_schrodinger::SchrodingerError> {
    let step = params.rot.step();
    let last = states.last().unwrap();
    let d = PhiCocycle { phi: &last.phi, lambda: params.lambda, step };
    let log_lambda = params.lambda.ln();
    let mut checks = Vec::new();

    let red = reduce_to_s(&d, cfg.grid)?;
    checks.push(Check::upper("structural_entries", red.shape_defect, 1e-8));
    let conj = conjugate_full(&d, cfg.grid, cfg.modes, f64::INFINITY)?;
    checks.push(Check::upper("conjugation_residual", conj.residual_conj, cfg.tol_conj));
    checks.push(Check::upper("unimodular_frame", conj.det_defect, 1e-8));
    let pot = conj.potential(&d);
    checks.push(Check::upper("potential_seam", (pot.eval(0.0) - pot.eval(TAU)).abs(), 1e-8));

    let k = cfg.check_horizon;
    let pts = sample_points(&Sampling::Grid(cfg.samples), k, step);
    let ld = le_samples(&d, k, &pts);
    let ls = le_samples(&pot, k, &pts);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let diff = (mean(&ld) - mean(&ls)).abs();
    checks.push(Check::upper("exponent_invariance", diff, 0.02 * log_lambda));
    let kappa_bound = 2.0 * conj.condition().ln() / k as f64;
    let worst = ld.iter().zip(&ls).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::upper("conjugation_invariance_bound", worst, kappa_bound));

    let mut transport = None;
    if !tildes.is_empty() {
        let pert: Vec<PhiCocycle> = tildes.iter().map(|t| PhiCocycle { phi: &t.phi, lambda: params.lambda, step }).collect();
        let horizon = default_horizon(params, last.n);
        let tr = perturbation_transport(&d, &pert, cfg.grid, cfg.modes, f64::INFINITY, horizon, cfg.samples)?;
        let gaps = gap_experiment(params, states, tildes, Some(horizon), cfg.samples)
            .map_err(|e| qpc_schrodinger::SchrodingerError::InvalidInput(e.to_string()))?;
        let (t_row, c_row) = (tr.rows.last().unwrap(), gaps.last().unwrap());
        checks.push(Check::upper("transported_gap", (t_row.gap - c_row.gap).abs(), 0.01 * log_lambda));
        let decreasing = tr.rows.windows(2).all(|w| w[1].c0 < w[0].c0);
        checks.push(Check::new(
            "potentials_converge",
            decreasing,
            if decreasing { 0.0 } else { f64::NEG_INFINITY },
            tr.rows.iter().map(|r| format!("{:.3e}", r.c0)).collect::<Vec<_>>().join(" > "),
        ));
        transport = Some((tr, gaps));
    }
    Ok(SchrodingerRun { conjugation: conj, checks, transport })
}
