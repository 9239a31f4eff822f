use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use qpc_construction::*;
use qpc_lyapunov::{le_samples, sample_points, Sampling};
use qpc_schrodinger::*;
use qpc_sl2::{orbit_point, Cocycle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: usize = 1 << 14;
const MODES: usize = 256;

struct Run {
    params: ConstructionParams,
    states: Vec<LevelState>,
    tildes: Vec<TildeCocycle>,
    base: ConjugationResult,
}

impl Run {
    fn step(&self) -> f64 {
        TAU * self.params.rot.omega
    }

    fn cocycle<'a>(&self, phi: &'a PhiFunction) -> PhiCocycle<'a> {
        PhiCocycle { phi, lambda: self.params.lambda, step: self.step() }
    }

    fn last(&self) -> &LevelState {
        self.states.last().unwrap()
    }
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let params = ConstructionParams::desk_schrodinger();
        let states = construct(&params, 3).expect("construction");
        let tildes = states[1..].iter().map(|s| destroy_level(s, &params).expect("destruction")).collect();
        let last: &LevelState = states.last().unwrap();
        let d = PhiCocycle { phi: &last.phi, lambda: params.lambda, step: TAU * params.rot.omega };
        let base = conjugate_full(&d, GRID, MODES, 1e-6).expect("conjugation");
        Run { params, states, tildes, base }
    })
}

#[test]
fn desk_construction_passes() {
    for s in &run().states {
        s.require_pass().unwrap();
    }
}

#[test]
fn phi_stays_below_a_tenth_of_pi() {
    let r = run();
    let m = check_phi_bound(&r.last().phi, 1 << 16).unwrap();
    assert!(m <= r.params.amplitude + 1e-12);
    let nonhom = ConstructionParams { variant: Variant::NonHomotopic, amplitude: PI / 2.0, ..ConstructionParams::desk_finite() };
    let phi = base_phi(&nonhom).unwrap();
    assert!(matches!(check_phi_bound(&phi, 4096), Err(SchrodingerError::PhiTooLarge { .. })));
}

#[test]
fn frame_determinant_matches_its_closed_form() {
    let r = run();
    let phi = &r.last().phi;
    let d = r.cocycle(phi);
    let rep = frame_b1(&d, GRID).unwrap();
    assert_eq!(rep.sign, 1.0);
    let lambda = r.params.lambda;
    assert!(rep.min_abs_det >= lambda * r.params.amplitude.cos() * (1.0 - 1e-12));
    for j in 0..200 {
        let x = TAU * (j as f64 + 0.37) / 200.0;
        let want = lambda * phi.eval(orbit_point(x, r.step(), -1)).cos();
        assert!((b1_matrix(&d, x).det() - want).abs() < 1e-10 * lambda);
    }
}

#[test]
fn structural_entries_hold_on_the_desk_cocycle() {
    let r = run();
    let phi = &r.last().phi;
    let red = reduce_to_s(&r.cocycle(phi), GRID).unwrap();
    assert!(red.shape_defect < 1e-8);
    assert!(r.base.shape_defect < 1e-8);
    // c(x) = cos φ(x − 2πω) / cos φ(x)
    for j in (0..GRID).step_by(97) {
        let x = red.x[j];
        let want = phi.eval(orbit_point(x, r.step(), -1)).cos().ln() - phi.eval(x).cos().ln();
        assert!((red.f[j] - want).abs() < 1e-12, "x={x}");
    }
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn band_limited(rng: &mut ChaCha8Rng, modes: usize) -> Vec<(f64, f64)> {
    (0..=modes).map(|k| {
        let s = 1.0 / (1.0 + k as f64).powi(2);
        (s * rng.gen_range(-1.0..1.0), s * rng.gen_range(-1.0..1.0))
    }).collect()
}

fn synth(c: &[(f64, f64)], m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let x = TAU * j as f64 / m as f64;
            c.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin()).sum()
        })
        .collect()
}

#[test]
fn band_limited_equation_is_solved_to_high_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shift = 2.0 * TAU * golden();
    let f = synth(&band_limited(&mut rng, 64), 1024);
    let sol = solve_cohomological(&f, shift, 128).unwrap();
    assert!(sol.residual < 1e-8, "{:e}", sol.residual);
}

#[test]
fn solution_operator_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let shift = 2.0 * TAU * golden();
    let f1 = synth(&band_limited(&mut rng, 40), 512);
    let f2 = synth(&band_limited(&mut rng, 40), 512);
    let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    let (d1, d2, d12) = (
        solve_cohomological(&f1, shift, 100).unwrap().d,
        solve_cohomological(&f2, shift, 100).unwrap().d,
        solve_cohomological(&sum, shift, 100).unwrap().d,
    );
    for j in 0..300 {
        let x = 0.021 * j as f64;
        assert!((d12.eval(x) - d1.eval(x) - d2.eval(x)).abs() < 1e-12);
    }
}

#[test]
fn desk_conjugation_residuals() {
    let c = &run().base;
    assert_eq!(c.truncation, MODES);
    assert!(c.residual_conj < 1e-6, "{:e}", c.residual_conj);
    assert!(c.det_defect < 1e-8, "{:e}", c.det_defect);
    for m in &c.btilde {
        assert!((m.det() - 1.0).abs() < 1e-8);
    }
    let f_tol = 1e-4;
    assert!(c.f_mean.abs() < f_tol);
}

#[test]
fn potential_is_periodic() {
    let r = run();
    let d = r.cocycle(&r.last().phi);
    let pot = r.base.potential(&d);
    assert!((pot.eval(0.0) - pot.eval(TAU)).abs() < 1e-8);
    // off-grid evaluation reproduces the grid samples
    for j in (0..GRID).step_by(131) {
        assert!((pot.eval(r.base.v.x[j]) - r.base.v.v[j]).abs() < 1e-9 * r.base.v.sup_norm());
    }
}

#[test]
fn exponent_is_invariant_under_the_conjugation() {
    let r = run();
    let d = r.cocycle(&r.last().phi);
    let k = 10_000;
    let points = sample_points(&Sampling::Grid(400), k, r.step());
    let ld = le_samples(&d, k, &points);
    let ls = le_samples(&r.base.potential(&d), k, &points);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&ld) - mean(&ls)).abs() < 0.02 * r.params.lambda.ln());
    let bound = 2.0 * r.base.condition().ln() / k as f64;
    for (a, b) in ld.iter().zip(&ls) {
        assert!((a - b).abs() <= bound, "{:e} > {bound:e}", (a - b).abs());
    }
}

#[test]
fn undestroyed_sequence_transports_to_the_same_potential() {
    let r = run();
    let d = r.cocycle(&r.last().phi);
    let same = [r.cocycle(&r.last().phi)];
    let t = perturbation_transport(&d, &same, 1 << 12, 128, 1e-6, 50, 16).unwrap();
    assert_eq!(t.rows[0].c0, 0.0);
    assert_eq!(t.rows[0].gap, 0.0);
}

#[test]
fn transported_potentials_converge_and_keep_the_gap() {
    let r = run();
    let p = &r.params;
    let d = r.cocycle(&r.last().phi);
    let pert: Vec<PhiCocycle> = r.tildes.iter().map(|t| r.cocycle(&t.phi)).collect();
    let k = default_horizon(p, r.last().n);
    let t = perturbation_transport(&d, &pert, GRID, MODES, 1e-6, k, 400).unwrap();
    for w in t.rows.windows(2) {
        assert!(w[1].c0 < w[0].c0, "{:e} !< {:e}", w[1].c0, w[0].c0);
    }
    let gaps = gap_experiment(p, &r.states, &r.tildes, None, 400).unwrap();
    let (last_row, last_gap) = (t.rows.last().unwrap(), gaps.last().unwrap());
    assert_eq!(last_gap.k, k);
    assert!(last_row.gap >= 0.0);
    assert!((last_row.gap - last_gap.gap).abs() < 0.01 * p.lambda.ln());
}

#[test]
fn potential_csv_has_a_header_and_one_row_per_sample() {
    let v = &run().base.v;
    let csv = v.csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SchrodingerPotential::CSV_HEADER));
    assert_eq!(lines.count(), v.v.len());
    assert!(!csv.contains('\r'));
}

#[test]
fn reduced_determinant_is_the_lower_left_entry() {
    // det S = a·0 − (−1)·c
    let r = run();
    let d = r.cocycle(&r.last().phi);
    for j in 0..100 {
        let x = TAU * j as f64 / 100.0;
        let s = b1_matrix(&d, orbit_point(x, d.step(), 1)).inv() * d.matrix(x) * b1_matrix(&d, x);
        let red_det = s.det();
        let c = -s.a21 * s.a12;
        assert!((red_det - c).abs() < 1e-9 * c.abs());
    }
}
