use std::f64::consts::PI;

use qpc_sl2::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unimodular(rng: &mut ChaCha8Rng, max_log_sigma: f64) -> Mat2 {
    let sigma = (0.2 + rng.gen::<f64>() * max_log_sigma).exp();
    make_rotation(rng.gen::<f64>() * 2.0 * PI)
        * make_diag(sigma).unwrap()
        * make_rotation(rng.gen::<f64>() * 2.0 * PI)
}

/// Largest singular value and right singular vector by power iteration on AᵀA.
fn power_method(a: &Mat2) -> (f64, [f64; 2]) {
    let g = a.transpose() * *a;
    let mut v = [0.6, 0.8];
    for _ in 0..200 {
        let w = g.apply(v);
        let n = w[0].hypot(w[1]);
        v = [w[0] / n, w[1] / n];
    }
    let w = a.apply(v);
    (w[0].hypot(w[1]), v)
}

#[test]
fn frame_agrees_with_power_method() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let a = random_unimodular(&mut rng, 0.5 * (1e3f64).ln());
        let f = svd_frame(&a).unwrap();
        let (n, v) = power_method(&a);
        assert!((f.norm / n - 1.0).abs() < 1e-10);
        let du = f.u.dist(ProjAngle::new(v[1].atan2(v[0])));
        assert!(du < 1e-8, "du = {du}");
        let as_ = a.apply_compensated(f.s.unit());
        assert!((as_[0].hypot(as_[1]) * f.norm / a.det_compensated().abs() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..2000 {
        let a = random_unimodular(&mut rng, 2.0);
        let th = rng.gen::<f64>() * PI;
        let h = 1e-6;
        let fwd = proj_act(&a, ProjAngle::new(th + h));
        let bwd = proj_act(&a, ProjAngle::new(th - h));
        let fd = fwd.diff(bwd) / (2.0 * h);
        let d = proj_deriv(&a, ProjAngle::new(th));
        assert!((fd / d - 1.0).abs() < 1e-6, "{fd} vs {d}");
    }
}

#[test]
fn derivative_integrates_to_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let a = random_unimodular(&mut rng, 1.0);
        // periodic trapezoid rule is spectrally accurate
        let m = 4096;
        let total: f64 = (0..m)
            .map(|k| proj_deriv(&a, ProjAngle::new(PI * k as f64 / m as f64)))
            .sum::<f64>()
            * PI
            / m as f64;
        assert!((total / PI - 1.0).abs() < 1e-6);
    }
}

#[test]
fn derivative_chain_rule_with_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let a = random_unimodular(&mut rng, 3.0);
        let th = ProjAngle::new(rng.gen::<f64>() * PI);
        let p = proj_deriv(&a, th) * proj_deriv(&a.inv(), proj_act(&a, th));
        assert!((p - 1.0).abs() < 1e-9);
    }
}

#[test]
fn contracted_and_expanded_images_are_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1000 {
        let a = random_unimodular(&mut rng, 4.0);
        let f = svd_frame(&a).unwrap();
        assert!((f.s.dist(f.u) - PI / 2.0).abs() < 1e-15);
        let x = a.apply_compensated(f.s.unit());
        let y = a.apply(f.u.unit());
        let cos = (x[0] * y[0] + x[1] * y[1]) / (x[0].hypot(x[1]) * y[0].hypot(y[1]));
        assert!(cos.abs() < 1e-10);
    }
}

struct Generic;
impl Cocycle for Generic {
    fn matrix(&self, x: f64) -> Mat2 {
        cocycle_matrix(50.0, 0.4 + 0.9 * x.sin() + 0.2 * (3.0 * x).cos()).unwrap()
    }
    fn step(&self) -> f64 {
        PI * (5f64.sqrt() - 1.0)
    }
}

/// Product with a separate power-of-two exponent; scaling is exact.
fn extended_exponent_log_norm(c: &impl Cocycle, x0: f64, n: usize) -> f64 {
    let mut m = Mat2::IDENTITY;
    let mut e2: i64 = 0;
    for i in 0..n {
        m = c.matrix(orbit_point(x0, c.step(), i as i64)) * m;
        let k = m.max_abs().log2().floor() as i32;
        m = m.scale(2f64.powi(-k));
        e2 += k as i64;
    }
    m.norm().ln() + e2 as f64 * std::f64::consts::LN_2
}

#[test]
fn renormalized_product_matches_extended_exponent_oracle() {
    for &x0 in &[0.0, 0.5, 2.2, 4.0] {
        let p = orbit_product(&Generic, x0, 200, Direction::Forward, false);
        let oracle = extended_exponent_log_norm(&Generic, x0, 200);
        assert!((p.log_norm / oracle - 1.0).abs() < 1e-8);
    }
}

#[test]
fn renormalization_period_does_not_matter() {
    for &x0 in &[0.1, 3.3] {
        let base = orbit_product_with(&Generic, x0, 1000, Direction::Forward, true, K_RENORM);
        for &k in &[1usize, 7, 16] {
            let other = orbit_product_with(&Generic, x0, 1000, Direction::Forward, true, k);
            assert!((base.log_norm - other.log_norm).abs() < 1e-10 * base.log_norm.abs().max(1.0));
            for (a, b) in base.partial_log_norms.iter().zip(&other.partial_log_norms) {
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
            }
        }
    }
}

#[test]
fn huge_horizon_stays_finite() {
    let c = FnCocycle { f: |_x: f64| make_diag(1e3).unwrap(), step: 1.0 };
    let p = orbit_product(&c, 0.0, 200_000, Direction::Forward, false);
    assert!(p.unit.is_finite());
    assert!((p.log_norm / (200_000.0 * 1e3f64.ln()) - 1.0).abs() < 1e-12);
}
