use std::f64::consts::PI;

use qpc_lyapunov::*;
use qpc_sl2::{cocycle_matrix, make_diag, make_rotation, Cocycle, FnCocycle, Mat2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random block of factors `R_θ Λ(σ)` with small turning angles, conjugated
/// by a random rotation; roughly half of them are μ-hyperbolic.
fn candidate_block(rng: &mut ChaCha8Rng, mu: f64, eps: f64, len: usize) -> Vec<Mat2> {
    let conj = make_rotation(rng.gen::<f64>() * PI);
    (0..len)
        .map(|_| {
            let sigma = mu.powf(0.95 + rng.gen::<f64>() * (0.15 + eps - 0.1));
            let th = (rng.gen::<f64>() - 0.5) * 0.6;
            conj * make_rotation(th) * make_diag(sigma).unwrap() * conj.adj()
        })
        .collect()
}

fn hyperbolic_blocks(seed: u64, count: usize, mu: f64, eps: f64, max_len: usize) -> Vec<Vec<Mat2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = mu.powf(1.0 + eps);
    let mut out = Vec::new();
    while out.len() < count {
        let len = rng.gen_range(1..=max_len);
        let b = candidate_block(&mut rng, mu, eps, len);
        if check_mu_hyperbolic(&b, mu, cap, eps).pass {
            out.push(b);
        }
    }
    out
}

#[test]
fn decay_bounds_on_synthetic_blocks() {
    let (mu, eps) = (10.0, 0.1);
    for b in hyperbolic_blocks(21, 1000, mu, eps, 50) {
        let r = direction_decay_check(&b, mu, mu.powf(1.0 + eps), eps).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn decay_with_one_rotated_factor() {
    let mu: f64 = 10.0;
    let mut b = vec![make_diag(mu).unwrap(); 30];
    b[15] = make_rotation(0.05) * b[15];
    let r = direction_decay_check(&b, mu, mu, 0.1).unwrap();
    assert!(r.pass);
    // the first angles are of order μ^{-2i}·tan(0.05): far below the bound
    assert!(r.worst_log_margin_a > 0.0 && r.worst_log_margin_a.is_finite());
}

#[test]
fn concatenation_bound_on_random_pairs() {
    let (mu, eps) = (10.0f64, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut half_only = 0;
    for b in hyperbolic_blocks(23, 1000, mu, eps, 20) {
        let m = rng.gen_range(1..6);
        let c = make_rotation(rng.gen::<f64>() * PI)
            * make_diag(mu.powi(m) * (1.0 + rng.gen::<f64>()))
                .unwrap()
            * make_rotation(rng.gen::<f64>() * PI);
        let tt = alignment_angle(&c, &b).unwrap();
        let r = concat_lower_bound_check(&c, &b, mu, mu.powf(1.0 + eps), eps, m as usize, tt);
        assert!(r.preconditions);
        assert!(r.holds_half, "{r:?}");
        if !r.holds_full {
            half_only += 1;
        }
    }
    assert_eq!(half_only, 0);
}

#[test]
fn cancellation_bound_on_aligned_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..10_000 {
        let (al, be, ga) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * PI, rng.gen::<f64>() * PI);
        let sa = (rng.gen::<f64>() * 7.0).exp() + 0.01;
        let sb = (rng.gen::<f64>() * 7.0).exp() + 0.01;
        let a = make_rotation(al) * make_diag(sa).unwrap() * make_rotation(be);
        // B expands exactly the line A sends its contracted direction to
        let b = make_rotation(ga) * make_diag(sb).unwrap() * make_rotation(-(al + PI / 2.0));
        assert!(cancellation_upper_bound_check(&a, &b).unwrap());
    }
}

#[test]
fn reversed_block_symmetry_on_random_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..300 {
        let len = rng.gen_range(1..40);
        let b = candidate_block(&mut rng, 10.0, 0.1, len);
        let rev: Vec<Mat2> = b.iter().rev().map(|a| a.adj()).collect();
        let x = check_mu_hyperbolic(&b, 10.0, 20.0, 0.1);
        let y = check_mu_hyperbolic(&rev, 10.0, 20.0, 0.1);
        assert_eq!(x.pass, y.pass);
    }
}

#[test]
fn flatness_of_constant_cocycle() {
    let c = FnCocycle { f: |_x: f64| cocycle_matrix(50.0, 0.6).unwrap(), step: 3.883 };
    let r = contraction_curve_flatness(&c, |_| 0.6, 1.0, 1.05, 6, 33).unwrap();
    assert_eq!(r.sup_ds_minus_phi, 0.0);
    assert_eq!(r.sup_ds_prime, 0.0);
    assert!(r.c1_s_minus_phi() < 2.0 * 50f64.powf(-0.8));
}

#[test]
fn flatness_scales_with_lambda() {
    let phi = |x: f64| 0.7 + 0.3 * x.sin();
    let sup = |lam: f64| {
        let c = FnCocycle { f: move |x: f64| cocycle_matrix(lam, phi(x)).unwrap(), step: 3.883 };
        let r = contraction_curve_flatness(&c, phi, 1.0, 1.1, 5, 33).unwrap();
        assert!(r.c1_s_minus_phi() < 2.0 * lam.powf(-0.8) && r.c1_s_prime() < 2.0 * lam.powf(-0.8));
        r.sup_s_minus_phi
    };
    let ratio = sup(50.0) / sup(100.0);
    assert!((2.0..=8.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn exponent_invariant_under_rotation_conjugacy() {
    let a = |x: f64| cocycle_matrix(30.0, 0.4 + x.cos()).unwrap();
    let r = make_rotation(0.77);
    let c1 = FnCocycle { f: a, step: 3.883 };
    let c2 = FnCocycle { f: move |x: f64| r.adj() * a(x) * r, step: 3.883 };
    let e1 = finite_le(&c1, 500, &Sampling::Grid(100));
    let e2 = finite_le(&c2, 500, &Sampling::Grid(100));
    assert!((e1.value - e2.value).abs() < 1e-12);
    assert!(e1.value <= 30f64.ln());
    assert!(c1.step() > 0.0);
}
