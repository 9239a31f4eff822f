//! A configuration with a wide transition region, where `e_N` is far above
//! the alignment tolerance, so corrupting it is visible.

use qpc_construction::*;
use qpc_sl2::TWO_PI;

fn params() -> ConstructionParams {
    let mut p = ConstructionParams::desk_finite();
    p.lambda = 6.0;
    p.delta1 = 1.1;
    p
}

fn negate(p: &Piece) -> Piece {
    let kind = match &p.kind {
        PieceKind::Cheb(s) => PieceKind::Cheb(ChebSeries { coeffs: s.coeffs.iter().map(|c| -c).collect(), ..s.clone() }),
        PieceKind::Hermite(h) => PieceKind::Hermite(HermitePoly { coeffs: h.coeffs.iter().map(|c| -c).collect(), ..h.clone() }),
        PieceKind::Phi0 { scale } => PieceKind::Phi0 { scale: -scale },
        PieceKind::Bumped { level, scale, core } => PieceKind::Bumped {
            level: *level,
            scale: -scale,
            core: core.iter().map(|s| ChebSeries { coeffs: s.coeffs.iter().map(|c| -c).collect(), ..s.clone() }).collect(),
        },
    };
    Piece { kind, ..p.clone() }
}

#[test]
fn correction_is_well_above_tolerance() {
    let p = params();
    let base = base_state(&p).unwrap();
    let c = compute_correction(&base.phi, &p, p.big_n).unwrap();
    assert!(c.log_sup_core > (10.0 * p.tol_align).ln(), "ln sup e = {}", c.log_sup_core);
}

#[test]
fn flipped_correction_fails_alignment() {
    let p = params();
    let base = base_state(&p).unwrap();
    let good = advance_level(&base, &p).unwrap();
    let align = good.report.get("alignment").unwrap();
    assert!(align.pass, "{}", align.detail);

    let flipped: Vec<Piece> = good.phi.pieces.iter().filter(|q| q.level == p.big_n).map(negate).collect();
    assert!(!flipped.is_empty());
    let bad = base.phi.with_pieces(flipped);
    let (_, report) = verify_level(&base.phi, &bad, &p, p.big_n, good.mu).unwrap();
    let align = report.get("alignment").unwrap();
    assert!(!align.pass, "{}", align.detail);
    assert!(align.margin < 0.0);
}

#[test]
fn omitted_correction_fails_alignment() {
    let p = params();
    let base = base_state(&p).unwrap();
    let good = advance_level(&base, &p).unwrap();
    let (_, report) = verify_level(&base.phi, &base.phi, &p, p.big_n, good.mu).unwrap();
    assert!(!report.get("alignment").unwrap().pass);
}

#[test]
fn glue_is_continuous_for_a_sizable_correction() {
    let p = params();
    let base = base_state(&p).unwrap();
    let c = compute_correction(&base.phi, &p, p.big_n).unwrap();
    let phi = base.phi.with_pieces(c.pieces);
    let g = &p.geometry;
    let n = p.big_n;
    let l = p.l().unwrap() as usize;
    let r_in = g.radius(n, 10.0);
    let r_out = g.radius(n, 1.0);
    let sup0 = c.log_sup_core.exp();
    assert!(sup0 > 1e-6);
    for &c0 in &g.centers() {
        for d in [r_in, -r_in, r_out, -r_out] {
            for k in 0..=l {
                let h = 1e-9 * r_in;
                let left = phi.level_deriv((c0 + d - h).rem_euclid(TWO_PI), n, k);
                let right = phi.level_deriv((c0 + d + h).rem_euclid(TWO_PI), n, k);
                // derivatives of e_n scale like sup|e_n| / r_in^k
                let rel = (left - right).abs() * r_in.powi(k as i32) / sup0;
                assert!(rel < 1e-8, "d={d:e} k={k} rel={rel:e}");
            }
        }
    }
}

#[test]
fn destruction_works_for_a_sizable_correction() {
    let p = params();
    let base = base_state(&p).unwrap();
    let state = advance_level(&base, &p).unwrap();
    let t = destroy_level(&state, &p).unwrap();
    assert!(t.residual < 1e-6);
    // the other sign leaves a residual of about 2|φ_0| on I_n/10
    assert!(t.residual_other > t.residual);
}
