
use crate::{Mat2, ProjAngle, Sl2Error};

pub const TOL_HYP: f64 = 1e-8;

/// Singular frame of a 2×2 matrix.
///
/// `s` is the most contracted and `u` the most expanded input direction;
/// `image_u` is the line spanned by `A·û`. `norm` is `‖A‖` and `sigma_min`
/// the smaller singular value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdFrame {
    pub s: ProjAngle,
    pub u: ProjAngle,
    pub image_u: ProjAngle,
    pub norm: f64,
    pub sigma_min: f64,
}

impl SvdFrame {
    pub fn image_s(&self) -> ProjAngle {
        self.image_u.perp()
    }
}

/// Closed-form SVD `A = R_φ · diag(σ1, σ2) · R_θ`.
///
/// The half-sum/half-difference form never squares the entries, so the
/// angles stay accurate to a few ulps even for condition numbers near 1e16.
pub fn svd_frame(a: &Mat2) -> Result<SvdFrame, Sl2Error> {
    let e = 0.5 * (a.a11 + a.a22);
    let f = 0.5 * (a.a11 - a.a22);
    let g = 0.5 * (a.a21 + a.a12);
    let h = 0.5 * (a.a21 - a.a12);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let s1 = q + r;
    let s2 = (q - r).abs();
    if !(s1 > (1.0 + TOL_HYP) * (1.0 + TOL_HYP) * s2) || !s1.is_finite() {
        return Err(Sl2Error::NotHyperbolic(s1));
    }
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    let u = ProjAngle::new(-theta);
    Ok(SvdFrame {
        s: u.perp(),
        u,
        image_u: ProjAngle::new(phi),
        norm: s1,
        sigma_min: s2,
    })
}

pub fn proj_act(a: &Mat2, theta: ProjAngle) -> ProjAngle {
    let w = a.apply(theta.unit());
    ProjAngle::new(w[1].atan2(w[0]))
}

/// Derivative of the projective action, `|det A| / |A·θ̂|²`.
pub fn proj_deriv(a: &Mat2, theta: ProjAngle) -> f64 {
    let w = a.apply(theta.unit());
    a.det().abs() / (w[0] * w[0] + w[1] * w[1])
}

/// Whether `‖B·A‖ = ‖B‖·‖A‖`, i.e. `A` sends its expanded direction onto the
/// expanded direction of `B` (within `tol` on RP¹).
pub fn is_norm_multiplicative(b: &Mat2, a: &Mat2, tol: f64) -> Result<bool, Sl2Error> {
    let fa = svd_frame(a)?;
    let fb = svd_frame(b)?;
    Ok(fa.image_u.dist(fb.u) <= tol)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::{make_diag, make_rotation};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn diagonal_frame() {
        let f = svd_frame(&make_diag(2.0).unwrap()).unwrap();
        assert!((f.s.theta() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(f.u.theta(), 0.0);
        assert!((f.norm - 2.0).abs() < 1e-15);
        let f = svd_frame(&make_diag(50.0).unwrap()).unwrap();
        assert!((f.s.theta() - FRAC_PI_2).abs() < 1e-15 && (f.norm - 50.0).abs() < 1e-13);
    }

    #[test]
    fn rotation_is_rejected() {
        assert!(matches!(svd_frame(&make_rotation(0.7)), Err(Sl2Error::NotHyperbolic(_))));
    }

    #[test]
    fn reconstructs_matrix() {
        let a = make_rotation(0.4) * make_diag(7.0).unwrap() * make_rotation(-1.3);
        let f = svd_frame(&a).unwrap();
        let au = a.apply(f.u.unit());
        let as_ = a.apply(f.s.unit());
        assert!(((au[0].hypot(au[1])) - 7.0).abs() < 1e-13);
        assert!((as_[0].hypot(as_[1]) * 7.0 - 1.0).abs() < 1e-13);
        assert!((au[0] * as_[0] + au[1] * as_[1]).abs() < 1e-13);
        assert!(ProjAngle::new(au[1].atan2(au[0])).dist(f.image_u) < 1e-14);
        assert!((f.u.theta() - 1.3).abs() < 1e-14);
    }

    #[test]
    fn projective_action_examples() {
        assert!((proj_act(&Mat2::IDENTITY, ProjAngle::new(0.3)).theta() - 0.3).abs() < 1e-16);
        assert!((proj_act(&make_rotation(FRAC_PI_4), ProjAngle::new(0.0)).theta() - FRAC_PI_4).abs() < 1e-16);
        let t = proj_act(&make_diag(2.0).unwrap(), ProjAngle::new(FRAC_PI_4)).theta();
        assert!((t - 0.25f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_lambda_formula() {
        for &lam in &[1.5, 3.0, 50.0] {
            let d = make_diag(lam).unwrap();
            for k in 0..20 {
                let th = k as f64 * PI / 20.0;
                let (s, c) = th.sin_cos();
                let closed = lam * lam / (s * s + lam.powi(4) * c * c);
                let got = proj_deriv(&d, ProjAngle::new(th));
                assert!((got / closed - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn multiplicative_alignment() {
        let a = make_rotation(0.9) * make_diag(3.0).unwrap() * make_rotation(0.2);
        let fa = svd_frame(&a).unwrap();
        // choose B whose expanded input direction is A's expanded image
        let b = make_rotation(-0.5) * make_diag(5.0).unwrap() * make_rotation(-fa.image_u.theta());
        assert!(is_norm_multiplicative(&b, &a, 1e-12).unwrap());
        assert!(((b * a).norm() / (b.norm() * a.norm()) - 1.0).abs() < 1e-13);
        let c = make_rotation(0.3) * b;
        assert!(is_norm_multiplicative(&c, &a, 1e-12).unwrap());
        let d = b * make_rotation(0.3);
        assert!(!is_norm_multiplicative(&d, &a, 1e-12).unwrap());
    }
}

/// `s(Q·P) − s(P)` as a signed angle in `(−π/2, π/2]`, accurate relative to
/// its own size.
///
/// `p_unit` and `q_unit` are the two products scaled to unit norm and
/// `ratio = σ_min(P) / σ_max(P)` (for unimodular `P` with `‖P‖ = e^L` this is
/// `e^{-2L}`). Only the expanded image of `P` and its orthogonal complement
/// are pushed through `Q`, so there is no cancellation even when the shift
/// is far below the rounding level of the angles themselves.
pub fn contracted_shift(p_unit: &Mat2, ratio: f64, q_unit: &Mat2) -> Result<f64, Sl2Error> {
    let f = svd_frame(p_unit)?;
    let uh = f.u.unit();
    let b = p_unit.apply(uh);
    let nb = b[0].hypot(b[1]);
    let b = [b[0] / nb, b[1] / nb];
    // (ŝ, û) has orientation −1 when û = ŝ − π/2; P preserves orientation,
    // so â is b̂ turned by +π/2.
    let a = [-b[1], b[0]];
    let qa = q_unit.apply(a);
    let qb = q_unit.apply(b);
    let dot = qa[0] * qb[0] + qa[1] * qb[1];
    let na2 = qa[0] * qa[0] + qa[1] * qa[1];
    let nb2 = qb[0] * qb[0] + qb[1] * qb[1];
    let t = 0.5 * (-2.0 * ratio * dot).atan2(nb2 - ratio * ratio * na2);
    // v(t) = cos t ŝ + sin t û sits at angle s − t
    Ok(-t)
}

/// [`contracted_shift`] with the ratio given as `ln(σ_min/σ_max)`.
///
/// Returns `(sign, ln|shift|)`, so shifts far below the smallest positive
/// double are still reported. For tiny ratios the shift is linear in the
/// ratio and is assembled in the log domain.
pub fn contracted_shift_log(p_unit: &Mat2, log_ratio: f64, q_unit: &Mat2) -> Result<(f64, f64), Sl2Error> {
    if log_ratio > -60.0 {
        let t = contracted_shift(p_unit, log_ratio.exp(), q_unit)?;
        return Ok((if t < 0.0 { -1.0 } else { 1.0 }, t.abs().ln()));
    }
    let f = svd_frame(p_unit)?;
    let b = p_unit.apply(f.u.unit());
    let nb = b[0].hypot(b[1]);
    let b = [b[0] / nb, b[1] / nb];
    let a = [-b[1], b[0]];
    let qa = q_unit.apply(a);
    let qb = q_unit.apply(b);
    let dot = qa[0] * qb[0] + qa[1] * qb[1];
    let nb2 = qb[0] * qb[0] + qb[1] * qb[1];
    // −t = ratio·dot/|qb|² up to a relative O(ratio²)
    let c = dot / nb2;
    Ok((if c < 0.0 { -1.0 } else { 1.0 }, log_ratio + c.abs().ln()))
}
