use qpc_rotation::{default_cap, min_return_time};
use qpc_sl2::{contracted_shift_log, orbit_point, orbit_product, svd_frame, wrap_half, Cocycle, Direction};

use crate::phi::{PhiCocycle, PhiFunction};
use crate::{ConstructionError, ConstructionParams};

/// Minimal forward/backward return times to `I_n`; level `N − 1` uses the
/// single-step convention `(1, 1)`.
pub fn level_returns(params: &ConstructionParams, n: usize) -> Result<(u64, u64), ConstructionError> {
    if n < params.big_n {
        return Ok((1, 1));
    }
    let g = &params.geometry;
    let cap = default_cap(g, n, 1.0);
    let f = min_return_time(&params.rot, g, n, 1.0, Direction::Forward, cap)?;
    let b = min_return_time(&params.rot, g, n, 1.0, Direction::Backward, cap)?;
    Ok((f, b))
}

/// Direction fields at one point and the correction `e_n` that restores
/// the previous alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub x: f64,
    /// `s(A^{r⁺}(x))` for the longer return time.
    pub s_bar: f64,
    /// `s(A^{−r⁻}(x))`.
    pub s_bar_prime: f64,
    /// `(s − s')_{short} − (s̄ − s̄')`.
    pub e: f64,
    /// `ln |e|`, finite even when `e` underflows.
    pub log_abs_e: f64,
}

/// Field data for the cocycle `Λ R_{π/2−φ}` with short lengths `short`
/// and long lengths `long` (forward, backward).
///
/// The long products are split as `Q·P` with `P` the short product, so
/// the correction is the difference of two contracted shifts and is
/// resolved far below the rounding level of the angles.
pub fn field_point(
    phi: &PhiFunction,
    params: &ConstructionParams,
    x: f64,
    short: (u64, u64),
    long: (u64, u64),
) -> Result<FieldPoint, ConstructionError> {
    let c = PhiCocycle { phi, lambda: params.lambda, step: params.rot.step() };
    let step = c.step();
    let fwd = |len: u64| -> Result<(f64, f64, f64), ConstructionError> {
        let p = orbit_product(&c, x, short.0 as usize, Direction::Forward, false);
        let y = orbit_point(x, step, short.0 as i64);
        let q = orbit_product(&c, y, (len - short.0) as usize, Direction::Forward, false);
        let (sg, lt) = contracted_shift_log(&p.unit, -2.0 * p.log_norm, &q.unit)?;
        let full = svd_frame(&(q.unit * p.unit))?;
        Ok((full.s.theta(), sg, lt))
    };
    let bwd = |len: u64| -> Result<(f64, f64, f64), ConstructionError> {
        let p = orbit_product(&c, x, short.1 as usize, Direction::Backward, false);
        let y = orbit_point(x, step, -(short.1 as i64));
        let q = orbit_product(&c, y, (len - short.1) as usize, Direction::Backward, false);
        let (sg, lt) = contracted_shift_log(&p.unit, -2.0 * p.log_norm, &q.unit)?;
        let full = svd_frame(&(q.unit * p.unit))?;
        Ok((full.s.theta(), sg, lt))
    };
    let (s_bar, sf, lf) = fwd(long.0)?;
    let (s_bar_prime, sb, lb) = bwd(long.1)?;
    // e = −t_f + t_b
    let lmax = lf.max(lb);
    if lmax == f64::NEG_INFINITY {
        return Ok(FieldPoint { x, s_bar, s_bar_prime, e: 0.0, log_abs_e: lmax });
    }
    let v = -sf * (lf - lmax).exp() + sb * (lb - lmax).exp();
    let log_abs_e = if v == 0.0 { f64::NEG_INFINITY } else { lmax + v.abs().ln() };
    Ok(FieldPoint { x, s_bar, s_bar_prime, e: v * lmax.exp(), log_abs_e })
}

/// `s(A^{r⁺}(x)) − s(A^{−r⁻}(x))` modulo π.
pub fn field_difference(
    phi: &PhiFunction,
    params: &ConstructionParams,
    x: f64,
    lens: (u64, u64),
) -> Result<(f64, f64), ConstructionError> {
    let c = PhiCocycle { phi, lambda: params.lambda, step: params.rot.step() };
    let f = orbit_product(&c, x, lens.0 as usize, Direction::Forward, false).frame()?;
    let b = orbit_product(&c, x, lens.1 as usize, Direction::Backward, false).frame()?;
    Ok((f.s.theta(), b.s.theta()))
}

/// Reorders sampled RP¹ values into a continuous branch: the first is
/// kept in `[0, π)`, each next one is moved within π/2 of its predecessor.
pub fn continuous_branch(values: &mut [f64]) {
    for i in 1..values.len() {
        let prev = values[i - 1];
        values[i] = prev + wrap_half(values[i] - prev);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BaseProfile;
    use std::f64::consts::PI;

    #[test]
    fn branch_is_continuous() {
        let mut v = vec![3.1, 0.01, 0.05, 3.13, 0.02];
        continuous_branch(&mut v);
        for w in v.windows(2) {
            assert!((w[1] - w[0]).abs() < PI / 2.0);
        }
        assert!((v[1] - (0.01 + PI)).abs() < 1e-12);
    }

    #[test]
    fn single_step_fields_recover_phi() {
        let p = ConstructionParams::desk_finite();
        let phi = PhiFunction::new(BaseProfile::from_params(&p), p.geometry.clone());
        for &x in &[0.3, 1.0 + 1e-3, 2.5, 4.0] {
            let (s, sp) = field_difference(&phi, &p, x, (1, 1)).unwrap();
            assert!(wrap_half(s - sp - phi.eval(x)).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn correction_matches_direct_difference_when_large() {
        // a weak cocycle where e is well above rounding
        let mut p = ConstructionParams::desk_finite();
        p.lambda = 3.0;
        p.amplitude = 0.3;
        let phi = PhiFunction::new(BaseProfile::from_params(&p), p.geometry.clone());
        let x = p.geometry.c1 + 2e-4;
        let fp = field_point(&phi, &p, x, (1, 1), (5, 4)).unwrap();
        let direct = wrap_half(phi.eval(x) - wrap_half(fp.s_bar - fp.s_bar_prime));
        assert!((fp.e - direct).abs() < 1e-12, "{} {}", fp.e, direct);
        assert!((fp.log_abs_e - fp.e.abs().ln()).abs() < 1e-9);
    }
}
