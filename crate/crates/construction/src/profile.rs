//! Analytic pieces: the degenerate critical profile `φ_0`, the base
//! function `φ`, and the bumps `f_n`.

use std::f64::consts::PI;

use qpc_rotation::CriticalGeometry;
use qpc_sl2::TWO_PI;

use crate::{ConstructionError, ConstructionParams, Mode, Variant};

/// `g(d) = sgn(d)|d|^{l+1}` or `sgn(d)·exp(−1/|d|^a)`.
pub fn critical_profile(mode: Mode, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let ad = d.abs();
    let v = match mode {
        Mode::Finite { l } => ad.powi(l as i32 + 1),
        Mode::Smooth { a } => (-ad.powf(-a)).exp(),
    };
    v.copysign(d)
}

/// `j`-th derivative of `sgn(d)|d|^m`, `m = l + 1`.
pub fn critical_profile_deriv(l: u32, d: f64, j: u32) -> f64 {
    let m = l + 1;
    if j > m {
        return 0.0;
    }
    let mut c = 1.0;
    for k in 0..j {
        c *= (m - k) as f64;
    }
    let mag = c * d.abs().powi((m - j) as i32);
    let sign = if d < 0.0 && (j + 1) % 2 == 1 { -1.0 } else { 1.0 };
    sign * mag
}

/// Sign multiplying `g(x − c_i)` in `φ_0` near `c_i`, modulo π.
fn branch_sign(variant: Variant, i: usize) -> f64 {
    match (variant, i) {
        (Variant::Homotopic, 1) => -1.0,
        _ => 1.0,
    }
}

/// `φ_0(x)`, taken modulo π in `(−π/2, π/2)`.
pub fn phi0(x: f64, params: &ConstructionParams) -> Result<f64, ConstructionError> {
    let (i, d) = params.geometry.nearest(x);
    if d.abs() > params.delta0 {
        return Err(ConstructionError::OutOfDomain { x, delta0: params.delta0 });
    }
    Ok(phi0_at(params.mode, params.variant, i, d))
}

/// `φ_0` at offset `d` from `c_i`, without the domain check.
pub fn phi0_at(mode: Mode, variant: Variant, i: usize, d: f64) -> f64 {
    branch_sign(variant, i) * critical_profile(mode, d)
}

/// `j`-th derivative of `φ_0` at offset `d` from `c_i` (finite mode).
pub fn phi0_deriv_at(l: u32, variant: Variant, i: usize, d: f64, j: u32) -> f64 {
    branch_sign(variant, i) * critical_profile_deriv(l, d, j)
}

/// `ψ(t) = exp(−1/t)` for `t > 0`, else 0.
fn psi_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = psi_exp(t);
    let b = psi_exp(1.0 - t);
    a / (a + b)
}

/// The radial profile `P(d)`, `d ∈ [0, π/2]`: `g(d)` below `δ0`, the
/// plateau `amplitude` above `δ1`, and a smooth blend between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseProfile {
    pub mode: Mode,
    pub variant: Variant,
    pub c1: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub amplitude: f64,
}

impl BaseProfile {
    pub fn from_params(p: &ConstructionParams) -> Self {
        BaseProfile {
            mode: p.mode,
            variant: p.variant,
            c1: p.geometry.c1,
            delta0: p.delta0,
            delta1: p.delta1,
            amplitude: p.amplitude,
        }
    }

    pub fn radial(&self, d: f64) -> f64 {
        let w = smooth_step((d - self.delta0) / (self.delta1 - self.delta0));
        critical_profile(self.mode, d) * (1.0 - w) + self.amplitude * w
    }

    /// `φ(x)`; for the non-homotopic variant this is the lift with
    /// `φ(c1) = 0`, increasing by 2π per turn.
    pub fn eval(&self, x: f64) -> f64 {
        let y = (x - self.c1).rem_euclid(TWO_PI);
        match self.variant {
            Variant::Homotopic => {
                if y <= 0.5 * PI {
                    self.radial(y)
                } else if y <= PI {
                    self.radial(PI - y)
                } else if y <= 1.5 * PI {
                    -self.radial(y - PI)
                } else {
                    -self.radial(TWO_PI - y)
                }
            }
            Variant::NonHomotopic => {
                let half = |u: f64| if u <= 0.5 * PI { self.radial(u) } else { PI - self.radial(PI - u) };
                if y < PI {
                    half(y)
                } else {
                    PI + half(y - PI)
                }
            }
        }
    }

    /// Smallest `min_k |φ(x) − kπ|` over `samples` points outside the
    /// `δ0`-neighborhoods of both critical points.
    pub fn min_distance_to_k_pi(&self, geom: &CriticalGeometry, samples: usize) -> f64 {
        (0..samples)
            .map(|k| TWO_PI * k as f64 / samples as f64)
            .filter(|&x| geom.dist_to_critical(x) > self.delta0)
            .map(|x| {
                let v = self.eval(x).rem_euclid(PI);
                v.min(PI - v)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `w_1(t)`: 1 on `|t| ≤ 1`, 0 on `|t| ≥ 2`, built from `exp(−1/t²)`.
pub fn bump_profile(t: f64) -> f64 {
    let psi = |u: f64| if u > 0.0 { (-1.0 / (u * u)).exp() } else { 0.0 };
    let u = -t.abs();
    let a = psi(u + 2.0);
    if a == 0.0 {
        return 0.0;
    }
    a / (a + psi(-u - 1.0))
}

/// `f_n(c_i + d) = w_1(10 q_n² d)`.
pub fn smooth_bump(n: usize, geom: &CriticalGeometry, d: f64) -> f64 {
    let q = geom.q(n) as f64;
    bump_profile(10.0 * q * q * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        let m = Mode::Finite { l: 2 };
        assert!((critical_profile(m, 0.1) - 1e-3).abs() < 1e-18);
        assert!((critical_profile(m, -0.1) + 1e-3).abs() < 1e-18);
        assert_eq!(critical_profile(m, 0.0), 0.0);
        let s = Mode::Smooth { a: 0.05 };
        assert!((critical_profile(s, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn profile_derivatives_match_differences() {
        for l in 1..4 {
            for &d in &[-0.3, -0.05, 0.02, 0.4] {
                for j in 0..=l {
                    let h = 1e-5;
                    let fd = (critical_profile_deriv(l, d + h, j) - critical_profile_deriv(l, d - h, j)) / (2.0 * h);
                    let exact = critical_profile_deriv(l, d, j + 1);
                    assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "l={l} d={d} j={j}");
                }
            }
        }
    }

    #[test]
    fn step_and_bump_shape() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.1), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(bump_profile(0.0), 1.0);
        assert_eq!(bump_profile(1.0), 1.0);
        assert_eq!(bump_profile(-2.0), 0.0);
        assert_eq!(bump_profile(2.5), 0.0);
        assert!(bump_profile(1.5) > 0.0 && bump_profile(1.5) < 1.0);
    }
}
