use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use qpc_rotation::{CriticalGeometry, RotationNumber};

use crate::ConstructionError;

/// Regularity class of the constructed cocycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `C^l`: the critical profile is `sgn(d)|d|^{l+1}`.
    Finite { l: u32 },
    /// `C^∞`: the critical profile is `sgn(d)·exp(−1/|d|^a)`.
    Smooth { a: f64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Finite { l } => write!(f, "finite:{l}"),
            Mode::Smooth { a } => write!(f, "smooth:{a:?}"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConstructionError::InvalidParameter(format!("mode `{s}` (expected finite:L or smooth:A)"));
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "finite" => Ok(Mode::Finite { l: val.trim().parse().map_err(|_| bad())? }),
            "smooth" => Ok(Mode::Smooth { a: val.trim().parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }
}

/// Homotopy class of `x ↦ A(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `φ` is 2π-periodic.
    Homotopic,
    /// `φ(x) − x` is 2π-periodic.
    NonHomotopic,
}

impl Variant {
    pub fn winding(self) -> i32 {
        match self {
            Variant::Homotopic => 0,
            Variant::NonHomotopic => 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Homotopic => "hom",
            Variant::NonHomotopic => "nonhom",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "hom" | "homotopic" => Ok(Variant::Homotopic),
            "nonhom" | "non-homotopic" => Ok(Variant::NonHomotopic),
            _ => Err(ConstructionError::InvalidParameter(format!("variant `{s}` (expected hom or nonhom)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub mode: Mode,
    pub lambda: f64,
    /// Starting level `N`.
    pub big_n: usize,
    pub rot: RotationNumber,
    pub geometry: CriticalGeometry,
    /// Radius of the neighborhoods where `φ = φ_0`.
    pub delta0: f64,
    /// Offset at which the base profile reaches its plateau.
    pub delta1: f64,
    /// Plateau value `|φ|` away from the critical points.
    pub amplitude: f64,
    pub variant: Variant,
    /// Samples per 2π used to size verification grids.
    pub grid_size: usize,
    pub epsilon_desk: f64,
    pub tol_align: f64,
    /// Chebyshev nodes per half-interval for sampled corrections.
    pub cheb_nodes: usize,
    /// Upper bound on verification samples per sub-interval.
    pub max_samples: usize,
}

impl ConstructionParams {
    /// Golden rotation, `c1 = 1`, `λ = 50`, `l = 2`, `q_N = 13`.
    pub fn desk_finite() -> Self {
        Self::desk(Mode::Finite { l: 2 })
    }

    /// As [`Self::desk_finite`] with `a = 0.05`.
    pub fn desk_smooth() -> Self {
        Self::desk(Mode::Smooth { a: 0.05 })
    }

    /// Finite mode with `max |φ| = 0.3 < π/10`, `λ = 10⁵` and a wide plateau
    /// transition, for the reduction to Schrödinger form.
    pub fn desk_schrodinger() -> Self {
        ConstructionParams { lambda: 1e5, delta1: 0.6, amplitude: 0.3, ..Self::desk_finite() }
    }

    fn desk(mode: Mode) -> Self {
        let rot = RotationNumber::golden();
        let geometry = CriticalGeometry::new(1.0, &rot);
        let big_n = rot.level_with_q_at_least(13).expect("golden convergents");
        ConstructionParams {
            mode,
            lambda: 50.0,
            big_n,
            rot,
            geometry,
            delta0: 0.05,
            delta1: 0.15,
            amplitude: FRAC_PI_2,
            variant: Variant::Homotopic,
            grid_size: 1 << 22,
            epsilon_desk: 0.2,
            tol_align: 1e-6,
            cheb_nodes: 16,
            max_samples: 512,
        }
    }

    /// Rebuild `rot`/`geometry` for a new `ω`, `c1` and starting `q_N`.
    pub fn with_rotation(mut self, rot: RotationNumber, c1: f64, q_start: u64) -> Result<Self, ConstructionError> {
        self.big_n = rot
            .level_with_q_at_least(q_start)
            .ok_or_else(|| ConstructionError::InvalidParameter(format!("no convergent with q >= {q_start}")))?;
        self.geometry = CriticalGeometry::new(c1, &rot);
        self.rot = rot;
        Ok(self)
    }

    pub fn l(&self) -> Option<u32> {
        match self.mode {
            Mode::Finite { l } => Some(l),
            Mode::Smooth { .. } => None,
        }
    }

    pub fn q(&self, n: usize) -> u64 {
        self.geometry.q(n)
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        let bad = |m: String| Err(ConstructionError::InvalidParameter(m));
        if !(self.lambda > 1.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must exceed 1, got {}", self.lambda));
        }
        match self.mode {
            Mode::Finite { l } if l == 0 => return bad("l must be positive".into()),
            Mode::Smooth { a } if !(a > 0.0 && a < 0.1) => return bad(format!("a must lie in (0, 0.1), got {a}")),
            _ => {}
        }
        if !(self.delta0 > 0.0 && self.delta0 < FRAC_PI_4) {
            return bad(format!("delta0 must lie in (0, pi/4), got {}", self.delta0));
        }
        if !(self.delta1 > self.delta0 && self.delta1 < FRAC_PI_2) {
            return bad(format!("delta1 must lie in (delta0, pi/2), got {}", self.delta1));
        }
        if self.big_n + 2 > self.geometry.max_level() {
            return bad(format!("starting level {} exceeds the convergent table", self.big_n));
        }
        if self.geometry.radius(self.big_n, 1.0) >= self.delta0 {
            return bad(format!("I_N (radius {:e}) is not inside the delta0 neighborhood", self.geometry.radius(self.big_n, 1.0)));
        }
        let floor = crate::profile::critical_profile(self.mode, self.delta1);
        if !(self.amplitude > floor && self.amplitude <= FRAC_PI_2) {
            return bad(format!("amplitude must lie in ({floor:e}, pi/2], got {}", self.amplitude));
        }
        if self.variant == Variant::NonHomotopic && self.amplitude != FRAC_PI_2 {
            return bad("the non-homotopic variant needs amplitude = pi/2".into());
        }
        if !(self.epsilon_desk > 0.0 && self.epsilon_desk < 0.5) {
            return bad(format!("epsilon_desk must lie in (0, 0.5), got {}", self.epsilon_desk));
        }
        if !(self.tol_align > 0.0) {
            return bad("tol_align must be positive".into());
        }
        if self.cheb_nodes < 4 || self.max_samples < 8 {
            return bad("cheb_nodes >= 4 and max_samples >= 8 required".into());
        }
        Ok(())
    }

    /// Checks that `I_{N+levels}/10` gets at least 64 grid points.
    pub fn check_resolution(&self, levels: usize) -> Result<(), ConstructionError> {
        let top = self.big_n + levels.max(1) - 1;
        if top + 2 > self.geometry.max_level() {
            return Err(ConstructionError::InvalidParameter(format!("{levels} levels exceed the convergent table")));
        }
        let width = 2.0 * self.geometry.radius(top, 10.0);
        let pts = width / qpc_sl2::TWO_PI * self.grid_size as f64;
        if pts < 64.0 {
            return Err(ConstructionError::InvalidParameter(format!(
                "grid_size {} gives only {pts:.1} points on I_{top}/10",
                self.grid_size
            )));
        }
        Ok(())
    }

    /// Sample count for an interval of the given width.
    pub fn samples_for(&self, width: f64) -> usize {
        ((width / qpc_sl2::TWO_PI * self.grid_size as f64).ceil() as usize).clamp(16, self.max_samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_defaults_are_valid() {
        let p = ConstructionParams::desk_finite();
        assert_eq!(p.q(p.big_n), 13);
        p.validate().unwrap();
        p.check_resolution(3).unwrap();
        ConstructionParams::desk_smooth().validate().unwrap();
        ConstructionParams::desk_schrodinger().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = ConstructionParams::desk_finite();
        p.lambda = 0.5;
        assert!(p.validate().is_err());
        let mut p = ConstructionParams::desk_finite();
        p.variant = Variant::NonHomotopic;
        p.amplitude = 0.3;
        assert!(p.validate().is_err());
        let mut p = ConstructionParams::desk_finite();
        p.grid_size = 1 << 12;
        assert!(p.check_resolution(3).is_err());
    }

    #[test]
    fn mode_round_trips_through_text() {
        for m in [Mode::Finite { l: 3 }, Mode::Smooth { a: 0.05 }] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("cubic:2".parse::<Mode>().is_err());
    }
}
