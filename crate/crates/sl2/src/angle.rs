use std::f64::consts::{FRAC_PI_2, PI};

/// A line through the origin, stored as its angle in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ProjAngle(f64);

impl ProjAngle {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(PI);
        // rem_euclid can round up to exactly π for tiny negative input
        if t >= PI {
            t = 0.0;
        }
        ProjAngle(t)
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    /// Unit vector spanning the line.
    pub fn unit(self) -> [f64; 2] {
        let (s, c) = self.0.sin_cos();
        [c, s]
    }

    pub fn perp(self) -> Self {
        ProjAngle::new(self.0 + FRAC_PI_2)
    }

    pub fn rotate(self, by: f64) -> Self {
        ProjAngle::new(self.0 + by)
    }

    /// Signed difference `self - other`, folded into `[-π/2, π/2)`.
    pub fn diff(self, other: ProjAngle) -> f64 {
        wrap_half(self.0 - other.0)
    }

    pub fn dist(self, other: ProjAngle) -> f64 {
        proj_dist(self.0, other.0)
    }
}

/// Folds an angle difference into `[-π/2, π/2)`.
pub fn wrap_half(d: f64) -> f64 {
    let r = (d + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if r >= FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Distance on RP¹: `min(|Δ|, π − |Δ|)`.
pub fn proj_dist(a: f64, b: f64) -> f64 {
    wrap_half(a - b).abs()
}
