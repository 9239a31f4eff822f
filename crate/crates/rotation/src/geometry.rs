use std::f64::consts::PI;

use qpc_sl2::TWO_PI;

use crate::RotationNumber;

/// Distance on the circle `R / 2πZ`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Critical points `c1`, `c2 = c1 + π` and the intervals
/// `I_n / C = ∪_i [c_i ± 1/(C q_n²)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalGeometry {
    pub c1: f64,
    q: Vec<u64>,
}

impl CriticalGeometry {
    pub fn new(c1: f64, rot: &RotationNumber) -> Self {
        let c1 = c1.rem_euclid(PI);
        CriticalGeometry { c1, q: rot.convergents.iter().map(|c| c.1).collect() }
    }

    pub fn c2(&self) -> f64 {
        self.c1 + PI
    }

    pub fn centers(&self) -> [f64; 2] {
        [self.c1, self.c1 + PI]
    }

    pub fn q(&self, n: usize) -> u64 {
        self.q[n]
    }

    pub fn max_level(&self) -> usize {
        self.q.len() - 1
    }

    /// Half-width `1/(C q_n²)`.
    pub fn radius(&self, n: usize, divisor: f64) -> f64 {
        let q = self.q[n] as f64;
        1.0 / (divisor * q * q)
    }

    /// Offset `x − c_i` in `[−π, π)`.
    pub fn offset(&self, x: f64, i: usize) -> f64 {
        let c = self.centers()[i];
        (x - c + PI).rem_euclid(TWO_PI) - PI
    }

    /// Offset from the nearer critical point, with its index.
    pub fn nearest(&self, x: f64) -> (usize, f64) {
        let d0 = self.offset(x, 0);
        let d1 = self.offset(x, 1);
        if d0.abs() <= d1.abs() {
            (0, d0)
        } else {
            (1, d1)
        }
    }

    pub fn dist_to_critical(&self, x: f64) -> f64 {
        self.nearest(x).1.abs()
    }

    /// Index of the component of `I_n / C` containing `x`.
    pub fn component(&self, x: f64, n: usize, divisor: f64) -> Option<usize> {
        let (i, d) = self.nearest(x);
        (d.abs() <= self.radius(n, divisor)).then_some(i)
    }

    pub fn contains(&self, x: f64, n: usize, divisor: f64) -> bool {
        self.component(x, n, divisor).is_some()
    }

    /// Evenly spaced points covering component `i` of `I_n / C`, endpoints
    /// included, mapped into `[0, 2π)`.
    pub fn grid(&self, n: usize, divisor: f64, i: usize, count: usize) -> Vec<f64> {
        let r = self.radius(n, divisor);
        let c = self.centers()[i];
        let count = count.max(2);
        (0..count)
            .map(|k| (c - r + 2.0 * r * k as f64 / (count - 1) as f64).rem_euclid(TWO_PI))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nesting_and_widths() {
        let g = CriticalGeometry::new(1.0, &RotationNumber::golden());
        assert_eq!(g.c2() - g.c1, PI);
        for n in 2..12 {
            assert!(g.radius(n + 1, 1.0) < g.radius(n, 1.0));
            let q = g.q(n) as f64;
            assert!((2.0 * g.radius(n, 1.0) - 2.0 / (q * q)).abs() < 1e-18);
        }
        assert_eq!(g.component(1.0 + 0.5 / 169.0, 6, 1.0), Some(0));
        assert_eq!(g.component(1.0 + PI - 0.9 / 169.0, 6, 1.0), Some(1));
        assert_eq!(g.component(1.0 + 1.1 / 169.0, 6, 1.0), None);
        assert_eq!(g.component(1.0 + 0.5 / 169.0, 6, 10.0), None);
    }

    #[test]
    fn wraps_around_zero() {
        let g = CriticalGeometry { c1: 0.0, q: vec![1, 1, 2, 3, 5] };
        assert!(g.contains(TWO_PI - 0.01, 4, 1.0));
        assert!((g.offset(TWO_PI - 0.01, 0) + 0.01).abs() < 1e-15);
        assert!((circ_dist(0.1, TWO_PI - 0.1) - 0.2).abs() < 1e-15);
    }
}
