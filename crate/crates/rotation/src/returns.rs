use std::collections::BTreeSet;

use qpc_sl2::{orbit_point, wrap_half, Direction};
use rayon::prelude::*;

use crate::{CriticalGeometry, RotationError, RotationNumber};

/// Return-time summary for one level.
///
/// `ratio` is `r_plus_min / r_hat_max`, where `r_hat_max` is the largest
/// return time from `I_n/10` back to `I_n/10`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnStats {
    pub level: usize,
    pub q_n: u64,
    pub r_plus_min: u64,
    pub r_plus_max: u64,
    pub r_minus_min: u64,
    pub r_minus_max: u64,
    pub r_hat_max: u64,
    pub ratio: f64,
    pub distinct_forward: Vec<u64>,
}

impl ReturnStats {
    pub const CSV_HEADER: &'static str = "n,q_n,r_plus_min,r_plus_max,r_minus_min,r_minus_max,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.12e}",
            self.level, self.q_n, self.r_plus_min, self.r_plus_max, self.r_minus_min, self.r_minus_max, self.ratio
        )
    }
}

/// Generous cap on return times to `I_n / C`.
///
/// Returns to a union of two antipodal arcs of half-width `ρ` average
/// `π / (2ρ) ≈ 1.6 C q_n²` steps, so `q_{n+2}` is far too small a cap.
pub fn default_cap(geom: &CriticalGeometry, n: usize, divisor: f64) -> u64 {
    (16.0 * divisor * (geom.q(n) as f64).powi(2)).ceil() as u64 + 64
}

fn signed(dir: Direction, j: u64) -> i64 {
    match dir {
        Direction::Forward => j as i64,
        Direction::Backward => -(j as i64),
    }
}

/// First `j ≥ 1` with `T^{±j} x ∈ I_n / C`, by direct iteration.
pub fn first_return_time(
    rot: &RotationNumber,
    geom: &CriticalGeometry,
    x: f64,
    n: usize,
    divisor: f64,
    dir: Direction,
    cap: u64,
) -> Result<u64, RotationError> {
    let step = rot.step();
    (1..=cap)
        .find(|&j| geom.contains(orbit_point(x, step, signed(dir, j)), n, divisor))
        .ok_or(RotationError::CapExceeded { level: n, cap })
}

/// Fast return times to `I_n / C`.
///
/// Since `c2 = c1 + π`, membership in `I_n` only depends on the position
/// modulo π, where `I_n` becomes a single arc of half-width `ρ`. A return at
/// time `j` therefore needs a displacement `|jβ mod π| ≤ 2ρ`; those `j` are
/// listed once and each point scans only them.
pub struct ReturnScanner {
    pub level: usize,
    pub divisor: f64,
    pub cap: u64,
    c1: f64,
    rho: f64,
    forward: Vec<(u64, f64)>,
    backward: Vec<(u64, f64)>,
}

impl ReturnScanner {
    pub fn new(rot: &RotationNumber, geom: &CriticalGeometry, n: usize, divisor: f64, cap: u64) -> Self {
        let step = rot.step();
        let rho = geom.radius(n, divisor);
        let build = |dir| {
            (1..=cap)
                .filter_map(|j| {
                    let d = wrap_half(orbit_point(0.0, step, signed(dir, j)));
                    (d.abs() <= 2.0 * rho + 1e-15).then_some((j, d))
                })
                .collect::<Vec<_>>()
        };
        ReturnScanner {
            level: n,
            divisor,
            cap,
            c1: geom.c1,
            rho,
            forward: build(Direction::Forward),
            backward: build(Direction::Backward),
        }
    }

    pub fn return_time(&self, x: f64, dir: Direction) -> Result<u64, RotationError> {
        let u = wrap_half(x - self.c1);
        let list = match dir {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        };
        list.iter()
            .find(|&&(_, d)| wrap_half(u + d).abs() <= self.rho)
            .map(|&(j, _)| j)
            .ok_or(RotationError::CapExceeded { level: self.level, cap: self.cap })
    }
}

/// `min_{x ∈ I_n/C} r(x)`: the first `j` whose displacement modulo π is
/// within `2ρ`, which is exactly when some point of the arc returns at `j`.
pub fn min_return_time(
    rot: &RotationNumber,
    geom: &CriticalGeometry,
    n: usize,
    divisor: f64,
    dir: Direction,
    cap: u64,
) -> Result<u64, RotationError> {
    let step = rot.step();
    let rho = geom.radius(n, divisor);
    (1..=cap)
        .find(|&j| wrap_half(orbit_point(0.0, step, signed(dir, j))).abs() <= 2.0 * rho)
        .ok_or(RotationError::CapExceeded { level: n, cap })
}

/// Return times of `grid` evenly spaced points in each component of `I_n/C`.
pub fn return_times_on_grid(
    rot: &RotationNumber,
    geom: &CriticalGeometry,
    n: usize,
    divisor: f64,
    dir: Direction,
    grid: usize,
) -> Result<Vec<u64>, RotationError> {
    let scanner = ReturnScanner::new(rot, geom, n, divisor, default_cap(geom, n, divisor));
    let pts: Vec<f64> = (0..2).flat_map(|i| geom.grid(n, divisor, i, grid)).collect();
    pts.par_iter().map(|&x| scanner.return_time(x, dir)).collect()
}

pub fn return_stats(
    rot: &RotationNumber,
    geom: &CriticalGeometry,
    n: usize,
    grid: usize,
) -> Result<ReturnStats, RotationError> {
    let grid = grid.max(1000);
    let fwd = return_times_on_grid(rot, geom, n, 1.0, Direction::Forward, grid)?;
    let bwd = return_times_on_grid(rot, geom, n, 1.0, Direction::Backward, grid)?;
    let hat = return_times_on_grid(rot, geom, n, 10.0, Direction::Forward, grid)?;
    let r_plus_min = *fwd.iter().min().unwrap();
    let r_hat_max = *hat.iter().max().unwrap();
    Ok(ReturnStats {
        level: n,
        q_n: geom.q(n),
        r_plus_min,
        r_plus_max: *fwd.iter().max().unwrap(),
        r_minus_min: *bwd.iter().min().unwrap(),
        r_minus_max: *bwd.iter().max().unwrap(),
        r_hat_max,
        ratio: r_plus_min as f64 / r_hat_max as f64,
        distinct_forward: fwd.into_iter().collect::<BTreeSet<_>>().into_iter().collect(),
    })
}

/// Both clauses of the nonresonance condition between levels `big_n` and `n`:
/// `dist(T^i x, C_0) > 1/q_N²` for `i < q_N`, and `> 1/q_k²` for
/// `q_{k−1} ≤ i < q_k`, `N < k ≤ n`.
pub fn is_nonresonant(rot: &RotationNumber, geom: &CriticalGeometry, x: f64, big_n: usize, n: usize) -> bool {
    let step = rot.step();
    let far = |i: u64, k: usize| geom.dist_to_critical(orbit_point(x, step, i as i64)) > geom.radius(k, 1.0);
    if !(0..geom.q(big_n)).all(|i| far(i, big_n)) {
        return false;
    }
    ((big_n + 1)..=n).all(|k| (geom.q(k - 1)..geom.q(k)).all(|i| far(i, k)))
}

/// Fraction of `samples` equispaced points that are nonresonant, with the
/// binomial standard error `sqrt(p(1−p)/samples)`.
pub fn nonresonant_fraction(
    rot: &RotationNumber,
    geom: &CriticalGeometry,
    big_n: usize,
    n: usize,
    samples: usize,
) -> (f64, f64) {
    let h = qpc_sl2::TWO_PI / samples as f64;
    let good = (0..samples)
        .into_par_iter()
        .filter(|&k| is_nonresonant(rot, geom, (k as f64 + 0.5) * h, big_n, n))
        .count();
    let p = good as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}
