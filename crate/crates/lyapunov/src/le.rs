use qpc_sl2::{orbit_point, orbit_product, Cocycle, Direction, TWO_PI};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Grid,
    Orbit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// `m` points `2πj/m`.
    Grid(usize),
    /// `segments` consecutive length-K pieces of the orbit of `x0`.
    Orbit { x0: f64, segments: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LEEstimate {
    pub k: usize,
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub sample_count: usize,
}

impl LEEstimate {
    pub const CSV_HEADER: &'static str = "K,value_nats_per_step,stderr,method,samples";

    pub fn csv_row(&self) -> String {
        let m = match self.method {
            Method::Grid => "grid",
            Method::Orbit => "orbit",
        };
        format!("{},{:.12e},{:.6e},{},{}", self.k, self.value, self.stderr, m, self.sample_count)
    }

    /// Mean and standard error of per-sample values.
    pub fn from_samples(k: usize, samples: &[f64], method: Method) -> Self {
        let m = samples.len() as f64;
        // sequential sums keep the result independent of thread scheduling
        let mean = samples.iter().sum::<f64>() / m;
        let var = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        LEEstimate { k, value: mean, stderr: (var / m).sqrt(), method, sample_count: samples.len() }
    }
}

pub fn sample_points(sampling: &Sampling, k: usize, step: f64) -> Vec<f64> {
    match *sampling {
        Sampling::Grid(m) => (0..m).map(|j| TWO_PI * j as f64 / m as f64).collect(),
        Sampling::Orbit { x0, segments } => {
            (0..segments).map(|j| orbit_point(x0, step, (j * k) as i64)).collect()
        }
    }
}

/// `(1/K) log‖A^K(x)‖` for each point, in input order.
pub fn le_samples<C: Cocycle + ?Sized>(cocycle: &C, k: usize, points: &[f64]) -> Vec<f64> {
    points
        .par_iter()
        .map(|&x| orbit_product(cocycle, x, k, Direction::Forward, false).log_norm / k as f64)
        .collect()
}

pub fn finite_le<C: Cocycle + ?Sized>(cocycle: &C, k: usize, sampling: &Sampling) -> LEEstimate {
    let k = k.max(1);
    let pts = sample_points(sampling, k, cocycle.step());
    let method = match sampling {
        Sampling::Grid(_) => Method::Grid,
        Sampling::Orbit { .. } => Method::Orbit,
    };
    LEEstimate::from_samples(k, &le_samples(cocycle, k, &pts), method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpc_sl2::{cocycle_matrix, make_diag, make_rotation, FnCocycle};

    #[test]
    fn constant_diagonal() {
        let c = FnCocycle { f: |_x: f64| make_diag(7.0).unwrap(), step: 1.3 };
        let e = finite_le(&c, 100, &Sampling::Grid(100));
        assert!((e.value - 7f64.ln()).abs() < 1e-13);
        assert!(e.stderr < 1e-13);
    }

    #[test]
    fn rotations_have_zero_exponent() {
        let c = FnCocycle { f: |x: f64| make_rotation(x), step: 1.3 };
        let e = finite_le(&c, 100, &Sampling::Grid(128));
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn bounded_by_log_lambda() {
        let c = FnCocycle { f: |x: f64| cocycle_matrix(20.0, x.cos()).unwrap(), step: 3.883 };
        let e = finite_le(&c, 300, &Sampling::Orbit { x0: 0.2, segments: 100 });
        assert!(e.value <= 20f64.ln() + 1e-9 && e.value > 0.0);
        assert_eq!(e.method, Method::Orbit);
    }
}
