use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Result, SchrodingerError};

/// Smallest admissible `|e^{ik·shift} − 1|`.
pub const SMALL_DIVISOR: f64 = 1e-12;

/// Real trigonometric polynomial `Σ_{|k|≤m} c_k e^{ikx}` with `c_{−k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    /// `c_0, …, c_m`.
    pub coeffs: Vec<Complex64>,
}

impl FourierSeries {
    /// Coefficients `0..=modes` of equispaced samples on `[0, 2π)`.
    pub fn from_samples(samples: &[f64], modes: usize) -> Result<Self> {
        let m = samples.len();
        if m == 0 || 2 * modes >= m {
            return Err(SchrodingerError::InvalidInput(format!("{modes} modes need more than {m} samples")));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let inv = 1.0 / m as f64;
        Ok(FourierSeries { coeffs: buf[..=modes].iter().map(|c| c * inv).collect() })
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs.first().map_or(0.0, |c| c.re)
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Horner in e^{ix}; the rotation has modulus one, so this is stable
        let z = Complex64::from_polar(1.0, x);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs[1..].iter().rev() {
            acc = (acc + c) * z;
        }
        self.mean() + 2.0 * acc.re
    }
}

/// Solution `d` of `d(x + shift) − d(x) = f(x) − [f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohomology {
    pub d: FourierSeries,
    /// `[f]`, the mean of the samples.
    pub f_mean: f64,
    /// `sup_j |d(x_j + shift) − d(x_j) − (f_j − [f])|`.
    pub residual: f64,
    pub shift: f64,
    /// Smallest divisor met within the mode range.
    pub min_divisor: f64,
}

/// Fourier solution with `d̂_k = f̂_k / (e^{ik·shift} − 1)`, `d̂_0 = 0`, for
/// `f` sampled on an equispaced grid of `[0, 2π)`.
pub fn solve_cohomological(f: &[f64], shift: f64, modes: usize) -> Result<Cohomology> {
    let fs = FourierSeries::from_samples(f, modes)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); modes + 1];
    let mut min_divisor = f64::INFINITY;
    for k in 1..=modes {
        let div = Complex64::from_polar(1.0, k as f64 * shift) - 1.0;
        let size = div.norm();
        if size < SMALL_DIVISOR {
            return Err(SchrodingerError::SmallDivisor { k, value: size });
        }
        min_divisor = min_divisor.min(size);
        coeffs[k] = fs.coeffs[k] / div;
    }
    let d = FourierSeries { coeffs };
    let f_mean = fs.mean();
    let m = f.len();
    let residual = f
        .iter()
        .enumerate()
        .map(|(j, fj)| {
            let x = std::f64::consts::TAU * j as f64 / m as f64;
            (d.eval(x + shift) - d.eval(x) - (fj - f_mean)).abs()
        })
        .fold(0.0, f64::max);
    Ok(Cohomology { d, f_mean, residual, shift, min_divisor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(m: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..m).map(|j| f(TAU * j as f64 / m as f64)).collect()
    }

    #[test]
    fn series_reproduces_a_trig_polynomial() {
        let g = |x: f64| 0.5 + (2.0 * x).cos() - 0.25 * (5.0 * x).sin();
        let s = FourierSeries::from_samples(&grid(64, g), 8).unwrap();
        for k in 0..40 {
            let x = 0.37 * k as f64;
            assert!((s.eval(x) - g(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_right_hand_side_gives_zero() {
        let sol = solve_cohomological(&vec![2.5; 128], 1.3, 16).unwrap();
        assert!((sol.f_mean - 2.5).abs() < 1e-15);
        assert!(sol.d.coeffs.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn single_mode_matches_closed_form() {
        let beta = 2.0 * TAU * 0.618_033_988_749_894_8;
        let sol = solve_cohomological(&grid(256, f64::cos), beta, 32).unwrap();
        let div = Complex64::from_polar(1.0, beta) - 1.0;
        for k in 0..50 {
            let x = 0.21 * k as f64;
            let want = (Complex64::from_polar(1.0, x) / div).re;
            assert!((sol.d.eval(x) - want).abs() < 1e-13);
        }
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn rational_shift_hits_a_small_divisor() {
        let err = solve_cohomological(&grid(64, f64::sin), TAU / 4.0, 8).unwrap_err();
        assert!(matches!(err, SchrodingerError::SmallDivisor { k: 4, .. }));
    }

    #[test]
    fn too_many_modes_are_rejected() {
        assert!(solve_cohomological(&[0.0; 16], 1.0, 8).is_err());
    }
}
