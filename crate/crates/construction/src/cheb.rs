use std::f64::consts::PI;

/// Chebyshev series on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Lobatto nodes `cos(πk/(n−1))` mapped to `[a, b]`, in increasing order.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        let m = n - 1;
        (0..n)
            .map(|k| {
                let t = -(PI * k as f64 / m as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect()
    }

    /// Interpolant through values at [`Self::nodes`].
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len();
        let m = n - 1;
        // nodes were taken as −cos, so value k sits at cos(π(m−k)/m)
        let f = |j: usize| values[m - j];
        let coeffs = (0..n)
            .map(|k| {
                let mut s = 0.0;
                for j in 0..n {
                    let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                    s += w * f(j) * (PI * (j * k) as f64 / m as f64).cos();
                }
                let c = 2.0 * s / m as f64;
                if k == 0 || k == m {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        ChebSeries { a, b, coeffs }
    }

    pub fn fit(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let vals: Vec<f64> = Self::nodes(a, b, n).into_iter().map(f).collect();
        Self::from_values(a, b, &vals)
    }

    pub fn zero(a: f64, b: f64) -> Self {
        ChebSeries { a, b, coeffs: vec![0.0] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Series of the derivative in `x`.
    pub fn derivative(&self) -> ChebSeries {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebSeries::zero(self.a, self.b);
        }
        let mut d = vec![0.0; n];
        for k in (0..n - 1).rev() {
            d[k] = d.get(k + 2).copied().unwrap_or(0.0) + 2.0 * (k + 1) as f64 * self.coeffs[k + 1];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        ChebSeries { a: self.a, b: self.b, coeffs: d.into_iter().map(|c| c * scale).collect() }
    }

    /// Derivatives `0..=order` at `x`.
    pub fn derivs_at(&self, x: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        let mut s = self.clone();
        for _ in 0..=order {
            out.push(s.eval(x));
            s = s.derivative();
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}
