use qpc_sl2::{orbit_point, orbit_product, wrap_half, Cocycle, Direction, Sl2Error};

/// Sup norms of `s − φ` on `I` and of `s'` on `T^n I`, with their
/// finite-difference derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub sup_s_minus_phi: f64,
    pub sup_ds_minus_phi: f64,
    pub sup_s_prime: f64,
    pub sup_ds_prime: f64,
}

impl FlatnessReport {
    /// `|s − φ|_{C¹}` as the larger of the value and derivative sups.
    pub fn c1_s_minus_phi(&self) -> f64 {
        self.sup_s_minus_phi.max(self.sup_ds_minus_phi)
    }

    pub fn c1_s_prime(&self) -> f64 {
        self.sup_s_prime.max(self.sup_ds_prime)
    }
}

/// Samples `s(x) = s(A^n(x))` against `φ(x)` for `x ∈ [a, b]`, and
/// `s'(y) = s(A^{−n}(y))` for `y = T^n x`. Derivatives are centered
/// differences with step `(b − a)/2048`.
pub fn contraction_curve_flatness<C, F>(
    cocycle: &C,
    phi: F,
    a: f64,
    b: f64,
    n: usize,
    samples: usize,
) -> Result<FlatnessReport, Sl2Error>
where
    C: Cocycle + ?Sized,
    F: Fn(f64) -> f64,
{
    let h = (b - a) / 2048.0;
    let step = cocycle.step();
    let s_minus_phi = |x: f64| -> Result<f64, Sl2Error> {
        let f = orbit_product(cocycle, x, n, Direction::Forward, false).frame()?;
        Ok(wrap_half(f.s.theta() - phi(x)))
    };
    let s_prime = |x: f64| -> Result<f64, Sl2Error> {
        let y = orbit_point(x, step, n as i64);
        let f = orbit_product(cocycle, y, n, Direction::Backward, false).frame()?;
        Ok(wrap_half(f.s.theta()))
    };
    let mut rep = FlatnessReport { sup_s_minus_phi: 0.0, sup_ds_minus_phi: 0.0, sup_s_prime: 0.0, sup_ds_prime: 0.0 };
    let samples = samples.max(2);
    for k in 0..samples {
        let x = a + (b - a) * k as f64 / (samples - 1) as f64;
        let v = s_minus_phi(x)?;
        let dv = wrap_half(s_minus_phi(x + h)? - s_minus_phi(x - h)?) / (2.0 * h);
        let w = s_prime(x)?;
        let dw = wrap_half(s_prime(x + h)? - s_prime(x - h)?) / (2.0 * h);
        rep.sup_s_minus_phi = rep.sup_s_minus_phi.max(v.abs());
        rep.sup_ds_minus_phi = rep.sup_ds_minus_phi.max(dv.abs());
        rep.sup_s_prime = rep.sup_s_prime.max(w.abs());
        rep.sup_ds_prime = rep.sup_ds_prime.max(dw.abs());
    }
    Ok(rep)
}
