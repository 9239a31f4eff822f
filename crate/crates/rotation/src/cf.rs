use crate::RotationError;

const RATIONAL_EPS: f64 = 1e-10;

/// Frequency with its continued-fraction data.
///
/// Indices follow `q_0 = 1`, `q_k = a_k q_{k-1} + q_{k-2}`, so for the
/// golden mean `q = 1, 1, 2, 3, 5, 8, 13, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationNumber {
    pub omega: f64,
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<(u64, u64)>,
}

impl RotationNumber {
    pub fn q(&self, k: usize) -> u64 {
        self.convergents[k].1
    }

    pub fn depth(&self) -> usize {
        self.convergents.len()
    }

    /// Rotation angle per step, `2πω`.
    pub fn step(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.omega
    }

    /// Smallest index with `q_k >= target`.
    pub fn level_with_q_at_least(&self, target: u64) -> Option<usize> {
        self.convergents.iter().position(|&(_, q)| q >= target)
    }

    pub fn golden() -> Self {
        cf_expand((5f64.sqrt() - 1.0) / 2.0, 36).expect("golden mean is irrational")
    }
}

pub fn cf_expand(omega: f64, depth: usize) -> Result<RotationNumber, RotationError> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(RotationError::InvalidParameter(format!("omega must lie in (0,1), got {omega}")));
    }
    let depth = depth.clamp(1, 40);
    let mut quotients = Vec::with_capacity(depth);
    let mut convergents = vec![(0u64, 1u64)];
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    let mut x = omega;
    for k in 1..depth {
        if x < RATIONAL_EPS {
            return Err(RotationError::RationalInput(omega, k));
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        x = inv - a;
        let a = a as u64;
        let (pn, qn) = (a * p + p_prev, a * q + q_prev);
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
        quotients.push(a);
        convergents.push((p, q));
        if x < RATIONAL_EPS {
            return Err(RotationError::RationalInput(omega, k));
        }
    }
    Ok(RotationNumber { omega, partial_quotients: quotients, convergents })
}

/// `q_{k+1} < M q_k` for every computed `k` with `q_k >= 2`.
///
/// The leading pair of the expansion is skipped: for the golden mean
/// `q_1 = 1, q_2 = 2` would fail the strict inequality at `M = 2` even though
/// the ratios converge to 1.618….
pub fn check_bounded_type(rot: &RotationNumber, m: f64) -> bool {
    rot.convergents
        .windows(2)
        .filter(|w| w[0].1 >= 2)
        .all(|w| (w[1].1 as f64) < m * w[0].1 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_is_fibonacci() {
        let r = RotationNumber::golden();
        assert!(r.partial_quotients.iter().all(|&a| a == 1));
        let (mut a, mut b) = (1u64, 1u64);
        for k in 0..=30 {
            assert_eq!(r.q(k), a, "k = {k}");
            let c = a + b;
            a = b;
            b = c;
        }
        assert_eq!(r.q(6), 13);
    }

    #[test]
    fn silver_is_pell() {
        let r = cf_expand(2f64.sqrt() - 1.0, 20).unwrap();
        assert!(r.partial_quotients.iter().all(|&a| a == 2));
        let qs: Vec<u64> = (0..7).map(|k| r.q(k)).collect();
        assert_eq!(qs, vec![1, 2, 5, 12, 29, 70, 169]);
        assert!(check_bounded_type(&r, 3.0));
        assert!(!check_bounded_type(&r, 2.4));
    }

    #[test]
    fn rationals_are_rejected() {
        assert!(matches!(cf_expand(1.0 / 3.0, 10), Err(RotationError::RationalInput(..))));
        assert!(matches!(cf_expand(0.375, 10), Err(RotationError::RationalInput(..))));
        assert!(cf_expand(1.5, 10).is_err());
    }

    #[test]
    fn golden_bounded_type() {
        let r = RotationNumber::golden();
        assert!(check_bounded_type(&r, 2.0));
        assert!(!check_bounded_type(&r, 1.5));
    }
}
