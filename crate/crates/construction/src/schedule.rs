use crate::{ConstructionParams, Mode};

/// The decreasing rates `λ_N, …, λ_{up_to}` and the limit check.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSchedule {
    pub start_level: usize,
    pub log_lambda: Vec<f64>,
    /// `log λ_∞` estimated by continuing the recursion to the end of the
    /// convergent table.
    pub log_lambda_limit: f64,
    /// `log λ^{1−ε}` (finite) or `log λ^{1−2ε}` (smooth).
    pub log_limit_floor: f64,
    pub limit_ok: bool,
}

impl LambdaSchedule {
    pub fn lambda(&self, n: usize) -> f64 {
        self.log_lambda[n - self.start_level].exp()
    }

    pub fn log_lambda_at(&self, n: usize) -> f64 {
        self.log_lambda[n - self.start_level]
    }
}

fn decrement(params: &ConstructionParams, n: usize) -> f64 {
    let q = |k: usize| params.q(k) as f64;
    match params.mode {
        Mode::Finite { l } => 10.0 * l as f64 * q(n).ln() / q(n - 1),
        Mode::Smooth { a } => (10.0 * q(n) * q(n)).powf(a) / q(n),
    }
}

pub fn lambda_schedule(params: &ConstructionParams, up_to: usize) -> LambdaSchedule {
    let big_n = params.big_n;
    let ll = params.lambda.ln();
    let start = match params.mode {
        Mode::Finite { .. } => ll,
        Mode::Smooth { .. } => (1.0 - params.epsilon_desk) * ll,
    };
    let mut log_lambda = vec![start];
    for n in big_n + 1..=up_to.max(big_n) {
        let prev = *log_lambda.last().unwrap();
        log_lambda.push(prev - decrement(params, n));
    }
    let mut limit = start;
    for n in big_n + 1..=params.geometry.max_level() {
        limit -= decrement(params, n);
    }
    let floor = match params.mode {
        Mode::Finite { .. } => (1.0 - params.epsilon_desk) * ll,
        Mode::Smooth { .. } => (1.0 - 2.0 * params.epsilon_desk) * ll,
    };
    LambdaSchedule { start_level: big_n, log_lambda, log_lambda_limit: limit, log_limit_floor: floor, limit_ok: limit > floor }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_first_step_matches_direct_recursion() {
        let p = ConstructionParams::desk_finite();
        let s = lambda_schedule(&p, p.big_n + 2);
        assert!((s.lambda(p.big_n) - p.lambda).abs() < 1e-12 * p.lambda);
        let (qn, qn1) = (p.q(p.big_n) as f64, p.q(p.big_n + 1) as f64);
        let direct = p.lambda * (-20.0 * qn1.ln() / qn).exp();
        assert!((s.lambda(p.big_n + 1) - direct).abs() < 1e-12 * direct);
        assert!(s.log_lambda.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn smooth_rearrangement_agrees() {
        // λ_{n+1}^{q_{n+1}} = λ_n^{q_{n+1}} · exp(−(10 q_{n+1}²)^a)
        let p = ConstructionParams::desk_smooth();
        let s = lambda_schedule(&p, p.big_n + 3);
        assert!((s.lambda(p.big_n) - p.lambda.powf(0.8)).abs() < 1e-12);
        for n in p.big_n..p.big_n + 3 {
            let q1 = p.q(n + 1) as f64;
            let lhs = q1 * s.log_lambda_at(n + 1);
            let rhs = q1 * s.log_lambda_at(n) - (10.0 * q1 * q1).powf(0.05);
            assert!((lhs - rhs).abs() < 1e-10);
        }
        assert!(s.limit_ok);
    }
}
