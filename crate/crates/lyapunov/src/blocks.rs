use qpc_sl2::{contracted_shift, orbit_point, proj_dist, svd_frame, Cocycle, Mat2, Sl2Error};

/// Matrices `A(x), A(Tx), …, A(T^{n−1}x)`.
pub fn block_along_orbit<C: Cocycle + ?Sized>(cocycle: &C, x: f64, n: usize) -> Vec<Mat2> {
    let step = cocycle.step();
    (0..n).map(|i| cocycle.matrix(orbit_point(x, step, i as i64))).collect()
}

/// Prefix products `A^i = A_{i−1}⋯A_0` and suffix products
/// `A_{n−1}⋯A_i`, each stored as a unit-norm matrix and a log-norm.
#[derive(Debug, Clone)]
pub struct BlockProducts {
    pub prefix: Vec<(Mat2, f64)>,
    pub suffix: Vec<(Mat2, f64)>,
}

impl BlockProducts {
    pub fn new(block: &[Mat2]) -> Self {
        let n = block.len();
        let mut prefix = Vec::with_capacity(n + 1);
        let mut m = Mat2::IDENTITY;
        let mut acc = 0.0;
        prefix.push((m, 0.0));
        for a in block {
            m = *a * m;
            let nm = m.norm();
            m = m.scale(1.0 / nm);
            acc += nm.ln();
            prefix.push((m, acc));
        }
        let mut suffix = vec![(Mat2::IDENTITY, 0.0); n + 1];
        let mut m = Mat2::IDENTITY;
        let mut acc = 0.0;
        for i in (0..n).rev() {
            m = m * block[i];
            let nm = m.norm();
            m = m.scale(1.0 / nm);
            acc += nm.ln();
            suffix[i] = (m, acc);
        }
        BlockProducts { prefix, suffix }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicBlockReport {
    pub length: usize,
    pub mu: f64,
    pub lambda_cap: f64,
    pub epsilon: f64,
    /// `‖A_i‖ ≤ λ`; the same flags serve the reversed inverted block since
    /// `‖A^{-1}‖ = ‖A‖` in SL(2,R).
    pub norm_cap: Vec<bool>,
    pub growth_forward: Vec<bool>,
    pub growth_reversed: Vec<bool>,
    /// Smallest log-margin of the growth conditions.
    pub worst_log_margin: f64,
    /// Smallest `log λ − log‖A_i‖`.
    pub cap_log_margin: f64,
    /// First index `i` (1-based) at which a growth condition fails.
    pub first_failure: Option<usize>,
    pub pass: bool,
}

impl HyperbolicBlockReport {
    pub const CSV_HEADER: &'static str = "length,mu,lambda_cap,epsilon,pass,worst_log_margin";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{},{},{:.6e}",
            self.length, self.mu, self.lambda_cap, self.epsilon, self.pass, self.worst_log_margin
        )
    }
}

const NORM_SLACK: f64 = 1e-12;

pub fn check_mu_hyperbolic(block: &[Mat2], mu: f64, lambda_cap: f64, epsilon: f64) -> HyperbolicBlockReport {
    let bp = BlockProducts::new(block);
    check_with_products(block, &bp, mu, lambda_cap, epsilon)
}

pub(crate) fn check_with_products(
    block: &[Mat2],
    bp: &BlockProducts,
    mu: f64,
    lambda_cap: f64,
    epsilon: f64,
) -> HyperbolicBlockReport {
    let n = block.len();
    let rate = (1.0 - epsilon) * mu.ln();
    let log_cap = lambda_cap.ln();
    let mut worst = f64::INFINITY;
    let mut cap_log_margin = f64::INFINITY;
    let mut first_failure = None;
    let norm_cap: Vec<bool> = block
        .iter()
        .map(|a| {
            let m = log_cap - a.norm().ln();
            cap_log_margin = cap_log_margin.min(m);
            m >= -NORM_SLACK
        })
        .collect();
    let mut growth = |logs: &mut dyn Iterator<Item = f64>| -> Vec<bool> {
        logs.enumerate()
            .map(|(k, l)| {
                let i = k + 1;
                let m = l - i as f64 * rate;
                worst = worst.min(m);
                let ok = m >= -NORM_SLACK * i as f64;
                if !ok {
                    first_failure = Some(first_failure.map_or(i, |f: usize| f.min(i)));
                }
                ok
            })
            .collect()
    };
    let growth_forward = growth(&mut (1..=n).map(|i| bp.prefix[i].1));
    let growth_reversed = growth(&mut (1..=n).map(|i| bp.suffix[n - i].1));
    let pass = norm_cap.iter().chain(&growth_forward).chain(&growth_reversed).all(|&b| b);
    HyperbolicBlockReport {
        length: n,
        mu,
        lambda_cap,
        epsilon,
        norm_cap,
        growth_forward,
        growth_reversed,
        worst_log_margin: worst,
        cap_log_margin,
        first_failure,
        pass,
    }
}

/// Angle on RP¹ between `s(C^{-1})` and `s(A^n)`.
pub fn alignment_angle(c: &Mat2, block: &[Mat2]) -> Result<f64, Sl2Error> {
    let bp = BlockProducts::new(block);
    let an = bp.prefix[block.len()].0;
    Ok(proj_dist(svd_frame(&c.adj())?.s.theta(), svd_frame(&an)?.s.theta()))
}

/// Outcome of the concatenation bound `‖A^n C‖ ≥ μ^{(m+n)(1−ε)}·θ`, in both
/// the stated form and the form with an extra factor ½.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatCheck {
    pub two_theta: f64,
    pub log_lhs: f64,
    pub log_margin_full: f64,
    pub log_margin_half: f64,
    pub holds_full: bool,
    pub holds_half: bool,
    pub preconditions: bool,
}

impl ConcatCheck {
    /// Which form is the binding one: `"theta"` when even the stated form
    /// holds, `"theta/2"` when only the halved one does, `"none"` otherwise.
    pub fn binding(&self) -> &'static str {
        match (self.holds_full, self.holds_half) {
            (true, _) => "theta",
            (false, true) => "theta/2",
            _ => "none",
        }
    }
}

pub fn concat_lower_bound_check(
    c: &Mat2,
    block: &[Mat2],
    mu: f64,
    lambda_cap: f64,
    epsilon: f64,
    m: usize,
    two_theta: f64,
) -> ConcatCheck {
    let n = block.len();
    let bp = BlockProducts::new(block);
    let nc = c.norm();
    let hyp = check_with_products(block, &bp, mu, lambda_cap, epsilon).pass;
    let preconditions = hyp && nc.ln() >= m as f64 * mu.ln() * (1.0 - 1e-12);
    let (an, la) = bp.prefix[n];
    let prod = an * c.scale(1.0 / nc);
    let log_lhs = la + nc.ln() + prod.norm().ln();
    let theta = 0.5 * two_theta;
    let rhs = (m + n) as f64 * (1.0 - epsilon) * mu.ln() + theta.ln();
    let log_margin_full = log_lhs - rhs;
    let log_margin_half = log_margin_full + std::f64::consts::LN_2;
    ConcatCheck {
        two_theta,
        log_lhs,
        log_margin_full,
        log_margin_half,
        holds_full: log_margin_full >= 0.0,
        holds_half: log_margin_half >= 0.0,
        preconditions,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CancellationError {
    #[error("alignment precondition violated: angle {0:e} exceeds tolerance")]
    AlignmentViolated(f64),
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
}

const ALIGN_TOL: f64 = 1e-9;

/// `‖BA‖ ≤ 2 max{‖A‖/‖B‖, ‖B‖/‖A‖}` when `A·s(A) ∥ u(B)`.
pub fn cancellation_upper_bound_check(a: &Mat2, b: &Mat2) -> Result<bool, CancellationError> {
    let fa = svd_frame(a)?;
    let fb = svd_frame(b)?;
    let angle = fa.image_s().dist(fb.u);
    if angle > ALIGN_TOL {
        return Err(CancellationError::AlignmentViolated(angle));
    }
    let (na, nb) = (fa.norm, fb.norm);
    let bound = 2.0 * (na / nb).max(nb / na);
    Ok((*b * *a).norm() <= bound * (1.0 + 1e-12))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub hyperbolic: bool,
    pub pass_a: bool,
    pub pass_b: bool,
    pub worst_log_margin_a: f64,
    pub worst_log_margin_b: f64,
    pub pass: bool,
}

/// Decay of partial contracted directions along a hyperbolic block:
/// `∠(s_i, s_n) ≤ μ^{−2i(1−ε)+3ε}` and `|A^i s_n| ≤ μ^{−i(1−3ε)+3ε}`.
///
/// Both quantities fall far below rounding level, so they are computed
/// from the shift `s_n − s_i` obtained without cancellation rather than
/// from the angles themselves.
pub fn direction_decay_check(block: &[Mat2], mu: f64, lambda_cap: f64, epsilon: f64) -> Result<DecayReport, Sl2Error> {
    let n = block.len();
    let bp = BlockProducts::new(block);
    let hyperbolic = check_with_products(block, &bp, mu, lambda_cap, epsilon).pass;
    let lm = mu.ln();
    let mut worst_a = f64::INFINITY;
    let mut worst_b = f64::INFINITY;
    for i in 1..=n {
        let (p, l) = bp.prefix[i];
        let t = if i == n { 0.0 } else { contracted_shift(&p, (-2.0 * l).exp(), &bp.suffix[i].0)? };
        let log_angle = t.abs().ln();
        worst_a = worst_a.min((-2.0 * i as f64 * (1.0 - epsilon) + 3.0 * epsilon) * lm - log_angle);
        let s2 = t.sin().powi(2);
        let log_img = if s2 == 0.0 {
            -l
        } else {
            l + 0.5 * (s2 + (-4.0 * l).exp() * t.cos().powi(2)).ln()
        };
        worst_b = worst_b.min((-(i as f64) * (1.0 - 3.0 * epsilon) + 3.0 * epsilon) * lm - log_img);
    }
    let pass_a = worst_a >= 0.0;
    let pass_b = worst_b >= 0.0;
    Ok(DecayReport {
        hyperbolic,
        pass_a,
        pass_b,
        worst_log_margin_a: worst_a,
        worst_log_margin_b: worst_b,
        pass: hyperbolic && pass_a && pass_b,
    })
}
