use qpc_lyapunov::{le_samples, sample_points, LEEstimate, Method, Sampling};
use qpc_rotation::{return_stats, RotationNumber};
use qpc_sl2::{orbit_point, orbit_product, Direction};

use crate::destroy::TildeCocycle;
use crate::level::LevelState;
use crate::phi::PhiCocycle;
use crate::{ConstructionError, ConstructionParams};

/// One row of the exponent comparison between `A_n` and `Ã_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: usize,
    pub q_n: u64,
    pub lambda_n: f64,
    pub le_a: LEEstimate,
    pub le_tilde: LEEstimate,
    /// `L_K(A_n) − L_K(Ã_n)`.
    pub gap: f64,
    pub k: usize,
    pub samples: usize,
}

impl GapRow {
    pub const CSV_HEADER: &'static str = "n,q_n,lambda_n,LE_An,LE_tilde,gap,K,samples,stderr_An,stderr_tilde";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{:.6e},{:.6e}",
            self.n,
            self.q_n,
            self.lambda_n,
            self.le_a.value,
            self.le_tilde.value,
            self.gap,
            self.k,
            self.samples,
            self.le_a.stderr,
            self.le_tilde.stderr
        )
    }

    /// The larger of the two standard errors.
    pub fn stderr(&self) -> f64 {
        self.le_a.stderr.max(self.le_tilde.stderr)
    }
}

/// `K = 10·q_{n+2}`, the horizon used for level `n`.
pub fn default_horizon(params: &ConstructionParams, n: usize) -> usize {
    10 * params.q(n + 2) as usize
}

/// `L_K` of the two cocycles on a common grid of `samples` phases.
pub fn gap_row(
    params: &ConstructionParams,
    state: &LevelState,
    tilde: &TildeCocycle,
    k: usize,
    samples: usize,
) -> GapRow {
    let step = params.rot.step();
    let a = PhiCocycle { phi: &state.phi, lambda: params.lambda, step };
    let t = PhiCocycle { phi: &tilde.phi, lambda: params.lambda, step };
    let pts = sample_points(&Sampling::Grid(samples), k, step);
    let le_a = LEEstimate::from_samples(k, &le_samples(&a, k, &pts), Method::Grid);
    let le_tilde = LEEstimate::from_samples(k, &le_samples(&t, k, &pts), Method::Grid);
    GapRow {
        n: state.n,
        q_n: state.q_n,
        lambda_n: state.lambda_n,
        gap: le_a.value - le_tilde.value,
        le_a,
        le_tilde,
        k,
        samples,
    }
}

/// Rows for every level that has a destroyed counterpart. `horizon`
/// overrides `K = 10·q_{n+2}`.
pub fn gap_experiment(
    params: &ConstructionParams,
    states: &[LevelState],
    tildes: &[TildeCocycle],
    horizon: Option<usize>,
    samples: usize,
) -> Result<Vec<GapRow>, ConstructionError> {
    if tildes.is_empty() {
        return Err(ConstructionError::InvalidParameter("gap experiment needs a destroyed level".into()));
    }
    tildes
        .iter()
        .map(|t| {
            let state = states
                .iter()
                .find(|s| s.n == t.n)
                .ok_or_else(|| ConstructionError::InvalidParameter(format!("no state for level {}", t.n)))?;
            let k = horizon.unwrap_or_else(|| default_horizon(params, t.n));
            Ok(gap_row(params, state, t, k, samples))
        })
        .collect()
}

/// Partial log-norms along one orbit that crosses `c_1` at step `cross`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipTrace {
    pub n: usize,
    pub x0: f64,
    pub cross: usize,
    pub log_norm_a: Vec<f64>,
    pub log_norm_tilde: Vec<f64>,
    /// Bounded-type constant `M = max q_{k+1}/q_k`.
    pub m: f64,
    pub k1: u32,
    /// `d_3 = M^{−k_1−1}/2`.
    pub d3: f64,
    /// `log 2 + max(n_{j+} − n_j, n_j − n_{j−})·log λ`, the first bound of
    /// the window estimate.
    pub window_bound: f64,
    /// `(1 − d_3)(n_{j+} − n_{j−})·log λ`.
    pub window_bound_d3: f64,
}

impl DipTrace {
    pub const CSV_HEADER: &'static str = "j,log_norm_A,log_norm_tilde,linear_log_lambda";

    pub fn csv(&self, lambda: f64) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for (j, (a, t)) in self.log_norm_a.iter().zip(&self.log_norm_tilde).enumerate() {
            s.push_str(&format!("{},{:.12e},{:.12e},{:.12e}\n", j + 1, a, t, (j + 1) as f64 * lambda.ln()));
        }
        s
    }

    pub fn final_tilde(&self) -> f64 {
        self.log_norm_tilde.last().copied().unwrap_or(0.0)
    }

    /// Whether the destroyed window obeys the first bound.
    pub fn window_holds(&self) -> bool {
        self.final_tilde() <= self.window_bound + 1e-9
    }
}

fn bounded_type_constant(rot: &RotationNumber) -> f64 {
    (0..rot.depth().saturating_sub(1))
        .map(|k| rot.q(k + 1) as f64 / rot.q(k) as f64)
        .fold(1.0, f64::max)
}

/// Runs the window `[n_{j−}, n_{j+}]` of one orbit through `c_1` for both
/// cocycles, where the window ends are the previous and next visits to
/// `I_n/10`.
pub fn dip_trace(
    params: &ConstructionParams,
    state: &LevelState,
    tilde: &TildeCocycle,
) -> Result<DipTrace, ConstructionError> {
    let n = state.n;
    let g = &params.geometry;
    let stats = return_stats(&params.rot, g, n, 1000)?;
    let m = bounded_type_constant(&params.rot);
    let k1 = {
        let mut k = 0u32;
        while m.powi(-(k as i32) - 1) > stats.ratio && k < 64 {
            k += 1;
        }
        k
    };
    let d3 = 0.5 * m.powi(-(k1 as i32) - 1);
    let step = params.rot.step();
    // a point just off c_1 so the crossing is inside I_n/10
    let xc = g.c1 + 0.25 * g.radius(n, 10.0);
    let back = first_visit(params, xc, n, Direction::Backward)?;
    let fwd = first_visit(params, xc, n, Direction::Forward)?;
    let x0 = orbit_point(xc, step, -(back as i64));
    let len = (back + fwd) as usize;
    let a = PhiCocycle { phi: &state.phi, lambda: params.lambda, step };
    let t = PhiCocycle { phi: &tilde.phi, lambda: params.lambda, step };
    let pa = orbit_product(&a, x0, len, Direction::Forward, true);
    let pt = orbit_product(&t, x0, len, Direction::Forward, true);
    let ll = params.lambda.ln();
    Ok(DipTrace {
        n,
        x0,
        cross: back as usize,
        log_norm_a: pa.partial_log_norms,
        log_norm_tilde: pt.partial_log_norms,
        m,
        k1,
        d3,
        window_bound: 2f64.ln() + back.max(fwd) as f64 * ll,
        window_bound_d3: (1.0 - d3) * len as f64 * ll,
    })
}

fn first_visit(params: &ConstructionParams, x: f64, n: usize, dir: Direction) -> Result<u64, ConstructionError> {
    let g = &params.geometry;
    let cap = qpc_rotation::default_cap(g, n, 10.0);
    Ok(qpc_rotation::first_return_time(&params.rot, g, x, n, 10.0, dir, cap)?)
}
