//! Inductive construction of `C^l` and `C^∞` cocycles `A_n = Λ·R_{π/2−φ_n}`
//! whose limit has a discontinuous Lyapunov exponent, together with the
//! destroyed cocycles `Ã_n` and the per-level verification.

mod cheb;
mod destroy;
mod fields;
mod gap;
mod hermite;
mod level;
mod params;
mod phi;
mod profile;
mod report;
mod schedule;
mod state_io;

pub use cheb::ChebSeries;
pub use destroy::{destroy_level, TildeCocycle};
pub use fields::{continuous_branch, field_difference, field_point, level_returns, FieldPoint};
pub use gap::{default_horizon, dip_trace, gap_experiment, gap_row, DipTrace, GapRow};
pub use hermite::HermitePoly;
pub use level::{
    advance_level, base_c1_norm, base_phi, base_state, compute_correction, construct, level_sup_derivs, verify_level,
    ConvergenceRecord, Correction, FieldSamples, LevelState,
};
pub use params::{ConstructionParams, Mode, Variant};
pub use phi::{richardson_deriv, PhiCocycle, PhiFunction, Piece, PieceKind};
pub use profile::{
    bump_profile, critical_profile, critical_profile_deriv, phi0, phi0_at, phi0_deriv_at, smooth_bump, smooth_step,
    BaseProfile,
};
pub use report::{log_margin, Clause, LevelReport};
pub use schedule::{lambda_schedule, LambdaSchedule};
pub use state_io::{read_state, write_state, PHI_SAMPLES, STATE_MAGIC, STATE_VERSION};

use qpc_rotation::RotationError;
use qpc_sl2::Sl2Error;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("x = {x} lies outside both delta0 = {delta0} neighborhoods")]
    OutOfDomain { x: f64, delta0: f64 },
    #[error("condition (b) violated: min |phi - k pi| = {found:e} <= {bound:e}")]
    ConditionBViolated { found: f64, bound: f64 },
    #[error("Hermite interval width {width:e} is degenerate")]
    IllConditioned { width: f64 },
    #[error("level {level}: product is not hyperbolic at x = {x}")]
    NotHyperbolic { level: usize, x: f64 },
    #[error("level {level} failed verification: {clause}")]
    LevelVerificationFailed { level: usize, clause: String },
    #[error("level {level}: neither destruction sign aligns the fields (residuals {plus:e}, {minus:e})")]
    AlignmentNotDestroyed { level: usize, plus: f64, minus: f64 },
    #[error("state file: {0}")]
    StateFormat(String),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
}
