//! Circle rotations by a bounded-type frequency: continued fractions, the
//! shrinking critical intervals around two antipodal points, and return
//! times to them.

mod cf;
mod geometry;
mod returns;

pub use cf::{cf_expand, check_bounded_type, RotationNumber};
pub use geometry::{circ_dist, CriticalGeometry};
pub use returns::{
    default_cap, first_return_time, is_nonresonant, min_return_time, nonresonant_fraction, return_stats,
    return_times_on_grid,
    ReturnScanner, ReturnStats,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("omega = {0} is rational to machine precision (remainder vanished at depth {1})")]
    RationalInput(f64, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no return to the interval within {cap} steps (level {level})")]
    CapExceeded { level: usize, cap: u64 },
}
