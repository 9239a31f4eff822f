//! Finite-time Lyapunov exponents and the block-level hyperbolicity
//! predicates used throughout the construction.

mod blocks;
mod flatness;
mod le;

pub use blocks::{
    alignment_angle, block_along_orbit, cancellation_upper_bound_check, check_mu_hyperbolic,
    concat_lower_bound_check, direction_decay_check, BlockProducts, CancellationError, ConcatCheck,
    DecayReport, HyperbolicBlockReport,
};
pub use flatness::{contraction_curve_flatness, FlatnessReport};
pub use le::{finite_le, le_samples, sample_points, LEEstimate, Method, Sampling};
