//! Two-by-two real matrices of determinant one, their singular frames, the
//! induced action on the projective line, and products along circle orbits.

mod angle;
mod mat;
mod orbit;
mod svd;

pub use angle::{proj_dist, wrap_half, ProjAngle};
pub use mat::{cocycle_matrix, make_diag, make_rotation, Mat2};
pub use orbit::{
    orbit_point, orbit_product, orbit_product_with, Cocycle, Direction, FnCocycle, OrbitProduct, K_RENORM,
};
pub use svd::{contracted_shift, contracted_shift_log, is_norm_multiplicative, proj_act, proj_deriv, svd_frame, SvdFrame, TOL_HYP};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Sl2Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not hyperbolic (norm {0} too close to 1)")]
    NotHyperbolic(f64),
}

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
