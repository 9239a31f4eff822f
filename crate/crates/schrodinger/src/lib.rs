//! Reduction of identity-homotopic cocycles `D = Λ·R_{π/2−φ}` with small `φ`
//! to Schrödinger form `S_{v,0}` by an explicit change of frame.
//!
//! The pipeline is [`frame_b1`] → [`reduce_to_s`] → [`solve_cohomological`]
//! → [`conjugate_full`], and [`perturbation_transport`] repeats it for a
//! sequence of nearby cocycles.

mod cohomology;
mod conjugate;
mod frame;

pub use cohomology::{solve_cohomological, Cohomology, FourierSeries, SMALL_DIVISOR};
pub use conjugate::{
    conjugate_full, perturbation_transport, ConjugationResult, Potential, SchrodingerPotential, TransportRow,
    TransportSummary,
};
pub use frame::{b1_matrix, check_phi_bound, frame_b1, reduce_to_s, FrameReport, Reduced, MIN_FRAME_DET, SHAPE_TOL};

use qpc_sl2::Mat2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchrodingerError {
    #[error("degenerate frame: min |det B_1| = {min_det:e}")]
    DegenerateFrame { min_det: f64 },
    #[error("frame determinant changes sign")]
    FrameSignChange,
    #[error("max |phi| = {max_phi} is not below pi/10")]
    PhiTooLarge { max_phi: f64 },
    #[error("reduced matrix has entry {entry} = {value:e} at x = {x}")]
    ShapeViolation { x: f64, entry: &'static str, value: f64 },
    #[error("small divisor |e^(ik shift) - 1| = {value:e} at k = {k}")]
    SmallDivisor { k: usize, value: f64 },
    #[error("mean of f is {mean:e}, above the tolerance {tol:e}")]
    MeanNotVanishing { mean: f64, tol: f64 },
    #[error("conjugation residual {residual:e} exceeds {tol:e}")]
    ConjugationResidual { residual: f64, tol: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, SchrodingerError>;

/// `S_{v,E} = [[E − v, −1], [1, 0]]`.
pub fn schrodinger_matrix(v: f64, e: f64) -> Mat2 {
    Mat2::new(e - v, -1.0, 1.0, 0.0)
}
