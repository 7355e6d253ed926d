//! Integrable chiral Potts model.
//!
//! Rapidities are points `(a, b, c, d)` on the curve
//! `a^N + k b^N = k' d^N`, `k a^N + b^N = k' c^N` with `k² + k'² = 1`.
//! A pair of points `p, q` fixes N-periodic Boltzmann weight ratios
//! `W^h_{pq}(n)`, `W^v_{pq}(n)`, and those build a row-to-row transfer matrix.
//! Transfer matrices sharing `p` commute for every `q` on the curve.

mod curve;
mod dense;
mod ising;
mod order;
mod transfer;
mod weights;

pub use curve::{curve_residuals, make_curve_point, CurvePoint, Modulus, RootBranch};
pub use dense::{frobenius_norm, matmul, CMatrix};
pub use ising::{ising_reduction_check, IsingReduction, IsingReductionReport};
pub use order::{order_parameter, order_parameter_exponent};
pub use transfer::{
    commutator_norm, cyclic_shift_matrix, relative_commutator, transfer_matrix, TransferMatrixSpec,
    DEFAULT_DIMENSION_CAP,
};
pub use weights::{weight_table, WeightFamily, WeightTable};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChiralPottsError {
    #[error("number of states must be at least 2, got {0}")]
    InvalidStates(usize),
    #[error("modulus k must lie in (0, 1), got {0}")]
    InvalidModulus(f64),
    #[error("degenerate modulus: k' = 0")]
    DegenerateModulus,
    #[error("k² + k'² = {0} is not 1")]
    ModulusNotNormalised(f64),
    #[error("a and b are both zero")]
    ZeroPoint,
    #[error("root branch {branch} out of range for N = {n_states}")]
    BranchOutOfRange { branch: usize, n_states: usize },
    #[error("all curve terms vanish; residual is 0/0")]
    DegeneratePoint,
    #[error("points lie on different curves (N or modulus differ)")]
    CurveMismatch,
    #[error("singular {family} weight: denominator factor j = {j} vanishes ({factor})")]
    SingularWeight {
        family: WeightFamily,
        j: usize,
        factor: Complex64,
    },
    #[error("transfer matrix dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("row width must be at least 1")]
    InvalidWidth,
    #[error("order-parameter index n = {n} must satisfy 1 <= n <= {}", .n_states - 1)]
    OrderIndex { n: usize, n_states: usize },
    #[error("point is off the curve: residuals ({0:e}, {1:e})")]
    OffCurve(f64, f64),
    #[error("Ising reduction needs N = 2, got N = {0}")]
    NotIsing(usize),
    #[error("point pair is not on the real reduction slice: {0}")]
    ReductionSlice(String),
}
