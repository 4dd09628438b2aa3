//! Phase-space calculus for a scalar charged relativistic particle.
//!
//! The Klein-Gordon field is handled in the two-component Feshbach-Villars
//! (FV) form, where the free Hamiltonian is `E(p) τ₃`. Everything lives on a
//! single 1-D momentum grid with a conjugate periodic coordinate window:
//!
//! - [`grid`]: the grid, centered unitary transforms and quadrature
//! - [`kinematics`]: `E`, `ε`, `χ`, `R`, `G`, `U`
//! - [`states`]: two-component wavefunctions and their free evolution
//! - [`weyl`]: matrix symbols, kernels, the star product and Moyal bracket
//! - [`fv_ops`]: charge-invariant observables in the FV representation
//! - [`wigner`]: the four Wigner components and their properties
//! - [`stats`]: averages, moments, purity and the dispersion curve

pub mod fv_ops;
pub mod grid;
pub mod kinematics;
pub mod states;
pub mod stats;
pub mod weyl;
pub mod wigner;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("boundary decay violated: {0}")]
    BoundaryDecay(String),

    #[error("axis mismatch: expected {expected}, found {found}")]
    AxisMismatch { expected: String, found: String },

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch { expected: String, found: String },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("symbol is not charge-invariant")]
    NotChargeInvariant,

    #[error("symbol is not linear in q (relative second difference {0:e})")]
    NotLinearInQ(f64),

    #[error("state is not single-charge")]
    NotSingleCharge,

    #[error("odd kernel content is below the noise threshold; symbol is unrecoverable")]
    Unrecoverable,

    #[error("probe region is empty after the magnitude floor")]
    EmptyRegion,

    #[error("moment routes disagree at order {order}: formula {formula:e}, grid {grid:e}")]
    RouteMismatch { order: u32, formula: f64, grid: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
