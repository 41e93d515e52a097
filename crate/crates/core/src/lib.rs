//! Stochastic integration of operator-valued step functions against abstract
//! martingales `M_t = E_t M`, the Fock-space Itô and Hitsuda–Skorohod
//! integrals, and their classical counterparts on a finite Bernoulli model.
//!
//! Numeric types are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the suites
//! and the command-line tool.

pub mod error;
pub mod fock;
pub mod fock_ito;
pub mod grid;
pub mod hstoch;
pub mod linalg;
pub mod multiset;
pub mod prob;
pub mod random;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod symtensor;

pub use error::{Error, Result};
pub use fock::{FockVector, TruncationPolicy};
pub use grid::{Location, TimeGrid};
pub use linalg::CMatrix;
pub use multiset::Multiset;
pub use scalar::{Real, C};
pub use symtensor::SymCoeffs;

pub type TimeGrid64 = TimeGrid<f64>;
pub type SymCoeffs64 = SymCoeffs<f64>;
pub type FockVector64 = FockVector<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type Complex64 = C<f64>;
