//! Non-commutative Fourier analysis and para-differential calculus on SU(2).

pub mod cg;
pub mod error;
pub mod fourier;
pub mod group;
pub mod irreps;
pub mod lp;
pub mod paradiff;
pub mod quadrature;
pub mod runner;
pub mod spin;
pub mod structure;
pub mod suite;
pub mod symbol;

pub use error::{Error, Result};
pub use group::{distance, EulerAngles, GroupPoint, LieVec, C64};
pub use irreps::{CMat, RMat};
pub use spin::Spin;
