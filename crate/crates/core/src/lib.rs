//! Nonlinear discrete-time quantum walks on the line: state algebra, coin families,
//! evolution, spectral analysis of the linear walk and nonlinear scattering.

pub mod coins;
pub mod error;
pub mod experiments;
pub mod evolution;
pub mod kahan;
pub mod linalg;
pub mod quadrature;
pub mod scattering;
pub mod spectral;
pub mod state;

pub use coins::{CoinSpec, NonlinearFactor};
pub use error::{Error, Result};
pub use evolution::{evolve, Evolver, Recorder, Trajectory};
pub use linalg::{Hermitian, Mat2, U2Matrix, C64};
pub use state::{inner_product, LatticeState, ProbabilityDistribution, Spinor};
