//! Controllability analysis for finite-dimensional quantum control systems
//!
//! ```text
//! i dψ/dt = [H₀ + F₁(ε(t))μ₁ + … + F_L(ε(t))μ_L] ψ
//! ```
//!
//! driven by a single piecewise-constant control `ε` with values in a finite set.
//! The crate computes the real Lie algebra generated by `−iH₀, −iμ₁, …`, decides
//! density-matrix and wavefunction controllability from its dimension, and
//! checks verdicts by simulating the dynamics.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod functionals;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod simulator;
pub mod system;

pub use criteria::{analyze, ControllabilityReport, Tolerances};
pub use error::{Error, Result};
pub use functionals::{FunctionalFamily, ValueSet};
pub use linalg::{ComplexMatrix, HermitianOperator};
pub use simulator::{PiecewiseConstantControl, QuantumState};
pub use system::ControlSystem;
