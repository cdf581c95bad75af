//! Quantum self-supervised learning with entanglement augmentation.
//!
//! A dense state-vector / density-matrix simulator, amplitude encoding,
//! entanglement-based augmentation circuits, fidelity estimators, the
//! fidelity contrast loss with parameter-shift training, Kraus noise
//! channels, and the experiment harness used by the `qsea` binary.

pub mod augment;
pub mod circuit;
pub mod classify;
pub mod config;
pub mod data;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod fidelity;
pub mod gate;
pub mod grad;
mod kernel;
pub mod loss;
pub mod metrics;
pub mod noise;
pub mod optim;
pub mod report;
pub mod state;
pub mod train;

pub use error::{QseaError, Result};
pub use gate::{Gate, GateOp};
pub use state::{DensityMatrix, StateVector};

pub use augment::{EaCircuit, EaParams};
pub use circuit::ParamCircuit;
pub use config::{ClassifierKind, DatasetSource, RunConfig};
pub use data::Dataset;
pub use experiment::AblationAxis;
pub use encoder::{Encoder, FeatureVector, RawImage};
pub use fidelity::{FidelityEstimate, FidelityMode};
pub use loss::{LossWeights, Triplet};
pub use metrics::{EpochLosses, RepeatSummary, RunMetrics};
pub use report::CsvRow;
pub use noise::{KrausChannel, NoiseModel};

pub use num_complex::Complex64 as C64;

/// State-level tolerance: norms, traces, unitarity.
pub const STATE_TOL: f64 = 1e-10;
/// Arithmetic-level tolerance.
pub const ARITH_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-9;
