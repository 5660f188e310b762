//! Excitation-controller feature selection on a simulated single
//! machine-infinite bus generator.
//!
//! The crate covers the full study pipeline:
//!
//! * [`sim`] - sixth-order two-axis generator + rotating-exciter AVR behind a
//!   Thevenin network, with reference steps, terminal faults and line
//!   switching, sampled at 200 Hz;
//! * [`dataset`] - candidate-feature rows (dVt, omega, P, Q, dVq, delta ->
//!   Vf), the stratified analysis sample and seeded splits;
//! * [`stats`] - Pearson screening with significance, OLS diagnostics
//!   (R-squared, adjusted, S, VIF), residual assessment and forward
//!   selection over the eight fixed candidate models;
//! * [`mlp`] - one-hidden-layer perceptron trained by Levenberg-Marquardt
//!   with validation early stopping and the 1..30 x 30-restart growing
//!   sweep;
//! * [`pipeline`] - the reproducible end-to-end run with persisted CSV
//!   artifacts.
//!
//! All numerics are generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below pin the `f64` instantiation the binaries use.

pub mod config;
pub mod dataset;
pub mod io;
pub mod linalg;
pub mod mlp;
pub mod pipeline;
pub mod prob;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod stats;

/// Scalar type of the shipped pipeline.
pub type Scalar = f64;

pub type MachineParams = sim::MachineParams<Scalar>;
pub type ExciterParams = sim::ExciterParams<Scalar>;
pub type NetworkParams = sim::NetworkParams<Scalar>;
pub type DisturbanceEvent = sim::DisturbanceEvent<Scalar>;
pub type SimState = sim::SimState<Scalar>;
pub type SimSignals = sim::SimSignals<Scalar>;
pub type SimTrace = sim::SimTrace<Scalar>;
pub type FeatureRow = dataset::FeatureRow<Scalar>;
pub type Dataset = dataset::Dataset<Scalar>;
pub type SplitSpec = dataset::SplitSpec<Scalar>;
pub type CorrelationEntry = stats::CorrelationEntry<Scalar>;
pub type RegressionFit = stats::RegressionFit<Scalar>;
pub type AssessmentReport = stats::AssessmentReport<Scalar>;
pub type MlpNet = mlp::MlpNet<Scalar>;
pub type TrainConfig = mlp::TrainConfig<Scalar>;
pub type TrainResult = mlp::TrainResult<Scalar>;
pub type SweepResult = mlp::SweepResult<Scalar>;
pub type PipelineConfig = config::PipelineConfig<Scalar>;
pub type RunReport = report::RunReport<Scalar>;
