//! One-hidden-layer perceptron with Levenberg-Marquardt training, validation
//! early stopping and the network-growing sweep over hidden sizes.

mod net;
mod sweep;
mod train;

pub use net::{jacobian, mix_seed, AffineScale, MlpNet, Patterns};
pub use sweep::{
    compare_models, grow_sweep, infer_flops, ComparisonRow, SweepCell, SweepResult,
};
pub use train::{lm_step, train, LmOutcome, TrainConfig, TrainResult};

use crate::stats::StatsError;

#[derive(Debug, thiserror::Error)]
pub enum MlpError {
    #[error("input has {got} values, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("damped normal system is numerically singular")]
    SingularSystem,
    #[error("no accepted step before the damping cap in the first epoch")]
    NoProgress,
    #[error("every sweep cell failed")]
    SweepEmpty,
    #[error("training, validation and test splits must all be non-empty")]
    EmptySplit,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
