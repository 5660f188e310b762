//! Single machine-infinite bus simulator.
//!
//! A sixth-order two-axis synchronous machine with a rotating-exciter AVR
//! feeds a local load and a transformer + double-circuit line to an infinite
//! bus. Scenarios inject reference steps, terminal faults and line switching,
//! and emit uniformly sampled signal traces.

mod dynamics;
mod params;
mod scenario;

pub use dynamics::{
    init_steady_state, power_angle_p, solve_network, step, NetSolution, SimState, Thevenin,
    EQUILIBRIUM_TOL, FAULT_SHUNT_PU,
};
pub use params::{
    DisturbanceEvent, DisturbanceKind, ExciterParams, MachineParams, NetworkParams,
    DEFAULT_FAULT_DURATION,
};
pub use scenario::{
    run_scenario, signals_of, simulate_scenario, SimSignals, SimTrace, DEFAULT_DT_SAMPLE,
    DEFAULT_H_MAX, DEFAULT_T_END,
};

/// Simulator failure modes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),
    #[error("numeric divergence at t = {t} s")]
    NumericDivergence { t: f64 },
    #[error("loss of synchronism at t = {t} s (load angle grew past pi)")]
    UnstableScenario { t: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
