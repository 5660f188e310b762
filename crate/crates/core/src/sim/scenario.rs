//! Disturbance scenarios: event scheduling, fixed-step integration and
//! uniform 200 Hz sampling of the signal set used downstream.

use super::dynamics::{
    init_steady_state, solve_network, step, SimState, Thevenin, FAULT_SHUNT_PU,
};
use super::params::{
    DisturbanceEvent, DisturbanceKind, ExciterParams, MachineParams, NetworkParams,
};
use super::SimError;
use crate::scalar::{c, cu, Real};

/// One sampled signal row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSignals<F> {
    pub t: F,
    pub v_t: F,
    pub v_d: F,
    pub v_q: F,
    pub omega: F,
    /// Load angle between the rotor q-axis and the terminal voltage, rad.
    pub delta: F,
    pub p: F,
    pub q: F,
    /// Excitation (field) voltage - the regression/ANN target.
    pub v_f: F,
    /// Internal voltage used by the power-angle consistency check.
    pub e_f: F,
}

/// Time-ordered samples of one disturbance scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<F> {
    pub signals: Vec<SimSignals<F>>,
    pub scenario_id: String,
    pub dt_sample: F,
}

/// Default sampling interval: 5 ms (200 Hz).
pub const DEFAULT_DT_SAMPLE: f64 = 0.005;
/// Default scenario length, seconds.
pub const DEFAULT_T_END: f64 = 10.0;
/// Default internal integration step, seconds (Ta/5 for the default exciter).
pub const DEFAULT_H_MAX: f64 = 2e-4;

/// Extracts the reported signal row from a dynamic state.
pub fn signals_of<F: Real>(
    state: &SimState<F>,
    machine: &MachineParams<F>,
    thev: &Thevenin<F>,
) -> SimSignals<F> {
    let net = solve_network(machine, thev, state.delta_sync, state.eq_pp, state.ed_pp);
    let rs = machine.r_stator;
    let xs = machine.x_s;
    // Internal voltage behind (R_s + jX_s) in rotor coordinates.
    let ef_q = net.v_q + rs * net.i_q + xs * net.i_d;
    let ef_d = net.v_d + rs * net.i_d - xs * net.i_q;
    SimSignals {
        t: state.t,
        v_t: net.v_t,
        v_d: net.v_d,
        v_q: net.v_q,
        omega: state.omega,
        delta: net.v_d.atan2(net.v_q),
        p: net.p_term,
        q: net.q_term,
        v_f: state.e_fd,
        e_f: (ef_d * ef_d + ef_q * ef_q).sqrt(),
    }
}

#[derive(Debug, Clone, Copy)]
enum NetChange<F> {
    FaultOn,
    FaultOff,
    TripLine,
    RecloseLine,
    ScaleVref(F),
}

fn change_schedule<F: Real>(events: &[DisturbanceEvent<F>]) -> Vec<(F, NetChange<F>)> {
    let mut sched = Vec::new();
    for ev in events {
        match ev.kind {
            DisturbanceKind::VrefStep(f) => sched.push((ev.t_start, NetChange::ScaleVref(f))),
            DisturbanceKind::TerminalFaultSelfClearing => {
                sched.push((ev.t_start, NetChange::FaultOn));
                sched.push((ev.t_release(), NetChange::FaultOff));
            }
            DisturbanceKind::TerminalFaultClearedByTrip => {
                sched.push((ev.t_start, NetChange::FaultOn));
                sched.push((ev.t_release(), NetChange::FaultOff));
                sched.push((ev.t_release(), NetChange::TripLine));
            }
            DisturbanceKind::LineTrip => sched.push((ev.t_start, NetChange::TripLine)),
            DisturbanceKind::LineReclose => sched.push((ev.t_start, NetChange::RecloseLine)),
        }
    }
    sched.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("event times must be comparable"));
    sched
}

fn check_non_overlapping<F: Real>(events: &[DisturbanceEvent<F>]) -> Result<(), SimError> {
    let mut spans: Vec<(F, F)> = events.iter().map(|e| (e.t_start, e.t_release())).collect();
    spans.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in spans.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(SimError::InvalidParams("disturbance events overlap in time".into()));
        }
    }
    Ok(())
}

/// Runs one scenario from the supplied equilibrium state.
///
/// The internal integration step is fixed (at most [`DEFAULT_H_MAX`] and
/// `Ta/5`), independent of `dt_sample`; samples land on the exact
/// `k * dt_sample` grid. Identical inputs give bit-identical traces.
#[allow(clippy::too_many_arguments)]
pub fn run_scenario<F: Real>(
    machine: &MachineParams<F>,
    exciter: &ExciterParams<F>,
    network: &NetworkParams<F>,
    initial: &SimState<F>,
    events: &[DisturbanceEvent<F>],
    t_end: F,
    dt_sample: F,
    scenario_id: &str,
) -> Result<SimTrace<F>, SimError> {
    machine.validate()?;
    exciter.validate()?;
    network.validate()?;
    for ev in events {
        ev.validate()?;
    }
    check_non_overlapping(events)?;
    if !(dt_sample > F::zero()) || !(t_end > F::zero()) {
        return Err(SimError::InvalidParams("t_end and dt_sample must be > 0".into()));
    }

    let h_max = c::<F>(DEFAULT_H_MAX).min(exciter.ta / c(5.0)).min(dt_sample);
    let z_base = machine.z_base();

    let mut lines = network.line_impedances.len();
    let mut fault: Option<F> = None;
    let mut thev = Thevenin::from_network(network, z_base, lines, fault)?;

    let sched = change_schedule(events);
    let mut next_change = 0usize;

    let n_samples = (t_end / dt_sample).to_f64().unwrap().round() as usize;
    let mut signals = Vec::with_capacity(n_samples + 1);
    let mut state = *initial;
    state.t = F::zero();
    signals.push(signals_of(&state, machine, &thev));

    // Loss-of-synchronism detector: consecutive samples with the rotor angle
    // past pi and still advancing.
    let unstable_limit = (F::one() / dt_sample).to_f64().unwrap().round() as usize;
    let mut unstable_run = 0usize;
    let mut prev_delta = state.delta_sync;

    let pi = c::<F>(std::f64::consts::PI);
    for k in 1..=n_samples {
        let t_k = cu::<F>(k) * dt_sample;
        loop {
            // Integrate up to the next change inside this sample interval,
            // or to the sample point itself.
            let seg_end = if next_change < sched.len() && sched[next_change].0 < t_k {
                sched[next_change].0
            } else {
                t_k
            };
            let span = seg_end - state.t;
            if span > c(1e-12) {
                let n_sub = (span / h_max).to_f64().unwrap().ceil().max(1.0) as usize;
                let h = span / cu(n_sub);
                for _ in 0..n_sub {
                    state = step(&state, machine, exciter, &thev, h)?;
                }
            }
            state.t = seg_end;
            // Apply every change scheduled at this instant.
            let mut changed = false;
            while next_change < sched.len() && sched[next_change].0 <= seg_end {
                match sched[next_change].1 {
                    NetChange::FaultOn => fault = Some(c(FAULT_SHUNT_PU)),
                    NetChange::FaultOff => fault = None,
                    NetChange::TripLine => lines = lines.saturating_sub(1),
                    NetChange::RecloseLine => {
                        lines = (lines + 1).min(network.line_impedances.len())
                    }
                    NetChange::ScaleVref(f) => state.v_ref = state.v_ref * (F::one() + f),
                }
                changed = true;
                next_change += 1;
            }
            if changed {
                thev = Thevenin::from_network(network, z_base, lines, fault)?;
            }
            if seg_end == t_k {
                break;
            }
        }
        state.t = t_k;
        signals.push(signals_of(&state, machine, &thev));

        if state.delta_sync > pi && state.delta_sync > prev_delta {
            unstable_run += 1;
            if unstable_run >= unstable_limit {
                return Err(SimError::UnstableScenario { t: t_k.to_f64().unwrap_or(f64::NAN) });
            }
        } else {
            unstable_run = 0;
        }
        prev_delta = state.delta_sync;
    }

    Ok(SimTrace { signals, scenario_id: scenario_id.to_string(), dt_sample })
}

/// Convenience wrapper: solve the equilibrium, then run the scenario.
#[allow(clippy::too_many_arguments)]
pub fn simulate_scenario<F: Real>(
    machine: &MachineParams<F>,
    exciter: &ExciterParams<F>,
    network: &NetworkParams<F>,
    p_target: F,
    v_t_target: F,
    events: &[DisturbanceEvent<F>],
    t_end: F,
    dt_sample: F,
    scenario_id: &str,
) -> Result<(SimTrace<F>, SimState<F>), SimError> {
    let state = init_steady_state(machine, exciter, network, p_target, v_t_target)?;
    let trace =
        run_scenario(machine, exciter, network, &state, events, t_end, dt_sample, scenario_id)?;
    Ok((trace, state))
}
