use exfl_core::sim::{init_steady_state, run_scenario, DisturbanceEvent};
use exfl_core::PipelineConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let damping: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2.0);
    let p: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.8);
    let open_circuit = args.get(3).map(|s| s == "oc").unwrap_or(false);
    let trip = args.get(4).map(|s| s == "trip").unwrap_or(false);

    let mut cfg: PipelineConfig = PipelineConfig::default();
    cfg.machine.damping = damping;
    if open_circuit {
        cfg.machine.t_d0_p = 0.3;
        cfg.machine.t_d0_pp = 0.04;
        cfg.machine.t_q0_pp = 0.031;
    }
    let state = init_steady_state(&cfg.machine, &cfg.exciter, &cfg.network, p, 1.0).unwrap();
    let events = if trip {
        vec![DisturbanceEvent::fault_cleared_by_trip(1.0, 0.12)]
    } else {
        vec![DisturbanceEvent::fault_self_clearing(1.0, 0.12)]
    };
    let trace = match run_scenario(&cfg.machine, &cfg.exciter, &cfg.network, &state, &events, 12.0, 0.005, "f") {
        Ok(t) => t,
        Err(e) => { println!("D={damping} P={p} oc={open_circuit} trip={trip}: FAILED {e}"); return; }
    };
    let pre = trace.signals[0];
    let vt_band = 0.02 * pre.v_t;
    let d_band = 0.02 * pre.delta.abs();
    let mut t_v = f64::NAN;
    let mut t_d = f64::NAN;
    for s in trace.signals.iter().rev() {
        if (s.v_t - pre.v_t).abs() > vt_band { break; }
        t_v = s.t;
    }
    for s in trace.signals.iter().rev() {
        if (s.delta - pre.delta).abs() > d_band { break; }
        t_d = s.t;
    }
    let d_max = trace.signals.iter().map(|s| s.delta).fold(f64::MIN, f64::max);
    println!(
        "D={damping} P={p} oc={open_circuit} trip={trip}: Vt settles {t_v:.2}  delta settles {t_d:.2} (deadline 6.12)  max_delta={d_max:.2}  end_omega={:+.1e}",
        trace.signals.last().unwrap().omega - 1.0
    );
}
