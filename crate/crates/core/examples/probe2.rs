//! Composition experiments (scratch, not part of the deliverable).

use exfl_core::config::{PipelineConfig as GenCfg, RawConfig};
use exfl_core::dataset::{pool_scenarios, stratified_subsample, QrefPolicy, FEATURE_NAMES};
use exfl_core::sim::{init_steady_state, run_scenario};
use exfl_core::stats::{assess, correlation_table, enumerate_paper_models, forward_select, ols_fit};
use exfl_core::PipelineConfig;

fn run(cfg: &PipelineConfig, label: &str) {
    let mut traces = Vec::new();
    let mut vrefs = Vec::new();
    for sc in &cfg.scenarios {
        let state =
            init_steady_state(&cfg.machine, &cfg.exciter, &cfg.network, sc.p_target, sc.v_t_target)
                .unwrap();
        match run_scenario(&cfg.machine, &cfg.exciter, &cfg.network, &state, &sc.events(),
                           cfg.t_end, cfg.dt_sample, &sc.id) {
            Ok(t) => { traces.push(t); vrefs.push(state.v_ref); }
            Err(e) => { println!("{label}: scenario {} FAILED: {e}", sc.id); return; }
        }
    }
    let pool = pool_scenarios(&traces, &vrefs, QrefPolicy::ClampAndFlag).unwrap();
    let corr = correlation_table(&pool, &FEATURE_NAMES).unwrap();
    print!("{label}: pool ");
    for e in &corr {
        print!("{}={:+.2} ", e.feature, e.r);
    }
    // Vf spread
    let vf: Vec<f64> = pool.rows.iter().map(|r| r.vf).collect();
    let m = vf.iter().sum::<f64>() / vf.len() as f64;
    let sd = (vf.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vf.len() as f64).sqrt();
    println!("| sd(Vf)={sd:.3} flagged={}", pool.provenance.flagged_rows);
    let mut ok5 = 0;
    let mut ok6 = 0;
    let mut okf = 0;
    let mut okc = 0;
    for seed in 1..=10u64 {
        let sample = stratified_subsample(&pool.without_flagged(), 50, seed).unwrap();
        let corr = correlation_table(&sample, &FEATURE_NAMES).unwrap();
        let get = |n: &str| corr.iter().find(|e| e.feature == n).unwrap();
        let m7 = ols_fit(&sample, &enumerate_paper_models()[6]).unwrap();
        let m8 = ols_fit(&sample, &enumerate_paper_models()[7]).unwrap();
        let a8 = assess(&m8).unwrap();
        let fwd = forward_select(&sample, &FEATURE_NAMES, 0.05, 10.0)
            .map(|m| m.features[0].clone())
            .unwrap_or_else(|_| "-".into());
        let c5 = get("dVq").r.abs() > get("dVt").r.abs() && get("omega").p_value > 0.05;
        let c6 = m8.r2 > m7.r2
            && m8.s < m7.s
            && m7.vif.iter().all(|v| *v < 10.0)
            && m8.vif.iter().all(|v| *v < 10.0);
        if c5 { ok5 += 1; }
        if c6 { ok6 += 1; }
        if fwd == "dVq" { okf += 1; }
        if a8.passes_95 { okc += 1; }
        if seed <= 3 {
            println!(
                "  seed {seed}: dVq={:+.2} dVt={:+.2} P={:+.2} Q={:+.2} p(om)={:.2} | M7 R2={:.2} vif={:.1} | M8 R2={:.2} vif={:.1} cov={:.2} | fwd={fwd}",
                get("dVq").r, get("dVt").r, get("P").r, get("Q").r, get("omega").p_value,
                m7.r2, m7.vif[0], m8.r2, m8.vif[0], a8.coverage_pm2
            );
        }
    }
    println!("  over 10 seeds: c5={ok5}/10 c6={ok6}/10 fwd-dVq={okf}/10 cov95={okc}/10");
}

fn main() {
    let variants: Vec<(&str, &str)> = vec![
        ("A: faults+trips only", "scenarios = fault_self_clearing, fault_cleared_by_trip, line_trip, line_reclose\n"),
        ("B: A + heavier trips", "scenarios = fault_self_clearing, fault_cleared_by_trip, line_trip, line_reclose\nscenario.line_trip.p_target = 0.7\nscenario.line_reclose.p_target = 0.7\n"),
        ("C: all six (additive step)", ""),
        ("D: C, faults at 2 ops", "scenario.vref_step_up.p_target = 0.4\nscenario.vref_step_down.p_target = 0.65\n"),
    ];
    for (label, overrides) in variants {
        let cfg: PipelineConfig =
            GenCfg::from_raw(RawConfig::parse(overrides).unwrap()).unwrap();
        run(&cfg, label);
    }
}
