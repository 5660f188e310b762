//! Orchestration: simulate -> pool -> sample -> analyze -> train -> report,
//! each stage persisting its artifacts so a rerun with the same config and
//! seed reproduces every CSV byte for byte.

use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::dataset::{pool_scenarios, split, stratified_subsample, Dataset, QrefPolicy,
    FEATURE_NAMES};
use crate::io::{write_dataset_csv, write_net, write_trace_csv, FileError};
use crate::mlp::{compare_models, mix_seed, ComparisonRow, SweepResult, TrainConfig};
use crate::report::{
    render_text, write_assessment_csv, write_comparison_csv, write_correlation_csv,
    write_regression_csv, write_sweep_csv, RunProvenance, RunReport,
};
use crate::scalar::Real;
use crate::sim::{init_steady_state, run_scenario, SimTrace};
use crate::stats::{
    assess, correlation_table, enumerate_paper_models, forward_select, ols_fit,
    AssessmentReport, CorrelationEntry, RegressionFit, StatsError,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("stage '{stage}': {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn stage(stage: &'static str, err: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, message: err.to_string() }
    }

    pub fn stage_name(&self) -> &'static str {
        match self {
            PipelineError::Stage { stage, .. } => stage,
        }
    }
}

fn file_err(stage: &'static str) -> impl Fn(FileError) -> PipelineError {
    move |e| PipelineError::stage(stage, e)
}

/// Output file layout under the run directory.
pub struct OutPaths {
    pub root: PathBuf,
}

impl OutPaths {
    pub fn new(root: &Path) -> Self {
        OutPaths { root: root.to_path_buf() }
    }

    pub fn trace(&self, id: &str) -> PathBuf {
        self.root.join("traces").join(format!("{id}.csv"))
    }

    pub fn dataset_full(&self) -> PathBuf {
        self.root.join("dataset_full.csv")
    }

    pub fn dataset_sample(&self) -> PathBuf {
        self.root.join("dataset_stats_sample.csv")
    }

    pub fn correlation(&self) -> PathBuf {
        self.root.join("correlation.csv")
    }

    pub fn regression(&self) -> PathBuf {
        self.root.join("regression_models.csv")
    }

    pub fn assessment(&self, model_id: &str) -> PathBuf {
        self.root.join(format!("assessment_{model_id}.csv"))
    }

    pub fn sweep(&self, model_id: &str) -> PathBuf {
        self.root.join(format!("sweep_{model_id}.csv"))
    }

    pub fn net(&self, model_id: &str) -> PathBuf {
        self.root.join(format!("net_{model_id}.txt"))
    }

    pub fn comparison(&self) -> PathBuf {
        self.root.join("comparison.csv")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.root.join("report.txt")
    }

    pub fn config_echo(&self) -> PathBuf {
        self.root.join("config_effective.txt")
    }
}

/// Derived seeds for the randomized stages, all rooted in the config seed.
pub fn stats_sample_seed(seed: u64) -> u64 {
    mix_seed(seed, 1, 0)
}

pub fn split_seed(seed: u64) -> u64 {
    mix_seed(seed, 2, 0)
}

pub fn mlp_sample_seed(seed: u64) -> u64 {
    mix_seed(seed, 3, 0)
}

/// Simulates every configured scenario and persists the traces.
pub fn stage_simulate<F: Real>(
    cfg: &PipelineConfig<F>,
    out: &OutPaths,
) -> Result<Vec<(SimTrace<F>, F)>, PipelineError> {
    let hash = cfg.hash();
    let mut traces = Vec::with_capacity(cfg.scenarios.len());
    for sc in &cfg.scenarios {
        let state = init_steady_state(
            &cfg.machine,
            &cfg.exciter,
            &cfg.network,
            sc.p_target,
            sc.v_t_target,
        )
        .map_err(|e| PipelineError::stage("simulate", format!("scenario {}: {e}", sc.id)))?;
        let trace = run_scenario(
            &cfg.machine,
            &cfg.exciter,
            &cfg.network,
            &state,
            &sc.events(),
            cfg.t_end,
            cfg.dt_sample,
            &sc.id,
        )
        .map_err(|e| PipelineError::stage("simulate", format!("scenario {}: {e}", sc.id)))?;
        write_trace_csv(&out.trace(&sc.id), &trace, hash).map_err(file_err("simulate"))?;
        traces.push((trace, state.v_ref));
    }
    Ok(traces)
}

/// Pools every trace into the full feature dataset and persists it.
pub fn stage_pool<F: Real>(
    cfg: &PipelineConfig<F>,
    traces: &[(SimTrace<F>, F)],
    out: &OutPaths,
) -> Result<Dataset<F>, PipelineError> {
    let ts: Vec<SimTrace<F>> = traces.iter().map(|(t, _)| t.clone()).collect();
    let vrefs: Vec<F> = traces.iter().map(|(_, v)| *v).collect();
    let pool = pool_scenarios(&ts, &vrefs, QrefPolicy::ClampAndFlag)
        .map_err(|e| PipelineError::stage("pool", e))?;
    write_dataset_csv(&out.dataset_full(), &pool, cfg.hash()).map_err(file_err("pool"))?;
    Ok(pool)
}

/// Draws the statistics sample (flagged rows excluded) and persists it.
pub fn stage_sample<F: Real>(
    cfg: &PipelineConfig<F>,
    pool: &Dataset<F>,
    out: &OutPaths,
) -> Result<Dataset<F>, PipelineError> {
    let clean = pool.without_flagged();
    let sample = stratified_subsample(&clean, cfg.stats_sample_n, stats_sample_seed(cfg.seed))
        .map_err(|e| PipelineError::stage("sample", e))?;
    write_dataset_csv(&out.dataset_sample(), &sample, cfg.hash()).map_err(file_err("sample"))?;
    Ok(sample)
}

/// Statistical analysis products of one dataset.
pub struct Analysis<F> {
    pub correlation: Vec<CorrelationEntry<F>>,
    pub fits: Vec<RegressionFit<F>>,
    pub assessments: Vec<(String, AssessmentReport<F>)>,
    pub forward_selection: Result<crate::stats::ModelSpec, String>,
}

/// Correlation screening, the eight fixed models with diagnostics, residual
/// assessments and forward selection; persists the table CSVs.
pub fn stage_analyze<F: Real>(
    cfg: &PipelineConfig<F>,
    sample: &Dataset<F>,
    out: &OutPaths,
) -> Result<Analysis<F>, PipelineError> {
    let hash = cfg.hash();
    let correlation = correlation_table(sample, &FEATURE_NAMES)
        .map_err(|e| PipelineError::stage("analyze", e))?;
    write_correlation_csv(&out.correlation(), &correlation, hash)
        .map_err(file_err("analyze"))?;

    let mut fits = Vec::new();
    let mut assessments = Vec::new();
    for model in enumerate_paper_models() {
        let fit = ols_fit(sample, &model).map_err(|e| {
            PipelineError::stage("analyze", format!("model {}: {e}", model.id))
        })?;
        let report = assess(&fit)
            .map_err(|e| PipelineError::stage("analyze", format!("model {}: {e}", model.id)))?;
        write_assessment_csv(&out.assessment(&model.id), &fit, &report, hash)
            .map_err(file_err("analyze"))?;
        assessments.push((model.id.clone(), report));
        fits.push(fit);
    }
    write_regression_csv(&out.regression(), &fits, hash).map_err(file_err("analyze"))?;

    let forward_selection =
        match forward_select(sample, &FEATURE_NAMES, cfg.alpha, cfg.vif_cap) {
            Ok(m) => Ok(m),
            Err(e @ StatsError::NoFeatureQualifies) => Err(e.to_string()),
            Err(e) => return Err(PipelineError::stage("analyze", e)),
        };

    Ok(Analysis { correlation, fits, assessments, forward_selection })
}

/// ANN stage products.
pub struct Training<F> {
    pub comparison: Vec<ComparisonRow<F>>,
    pub sweeps: Vec<(String, SweepResult<F>)>,
    pub mlp_rows: usize,
    pub split_sizes: (usize, usize, usize),
}

/// Splits the ANN dataset, sweeps every selected model and persists the
/// sweep logs, best networks and the comparison table.
pub fn stage_train<F: Real>(
    cfg: &PipelineConfig<F>,
    pool: &Dataset<F>,
    out: &OutPaths,
) -> Result<Training<F>, PipelineError> {
    let hash = cfg.hash();
    let mlp_data = match cfg.mlp_sample_n {
        Some(n) => stratified_subsample(pool, n, mlp_sample_seed(cfg.seed))
            .map_err(|e| PipelineError::stage("train", e))?,
        None => pool.clone(),
    };
    let (train_ds, val_ds, test_ds) = split(&mlp_data, &cfg.split_spec(split_seed(cfg.seed)))
        .map_err(|e| PipelineError::stage("train", e))?;

    let models = cfg.model_specs();
    let train_cfg = TrainConfig { seed: cfg.seed, ..cfg.train };
    let (comparison, sweeps) = compare_models(
        &models,
        &train_ds,
        &val_ds,
        &test_ds,
        cfg.hidden_range,
        cfg.restarts,
        &train_cfg,
        cfg.parallel_sweep,
    )
    .map_err(|e| PipelineError::stage("train", e))?;

    for (model_id, sweep) in &sweeps {
        write_sweep_csv(&out.sweep(model_id), model_id, sweep, hash)
            .map_err(file_err("train"))?;
        write_net(&out.net(model_id), &sweep.best.net).map_err(file_err("train"))?;
    }
    write_comparison_csv(&out.comparison(), &comparison, hash).map_err(file_err("train"))?;

    Ok(Training {
        comparison,
        sweeps,
        mlp_rows: mlp_data.len(),
        split_sizes: (train_ds.len(), val_ds.len(), test_ds.len()),
    })
}

/// Runs every stage in order and writes `report.txt` last. Stage failures
/// abort with the stage name; artifacts persisted before the failure remain.
pub fn run_pipeline<F: Real>(
    cfg: &PipelineConfig<F>,
    out_dir: &Path,
) -> Result<RunReport<F>, PipelineError> {
    cfg.validate().map_err(|e| PipelineError::stage("config", e))?;
    let out = OutPaths::new(out_dir);
    std::fs::create_dir_all(&out.root)
        .map_err(|e| PipelineError::stage("config", format!("{}: {e}", out.root.display())))?;
    std::fs::write(out.config_echo(), cfg.canonical_lines())
        .map_err(|e| PipelineError::stage("config", e))?;

    let traces = stage_simulate(cfg, &out)?;
    let pool = stage_pool(cfg, &traces, &out)?;
    let sample = stage_sample(cfg, &pool, &out)?;
    let analysis = stage_analyze(cfg, &sample, &out)?;
    let training = stage_train(cfg, &pool, &out)?;

    let report = RunReport {
        correlation: analysis.correlation,
        fits: analysis.fits,
        assessments: analysis.assessments,
        forward_selection: analysis.forward_selection,
        comparison: training.comparison,
        provenance: RunProvenance {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            pooled_rows: pool.len(),
            flagged_rows: pool.provenance.flagged_rows,
            stats_sample_rows: sample.len(),
            mlp_rows: training.mlp_rows,
            split_sizes: training.split_sizes,
        },
    };
    std::fs::write(out.report_txt(), render_text(&report))
        .map_err(|e| PipelineError::stage("report", e))?;
    Ok(report)
}
