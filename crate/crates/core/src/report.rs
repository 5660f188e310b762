//! Run report: plain-text rendering plus machine-readable CSV twins of the
//! correlation, regression, assessment and comparison tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::io::{fmt_g17, write_csv, FileError};
use crate::mlp::{ComparisonRow, SweepCell, SweepResult};
use crate::scalar::Real;
use crate::stats::{AssessmentReport, CorrelationEntry, ModelSpec, RegressionFit};

pub const CORRELATION_HEADER: &str = "feature,r,t_stat,p_value,n";
pub const REGRESSION_HEADER: &str = "model_id,feature,coef,p_value,vif,S,R2,R2_adj";
pub const ASSESSMENT_HEADER: &str = "std_residual,fit_value,theoretical_quantile";
pub const SWEEP_HEADER: &str =
    "model_id,hidden,restart,epochs,train_mse,val_mse,test_mse,test_mae,infer_time_s,status";
pub const COMPARISON_HEADER: &str = "model_id,ann_mae,ann_mse,hln,infer_flops,sr_mae,sr_mse";

/// Provenance block stamped into the report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunProvenance {
    pub seed: u64,
    pub config_hash: u64,
    pub pooled_rows: usize,
    pub flagged_rows: usize,
    pub stats_sample_rows: usize,
    pub mlp_rows: usize,
    pub split_sizes: (usize, usize, usize),
}

/// Everything the study reports; each number is recomputable from the
/// persisted datasets and the configuration.
#[derive(Debug, Clone)]
pub struct RunReport<F> {
    pub correlation: Vec<CorrelationEntry<F>>,
    pub fits: Vec<RegressionFit<F>>,
    pub assessments: Vec<(String, AssessmentReport<F>)>,
    pub forward_selection: Result<ModelSpec, String>,
    pub comparison: Vec<ComparisonRow<F>>,
    pub provenance: RunProvenance,
}

pub fn write_correlation_csv<F: Real>(
    path: &Path,
    entries: &[CorrelationEntry<F>],
    config_hash: u64,
) -> Result<(), FileError> {
    let rows = entries.iter().map(|e| {
        format!(
            "{},{},{},{},{}",
            e.feature,
            fmt_g17(e.r),
            fmt_g17(e.t_stat),
            fmt_g17(e.p_value),
            e.n
        )
    });
    write_csv(path, config_hash, CORRELATION_HEADER, rows)
}

pub fn write_regression_csv<F: Real>(
    path: &Path,
    fits: &[RegressionFit<F>],
    config_hash: u64,
) -> Result<(), FileError> {
    let mut rows = Vec::new();
    for fit in fits {
        rows.push(format!(
            "{},const,{},{},,{},{},{}",
            fit.model_id,
            fmt_g17(fit.beta0),
            fmt_g17(fit.p_values[0]),
            fmt_g17(fit.s),
            fmt_g17(fit.r2),
            fmt_g17(fit.r2_adj)
        ));
        for (j, name) in fit.feature_names.iter().enumerate() {
            rows.push(format!(
                "{},{},{},{},{},{},{},{}",
                fit.model_id,
                name,
                fmt_g17(fit.betas[j]),
                fmt_g17(fit.p_values[j + 1]),
                fmt_g17(fit.vif[j]),
                fmt_g17(fit.s),
                fmt_g17(fit.r2),
                fmt_g17(fit.r2_adj)
            ));
        }
    }
    write_csv(path, config_hash, REGRESSION_HEADER, rows)
}

/// Assessment rows ordered by standardized residual so the file serves the
/// residual-vs-fit scatter, the histogram and the normal plot at once.
pub fn write_assessment_csv<F: Real>(
    path: &Path,
    fit: &RegressionFit<F>,
    report: &AssessmentReport<F>,
    config_hash: u64,
) -> Result<(), FileError> {
    let mut order: Vec<usize> = (0..report.std_residuals.len()).collect();
    order.sort_by(|&a, &b| {
        report.std_residuals[a]
            .partial_cmp(&report.std_residuals[b])
            .expect("residuals comparable")
    });
    let rows = order.iter().enumerate().map(|(rank, &i)| {
        format!(
            "{},{},{}",
            fmt_g17(report.std_residuals[i]),
            fmt_g17(fit.fitted[i]),
            fmt_g17(report.normal_plot_points[rank].0)
        )
    });
    write_csv(path, config_hash, ASSESSMENT_HEADER, rows)
}

pub fn write_sweep_csv<F: Real>(
    path: &Path,
    model_id: &str,
    sweep: &SweepResult<F>,
    config_hash: u64,
) -> Result<(), FileError> {
    let rows = sweep.cells.iter().map(|cell: &SweepCell<F>| match &cell.outcome {
        Ok(r) => {
            let (_, th) = r.net.target_scale;
            let train_mse = r
                .train_sse_history
                .last()
                .map(|&sse| fmt_g17(sse * th * th))
                .unwrap_or_default();
            let val_mse = r.val_mse_history.last().map(|&v| fmt_g17(v)).unwrap_or_default();
            format!(
                "{},{},{},{},{},{},{},{},{},ok",
                model_id,
                cell.hidden,
                cell.restart,
                r.epochs_run,
                train_mse,
                val_mse,
                fmt_g17(r.mse),
                fmt_g17(r.mae),
                fmt_g17(r.infer_time),
            )
        }
        Err(msg) => format!(
            "{},{},{},,,,,,,failed: {}",
            model_id,
            cell.hidden,
            cell.restart,
            msg.replace(',', ";")
        ),
    });
    write_csv(path, config_hash, SWEEP_HEADER, rows)
}

/// The comparison CSV reports the deterministic inference-cost proxy; the
/// measured wall-clock time stays in the sweep log.
pub fn write_comparison_csv<F: Real>(
    path: &Path,
    rows: &[ComparisonRow<F>],
    config_hash: u64,
) -> Result<(), FileError> {
    let lines = rows.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{}",
            r.model_id,
            fmt_g17(r.ann_mae),
            fmt_g17(r.ann_mse),
            r.hln,
            r.infer_flops,
            fmt_g17(r.sr_mae),
            fmt_g17(r.sr_mse)
        )
    });
    write_csv(path, config_hash, COMPARISON_HEADER, lines)
}

fn fnum<F: Real>(x: F) -> String {
    let v = x.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-4 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

/// Plain-text rendering with aligned columns. Test errors are reported in
/// original per-unit target units.
pub fn render_text<F: Real>(report: &RunReport<F>) -> String {
    let mut s = String::new();
    let p = &report.provenance;
    let _ = writeln!(s, "excitation feature selection run report");
    let _ = writeln!(s, "=======================================");
    let _ = writeln!(s, "config = {:016x}  seed = {}", p.config_hash, p.seed);
    let _ = writeln!(
        s,
        "pooled rows = {} (flagged {})  stats sample = {}  ann rows = {} (train/val/test = {}/{}/{})",
        p.pooled_rows,
        p.flagged_rows,
        p.stats_sample_rows,
        p.mlp_rows,
        p.split_sizes.0,
        p.split_sizes.1,
        p.split_sizes.2
    );
    let _ = writeln!(s);

    let _ = writeln!(s, "Correlation with excitation voltage Vf");
    let _ = writeln!(s, "{:<8} {:>9} {:>9} {:>12} {:>5}", "feature", "r", "t", "p", "n");
    for e in &report.correlation {
        let _ = writeln!(
            s,
            "{:<8} {:>9} {:>9} {:>12} {:>5}",
            e.feature,
            fnum(e.r),
            fnum(e.t_stat),
            fnum(e.p_value),
            e.n
        );
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "Candidate regression models");
    let _ = writeln!(
        s,
        "{:<5} {:<18} {:>10} {:>10} {:>8} {:>9} {:>8} {:>8}",
        "model", "term", "coef", "p", "VIF", "S", "R2", "R2adj"
    );
    for fit in &report.fits {
        let _ = writeln!(
            s,
            "{:<5} {:<18} {:>10} {:>10} {:>8} {:>9} {:>8} {:>8}",
            fit.model_id,
            "const",
            fnum(fit.beta0),
            fnum(fit.p_values[0]),
            "-",
            fnum(fit.s),
            fnum(fit.r2),
            fnum(fit.r2_adj)
        );
        for (j, name) in fit.feature_names.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:<5} {:<18} {:>10} {:>10} {:>8} {:>9} {:>8} {:>8}",
                "",
                name,
                fnum(fit.betas[j]),
                fnum(fit.p_values[j + 1]),
                fnum(fit.vif[j]),
                "",
                "",
                ""
            );
        }
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "Residual assessment (std residuals within +/-2)");
    for (id, a) in &report.assessments {
        let _ = writeln!(
            s,
            "{:<5} coverage = {}  ({})",
            id,
            fnum(a.coverage_pm2),
            if a.passes_95 { "passes >= 95%" } else { "fails < 95%" }
        );
    }
    let _ = writeln!(s);

    match &report.forward_selection {
        Ok(model) => {
            let _ = writeln!(s, "Forward selection: {}", model.features.join(" -> "));
        }
        Err(msg) => {
            let _ = writeln!(s, "Forward selection: {msg}");
        }
    }
    let _ = writeln!(s);

    if !report.comparison.is_empty() {
        let _ = writeln!(s, "ANN vs statistical regression (test rows)");
        let _ = writeln!(
            s,
            "{:<6} {:>9} {:>9} {:>5} {:>11} {:>9} {:>9}",
            "model", "ANN MAE", "ANN MSE", "HLN", "fwd flops", "SR MAE", "SR MSE"
        );
        for r in &report.comparison {
            let _ = writeln!(
                s,
                "{:<6} {:>9} {:>9} {:>5} {:>11} {:>9} {:>9}",
                r.model_id,
                fnum(r.ann_mae),
                fnum(r.ann_mse),
                r.hln,
                r.infer_flops,
                fnum(r.sr_mae),
                fnum(r.sr_mse)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnum_ranges() {
        assert_eq!(fnum(0.0), "0");
        assert_eq!(fnum(0.587), "0.5870");
        assert_eq!(fnum(7.4e-6), "7.400e-6");
        assert_eq!(fnum(150e6), "1.500e8");
    }
}
