//! Network-growing sweep and the ANN-vs-regression model comparison.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::scalar::{cu, Real};
use crate::stats::{ols_fit, predict, ModelSpec};

use super::net::{mix_seed, Patterns};
use super::train::{train, TrainConfig, TrainResult};
use super::MlpError;

/// Outcome of one (hidden size, restart) cell. Failures are recorded, not
/// fatal; the sweep continues.
#[derive(Debug, Clone)]
pub struct SweepCell<F> {
    pub hidden: usize,
    pub restart: usize,
    pub outcome: Result<TrainResult<F>, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult<F> {
    /// Every cell, ordered by (hidden size, restart index).
    pub cells: Vec<SweepCell<F>>,
    /// The cell with minimum test MSE; ties break by MAE, then smaller hidden
    /// size, then smaller restart index.
    pub best: TrainResult<F>,
}

fn better<F: Real>(a: &TrainResult<F>, b: &TrainResult<F>) -> bool {
    let key = |r: &TrainResult<F>| (r.mse, r.mae, r.hidden_size, r.restart_index);
    let (amse, amae, ah, ar) = key(a);
    let (bmse, bmae, bh, br) = key(b);
    // NaN metrics lose against anything finite.
    if amse != bmse {
        return amse < bmse || bmse.is_nan();
    }
    if amae != bmae {
        return amae < bmae || bmae.is_nan();
    }
    (ah, ar) < (bh, br)
}

/// Trains every (hidden size, restart) pair with per-cell seeds derived from
/// the base seed; the result is independent of execution order, so cells may
/// run concurrently.
pub fn grow_sweep<F: Real>(
    splits: (&Patterns<F>, &Patterns<F>, &Patterns<F>),
    h_range: (usize, usize),
    restarts: usize,
    base: &TrainConfig<F>,
    parallel: bool,
) -> Result<SweepResult<F>, MlpError> {
    let (h_lo, h_hi) = h_range;
    if h_lo < 1 || h_lo > h_hi {
        return Err(MlpError::InvalidConfig(format!("empty hidden range {h_lo}..{h_hi}")));
    }
    if restarts < 1 {
        return Err(MlpError::InvalidConfig("need at least one restart".into()));
    }
    let (train_set, val_set, test_set) = splits;

    let mut keys = Vec::new();
    for h in h_lo..=h_hi {
        for r in 0..restarts {
            keys.push((h, r));
        }
    }

    let run_cell = |&(h, r): &(usize, usize)| -> SweepCell<F> {
        let cfg = TrainConfig { seed: mix_seed(base.seed, h as u64, r as u64), ..*base };
        let outcome = match train(h, train_set, val_set, test_set, &cfg) {
            Ok(mut res) => {
                res.restart_index = r;
                Ok(res)
            }
            Err(e) => Err(e.to_string()),
        };
        SweepCell { hidden: h, restart: r, outcome }
    };

    let cells: Vec<SweepCell<F>> = if parallel {
        keys.par_iter().map(run_cell).collect()
    } else {
        keys.iter().map(run_cell).collect()
    };

    let mut best: Option<&TrainResult<F>> = None;
    for cell in &cells {
        if let Ok(res) = &cell.outcome {
            if best.map_or(true, |b| better(res, b)) {
                best = Some(res);
            }
        }
    }
    let best = best.cloned().ok_or(MlpError::SweepEmpty)?;
    Ok(SweepResult { cells, best })
}

/// Multiply-add count of one forward pass; a deterministic stand-in for the
/// wall-clock inference time in reproducible reports.
pub fn infer_flops(n_in: usize, n_hidden: usize) -> usize {
    2 * (n_hidden * (n_in + 1) + n_hidden + 1)
}

/// One line of the ANN-vs-statistical-regression comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow<F> {
    pub model_id: String,
    pub ann_mae: F,
    pub ann_mse: F,
    /// Hidden layer neurons of the selected network.
    pub hln: usize,
    /// Deterministic inference cost of the selected network.
    pub infer_flops: usize,
    /// Measured mean seconds per forward pass (wall-clock, non-reproducible).
    pub infer_time_s: F,
    /// OLS fit on the training rows evaluated on the same test rows.
    pub sr_mae: F,
    pub sr_mse: F,
}

/// Sweeps every model and pairs the winning network's test errors with the
/// OLS baseline on identical test rows.
#[allow(clippy::type_complexity)]
pub fn compare_models<F: Real>(
    models: &[ModelSpec],
    train_ds: &Dataset<F>,
    val_ds: &Dataset<F>,
    test_ds: &Dataset<F>,
    h_range: (usize, usize),
    restarts: usize,
    base: &TrainConfig<F>,
    parallel: bool,
) -> Result<(Vec<ComparisonRow<F>>, Vec<(String, SweepResult<F>)>), MlpError> {
    assert!(models.len() >= 2, "comparison needs at least two models");
    let mut rows = Vec::with_capacity(models.len());
    let mut sweeps = Vec::with_capacity(models.len());
    for model in models {
        let train_p = Patterns::from_dataset(train_ds, &model.features).map_err(|e| {
            MlpError::InvalidConfig(format!("model {}: {e}", model.id))
        })?;
        let val_p = Patterns::from_dataset(val_ds, &model.features)
            .map_err(|e| MlpError::InvalidConfig(format!("model {}: {e}", model.id)))?;
        let test_p = Patterns::from_dataset(test_ds, &model.features)
            .map_err(|e| MlpError::InvalidConfig(format!("model {}: {e}", model.id)))?;

        let sweep = grow_sweep((&train_p, &val_p, &test_p), h_range, restarts, base, parallel)?;

        let fit = ols_fit(train_ds, model)?;
        let test_cols: Vec<Vec<F>> = model
            .features
            .iter()
            .map(|f| test_ds.column(f))
            .collect::<Result<_, _>>()
            .map_err(crate::stats::StatsError::from)?;
        let predictions = predict(&fit, &test_cols);
        let mut se = F::zero();
        let mut ae = F::zero();
        for (&y, &yhat) in test_p.targets.iter().zip(&predictions) {
            let e = y - yhat;
            se = se + e * e;
            ae = ae + e.abs();
        }
        let n = cu::<F>(test_p.targets.len());

        rows.push(ComparisonRow {
            model_id: model.id.clone(),
            ann_mae: sweep.best.mae,
            ann_mse: sweep.best.mse,
            hln: sweep.best.hidden_size,
            infer_flops: infer_flops(model.features.len(), sweep.best.hidden_size),
            infer_time_s: sweep.best.infer_time,
            sr_mae: ae / n,
            sr_mse: se / n,
        });
        sweeps.push((model.id.clone(), sweep));
    }
    Ok((rows, sweeps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_patterns(n: usize, lo: f64, hi: f64) -> Patterns<f64> {
        let inputs: Vec<Vec<f64>> =
            (0..n).map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64]).collect();
        let targets = inputs.iter().map(|x| 2.0 * x[0] + 1.0).collect();
        Patterns { inputs, targets }
    }

    #[test]
    fn single_cell_sweep_returns_that_cell_as_best() {
        let p = linear_patterns(30, -1.0, 1.0);
        let cfg = TrainConfig { seed: 1, max_epochs: 50, ..TrainConfig::default() };
        let sweep = grow_sweep((&p, &p, &p), (1, 1), 1, &cfg, false).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        assert_eq!(sweep.best.hidden_size, 1);
        assert_eq!(sweep.best.restart_index, 0);
    }

    #[test]
    fn sweep_is_scheduling_invariant() {
        let p = linear_patterns(24, -1.0, 1.0);
        let cfg = TrainConfig { seed: 9, max_epochs: 20, ..TrainConfig::default() };
        let serial = grow_sweep((&p, &p, &p), (1, 3), 2, &cfg, false).unwrap();
        let concurrent = grow_sweep((&p, &p, &p), (1, 3), 2, &cfg, true).unwrap();
        assert_eq!(serial.cells.len(), concurrent.cells.len());
        for (a, b) in serial.cells.iter().zip(&concurrent.cells) {
            assert_eq!((a.hidden, a.restart), (b.hidden, b.restart));
            let (ra, rb) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
            // Everything except the wall-clock measurement is bit-identical.
            assert_eq!(ra.net, rb.net);
            assert_eq!(ra.mse.to_bits(), rb.mse.to_bits());
            assert_eq!(ra.mae.to_bits(), rb.mae.to_bits());
            assert_eq!(ra.epochs_run, rb.epochs_run);
        }
        assert_eq!(serial.best.net, concurrent.best.net);
    }

    #[test]
    fn noise_free_linear_sweep_floors_near_zero() {
        let p = linear_patterns(40, -1.0, 1.0);
        let cfg = TrainConfig { seed: 4, max_epochs: 60, ..TrainConfig::default() };
        let sweep = grow_sweep((&p, &p, &p), (1, 4), 2, &cfg, true).unwrap();
        assert!(sweep.best.mse < 1e-5, "best MSE = {:e}", sweep.best.mse);
    }

    #[test]
    fn empty_hidden_range_rejected() {
        let p = linear_patterns(10, -1.0, 1.0);
        let cfg = TrainConfig::default();
        assert!(matches!(
            grow_sweep((&p, &p, &p), (5, 3), 1, &cfg, false),
            Err(MlpError::InvalidConfig(_))
        ));
    }

    #[test]
    fn flops_proxy_grows_with_hidden_size() {
        assert!(infer_flops(2, 12) < infer_flops(2, 23));
        assert_eq!(infer_flops(2, 1), 2 * (3 + 2));
    }
}
