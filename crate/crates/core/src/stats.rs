//! Filter-technique statistics: Pearson correlation with significance,
//! OLS regression diagnostics (R-squared, adjusted R-squared, residual
//! standard error, VIF), residual assessment against the +/-2 band, the
//! eight fixed candidate feature models and greedy forward selection.

use crate::dataset::{DataError, Dataset, TARGET_NAME};
use crate::linalg::{lstsq_qr, LinalgError, Mat};
use crate::prob::{normal_inv_cdf, student_t_two_tailed};
use crate::scalar::{c, cu, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("sequences differ in length")]
    LengthMismatch,
    #[error("series '{0}' has zero variance")]
    ConstantSeries(String),
    #[error("need at least {need} samples, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("rank-deficient design (collinear predictors)")]
    RankDeficient,
    #[error("no candidate feature qualifies at the given gates")]
    NoFeatureQualifies,
    #[error(transparent)]
    Data(#[from] DataError),
}

impl From<LinalgError> for StatsError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient(_) | LinalgError::NotPositiveDefinite => {
                StatsError::RankDeficient
            }
        }
    }
}

/// Pearson correlation of one feature against the target, with significance.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry<F> {
    pub feature: String,
    pub r: F,
    pub t_stat: F,
    pub p_value: F,
    pub n: usize,
}

/// A candidate feature subset regressed against the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: String,
    pub features: Vec<String>,
    pub target: String,
}

impl ModelSpec {
    pub fn new(id: &str, features: &[&str]) -> Self {
        ModelSpec {
            id: id.to_string(),
            features: features.iter().map(|s| s.to_string()).collect(),
            target: TARGET_NAME.to_string(),
        }
    }
}

/// OLS fit with the diagnostics the model tables report.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit<F> {
    pub model_id: String,
    pub feature_names: Vec<String>,
    pub beta0: F,
    pub betas: Vec<F>,
    /// Standard errors, t statistics and two-tailed p-values per coefficient,
    /// intercept first.
    pub se: Vec<F>,
    pub t_stats: Vec<F>,
    pub p_values: Vec<F>,
    pub r2: F,
    pub r2_adj: F,
    /// Residual standard error, sqrt(SS_res / (n - p - 1)).
    pub s: F,
    /// Variance inflation factor per feature.
    pub vif: Vec<F>,
    pub residuals: Vec<F>,
    pub fitted: Vec<F>,
    pub n: usize,
    pub p: usize,
}

/// Residual assessment against the +/-2 standardized band.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentReport<F> {
    pub std_residuals: Vec<F>,
    pub coverage_pm2: F,
    pub passes_95: bool,
    /// Bin edges (len = counts.len() + 1) of the width-0.5 histogram.
    pub histogram_edges: Vec<F>,
    pub histogram_counts: Vec<usize>,
    /// (theoretical normal quantile, ordered standardized residual) pairs.
    pub normal_plot_points: Vec<(F, F)>,
}

/// Product-moment correlation coefficient.
pub fn pearson<F: Real>(x: &[F], y: &[F]) -> Result<F, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples { need: 3, have: n });
    }
    let nf = cu::<F>(n);
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / nf;
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    let mut syy = F::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == F::zero() {
        return Err(StatsError::ConstantSeries("x".into()));
    }
    if syy == F::zero() {
        return Err(StatsError::ConstantSeries("y".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// t statistic and two-tailed p-value of a correlation coefficient at sample
/// size `n`: t = r sqrt((n-2)/(1-r^2)) against Student-t with n-2 dof.
pub fn correlation_significance<F: Real>(r: F, n: usize) -> (F, F) {
    assert!(n >= 3, "need n >= 3");
    assert!(r.abs() <= F::one() + c(1e-12), "|r| must be <= 1");
    let one = F::one();
    let df = cu::<F>(n - 2);
    let denom = one - r * r;
    if denom <= F::zero() {
        let t = if r > F::zero() { F::infinity() } else { F::neg_infinity() };
        return (t, F::zero());
    }
    let t = r * (df / denom).sqrt();
    (t, student_t_two_tailed(t, df))
}

/// Correlation table of every listed feature against the target column.
pub fn correlation_table<F: Real>(
    data: &Dataset<F>,
    features: &[&str],
) -> Result<Vec<CorrelationEntry<F>>, StatsError> {
    let y = data.column(TARGET_NAME)?;
    let mut out = Vec::with_capacity(features.len());
    for name in features {
        let x = data.column(name)?;
        let r = pearson(&x, &y)?;
        let (t_stat, p_value) = correlation_significance(r, x.len());
        out.push(CorrelationEntry { feature: name.to_string(), r, t_stat, p_value, n: x.len() });
    }
    Ok(out)
}

/// OLS on raw columns; `ols_fit` is the dataset-facing wrapper.
pub fn ols_fit_columns<F: Real>(
    model_id: &str,
    feature_names: &[String],
    x_cols: &[Vec<F>],
    y: &[F],
) -> Result<RegressionFit<F>, StatsError> {
    let n = y.len();
    let p = x_cols.len();
    assert_eq!(feature_names.len(), p, "one name per predictor column");
    for col in x_cols {
        if col.len() != n {
            return Err(StatsError::LengthMismatch);
        }
    }
    if n <= p + 1 {
        return Err(StatsError::TooFewSamples { need: p + 2, have: n });
    }

    let mut design = Mat::zeros(n, p + 1);
    for i in 0..n {
        design.set(i, 0, F::one());
        for (j, col) in x_cols.iter().enumerate() {
            design.set(i, j + 1, col[i]);
        }
    }
    let lsq = lstsq_qr(&design, y)?;

    let fitted = design.mul_vec(&lsq.beta);
    let residuals: Vec<F> = y.iter().zip(&fitted).map(|(&yi, &fi)| yi - fi).collect();

    let nf = cu::<F>(n);
    let y_mean = y.iter().fold(F::zero(), |a, &b| a + b) / nf;
    let ss_res = residuals.iter().fold(F::zero(), |a, &e| a + e * e);
    let ss_tot = y.iter().fold(F::zero(), |a, &yi| a + (yi - y_mean) * (yi - y_mean));
    if ss_tot == F::zero() {
        return Err(StatsError::ConstantSeries(TARGET_NAME.into()));
    }

    let df = n - p - 1;
    let dff = cu::<F>(df);
    let one = F::one();
    let r2 = one - ss_res / ss_tot;
    let r2_adj = one - (one - r2) * cu::<F>(n - 1) / dff;
    let s2 = ss_res / dff;
    let s = s2.sqrt();

    let mut se = Vec::with_capacity(p + 1);
    let mut t_stats = Vec::with_capacity(p + 1);
    let mut p_values = Vec::with_capacity(p + 1);
    for j in 0..=p {
        let sej = (lsq.xtx_inv_diag[j] * s2).sqrt();
        let t = if sej > F::zero() {
            lsq.beta[j] / sej
        } else if lsq.beta[j] == F::zero() {
            F::zero()
        } else {
            F::infinity() * lsq.beta[j].signum()
        };
        se.push(sej);
        t_stats.push(t);
        p_values.push(student_t_two_tailed(t, dff));
    }

    let vif = vif_columns(feature_names, x_cols)?;

    Ok(RegressionFit {
        model_id: model_id.to_string(),
        feature_names: feature_names.to_vec(),
        beta0: lsq.beta[0],
        betas: lsq.beta[1..].to_vec(),
        se,
        t_stats,
        p_values,
        r2,
        r2_adj,
        s,
        vif,
        residuals,
        fitted,
        n,
        p,
    })
}

/// Fits the model's feature subset against the dataset's target.
pub fn ols_fit<F: Real>(
    data: &Dataset<F>,
    model: &ModelSpec,
) -> Result<RegressionFit<F>, StatsError> {
    let mut cols = Vec::with_capacity(model.features.len());
    for f in &model.features {
        cols.push(data.column(f)?);
    }
    let y = data.column(&model.target)?;
    ols_fit_columns(&model.id, &model.features, &cols, &y)
}

/// Predicts the target for new feature columns with a fitted model.
pub fn predict<F: Real>(fit: &RegressionFit<F>, x_cols: &[Vec<F>]) -> Vec<F> {
    assert_eq!(x_cols.len(), fit.betas.len());
    let n = x_cols.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let mut acc = fit.beta0;
            for (b, col) in fit.betas.iter().zip(x_cols) {
                acc = acc + *b * col[i];
            }
            acc
        })
        .collect()
}

/// Variance inflation factors on raw columns. A single feature reports 1 by
/// convention; a perfectly collinear auxiliary regression reports infinity.
pub fn vif_columns<F: Real>(
    names: &[String],
    x_cols: &[Vec<F>],
) -> Result<Vec<F>, StatsError> {
    let p = x_cols.len();
    assert_eq!(names.len(), p);
    if p <= 1 {
        return Ok(vec![F::one(); p]);
    }
    let n = x_cols[0].len();
    if n <= p {
        return Err(StatsError::TooFewSamples { need: p + 1, have: n });
    }

    let one = F::one();
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let others: Vec<Vec<F>> =
            (0..p).filter(|&k| k != j).map(|k| x_cols[k].clone()).collect();
        let other_names: Vec<String> =
            (0..p).filter(|&k| k != j).map(|k| names[k].clone()).collect();
        match ols_fit_columns("aux", &other_names, &others, &x_cols[j]) {
            Ok(aux) => {
                let denom = one - aux.r2;
                if denom <= c(1e-12) {
                    out.push(F::infinity());
                } else {
                    out.push(one / denom);
                }
            }
            Err(StatsError::RankDeficient) => out.push(F::infinity()),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// VIFs of a feature subset of the dataset.
pub fn vif<F: Real>(data: &Dataset<F>, features: &[String]) -> Result<Vec<F>, StatsError> {
    let mut cols = Vec::with_capacity(features.len());
    for f in features {
        cols.push(data.column(f)?);
    }
    vif_columns(features, &cols)
}

/// Standardized-residual assessment of a fit: coverage of the +/-2 band,
/// width-0.5 histogram and normal-probability plotting points at (i-0.5)/n.
pub fn assess<F: Real>(fit: &RegressionFit<F>) -> Result<AssessmentReport<F>, StatsError> {
    let n = fit.residuals.len();
    if n < 10 {
        return Err(StatsError::TooFewSamples { need: 10, have: n });
    }
    let std_residuals: Vec<F> = if fit.s > F::zero() {
        fit.residuals.iter().map(|&e| e / fit.s).collect()
    } else {
        // Perfect fit short-circuits to a trivially passing report.
        vec![F::zero(); n]
    };

    let two = c::<F>(2.0);
    let inside = std_residuals.iter().filter(|sr| sr.abs() <= two).count();
    let coverage_pm2 = cu::<F>(inside) / cu::<F>(n);
    let passes_95 = coverage_pm2 >= c(0.95);

    // Histogram over bins of width 0.5 spanning the residual range.
    let width = c::<F>(0.5);
    let min = std_residuals.iter().cloned().fold(F::infinity(), F::min);
    let max = std_residuals.iter().cloned().fold(F::neg_infinity(), F::max);
    let lo = (min / width).floor() * width;
    let hi_raw = (max / width).ceil() * width;
    let hi = if hi_raw > lo { hi_raw } else { lo + width };
    let n_bins = ((hi - lo) / width).round().to_f64().unwrap() as usize;
    let mut histogram_edges = Vec::with_capacity(n_bins + 1);
    for k in 0..=n_bins {
        histogram_edges.push(lo + cu::<F>(k) * width);
    }
    let mut histogram_counts = vec![0usize; n_bins];
    for sr in &std_residuals {
        let mut idx = ((*sr - lo) / width).floor().to_f64().unwrap() as usize;
        if idx >= n_bins {
            idx = n_bins - 1; // right edge falls into the last bin
        }
        histogram_counts[idx] += 1;
    }

    // Normal plot: ordered residuals vs quantiles at (i - 0.5)/n.
    let mut ordered = std_residuals.clone();
    ordered.sort_by(|a, b| a.partial_cmp(b).expect("residuals must be comparable"));
    let half = c::<F>(0.5);
    let normal_plot_points = ordered
        .iter()
        .enumerate()
        .map(|(i, &sr)| (normal_inv_cdf((cu::<F>(i + 1) - half) / cu::<F>(n)), sr))
        .collect();

    Ok(AssessmentReport {
        std_residuals,
        coverage_pm2,
        passes_95,
        histogram_edges,
        histogram_counts,
        normal_plot_points,
    })
}

/// The eight fixed candidate models of the comparison tables.
pub fn enumerate_paper_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new("M1", &["dVq"]),
        ModelSpec::new("M2", &["dVt"]),
        ModelSpec::new("M3", &["dVq", "Q"]),
        ModelSpec::new("M4", &["dVt", "P"]),
        ModelSpec::new("M5", &["dVq", "P"]),
        ModelSpec::new("M6", &["dVt", "Q"]),
        ModelSpec::new("M7", &["dVt", "delta"]),
        ModelSpec::new("M8", &["dVq", "delta"]),
    ]
}

/// Greedy forward selection: each round adds the candidate that maximizes
/// adjusted R-squared among those whose coefficient stays significant at
/// `alpha` and whose addition keeps every VIF at or below `vif_cap`; stops
/// when nothing qualifies or adjusted R-squared would decrease. Candidates
/// are screened in name order, which also breaks ties.
pub fn forward_select<F: Real>(
    data: &Dataset<F>,
    candidates: &[&str],
    alpha: F,
    vif_cap: F,
) -> Result<ModelSpec, StatsError> {
    assert!(!candidates.is_empty(), "need at least one candidate");
    assert!(alpha > F::zero() && alpha < F::one(), "alpha must be in (0,1)");
    assert!(vif_cap >= F::one(), "vif_cap must be >= 1");

    let mut pool: Vec<String> = candidates.iter().map(|s| s.to_string()).collect();
    pool.sort();
    pool.dedup();

    let mut selected: Vec<String> = Vec::new();
    let mut current_r2_adj = F::neg_infinity();

    loop {
        let mut best: Option<(F, String)> = None;
        for cand in pool.iter().filter(|c| !selected.contains(c)) {
            let mut features = selected.clone();
            features.push(cand.clone());
            let spec = ModelSpec {
                id: "FWD".into(),
                features,
                target: TARGET_NAME.into(),
            };
            let fit = match ols_fit(data, &spec) {
                Ok(f) => f,
                Err(StatsError::RankDeficient) => continue,
                Err(e) => return Err(e),
            };
            // Gate: the new coefficient is significant and no VIF blows up.
            let new_p = fit.p_values[fit.p];
            if !(new_p < alpha) {
                continue;
            }
            if fit.vif.iter().any(|&v| v > vif_cap) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((r2a, _)) => fit.r2_adj > *r2a,
            };
            if better {
                best = Some((fit.r2_adj, cand.clone()));
            }
        }
        match best {
            None => {
                if selected.is_empty() {
                    return Err(StatsError::NoFeatureQualifies);
                }
                break;
            }
            Some((r2a, cand)) => {
                if r2a < current_r2_adj {
                    break;
                }
                selected.push(cand);
                current_r2_adj = r2a;
            }
        }
    }

    Ok(ModelSpec { id: "FWD".into(), features: selected, target: TARGET_NAME.into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureRow, Provenance};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pearson_exact_cases() {
        // Exact positive affine relation.
        let r: f64 = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // Hand computation: sum of cross-deviations is zero.
        let r: f64 = pearson(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(r.abs() < 1e-12);
        // Hand computation: 3 / sqrt(5 * 5).
        let r: f64 = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.6).abs() < 1e-12);
    }

    #[test]
    fn pearson_error_paths() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::LengthMismatch)
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantSeries(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[3.0, 4.0]),
            Err(StatsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn significance_edges_and_reference_value() {
        let (_, p) = correlation_significance(0.0f64, 25);
        assert!((p - 1.0).abs() < 1e-12);
        let (t, p) = correlation_significance(1.0f64, 25);
        assert!(t.is_infinite() && p == 0.0);
        // r = 0.587, n = 50: t = 5.0234, p = 7.44e-6 (scipy reference).
        let (t, p) = correlation_significance(0.587f64, 50);
        assert!((t - 5.023370730019253).abs() < 1e-9, "t = {t}");
        assert!((p - 7.444471045920122e-6).abs() < 1e-12, "p = {p}");
        assert!(p < 1e-4);
    }

    #[test]
    fn significance_monotonicity() {
        // p decreases in |r| for fixed n and in n for fixed r.
        let mut prev = 1.1f64;
        for k in 1..10 {
            let (_, p) = correlation_significance(0.1 * k as f64, 30);
            assert!(p < prev);
            prev = p;
        }
        let mut prev = 1.1f64;
        for n in [5, 10, 20, 50, 100, 200] {
            let (_, p) = correlation_significance(0.3f64, n);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn ols_exact_line() {
        let fit: RegressionFit<f64> = ols_fit_columns(
            "t",
            &["x".to_string()],
            &[vec![0.0, 1.0, 2.0]],
            &[1.0, 3.0, 5.0],
        )
        .unwrap();
        assert!((fit.beta0 - 1.0).abs() < 1e-12);
        assert!((fit.betas[0] - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.s.abs() < 1e-9);
    }

    #[test]
    fn ols_hand_normal_equations_case() {
        // x = 1..4, y = (3,5,7,10): beta = (0.5, 2.3), SS_res = 0.30,
        // R2 = 0.98879, adjusted 0.98318, S = 0.38730.
        let fit: RegressionFit<f64> = ols_fit_columns(
            "t",
            &["x".to_string()],
            &[vec![1.0, 2.0, 3.0, 4.0]],
            &[3.0, 5.0, 7.0, 10.0],
        )
        .unwrap();
        assert!((fit.beta0 - 0.5).abs() < 1e-12);
        assert!((fit.betas[0] - 2.3).abs() < 1e-12);
        let ss_res: f64 = fit.residuals.iter().map(|e| e * e).sum();
        assert!((ss_res - 0.30).abs() < 1e-12);
        assert!((fit.r2 - 0.9887850467289719).abs() < 1e-12);
        assert!((fit.r2_adj - 0.9831775700934578).abs() < 1e-12);
        assert!((fit.s - 0.15f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ols_duplicated_predictor_is_rank_deficient() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let err = ols_fit_columns(
            "t",
            &["a".to_string(), "b".to_string()],
            &[x, twice],
            &[1.0, 2.0, 3.0, 4.0, 5.0],
        )
        .unwrap_err();
        assert!(matches!(err, StatsError::RankDeficient));
    }

    #[test]
    fn residuals_sum_to_zero_and_are_orthogonal_to_predictors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x1: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| 1.0 + 2.0 * a - 0.7 * b + rng.gen_range(-0.3..0.3))
            .collect();
        let fit = ols_fit_columns(
            "t",
            &["a".to_string(), "b".to_string()],
            &[x1.clone(), x2.clone()],
            &y,
        )
        .unwrap();
        let sum: f64 = fit.residuals.iter().sum();
        assert!(sum.abs() < 1e-9, "residual sum = {sum}");
        for col in [&x1, &x2] {
            let dot: f64 = fit.residuals.iter().zip(col.iter()).map(|(e, x)| e * x).sum();
            assert!(dot.abs() < 1e-8, "residual-predictor dot = {dot}");
        }
    }

    #[test]
    fn adding_a_regressor_never_decreases_r2() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x1: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x1.iter().map(|a| 0.5 + a + rng.gen_range(-0.5..0.5)).collect();
        let small =
            ols_fit_columns("s", &["a".to_string()], &[x1.clone()], &y).unwrap();
        let big = ols_fit_columns(
            "b",
            &["a".to_string(), "b".to_string()],
            &[x1, x2],
            &y,
        )
        .unwrap();
        assert!(big.r2 >= small.r2 - 1e-12);
    }

    #[test]
    fn vif_orthogonal_and_collinear_and_closed_form() {
        // Two exactly orthogonal centered features.
        let a: Vec<f64> = vec![1.0, -1.0, 1.0, -1.0];
        let b: Vec<f64> = vec![1.0, 1.0, -1.0, -1.0];
        let v = vif_columns(&["a".to_string(), "b".to_string()], &[a.clone(), b]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-10);
        assert!((v[1] - 1.0).abs() < 1e-10);

        // Exact multiple: infinite VIF.
        let twice: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        let v = vif_columns(&["a".to_string(), "b".to_string()], &[a, twice]).unwrap();
        assert!(v[0].is_infinite() && v[1].is_infinite());

        // Pairwise r = 0.9: VIF = 1/(1 - 0.81) for both.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Construct y with exact sample correlation 0.9 against x by
        // orthogonalizing the noise first.
        let r_target = 0.9f64;
        let fit = ols_fit_columns("aux", &["x".to_string()], &[x.clone()], &noise).unwrap();
        let orth = fit.residuals; // exactly uncorrelated with x in-sample
        let sx = x.iter().map(|v| v * v).sum::<f64>();
        let mx = x.iter().sum::<f64>() / 200.0;
        let sxx = sx - 200.0 * mx * mx;
        let soo = orth.iter().map(|v| v * v).sum::<f64>();
        let y: Vec<f64> = x
            .iter()
            .zip(&orth)
            .map(|(xi, oi)| {
                r_target * (xi - mx) / sxx.sqrt()
                    + (1.0 - r_target * r_target).sqrt() * oi / soo.sqrt()
            })
            .collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r - 0.9).abs() < 1e-10, "constructed r = {r}");
        let v = vif_columns(&["x".to_string(), "y".to_string()], &[x, y]).unwrap();
        let expect = 1.0 / (1.0 - 0.81);
        assert!((v[0] - expect).abs() < 1e-10, "vif = {}", v[0]);
        assert!((v[1] - expect).abs() < 1e-10);
    }

    #[test]
    fn single_feature_vif_is_one() {
        let v: Vec<f64> = vif_columns(&["a".to_string()], &[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(v, vec![1.0]);
    }

    fn fit_with_residuals(res: &[f64]) -> RegressionFit<f64> {
        let n = res.len();
        let ss: f64 = res.iter().map(|e| e * e).sum();
        let s = (ss / (n as f64 - 2.0)).sqrt();
        RegressionFit {
            model_id: "t".into(),
            feature_names: vec!["x".into()],
            beta0: 0.0,
            betas: vec![1.0],
            se: vec![0.1, 0.1],
            t_stats: vec![0.0, 10.0],
            p_values: vec![1.0, 0.0],
            r2: 0.9,
            r2_adj: 0.89,
            s,
            vif: vec![1.0],
            residuals: res.to_vec(),
            fitted: vec![0.0; n],
            n,
            p: 1,
        }
    }

    #[test]
    fn assess_perfect_fit_short_circuits() {
        let mut fit = fit_with_residuals(&[0.0; 12]);
        fit.s = 0.0;
        let rep = assess(&fit).unwrap();
        assert_eq!(rep.coverage_pm2, 1.0);
        assert!(rep.passes_95);
    }

    #[test]
    fn assess_counts_the_47_of_50_case() {
        // 47 residuals well inside, 3 far outside the +/-2 S band.
        let mut res = vec![0.1; 47];
        res.extend_from_slice(&[5.0, -5.0, 5.0]);
        let mut fit = fit_with_residuals(&res);
        fit.s = 1.0; // standardize against unit S for a clean count
        let rep = assess(&fit).unwrap();
        assert!((rep.coverage_pm2 - 0.94).abs() < 1e-12);
        assert!(!rep.passes_95);
    }

    #[test]
    fn assess_histogram_and_normal_plot_shapes() {
        let res: Vec<f64> = (0..20).map(|i| (i as f64 - 9.5) / 5.0).collect();
        let mut fit = fit_with_residuals(&res);
        fit.s = 1.0;
        let rep = assess(&fit).unwrap();
        assert_eq!(rep.histogram_counts.iter().sum::<usize>(), 20);
        assert_eq!(rep.histogram_edges.len(), rep.histogram_counts.len() + 1);
        // Bin width 0.5 throughout.
        for w in rep.histogram_edges.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-12);
        }
        assert_eq!(rep.normal_plot_points.len(), 20);
        // Ordered residuals are non-decreasing, quantiles strictly increasing.
        for w in rep.normal_plot_points.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn assess_requires_ten_residuals() {
        let fit = fit_with_residuals(&[0.1; 9]);
        assert!(matches!(assess(&fit), Err(StatsError::TooFewSamples { .. })));
    }

    #[test]
    fn paper_models_are_the_eight_fixed_sets() {
        let models = enumerate_paper_models();
        assert_eq!(models.len(), 8);
        assert_eq!(models[7].id, "M8");
        assert_eq!(models[7].features, vec!["dVq", "delta"]);
        assert_eq!(models[1].features, vec!["dVt"]);
        assert_eq!(models[6].features, vec!["dVt", "delta"]);
        for m in &models {
            assert_eq!(m.target, "Vf");
            assert!(!m.features.is_empty());
        }
    }

    fn dataset_from_columns(cols: &[(&str, Vec<f64>)], y: Vec<f64>) -> Dataset<f64> {
        let n = y.len();
        let col = |name: &str| -> Vec<f64> {
            cols.iter()
                .find(|(c, _)| *c == name)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| vec![0.0; n])
        };
        let (dvt, om, p, q, dvq, de) =
            (col("dVt"), col("omega"), col("P"), col("Q"), col("dVq"), col("delta"));
        let rows = (0..n)
            .map(|i| FeatureRow {
                dvt: dvt[i],
                omega: om[i],
                p: p[i],
                q: q[i],
                dvq: dvq[i],
                delta: de[i],
                vf: y[i],
                scenario_id: "s".into(),
                flagged: false,
            })
            .collect();
        Dataset { rows, provenance: Provenance::default(), seed: None }
    }

    #[test]
    fn forward_select_picks_exact_predictor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 0.5).collect();
        let ds = dataset_from_columns(&[("dVq", x), ("Q", noise)], y);
        let model = forward_select(&ds, &["dVq", "Q"], 0.05, 10.0).unwrap();
        assert_eq!(model.features[0], "dVq");
        let fit = ols_fit(&ds, &model).unwrap();
        assert!((fit.r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn forward_select_rejects_pure_noise() {
        // Orthogonal noise constructed so that every candidate's p-value is
        // far above alpha; verified before asserting the error.
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 / 101.0).collect();
        let x2: Vec<f64> = (0..n).map(|i| ((i * 104729 + 5) % 97) as f64 / 97.0).collect();
        // Make the target exactly orthogonal to both candidates in-sample.
        let fit1 = ols_fit_columns(
            "aux",
            &["a".to_string(), "b".to_string()],
            &[x1.clone(), x2.clone()],
            &(0..n).map(|i| ((i * 31 + 3) % 89) as f64 / 89.0).collect::<Vec<_>>(),
        )
        .unwrap();
        let y = fit1.residuals.clone();
        let ds = dataset_from_columns(&[("dVt", x1.clone()), ("P", x2.clone())], y.clone());
        for cand in ["dVt", "P"] {
            let f = ols_fit(&ds, &ModelSpec::new("chk", &[cand])).unwrap();
            assert!(f.p_values[1] > 0.5, "{cand}: p = {}", f.p_values[1]);
        }
        assert!(matches!(
            forward_select(&ds, &["dVt", "P"], 0.05, 10.0),
            Err(StatsError::NoFeatureQualifies)
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            seed in 0u64..500,
            a in 0.1f64..5.0,
            b in -3.0f64..3.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r0 = pearson(&x, &y).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r1 = pearson(&xs, &y).unwrap();
            prop_assert!((r0 - r1).abs() < 1e-10);
            let xn: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            let r2 = pearson(&xn, &y).unwrap();
            prop_assert!((r0 + r2).abs() < 1e-10);
            // Symmetry in the arguments.
            let rs = pearson(&y, &x).unwrap();
            prop_assert!((r0 - rs).abs() < 1e-12);
        }
    }
}
