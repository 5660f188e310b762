//! Levenberg-Marquardt training with validation-based early stopping.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{cholesky_solve, Mat};
use crate::scalar::{c, cu, Real};

use super::net::{jacobian, AffineScale, MlpNet, Patterns};
use super::MlpError;

/// Damping schedule and stopping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig<F> {
    pub max_epochs: usize,
    pub mu0: F,
    pub mu_dec: F,
    pub mu_inc: F,
    pub mu_max: F,
    /// Consecutive validation-worsening epochs tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl<F: Real> Default for TrainConfig<F> {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            mu0: c(1e-3),
            mu_dec: c(0.1),
            mu_inc: c(10.0),
            mu_max: c(1e10),
            patience: 6,
            seed: 0,
        }
    }
}

impl<F: Real> TrainConfig<F> {
    pub fn validate(&self) -> Result<(), MlpError> {
        if !(self.mu_dec < F::one() && F::one() < self.mu_inc) {
            return Err(MlpError::InvalidConfig("need mu_dec < 1 < mu_inc".into()));
        }
        if self.patience < 1 || self.max_epochs < 1 {
            return Err(MlpError::InvalidConfig("patience and max_epochs must be >= 1".into()));
        }
        if !(self.mu0 > F::zero() && self.mu_max > self.mu0) {
            return Err(MlpError::InvalidConfig("need 0 < mu0 < mu_max".into()));
        }
        Ok(())
    }
}

/// Result of one damping trial.
#[derive(Debug, Clone)]
pub struct LmOutcome<F> {
    pub net: MlpNet<F>,
    /// Training SSE (normalized target space) of the returned net.
    pub sse: F,
    /// Damping for the next trial.
    pub mu: F,
    pub accepted: bool,
}

/// Normalized view of a pattern set, computed once per training run.
struct NormData<F> {
    inputs: Vec<Vec<F>>,
    targets: Vec<F>,
}

fn normalize_patterns<F: Real>(net: &MlpNet<F>, p: &Patterns<F>) -> NormData<F> {
    let (tc, th) = net.target_scale;
    let mut inputs = Vec::with_capacity(p.len());
    let mut buf = Vec::new();
    for x in &p.inputs {
        net.input_scale.normalize_into(x, &mut buf);
        inputs.push(buf.clone());
    }
    let targets = p.targets.iter().map(|&y| (y - tc) / th).collect();
    NormData { inputs, targets }
}

fn sse_normalized<F: Real>(net: &MlpNet<F>, data: &NormData<F>) -> F {
    let mut hidden = Vec::with_capacity(net.n_hidden);
    let mut acc = F::zero();
    for (xn, &tn) in data.inputs.iter().zip(&data.targets) {
        let e = tn - net.forward_normalized(xn, &mut hidden);
        acc = acc + e * e;
    }
    acc
}

/// Gauss-Newton normal system of a net on a data set, built once per epoch
/// and shared across damping retries.
struct NormalSystem<F> {
    jtj: Mat<F>,
    jte: Vec<F>,
    sse0: F,
    grad_zero: bool,
}

fn build_normal_system<F: Real>(net: &MlpNet<F>, data: &NormData<F>) -> NormalSystem<F> {
    let n = data.targets.len();
    let n_w = net.n_weights();

    let jac = jacobian(net, &data.inputs);
    let mut hidden = Vec::with_capacity(net.n_hidden);
    let mut errors = Vec::with_capacity(n);
    let mut sse0 = F::zero();
    for (xn, &tn) in data.inputs.iter().zip(&data.targets) {
        let e = tn - net.forward_normalized(xn, &mut hidden);
        sse0 = sse0 + e * e;
        errors.push(e);
    }

    // Accumulate J'J (upper triangle) and J'e row by row.
    let mut jtj = Mat::zeros(n_w, n_w);
    let mut jte = vec![F::zero(); n_w];
    for r in 0..n {
        let row = jac.row(r);
        let er = errors[r];
        for i in 0..n_w {
            let ji = row[i];
            if ji == F::zero() {
                continue;
            }
            jte[i] = jte[i] + ji * er;
            for j in i..n_w {
                let v = jtj.get(i, j) + ji * row[j];
                jtj.set(i, j, v);
            }
        }
    }
    for i in 0..n_w {
        for j in 0..i {
            let v = jtj.get(j, i);
            jtj.set(i, j, v);
        }
    }

    let grad_zero = jte.iter().all(|g| *g == F::zero());
    NormalSystem { jtj, jte, sse0, grad_zero }
}

fn system_is_finite<F: Real>(sys: &NormalSystem<F>) -> bool {
    sys.sse0.is_finite() && sys.jte.iter().all(|g| g.is_finite())
}

/// Solves one damped system and evaluates the candidate. `None` is a
/// rejection: either the SSE grew or the damped matrix was not positive
/// definite (raising mu regularizes both away).
fn try_damping<F: Real>(
    net: &MlpNet<F>,
    data: &NormData<F>,
    sys: &NormalSystem<F>,
    mu: F,
) -> Option<(MlpNet<F>, F)> {
    let n_w = sys.jte.len();
    let mut damped = sys.jtj.clone();
    for i in 0..n_w {
        let d = damped.get(i, i) + mu;
        damped.set(i, i, d);
    }
    let dw = cholesky_solve(damped, &sys.jte).ok()?;
    let mut w = net.weights_flat();
    for (wi, di) in w.iter_mut().zip(&dw) {
        *wi = *wi + *di;
    }
    let candidate = net.with_weights_flat(&w);
    let sse1 = sse_normalized(&candidate, data);
    if sse1 < sys.sse0 && sse1.is_finite() {
        Some((candidate, sse1))
    } else {
        None
    }
}

/// One damped Gauss-Newton trial on pre-normalized data: solve
/// (J'J + mu I) dw = J'e, accept the candidate when the SSE decreases.
fn lm_trial<F: Real>(
    net: &MlpNet<F>,
    data: &NormData<F>,
    mu: F,
    mu_dec: F,
    mu_inc: F,
) -> Result<LmOutcome<F>, MlpError> {
    let sys = build_normal_system(net, data);
    if !system_is_finite(&sys) {
        return Err(MlpError::SingularSystem);
    }
    if sys.grad_zero {
        // Stationary (e.g. perfect fit): the zero step is accepted as-is.
        return Ok(LmOutcome { net: net.clone(), sse: sys.sse0, mu: mu * mu_dec, accepted: true });
    }
    match try_damping(net, data, &sys, mu) {
        Some((candidate, sse1)) => {
            Ok(LmOutcome { net: candidate, sse: sse1, mu: mu * mu_dec, accepted: true })
        }
        None => Ok(LmOutcome { net: net.clone(), sse: sys.sse0, mu: mu * mu_inc, accepted: false }),
    }
}

/// Public single-trial step on original-unit rows.
pub fn lm_step<F: Real>(
    net: &MlpNet<F>,
    rows: &Patterns<F>,
    mu: F,
    config: &TrainConfig<F>,
) -> Result<LmOutcome<F>, MlpError> {
    assert!(mu > F::zero(), "damping must be positive");
    if rows.is_empty() {
        return Err(MlpError::EmptySplit);
    }
    let data = normalize_patterns(net, rows);
    lm_trial(net, &data, mu, config.mu_dec, config.mu_inc)
}

/// A trained network with its held-out metrics.
#[derive(Debug, Clone)]
pub struct TrainResult<F> {
    /// Snapshot at the minimum validation MSE.
    pub net: MlpNet<F>,
    pub epochs_run: usize,
    /// Test mean absolute error, original target units.
    pub mae: F,
    /// Test mean squared error, original target units.
    pub mse: F,
    /// Measured mean seconds per forward pass over the test batch. Wall-clock
    /// and therefore excluded from determinism comparisons.
    pub infer_time: F,
    pub restart_index: usize,
    pub hidden_size: usize,
    /// Training SSE at each accepted epoch (normalized target space).
    pub train_sse_history: Vec<F>,
    /// Validation MSE after each epoch (original units).
    pub val_mse_history: Vec<F>,
}

fn eval_mse_mae<F: Real>(net: &MlpNet<F>, p: &Patterns<F>) -> (F, F) {
    let mut se = F::zero();
    let mut ae = F::zero();
    for (x, &y) in p.inputs.iter().zip(&p.targets) {
        let e = y - net.forward(x).expect("dimension checked");
        se = se + e * e;
        ae = ae + e.abs();
    }
    let n = cu::<F>(p.len());
    (se / n, ae / n)
}

/// Minimum number of forward passes for the inference-time measurement.
const INFER_TIME_PASSES: usize = 10_000;

fn measure_infer_time<F: Real>(net: &MlpNet<F>, p: &Patterns<F>) -> F {
    let reps = INFER_TIME_PASSES.div_ceil(p.len());
    let start = Instant::now();
    let mut sink = F::zero();
    for _ in 0..reps {
        for x in &p.inputs {
            sink = sink + std::hint::black_box(net.forward(x).expect("dimension checked"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(sink);
    c::<F>(elapsed / (reps * p.len()) as f64)
}

/// Trains one network: uniform [-0.5, 0.5] initial weights from the seeded
/// generator, normalization fitted on the training split only, damping
/// retried within each epoch, and the returned net is the snapshot at the
/// minimum validation MSE.
pub fn train<F: Real>(
    n_hidden: usize,
    train_set: &Patterns<F>,
    val_set: &Patterns<F>,
    test_set: &Patterns<F>,
    config: &TrainConfig<F>,
) -> Result<TrainResult<F>, MlpError> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() || test_set.is_empty() {
        return Err(MlpError::EmptySplit);
    }
    assert!(n_hidden >= 1, "need at least one hidden unit");
    let n_in = train_set.inputs[0].len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rand_w = |count: usize| -> Vec<F> {
        (0..count).map(|_| c::<F>(rng.gen::<f64>() - 0.5)).collect()
    };
    let mut net = MlpNet {
        n_in,
        n_hidden,
        w1: rand_w(n_hidden * (n_in + 1)),
        w2: rand_w(n_hidden + 1),
        input_scale: AffineScale::fit(&train_set.inputs),
        target_scale: AffineScale::fit_scalar(&train_set.targets),
    };

    let data = normalize_patterns(&net, train_set);
    let mut mu = config.mu0;
    let mut best_val = F::infinity();
    let mut best_net = net.clone();
    let mut worsened = 0usize;
    let mut epochs_run = 0usize;
    let mut train_sse_history = Vec::new();
    let mut val_mse_history = Vec::new();

    'epochs: for epoch in 1..=config.max_epochs {
        // One Jacobian per epoch; retry with growing damping until accepted.
        let sys = build_normal_system(&net, &data);
        if !system_is_finite(&sys) {
            return Err(MlpError::SingularSystem);
        }
        if sys.grad_zero {
            break 'epochs; // stationary point, nothing left to move
        }
        let accepted_sse;
        loop {
            match try_damping(&net, &data, &sys, mu) {
                Some((candidate, sse1)) => {
                    net = candidate;
                    accepted_sse = sse1;
                    mu = (mu * config.mu_dec).max(c(1e-30));
                    break;
                }
                None => {
                    mu = mu * config.mu_inc;
                    if mu > config.mu_max {
                        if epoch == 1 {
                            return Err(MlpError::NoProgress);
                        }
                        break 'epochs;
                    }
                }
            }
        }
        epochs_run = epoch;
        // Relative-improvement floor: a converged fit stops consuming epochs.
        let converged = train_sse_history
            .last()
            .is_some_and(|&prev: &F| prev - accepted_sse <= c::<F>(1e-14) * prev);
        train_sse_history.push(accepted_sse);

        let (val_mse, _) = eval_mse_mae(&net, val_set);
        val_mse_history.push(val_mse);
        if val_mse < best_val {
            best_val = val_mse;
            best_net = net.clone();
            worsened = 0;
        } else {
            worsened += 1;
            if worsened >= config.patience {
                break;
            }
        }
        if converged {
            break;
        }
    }

    let (mse, mae) = eval_mse_mae(&best_net, test_set);
    let infer_time = measure_infer_time(&best_net, test_set);
    Ok(TrainResult {
        net: best_net,
        epochs_run,
        mae,
        mse,
        infer_time,
        restart_index: 0,
        hidden_size: n_hidden,
        train_sse_history,
        val_mse_history,
    })
}
