//! Feature/target rows derived from simulation traces, the stratified
//! analysis sample and randomized train/validation/test splits.
//!
//! Every randomized derivation is a pure function of an explicit seed
//! (ChaCha8, so the draws are identical across platforms).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{c, Real};
use crate::sim::{SimSignals, SimTrace};

/// Canonical feature column names, in table order.
pub const FEATURE_NAMES: [&str; 6] = ["dVt", "omega", "P", "Q", "dVq", "delta"];
/// Target column name.
pub const TARGET_NAME: &str = "Vf";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("trace '{0}' has no samples")]
    EmptyTrace(String),
    #[error("need {need} rows, have {have}")]
    InsufficientRows { need: usize, have: usize },
    #[error("split would leave a part empty")]
    DegenerateSplit,
    #[error("invalid split fractions: {0}")]
    InvalidSplit(String),
    #[error("quadrature reference undefined (V_d^2 > 1) at t = {t} s")]
    QrefUndefined { t: f64 },
    #[error("duplicate scenario id '{0}'")]
    DuplicateScenario(String),
    #[error("traces and reference voltages differ in length")]
    LengthMismatch,
    #[error("non-finite value in column '{0}'")]
    NonFinite(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
}

/// One candidate-feature/target row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<F> {
    /// V_ref - V_T.
    pub dvt: F,
    pub omega: F,
    pub p: F,
    pub q: F,
    /// V_q_ref - V_q where V_q_ref = sqrt(1 - V_d^2).
    pub dvq: F,
    pub delta: F,
    /// Excitation voltage target.
    pub vf: F,
    pub scenario_id: String,
    /// True when the quadrature reference was clamped on this row.
    pub flagged: bool,
}

/// Where the rows of a dataset came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub sources: Vec<String>,
    pub flagged_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub rows: Vec<FeatureRow<F>>,
    pub provenance: Provenance,
    /// Seed of the randomized derivation that produced this dataset, if any.
    pub seed: Option<u64>,
}

/// How to treat samples whose quadrature reference is undefined (V_d^2 > 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QrefPolicy {
    /// Clamp V_q_ref to 0 and mark the row (the default).
    #[default]
    ClampAndFlag,
    /// Drop the sample.
    Drop,
    /// Fail with [`DataError::QrefUndefined`].
    Error,
}

/// Builds one feature row from a sampled signal set and the scenario's
/// reference voltage. Returns `None` when the policy drops the sample.
pub fn derive_features<F: Real>(
    sig: &SimSignals<F>,
    v_ref: F,
    policy: QrefPolicy,
) -> Result<Option<FeatureRow<F>>, DataError> {
    let one = F::one();
    let vd2 = sig.v_d * sig.v_d;
    let (q_ref, flagged) = if vd2 > one {
        match policy {
            QrefPolicy::ClampAndFlag => (F::zero(), true),
            QrefPolicy::Drop => return Ok(None),
            QrefPolicy::Error => {
                return Err(DataError::QrefUndefined { t: sig.t.to_f64().unwrap_or(f64::NAN) })
            }
        }
    } else {
        ((one - vd2).sqrt(), false)
    };
    let row = FeatureRow {
        dvt: v_ref - sig.v_t,
        omega: sig.omega,
        p: sig.p,
        q: sig.q,
        dvq: q_ref - sig.v_q,
        delta: sig.delta,
        vf: sig.v_f,
        scenario_id: String::new(),
        flagged,
    };
    for (name, v) in [
        ("dVt", row.dvt),
        ("omega", row.omega),
        ("P", row.p),
        ("Q", row.q),
        ("dVq", row.dvq),
        ("delta", row.delta),
        ("Vf", row.vf),
    ] {
        if !v.is_finite() {
            return Err(DataError::NonFinite(name.into()));
        }
    }
    Ok(Some(row))
}

/// Concatenates every sample of every trace into one dataset, trace order
/// first, then time order.
pub fn pool_scenarios<F: Real>(
    traces: &[SimTrace<F>],
    v_refs: &[F],
    policy: QrefPolicy,
) -> Result<Dataset<F>, DataError> {
    if traces.len() != v_refs.len() {
        return Err(DataError::LengthMismatch);
    }
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    let mut flagged = 0usize;
    let mut sources = Vec::new();
    for (trace, &v_ref) in traces.iter().zip(v_refs) {
        if trace.signals.is_empty() {
            return Err(DataError::EmptyTrace(trace.scenario_id.clone()));
        }
        if !seen.insert(trace.scenario_id.clone()) {
            return Err(DataError::DuplicateScenario(trace.scenario_id.clone()));
        }
        sources.push(trace.scenario_id.clone());
        for sig in &trace.signals {
            if let Some(mut row) = derive_features(sig, v_ref, policy)? {
                row.scenario_id = trace.scenario_id.clone();
                if row.flagged {
                    flagged += 1;
                }
                rows.push(row);
            }
        }
    }
    Ok(Dataset { rows, provenance: Provenance { sources, flagged_rows: flagged }, seed: None })
}

impl<F: Real> Dataset<F> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Copy of a named column ("dVt", "omega", "P", "Q", "dVq", "delta", "Vf").
    pub fn column(&self, name: &str) -> Result<Vec<F>, DataError> {
        let get: fn(&FeatureRow<F>) -> F = match name {
            "dVt" => |r| r.dvt,
            "omega" => |r| r.omega,
            "P" => |r| r.p,
            "Q" => |r| r.q,
            "dVq" => |r| r.dvq,
            "delta" => |r| r.delta,
            "Vf" => |r| r.vf,
            _ => return Err(DataError::UnknownColumn(name.into())),
        };
        Ok(self.rows.iter().map(get).collect())
    }

    /// Dataset with the quadrature-clamped rows removed.
    pub fn without_flagged(&self) -> Dataset<F> {
        let rows: Vec<_> = self.rows.iter().filter(|r| !r.flagged).cloned().collect();
        Dataset {
            rows,
            provenance: Provenance {
                sources: self.provenance.sources.clone(),
                flagged_rows: 0,
            },
            seed: self.seed,
        }
    }

    /// Scenario classes in first-appearance order with their row indices.
    fn classes(&self) -> Vec<(String, Vec<usize>)> {
        let mut classes: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            match classes.iter_mut().find(|(id, _)| *id == row.scenario_id) {
                Some((_, idx)) => idx.push(i),
                None => classes.push((row.scenario_id.clone(), vec![i])),
            }
        }
        classes
    }
}

/// Largest-remainder apportionment of `n` into integer quotas proportional to
/// `sizes`; ties go to the earlier entry. Pure integer arithmetic.
fn largest_remainder(sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    assert!(total > 0 && n <= total);
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| n * s / total).collect();
    let mut remainders: Vec<(usize, usize)> =
        sizes.iter().enumerate().map(|(i, &s)| (i, (n * s) % total)).collect();
    // Largest remainder first; index order breaks ties.
    remainders.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let assigned: usize = quotas.iter().sum();
    for k in 0..n - assigned {
        quotas[remainders[k].0] += 1;
    }
    quotas
}

/// Draws `n` rows without replacement, allocated across scenario classes
/// proportionally to class sizes (largest-remainder rounding), uniformly
/// within each class under the seeded generator.
pub fn stratified_subsample<F: Real>(
    data: &Dataset<F>,
    n: usize,
    seed: u64,
) -> Result<Dataset<F>, DataError> {
    if n > data.len() || data.is_empty() {
        return Err(DataError::InsufficientRows { need: n, have: data.len() });
    }
    let classes = data.classes();
    let sizes: Vec<usize> = classes.iter().map(|(_, idx)| idx.len()).collect();
    let quotas = largest_remainder(&sizes, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for ((_, idx), quota) in classes.iter().zip(&quotas) {
        let mut pool = idx.clone();
        pool.shuffle(&mut rng);
        for &i in pool.iter().take(*quota) {
            rows.push(data.rows[i].clone());
        }
    }
    Ok(Dataset {
        rows,
        provenance: data.provenance.clone(),
        seed: Some(seed),
    })
}

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec<F> {
    pub train_frac: F,
    pub val_frac: F,
    pub test_frac: F,
    pub seed: u64,
}

impl<F: Real> SplitSpec<F> {
    pub fn new(train_frac: F, val_frac: F, test_frac: F, seed: u64) -> Self {
        SplitSpec { train_frac, val_frac, test_frac, seed }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let zero = F::zero();
        if !(self.train_frac > zero && self.val_frac > zero && self.test_frac > zero) {
            return Err(DataError::InvalidSplit("every fraction must be > 0".into()));
        }
        let sum = self.train_frac + self.val_frac + self.test_frac;
        if (sum - F::one()).abs() > c(1e-12) {
            return Err(DataError::InvalidSplit("fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Shuffles the rows with the seeded generator and partitions them into
/// train/validation/test; part sizes follow largest-remainder rounding of the
/// fractions with ties toward the earlier part.
pub fn split<F: Real>(
    data: &Dataset<F>,
    spec: &SplitSpec<F>,
) -> Result<(Dataset<F>, Dataset<F>, Dataset<F>), DataError> {
    spec.validate()?;
    let m = data.len();
    if m == 0 {
        return Err(DataError::InsufficientRows { need: 3, have: 0 });
    }

    let fracs = [spec.train_frac, spec.val_frac, spec.test_frac];
    let raw: Vec<f64> = fracs.iter().map(|f| f.to_f64().unwrap() * m as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|&r| r.floor() as usize).collect();
    let mut rem: Vec<(usize, f64)> =
        raw.iter().enumerate().map(|(i, &r)| (i, r - r.floor())).collect();
    rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let assigned: usize = sizes.iter().sum();
    for k in 0..m - assigned {
        sizes[rem[k % 3].0] += 1;
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(DataError::DegenerateSplit);
    }

    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let take = |range: std::ops::Range<usize>| -> Dataset<F> {
        Dataset {
            rows: order[range].iter().map(|&i| data.rows[i].clone()).collect(),
            provenance: data.provenance.clone(),
            seed: Some(spec.seed),
        }
    };
    let train = take(0..sizes[0]);
    let val = take(sizes[0]..sizes[0] + sizes[1]);
    let test = take(sizes[0] + sizes[1]..m);
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(v_d: f64, v_q: f64) -> SimSignals<f64> {
        SimSignals {
            t: 0.0,
            v_t: (v_d * v_d + v_q * v_q).sqrt(),
            v_d,
            v_q,
            omega: 1.0,
            delta: v_d.atan2(v_q),
            p: 0.5,
            q: 0.1,
            v_f: 1.5,
            e_f: 1.8,
        }
    }

    fn toy_dataset(class_sizes: &[usize]) -> Dataset<f64> {
        let mut rows = Vec::new();
        for (ci, &size) in class_sizes.iter().enumerate() {
            for k in 0..size {
                rows.push(FeatureRow {
                    dvt: k as f64,
                    omega: 1.0,
                    p: ci as f64,
                    q: 0.0,
                    dvq: k as f64 * 0.1,
                    delta: 0.3,
                    vf: k as f64 + ci as f64,
                    scenario_id: format!("s{ci}"),
                    flagged: false,
                });
            }
        }
        Dataset { rows, provenance: Provenance::default(), seed: None }
    }

    #[test]
    fn dvt_is_reference_minus_terminal() {
        let mut s = sig(0.0, 0.98);
        s.v_t = 0.98;
        let row = derive_features(&s, 1.0, QrefPolicy::ClampAndFlag).unwrap().unwrap();
        assert!((row.dvt - 0.02).abs() < 1e-15);
    }

    #[test]
    fn quadrature_reference_construction() {
        // V_d = 0.6, V_q = 0.8: V_q_ref = sqrt(1 - 0.36) = 0.8, dVq = 0.
        let row = derive_features(&sig(0.6, 0.8), 1.0, QrefPolicy::ClampAndFlag)
            .unwrap()
            .unwrap();
        assert!(row.dvq.abs() < 1e-15);
        assert!(!row.flagged);
        // V_d = 0, V_q = 1: dVq = 1 - 1 = 0.
        let row = derive_features(&sig(0.0, 1.0), 1.0, QrefPolicy::ClampAndFlag)
            .unwrap()
            .unwrap();
        assert!(row.dvq.abs() < 1e-15);
    }

    #[test]
    fn qref_policies() {
        let s = sig(1.1, 0.2); // V_d^2 > 1
        let row = derive_features(&s, 1.0, QrefPolicy::ClampAndFlag).unwrap().unwrap();
        assert!(row.flagged);
        assert!((row.dvq - (0.0 - 0.2)).abs() < 1e-15);
        assert!(derive_features(&s, 1.0, QrefPolicy::Drop).unwrap().is_none());
        assert!(matches!(
            derive_features(&s, 1.0, QrefPolicy::Error),
            Err(DataError::QrefUndefined { .. })
        ));
    }

    #[test]
    fn pooling_counts_and_order() {
        let mk = |id: &str, n: usize| SimTrace {
            signals: vec![sig(0.6, 0.8); n],
            scenario_id: id.to_string(),
            dt_sample: 0.005,
        };
        let traces = vec![mk("a", 3), mk("b", 2)];
        let ds = pool_scenarios(&traces, &[1.0, 1.0], QrefPolicy::ClampAndFlag).unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.rows[0].scenario_id, "a");
        assert_eq!(ds.rows[4].scenario_id, "b");
        assert_eq!(ds.provenance.sources, vec!["a", "b"]);
    }

    #[test]
    fn pooling_rejects_empty_and_duplicate_traces() {
        let empty = SimTrace::<f64> {
            signals: vec![],
            scenario_id: "x".into(),
            dt_sample: 0.005,
        };
        assert!(matches!(
            pool_scenarios(&[empty], &[1.0], QrefPolicy::ClampAndFlag),
            Err(DataError::EmptyTrace(_))
        ));
        let t = SimTrace {
            signals: vec![sig(0.6, 0.8)],
            scenario_id: "dup".to_string(),
            dt_sample: 0.005,
        };
        assert!(matches!(
            pool_scenarios(&[t.clone(), t], &[1.0, 1.0], QrefPolicy::ClampAndFlag),
            Err(DataError::DuplicateScenario(_))
        ));
    }

    #[test]
    fn flagged_rows_counted_in_provenance() {
        let t = SimTrace {
            signals: vec![sig(0.6, 0.8), sig(1.2, 0.1), sig(1.3, 0.0)],
            scenario_id: "fault".to_string(),
            dt_sample: 0.005,
        };
        let ds = pool_scenarios(&[t], &[1.0], QrefPolicy::ClampAndFlag).unwrap();
        assert_eq!(ds.provenance.flagged_rows, 2);
        assert_eq!(ds.without_flagged().len(), 1);
    }

    #[test]
    fn subsample_equal_classes_is_exactly_proportional() {
        let ds = toy_dataset(&[40, 40, 40, 40, 40]);
        let sample = stratified_subsample(&ds, 50, 7).unwrap();
        assert_eq!(sample.len(), 50);
        for ci in 0..5 {
            let id = format!("s{ci}");
            assert_eq!(sample.rows.iter().filter(|r| r.scenario_id == id).count(), 10);
        }
    }

    #[test]
    fn subsample_is_deterministic_and_without_replacement() {
        let ds = toy_dataset(&[30, 20, 10]);
        let a = stratified_subsample(&ds, 20, 42).unwrap();
        let b = stratified_subsample(&ds, 20, 42).unwrap();
        assert_eq!(a, b);
        let c = stratified_subsample(&ds, 20, 43).unwrap();
        assert_ne!(a.rows, c.rows);
        // Full draw returns a permutation of every row.
        let full = stratified_subsample(&ds, 60, 1).unwrap();
        assert_eq!(full.len(), 60);
        let mut seen: Vec<_> = full.rows.iter().map(|r| (r.scenario_id.clone(), r.dvt.to_bits())).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 60);
    }

    #[test]
    fn subsample_respects_proportions_within_one_row() {
        let ds = toy_dataset(&[35, 25, 15, 15, 10]);
        let sample = stratified_subsample(&ds, 50, 3).unwrap();
        for (ci, &size) in [35usize, 25, 15, 15, 10].iter().enumerate() {
            let id = format!("s{ci}");
            let got = sample.rows.iter().filter(|r| r.scenario_id == id).count() as f64;
            let want = 50.0 * size as f64 / 100.0;
            assert!((got - want).abs() <= 1.0, "class {id}: {got} vs {want}");
        }
    }

    #[test]
    fn subsample_insufficient_rows() {
        let ds = toy_dataset(&[5]);
        assert!(matches!(
            stratified_subsample(&ds, 6, 0),
            Err(DataError::InsufficientRows { .. })
        ));
    }

    #[test]
    fn split_sizes_follow_largest_remainder() {
        let ds = toy_dataset(&[50]);
        let spec = SplitSpec::new(0.70, 0.15, 0.15, 9);
        let (train, val, test) = split(&ds, &spec).unwrap();
        // Remainders 0.0/0.5/0.5; the tie goes to the earlier part.
        assert_eq!((train.len(), val.len(), test.len()), (35, 8, 7));

        let ds = toy_dataset(&[10]);
        let spec = SplitSpec::new(0.8, 0.1, 0.1, 9);
        let (train, val, test) = split(&ds, &spec).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    }

    #[test]
    fn split_is_a_partition() {
        let ds = toy_dataset(&[23, 31]);
        let spec = SplitSpec::new(0.6, 0.2, 0.2, 11);
        let (train, val, test) = split(&ds, &spec).unwrap();
        let mut all: Vec<_> = train
            .rows
            .iter()
            .chain(&val.rows)
            .chain(&test.rows)
            .map(|r| (r.scenario_id.clone(), r.dvt.to_bits(), r.vf.to_bits()))
            .collect();
        all.sort();
        let mut orig: Vec<_> = ds
            .rows
            .iter()
            .map(|r| (r.scenario_id.clone(), r.dvt.to_bits(), r.vf.to_bits()))
            .collect();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn degenerate_split_rejected() {
        let ds = toy_dataset(&[4]);
        let spec = SplitSpec::new(0.9, 0.05, 0.05, 1);
        assert!(matches!(split(&ds, &spec), Err(DataError::DegenerateSplit)));
    }

    #[test]
    fn invalid_fractions_rejected() {
        let spec = SplitSpec::new(0.5, 0.5, 0.2, 1);
        assert!(spec.validate().is_err());
        let spec = SplitSpec::new(0.8, 0.2, 0.0, 1);
        assert!(spec.validate().is_err());
    }

    proptest! {
        #[test]
        fn subsample_preserves_class_proportions(
            sizes in proptest::collection::vec(5usize..60, 2..5),
            seed in 0u64..1000,
        ) {
            let ds = toy_dataset(&sizes);
            let total: usize = sizes.iter().sum();
            let n = total / 2;
            let sample = stratified_subsample(&ds, n, seed).unwrap();
            prop_assert_eq!(sample.len(), n);
            for (ci, &size) in sizes.iter().enumerate() {
                let id = format!("s{ci}");
                let got = sample.rows.iter().filter(|r| r.scenario_id == id).count() as f64;
                let want = n as f64 * size as f64 / total as f64;
                prop_assert!((got - want).abs() <= 1.0);
            }
        }

        #[test]
        fn split_always_partitions(m in 6usize..200, seed in 0u64..1000) {
            let ds = toy_dataset(&[m]);
            let spec = SplitSpec::new(0.7, 0.15, 0.15, seed);
            let (train, val, test) = split(&ds, &spec).unwrap();
            prop_assert_eq!(train.len() + val.len() + test.len(), m);
        }
    }
}
