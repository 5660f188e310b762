//! Flat `key=value` run configuration.
//!
//! Lines are `dotted.key = value`, `#` starts a comment, unknown keys are
//! rejected. The effective configuration canonicalizes to sorted key=value
//! lines whose FNV-1a hash stamps every output file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;

use crate::dataset::SplitSpec;
use crate::io::fnv1a64;
use crate::mlp::TrainConfig;
use crate::scalar::{c, Real};
use crate::sim::{
    DisturbanceEvent, ExciterParams, MachineParams, NetworkParams, DEFAULT_DT_SAMPLE,
    DEFAULT_FAULT_DURATION, DEFAULT_T_END,
};
use crate::stats::{enumerate_paper_models, ModelSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', found '{text}'")]
    Malformed { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': cannot parse '{value}' as {wanted}")]
    BadValue { key: String, value: String, wanted: &'static str },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config: {0}")]
    Unreadable(String),
}

/// Raw parsed key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pairs: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: i + 1, text: line.to_string() });
            };
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RawConfig { pairs })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.pairs.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(
        &mut self,
        key: &str,
        wanted: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v,
                wanted,
            }),
        }
    }
}

/// Scenario kinds the default study covers, one trace per disturbance class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    VrefStepUp,
    VrefStepDown,
    FaultSelfClearing,
    FaultClearedByTrip,
    LineTrip,
    LineReclose,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vref_step_up" => Some(Self::VrefStepUp),
            "vref_step_down" => Some(Self::VrefStepDown),
            "fault_self_clearing" => Some(Self::FaultSelfClearing),
            "fault_cleared_by_trip" => Some(Self::FaultClearedByTrip),
            "line_trip" => Some(Self::LineTrip),
            "line_reclose" => Some(Self::LineReclose),
        _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::VrefStepUp => "vref_step_up",
            Self::VrefStepDown => "vref_step_down",
            Self::FaultSelfClearing => "fault_self_clearing",
            Self::FaultClearedByTrip => "fault_cleared_by_trip",
            Self::LineTrip => "line_trip",
            Self::LineReclose => "line_reclose",
        }
    }
}

/// One scenario of the study: operating point plus disturbance schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<F> {
    pub id: String,
    pub kind: ScenarioKind,
    pub p_target: F,
    pub v_t_target: F,
    pub t_start: F,
    /// Fault duration where applicable.
    pub duration: F,
    /// Reclose instant for the line-reclose scenario.
    pub t_reclose: F,
}

impl<F: Real> ScenarioSpec<F> {
    pub fn events(&self) -> Vec<DisturbanceEvent<F>> {
        match self.kind {
            ScenarioKind::VrefStepUp => {
                vec![DisturbanceEvent::vref_step(c(0.10), self.t_start)]
            }
            ScenarioKind::VrefStepDown => {
                vec![DisturbanceEvent::vref_step(c(-0.10), self.t_start)]
            }
            ScenarioKind::FaultSelfClearing => {
                vec![DisturbanceEvent::fault_self_clearing(self.t_start, self.duration)]
            }
            ScenarioKind::FaultClearedByTrip => {
                vec![DisturbanceEvent::fault_cleared_by_trip(self.t_start, self.duration)]
            }
            ScenarioKind::LineTrip => vec![DisturbanceEvent::line_trip(self.t_start)],
            ScenarioKind::LineReclose => vec![
                DisturbanceEvent::line_trip(self.t_start),
                DisturbanceEvent::line_reclose(self.t_reclose),
            ],
        }
    }
}

/// Fully resolved pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<F> {
    pub seed: u64,
    pub scenarios: Vec<ScenarioSpec<F>>,
    pub t_end: F,
    pub dt_sample: F,
    /// Rows drawn for the statistics stage.
    pub stats_sample_n: usize,
    pub split_train: F,
    pub split_val: F,
    pub split_test: F,
    pub alpha: F,
    pub vif_cap: F,
    pub hidden_range: (usize, usize),
    pub restarts: usize,
    /// Optional cap on the rows fed to the ANN stage (default: full pool).
    pub mlp_sample_n: Option<usize>,
    pub models: Vec<String>,
    pub parallel_sweep: bool,
    pub machine: MachineParams<F>,
    pub exciter: ExciterParams<F>,
    pub network: NetworkParams<F>,
    pub train: TrainConfig<F>,
}

/// Default operating points per scenario; spreading the load levels keeps the
/// pooled sample representative of more than one equilibrium.
fn default_scenarios<F: Real>() -> Vec<ScenarioSpec<F>> {
    let mk = |kind: ScenarioKind, p: f64| ScenarioSpec {
        id: kind.name().to_string(),
        kind,
        p_target: c(p),
        v_t_target: c(1.0),
        t_start: c(1.0),
        duration: c(DEFAULT_FAULT_DURATION),
        t_reclose: c(5.0),
    };
    vec![
        mk(ScenarioKind::VrefStepUp, 0.7),
        mk(ScenarioKind::VrefStepDown, 0.7),
        mk(ScenarioKind::FaultSelfClearing, 0.5),
        mk(ScenarioKind::FaultClearedByTrip, 0.5),
        mk(ScenarioKind::LineTrip, 0.6),
        mk(ScenarioKind::LineReclose, 0.6),
    ]
}

impl<F: Real> Default for PipelineConfig<F> {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            scenarios: default_scenarios(),
            t_end: c(DEFAULT_T_END),
            dt_sample: c(DEFAULT_DT_SAMPLE),
            stats_sample_n: 50,
            split_train: c(0.70),
            split_val: c(0.15),
            split_test: c(0.15),
            alpha: c(0.05),
            vif_cap: c(10.0),
            hidden_range: (1, 30),
            restarts: 30,
            mlp_sample_n: None,
            models: vec!["M7".into(), "M8".into()],
            parallel_sweep: true,
            machine: MachineParams::default(),
            exciter: ExciterParams::default(),
            network: NetworkParams::default(),
            train: TrainConfig::default(),
        }
    }
}

fn f_key<F: Real>(
    raw: &mut RawConfig,
    key: &str,
    slot: &mut F,
) -> Result<(), ConfigError> {
    if let Some(v) = raw.take_parsed::<f64>(key, "number")? {
        *slot = c(v);
    }
    Ok(())
}

impl<F: Real> PipelineConfig<F> {
    /// Applies a raw config over the defaults. Unknown keys are errors.
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();

        if let Some(v) = raw.take_parsed::<u64>("seed", "integer")? {
            cfg.seed = v;
        }
        f_key(&mut raw, "t_end", &mut cfg.t_end)?;
        f_key(&mut raw, "dt_sample", &mut cfg.dt_sample)?;
        if let Some(v) = raw.take_parsed::<usize>("stats_sample_n", "integer")? {
            cfg.stats_sample_n = v;
        }
        f_key(&mut raw, "split.train", &mut cfg.split_train)?;
        f_key(&mut raw, "split.val", &mut cfg.split_val)?;
        f_key(&mut raw, "split.test", &mut cfg.split_test)?;
        f_key(&mut raw, "alpha", &mut cfg.alpha)?;
        f_key(&mut raw, "vif_cap", &mut cfg.vif_cap)?;
        if let Some(v) = raw.take("hidden_range") {
            cfg.hidden_range = parse_hidden_range(&v)
                .ok_or(ConfigError::BadValue {
                    key: "hidden_range".into(),
                    value: v,
                    wanted: "a..b with a<=b",
                })?;
        }
        if let Some(v) = raw.take_parsed::<usize>("restarts", "integer")? {
            cfg.restarts = v;
        }
        if let Some(v) = raw.take_parsed::<usize>("mlp_sample_n", "integer")? {
            cfg.mlp_sample_n = Some(v);
        }
        if let Some(v) = raw.take("models") {
            cfg.models = v.split(',').map(|s| s.trim().to_string()).collect();
        }
        if let Some(v) = raw.take_parsed::<bool>("parallel", "true/false")? {
            cfg.parallel_sweep = v;
        }

        // Machine keys mirror the field names.
        f_key(&mut raw, "machine.X_d", &mut cfg.machine.x_d)?;
        f_key(&mut raw, "machine.X_q", &mut cfg.machine.x_q)?;
        f_key(&mut raw, "machine.X_d_p", &mut cfg.machine.x_d_p)?;
        f_key(&mut raw, "machine.X_q_p", &mut cfg.machine.x_q_p)?;
        f_key(&mut raw, "machine.X_d_pp", &mut cfg.machine.x_d_pp)?;
        f_key(&mut raw, "machine.X_q_pp", &mut cfg.machine.x_q_pp)?;
        f_key(&mut raw, "machine.T_d0_p", &mut cfg.machine.t_d0_p)?;
        f_key(&mut raw, "machine.T_d0_pp", &mut cfg.machine.t_d0_pp)?;
        f_key(&mut raw, "machine.T_q0_p", &mut cfg.machine.t_q0_p)?;
        f_key(&mut raw, "machine.T_q0_pp", &mut cfg.machine.t_q0_pp)?;
        f_key(&mut raw, "machine.R_stator", &mut cfg.machine.r_stator)?;
        f_key(&mut raw, "machine.H", &mut cfg.machine.h)?;
        f_key(&mut raw, "machine.damping", &mut cfg.machine.damping)?;
        f_key(&mut raw, "machine.f_nom", &mut cfg.machine.f_nom)?;
        f_key(&mut raw, "machine.S_base", &mut cfg.machine.s_base)?;
        f_key(&mut raw, "machine.V_base", &mut cfg.machine.v_base)?;
        f_key(&mut raw, "machine.X_s", &mut cfg.machine.x_s)?;
        // Short-circuit constants as the nameplate prints them.
        let t_d_p = raw.take_parsed::<f64>("machine.T_d_p", "number")?;
        let t_d_pp = raw.take_parsed::<f64>("machine.T_d_pp", "number")?;
        let t_q_pp = raw.take_parsed::<f64>("machine.T_q_pp", "number")?;
        if t_d_p.is_some() || t_d_pp.is_some() || t_q_pp.is_some() {
            let m = &mut cfg.machine;
            if let Some(v) = t_d_p {
                m.t_d0_p = c::<F>(v) * m.x_d / m.x_d_p;
            }
            if let Some(v) = t_d_pp {
                m.t_d0_pp = c::<F>(v) * m.x_d_p / m.x_d_pp;
            }
            if let Some(v) = t_q_pp {
                m.t_q0_pp = c::<F>(v) * m.x_q_p / m.x_q_pp;
            }
        }

        f_key(&mut raw, "exciter.Ka", &mut cfg.exciter.ka)?;
        f_key(&mut raw, "exciter.Ta", &mut cfg.exciter.ta)?;
        f_key(&mut raw, "exciter.Ke", &mut cfg.exciter.ke)?;
        f_key(&mut raw, "exciter.Te", &mut cfg.exciter.te)?;
        f_key(&mut raw, "exciter.Kf", &mut cfg.exciter.kf)?;
        f_key(&mut raw, "exciter.Tf", &mut cfg.exciter.tf)?;
        f_key(&mut raw, "exciter.Vf_min", &mut cfg.exciter.vf_min)?;
        f_key(&mut raw, "exciter.Vf_max", &mut cfg.exciter.vf_max)?;

        for (i, key_r, key_x) in
            [(0usize, "network.line1_r", "network.line1_x"), (1, "network.line2_r", "network.line2_x")]
        {
            let mut z = cfg.network.line_impedances[i];
            let mut re = z.re;
            let mut im = z.im;
            f_key(&mut raw, key_r, &mut re)?;
            f_key(&mut raw, key_x, &mut im)?;
            z = Complex::new(re, im);
            cfg.network.line_impedances[i] = z;
        }
        {
            let mut re = cfg.network.transformer_impedance.re;
            let mut im = cfg.network.transformer_impedance.im;
            f_key(&mut raw, "network.transformer_r", &mut re)?;
            f_key(&mut raw, "network.transformer_x", &mut im)?;
            cfg.network.transformer_impedance = Complex::new(re, im);
        }
        {
            let mut re = cfg.network.local_load_ohms.re;
            let mut im = cfg.network.local_load_ohms.im;
            f_key(&mut raw, "network.load_r_ohm", &mut re)?;
            f_key(&mut raw, "network.load_x_ohm", &mut im)?;
            cfg.network.local_load_ohms = Complex::new(re, im);
        }
        f_key(&mut raw, "network.V_infinite_bus", &mut cfg.network.v_infinite_bus)?;

        if let Some(v) = raw.take_parsed::<usize>("train.max_epochs", "integer")? {
            cfg.train.max_epochs = v;
        }
        f_key(&mut raw, "train.mu0", &mut cfg.train.mu0)?;
        f_key(&mut raw, "train.mu_dec", &mut cfg.train.mu_dec)?;
        f_key(&mut raw, "train.mu_inc", &mut cfg.train.mu_inc)?;
        f_key(&mut raw, "train.mu_max", &mut cfg.train.mu_max)?;
        if let Some(v) = raw.take_parsed::<usize>("train.patience", "integer")? {
            cfg.train.patience = v;
        }

        // Scenario list and per-scenario overrides.
        if let Some(v) = raw.take("scenarios") {
            let mut scenarios = Vec::new();
            for id in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let kind = ScenarioKind::parse(id).ok_or_else(|| {
                    ConfigError::Invalid(format!("unknown scenario '{id}'"))
                })?;
                let mut base = default_scenarios::<F>()
                    .into_iter()
                    .find(|s| s.kind == kind)
                    .expect("every kind has a default");
                base.id = id.to_string();
                scenarios.push(base);
            }
            if scenarios.is_empty() {
                return Err(ConfigError::Invalid("scenario list is empty".into()));
            }
            cfg.scenarios = scenarios;
        }
        let ids: Vec<String> = cfg.scenarios.iter().map(|s| s.id.clone()).collect();
        for id in &ids {
            let sc = cfg.scenarios.iter_mut().find(|s| s.id == *id).unwrap();
            f_key(&mut raw, &format!("scenario.{id}.p_target"), &mut sc.p_target)?;
            f_key(&mut raw, &format!("scenario.{id}.v_t_target"), &mut sc.v_t_target)?;
            f_key(&mut raw, &format!("scenario.{id}.t_start"), &mut sc.t_start)?;
            f_key(&mut raw, &format!("scenario.{id}.duration"), &mut sc.duration)?;
            f_key(&mut raw, &format!("scenario.{id}.t_reclose"), &mut sc.t_reclose)?;
        }

        if let Some(key) = raw.pairs.keys().next() {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_raw(RawConfig::load(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenarios.is_empty() {
            return Err(ConfigError::Invalid("no scenarios configured".into()));
        }
        if self.hidden_range.0 < 1 || self.hidden_range.0 > self.hidden_range.1 {
            return Err(ConfigError::Invalid("empty hidden range".into()));
        }
        if self.restarts < 1 {
            return Err(ConfigError::Invalid("restarts must be >= 1".into()));
        }
        if self.models.len() < 2 {
            return Err(ConfigError::Invalid("need at least two models to compare".into()));
        }
        let known = enumerate_paper_models();
        for id in &self.models {
            if !known.iter().any(|m| &m.id == id) {
                return Err(ConfigError::Invalid(format!(
                    "unknown model '{id}' (known: M1..M8)"
                )));
            }
        }
        self.machine.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.exciter.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.network.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Model specs selected for the ANN comparison.
    pub fn model_specs(&self) -> Vec<ModelSpec> {
        let known = enumerate_paper_models();
        self.models
            .iter()
            .map(|id| known.iter().find(|m| &m.id == id).expect("validated").clone())
            .collect()
    }

    pub fn split_spec(&self, seed: u64) -> SplitSpec<F> {
        SplitSpec::new(self.split_train, self.split_val, self.split_test, seed)
    }

    /// Canonical `key = value` rendering of the effective configuration;
    /// hashing it stamps the output files.
    pub fn canonical_lines(&self) -> String {
        let mut s = String::new();
        let g = |x: F| crate::io::fmt_g17(x);
        let _ = writeln!(s, "alpha = {}", g(self.alpha));
        let _ = writeln!(s, "dt_sample = {}", g(self.dt_sample));
        let _ = writeln!(s, "exciter.Ka = {}", g(self.exciter.ka));
        let _ = writeln!(s, "exciter.Ke = {}", g(self.exciter.ke));
        let _ = writeln!(s, "exciter.Kf = {}", g(self.exciter.kf));
        let _ = writeln!(s, "exciter.Ta = {}", g(self.exciter.ta));
        let _ = writeln!(s, "exciter.Te = {}", g(self.exciter.te));
        let _ = writeln!(s, "exciter.Tf = {}", g(self.exciter.tf));
        let _ = writeln!(s, "exciter.Vf_max = {}", g(self.exciter.vf_max));
        let _ = writeln!(s, "exciter.Vf_min = {}", g(self.exciter.vf_min));
        let _ = writeln!(s, "hidden_range = {}..{}", self.hidden_range.0, self.hidden_range.1);
        let _ = writeln!(s, "machine.H = {}", g(self.machine.h));
        let _ = writeln!(s, "machine.R_stator = {}", g(self.machine.r_stator));
        let _ = writeln!(s, "machine.S_base = {}", g(self.machine.s_base));
        let _ = writeln!(s, "machine.T_d0_p = {}", g(self.machine.t_d0_p));
        let _ = writeln!(s, "machine.T_d0_pp = {}", g(self.machine.t_d0_pp));
        let _ = writeln!(s, "machine.T_q0_p = {}", g(self.machine.t_q0_p));
        let _ = writeln!(s, "machine.T_q0_pp = {}", g(self.machine.t_q0_pp));
        let _ = writeln!(s, "machine.V_base = {}", g(self.machine.v_base));
        let _ = writeln!(s, "machine.X_d = {}", g(self.machine.x_d));
        let _ = writeln!(s, "machine.X_d_p = {}", g(self.machine.x_d_p));
        let _ = writeln!(s, "machine.X_d_pp = {}", g(self.machine.x_d_pp));
        let _ = writeln!(s, "machine.X_q = {}", g(self.machine.x_q));
        let _ = writeln!(s, "machine.X_q_p = {}", g(self.machine.x_q_p));
        let _ = writeln!(s, "machine.X_q_pp = {}", g(self.machine.x_q_pp));
        let _ = writeln!(s, "machine.X_s = {}", g(self.machine.x_s));
        let _ = writeln!(s, "machine.damping = {}", g(self.machine.damping));
        let _ = writeln!(s, "machine.f_nom = {}", g(self.machine.f_nom));
        let _ = writeln!(s, "mlp_sample_n = {}", match self.mlp_sample_n {
            Some(n) => n.to_string(),
            None => "full".to_string(),
        });
        let _ = writeln!(s, "models = {}", self.models.join(","));
        let _ = writeln!(s, "network.V_infinite_bus = {}", g(self.network.v_infinite_bus));
        for (i, z) in self.network.line_impedances.iter().enumerate() {
            let _ = writeln!(s, "network.line{}_r = {}", i + 1, g(z.re));
            let _ = writeln!(s, "network.line{}_x = {}", i + 1, g(z.im));
        }
        let _ = writeln!(s, "network.load_r_ohm = {}", g(self.network.local_load_ohms.re));
        let _ = writeln!(s, "network.load_x_ohm = {}", g(self.network.local_load_ohms.im));
        let _ = writeln!(s, "network.transformer_r = {}", g(self.network.transformer_impedance.re));
        let _ = writeln!(s, "network.transformer_x = {}", g(self.network.transformer_impedance.im));
        let _ = writeln!(s, "parallel = {}", self.parallel_sweep);
        let _ = writeln!(s, "restarts = {}", self.restarts);
        for sc in &self.scenarios {
            let _ = writeln!(s, "scenario.{}.duration = {}", sc.id, g(sc.duration));
            let _ = writeln!(s, "scenario.{}.kind = {}", sc.id, sc.kind.name());
            let _ = writeln!(s, "scenario.{}.p_target = {}", sc.id, g(sc.p_target));
            let _ = writeln!(s, "scenario.{}.t_reclose = {}", sc.id, g(sc.t_reclose));
            let _ = writeln!(s, "scenario.{}.t_start = {}", sc.id, g(sc.t_start));
            let _ = writeln!(s, "scenario.{}.v_t_target = {}", sc.id, g(sc.v_t_target));
        }
        let _ = writeln!(
            s,
            "scenarios = {}",
            self.scenarios.iter().map(|x| x.id.as_str()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "split.test = {}", g(self.split_test));
        let _ = writeln!(s, "split.train = {}", g(self.split_train));
        let _ = writeln!(s, "split.val = {}", g(self.split_val));
        let _ = writeln!(s, "stats_sample_n = {}", self.stats_sample_n);
        let _ = writeln!(s, "t_end = {}", g(self.t_end));
        let _ = writeln!(s, "train.max_epochs = {}", self.train.max_epochs);
        let _ = writeln!(s, "train.mu0 = {}", g(self.train.mu0));
        let _ = writeln!(s, "train.mu_dec = {}", g(self.train.mu_dec));
        let _ = writeln!(s, "train.mu_inc = {}", g(self.train.mu_inc));
        let _ = writeln!(s, "train.mu_max = {}", g(self.train.mu_max));
        let _ = writeln!(s, "train.patience = {}", self.train.patience);
        s
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_lines().as_bytes())
    }
}

/// Parses "a..b" (inclusive). Returns None when empty or malformed.
pub fn parse_hidden_range(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once("..")?;
    let a: usize = a.trim().parse().ok()?;
    let b: usize = b.trim().parse().ok()?;
    if a < 1 || a > b {
        return None;
    }
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_study_constants() {
        let cfg: PipelineConfig<f64> = PipelineConfig::default();
        assert_eq!(cfg.stats_sample_n, 50);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.vif_cap, 10.0);
        assert_eq!(cfg.hidden_range, (1, 30));
        assert_eq!(cfg.restarts, 30);
        assert_eq!(cfg.scenarios.len(), 6);
        assert_eq!(cfg.dt_sample, 0.005);
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_overrides_and_reject_unknown() {
        let cfg: PipelineConfig<f64> = PipelineConfig::from_raw(
            RawConfig::parse(
                "seed = 9\nmachine.X_d = 1.9 # comment\nexciter.Ka = 3.0\nhidden_range = 2..5\n",
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.machine.x_d, 1.9);
        assert_eq!(cfg.exciter.ka, 3.0);
        assert_eq!(cfg.hidden_range, (2, 5));

        let err = PipelineConfig::<f64>::from_raw(
            RawConfig::parse("machine.X_dd = 1.0\n").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(_)));
    }

    #[test]
    fn malformed_line_is_reported_with_number() {
        let err = RawConfig::parse("seed = 1\nnot a pair\n").unwrap_err();
        assert!(matches!(err, ConfigError::Malformed { line: 2, .. }));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a: PipelineConfig<f64> = PipelineConfig::default();
        let b: PipelineConfig<f64> = PipelineConfig::default();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 2;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn hidden_range_parsing() {
        assert_eq!(parse_hidden_range("1..30"), Some((1, 30)));
        assert_eq!(parse_hidden_range("5..3"), None);
        assert_eq!(parse_hidden_range("0..3"), None);
        assert_eq!(parse_hidden_range("x..3"), None);
        assert_eq!(parse_hidden_range("7"), None);
    }

    #[test]
    fn short_circuit_constants_convert() {
        let cfg: PipelineConfig<f64> = PipelineConfig::from_raw(
            RawConfig::parse("machine.T_d_p = 0.3\n").unwrap(),
        )
        .unwrap();
        assert!((cfg.machine.t_d0_p - 0.3 * 1.83 / 0.24).abs() < 1e-15);
    }

    #[test]
    fn scenario_selection_and_override() {
        let cfg: PipelineConfig<f64> = PipelineConfig::from_raw(
            RawConfig::parse(
                "scenarios = fault_self_clearing, line_trip\nscenario.fault_self_clearing.duration = 0.2\n",
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(cfg.scenarios.len(), 2);
        assert_eq!(cfg.scenarios[0].duration, 0.2);
        assert_eq!(cfg.scenarios[1].kind, ScenarioKind::LineTrip);
    }
}
