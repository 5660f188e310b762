//! Machine, exciter, network and disturbance parameter sets.
//!
//! Defaults reproduce the studied 13.8 kV / 150 MVA, 50 Hz unit. The nameplate
//! lists short-circuit transient/subtransient time constants; the solver wants
//! the open-circuit ones, so the defaults convert through the standard
//! reactance ratios (T'_d0 = T'_d X_d / X'_d and so on).

use num_complex::Complex;

use super::SimError;
use crate::scalar::{c, Real};

/// Synchronous machine constants, per-unit on the machine base.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineParams<F> {
    /// d/q-axis synchronous reactances.
    pub x_d: F,
    pub x_q: F,
    /// d/q-axis transient reactances.
    pub x_d_p: F,
    pub x_q_p: F,
    /// d/q-axis subtransient reactances.
    pub x_d_pp: F,
    pub x_q_pp: F,
    /// Open-circuit d-axis transient / subtransient time constants, seconds.
    pub t_d0_p: F,
    pub t_d0_pp: F,
    /// Open-circuit q-axis transient / subtransient time constants, seconds.
    pub t_q0_p: F,
    pub t_q0_pp: F,
    /// Stator resistance, per-unit.
    pub r_stator: F,
    /// Inertia constant H, seconds.
    pub h: F,
    /// Mechanical damping torque coefficient, pu torque per pu slip.
    pub damping: F,
    /// Nominal frequency, Hz.
    pub f_nom: F,
    /// Machine MVA base, VA.
    pub s_base: F,
    /// Rated line-to-line voltage, volts.
    pub v_base: F,
    /// Synchronous reactance used by the power-angle consistency check.
    pub x_s: F,
}

impl<F: Real> Default for MachineParams<F> {
    fn default() -> Self {
        // The nameplate time constants are taken as open-circuit values;
        // `set_short_circuit_constants` applies the alternative reading.
        MachineParams {
            x_d: c(1.83),
            x_q: c(1.7),
            x_d_p: c(0.24),
            x_q_p: c(0.43),
            x_d_pp: c(0.20),
            x_q_pp: c(0.26),
            t_d0_p: c(0.3),
            t_d0_pp: c(0.04),
            // The nameplate gives no q-axis transient constant; 0.5 s is a
            // typical turbo-generator value and is configurable.
            t_q0_p: c(0.5),
            t_q0_pp: c(0.031),
            r_stator: c(0.003),
            h: c(3.6),
            // Lumped damper/load damping torque; the nameplate lists none.
            damping: c(2.0),
            f_nom: c(50.0),
            s_base: c(150e6),
            v_base: c(13.8e3),
            x_s: c(1.7),
        }
    }
}

impl<F: Real> MachineParams<F> {
    /// Base impedance V_base^2 / S_base in ohms (1.2696 for the default unit).
    pub fn z_base(&self) -> F {
        self.v_base * self.v_base / self.s_base
    }

    /// Synchronous speed in electrical rad/s.
    pub fn omega_s(&self) -> F {
        c::<F>(2.0 * std::f64::consts::PI) * self.f_nom
    }

    /// Sets the d/q transient and subtransient time constants from their
    /// short-circuit (nameplate) values.
    pub fn set_short_circuit_constants(&mut self, t_d_p: F, t_d_pp: F, t_q_pp: F) {
        self.t_d0_p = t_d_p * self.x_d / self.x_d_p;
        self.t_d0_pp = t_d_pp * self.x_d_p / self.x_d_pp;
        self.t_q0_pp = t_q_pp * self.x_q_p / self.x_q_pp;
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let zero = F::zero();
        if !(self.x_d > self.x_d_p && self.x_d_p > self.x_d_pp && self.x_d_pp > zero) {
            return Err(SimError::InvalidParams(
                "reactance ordering X_d > X_d' > X_d'' > 0 violated".into(),
            ));
        }
        if !(self.x_q > self.x_q_p && self.x_q_p > self.x_q_pp && self.x_q_pp > zero) {
            return Err(SimError::InvalidParams(
                "reactance ordering X_q > X_q' > X_q'' > 0 violated".into(),
            ));
        }
        for (name, v) in [
            ("T_d0_p", self.t_d0_p),
            ("T_d0_pp", self.t_d0_pp),
            ("T_q0_p", self.t_q0_p),
            ("T_q0_pp", self.t_q0_pp),
            ("H", self.h),
            ("f_nom", self.f_nom),
            ("S_base", self.s_base),
            ("V_base", self.v_base),
            ("X_s", self.x_s),
        ] {
            if !(v > zero) {
                return Err(SimError::InvalidParams(format!("{name} must be > 0")));
            }
        }
        if self.r_stator < zero || self.damping < zero {
            return Err(SimError::InvalidParams("R_stator and damping must be >= 0".into()));
        }
        Ok(())
    }
}

/// Rotating-exciter (DC1A-style) voltage regulator constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ExciterParams<F> {
    pub ka: F,
    pub ta: F,
    pub ke: F,
    pub te: F,
    pub kf: F,
    pub tf: F,
    /// Field-voltage ceiling, per-unit.
    pub vf_min: F,
    pub vf_max: F,
}

impl<F: Real> Default for ExciterParams<F> {
    fn default() -> Self {
        ExciterParams {
            ka: c(2.50),
            ta: c(0.001),
            ke: c(1.5),
            te: c(0.3),
            kf: c(1.0),
            tf: c(0.003),
            vf_min: c(-6.0),
            vf_max: c(6.0),
        }
    }
}

impl<F: Real> ExciterParams<F> {
    pub fn validate(&self) -> Result<(), SimError> {
        let zero = F::zero();
        if !(self.ta > zero && self.te > zero && self.tf > zero) {
            return Err(SimError::InvalidParams("Ta, Te, Tf must be > 0".into()));
        }
        if !(self.vf_min < self.vf_max) {
            return Err(SimError::InvalidParams("Vf_min must be < Vf_max".into()));
        }
        Ok(())
    }
}

/// Single machine-infinite bus network: step-up transformer, two parallel
/// line circuits and a local constant-impedance load at the generator bus.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<F> {
    /// Per-circuit series impedances, per-unit on machine base. Exactly two
    /// circuits at scenario start; trips remove them from the tail.
    pub line_impedances: Vec<Complex<F>>,
    /// Step-up transformer series impedance, per-unit.
    pub transformer_impedance: Complex<F>,
    /// Local load impedance in ohms; converted on Z_base = V_base^2/S_base.
    pub local_load_ohms: Complex<F>,
    /// Infinite-bus voltage magnitude, per-unit.
    pub v_infinite_bus: F,
}

impl<F: Real> Default for NetworkParams<F> {
    fn default() -> Self {
        // The local load is sized to draw 0.09 + j0.056 pu at nominal voltage
        // (13.5 MW + 8.4 MVAr on the 150 MVA base). Expressed in ohms on
        // Z_base = 1.2696 ohm that is 10.169 + j6.328.
        let s_load = Complex::new(0.09_f64, 0.056);
        let z_pu = Complex::new(1.0, 0.0) / s_load.conj();
        let z_base = 13.8e3_f64 * 13.8e3 / 150e6;
        NetworkParams {
            line_impedances: vec![Complex::new(c(0.0), c(0.5)), Complex::new(c(0.0), c(0.5))],
            transformer_impedance: Complex::new(c(0.0), c(0.15)),
            local_load_ohms: Complex::new(c(z_pu.re * z_base), c(z_pu.im * z_base)),
            v_infinite_bus: c(1.0),
        }
    }
}

impl<F: Real> NetworkParams<F> {
    /// Local load impedance in per-unit on the given base impedance (ohms).
    pub fn local_load_pu(&self, z_base: F) -> Complex<F> {
        Complex::new(self.local_load_ohms.re / z_base, self.local_load_ohms.im / z_base)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.line_impedances.len() != 2 {
            return Err(SimError::InvalidParams(
                "exactly two line circuits are required at scenario start".into(),
            ));
        }
        if !(self.v_infinite_bus > F::zero()) {
            return Err(SimError::InvalidParams("V_infinite_bus must be > 0".into()));
        }
        Ok(())
    }
}

/// Disturbance classes applied on top of an equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceKind<F> {
    /// Step in the voltage reference by the given fraction (+0.10 / -0.10).
    VrefStep(F),
    /// Three-phase fault at the generator terminals, removed after `duration`.
    TerminalFaultSelfClearing,
    /// Terminal fault cleared by tripping one line circuit after `duration`.
    TerminalFaultClearedByTrip,
    /// One line circuit removed.
    LineTrip,
    /// A previously tripped circuit restored.
    LineReclose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceEvent<F> {
    pub kind: DisturbanceKind<F>,
    /// Event start, seconds.
    pub t_start: F,
    /// Fault duration, seconds; unused for steps, trips and recloses.
    pub duration: F,
}

/// Default fault clearing time: 120 ms.
pub const DEFAULT_FAULT_DURATION: f64 = 0.120;

impl<F: Real> DisturbanceEvent<F> {
    pub fn vref_step(fraction: F, t_start: F) -> Self {
        DisturbanceEvent { kind: DisturbanceKind::VrefStep(fraction), t_start, duration: F::zero() }
    }

    pub fn fault_self_clearing(t_start: F, duration: F) -> Self {
        DisturbanceEvent { kind: DisturbanceKind::TerminalFaultSelfClearing, t_start, duration }
    }

    pub fn fault_cleared_by_trip(t_start: F, duration: F) -> Self {
        DisturbanceEvent { kind: DisturbanceKind::TerminalFaultClearedByTrip, t_start, duration }
    }

    pub fn line_trip(t_start: F) -> Self {
        DisturbanceEvent { kind: DisturbanceKind::LineTrip, t_start, duration: F::zero() }
    }

    pub fn line_reclose(t_start: F) -> Self {
        DisturbanceEvent { kind: DisturbanceKind::LineReclose, t_start, duration: F::zero() }
    }

    /// Time at which the event stops altering the network (fault end for
    /// faults, the instant itself otherwise).
    pub fn t_release(&self) -> F {
        match self.kind {
            DisturbanceKind::TerminalFaultSelfClearing
            | DisturbanceKind::TerminalFaultClearedByTrip => self.t_start + self.duration,
            _ => self.t_start,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let is_fault = matches!(
            self.kind,
            DisturbanceKind::TerminalFaultSelfClearing
                | DisturbanceKind::TerminalFaultClearedByTrip
        );
        if is_fault && !(self.duration > F::zero()) {
            return Err(SimError::InvalidParams("fault duration must be > 0".into()));
        }
        if !(self.t_start > F::zero()) {
            return Err(SimError::InvalidParams("t_start must be > 0".into()));
        }
        Ok(())
    }
}
