//! Machine/exciter dynamics and the steady-state solver.
//!
//! The generator is the sixth-order two-axis subtransient model (states
//! delta, omega, E'_q, E'_d, E''_q, E''_d) behind the quasi-static stator
//! equations
//!
//! ```text
//!   V_d = E''_d - R_s I_d + X''_q I_q
//!   V_q = E''_q - R_s I_q - X''_d I_d
//! ```
//!
//! coupled to a Thevenin reduction of the external network. The exciter is a
//! regulator lag, a first-order exciter block and a washout rate feedback,
//! integrated together with the machine by fixed-step classic Runge-Kutta.

use num_complex::Complex;

use super::params::{ExciterParams, MachineParams, NetworkParams};
use super::SimError;
use crate::scalar::{c, Real};

/// Thevenin equivalent seen from the generator terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thevenin<F> {
    pub z: Complex<F>,
    pub v: Complex<F>,
}

/// Fault shunt impedance used for a bolted terminal fault, per-unit.
pub const FAULT_SHUNT_PU: f64 = 1e-4;

impl<F: Real> Thevenin<F> {
    /// Reduces the network (local load, optional fault shunt, transformer and
    /// the in-service line circuits to the infinite bus) to a Thevenin source.
    pub fn from_network(
        net: &NetworkParams<F>,
        z_base: F,
        lines_in_service: usize,
        fault_shunt: Option<F>,
    ) -> Result<Self, SimError> {
        let zero = Complex::new(F::zero(), F::zero());
        let one = Complex::new(F::one(), F::zero());

        let z_load = net.local_load_pu(z_base);
        let mut y_shunt = one / z_load;
        if let Some(zf) = fault_shunt {
            y_shunt = y_shunt + one / Complex::new(zf, F::zero());
        }

        let n = lines_in_service.min(net.line_impedances.len());
        let mut y_lines = zero;
        for zl in net.line_impedances.iter().take(n) {
            y_lines = y_lines + one / *zl;
        }
        let y_series = if n == 0 {
            zero
        } else {
            one / (net.transformer_impedance + one / y_lines)
        };

        let y_total = y_shunt + y_series;
        if y_total.norm_sqr() < c::<F>(1e-12) {
            return Err(SimError::InvalidParams(
                "network has no shunt or series admittance at the terminals".into(),
            ));
        }
        let z = one / y_total;
        let v = Complex::new(net.v_infinite_bus, F::zero()) * y_series / y_total;
        Ok(Thevenin { z, v })
    }
}

/// Full dynamic state plus the operating-point constants carried with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState<F> {
    pub t: F,
    /// Rotor q-axis angle relative to the infinite-bus frame, rad.
    pub delta_sync: F,
    /// Rotor speed, per-unit.
    pub omega: F,
    pub eq_p: F,
    pub ed_p: F,
    pub eq_pp: F,
    pub ed_pp: F,
    /// Regulator output.
    pub v_r: F,
    /// Field (excitation) voltage.
    pub e_fd: F,
    /// Washout feedback state.
    pub wash: F,
    /// Voltage reference implied by the solved equilibrium.
    pub v_ref: F,
    /// Constant mechanical power input.
    pub p_mech: F,
}

/// Algebraic quantities of one network solution.
#[derive(Debug, Clone, Copy)]
pub struct NetSolution<F> {
    pub i_d: F,
    pub i_q: F,
    pub v_d: F,
    pub v_q: F,
    pub v_t: F,
    pub p_term: F,
    pub q_term: F,
    pub p_airgap: F,
}

/// Solves the stator + Thevenin algebraic equations for the given rotor
/// position and subtransient emfs.
pub fn solve_network<F: Real>(
    machine: &MachineParams<F>,
    thev: &Thevenin<F>,
    delta_sync: F,
    eq_pp: F,
    ed_pp: F,
) -> NetSolution<F> {
    // Rotate the Thevenin source into the rotor frame: f_q = Re(F e^{-jd}),
    // f_d = -Im(F e^{-jd}).
    let rot = Complex::new(delta_sync.cos(), -delta_sync.sin());
    let vth = thev.v * rot;
    let vth_q = vth.re;
    let vth_d = -vth.im;

    let r = machine.r_stator + thev.z.re;
    let xd = machine.x_d_pp + thev.z.im;
    let xq = machine.x_q_pp + thev.z.im;

    // [ r  -xq ] [i_d]   [ed_pp - vth_d]
    // [ xd   r ] [i_q] = [eq_pp - vth_q]
    let b1 = ed_pp - vth_d;
    let b2 = eq_pp - vth_q;
    let det = r * r + xq * xd;
    let i_d = (b1 * r + xq * b2) / det;
    let i_q = (r * b2 - xd * b1) / det;

    let v_d = ed_pp - machine.r_stator * i_d + machine.x_q_pp * i_q;
    let v_q = eq_pp - machine.r_stator * i_q - machine.x_d_pp * i_d;
    let v_t = (v_d * v_d + v_q * v_q).sqrt();
    let p_term = v_d * i_d + v_q * i_q;
    let q_term = v_q * i_d - v_d * i_q;
    let p_airgap = p_term + machine.r_stator * (i_d * i_d + i_q * i_q);

    NetSolution { i_d, i_q, v_d, v_q, v_t, p_term, q_term, p_airgap }
}

/// State derivative. Returns the 9-vector in the order
/// (delta, omega, E'_q, E'_d, E''_q, E''_d, V_R, E_fd, wash).
fn derivatives<F: Real>(
    s: &SimState<F>,
    machine: &MachineParams<F>,
    exciter: &ExciterParams<F>,
    thev: &Thevenin<F>,
) -> [F; 9] {
    let net = solve_network(machine, thev, s.delta_sync, s.eq_pp, s.ed_pp);
    let one = F::one();
    let two = c::<F>(2.0);

    let d_delta = machine.omega_s() * (s.omega - one);
    let slip = s.omega - one;
    let d_omega =
        ((s.p_mech - net.p_airgap) / s.omega - machine.damping * slip) / (two * machine.h);

    let d_eq_p =
        (s.e_fd - s.eq_p - (machine.x_d - machine.x_d_p) * net.i_d) / machine.t_d0_p;
    let d_ed_p = (-s.ed_p + (machine.x_q - machine.x_q_p) * net.i_q) / machine.t_q0_p;
    let d_eq_pp =
        (s.eq_p - s.eq_pp - (machine.x_d_p - machine.x_d_pp) * net.i_d) / machine.t_d0_pp;
    let d_ed_pp =
        (s.ed_p - s.ed_pp + (machine.x_q_p - machine.x_q_pp) * net.i_q) / machine.t_q0_pp;

    // Washout rate feedback V_F = Kf sTf/(1+sTf) E_fd, realized with the
    // lag state y = E_fd/(1+sTf) so V_F = Kf (E_fd - y). Unit high-frequency
    // gain: |V_F| <= Kf |dE_fd|.
    let v_fb = exciter.kf * (s.e_fd - s.wash);
    let v_err = s.v_ref - net.v_t - v_fb;
    let d_v_r = (exciter.ka * v_err - s.v_r) / exciter.ta;
    let mut d_e_fd = (s.v_r - exciter.ke * s.e_fd) / exciter.te;
    // Non-windup ceiling on the field voltage.
    if (s.e_fd >= exciter.vf_max && d_e_fd > F::zero())
        || (s.e_fd <= exciter.vf_min && d_e_fd < F::zero())
    {
        d_e_fd = F::zero();
    }
    let d_wash = (s.e_fd - s.wash) / exciter.tf;

    [d_delta, d_omega, d_eq_p, d_ed_p, d_eq_pp, d_ed_pp, d_v_r, d_e_fd, d_wash]
}

fn add_scaled<F: Real>(s: &SimState<F>, d: &[F; 9], h: F) -> SimState<F> {
    SimState {
        t: s.t,
        delta_sync: s.delta_sync + h * d[0],
        omega: s.omega + h * d[1],
        eq_p: s.eq_p + h * d[2],
        ed_p: s.ed_p + h * d[3],
        eq_pp: s.eq_pp + h * d[4],
        ed_pp: s.ed_pp + h * d[5],
        v_r: s.v_r + h * d[6],
        e_fd: s.e_fd + h * d[7],
        wash: s.wash + h * d[8],
        v_ref: s.v_ref,
        p_mech: s.p_mech,
    }
}

/// Advances the state one fixed step of classic 4th-order Runge-Kutta.
///
/// `h` must satisfy `h <= Ta/5` so the fastest exciter mode stays well inside
/// the stability region.
pub fn step<F: Real>(
    s: &SimState<F>,
    machine: &MachineParams<F>,
    exciter: &ExciterParams<F>,
    thev: &Thevenin<F>,
    h: F,
) -> Result<SimState<F>, SimError> {
    debug_assert!(h > F::zero());
    let half = h / c::<F>(2.0);
    let k1 = derivatives(s, machine, exciter, thev);
    let s2 = add_scaled(s, &k1, half);
    let k2 = derivatives(&s2, machine, exciter, thev);
    let s3 = add_scaled(s, &k2, half);
    let k3 = derivatives(&s3, machine, exciter, thev);
    let s4 = add_scaled(s, &k3, h);
    let k4 = derivatives(&s4, machine, exciter, thev);

    let sixth = h / c::<F>(6.0);
    let two = c::<F>(2.0);
    let mut combo = [F::zero(); 9];
    for i in 0..9 {
        combo[i] = k1[i] + two * k2[i] + two * k3[i] + k4[i];
    }
    let mut next = add_scaled(s, &combo, sixth);
    next.t = s.t + h;
    // Hard ceiling; the non-windup limiter already zeroes the derivative.
    next.e_fd = next.e_fd.min(exciter.vf_max).max(exciter.vf_min);

    let fields = [
        next.delta_sync,
        next.omega,
        next.eq_p,
        next.ed_p,
        next.eq_pp,
        next.ed_pp,
        next.v_r,
        next.e_fd,
        next.wash,
    ];
    let cap = c::<F>(1e3);
    for v in fields {
        if !v.is_finite() || v.abs() > cap {
            return Err(SimError::NumericDivergence { t: next.t.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(next)
}

/// Active power transferred at load angle `delta` per the classic
/// power-angle relation `P = E_f V_T sin(delta) / X_s`.
pub fn power_angle_p<F: Real>(e_f: F, v_t: F, x_s: F, delta: F) -> F {
    assert!(x_s > F::zero(), "X_s must be positive");
    e_f * v_t / x_s * delta.sin()
}

/// Maximum derivative magnitude accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Solves the pre-disturbance equilibrium for the requested terminal active
/// power and voltage magnitude, back-solving the regulator reference that
/// holds it.
pub fn init_steady_state<F: Real>(
    machine: &MachineParams<F>,
    exciter: &ExciterParams<F>,
    network: &NetworkParams<F>,
    p_target: F,
    v_t_target: F,
) -> Result<SimState<F>, SimError> {
    machine.validate()?;
    exciter.validate()?;
    network.validate()?;
    if !(v_t_target >= c(0.8) && v_t_target <= c(1.2)) {
        return Err(SimError::InvalidParams("V_T target outside [0.8, 1.2]".into()));
    }

    let thev = Thevenin::from_network(network, machine.z_base(), usize::MAX, None)?;
    let v = v_t_target;
    let p = p_target;
    let (r, x) = (thev.z.re, thev.z.im);
    let m = thev.v.norm_sqr();

    // |V - Z (P - jQ)/V| = |V_th| is quadratic in Q: with
    // a(Q) = V - (RP + XQ)/V and b(Q) = (XP - RQ)/V, solve a^2 + b^2 = m.
    let a0 = v - r * p / v;
    let b0 = x * p / v;
    let alpha = (x * x + r * r) / (v * v);
    let beta = c::<F>(-2.0) * (a0 * x + b0 * r) / v;
    let gamma = a0 * a0 + b0 * b0 - m;
    let disc = beta * beta - c::<F>(4.0) * alpha * gamma;
    if disc < F::zero() {
        return Err(SimError::NoEquilibrium(format!(
            "P = {} pu exceeds the network transfer capability at V_T = {}",
            p.to_f64().unwrap_or(f64::NAN),
            v.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let sq = disc.sqrt();
    let two_a = c::<F>(2.0) * alpha;
    let q1 = (-beta + sq) / two_a;
    let q2 = (-beta - sq) / two_a;
    // The physical branch is the low-|Q| root; the other is the far-reactive
    // power-circle intersection.
    let q = if q1.abs() <= q2.abs() { q1 } else { q2 };

    let a = a0 - x * q / v;
    let b = b0 - r * q / v;
    let u = Complex::new(a, -b);
    let theta = thev.v.arg() - u.arg();
    let v_term = Complex::new(v * theta.cos(), v * theta.sin());
    let i_term = Complex::new(p, -q) * Complex::new(theta.cos(), theta.sin()) / v;

    // Rotor position from the q-axis locator E_Q = V + (R + jX_q) I.
    let zq = Complex::new(machine.r_stator, machine.x_q);
    let locator = v_term + zq * i_term;
    let delta_sync = locator.arg();

    let rot = Complex::new(delta_sync.cos(), -delta_sync.sin());
    let v_rot = v_term * rot;
    let i_rot = i_term * rot;
    let (v_q, v_d) = (v_rot.re, -v_rot.im);
    let (i_q, i_d) = (i_rot.re, -i_rot.im);

    let rs = machine.r_stator;
    let eq_p = v_q + rs * i_q + machine.x_d_p * i_d;
    let ed_p = v_d + rs * i_d - machine.x_q_p * i_q;
    let eq_pp = v_q + rs * i_q + machine.x_d_pp * i_d;
    let ed_pp = v_d + rs * i_d - machine.x_q_pp * i_q;
    let e_fd = v_q + rs * i_q + machine.x_d * i_d;
    if e_fd > exciter.vf_max || e_fd < exciter.vf_min {
        return Err(SimError::NoEquilibrium(format!(
            "required field voltage {} pu is outside the exciter ceiling",
            e_fd.to_f64().unwrap_or(f64::NAN)
        )));
    }

    let p_mech = p + rs * (i_d * i_d + i_q * i_q);
    let v_r = exciter.ke * e_fd;
    let v_ref = v_t_target + v_r / exciter.ka;
    let wash = e_fd; // washout lag settled, so the feedback is zero

    let state = SimState {
        t: F::zero(),
        delta_sync,
        omega: F::one(),
        eq_p,
        ed_p,
        eq_pp,
        ed_pp,
        v_r,
        e_fd,
        wash,
        v_ref,
        p_mech,
    };

    // The construction is closed-form; residual derivatives beyond rounding
    // noise mean the requested point is inconsistent.
    let d = derivatives(&state, machine, exciter, &thev);
    for v in d {
        if !v.is_finite() || v.abs() > c(EQUILIBRIUM_TOL) {
            return Err(SimError::NoEquilibrium(format!(
                "equilibrium residual {} exceeds {}",
                v.to_f64().unwrap_or(f64::NAN),
                EQUILIBRIUM_TOL
            )));
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (MachineParams<f64>, ExciterParams<f64>, NetworkParams<f64>) {
        (MachineParams::default(), ExciterParams::default(), NetworkParams::default())
    }

    #[test]
    fn power_angle_examples() {
        // Direct evaluation of the power-angle relation.
        let p = power_angle_p(1.2, 1.0, 1.83, std::f64::consts::FRAC_PI_6);
        assert!((p - 0.32787).abs() < 1e-5, "P = {p}");
        assert_eq!(power_angle_p(1.5, 1.0, 1.83, 0.0), 0.0);
        let p = power_angle_p(1.0, 1.0, 1.0, std::f64::consts::FRAC_PI_2);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_has_zero_derivatives_and_unit_speed() {
        let (m, e, n) = defaults();
        let s = init_steady_state(&m, &e, &n, 0.8, 1.0).unwrap();
        assert_eq!(s.omega, 1.0);
        let thev = Thevenin::from_network(&n, m.z_base(), 2, None).unwrap();
        let d = derivatives(&s, &m, &e, &thev);
        for v in d {
            assert!(v.abs() < 1e-8, "derivative {v} not at equilibrium");
        }
    }

    #[test]
    fn zero_power_target_gives_zero_load_angle_and_power() {
        let (m, e, n) = defaults();
        let s = init_steady_state(&m, &e, &n, 0.0, 1.0).unwrap();
        let thev = Thevenin::from_network(&n, m.z_base(), 2, None).unwrap();
        let net = solve_network(&m, &thev, s.delta_sync, s.eq_pp, s.ed_pp);
        assert!(net.p_term.abs() < 1e-9, "P = {}", net.p_term);
        // Load angle between rotor and terminal voltage; the small residual
        // is the stator-resistance contribution R_s Q / X_q.
        let delta_load = net.v_d.atan2(net.v_q);
        assert!(delta_load.abs() < 1e-3, "delta = {delta_load}");
        // The local load dominates the reactive output at this point.
        assert!((net.q_term - 0.056).abs() < 0.01, "Q = {}", net.q_term);
    }

    #[test]
    fn stepping_equilibrium_changes_nothing() {
        let (m, e, n) = defaults();
        let s0 = init_steady_state(&m, &e, &n, 0.8, 1.0).unwrap();
        let thev = Thevenin::from_network(&n, m.z_base(), 2, None).unwrap();
        let mut s = s0;
        for _ in 0..5000 {
            s = step(&s, &m, &e, &thev, 2e-4).unwrap();
        }
        // One second of integration.
        assert!((s.delta_sync - s0.delta_sync).abs() < 1e-6);
        assert!((s.omega - s0.omega).abs() < 1e-9);
        assert!((s.e_fd - s0.e_fd).abs() < 1e-6);
        assert!((s.eq_p - s0.eq_p).abs() < 1e-6);
    }

    #[test]
    fn infeasible_transfer_is_rejected() {
        let (m, e, n) = defaults();
        let err = init_steady_state(&m, &e, &n, 5.0, 1.0).unwrap_err();
        assert!(matches!(err, SimError::NoEquilibrium(_)));
    }

    #[test]
    fn rk4_shows_fourth_order_convergence() {
        // Free response from a strongly perturbed state is smooth (no event
        // switching); halving the step should shrink the global error by
        // ~2^4. The perturbation and horizon are sized so truncation error
        // sits far above rounding noise.
        let (m, e, n) = defaults();
        let thev = Thevenin::from_network(&n, m.z_base(), 2, None).unwrap();
        let mut s0 = init_steady_state(&m, &e, &n, 0.6, 1.0).unwrap();
        // Perturb only states whose response stays clear of the exciter
        // ceiling; a field-voltage kick would engage the non-windup limiter
        // and break smoothness.
        s0.delta_sync += 0.3;
        s0.omega += 0.002;
        s0.eq_p += 0.05;

        let integrate = |h: f64, t_end: f64| {
            let mut s = s0;
            let n_steps = (t_end / h).round() as usize;
            for _ in 0..n_steps {
                s = step(&s, &m, &e, &thev, h).unwrap();
            }
            s
        };
        let t_end = 0.2;
        let reference = integrate(4e-4 / 32.0, t_end);
        let err = |s: &SimState<f64>| {
            let d = [
                s.delta_sync - reference.delta_sync,
                s.omega - reference.omega,
                s.eq_p - reference.eq_p,
                s.ed_p - reference.ed_p,
                s.eq_pp - reference.eq_pp,
                s.ed_pp - reference.ed_pp,
                s.v_r - reference.v_r,
                s.e_fd - reference.e_fd,
                s.wash - reference.wash,
            ];
            d.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        // One step of 2h against two steps of h, at the operational h.
        let e1 = err(&integrate(4e-4, t_end));
        let e2 = err(&integrate(2e-4, t_end));
        assert!(e1 > 1e-13, "truncation error too small to measure: {e1:e}");
        let ratio = e1 / e2;
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x error reduction when halving h, got {ratio} (e1={e1:e}, e2={e2:e})"
        );
    }

    #[test]
    fn bolted_fault_collapses_terminal_voltage() {
        let (m, e, n) = defaults();
        let s = init_steady_state(&m, &e, &n, 0.8, 1.0).unwrap();
        let faulted =
            Thevenin::from_network(&n, m.z_base(), 2, Some(FAULT_SHUNT_PU)).unwrap();
        let next = step(&s, &m, &e, &faulted, 2e-4).unwrap();
        let net = solve_network(&m, &faulted, next.delta_sync, next.eq_pp, next.ed_pp);
        assert!(net.v_t < 0.1, "V_T = {} during bolted fault", net.v_t);
    }
}
