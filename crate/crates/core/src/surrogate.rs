//! Scalar two-particle surrogate of the drift dynamics.
//!
//! One target at the origin and two generated particles at `+a` and `-a`.
//! With `k_t = exp(-a/tau)` (kernel to the target) and `k_d = k_t^2` (kernel
//! between the particles), the raw drift on the particle at `+a` is
//! `a (2 k_d - k_t)`, giving the map `f(a) = a (1 - k_t + 2 k_d)`.
//!
//! The map has fixed points `0` (expansive, `f'(0) = 2`) and
//! `a* = tau ln 2` (contracting, `f'(a*) = 1 - ln2 / 2`). Friction scales the
//! drift by `1 - gamma`; the second-order variant scales the velocity instead
//! and is equivalent to a heavy-ball recurrence.

use std::f64::consts::LN_2;
use std::io::{self, Write};

use crate::drift::check_gamma;
use crate::error::{Error, Result};
use crate::numeric::{exact_sum, ExactSum};
use crate::schedule::{admissibility_violation, Schedule};

/// Lower end of the margin range, attained at `a = tau ln 4`.
pub const MARGIN_MIN: f64 = -0.125;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateParams {
    tau: f64,
}

impl SurrogateParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(
                "bandwidth",
                format!("tau must be positive, got {tau}"),
            ));
        }
        Ok(SurrogateParams { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Kernel value to the target at distance `|a|`.
    pub fn k_t(&self, a: f64) -> f64 {
        (-a.abs() / self.tau).exp()
    }

    /// Kernel value between the two particles, `k_t^2`.
    pub fn k_d(&self, a: f64) -> f64 {
        let kt = self.k_t(a);
        kt * kt
    }

    /// Signed instability margin `2 k_d - k_t`; positive iff `|a| < tau ln 2`.
    pub fn margin_eta(&self, a: f64) -> f64 {
        let kt = self.k_t(a);
        2.0 * kt * kt - kt
    }

    /// Frictionless multiplier `lambda(a) = 1 - k_t + 2 k_d`.
    pub fn lambda(&self, a: f64) -> f64 {
        1.0 + self.margin_eta(a)
    }

    /// Friction multiplier `1 - (1 - gamma)(k_t - 2 k_d)`.
    pub fn lambda_gamma(&self, a: f64, gamma: f64) -> f64 {
        1.0 + (1.0 - gamma) * self.margin_eta(a)
    }

    /// `f(a) = a (1 - k_t + 2 k_d)`, odd in `a`.
    pub fn surrogate_map(&self, a: f64) -> f64 {
        a * self.lambda(a)
    }

    /// `f'(a)` for `a >= 0`.
    pub fn map_derivative(&self, a: f64) -> f64 {
        let kt = self.k_t(a);
        let kd = kt * kt;
        1.0 - kt + 2.0 * kd + a.abs() * (kt - 4.0 * kd) / self.tau
    }

    /// `(0, tau ln 2)`.
    pub fn fixed_points(&self) -> (f64, f64) {
        (0.0, self.contraction_threshold())
    }

    /// `a* = tau ln 2`.
    pub fn contraction_threshold(&self) -> f64 {
        self.tau * LN_2
    }

    /// Minimizer of the margin, `tau ln 4`.
    pub fn margin_argmin(&self) -> f64 {
        2.0 * self.tau * LN_2
    }

    /// One first-order friction step `a' = a lambda_gamma(|a|)`.
    pub fn step_first_order(&self, state: FirstOrderState, gamma: f64) -> Result<FirstOrderState> {
        check_gamma(gamma)?;
        Ok(FirstOrderState {
            a: state.a * self.lambda_gamma(state.a, gamma),
            step: state.step + 1,
        })
    }

    /// Linearized surrogate drift `V(x) = eta x`.
    pub fn linear_drift(&self, x: f64, drive: LinearDrive) -> f64 {
        self.drive_eta(x, drive) * x
    }

    fn drive_eta(&self, x: f64, drive: LinearDrive) -> f64 {
        match drive {
            LinearDrive::Surrogate => self.margin_eta(x),
            LinearDrive::Frozen(eta) => eta,
        }
    }

    /// One second-order step.
    ///
    /// Heavy ball: `v' = (1 - gamma) v + V(x)`, `x' = x + v'`.
    /// Hybrid: `v' = (1 - gamma) v + (1 - gamma) V(x)`, `x' = x + v'`.
    pub fn step_second_order(
        &self,
        state: SecondOrderState,
        gamma: f64,
        drive: LinearDrive,
        variant: MomentumVariant,
    ) -> Result<SecondOrderState> {
        check_gamma(gamma)?;
        let beta = 1.0 - gamma;
        let force = self.linear_drift(state.x, drive);
        let v = match variant {
            MomentumVariant::HeavyBall => beta * state.v + force,
            MomentumVariant::Hybrid => beta * state.v + beta * force,
        };
        Ok(SecondOrderState {
            x: state.x + v,
            v,
            step: state.step + 1,
        })
    }

    /// Heavy-ball position update from the last two positions
    /// `[.., x_{i-1}, x_i]`: `x_i + V(x_i) + (1 - gamma)(x_i - x_{i-1})`.
    pub fn heavy_ball_position(
        &self,
        history: &[f64],
        gamma: f64,
        drive: LinearDrive,
    ) -> Result<f64> {
        check_gamma(gamma)?;
        let [prev, current] = match history {
            [.., p, c] => [*p, *c],
            _ => return Err(Error::InsufficientHistory),
        };
        Ok(current + self.linear_drift(current, drive) + (1.0 - gamma) * (current - prev))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderState {
    /// Signed particle position; the error against the target at 0.
    pub a: f64,
    pub step: usize,
}

impl FirstOrderState {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite("surrogate position"));
        }
        Ok(FirstOrderState { a, step: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderState {
    pub x: f64,
    pub v: f64,
    pub step: usize,
}

impl SecondOrderState {
    /// Start at `x` with zero velocity.
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite("surrogate position"));
        }
        Ok(SecondOrderState { x, v: 0.0, step: 0 })
    }
}

/// How the second-order iteration evaluates `V(x) = eta x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearDrive {
    /// `eta` recomputed from the margin at the current `|x|`.
    Surrogate,
    /// Fixed `eta` at every step.
    Frozen(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumVariant {
    /// Velocity damping only.
    HeavyBall,
    /// Velocity damping plus drift scaling; freezes at `gamma = 1`.
    Hybrid,
}

/// Real 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[f64; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    Real(f64, f64),
    Complex { re: f64, im: f64 },
}

impl Matrix2 {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Roots of `lambda^2 - tr lambda + det`.
    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            // Stable form: avoid cancellation in the smaller root.
            let s = disc.sqrt();
            let big = 0.5 * (tr + tr.signum() * s);
            if big == 0.0 {
                return Eigenvalues::Real(0.0, 0.0);
            }
            Eigenvalues::Real(big, det / big)
        } else {
            Eigenvalues::Complex {
                re: 0.5 * tr,
                im: 0.5 * (-disc).sqrt(),
            }
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        match self.eigenvalues() {
            Eigenvalues::Real(a, b) => a.abs().max(b.abs()),
            Eigenvalues::Complex { re, im } => re.hypot(im),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|r| r[0].abs() + r[1].abs())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// State-transition matrix of the linearized heavy-ball step on `(x, v)`
/// with momentum `beta`: `[[1 + eta, beta], [eta, beta]]`.
pub fn companion_matrix(eta: f64, beta: f64) -> Matrix2 {
    Matrix2([[1.0 + eta, beta], [eta, beta]])
}

/// Spectral radius of [`companion_matrix`].
///
/// Roots are found as `z = 1 + w` with `w^2 + (1 - eta - beta) w - eta = 0`.
/// The shift makes the unit root at `eta = 0` exact, where the generic 2x2
/// formula can round to just below 1.
pub fn companion_spectral_radius(eta: f64, beta: f64) -> f64 {
    let b = 1.0 - eta - beta;
    let disc = b * b + 4.0 * eta;
    if disc < 0.0 {
        // Conjugate pair: |z|^2 is the product of the roots, beta.
        return beta.abs().sqrt();
    }
    let w_big = -0.5 * (b + disc.sqrt().copysign(b));
    if w_big == 0.0 {
        return 1.0;
    }
    let w_small = -eta / w_big;
    (1.0 + w_big).abs().max((1.0 + w_small).abs())
}

/// Jury/Schur-Cohn test: both eigenvalues of the companion matrix lie
/// strictly inside the unit disc iff `beta < 1`, `2 + eta + 2 beta > 0` and
/// `-eta > 0`.
pub fn jury_stable(eta: f64, beta: f64) -> bool {
    beta.abs() < 1.0 && 2.0 + eta + 2.0 * beta > 0.0 && -eta > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Starting state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    FirstOrder(FirstOrderState),
    SecondOrder(SecondOrderState),
}

/// Options that only matter for second-order trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderOptions {
    pub drive: LinearDrive,
    pub variant: MomentumVariant,
}

impl Default for SecondOrderOptions {
    fn default() -> Self {
        SecondOrderOptions {
            drive: LinearDrive::Surrogate,
            variant: MomentumVariant::HeavyBall,
        }
    }
}

/// One logged step. Step-dependent quantities (`gamma`, `multiplier`) are
/// absent on the terminal row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    /// `a` for first order, `x` for second order.
    pub position: f64,
    pub velocity: Option<f64>,
    pub gamma: Option<f64>,
    pub k_t: f64,
    pub k_d: f64,
    /// Margin (or the frozen coefficient) at this state.
    pub eta: f64,
    /// First order: `1 + (1 - gamma) eta`. Second order: the infinity norm of
    /// the step's transition matrix.
    pub multiplier: Option<f64>,
    /// Running product bound after `step` steps.
    pub bound_product: f64,
    /// Running exponential bound after `step` steps.
    pub bound_exp: f64,
}

/// Per-step log of a surrogate run; `horizon + 1` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub order: Order,
    pub tau: f64,
    pub schedule: String,
    /// Second-order options the run used, if second order.
    pub second_order: Option<SecondOrderOptions>,
    /// `max(0, max_i eta_i)` over the executed steps; the running bound
    /// columns use this value.
    pub eta_max: f64,
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn initial(&self) -> &TrajectoryRow {
        &self.rows[0]
    }

    pub fn terminal(&self) -> &TrajectoryRow {
        self.rows.last().expect("record has rows")
    }

    pub fn positions(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.position).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.gamma).collect()
    }

    /// Step margins `eta_0 .. eta_{T-1}`.
    pub fn etas(&self) -> Vec<f64> {
        self.rows[..self.horizon()].iter().map(|r| r.eta).collect()
    }

    pub fn csv_header(&self) -> &'static str {
        match self.order {
            Order::First => "step,a,gamma,k_t,k_d,eta,multiplier,bound_product,bound_exp",
            Order::Second => "step,x,v,gamma,k_t,k_d,eta,multiplier,bound_product,bound_exp",
        }
    }

    /// Write the record as CSV. Absent values are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            write!(out, "{},{}", r.step, r.position)?;
            if self.order == Order::Second {
                write!(out, ",{}", opt(r.velocity))?;
            }
            writeln!(
                out,
                ",{},{},{},{},{},{},{}",
                opt(r.gamma),
                r.k_t,
                r.k_d,
                r.eta,
                opt(r.multiplier),
                r.bound_product,
                r.bound_exp
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Iterate the surrogate for `schedule.horizon()` steps from `initial`.
pub fn run_trajectory(
    params: &SurrogateParams,
    initial: Initial,
    schedule: &Schedule,
    options: SecondOrderOptions,
) -> Result<TrajectoryRecord> {
    let horizon = schedule.horizon();
    let gammas = schedule.values();
    let mut rows = Vec::with_capacity(horizon + 1);
    let order;
    match initial {
        Initial::FirstOrder(mut state) => {
            order = Order::First;
            for (i, &gamma) in gammas.iter().enumerate() {
                let eta = params.margin_eta(state.a);
                rows.push(TrajectoryRow {
                    step: i,
                    position: state.a,
                    velocity: None,
                    gamma: Some(gamma),
                    k_t: params.k_t(state.a),
                    k_d: params.k_d(state.a),
                    eta,
                    multiplier: Some(1.0 + (1.0 - gamma) * eta),
                    bound_product: 0.0,
                    bound_exp: 0.0,
                });
                state = params.step_first_order(state, gamma)?;
            }
            rows.push(terminal_row(
                params,
                horizon,
                state.a,
                None,
                params.margin_eta(state.a),
            ));
        }
        Initial::SecondOrder(mut state) => {
            order = Order::Second;
            for (i, &gamma) in gammas.iter().enumerate() {
                let eta = params.drive_eta(state.x, options.drive);
                let beta = 1.0 - gamma;
                let m = match options.variant {
                    MomentumVariant::HeavyBall => companion_matrix(eta, beta),
                    MomentumVariant::Hybrid => companion_matrix(beta * eta, beta),
                };
                rows.push(TrajectoryRow {
                    step: i,
                    position: state.x,
                    velocity: Some(state.v),
                    gamma: Some(gamma),
                    k_t: params.k_t(state.x),
                    k_d: params.k_d(state.x),
                    eta,
                    multiplier: Some(m.norm_inf()),
                    bound_product: 0.0,
                    bound_exp: 0.0,
                });
                state = params.step_second_order(state, gamma, options.drive, options.variant)?;
            }
            let eta = params.drive_eta(state.x, options.drive);
            rows.push(terminal_row(params, horizon, state.x, Some(state.v), eta));
        }
    }
    if rows.iter().any(|r| !r.position.is_finite()) {
        return Err(Error::NonFinite("trajectory"));
    }

    let eta_max = rows[..horizon].iter().map(|r| r.eta).fold(0.0, f64::max);
    let start = rows[0].position.abs();
    let mut product = start;
    let mut exponent = ExactSum::default();
    for i in 0..=horizon {
        rows[i].bound_product = product;
        rows[i].bound_exp = start * exponent.value().exp();
        if i < horizon {
            let beta = 1.0 - gammas[i];
            let rate = match order {
                Order::First => beta * eta_max,
                Order::Second => eta_max + beta,
            };
            product *= 1.0 + rate;
            exponent.add(rate);
        }
    }

    Ok(TrajectoryRecord {
        order,
        tau: params.tau(),
        schedule: schedule.to_string(),
        second_order: (order == Order::Second).then_some(options),
        eta_max,
        rows,
    })
}

fn terminal_row(
    params: &SurrogateParams,
    step: usize,
    position: f64,
    velocity: Option<f64>,
    eta: f64,
) -> TrajectoryRow {
    TrajectoryRow {
        step,
        position,
        velocity,
        gamma: None,
        k_t: params.k_t(position),
        k_d: params.k_d(position),
        eta,
        multiplier: None,
        bound_product: 0.0,
        bound_exp: 0.0,
    }
}

/// Relative slack for comparing a simulated value against a bound that may
/// be attained with equality.
pub const BOUND_RTOL: f64 = 1e-12;

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + BOUND_RTOL)
}

/// First-order finite-horizon bound evaluated on a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderBound {
    pub eta_max: f64,
    /// `|eps^0| prod (1 + (1 - gamma_i) eta_max)`
    pub product: f64,
    /// `|eps^0| exp(eta_max sum (1 - gamma_i))`
    pub exponential: f64,
    /// `|eps^T|`
    pub terminal: f64,
    /// `sum (1 - gamma_i)`
    pub residual_sum: f64,
}

impl FirstOrderBound {
    /// `|eps^T| <= product <= exponential`.
    pub fn holds(&self) -> bool {
        within(self.terminal, self.product) && within(self.product, self.exponential)
    }
}

/// Check the hypotheses of the first-order bound and evaluate it.
///
/// Hypotheses: an admissible schedule, `eta_max` bounding every positive
/// margin, and non-negative per-step multipliers. A violated hypothesis is
/// an [`Error::Precondition`].
pub fn cumulative_bound_first(record: &TrajectoryRecord, eta_max: f64) -> Result<FirstOrderBound> {
    if record.order != Order::First {
        return Err(Error::Precondition("record is not first order".into()));
    }
    if !(eta_max.is_finite() && eta_max >= 0.0) {
        return Err(Error::Precondition(format!(
            "eta_max must be >= 0, got {eta_max}"
        )));
    }
    let gammas = record.gammas();
    if let Some(why) = admissibility_violation(&gammas) {
        return Err(Error::Precondition(why));
    }
    let horizon = record.horizon();
    for r in &record.rows[..horizon] {
        if r.eta.max(0.0) > eta_max {
            return Err(Error::Precondition(format!(
                "margin {} at step {} exceeds eta_max {eta_max}",
                r.eta, r.step
            )));
        }
        let m = r.multiplier.expect("non-terminal row");
        if m < 0.0 {
            return Err(Error::Precondition(format!(
                "negative multiplier {m} at step {}",
                r.step
            )));
        }
    }
    let start = record.initial().position.abs();
    let residual_sum = exact_sum(gammas.iter().map(|g| 1.0 - g));
    let product = start
        * gammas
            .iter()
            .map(|g| 1.0 + (1.0 - g) * eta_max)
            .product::<f64>();
    Ok(FirstOrderBound {
        eta_max,
        product,
        exponential: start * (eta_max * residual_sum).exp(),
        terminal: record.terminal().position.abs(),
        residual_sum,
    })
}

/// Second-order exponential bound evaluated on a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderBound {
    /// The `eta_max` used in the exponent (after any mixed-regime
    /// substitution).
    pub eta_max: f64,
    /// `(2 eta_max + 1) T / 2`
    pub exponent: f64,
    /// `|x^0| exp(exponent)`
    pub bound: f64,
    /// `max(|x^T|, |v^T|)`
    pub terminal: f64,
}

impl SecondOrderBound {
    pub fn holds(&self) -> bool {
        within(self.terminal, self.bound)
    }
}

fn second_order_common(record: &TrajectoryRecord) -> Result<()> {
    if record.order != Order::Second {
        return Err(Error::Precondition("record is not second order".into()));
    }
    if record.initial().velocity != Some(0.0) {
        return Err(Error::Precondition("initial velocity must be zero".into()));
    }
    let gammas = record.gammas();
    let last = (gammas.len() - 1) as f64;
    let linear = gammas
        .iter()
        .enumerate()
        .all(|(i, g)| *g == i as f64 / last);
    if !linear {
        return Err(Error::Precondition(
            "second-order bound needs the linear schedule".into(),
        ));
    }
    Ok(())
}

fn second_order_bound(record: &TrajectoryRecord, eta_max: f64) -> SecondOrderBound {
    let t = record.horizon() as f64;
    let exponent = (2.0 * eta_max + 1.0) * t / 2.0;
    let end = record.terminal();
    SecondOrderBound {
        eta_max,
        exponent,
        bound: record.initial().position.abs() * exponent.exp(),
        terminal: end.position.abs().max(end.velocity.unwrap_or(0.0).abs()),
    }
}

/// Second-order bound `max(|x^T|, |v^T|) <= |x^0| exp((2 eta_max + 1) T / 2)`
/// in the locally repulsive regime (`0 <= eta_i <= eta_max` at every step)
/// under the linear schedule.
pub fn cumulative_bound_second(
    record: &TrajectoryRecord,
    eta_max: f64,
) -> Result<SecondOrderBound> {
    second_order_common(record)?;
    for r in &record.rows[..record.horizon()] {
        if r.eta < 0.0 {
            return Err(Error::Precondition(format!(
                "margin {} at step {} leaves the repulsive regime",
                r.eta, r.step
            )));
        }
        if r.eta > eta_max {
            return Err(Error::Precondition(format!(
                "margin {} at step {} exceeds eta_max {eta_max}",
                r.eta, r.step
            )));
        }
    }
    Ok(second_order_bound(record, eta_max))
}

/// Mixed-regime variant: margins may dip to `-1/8`, and `eta_max` in the
/// exponent is replaced by `max(eta_max, 1/8)`.
pub fn cumulative_bound_second_mixed(
    record: &TrajectoryRecord,
    eta_max: f64,
) -> Result<SecondOrderBound> {
    second_order_common(record)?;
    for r in &record.rows[..record.horizon()] {
        if r.eta < MARGIN_MIN || r.eta > eta_max {
            return Err(Error::Precondition(format!(
                "margin {} at step {} outside [-1/8, {eta_max}]",
                r.eta, r.step
            )));
        }
    }
    Ok(second_order_bound(record, eta_max.max(-MARGIN_MIN)))
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
