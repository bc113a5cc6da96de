//! Adaptive integration of the singular radial systems: a series-expansion
//! start that steps over the u/r singularity at the origin, dense-output
//! sampling onto log or uniform grids, zero-crossing event location, and the
//! rho-shifted system used to compare against the autonomous limit flow.

pub mod dopri;

use crate::model::{self, BetaParams, MassiveParams, TrajectoryState};
use dopri::{Control, DopriError, Status, Step, Tolerances};
use thiserror::Error;

/// Tolerances, interval and guard rails for one integration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub r_start: f64,
    pub r_max: f64,
    pub max_steps: usize,
    /// State norm treated as blow-up. Massless trajectories stay inside the
    /// initial energy sublevel set, so any excursion past this signals a
    /// gapped-system escape branch or a bug.
    pub blowup_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_start: 1e-4,
            r_max: 50.0,
            max_steps: 1_000_000,
            blowup_threshold: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0)
            || !(self.abs_tol.is_finite() && self.abs_tol > 0.0)
        {
            return Err(IntegratorError::InvalidConfig {
                reason: format!(
                    "tolerances must be positive (rel={}, abs={})",
                    self.rel_tol, self.abs_tol
                ),
            });
        }
        if !(self.r_start > 0.0 && self.r_start < self.r_max) || !self.r_max.is_finite() {
            return Err(IntegratorError::InvalidConfig {
                reason: format!(
                    "need 0 < r_start < r_max (r_start={}, r_max={})",
                    self.r_start, self.r_max
                ),
            });
        }
        if self.max_steps == 0 {
            return Err(IntegratorError::InvalidConfig {
                reason: "max_steps must be at least 1".to_string(),
            });
        }
        if !(self.blowup_threshold.is_finite() && self.blowup_threshold > 0.0) {
            return Err(IntegratorError::InvalidConfig {
                reason: format!("blowup_threshold must be positive ({})", self.blowup_threshold),
            });
        }
        Ok(())
    }

    /// Same config with the start radius adapted to the initial amplitude so
    /// the series start stays below integration accuracy.
    pub fn for_lambda(mut self, lambda: f64) -> Self {
        self.r_start = default_r_start(lambda).min(self.r_max * 0.5);
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

/// Default start radius 1e-4 * min(1, 1/|lambda|): small enough that the
/// truncated series error stays below the integration tolerance across the
/// amplitudes used here, large enough to stay clear of the u/r singularity.
pub fn default_r_start(lambda: f64) -> f64 {
    1e-4 * 1.0f64.min(1.0 / lambda.abs().max(f64::MIN_POSITIVE))
}

/// Start error budget for `series_start` under a given config: one-time
/// truncation is allowed a factor 10 over the per-step error bound.
pub fn series_tolerance(cfg: &IntegratorConfig, lambda: f64) -> f64 {
    10.0 * (cfg.abs_tol + cfg.rel_tol * lambda.abs().max(1.0))
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedRMax,
    BlowUp,
    StepUnderflow,
}

/// A computed radial solution: strictly increasing grid with aligned (u, v)
/// samples plus the run metadata needed to re-derive everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Initial amplitude v(0) of the producing run.
    pub lambda: f64,
    pub beta: BetaParams,
    pub massive: Option<MassiveParams>,
    pub termination: Termination,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn state(&self, i: usize) -> TrajectoryState {
        TrajectoryState::new(self.grid[i], self.u[i], self.v[i])
    }

    pub fn last_state(&self) -> TrajectoryState {
        self.state(self.len() - 1)
    }

    pub fn amplitude(&self, i: usize) -> f64 {
        self.u[i].hypot(self.v[i])
    }

    /// Energy evaluated at sample i.
    pub fn hamiltonian(&self, i: usize) -> f64 {
        model::hamiltonian(self.u[i], self.v[i], self.beta)
    }

    /// Indices of grid points inside [r_lo, r_hi].
    pub fn window(&self, r_lo: f64, r_hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.grid[i] >= r_lo && self.grid[i] <= r_hi)
            .collect()
    }

    /// Structural sanity: equal lengths >= 2, strictly increasing grid,
    /// finite samples.
    pub fn check_structure(&self) -> Result<(), IntegratorError> {
        let n = self.grid.len();
        if n < 2 || self.u.len() != n || self.v.len() != n {
            return Err(IntegratorError::MalformedProfile {
                reason: format!("arrays of length {}, {}, {}", n, self.u.len(), self.v.len()),
            });
        }
        for i in 1..n {
            // NaN entries must fail this check too
            if self.grid[i].partial_cmp(&self.grid[i - 1]) != Some(std::cmp::Ordering::Greater) {
                return Err(IntegratorError::MalformedProfile {
                    reason: format!("grid not strictly increasing at index {i}"),
                });
            }
        }
        if !self
            .grid
            .iter()
            .chain(self.u.iter())
            .chain(self.v.iter())
            .all(|x| x.is_finite())
        {
            return Err(IntegratorError::MalformedProfile {
                reason: "non-finite sample".to_string(),
            });
        }
        Ok(())
    }
}

/// Zero crossings and threshold excursions detected during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    UCrossesZero,
    VCrossesZero,
    NormExceedsThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub r_event: f64,
    pub state: TrajectoryState,
}

/// Which zero crossings to watch for. The norm threshold is always armed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventSpec {
    pub u_zero: bool,
    pub v_zero: bool,
}

impl EventSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn zero_crossings() -> Self {
        Self {
            u_zero: true,
            v_zero: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid integrator config: {reason}")]
    InvalidConfig { reason: String },
    #[error("start radius too large: estimated series truncation {estimate:e} exceeds budget {budget:e}")]
    R0TooLarge { estimate: f64, budget: f64 },
    #[error("start state at r={actual} does not match configured r_start={expected}")]
    StartMismatch { expected: f64, actual: f64 },
    #[error("malformed profile: {reason}")]
    MalformedProfile { reason: String },
    #[error(transparent)]
    Stepper(#[from] DopriError),
}

/// A first-order radial system du/dr, dv/dr = F(r, u, v), with the couplings
/// carried along for profile metadata.
pub trait RadialField {
    fn deriv(&self, r: f64, u: f64, v: f64) -> (f64, f64);
    fn beta(&self) -> BetaParams;
    fn massive(&self) -> Option<MassiveParams> {
        None
    }
}

/// The singular massless system.
#[derive(Debug, Clone, Copy)]
pub struct MasslessSystem {
    pub beta: BetaParams,
}

impl RadialField for MasslessSystem {
    fn deriv(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        let (du, dv) = model::limit_field(u, v, self.beta);
        (du - u / r, dv)
    }

    fn beta(&self) -> BetaParams {
        self.beta
    }
}

/// The autonomous limit system; conserves the energy exactly.
#[derive(Debug, Clone, Copy)]
pub struct LimitSystem {
    pub beta: BetaParams,
}

impl RadialField for LimitSystem {
    fn deriv(&self, _r: f64, u: f64, v: f64) -> (f64, f64) {
        model::limit_field(u, v, self.beta)
    }

    fn beta(&self) -> BetaParams {
        self.beta
    }
}

/// The singular gapped system.
#[derive(Debug, Clone, Copy)]
pub struct MassiveSystem {
    pub beta: BetaParams,
    pub mp: MassiveParams,
}

impl RadialField for MassiveSystem {
    fn deriv(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        model::massive_field_raw(r, u, v, self.beta, self.mp.m(), self.mp.omega())
    }

    fn beta(&self) -> BetaParams {
        self.beta
    }

    fn massive(&self) -> Option<MassiveParams> {
        Some(self.mp)
    }
}

/// The massless system with the singular term shifted to u/(r + rho);
/// regular at r = 0 and first-order close to the limit system for large rho.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedSystem {
    pub beta: BetaParams,
    pub rho: f64,
}

impl RadialField for ShiftedSystem {
    fn deriv(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        let (du, dv) = model::limit_field(u, v, self.beta);
        (du - u / (r + self.rho), dv)
    }

    fn beta(&self) -> BetaParams {
        self.beta
    }
}

/// Truncated series start consistent with u(0) = 0, v(0) = lambda.
///
/// One nontrivial term per component: u(r0) = a r0 with
/// a = (beta1 lambda^3 - (m - omega) lambda) / 2, and the matching quadratic
/// correction v(r0) = lambda + b r0^2 with b = -a (2 beta2 lambda^2 + m + omega) / 2
/// (mass terms drop out in the massless case). The discarded cubic term of u
/// is used as the truncation estimate; `budget` is the acceptable start
/// error, typically `series_tolerance(cfg, lambda)`.
pub fn series_start(
    lambda: f64,
    r0: f64,
    beta: BetaParams,
    massive: Option<MassiveParams>,
    budget: f64,
) -> Result<TrajectoryState, IntegratorError> {
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(IntegratorError::InvalidConfig {
            reason: format!("series start radius must be positive, got {r0}"),
        });
    }
    if lambda == 0.0 {
        return Ok(TrajectoryState::new(r0, 0.0, 0.0));
    }
    let (m, omega) = massive.map_or((0.0, 0.0), |mp| (mp.m(), mp.omega()));
    let b1 = beta.beta1();
    let b2 = beta.beta2();
    let l2 = lambda * lambda;

    let a = 0.5 * (b1 * l2 * lambda - (m - omega) * lambda);
    let b = -0.5 * a * (2.0 * b2 * l2 + m + omega);
    // Next-order coefficient of u, kept only to bound the truncation error.
    let c = 0.25 * (3.0 * b1 * l2 * b + 2.0 * b2 * a * a * lambda - (m - omega) * b);
    let estimate = c.abs() * r0 * r0 * r0;
    if estimate > budget {
        return Err(IntegratorError::R0TooLarge { estimate, budget });
    }
    Ok(TrajectoryState::new(r0, a * r0, lambda + b * r0 * r0))
}

/// `series_start` with the radius shrunk geometrically from `r0_cap` until
/// the truncation estimate fits the budget. Used where the caller controls
/// the start radius (classification sweeps at varying tolerance) rather than
/// the run contract.
pub fn series_start_auto(
    lambda: f64,
    r0_cap: f64,
    beta: BetaParams,
    massive: Option<MassiveParams>,
    budget: f64,
) -> Result<TrajectoryState, IntegratorError> {
    let mut r0 = r0_cap;
    for _ in 0..200 {
        match series_start(lambda, r0, beta, massive, budget) {
            Err(IntegratorError::R0TooLarge { .. }) => r0 *= 0.25,
            other => return other,
        }
    }
    series_start(lambda, r0, beta, massive, budget)
}

/// Sampling pattern for the stored grid, on top of the accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GridMode {
    StepsOnly,
    /// Log-uniform points per decade, merged with the accepted steps.
    LogDense(usize),
    /// n equal subintervals of the run interval, merged with accepted steps.
    Uniform(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RunStatus {
    ReachedRMax,
    BlowUp,
    StepUnderflow,
    EventHalt,
}

#[derive(Debug, Clone)]
pub(crate) struct RawRun {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub events: Vec<Event>,
    pub status: RunStatus,
}

/// Relative bracket width to which crossing radii are refined.
const EVENT_BRACKET_REL: f64 = 1e-10;

struct RunRecorder {
    grid: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    targets: Vec<f64>,
    next_target: usize,
    events: Vec<Event>,
    sign_u: f64,
    sign_v: f64,
    spec: EventSpec,
    blowup_threshold: f64,
    blew_up: bool,
    event_halt: bool,
    stop_at_first_event: bool,
}

impl RunRecorder {
    fn push(&mut self, r: f64, u: f64, v: f64) {
        if let Some(&last) = self.grid.last() {
            if r <= last * (1.0 + 1e-14) {
                return;
            }
        }
        self.grid.push(r);
        self.u.push(u);
        self.v.push(v);
    }

    fn on_step(&mut self, step: &Step<2>) -> Control {
        // Dense targets strictly inside the step, then the step endpoint.
        while self.next_target < self.targets.len() {
            let t = self.targets[self.next_target];
            if t >= step.t1 * (1.0 - 1e-13) {
                break;
            }
            if t > step.t0 {
                let y = step.interpolate(t);
                self.push(t, y[0], y[1]);
            }
            self.next_target += 1;
        }
        self.push(step.t1, step.y1[0], step.y1[1]);

        // Both components may cross inside one step; record in radius order
        // so "first event" always means smallest crossing radius.
        let mut found: [Option<Event>; 2] = [None, None];
        if self.spec.u_zero {
            found[0] = locate_crossing(step, 0, &mut self.sign_u, EventKind::UCrossesZero);
        }
        if self.spec.v_zero {
            found[1] = locate_crossing(step, 1, &mut self.sign_v, EventKind::VCrossesZero);
        }
        if let (Some(a), Some(b)) = (&found[0], &found[1]) {
            if b.r_event < a.r_event {
                found.swap(0, 1);
            }
        }
        for ev in found.into_iter().flatten() {
            self.events.push(ev);
            if self.stop_at_first_event {
                self.event_halt = true;
                return Control::Halt;
            }
        }

        if step.y1[0].hypot(step.y1[1]) > self.blowup_threshold {
            self.events.push(Event {
                kind: EventKind::NormExceedsThreshold,
                r_event: step.t1,
                state: TrajectoryState::new(step.t1, step.y1[0], step.y1[1]),
            });
            self.blew_up = true;
            return Control::Halt;
        }
        Control::Continue
    }
}

/// Detect a sign change of component `idx` across the step and refine the
/// crossing radius by bisection on the dense interpolant until the bracket
/// has relative width <= 1e-10.
fn locate_crossing(
    step: &Step<2>,
    idx: usize,
    last_sign: &mut f64,
    kind: EventKind,
) -> Option<Event> {
    let new_sign = step.y1[idx].signum() * f64::from(step.y1[idx] != 0.0);
    let old_sign = *last_sign;
    if old_sign == 0.0 {
        *last_sign = new_sign;
        return None;
    }
    if new_sign == old_sign {
        return None;
    }
    *last_sign = new_sign;

    if new_sign == 0.0 {
        let state = TrajectoryState::new(step.t1, step.y1[0], step.y1[1]);
        return Some(Event {
            kind,
            r_event: step.t1,
            state,
        });
    }

    let mut a = step.t0;
    let mut b = step.t1;
    let mut ga = step.y0[idx];
    while b - a > EVENT_BRACKET_REL * b.abs().max(1e-300) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = step.interpolate(mid)[idx];
        if gm == 0.0 || (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
    }
    let r_event = 0.5 * (a + b);
    let y = step.interpolate(r_event);
    Some(Event {
        kind,
        r_event,
        state: TrajectoryState::new(r_event, y[0], y[1]),
    })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_radial<F: RadialField>(
    field: &F,
    r0: f64,
    u0: f64,
    v0: f64,
    r_end: f64,
    tol: Tolerances,
    max_steps: usize,
    blowup_threshold: f64,
    spec: EventSpec,
    grid: GridMode,
    stop_at_first_event: bool,
) -> Result<RawRun, IntegratorError> {
    let targets = match grid {
        GridMode::StepsOnly => Vec::new(),
        GridMode::LogDense(per_decade) => {
            let per = per_decade.max(1) as f64;
            let mut t = Vec::new();
            let mut k = 1usize;
            loop {
                let r = r0 * 10f64.powf(k as f64 / per);
                if r >= r_end * (1.0 - 1e-12) {
                    break;
                }
                t.push(r);
                k += 1;
            }
            t
        }
        GridMode::Uniform(n) => {
            let n = n.max(1);
            (1..n)
                .map(|i| r0 + (r_end - r0) * i as f64 / n as f64)
                .collect()
        }
    };

    let mut rec = RunRecorder {
        grid: Vec::with_capacity(targets.len() + 64),
        u: Vec::with_capacity(targets.len() + 64),
        v: Vec::with_capacity(targets.len() + 64),
        targets,
        next_target: 0,
        events: Vec::new(),
        sign_u: u0.signum() * f64::from(u0 != 0.0),
        sign_v: v0.signum() * f64::from(v0 != 0.0),
        spec,
        blowup_threshold,
        blew_up: false,
        event_halt: false,
        stop_at_first_event,
    };
    rec.push(r0, u0, v0);

    let sys = |r: f64, y: &[f64; 2]| {
        let (du, dv) = field.deriv(r, y[0], y[1]);
        [du, dv]
    };
    let finish = dopri::integrate_adaptive(&sys, r0, [u0, v0], r_end, tol, max_steps, |step| {
        rec.on_step(step)
    })?;

    let status = if rec.blew_up {
        RunStatus::BlowUp
    } else if rec.event_halt {
        RunStatus::EventHalt
    } else {
        match finish.status {
            Status::ReachedEnd => RunStatus::ReachedRMax,
            Status::StepUnderflow => RunStatus::StepUnderflow,
            Status::Halted => RunStatus::EventHalt,
        }
    };
    // A run that underflows before its first accepted step has no second
    // sample; record the stall point so the profile stays well-formed.
    if rec.grid.len() < 2 {
        let r = finish.t.max(r0 * (1.0 + 1e-9));
        rec.push(r, finish.y[0], finish.y[1]);
    }
    Ok(RawRun {
        grid: rec.grid,
        u: rec.u,
        v: rec.v,
        events: rec.events,
        status,
    })
}

pub(crate) fn integrate_on<F: RadialField>(
    field: &F,
    start: TrajectoryState,
    cfg: &IntegratorConfig,
    events: EventSpec,
    grid: GridMode,
) -> Result<(Profile, Vec<Event>), IntegratorError> {
    cfg.validate()?;
    if (start.r - cfg.r_start).abs() > 1e-12 * cfg.r_start.max(1.0) {
        return Err(IntegratorError::StartMismatch {
            expected: cfg.r_start,
            actual: start.r,
        });
    }
    let raw = run_radial(
        field,
        start.r,
        start.u,
        start.v,
        cfg.r_max,
        cfg.tolerances(),
        cfg.max_steps,
        cfg.blowup_threshold,
        events,
        grid,
        false,
    )?;
    let termination = match raw.status {
        RunStatus::ReachedRMax => Termination::ReachedRMax,
        RunStatus::BlowUp => Termination::BlowUp,
        RunStatus::StepUnderflow | RunStatus::EventHalt => Termination::StepUnderflow,
    };
    let profile = Profile {
        grid: raw.grid,
        u: raw.u,
        v: raw.v,
        lambda: start.v,
        beta: field.beta(),
        massive: field.massive(),
        termination,
    };
    profile.check_structure()?;
    Ok((profile, raw.events))
}

/// Integrate a radial field from `start` to `cfg.r_max`, collecting the
/// requested zero-crossing events along the way. Blow-up past the configured
/// norm threshold and step underflow terminate the run and are reported
/// through the profile's termination tag, never silently.
pub fn integrate<F: RadialField>(
    field: &F,
    start: TrajectoryState,
    cfg: &IntegratorConfig,
    events: EventSpec,
) -> Result<(Profile, Vec<Event>), IntegratorError> {
    integrate_on(field, start, cfg, events, GridMode::StepsOnly)
}

/// Number of uniform resample intervals carried by shifted-system profiles;
/// comparison runs share these nodes exactly.
pub(crate) const SHIFTED_UNIFORM_SAMPLES: usize = 512;

/// Integrate the shifted system u' = dH/dv - u/(r + rho), v' = -dH/du from
/// r = 0 over an interval of length `t_len`. The returned profile samples a
/// uniform 512-point grid merged with the accepted steps.
pub fn shifted_integrate(
    rho: f64,
    start: (f64, f64),
    beta: BetaParams,
    t_len: f64,
) -> Result<Profile, IntegratorError> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(IntegratorError::InvalidConfig {
            reason: format!("shift rho must be positive, got {rho}"),
        });
    }
    if !t_len.is_finite() || t_len <= 0.0 {
        return Err(IntegratorError::InvalidConfig {
            reason: format!("interval length must be positive, got {t_len}"),
        });
    }
    let field = ShiftedSystem { beta, rho };
    shifted_like_run(&field, start, beta, t_len)
}

/// The limit flow sampled on the same uniform grid as `shifted_integrate`,
/// for direct node-by-node comparison.
pub fn limit_flow_reference(
    start: (f64, f64),
    beta: BetaParams,
    t_len: f64,
) -> Result<Profile, IntegratorError> {
    let field = LimitSystem { beta };
    shifted_like_run(&field, start, beta, t_len)
}

fn shifted_like_run<F: RadialField>(
    field: &F,
    start: (f64, f64),
    beta: BetaParams,
    t_len: f64,
) -> Result<Profile, IntegratorError> {
    if start == (0.0, 0.0) {
        // Equilibrium: the flow is identically zero.
        let n = SHIFTED_UNIFORM_SAMPLES;
        let grid: Vec<f64> = (0..=n).map(|i| t_len * i as f64 / n as f64).collect();
        let zeros = vec![0.0; n + 1];
        return Ok(Profile {
            grid,
            u: zeros.clone(),
            v: zeros,
            lambda: 0.0,
            beta,
            massive: None,
            termination: Termination::ReachedRMax,
        });
    }
    let raw = run_radial(
        field,
        0.0,
        start.0,
        start.1,
        t_len,
        Tolerances {
            rel: 1e-10,
            abs: 1e-12,
        },
        1_000_000,
        1e6,
        EventSpec::none(),
        GridMode::Uniform(SHIFTED_UNIFORM_SAMPLES),
        false,
    )?;
    let termination = match raw.status {
        RunStatus::ReachedRMax => Termination::ReachedRMax,
        RunStatus::BlowUp => Termination::BlowUp,
        _ => Termination::StepUnderflow,
    };
    let profile = Profile {
        grid: raw.grid,
        u: raw.u,
        v: raw.v,
        lambda: start.1,
        beta,
        massive: None,
        termination,
    };
    profile.check_structure()?;
    Ok(profile)
}
