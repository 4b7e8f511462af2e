//! Longitudinal vehicle model, extremal integration and interval estimation.
//!
//! Each vehicle moves along a fixed path with position `y` and speed `v`:
//!
//! ```text
//! y' = v + d_y
//! v' = u - b v^2 + d_v      (held at 0 when it would push v outside [v_min, v_max])
//! ```
//!
//! The model is order preserving in the input, the disturbance and the initial
//! state, so the lower and upper bounds of every reachable set are obtained by
//! integrating two extremal trajectories. Everything here is a pure function.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

/// Closed real interval `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn symmetric(half_width: f64) -> Self {
        Self {
            min: -half_width,
            max: half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn pick(&self, extreme: Extreme) -> f64 {
        match extreme {
            Extreme::Lower => self.min,
            Extreme::Upper => self.max,
        }
    }
}

/// Which end of a bounded set to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extreme {
    Lower,
    Upper,
}

/// Physical limits, disturbance bounds and intersection location of one vehicle.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleParams {
    /// Speed limits `[v_min, v_max]` (m/s).
    pub speed: Bounds,
    /// Input bounds: supervisor input `u` for controlled vehicles, driver input
    /// `w` for uncontrolled ones (m/s²).
    pub input: Bounds,
    /// Position-rate disturbance `d_y` (m/s).
    pub dist_y: Bounds,
    /// Acceleration disturbance `d_v` (m/s²).
    pub dist_v: Bounds,
    /// Quadratic drag coefficient `b` (1/m).
    pub drag: f64,
    /// Intersection entry position on this vehicle's path (m).
    pub alpha: f64,
    /// Intersection exit position on this vehicle's path (m).
    pub beta: f64,
    pub controlled: bool,
}

impl VehicleParams {
    /// Parameters used in the reference simulations: speeds in `[1.39, 13.9]`,
    /// inputs in `[-2.5, 2.5]` (driver inputs `[-0.5, 0.5]`), drag `0.001`,
    /// disturbances `±0.05` and the intersection at `(0, 5)`.
    pub fn reference(controlled: bool) -> Self {
        Self {
            speed: Bounds::new(1.39, 13.9),
            input: if controlled {
                Bounds::new(-2.5, 2.5)
            } else {
                Bounds::new(-0.5, 0.5)
            },
            dist_y: Bounds::symmetric(0.05),
            dist_v: Bounds::symmetric(0.05),
            drag: 0.001,
            alpha: 0.0,
            beta: 5.0,
            controlled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let all = [
            self.speed.min,
            self.speed.max,
            self.input.min,
            self.input.max,
            self.dist_y.min,
            self.dist_y.max,
            self.dist_v.min,
            self.dist_v.max,
            self.drag,
            self.alpha,
            self.beta,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.speed.min <= 0.0 {
            return bad("v_min must be positive");
        }
        if self.speed.min > self.speed.max {
            return bad("v_min must not exceed v_max");
        }
        if self.input.min >= self.input.max {
            return bad("input lower bound must be below the upper bound");
        }
        if self.alpha >= self.beta {
            return bad("alpha must be below beta");
        }
        if !self.dist_y.contains(0.0) || !self.dist_v.contains(0.0) {
            return bad("disturbance intervals must contain 0");
        }
        if self.speed.min + self.dist_y.min <= 0.0 {
            return bad("v_min + d_y_min must be positive so positions keep increasing");
        }
        if self.drag < 0.0 {
            return bad("drag must be non-negative");
        }
        Ok(())
    }

    /// Extremal disturbance held for the whole horizon.
    pub fn disturbance(&self, extreme: Extreme) -> Disturbance {
        Disturbance {
            dy: self.dist_y.pick(extreme),
            dv: self.dist_v.pick(extreme),
        }
    }

    /// Horizon cap used by crossing searches: ten times the time needed to
    /// cover `distance` at the minimum speed.
    pub fn crossing_horizon(&self, distance: f64) -> f64 {
        10.0 * distance.max(0.0) / (self.speed.min + self.dist_y.min)
    }
}

/// Longitudinal state `(y, v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VehicleState {
    pub y: f64,
    pub v: f64,
}

impl VehicleState {
    pub const fn new(y: f64, v: f64) -> Self {
        Self { y, v }
    }

    pub fn le(&self, other: &Self) -> bool {
        self.y <= other.y && self.v <= other.v
    }

    fn is_finite(&self) -> bool {
        self.y.is_finite() && self.v.is_finite()
    }
}

/// Componentwise box `[lo, hi]` bracketing the true state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateInterval {
    pub lo: VehicleState,
    pub hi: VehicleState,
}

impl StateInterval {
    pub fn new(lo: VehicleState, hi: VehicleState) -> Result<Self> {
        if lo.le(&hi) {
            Ok(Self { lo, hi })
        } else {
            Err(Error::ContractViolation(format!(
                "state interval lower bound {lo:?} exceeds upper bound {hi:?}"
            )))
        }
    }

    pub const fn point(s: VehicleState) -> Self {
        Self { lo: s, hi: s }
    }

    pub fn contains(&self, s: &VehicleState) -> bool {
        self.lo.le(s) && s.le(&self.hi)
    }

    pub fn contains_with(&self, s: &VehicleState, tol: f64) -> bool {
        self.lo.y - tol <= s.y
            && s.y <= self.hi.y + tol
            && self.lo.v - tol <= s.v
            && s.v <= self.hi.v + tol
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo.le(&self.lo) && self.hi.le(&other.hi)
    }

    pub fn position(&self) -> Bounds {
        Bounds::new(self.lo.y, self.hi.y)
    }

    pub fn speed(&self) -> Bounds {
        Bounds::new(self.lo.v, self.hi.v)
    }

    /// Intersection with the speed limits of the state space.
    pub fn clamp_speed(&self, speed: Bounds) -> Self {
        let mut out = *self;
        out.lo.v = speed.clamp(out.lo.v);
        out.hi.v = speed.clamp(out.hi.v);
        out
    }
}

/// Bounds on additive measurement noise: `true = measured + delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseBounds {
    pub y: Bounds,
    pub v: Bounds,
}

impl NoiseBounds {
    /// The band `[meas + delta_min, meas + delta_max]` known to hold the true state.
    pub fn band(&self, meas: &VehicleState) -> StateInterval {
        StateInterval {
            lo: VehicleState::new(meas.y + self.y.min, meas.v + self.v.min),
            hi: VehicleState::new(meas.y + self.y.max, meas.v + self.v.max),
        }
    }
}

/// Piecewise-constant input signal on `[0, inf)`. The last value holds forever.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSignal {
    Constant(f64),
    /// `low` on `[0, switch)`, `high` afterwards.
    BangBang { low: f64, switch: f64, high: f64 },
    /// `values[i]` on `[breaks[i], breaks[i + 1])`; `breaks[0] == 0`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl InputSignal {
    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(Error::InvalidSignal(
                "breakpoints and values must be non-empty and of equal length".into(),
            ));
        }
        if breaks[0] != 0.0 {
            return Err(Error::InvalidSignal("first breakpoint must be 0".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSignal(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self::Piecewise { breaks, values })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Self::Constant(u) => *u,
            Self::BangBang { low, switch, high } => {
                if t < *switch {
                    *low
                } else {
                    *high
                }
            }
            Self::Piecewise { breaks, values } => {
                let idx = breaks.partition_point(|b| *b <= t);
                values[idx.saturating_sub(1)]
            }
        }
    }

    /// First breakpoint strictly inside `(from, to)`.
    fn breakpoint_within(&self, from: f64, to: f64) -> Option<f64> {
        match self {
            Self::Constant(_) => None,
            Self::BangBang { switch, .. } => (*switch > from && *switch < to).then_some(*switch),
            Self::Piecewise { breaks, .. } => {
                let idx = breaks.partition_point(|b| *b <= from);
                breaks.get(idx).copied().filter(|b| *b < to)
            }
        }
    }

    /// The signal restricted to `[offset, inf)` and re-anchored at 0.
    pub fn shifted(&self, offset: f64) -> Self {
        match self {
            Self::Constant(u) => Self::Constant(*u),
            Self::BangBang { low, switch, high } => {
                if *switch <= offset {
                    Self::Constant(*high)
                } else {
                    Self::BangBang {
                        low: *low,
                        switch: switch - offset,
                        high: *high,
                    }
                }
            }
            Self::Piecewise { breaks, values } => {
                let first = breaks.partition_point(|b| *b <= offset).saturating_sub(1);
                let mut nb = vec![0.0];
                let mut nv = vec![values[first]];
                for (b, v) in breaks[first + 1..].iter().zip(&values[first + 1..]) {
                    nb.push(b - offset);
                    nv.push(*v);
                }
                Self::Piecewise {
                    breaks: nb,
                    values: nv,
                }
            }
        }
    }

    /// Every value lies within `bounds`.
    pub fn within(&self, bounds: Bounds) -> bool {
        match self {
            Self::Constant(u) => bounds.contains(*u),
            Self::BangBang { low, high, .. } => bounds.contains(*low) && bounds.contains(*high),
            Self::Piecewise { values, .. } => values.iter().all(|u| bounds.contains(*u)),
        }
    }

    /// Pointwise `self <= other` on `[0, horizon]`, checked at every breakpoint of either signal.
    pub fn le_on(&self, other: &Self, horizon: f64) -> bool {
        let mut probes = vec![0.0];
        for sig in [self, other] {
            match sig {
                Self::Constant(_) => {}
                Self::BangBang { switch, .. } => probes.push(*switch),
                Self::Piecewise { breaks, .. } => probes.extend(breaks),
            }
        }
        probes
            .into_iter()
            .filter(|t| *t >= 0.0 && *t <= horizon)
            .all(|t| self.value_at(t) <= other.value_at(t))
    }
}

/// Disturbance values held constant over an integration call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disturbance {
    pub dy: f64,
    pub dv: f64,
}

impl Disturbance {
    pub const ZERO: Self = Self { dy: 0.0, dv: 0.0 };
}

#[inline(always)]
fn derivative(p: &VehicleParams, v: f64, u: f64, d: Disturbance) -> (f64, f64) {
    let v = p.speed.clamp(v);
    let mut acc = u - p.drag * v * v + d.dv;
    if v <= p.speed.min {
        acc = acc.max(0.0);
    }
    if v >= p.speed.max {
        acc = acc.min(0.0);
    }
    (v + d.dy, acc)
}

/// One classical RK4 step followed by speed saturation.
/// Position rate of a state whose speed sits at a limit that the constant
/// input `u` keeps it at, so that every later step moves it linearly.
pub(crate) fn held_rate(p: &VehicleParams, s: &VehicleState, u: f64, d: Disturbance) -> Option<f64> {
    if s.v < p.speed.max && s.v > p.speed.min {
        return None;
    }
    let (rate, acc) = derivative(p, s.v, u, d);
    (acc == 0.0 && rate > 0.0).then_some(rate)
}

#[inline(always)]
pub(crate) fn rk4_step(
    p: &VehicleParams,
    s: VehicleState,
    u: f64,
    d: Disturbance,
    h: f64,
) -> VehicleState {
    let (y1, v1) = derivative(p, s.v, u, d);
    let (y2, v2) = derivative(p, s.v + 0.5 * h * v1, u, d);
    let (y3, v3) = derivative(p, s.v + 0.5 * h * v2, u, d);
    let (y4, v4) = derivative(p, s.v + h * v3, u, d);
    VehicleState {
        y: s.y + h / 6.0 * (y1 + 2.0 * y2 + 2.0 * y3 + y4),
        v: p.speed.clamp(s.v + h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4)),
    }
}

/// Marches the state forward on the grid `k * step`, splitting any grid step
/// that contains a signal breakpoint. `visit` sees every sub-step as
/// `(t_prev, s_prev, t, s)` and can stop the march early.
///
/// Starting at grid index `start_index` with the state at that grid point
/// reproduces exactly the same arithmetic as a march from `t = 0`.
pub(crate) fn march<F>(
    p: &VehicleParams,
    start_index: usize,
    s0: VehicleState,
    sig: &InputSignal,
    d: Disturbance,
    step: f64,
    t_end: f64,
    mut visit: F,
) -> Result<VehicleState>
where
    F: FnMut(f64, &VehicleState, f64, &VehicleState) -> ControlFlow<()>,
{
    let mut k = start_index;
    let mut t = k as f64 * step;
    let mut s = s0;
    while t < t_end {
        let grid_next = ((k + 1) as f64 * step).min(t_end);
        let mut t_sub = t;
        while t_sub < grid_next {
            let t_to = sig
                .breakpoint_within(t_sub, grid_next)
                .unwrap_or(grid_next);
            let next = rk4_step(p, s, sig.value_at(t_sub), d, t_to - t_sub);
            if !next.is_finite() {
                return Err(Error::IntegrationDiverged { time: t_to });
            }
            let flow = visit(t_sub, &s, t_to, &next);
            s = next;
            t_sub = t_to;
            if flow.is_break() {
                return Ok(s);
            }
        }
        k += 1;
        t = grid_next;
    }
    Ok(s)
}

/// Trajectory under `sig` with the disturbance held at `dist`, sampled at
/// multiples of `step` (plus the horizon itself).
pub fn integrate_extremal(
    params: &VehicleParams,
    s0: VehicleState,
    sig: &InputSignal,
    dist: Extreme,
    horizon: f64,
    step: f64,
) -> Result<Vec<(f64, VehicleState)>> {
    integrate_with(params, s0, sig, params.disturbance(dist), horizon, step)
}

/// Trajectory under `sig` and a constant disturbance, sampled on the grid.
pub fn integrate_with(
    params: &VehicleParams,
    s0: VehicleState,
    sig: &InputSignal,
    d: Disturbance,
    horizon: f64,
    step: f64,
) -> Result<Vec<(f64, VehicleState)>> {
    check_step(step)?;
    let mut out = vec![(0.0, s0)];
    march(params, 0, s0, sig, d, step, horizon, |_, _, t, s| {
        let on_grid = ((t / step).round() * step - t).abs() <= 1e-9 * step.max(t);
        if on_grid || t >= horizon {
            out.push((t, *s));
        }
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!(
            "integration step must be positive, got {step}"
        )))
    }
}

/// Signals bounding the reachable set of `params` from below and above.
///
/// Controlled vehicles follow `sig`; uncontrolled vehicles take the extremal
/// driver input, since `sig` does not act on them.
pub fn extremal_inputs(params: &VehicleParams, sig: &InputSignal) -> (InputSignal, InputSignal) {
    if params.controlled {
        (sig.clone(), sig.clone())
    } else {
        (
            InputSignal::Constant(params.input.min),
            InputSignal::Constant(params.input.max),
        )
    }
}

/// Interval reachable at `horizon` from any state in `est`, under any
/// admissible disturbance (and driver input, for uncontrolled vehicles).
pub fn propagate_interval(
    params: &VehicleParams,
    est: &StateInterval,
    sig: &InputSignal,
    horizon: f64,
    step: f64,
) -> Result<StateInterval> {
    check_step(step)?;
    let (low_sig, high_sig) = extremal_inputs(params, sig);
    let lo = march(
        params,
        0,
        est.lo,
        &low_sig,
        params.disturbance(Extreme::Lower),
        step,
        horizon,
        |_, _, _, _| ControlFlow::Continue(()),
    )?;
    let hi = march(
        params,
        0,
        est.hi,
        &high_sig,
        params.disturbance(Extreme::Upper),
        step,
        horizon,
        |_, _, _, _| ControlFlow::Continue(()),
    )?;
    Ok(StateInterval { lo, hi })
}

/// Interval bounds at every grid instant in `[0, horizon)`, starting with `est` itself.
pub fn propagate_samples(
    params: &VehicleParams,
    est: &StateInterval,
    sig: &InputSignal,
    horizon: f64,
    step: f64,
) -> Result<Vec<StateInterval>> {
    let (low_sig, high_sig) = extremal_inputs(params, sig);
    let lo = integrate_with(
        params,
        est.lo,
        &low_sig,
        params.disturbance(Extreme::Lower),
        horizon,
        step,
    )?;
    let hi = integrate_with(
        params,
        est.hi,
        &high_sig,
        params.disturbance(Extreme::Upper),
        horizon,
        step,
    )?;
    Ok(lo
        .iter()
        .zip(&hi)
        .filter(|((t, _), _)| *t < horizon || horizon == 0.0)
        .map(|((_, l), (_, h))| StateInterval { lo: *l, hi: *h })
        .collect())
}

/// State prediction one supervisor period ahead.
pub fn predict_step(
    params: &VehicleParams,
    est: &StateInterval,
    sig: &InputSignal,
    tau: f64,
    step: f64,
) -> Result<StateInterval> {
    if tau == 0.0 {
        return Ok(*est);
    }
    propagate_interval(params, est, sig, tau, step)
}

/// Intersects a prediction with the measurement band.
pub fn correct_estimate(
    pred: &StateInterval,
    meas: &VehicleState,
    noise: &NoiseBounds,
) -> Result<StateInterval> {
    let band = noise.band(meas);
    let lo = VehicleState::new(pred.lo.y.max(band.lo.y), pred.lo.v.max(band.lo.v));
    let hi = VehicleState::new(pred.hi.y.min(band.hi.y), pred.hi.v.min(band.hi.v));
    if lo.y > hi.y {
        return Err(Error::IncompatibleMeasurement {
            component: "position",
        });
    }
    if lo.v > hi.v {
        return Err(Error::IncompatibleMeasurement { component: "speed" });
    }
    Ok(StateInterval { lo, hi })
}

/// Linear interpolation of the instant at which `y` reaches `target` inside a sub-step.
pub(crate) fn interpolate_crossing(
    t0: f64,
    s0: &VehicleState,
    t1: f64,
    s1: &VehicleState,
    target: f64,
) -> f64 {
    if s1.y <= s0.y {
        return t1;
    }
    t0 + (target - s0.y) / (s1.y - s0.y) * (t1 - t0)
}

/// First time the position reaches `target`, or `None` beyond the horizon cap.
pub fn crossing_time(
    params: &VehicleParams,
    s0: VehicleState,
    sig: &InputSignal,
    dist: Extreme,
    target_y: f64,
    step: f64,
) -> Result<Option<f64>> {
    crossing_from(
        params,
        0,
        s0,
        sig,
        params.disturbance(dist),
        target_y,
        step,
        params.crossing_horizon(target_y - s0.y),
    )
}

/// Crossing search starting from grid index `start_index` with state `s0`
/// at that grid point. The returned time is absolute (measured from `t = 0`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn crossing_from(
    params: &VehicleParams,
    start_index: usize,
    s0: VehicleState,
    sig: &InputSignal,
    d: Disturbance,
    target_y: f64,
    step: f64,
    horizon: f64,
) -> Result<Option<f64>> {
    check_step(step)?;
    if s0.y >= target_y {
        return Ok(Some(start_index as f64 * step));
    }
    let t_end = start_index as f64 * step + horizon;
    // speed held at a bound with no input change ahead: position is linear
    let pinned = |t: f64, s: &VehicleState| -> Option<f64> {
        if s.v < params.speed.max && s.v > params.speed.min {
            return None;
        }
        if sig.breakpoint_within(t, f64::INFINITY).is_some() {
            return None;
        }
        held_rate(params, s, sig.value_at(t), d)
    };
    let mut hit = None;
    march(params, start_index, s0, sig, d, step, t_end, |t0, a, t1, b| {
        if b.y >= target_y {
            hit = Some(interpolate_crossing(t0, a, t1, b, target_y));
            return ControlFlow::Break(());
        }
        match pinned(t1, b) {
            Some(rate) => {
                let t = t1 + (target_y - b.y) / rate;
                hit = (t <= t_end).then_some(t);
                ControlFlow::Break(())
            }
            None => ControlFlow::Continue(()),
        }
    })?;
    Ok(hit)
}
