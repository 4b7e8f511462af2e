//! Closed-loop supervisors: pass the drivers' desired inputs through when a
//! safe future provably exists, otherwise apply the stored safe signal.

use std::time::Instant;

use crate::dynamics::{predict_step, propagate_samples, InputSignal, StateInterval, VehicleParams};
use crate::efficient::approx_verify;
use crate::error::{Error, Result};
use crate::exact::{exact_verify_capped, schedule_for_sequence, Schedule, Verdict};
use crate::params::{JobStatus, SchedulingConfig, SchedulingInstance, DEADLINE_SLACK};

/// Position intervals closer than this to an intersection edge count as outside.
pub const POSITION_SLACK: f64 = 1e-2;

/// Which verifier drives the supervisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Exhaustive search over crossing sequences.
    Exact,
    /// Sequence from the unit-process relaxation, with fallback to the previous sequence.
    Efficient,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Self::Exact),
            "efficient" | "approx" => Ok(Self::Efficient),
            other => Err(format!("unknown mode `{other}` (expected exact or efficient)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Efficient => "efficient",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupervisorConfig {
    /// Supervisor period (s).
    pub tau: f64,
    pub sched: SchedulingConfig,
    /// Give up the exact search after this many sequences.
    pub exact_cap: Option<u64>,
}

impl SupervisorConfig {
    /// Integration step `tau / 10`, the other knobs at their defaults.
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            sched: SchedulingConfig::with_step(tau / 10.0),
            exact_cap: None,
        }
    }
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self::new(0.1)
    }
}

/// Two vehicles, at least one controlled, whose position intervals both meet
/// their open intersection intervals.
pub fn bad_set_overlap(params: &[VehicleParams], est: &[StateInterval]) -> bool {
    let inside: Vec<bool> = params
        .iter()
        .zip(est)
        .map(|(p, e)| e.hi.y > p.alpha + POSITION_SLACK && e.lo.y < p.beta - POSITION_SLACK)
        .collect();
    pair_inside(params, &inside)
}

/// Bad-set membership of exact positions (no slack).
pub fn positions_in_bad_set(params: &[VehicleParams], y: &[f64]) -> bool {
    let inside: Vec<bool> = params
        .iter()
        .zip(y)
        .map(|(p, y)| *y > p.alpha && *y < p.beta)
        .collect();
    pair_inside(params, &inside)
}

fn pair_inside(params: &[VehicleParams], inside: &[bool]) -> bool {
    let controlled_in = params
        .iter()
        .zip(inside)
        .filter(|(p, i)| **i && p.controlled)
        .count();
    let total_in = inside.iter().filter(|i| **i).count();
    controlled_in >= 1 && total_in >= 2
}

/// Checks the Bad set at every integration instant of `[0, tau)` while the
/// fleet follows `desired` from `est`.
pub fn desired_safe_over_step(
    params: &[VehicleParams],
    est: &[StateInterval],
    desired: &[InputSignal],
    tau: f64,
    step: f64,
) -> Result<bool> {
    if tau <= 0.0 {
        return Ok(true);
    }
    let mut tracks = Vec::with_capacity(params.len());
    for ((p, e), u) in params.iter().zip(est).zip(desired) {
        tracks.push(propagate_samples(p, e, u, tau, step)?);
    }
    let samples = tracks.iter().map(Vec::len).min().unwrap_or(0);
    let mut at = vec![StateInterval::point(Default::default()); params.len()];
    for k in 0..samples {
        for (slot, track) in at.iter_mut().zip(&tracks) {
            *slot = track[k];
        }
        if bad_set_overlap(params, &at) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Input signals that realize `schedule` from the estimate the instance was
/// built on. Vehicles at `T = 0` get full throttle; uncontrolled vehicles get
/// a placeholder zero that is never applied.
pub fn safe_input_generator(
    params: &[VehicleParams],
    inst: &SchedulingInstance,
    schedule: &Schedule,
) -> Result<Vec<InputSignal>> {
    let mut out: Vec<InputSignal> = params.iter().map(|_| InputSignal::Constant(0.0)).collect();
    for job in &inst.jobs {
        let p = &params[job.id];
        let t = schedule.entry(job.id).ok_or_else(|| {
            Error::ContractViolation(format!("schedule has no entry for vehicle {}", job.id))
        })?;
        if job.status != JobStatus::Approaching || t <= 0.0 {
            out[job.id] = InputSignal::Constant(p.input.max);
            continue;
        }
        let vj = job.vehicle().ok_or_else(|| {
            Error::ContractViolation("safe inputs need a vehicle-backed instance".into())
        })?;
        if t < job.release - DEADLINE_SLACK || t > job.deadline + DEADLINE_SLACK {
            return Err(Error::ContractViolation(format!(
                "entry {t} of vehicle {} outside [{}, {}]",
                job.id, job.release, job.deadline
            )));
        }
        let switch = vj.switch_for_entry(t.clamp(job.release, job.deadline))?;
        out[job.id] = if switch <= 0.0 {
            InputSignal::Constant(p.input.max)
        } else {
            InputSignal::BangBang {
                low: p.input.min,
                switch,
                high: p.input.max,
            }
        };
    }
    Ok(out)
}

/// State prediction of the whole fleet one period ahead.
pub fn predict_fleet(
    params: &[VehicleParams],
    est: &[StateInterval],
    signals: &[InputSignal],
    cfg: &SupervisorConfig,
) -> Result<Vec<StateInterval>> {
    params
        .iter()
        .zip(est)
        .zip(signals)
        .map(|((p, e), u)| predict_step(p, e, u, cfg.tau, cfg.sched.step))
        .collect()
}

fn verify(mode: Mode, params: &[VehicleParams], est: &[StateInterval], cfg: &SupervisorConfig) -> Result<Verdict> {
    match mode {
        Mode::Exact => exact_verify_capped(params, est, &cfg.sched, cfg.exact_cap),
        Mode::Efficient => approx_verify(params, est, &cfg.sched),
    }
}

/// What the supervisor did at one step.
#[derive(Clone, Debug)]
pub struct StepDecision {
    /// Per vehicle input over the coming period (uncontrolled entries are placeholders).
    pub output: Vec<InputSignal>,
    pub overridden: bool,
    /// Schedule the stored safe signal was generated from.
    pub schedule_used: Schedule,
    /// Verifier answer on the desired-input prediction.
    pub answer: bool,
    /// Efficient mode fell back to the previous sequence.
    pub fallback_used: bool,
    /// Wall time of the step (s).
    pub wall_s: f64,
}

/// Persistent state of a supervisor across steps.
#[derive(Clone, Debug)]
pub struct SupervisorSession {
    pub mode: Mode,
    pub params: Vec<VehicleParams>,
    pub cfg: SupervisorConfig,
    /// Safe signal applicable from the current step on.
    pub stored_safe: Option<Vec<InputSignal>>,
    /// Crossing sequence of the last schedule used.
    pub stored_sequence: Vec<usize>,
    pub last_prediction: Option<Vec<StateInterval>>,
    pub step: usize,
}

/// Verifies the initial condition and prepares a session.
pub fn initialize_session(
    mode: Mode,
    params: &[VehicleParams],
    est: &[StateInterval],
    desired: &[InputSignal],
    cfg: &SupervisorConfig,
) -> Result<SupervisorSession> {
    for p in params {
        p.validate()?;
    }
    if params.len() != est.len() || params.len() != desired.len() {
        return Err(Error::ContractViolation(
            "params, estimates and desired inputs must have one entry per vehicle".into(),
        ));
    }
    let pred = predict_fleet(params, est, desired, cfg)?;
    let v = verify(mode, params, &pred, cfg)?;
    if !v.answer || !desired_safe_over_step(params, est, desired, cfg.tau, cfg.sched.step)? {
        return Err(Error::InfeasibleInitialCondition);
    }
    let mut session = SupervisorSession {
        mode,
        params: params.to_vec(),
        cfg: *cfg,
        stored_safe: None,
        stored_sequence: v.schedule.map(|s| s.sequence).unwrap_or_default(),
        last_prediction: None,
        step: 0,
    };
    // a safe signal valid from time 0, in case the first step must override
    let now = verify(mode, params, est, cfg)?;
    if let (Some(s), Some(inst)) = (&now.schedule, &now.instance) {
        session.stored_safe = Some(safe_input_generator(params, inst, s)?);
    }
    Ok(session)
}

/// Vehicles before the entry that `seq` does not mention go first, in id order.
fn complete_sequence(seq: &[usize], inst: &SchedulingInstance) -> Vec<usize> {
    let mut out: Vec<usize> = inst
        .pending_ids()
        .into_iter()
        .filter(|id| !seq.contains(id))
        .collect();
    out.extend_from_slice(seq);
    out
}

/// One supervisor period.
pub fn supervisor_step(
    session: &mut SupervisorSession,
    est: &[StateInterval],
    desired: &[InputSignal],
) -> Result<StepDecision> {
    let started = Instant::now();
    let params = session.params.clone();
    let cfg = session.cfg;
    let k = session.step;

    let pred_des = predict_fleet(&params, est, desired, &cfg)?;
    let v1 = verify(session.mode, &params, &pred_des, &cfg)?;
    let answer = v1.answer;
    let within = answer && desired_safe_over_step(&params, est, desired, cfg.tau, cfg.sched.step)?;

    let decision = if within {
        let schedule = v1.schedule.expect("yes answers carry a schedule");
        let inst = v1.instance.expect("yes answers carry an instance");
        let next = safe_input_generator(&params, &inst, &schedule)?;
        session.stored_safe = Some(next);
        session.stored_sequence = schedule.sequence.clone();
        session.last_prediction = Some(pred_des);
        StepDecision {
            output: desired.to_vec(),
            overridden: false,
            schedule_used: schedule,
            answer,
            fallback_used: false,
            wall_s: 0.0,
        }
    } else {
        let safe = session.stored_safe.clone().ok_or(Error::Blocked { step: k })?;
        let pred_safe = predict_fleet(&params, est, &safe, &cfg)?;
        let v2 = verify(session.mode, &params, &pred_safe, &cfg)?;
        let mut fallback_used = false;
        let (schedule, inst) = match (v2.answer, v2.instance) {
            (true, Some(inst)) => (v2.schedule.expect("yes answers carry a schedule"), inst),
            (false, Some(inst)) if session.mode == Mode::Efficient => {
                fallback_used = true;
                let seq = complete_sequence(&session.stored_sequence, &inst);
                let s = schedule_for_sequence(&seq, &inst)?;
                if !s.feasible {
                    return Err(Error::Blocked { step: k });
                }
                (s, inst)
            }
            _ => return Err(Error::Blocked { step: k }),
        };
        let next = safe_input_generator(&params, &inst, &schedule)?;
        session.stored_safe = Some(next);
        session.stored_sequence = schedule.sequence.clone();
        session.last_prediction = Some(pred_safe);
        StepDecision {
            output: safe,
            overridden: true,
            schedule_used: schedule,
            answer,
            fallback_used,
            wall_s: 0.0,
        }
    };
    session.step += 1;
    let mut decision = decision;
    decision.wall_s = started.elapsed().as_secs_f64();
    Ok(decision)
}
