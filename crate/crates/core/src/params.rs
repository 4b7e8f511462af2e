//! Scheduling abstraction of a state estimate: release times, deadlines,
//! process times, idle-times and the uniform process-time bound.
//!
//! Entry and exit times are realized by the two-piece input family
//! "`u_min` until a switch time, `u_max` afterwards". Delaying the switch delays
//! both the entry of the upper bound and the exit of the lower bound, so a
//! bisection on the switch time hits any entry time in `[R, D]`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::dynamics::{
    crossing_from, crossing_time, held_rate, interpolate_crossing, march, Extreme, InputSignal,
    StateInterval, VehicleParams, VehicleState,
};
use crate::error::{Error, Result};

/// Entry times may exceed a deadline (or undercut a release) by this much
/// before they count as infeasible. Covers bisection error accumulated along
/// a crossing sequence.
pub const DEADLINE_SLACK: f64 = 1e-4;

/// Numerical knobs of the scheduling abstraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchedulingConfig {
    /// Integration step for every crossing computation (s).
    pub step: f64,
    /// Accepted error on the realized entry time (s).
    pub bisection_tol: f64,
    pub bisection_max_iter: usize,
    /// Grid size per vehicle for the process-time bound.
    pub theta_samples: usize,
}

impl Default for SchedulingConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            bisection_tol: 1e-6,
            bisection_max_iter: 80,
            theta_samples: 64,
        }
    }
}

impl SchedulingConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }
}

/// Where a controlled vehicle stands relative to the intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JobStatus {
    /// Upper position bound is before the entry.
    Approaching,
    /// Upper bound has reached the entry, lower bound has not left.
    Entered,
    /// Lower position bound is past the exit.
    Exited,
}

/// Input signal and times that realize a scheduled entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Realization {
    /// Switch time of the bang-bang signal; `0` means full throttle throughout.
    pub switch: f64,
    /// Time at which the upper bound reaches the entry.
    pub entry: f64,
    /// Time at which the lower bound reaches the exit.
    pub exit: f64,
}

/// Full-throttle run from `v_min`, as displacement per grid step.
///
/// After the braking prefix has brought a bound down to `v_min`, a switch on a
/// grid point always starts this same motion, shifted in time and position.
#[derive(Debug, Default)]
struct Launch {
    disp: Vec<f64>,
    /// Position rate once the speed is held at `v_max`.
    rate: Option<f64>,
}

impl Launch {
    fn build(p: &VehicleParams, extreme: Extreme, step: f64, reach: f64) -> Result<Self> {
        let d = p.disturbance(extreme);
        let u = p.input.max;
        let mut disp = vec![0.0];
        let mut rate = None;
        march(
            p,
            0,
            VehicleState::new(0.0, p.speed.min),
            &InputSignal::Constant(u),
            d,
            step,
            p.crossing_horizon(reach),
            |_, _, _, b| {
                disp.push(b.y);
                if b.y >= reach {
                    return ControlFlow::Break(());
                }
                rate = held_rate(p, b, u, d);
                if rate.is_some() {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )?;
        Ok(Self { disp, rate })
    }

    /// Time to cover `dist`, if the profile reaches that far.
    fn time_to(&self, dist: f64, step: f64) -> Option<f64> {
        if dist <= 0.0 {
            return Some(0.0);
        }
        let i = self.disp.partition_point(|y| *y < dist);
        if i < self.disp.len() {
            let a = VehicleState::new(self.disp[i - 1], 0.0);
            let b = VehicleState::new(self.disp[i], 0.0);
            return Some(interpolate_crossing((i - 1) as f64 * step, &a, i as f64 * step, &b, dist));
        }
        let last = self.disp.len() - 1;
        self.rate
            .map(|r| last as f64 * step + (dist - self.disp[last]) / r)
    }
}

/// Crossing model of one controlled vehicle built from its estimate.
///
/// The braking prefixes of both bounds are integrated once, so evaluating a
/// bang-bang signal only integrates the part after the switch.
#[derive(Debug)]
pub struct VehicleJob {
    params: VehicleParams,
    est: StateInterval,
    cfg: SchedulingConfig,
    status: JobStatus,
    release: f64,
    deadline: f64,
    hi_brake: Vec<VehicleState>,
    lo_brake: Vec<VehicleState>,
    lo_brake_exit: Option<f64>,
    hi_launch: Launch,
    lo_launch: Launch,
    free_exit: f64,
    memo: RefCell<HashMap<u64, f64>>,
}

impl VehicleJob {
    pub fn new(params: &VehicleParams, est: &StateInterval, cfg: &SchedulingConfig) -> Result<Self> {
        let mut job = Self {
            params: params.clone(),
            est: *est,
            cfg: *cfg,
            status: JobStatus::Approaching,
            release: 0.0,
            deadline: 0.0,
            hi_brake: Vec::new(),
            lo_brake: Vec::new(),
            lo_brake_exit: None,
            hi_launch: Launch::default(),
            lo_launch: Launch::default(),
            free_exit: 0.0,
            memo: RefCell::new(HashMap::new()),
        };
        if est.lo.y >= params.beta {
            job.status = JobStatus::Exited;
            return Ok(job);
        }
        if est.hi.y >= params.alpha {
            job.status = JobStatus::Entered;
            job.free_exit = crossing_time(
                params,
                est.lo,
                &InputSignal::Constant(params.input.max),
                Extreme::Lower,
                params.beta,
                cfg.step,
            )?
            .unwrap_or(f64::INFINITY);
            return Ok(job);
        }
        job.build_tracks()?;
        job.release = job.entry_for_switch(0.0)?;
        Ok(job)
    }

    fn build_tracks(&mut self) -> Result<()> {
        let p = &self.params;
        let h = self.cfg.step;
        let brake = InputSignal::Constant(p.input.min);

        let mut hi_samples = vec![self.est.hi];
        let mut deadline = None;
        let horizon = p.crossing_horizon(p.alpha - self.est.hi.y);
        march(
            p,
            0,
            self.est.hi,
            &brake,
            p.disturbance(Extreme::Upper),
            h,
            horizon,
            |t0, a, t1, b| {
                if b.y >= p.alpha {
                    deadline = Some(interpolate_crossing(t0, a, t1, b, p.alpha));
                    ControlFlow::Break(())
                } else {
                    hi_samples.push(*b);
                    ControlFlow::Continue(())
                }
            },
        )?;
        let deadline = deadline.ok_or_else(|| {
            Error::ContractViolation("upper bound never reaches the entry while braking".into())
        })?;

        let mut lo_samples = vec![self.est.lo];
        let mut lo_exit = None;
        let last_needed = (deadline / h).floor() as usize + 1;
        march(
            p,
            0,
            self.est.lo,
            &brake,
            p.disturbance(Extreme::Lower),
            h,
            (last_needed as f64) * h,
            |t0, a, t1, b| {
                if b.y >= p.beta {
                    lo_exit = Some(interpolate_crossing(t0, a, t1, b, p.beta));
                    ControlFlow::Break(())
                } else {
                    lo_samples.push(*b);
                    ControlFlow::Continue(())
                }
            },
        )?;

        self.hi_launch = Launch::build(p, Extreme::Upper, h, p.alpha - self.est.hi.y)?;
        self.lo_launch = Launch::build(p, Extreme::Lower, h, p.beta - self.est.lo.y)?;
        self.deadline = deadline;
        self.hi_brake = hi_samples;
        self.lo_brake = lo_samples;
        self.lo_brake_exit = lo_exit;
        Ok(())
    }

    fn signal(&self, switch: f64) -> InputSignal {
        InputSignal::BangBang {
            low: self.params.input.min,
            switch,
            high: self.params.input.max,
        }
    }

    fn grid_index(&self, t: f64, len: usize) -> usize {
        ((t / self.cfg.step).floor().max(0.0) as usize).min(len - 1)
    }

    /// Entry time of the upper bound under the bang-bang signal with this switch.
    pub fn entry_for_switch(&self, switch: f64) -> Result<f64> {
        if self.status != JobStatus::Approaching {
            return Ok(0.0);
        }
        if switch >= self.deadline {
            return Ok(self.deadline);
        }
        if let Some(t) = self.launched(switch, &self.hi_brake, &self.hi_launch, self.params.alpha) {
            return Ok(t);
        }
        let k = self.grid_index(switch, self.hi_brake.len());
        self.crossing_after(k, self.hi_brake[k], switch, Extreme::Upper, self.params.alpha)
    }

    /// Exit time of the lower bound under the bang-bang signal with this switch.
    pub fn exit_for_switch(&self, switch: f64) -> Result<f64> {
        match self.status {
            JobStatus::Exited => return Ok(0.0),
            JobStatus::Entered => return Ok(self.free_exit),
            JobStatus::Approaching => {}
        }
        if let Some(e) = self.lo_brake_exit {
            if e <= switch {
                return Ok(e);
            }
        }
        if let Some(t) = self.launched(switch, &self.lo_brake, &self.lo_launch, self.params.beta) {
            return Ok(t);
        }
        let k = self.grid_index(switch, self.lo_brake.len());
        self.crossing_after(k, self.lo_brake[k], switch, Extreme::Lower, self.params.beta)
    }

    /// Crossing time through the launch profile, for a switch on a grid
    /// point where the braking bound already sits at `v_min`.
    fn launched(&self, switch: f64, track: &[VehicleState], launch: &Launch, target: f64) -> Option<f64> {
        let h = self.cfg.step;
        let k = (switch / h).round() as usize;
        if k as f64 * h != switch || k >= track.len() || track[k].v != self.params.speed.min {
            return None;
        }
        launch.time_to(target - track[k].y, h).map(|dt| switch + dt)
    }

    fn crossing_after(
        &self,
        k: usize,
        state: VehicleState,
        switch: f64,
        extreme: Extreme,
        target: f64,
    ) -> Result<f64> {
        let p = &self.params;
        let horizon = p.crossing_horizon(target - state.y);
        crossing_from(
            p,
            k,
            state,
            &self.signal(switch),
            p.disturbance(extreme),
            target,
            self.cfg.step,
            horizon,
        )?
        .ok_or_else(|| Error::ContractViolation("crossing not reached within horizon cap".into()))
    }

    /// Switch time whose entry matches `entry` (clamped into `[R, D]`).
    pub fn switch_for_entry(&self, entry: f64) -> Result<f64> {
        if self.status != JobStatus::Approaching || entry <= self.release {
            return Ok(0.0);
        }
        if entry >= self.deadline {
            return Ok(self.deadline);
        }
        let (mut lo, mut hi) = (0.0, self.deadline);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..self.cfg.bisection_max_iter {
            mid = 0.5 * (lo + hi);
            let f = self.entry_for_switch(mid)?;
            if (f - entry).abs() <= self.cfg.bisection_tol {
                break;
            }
            if f < entry {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }

    /// Signal and times realizing entry at `entry`; `None` outside `[R, D]`.
    pub fn realize(&self, entry: f64) -> Result<Option<Realization>> {
        match self.status {
            JobStatus::Exited => {
                return Ok((entry <= DEADLINE_SLACK).then_some(Realization {
                    switch: 0.0,
                    entry: 0.0,
                    exit: 0.0,
                }))
            }
            JobStatus::Entered => {
                return Ok((entry <= DEADLINE_SLACK).then_some(Realization {
                    switch: 0.0,
                    entry: 0.0,
                    exit: self.free_exit,
                }))
            }
            JobStatus::Approaching => {}
        }
        if entry < self.release - DEADLINE_SLACK || entry > self.deadline + DEADLINE_SLACK {
            return Ok(None);
        }
        let switch = self.switch_for_entry(entry)?;
        Ok(Some(Realization {
            switch,
            entry: self.entry_for_switch(switch)?,
            exit: self.exit_for_switch(switch)?,
        }))
    }

    /// Minimal crossing duration given entry at `entry`, infinite if unattainable.
    pub fn process_time(&self, entry: f64) -> Result<f64> {
        if let Some(p) = self.memo.borrow().get(&entry.to_bits()) {
            return Ok(*p);
        }
        let p = match self.realize(entry)? {
            None => f64::INFINITY,
            Some(r) => match self.status {
                JobStatus::Approaching => (r.exit - entry).max(0.0),
                _ => r.exit,
            },
        };
        self.memo.borrow_mut().insert(entry.to_bits(), p);
        Ok(p)
    }

    /// Largest crossing duration over a switch-time grid covering `[R, D]`.
    pub fn max_process_time(&self, samples: usize) -> Result<f64> {
        match self.status {
            JobStatus::Exited => return Ok(0.0),
            JobStatus::Entered => return Ok(self.free_exit),
            JobStatus::Approaching => {}
        }
        let n = samples.max(2);
        let mut best: f64 = 0.0;
        let h = self.cfg.step;
        for i in 0..n {
            // grid-aligned switches, and the deadline itself
            let s = if i + 1 == n {
                self.deadline
            } else {
                (self.deadline * i as f64 / (n - 1) as f64 / h).floor() * h
            };
            let entry = self.entry_for_switch(s)?;
            let exit = self.exit_for_switch(s)?;
            best = best.max(exit - entry);
        }
        Ok(best)
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn estimate(&self) -> &StateInterval {
        &self.est
    }

    pub fn status(&self) -> JobStatus {
        self.status
    }

    pub fn release(&self) -> f64 {
        self.release
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn free_exit(&self) -> f64 {
        self.free_exit
    }
}

/// How a job's process time is obtained.
#[derive(Debug)]
pub enum ProcessModel {
    Vehicle(Box<VehicleJob>),
    /// Fixed crossing duration, used for hand-built instances.
    Constant(f64),
}

/// One controlled vehicle seen as a job on the intersection.
#[derive(Debug)]
pub struct Job {
    pub id: usize,
    pub release: f64,
    pub deadline: f64,
    pub status: JobStatus,
    pub model: ProcessModel,
}

impl Job {
    pub fn from_vehicle(
        id: usize,
        params: &VehicleParams,
        est: &StateInterval,
        cfg: &SchedulingConfig,
    ) -> Result<Self> {
        let v = VehicleJob::new(params, est, cfg)?;
        Ok(Self {
            id,
            release: v.release(),
            deadline: v.deadline(),
            status: v.status(),
            model: ProcessModel::Vehicle(Box::new(v)),
        })
    }

    /// Approaching job with a constant crossing duration.
    pub fn fixed(id: usize, release: f64, deadline: f64, process: f64) -> Self {
        Self {
            id,
            release,
            deadline,
            status: JobStatus::Approaching,
            model: ProcessModel::Constant(process),
        }
    }

    /// Job already inside the intersection, leaving after `process`.
    pub fn entered(id: usize, process: f64) -> Self {
        Self {
            id,
            release: 0.0,
            deadline: 0.0,
            status: if process > 0.0 {
                JobStatus::Entered
            } else {
                JobStatus::Exited
            },
            model: ProcessModel::Constant(process),
        }
    }

    /// Not yet at the entry, so it belongs to the set being sequenced.
    pub fn is_pending(&self) -> bool {
        self.status == JobStatus::Approaching
    }

    pub fn process_time(&self, entry: f64) -> Result<f64> {
        match &self.model {
            ProcessModel::Vehicle(v) => v.process_time(entry),
            ProcessModel::Constant(p) => {
                let ok = if self.is_pending() {
                    entry >= self.release - DEADLINE_SLACK
                        && entry <= self.deadline + DEADLINE_SLACK
                } else {
                    entry <= DEADLINE_SLACK
                };
                Ok(if ok { *p } else { f64::INFINITY })
            }
        }
    }

    pub fn max_process_time(&self, samples: usize) -> Result<f64> {
        match &self.model {
            ProcessModel::Vehicle(v) => v.max_process_time(samples),
            ProcessModel::Constant(p) => Ok(*p),
        }
    }

    pub fn vehicle(&self) -> Option<&VehicleJob> {
        match &self.model {
            ProcessModel::Vehicle(v) => Some(v),
            ProcessModel::Constant(_) => None,
        }
    }
}

/// Window `(start, end)` during which an uncontrolled vehicle may occupy the intersection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdleTime {
    pub id: usize,
    pub start: f64,
    pub end: f64,
}

/// Jobs and idle-times of one state estimate.
#[derive(Debug)]
pub struct SchedulingInstance {
    pub jobs: Vec<Job>,
    /// Sorted by start, ties by id.
    pub idle: Vec<IdleTime>,
    pub samples: usize,
}

impl SchedulingInstance {
    pub fn new(jobs: Vec<Job>, mut idle: Vec<IdleTime>) -> Self {
        idle.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.id.cmp(&b.id)));
        Self {
            jobs,
            idle,
            samples: SchedulingConfig::default().theta_samples,
        }
    }

    /// Builds the instance for a fleet; vehicle ids are slice indices.
    pub fn from_estimate(
        params: &[VehicleParams],
        est: &[StateInterval],
        cfg: &SchedulingConfig,
    ) -> Result<Self> {
        if params.len() != est.len() {
            return Err(Error::ContractViolation(format!(
                "{} vehicles but {} estimates",
                params.len(),
                est.len()
            )));
        }
        let mut jobs = Vec::new();
        let mut idle = Vec::new();
        for (id, (p, e)) in params.iter().zip(est).enumerate() {
            if p.controlled {
                jobs.push(Job::from_vehicle(id, p, e, cfg)?);
            } else {
                let (start, end) = idle_time(p, e, cfg)?;
                idle.push(IdleTime { id, start, end });
            }
        }
        let mut inst = Self::new(jobs, idle);
        inst.samples = cfg.theta_samples;
        Ok(inst)
    }

    pub fn job(&self, id: usize) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// Ids of controlled vehicles still before the entry, in id order.
    pub fn pending_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .jobs
            .iter()
            .filter(|j| j.is_pending())
            .map(|j| j.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Latest exit among vehicles already at or past the entry (0 if none).
    pub fn p_max(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for j in self.jobs.iter().filter(|j| !j.is_pending()) {
            best = best.max(j.process_time(0.0)?);
        }
        Ok(best)
    }

    /// Uniform bound on every crossing duration, with a small safety margin.
    pub fn theta_max(&self) -> Result<f64> {
        theta_max(self, self.samples)
    }
}

/// Earliest entry time of the upper bound (full throttle, largest disturbance).
pub fn release_time(params: &VehicleParams, est: &StateInterval, cfg: &SchedulingConfig) -> Result<f64> {
    if est.hi.y >= params.alpha {
        return Ok(0.0);
    }
    Ok(crossing_time(
        params,
        est.hi,
        &InputSignal::Constant(params.input.max),
        Extreme::Upper,
        params.alpha,
        cfg.step,
    )?
    .unwrap_or(f64::INFINITY))
}

/// Latest entry time of the upper bound (full braking, largest disturbance).
pub fn deadline(params: &VehicleParams, est: &StateInterval, cfg: &SchedulingConfig) -> Result<f64> {
    if est.hi.y >= params.alpha {
        return Ok(0.0);
    }
    Ok(crossing_time(
        params,
        est.hi,
        &InputSignal::Constant(params.input.min),
        Extreme::Upper,
        params.alpha,
        cfg.step,
    )?
    .unwrap_or(f64::INFINITY))
}

/// Minimal crossing duration for entry at `entry`.
pub fn process_time(
    params: &VehicleParams,
    est: &StateInterval,
    entry: f64,
    cfg: &SchedulingConfig,
) -> Result<f64> {
    VehicleJob::new(params, est, cfg)?.process_time(entry)
}

/// Occupancy window `(R̄, P̄)` of an uncontrolled vehicle.
pub fn idle_time(params: &VehicleParams, est: &StateInterval, cfg: &SchedulingConfig) -> Result<(f64, f64)> {
    if est.lo.y >= params.beta {
        return Ok((0.0, 0.0));
    }
    let end = crossing_time(
        params,
        est.lo,
        &InputSignal::Constant(params.input.min),
        Extreme::Lower,
        params.beta,
        cfg.step,
    )?
    .unwrap_or(f64::INFINITY);
    if est.hi.y >= params.alpha {
        return Ok((0.0, end));
    }
    let start = crossing_time(
        params,
        est.hi,
        &InputSignal::Constant(params.input.max),
        Extreme::Upper,
        params.alpha,
        cfg.step,
    )?
    .unwrap_or(f64::INFINITY);
    Ok((start, end))
}

/// Process-time bound over every controlled vehicle of an instance.
pub fn theta_max(instance: &SchedulingInstance, samples: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for j in &instance.jobs {
        best = best.max(j.max_process_time(samples)?);
    }
    Ok(best * (1.0 + 1e-6) + SchedulingConfig::default().bisection_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_with, Bounds};

    fn ideal() -> VehicleParams {
        VehicleParams {
            speed: Bounds::new(1.0, 10.0),
            input: Bounds::new(-2.0, 2.0),
            dist_y: Bounds::new(0.0, 0.0),
            dist_v: Bounds::new(0.0, 0.0),
            drag: 0.0,
            alpha: 0.0,
            beta: 5.0,
            controlled: true,
        }
    }

    fn point(y: f64, v: f64) -> StateInterval {
        StateInterval::point(VehicleState::new(y, v))
    }

    fn cfg() -> SchedulingConfig {
        SchedulingConfig::default()
    }

    /// Reference crossing with a much finer step.
    fn fine_crossing(p: &VehicleParams, s0: VehicleState, sig: &InputSignal, e: Extreme, target: f64) -> f64 {
        let traj = integrate_with(p, s0, sig, p.disturbance(e), 60.0, 1e-4).unwrap();
        let i = traj.iter().position(|(_, s)| s.y >= target).unwrap();
        let ((t0, a), (t1, b)) = (traj[i - 1], traj[i]);
        t0 + (target - a.y) / (b.y - a.y) * (t1 - t0)
    }

    #[test]
    fn release_zero_once_entered() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-1.0, 5.0), VehicleState::new(0.5, 6.0)).unwrap();
        assert_eq!(release_time(&p, &est, &cfg()).unwrap(), 0.0);
        assert_eq!(deadline(&p, &est, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn release_constant_speed() {
        let p = ideal();
        let r = release_time(&p, &point(-10.0, 10.0), &cfg()).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn release_matches_fine_reference() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-45.0, 9.95), VehicleState::new(-39.0, 10.05)).unwrap();
        let r = release_time(&p, &est, &cfg()).unwrap();
        let oracle = fine_crossing(&p, est.hi, &InputSignal::Constant(2.5), Extreme::Upper, 0.0);
        assert!((r - oracle).abs() <= 2.0 * cfg().step, "{r} vs {oracle}");
    }

    #[test]
    fn deadline_bracketed() {
        let p = ideal();
        let d = deadline(&p, &point(-10.0, 4.0), &cfg()).unwrap();
        assert!(d >= 10.0 / 4.0 && d <= 10.0);
        // closed form: brake from 4 to 1 over 1.5 s covering 3.75 m, then 6.25 m at 1 m/s
        // the speed-limit kink falls inside an RK4 step, hence the loose tolerance
        assert!((d - 7.75).abs() < 1e-3, "{d}");
    }

    #[test]
    fn process_time_zero_once_exited() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(5.0, 5.0), VehicleState::new(8.0, 6.0)).unwrap();
        assert_eq!(process_time(&p, &est, 0.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn process_time_at_v_max() {
        let p = ideal();
        let est = point(-20.0, 10.0);
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        let pt = job.process_time(job.release()).unwrap();
        assert!((pt - 0.5).abs() < 1e-9, "{pt}");
    }

    #[test]
    fn process_time_at_release_is_full_throttle() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-45.0, 7.95), VehicleState::new(-39.0, 8.05)).unwrap();
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        let full = InputSignal::Constant(p.input.max);
        let entry = crossing_time(&p, est.hi, &full, Extreme::Upper, p.alpha, 0.01).unwrap().unwrap();
        let exit = crossing_time(&p, est.lo, &full, Extreme::Lower, p.beta, 0.01).unwrap().unwrap();
        let pt = job.process_time(job.release()).unwrap();
        assert!((pt - (exit - entry)).abs() < 1e-9);
    }

    #[test]
    fn process_time_infinite_outside_window() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-45.0, 7.95), VehicleState::new(-39.0, 8.05)).unwrap();
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        assert!(job.process_time(job.release() - 0.01).unwrap().is_infinite());
        assert!(job.process_time(job.deadline() + 0.01).unwrap().is_infinite());
        assert!(job.process_time(0.5 * (job.release() + job.deadline())).unwrap().is_finite());
    }

    #[test]
    fn cached_tracks_match_full_integration() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-45.0, 7.95), VehicleState::new(-39.0, 8.05)).unwrap();
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        for s in [0.0, 0.013, 0.5, 1.237, 3.0, job.deadline() * 0.9] {
            let sig = InputSignal::BangBang { low: p.input.min, switch: s, high: p.input.max };
            let entry = crossing_time(&p, est.hi, &sig, Extreme::Upper, p.alpha, 0.01).unwrap().unwrap();
            let exit = crossing_time(&p, est.lo, &sig, Extreme::Lower, p.beta, 0.01).unwrap().unwrap();
            assert!((job.entry_for_switch(s).unwrap() - entry).abs() < 1e-9);
            assert!((job.exit_for_switch(s).unwrap() - exit).abs() < 1e-9);
        }
    }

    #[test]
    fn launch_profile_matches_full_integration() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-86.0, 7.95), VehicleState::new(-80.0, 8.05)).unwrap();
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        let mut launched = 0;
        for k in (0..(job.deadline() / 0.01) as usize).step_by(97) {
            let s = k as f64 * 0.01;
            if job.launched(s, &job.hi_brake, &job.hi_launch, p.alpha).is_some() {
                launched += 1;
            }
            let sig = InputSignal::BangBang { low: p.input.min, switch: s, high: p.input.max };
            let entry = crossing_time(&p, est.hi, &sig, Extreme::Upper, p.alpha, 0.01).unwrap().unwrap();
            let exit = crossing_time(&p, est.lo, &sig, Extreme::Lower, p.beta, 0.01).unwrap().unwrap();
            assert!((job.entry_for_switch(s).unwrap() - entry).abs() < 1e-9, "entry at {s}");
            assert!((job.exit_for_switch(s).unwrap() - exit).abs() < 1e-9, "exit at {s}");
        }
        assert!(launched > 10);
    }

    #[test]
    fn realization_hits_entry_and_exit() {
        let p = VehicleParams::reference(true);
        let est = StateInterval::new(VehicleState::new(-45.0, 7.95), VehicleState::new(-39.0, 8.05)).unwrap();
        let job = VehicleJob::new(&p, &est, &cfg()).unwrap();
        let target = job.release() + 0.6 * (job.deadline() - job.release());
        let r = job.realize(target).unwrap().unwrap();
        assert!((r.entry - target).abs() <= 1e-6);
        let sig = InputSignal::BangBang { low: p.input.min, switch: r.switch, high: p.input.max };
        let entry = fine_crossing(&p, est.hi, &sig, Extreme::Upper, p.alpha);
        let exit = fine_crossing(&p, est.lo, &sig, Extreme::Lower, p.beta);
        assert!((entry - target).abs() <= 2.0 * cfg().step);
        let pt = job.process_time(target).unwrap();
        assert!((exit - (target + pt)).abs() <= 2.0 * cfg().step);
    }

    #[test]
    fn idle_time_edge_cases() {
        let p = VehicleParams::reference(false);
        let gone = StateInterval::new(VehicleState::new(6.0, 5.0), VehicleState::new(9.0, 6.0)).unwrap();
        assert_eq!(idle_time(&p, &gone, &cfg()).unwrap(), (0.0, 0.0));
        let inside = StateInterval::new(VehicleState::new(-2.0, 5.0), VehicleState::new(1.0, 6.0)).unwrap();
        let (r, e) = idle_time(&p, &inside, &cfg()).unwrap();
        assert_eq!(r, 0.0);
        assert!(e > 0.0);
    }

    #[test]
    fn idle_time_constant_speed() {
        let mut p = ideal();
        p.controlled = false;
        p.input = Bounds::new(-0.0, 0.0);
        let est = StateInterval::new(VehicleState::new(-22.0, 10.0), VehicleState::new(-18.0, 10.0)).unwrap();
        let (r, e) = idle_time(&p, &est, &cfg()).unwrap();
        assert!((r - 1.8).abs() < 1e-9);
        assert!((e - 2.7).abs() < 1e-9);
        assert!(r < e);
    }

    #[test]
    fn theta_constant_process() {
        let inst = SchedulingInstance::new(vec![Job::fixed(0, 1.0, 5.0, 0.7)], vec![]);
        let th = theta_max(&inst, 64).unwrap();
        assert!((th - 0.7).abs() < 1e-5);
    }

    #[test]
    fn theta_dominates_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let p = VehicleParams::reference(true);
        let mut jobs = Vec::new();
        for id in 0..4 {
            let y = rng.gen_range(-60.0..-20.0);
            let v = rng.gen_range(3.0..12.0);
            let est = StateInterval::new(
                VehicleState::new(y - 3.0, v - 0.05),
                VehicleState::new(y + 3.0, v + 0.05),
            )
            .unwrap();
            jobs.push(Job::from_vehicle(id, &p, &est, &cfg()).unwrap());
        }
        let inst = SchedulingInstance::new(jobs, vec![]);
        let th = inst.theta_max().unwrap();
        for _ in 0..1000 {
            let j = &inst.jobs[rng.gen_range(0..4)];
            let t = rng.gen_range(j.release..=j.deadline);
            assert!(j.process_time(t).unwrap() <= th);
        }
    }

    #[test]
    fn release_before_deadline_on_random_estimates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = VehicleParams::reference(true);
        for _ in 0..1000 {
            let y = rng.gen_range(-80.0..10.0);
            let v = rng.gen_range(1.39..13.9);
            let w = rng.gen_range(0.0..6.0);
            let est = StateInterval::new(
                VehicleState::new(y - w, (v - 0.05f64).max(1.39)),
                VehicleState::new(y, (v + 0.05f64).min(13.9)),
            )
            .unwrap();
            let r = release_time(&p, &est, &cfg()).unwrap();
            let d = deadline(&p, &est, &cfg()).unwrap();
            assert!(r <= d && r >= 0.0);
        }
    }
}
