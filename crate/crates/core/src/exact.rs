//! Earliest schedule for a fixed crossing sequence, and exhaustive search
//! over all sequences.

use std::collections::BTreeMap;

use crate::dynamics::{StateInterval, VehicleParams};
use crate::error::{Error, Result};
use crate::params::{IdleTime, Job, SchedulingConfig, SchedulingInstance, DEADLINE_SLACK};
use crate::supervisor::bad_set_overlap;

/// Slack allowed when two occupancy intervals touch.
pub const EPS: f64 = 1e-9;

/// Entry times of controlled vehicles.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    /// Controlled vehicle id to entry time; vehicles already at the entry have 0.
    pub entries: BTreeMap<usize, f64>,
    /// Ids with a nonzero entry time, in increasing entry order.
    pub sequence: Vec<usize>,
    pub feasible: bool,
}

impl Schedule {
    pub fn entry(&self, id: usize) -> Option<f64> {
        self.entries.get(&id).copied()
    }

    fn from_entries(entries: BTreeMap<usize, f64>, order: &[usize], feasible: bool) -> Self {
        let sequence = order
            .iter()
            .copied()
            .filter(|id| entries.get(id).is_some_and(|t| *t > 0.0))
            .collect();
        Self {
            entries,
            sequence,
            feasible,
        }
    }

    /// Every job at `T = 0`, as used when nothing is left to sequence.
    pub fn all_entered(inst: &SchedulingInstance) -> Result<Self> {
        let entries = inst.jobs.iter().map(|j| (j.id, 0.0)).collect();
        Ok(Self {
            entries,
            sequence: Vec::new(),
            feasible: entered_jobs_clear(inst)?,
        })
    }
}

/// Outcome of a verifier.
#[derive(Debug)]
pub struct Verdict {
    pub answer: bool,
    pub schedule: Option<Schedule>,
    /// The instance the answer was computed on (absent on a Bad-set hit).
    pub instance: Option<SchedulingInstance>,
    /// Crossing sequences evaluated.
    pub sequences_tried: u64,
}

impl Verdict {
    pub(crate) fn no(instance: Option<SchedulingInstance>, tried: u64) -> Self {
        Self {
            answer: false,
            schedule: None,
            instance,
            sequences_tried: tried,
        }
    }
}

/// Open intervals `(a0, a1)` and `(b0, b1)` share more than `EPS`.
pub fn overlaps(a0: f64, a1: f64, b0: f64, b1: f64) -> bool {
    a1 - a0 > EPS && b1 - b0 > EPS && a0 < b1 - EPS && b0 < a1 - EPS
}

/// Jobs already at the entry stay clear of each other and of every idle-time.
pub(crate) fn entered_jobs_clear(inst: &SchedulingInstance) -> Result<bool> {
    let mut windows = Vec::new();
    for j in inst.jobs.iter().filter(|j| !j.is_pending()) {
        let p = j.process_time(0.0)?;
        if p > 0.0 {
            windows.push(p);
        }
    }
    for (i, a) in windows.iter().enumerate() {
        if windows[i + 1..].iter().any(|b| overlaps(0.0, *a, 0.0, *b)) {
            return Ok(false);
        }
        if inst.idle.iter().any(|w| overlaps(0.0, *a, w.start, w.end)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pushes `t` past every idle-time it would collide with. Returns the new
/// entry and whether a second pass over the idle-times moved it again.
fn push_past_idle(job: &Job, mut t: f64, idle: &[IdleTime]) -> Result<(f64, bool)> {
    let mut passes = 0;
    let mut rescan_moved = false;
    loop {
        let before = t;
        for w in idle {
            if t >= w.start {
                t = t.max(w.end);
            } else if t + job.process_time(t)? > w.start + EPS {
                t = w.end;
            }
            if t > job.deadline + DEADLINE_SLACK {
                return Ok((t, rescan_moved));
            }
        }
        passes += 1;
        if t == before {
            return Ok((t, rescan_moved));
        }
        if passes > 1 {
            rescan_moved = true;
        }
    }
}

fn schedule_inner(pi0: &[usize], inst: &SchedulingInstance) -> Result<(Schedule, bool)> {
    let mut entries = BTreeMap::new();
    for j in inst.jobs.iter().filter(|j| !j.is_pending()) {
        entries.insert(j.id, 0.0);
    }
    let p_max = inst.p_max()?;
    let pi: Vec<&Job> = pi0
        .iter()
        .filter_map(|id| inst.job(*id))
        .filter(|j| j.is_pending())
        .collect();
    let pending = inst.jobs.iter().filter(|j| j.is_pending()).count();
    if pi.len() != pending {
        return Err(Error::ContractViolation(
            "sequence does not cover every vehicle before the entry".into(),
        ));
    }

    let order: Vec<usize> = pi.iter().map(|j| j.id).collect();
    let mut rescan_moved = false;
    let mut prev_exit: Option<f64> = None;
    for job in &pi {
        let start = match prev_exit {
            None => job.release.max(p_max),
            Some(e) => job.release.max(e),
        };
        let (t, moved) = push_past_idle(job, start, &inst.idle)?;
        rescan_moved |= moved;
        entries.insert(job.id, t);
        if t > job.deadline + DEADLINE_SLACK {
            return Ok((Schedule::from_entries(entries, &order, false), rescan_moved));
        }
        prev_exit = Some(t + job.process_time(t)?);
    }
    let feasible = entered_jobs_clear(inst)?;
    Ok((Schedule::from_entries(entries, &order, feasible), rescan_moved))
}

/// Earliest schedule that lets vehicles enter in the order of `pi0`.
///
/// `pi0` may list vehicles that already entered; they are skipped. The
/// returned schedule is marked feasible iff every entry meets its deadline
/// and the occupancy intervals are pairwise disjoint and clear of idle-times.
pub fn schedule_for_sequence(pi0: &[usize], inst: &SchedulingInstance) -> Result<Schedule> {
    Ok(schedule_inner(pi0, inst)?.0)
}

/// Whether re-scanning the idle-times after a push ever moved an entry again.
pub fn rescan_moves_entry(pi0: &[usize], inst: &SchedulingInstance) -> Result<bool> {
    Ok(schedule_inner(pi0, inst)?.1)
}

/// Conditions on a schedule checked directly: windows, pairwise disjoint
/// occupancy, and no overlap with idle-times.
pub fn satisfies_conditions(schedule: &Schedule, inst: &SchedulingInstance) -> Result<bool> {
    let mut occ = Vec::new();
    for job in &inst.jobs {
        let Some(t) = schedule.entry(job.id) else {
            return Ok(false);
        };
        if job.is_pending()
            && (t < job.release - DEADLINE_SLACK || t > job.deadline + DEADLINE_SLACK)
        {
            return Ok(false);
        }
        let p = job.process_time(t)?;
        if !p.is_finite() {
            return Ok(false);
        }
        occ.push((t, t + p));
    }
    for (i, a) in occ.iter().enumerate() {
        if occ[i + 1..].iter().any(|b| overlaps(a.0, a.1, b.0, b.1)) {
            return Ok(false);
        }
        if inst.idle.iter().any(|w| overlaps(a.0, a.1, w.start, w.end)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rearranges `v` into the next permutation in lexicographic order.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Tries every ordering of the vehicles before the entry, in lexicographic
/// order of ids, and returns the first feasible schedule.
pub fn exact_on_instance(inst: &SchedulingInstance, cap: Option<u64>) -> Result<(Option<Schedule>, u64)> {
    let mut perm = inst.pending_ids();
    if perm.is_empty() {
        let s = Schedule::all_entered(inst)?;
        return Ok((s.feasible.then_some(s), 0));
    }
    let mut tried = 0u64;
    loop {
        if let Some(cap) = cap {
            if tried >= cap {
                return Err(Error::PermutationCapExceeded { cap });
            }
        }
        tried += 1;
        let s = schedule_for_sequence(&perm, inst)?;
        if s.feasible {
            return Ok((Some(s), tried));
        }
        if !next_permutation(&mut perm) {
            return Ok((None, tried));
        }
    }
}

/// Exact verifier: is there an input signal that keeps the fleet out of the
/// Bad set for every admissible uncertainty, starting from `est`?
pub fn exact_verify(params: &[VehicleParams], est: &[StateInterval], cfg: &SchedulingConfig) -> Result<Verdict> {
    exact_verify_capped(params, est, cfg, None)
}

/// [`exact_verify`] that gives up with an error after `cap` sequences.
pub fn exact_verify_capped(
    params: &[VehicleParams],
    est: &[StateInterval],
    cfg: &SchedulingConfig,
    cap: Option<u64>,
) -> Result<Verdict> {
    if bad_set_overlap(params, est) {
        return Ok(Verdict::no(None, 0));
    }
    let inst = SchedulingInstance::from_estimate(params, est, cfg)?;
    let (schedule, tried) = exact_on_instance(&inst, cap)?;
    Ok(Verdict {
        answer: schedule.is_some(),
        schedule,
        instance: Some(inst),
        sequences_tried: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(jobs: Vec<Job>, idle: Vec<(f64, f64)>) -> SchedulingInstance {
        let idle = idle
            .into_iter()
            .enumerate()
            .map(|(i, (start, end))| IdleTime { id: 100 + i, start, end })
            .collect();
        SchedulingInstance::new(jobs, idle)
    }

    #[test]
    fn nothing_to_schedule() {
        let i = inst(vec![Job::entered(0, 0.0), Job::entered(1, 0.0)], vec![]);
        let s = schedule_for_sequence(&[0, 1], &i).unwrap();
        assert!(s.feasible);
        assert!(s.entries.values().all(|t| *t == 0.0));
        assert!(s.sequence.is_empty());
    }

    #[test]
    fn two_unit_jobs_back_to_back() {
        let i = inst(vec![Job::fixed(0, 0.0, 10.0, 1.0), Job::fixed(1, 0.0, 10.0, 1.0)], vec![]);
        let s = schedule_for_sequence(&[0, 1], &i).unwrap();
        assert!(s.feasible);
        assert_eq!(s.entry(0), Some(0.0));
        assert_eq!(s.entry(1), Some(1.0));
        assert_eq!(s.sequence, vec![1]);
        assert!(satisfies_conditions(&s, &i).unwrap());
    }

    #[test]
    fn idle_push_past_deadline() {
        let i = inst(vec![Job::fixed(0, 0.0, 0.4, 1.0)], vec![(0.5, 2.0)]);
        let s = schedule_for_sequence(&[0], &i).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.entry(0), Some(2.0));
    }

    #[test]
    fn idle_push_lands_after_window() {
        let i = inst(vec![Job::fixed(0, 0.0, 5.0, 1.0)], vec![(0.5, 2.0)]);
        let s = schedule_for_sequence(&[0], &i).unwrap();
        assert!(s.feasible);
        assert_eq!(s.entry(0), Some(2.0));
    }

    #[test]
    fn entered_vehicle_delays_first_entry() {
        let i = inst(vec![Job::entered(0, 1.5), Job::fixed(1, 0.2, 5.0, 1.0)], vec![]);
        let s = schedule_for_sequence(&[1], &i).unwrap();
        assert!(s.feasible);
        assert_eq!(s.entry(1), Some(1.5));
    }

    #[test]
    fn entered_vehicle_conflicting_with_idle_time_is_infeasible() {
        let i = inst(vec![Job::entered(0, 1.5)], vec![(1.0, 3.0)]);
        assert!(!Schedule::all_entered(&i).unwrap().feasible);
        let (s, _) = exact_on_instance(&i, None).unwrap();
        assert!(s.is_none());
    }

    #[test]
    fn exact_finds_second_permutation() {
        // job 0 only fits late, job 1 only early
        let i = inst(vec![Job::fixed(0, 0.0, 5.0, 1.0), Job::fixed(1, 0.0, 0.5, 1.0)], vec![]);
        let (s, tried) = exact_on_instance(&i, None).unwrap();
        let s = s.unwrap();
        assert_eq!(tried, 2);
        assert_eq!(s.entry(1), Some(0.0));
        assert_eq!(s.entry(0), Some(1.0));
    }

    #[test]
    fn permutation_cap() {
        let jobs = (0..5).map(|i| Job::fixed(i, 0.0, 0.5, 1.0)).collect();
        let i = inst(jobs, vec![]);
        assert!(matches!(
            exact_on_instance(&i, Some(10)),
            Err(Error::PermutationCapExceeded { cap: 10 })
        ));
        let (s, tried) = exact_on_instance(&i, None).unwrap();
        assert!(s.is_none());
        assert_eq!(tried, 120);
    }

    #[test]
    fn lexicographic_permutations() {
        let mut v = vec![0, 1, 2];
        let mut all = vec![v.clone()];
        while next_permutation(&mut v) {
            all.push(v.clone());
        }
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }
}
