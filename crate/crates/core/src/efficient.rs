//! Polynomial-time verification through a unit-process-time relaxation.
//!
//! Every crossing duration is replaced by the uniform bound `θ_max`, times are
//! normalized by it, and the resulting unit-job problem with forbidden start
//! regions is solved by a backward critical-time sweep followed by an
//! earliest-deadline forward pass. The sequence found there is then handed to
//! the exact earliest-schedule construction.

use std::collections::BTreeMap;

use crate::dynamics::{StateInterval, VehicleParams};
use crate::error::Result;
use crate::exact::{entered_jobs_clear, schedule_for_sequence, Schedule, Verdict};
use crate::params::{SchedulingConfig, SchedulingInstance};
use crate::supervisor::bad_set_overlap;

/// Sorted, disjoint open intervals in which no job may start.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForbiddenRegionSet {
    regions: Vec<(f64, f64)>,
}

impl ForbiddenRegionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals<I: IntoIterator<Item = (f64, f64)>>(it: I) -> Self {
        let mut f = Self::new();
        for (a, b) in it {
            f.insert(a, b);
        }
        f
    }

    /// Adds `(start, end)`, merging with any overlapping region. Empty intervals are ignored.
    pub fn insert(&mut self, start: f64, end: f64) {
        if !(start < end) {
            return;
        }
        let (mut lo, mut hi) = (start, end);
        // open intervals that merely touch stay separate: the shared point is allowed
        self.regions.retain(|&(a, b)| {
            let overlap = a < hi && lo < b;
            if overlap {
                lo = lo.min(a);
                hi = hi.max(b);
            }
            !overlap
        });
        let at = self.regions.partition_point(|r| r.0 < lo);
        self.regions.insert(at, (lo, hi));
    }

    /// Region whose interior contains `x`.
    pub fn containing(&self, x: f64) -> Option<(f64, f64)> {
        let idx = self.regions.partition_point(|r| r.0 < x);
        idx.checked_sub(1)
            .map(|i| self.regions[i])
            .filter(|r| x < r.1)
    }

    pub fn regions(&self) -> &[(f64, f64)] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    fn skip(&self, mut x: f64) -> f64 {
        while let Some((_, end)) = self.containing(x) {
            x = end;
        }
        x
    }

    fn snap_down(&self, mut x: f64) -> f64 {
        while let Some((start, _)) = self.containing(x) {
            x = start;
        }
        x
    }
}

/// Unit-length jobs: job `j` must start in `[r[j], d[j]]` outside the forbidden regions.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitJobSet {
    pub r: Vec<f64>,
    pub d: Vec<f64>,
    pub f0: ForbiddenRegionSet,
}

/// Result of the unit-job procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSolution {
    /// Start times, present only when feasible.
    pub t: Option<Vec<f64>>,
    /// Job indices in increasing start order (always produced).
    pub pi_star: Vec<usize>,
    pub feasible: bool,
}

fn by_release(jobs: &UnitJobSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..jobs.r.len()).collect();
    order.sort_by(|a, b| jobs.r[*a].total_cmp(&jobs.r[*b]).then(a.cmp(b)));
    order
}

/// Backward sweep over release times declaring the regions in which starting
/// a job would make a later deadline unreachable.
pub fn declare_forbidden_regions(jobs: &UnitJobSet) -> (ForbiddenRegionSet, bool) {
    let n = jobs.r.len();
    let order = by_release(jobs);
    let mut f = jobs.f0.clone();
    let mut crit: Vec<Option<f64>> = vec![None; n];
    let mut c: Option<f64> = None;
    let mut feasible = true;

    for i in (0..n).rev() {
        let si = order[i];
        for j in 0..n {
            if jobs.d[j] < jobs.d[si] {
                continue;
            }
            let cj = match crit[j] {
                None => jobs.d[j],
                Some(x) => x - 1.0,
            };
            crit[j] = Some(f.snap_down(cj));
        }
        if i == 0 || jobs.r[order[i - 1]] < jobs.r[si] {
            c = crit.iter().flatten().copied().reduce(f64::min);
        }
        if let Some(c) = c {
            let r = jobs.r[si];
            if c < r {
                feasible = false;
            }
            if r <= c && c < r + 1.0 {
                f.insert(c - 1.0, r);
            }
        }
    }
    (f, feasible)
}

/// Forward earliest-deadline pass that never starts a job inside `f`.
pub fn edd_generate(jobs: &UnitJobSet, f: &ForbiddenRegionSet) -> Vec<f64> {
    let n = jobs.r.len();
    let mut t = vec![f64::NAN; n];
    let mut left: Vec<usize> = by_release(jobs);
    let mut s: f64 = 0.0;
    while !left.is_empty() {
        s = f.skip(s);
        if !left.iter().any(|k| jobs.r[*k] <= s) {
            // nothing released yet: jump to the earliest release
            s = f.skip(jobs.r[left[0]]);
        }
        let pick = left
            .iter()
            .enumerate()
            .filter(|(_, k)| jobs.r[**k] <= s)
            .min_by(|a, b| jobs.d[*a.1].total_cmp(&jobs.d[*b.1]).then(a.1.cmp(b.1)))
            .map(|(pos, _)| pos)
            .expect("a released job exists after the jump");
        let j = left.remove(pick);
        t[j] = s;
        s += 1.0;
    }
    t
}

/// Decides the unit-job problem and returns a witness schedule when one exists.
pub fn polynomial(jobs: &UnitJobSet) -> UnitSolution {
    let (f, feasible) = declare_forbidden_regions(jobs);
    let t = edd_generate(jobs, &f);
    let mut pi_star: Vec<usize> = (0..t.len()).collect();
    pi_star.sort_by(|a, b| t[*a].total_cmp(&t[*b]).then(a.cmp(b)));
    UnitSolution {
        t: feasible.then_some(t),
        pi_star,
        feasible,
    }
}

/// Outcome of the relaxed (uniform process time) problem.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSolution {
    /// Entry times, present only when feasible.
    pub t_bar: Option<BTreeMap<usize, f64>>,
    /// Vehicle ids before the entry, in the order found by the unit-job pass.
    pub pi_star: Option<Vec<usize>>,
    pub feasible: bool,
    pub theta_max: f64,
}

/// Relaxed problem on a prepared instance (no Bad-set check).
pub fn relaxed_on_instance(inst: &SchedulingInstance) -> Result<RelaxedSolution> {
    let pending = inst.pending_ids();
    if pending.is_empty() {
        let zero = inst.jobs.iter().map(|j| (j.id, 0.0)).collect();
        let ok = entered_jobs_clear(inst)?;
        return Ok(RelaxedSolution {
            t_bar: ok.then_some(zero),
            pi_star: Some(Vec::new()),
            feasible: ok,
            theta_max: 0.0,
        });
    }
    let theta = inst.theta_max()?;
    let p_max = inst.p_max()?;
    let f0 = ForbiddenRegionSet::from_intervals(
        inst.idle
            .iter()
            .map(|w| ((w.start / theta - 1.0).max(0.0), w.end / theta)),
    );
    let mut r = Vec::with_capacity(pending.len());
    let mut d = Vec::with_capacity(pending.len());
    for id in &pending {
        let job = inst.job(*id).expect("pending id comes from the instance");
        r.push(job.release.max(p_max) / theta);
        d.push(job.deadline / theta);
    }
    let sol = polynomial(&UnitJobSet { r, d, f0 });
    let pi_star: Vec<usize> = sol.pi_star.iter().map(|k| pending[*k]).collect();
    let feasible = sol.feasible && entered_jobs_clear(inst)?;
    let t_bar = match (&sol.t, feasible) {
        (Some(t), true) => {
            let mut m: BTreeMap<usize, f64> = inst.jobs.iter().map(|j| (j.id, 0.0)).collect();
            for (k, id) in pending.iter().enumerate() {
                m.insert(*id, t[k] * theta);
            }
            Some(m)
        }
        _ => None,
    };
    Ok(RelaxedSolution {
        t_bar,
        pi_star: Some(pi_star),
        feasible,
        theta_max: theta,
    })
}

/// Relaxed verifier: every crossing is assumed to take exactly `θ_max`.
pub fn relaxed_exact(
    params: &[VehicleParams],
    est: &[StateInterval],
    cfg: &SchedulingConfig,
) -> Result<RelaxedSolution> {
    if bad_set_overlap(params, est) {
        return Ok(RelaxedSolution {
            t_bar: None,
            pi_star: None,
            feasible: false,
            theta_max: f64::NAN,
        });
    }
    let inst = SchedulingInstance::from_estimate(params, est, cfg)?;
    relaxed_on_instance(&inst)
}

/// Sequence from the relaxation, schedule from the exact construction.
pub fn approx_on_instance(inst: &SchedulingInstance) -> Result<Option<Schedule>> {
    if inst.pending_ids().is_empty() {
        let s = Schedule::all_entered(inst)?;
        return Ok(s.feasible.then_some(s));
    }
    let relaxed = relaxed_on_instance(inst)?;
    let pi = relaxed.pi_star.unwrap_or_default();
    let s = schedule_for_sequence(&pi, inst)?;
    Ok(s.feasible.then_some(s))
}

/// Polynomial-time verifier; a `yes` always implies the exact verifier's `yes`.
pub fn approx_verify(params: &[VehicleParams], est: &[StateInterval], cfg: &SchedulingConfig) -> Result<Verdict> {
    if bad_set_overlap(params, est) {
        return Ok(Verdict::no(None, 0));
    }
    let inst = SchedulingInstance::from_estimate(params, est, cfg)?;
    let schedule = approx_on_instance(&inst)?;
    Ok(Verdict {
        answer: schedule.is_some(),
        schedule,
        instance: Some(inst),
        sequences_tried: 1,
    })
}
