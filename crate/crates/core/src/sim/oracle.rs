//! Brute-force oracles used to cross-check the verifiers on small instances.
//!
//! They share the integrator with the library but none of the scheduling
//! code: occupancy windows are recomputed from raw crossings and combinations
//! are searched directly.

use rand::Rng;

use crate::dynamics::{crossing_time, Bounds, Extreme, InputSignal, StateInterval, VehicleParams, VehicleState};
use crate::efficient::UnitJobSet;
use crate::error::{Error, Result};
use crate::exact::next_permutation;

const EPS: f64 = 1e-9;

/// Exit position used for controlled vehicles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BadSetKind {
    Nominal,
    /// Exit moved to `alpha + theta_max * v_max`.
    Inflated { theta_max: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Switch-time grid points per controlled vehicle.
    pub grid: usize,
    pub step: f64,
    pub max_controlled: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            step: 0.01,
            max_controlled: 4,
        }
    }
}

fn cross(p: &VehicleParams, s0: VehicleState, sig: &InputSignal, e: Extreme, target: f64, step: f64) -> Result<f64> {
    crossing_time(p, s0, sig, e, target, step)?
        .ok_or_else(|| Error::ContractViolation("oracle crossing beyond horizon".into()))
}

fn open_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.1 - a.0 > EPS && b.1 - b.0 > EPS && a.0 < b.1 - EPS && b.0 < a.1 - EPS
}

enum Candidates {
    /// Already at or past the entry: a single window starting at 0.
    Fixed(f64),
    Choices(Vec<(f64, f64)>),
}

/// Is there a bang-bang input per controlled vehicle (switch on a grid) that
/// keeps every pair of occupancy windows disjoint, uncontrolled vehicles
/// included, for all admissible uncertainty?
pub fn brute_force_safe_input_oracle(
    params: &[VehicleParams],
    est: &[StateInterval],
    cfg: &OracleConfig,
    kind: BadSetKind,
) -> Result<bool> {
    let n_c = params.iter().filter(|p| p.controlled).count();
    if n_c > cfg.max_controlled {
        return Err(Error::OracleTooLarge {
            controlled: n_c,
            limit: cfg.max_controlled,
        });
    }
    let exit_of = |p: &VehicleParams| match (kind, p.controlled) {
        (BadSetKind::Inflated { theta_max }, true) => p.alpha + theta_max * p.speed.max,
        _ => p.beta,
    };

    // already inside the (possibly inflated) Bad set
    let inside: Vec<bool> = params
        .iter()
        .zip(est)
        .map(|(p, e)| e.hi.y > p.alpha && e.lo.y < exit_of(p))
        .collect();
    for i in 0..params.len() {
        for j in i + 1..params.len() {
            if inside[i] && inside[j] && (params[i].controlled || params[j].controlled) {
                return Ok(false);
            }
        }
    }

    let mut idle = Vec::new();
    let mut cands = Vec::new();
    for (p, e) in params.iter().zip(est) {
        let exit_pos = exit_of(p);
        if !p.controlled {
            if e.lo.y >= p.beta {
                continue;
            }
            let end = cross(p, e.lo, &InputSignal::Constant(p.input.min), Extreme::Lower, p.beta, cfg.step)?;
            let start = if e.hi.y >= p.alpha {
                0.0
            } else {
                cross(p, e.hi, &InputSignal::Constant(p.input.max), Extreme::Upper, p.alpha, cfg.step)?
            };
            idle.push((start, end));
            continue;
        }
        if e.lo.y >= exit_pos {
            continue;
        }
        if e.hi.y >= p.alpha {
            let exit = cross(p, e.lo, &InputSignal::Constant(p.input.max), Extreme::Lower, exit_pos, cfg.step)?;
            cands.push(Candidates::Fixed(exit));
            continue;
        }
        let latest = cross(p, e.hi, &InputSignal::Constant(p.input.min), Extreme::Upper, p.alpha, cfg.step)?;
        let g = cfg.grid.max(2);
        let mut list = Vec::with_capacity(g);
        for k in 0..g {
            let s = latest * k as f64 / (g - 1) as f64;
            let sig = InputSignal::BangBang {
                low: p.input.min,
                switch: s,
                high: p.input.max,
            };
            let entry = cross(p, e.hi, &sig, Extreme::Upper, p.alpha, cfg.step)?;
            let exit = cross(p, e.lo, &sig, Extreme::Lower, exit_pos, cfg.step)?;
            list.push((entry, exit));
        }
        cands.push(Candidates::Choices(list));
    }

    let mut floor: f64 = 0.0;
    let mut fixed = Vec::new();
    let mut pending = Vec::new();
    for c in cands {
        match c {
            Candidates::Fixed(e) => fixed.push(e),
            Candidates::Choices(list) => {
                let ok: Vec<(f64, f64)> = list
                    .into_iter()
                    .filter(|w| !idle.iter().any(|i| open_overlap(*w, *i)))
                    .collect();
                if ok.is_empty() {
                    return Ok(false);
                }
                pending.push(ok);
            }
        }
    }
    for (i, a) in fixed.iter().enumerate() {
        if fixed[i + 1..].iter().any(|b| open_overlap((0.0, *a), (0.0, *b))) {
            return Ok(false);
        }
        if idle.iter().any(|w| open_overlap((0.0, *a), *w)) {
            return Ok(false);
        }
        floor = floor.max(*a);
    }
    if pending.is_empty() {
        return Ok(true);
    }

    // any disjoint choice is a chain in entry order; for a fixed order the
    // earliest feasible exit at each position is optimal
    let mut order: Vec<usize> = (0..pending.len()).collect();
    loop {
        let mut prev = floor;
        let mut ok = true;
        for &v in &order {
            let best = pending[v]
                .iter()
                .filter(|(entry, _)| *entry >= prev - EPS)
                .map(|(_, exit)| *exit)
                .reduce(f64::min);
            match best {
                Some(e) => prev = e,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(true);
        }
        if !next_permutation(&mut order) {
            return Ok(false);
        }
    }
}

/// Runs the oracle, refining the grid fourfold while it disagrees with
/// `expected`, up to `max_grid` points. Returns the final answer and grid.
pub fn oracle_with_refinement(
    params: &[VehicleParams],
    est: &[StateInterval],
    cfg: &OracleConfig,
    kind: BadSetKind,
    expected: bool,
    max_grid: usize,
) -> Result<(bool, usize)> {
    let mut c = *cfg;
    loop {
        let ans = brute_force_safe_input_oracle(params, est, &c, kind)?;
        if ans == expected || c.grid * 4 > max_grid {
            return Ok((ans, c.grid));
        }
        c.grid *= 4;
    }
}

/// Unit-job feasibility by trying every job order with earliest starts.
pub fn unit_jobs_by_enumeration(jobs: &UnitJobSet) -> bool {
    let n = jobs.r.len();
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for &j in &order {
            let mut t = jobs.r[j].max(prev + 1.0);
            while let Some(&(_, end)) = jobs.f0.regions().iter().find(|(a, b)| *a < t && t < *b) {
                t = end;
            }
            if t > jobs.d[j] {
                ok = false;
                break;
            }
            prev = t;
        }
        if ok {
            return true;
        }
        if !next_permutation(&mut order) {
            return false;
        }
    }
}

/// Random fleet near the intersection with reference parameters: `n_c`
/// controlled and `n_u` uncontrolled vehicles, estimates up to 6 m wide.
pub fn random_fleet<R: Rng>(rng: &mut R, n_c: usize, n_u: usize) -> (Vec<VehicleParams>, Vec<StateInterval>) {
    let mut params = Vec::new();
    let mut est = Vec::new();
    for i in 0..n_c + n_u {
        let p = VehicleParams::reference(i < n_c);
        let hi_y = rng.gen_range(-40.0..-2.0);
        let width = rng.gen_range(0.0..6.0);
        let v = rng.gen_range(3.0..13.0);
        let dv = rng.gen_range(0.0..0.1);
        let speed = Bounds::new(p.speed.min, p.speed.max);
        let e = StateInterval::new(
            VehicleState::new(hi_y - width, speed.clamp(v - dv)),
            VehicleState::new(hi_y, speed.clamp(v + dv)),
        )
        .expect("ordered by construction");
        params.push(p);
        est.push(e);
    }
    (params, est)
}
