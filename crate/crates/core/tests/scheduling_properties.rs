use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intersection_supervisor::dynamics::{
    crossing_time, Extreme, InputSignal, StateInterval, VehicleParams, VehicleState,
};
use intersection_supervisor::efficient::{polynomial, ForbiddenRegionSet, UnitJobSet};
use intersection_supervisor::exact::{exact_on_instance, satisfies_conditions, schedule_for_sequence};
use intersection_supervisor::params::{SchedulingConfig, SchedulingInstance, VehicleJob};
use intersection_supervisor::sim::oracle::random_fleet;

const H: f64 = 0.01;

fn approaching() -> impl Strategy<Value = StateInterval> {
    (-40.0f64..-2.0, 0.0f64..6.0, 3.0f64..13.0, 0.0f64..0.1).prop_map(|(hi_y, w, v, dv)| {
        StateInterval::new(
            VehicleState::new(hi_y - w, (v - dv).max(1.39)),
            VehicleState::new(hi_y, (v + dv).min(13.9)),
        )
        .unwrap()
    })
}

fn job(est: &StateInterval) -> VehicleJob {
    VehicleJob::new(&VehicleParams::reference(true), est, &SchedulingConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn release_before_deadline(est in approaching()) {
        let j = job(&est);
        prop_assert!(j.release() <= j.deadline());
        prop_assert!(j.release() > 0.0);
    }

    #[test]
    fn passed_entry_gives_zero_window(y in 0.0f64..10.0, v in 2.0f64..13.0) {
        let est = StateInterval::new(VehicleState::new(y - 1.0, v), VehicleState::new(y, v)).unwrap();
        let j = job(&est);
        prop_assert_eq!(j.release(), 0.0);
        prop_assert_eq!(j.deadline(), 0.0);
    }

    #[test]
    fn process_time_finite_exactly_on_window(est in approaching(), f in -0.5f64..1.5) {
        let j = job(&est);
        let (r, d) = (j.release(), j.deadline());
        let t = r + f * (d - r);
        let p = j.process_time(t).unwrap();
        let slack = 1e-3;
        if t < r - slack || t > d + slack {
            prop_assert!(p.is_infinite());
        } else if (r..=d).contains(&t) {
            prop_assert!(p.is_finite() && p > 0.0);
        }
    }

    /// The realizing bang-bang signal, integrated from scratch, hits the
    /// scheduled entry with the upper bound and the exit with the lower one.
    #[test]
    fn realization_matches_direct_integration(est in approaching(), f in 0.0f64..=1.0) {
        let p = VehicleParams::reference(true);
        let j = job(&est);
        let t = j.release() + f * (j.deadline() - j.release());
        let r = j.realize(t).unwrap().expect("inside the window");
        let sig = InputSignal::BangBang { low: p.input.min, switch: r.switch, high: p.input.max };
        let entry = crossing_time(&p, est.hi, &sig, Extreme::Upper, p.alpha, H).unwrap().unwrap();
        let exit = crossing_time(&p, est.lo, &sig, Extreme::Lower, p.beta, H).unwrap().unwrap();
        let tp = t + j.process_time(t).unwrap();
        prop_assert!((entry - t).abs() <= 2.0 * H, "entry {entry} vs {t}");
        prop_assert!((exit - tp).abs() <= 2.0 * H, "exit {exit} vs {tp}");
    }

    #[test]
    fn theta_max_dominates_process_times(
        seed in any::<u64>(),
        n_c in 1usize..4,
        probes in prop::collection::vec(0.0f64..=1.0, 16),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (params, est) = random_fleet(&mut rng, n_c, 0);
        let inst = SchedulingInstance::from_estimate(&params, &est, &SchedulingConfig::default()).unwrap();
        let theta = inst.theta_max().unwrap();
        for j in inst.jobs.iter().filter(|j| j.is_pending()) {
            let v = j.vehicle().unwrap();
            for f in &probes {
                let t = v.release() + f * (v.deadline() - v.release());
                let p = j.process_time(t).unwrap();
                // allow for interpolation between grid samples
                prop_assert!(p <= theta * (1.0 + 1e-3), "P({t}) = {p} > {theta}");
            }
        }
    }

    #[test]
    fn earliest_schedule_cannot_move_earlier(seed in any::<u64>(), n_c in 1usize..4, n_u in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (params, est) = random_fleet(&mut rng, n_c, n_u);
        if intersection_supervisor::supervisor::bad_set_overlap(&params, &est) {
            return Ok(());
        }
        let inst = SchedulingInstance::from_estimate(&params, &est, &SchedulingConfig::default()).unwrap();
        let Some(s) = exact_on_instance(&inst, None).unwrap().0 else { return Ok(()); };
        prop_assert!(satisfies_conditions(&s, &inst).unwrap());
        for id in &s.sequence {
            let mut earlier = s.clone();
            *earlier.entries.get_mut(id).unwrap() -= 1e-3;
            prop_assert!(!satisfies_conditions(&earlier, &inst).unwrap(), "vehicle {id} could enter earlier");
        }
    }

    /// Occupancy windows of a feasible schedule, rebuilt from the realizing
    /// signals, are pairwise disjoint and miss every idle window.
    #[test]
    fn feasible_schedules_have_disjoint_windows(seed in any::<u64>(), n_c in 1usize..4, n_u in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (params, est) = random_fleet(&mut rng, n_c, n_u);
        if intersection_supervisor::supervisor::bad_set_overlap(&params, &est) {
            return Ok(());
        }
        let inst = SchedulingInstance::from_estimate(&params, &est, &SchedulingConfig::default()).unwrap();
        for perm in permutations(&inst.pending_ids()) {
            let s = schedule_for_sequence(&perm, &inst).unwrap();
            if !s.feasible {
                continue;
            }
            let mut windows = Vec::new();
            for j in &inst.jobs {
                let t = s.entry(j.id).unwrap();
                let r = j.vehicle().unwrap().realize(t).unwrap().expect("realizable entry");
                windows.push((r.entry.max(t), r.exit));
            }
            let idle: Vec<(f64, f64)> = inst.idle.iter().map(|w| (w.start, w.end)).collect();
            for (i, a) in windows.iter().enumerate() {
                for b in windows[i + 1..].iter().chain(&idle) {
                    let shared = a.1.min(b.1) - a.0.max(b.0);
                    prop_assert!(shared <= 1e-6, "{a:?} and {b:?} share {shared}");
                }
            }
        }
    }

    #[test]
    fn forbidden_regions_merge_to_the_same_union(
        raw in prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0), 0..12),
        probes in prop::collection::vec(-12.0f64..14.0, 64),
    ) {
        let intervals: Vec<(f64, f64)> = raw.iter().map(|(a, w)| (*a, a + w)).collect();
        let f = ForbiddenRegionSet::from_intervals(intervals.iter().copied());
        let regions = f.regions();
        for w in regions.windows(2) {
            prop_assert!(w[0].1 < w[1].0, "not merged: {:?}", w);
        }
        for x in probes {
            let in_raw = intervals.iter().any(|(a, b)| *a < x && x < *b);
            let in_set = regions.iter().any(|(a, b)| *a < x && x < *b);
            prop_assert_eq!(in_raw, in_set, "at {}", x);
        }
    }
}

fn permutations(ids: &[usize]) -> Vec<Vec<usize>> {
    if ids.len() <= 1 {
        return vec![ids.to_vec()];
    }
    let mut out = Vec::new();
    for (i, head) in ids.iter().enumerate() {
        let mut rest = ids.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, *head);
            out.push(tail);
        }
    }
    out
}

fn unit_instance(rng: &mut ChaCha8Rng, n: usize) -> UnitJobSet {
    let span = n as f64 * 1.5;
    let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..span)).collect();
    let d = r.iter().map(|r| r + rng.gen_range(1.0..span)).collect();
    let idle = (0..n / 4).map(|_| {
        let a = rng.gen_range(0.0..span);
        (a, a + rng.gen_range(0.1..1.5))
    });
    UnitJobSet {
        r,
        d,
        f0: ForbiddenRegionSet::from_intervals(idle),
    }
}

/// Median wall time of `polynomial` against job count: the log-log slope
/// stays bounded, and the growth ratio over each doubling does not itself
/// grow the way an exponential would.
#[test]
fn unit_scheduler_runtime_is_polynomial() {
    let ns = [10usize, 20, 40, 80, 160, 200];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut times = Vec::new();
    for &n in &ns {
        let sets: Vec<UnitJobSet> = (0..9).map(|_| unit_instance(&mut rng, n)).collect();
        let mut samples: Vec<f64> = sets
            .iter()
            .map(|s| {
                let t0 = Instant::now();
                for _ in 0..5 {
                    std::hint::black_box(polynomial(s));
                }
                t0.elapsed().as_secs_f64() / 5.0
            })
            .collect();
        samples.sort_by(f64::total_cmp);
        times.push(samples[samples.len() / 2]);
    }
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 6.0, ys.iter().sum::<f64>() / 6.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    println!("unit scheduler times {times:?}, log-log slope {slope:.2}");
    assert!(slope < 4.0, "slope {slope}");
    // exponential growth would make t(200)/t(10) astronomically large
    assert!(times[5] / times[0] < 20f64.powi(4));
}
