//! Unit-length jobs with release times, deadlines and blocked intervals:
//! forbidden regions followed by earliest-deadline-first.

use intersection_supervisor::efficient::{declare_forbidden_regions, polynomial, ForbiddenRegionSet, UnitJobSet};

fn main() {
    let jobs = UnitJobSet {
        r: vec![0.0, 0.2, 0.5, 3.1],
        d: vec![4.0, 1.5, 2.0, 3.5],
        f0: ForbiddenRegionSet::from_intervals([(2.6, 3.0)]),
    };
    let (regions, ok) = declare_forbidden_regions(&jobs);
    println!("forbidden regions: {:?} (declaration succeeded: {ok})", regions.regions());

    let sol = polynomial(&jobs);
    println!("feasible: {}", sol.feasible);
    println!("order: {:?}", sol.pi_star);
    if let Some(t) = sol.t {
        for (j, start) in t.iter().enumerate() {
            println!("  job {j} starts at {start:.3} (release {:.1}, deadline {:.1})", jobs.r[j], jobs.d[j]);
        }
    }
}
