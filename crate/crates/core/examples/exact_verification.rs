//! Exhaustive verification: try crossing orders until one has a feasible
//! earliest schedule.

use intersection_supervisor::exact::{exact_verify, schedule_for_sequence};
use intersection_supervisor::params::{SchedulingConfig, SchedulingInstance};
use intersection_supervisor::sim::scenario::ScenarioConfig;

fn main() -> intersection_supervisor::Result<()> {
    let scenario = ScenarioConfig::scenario1();
    let (params, est) = (scenario.params(), scenario.nominal_estimate());
    let cfg = SchedulingConfig::default();

    let verdict = exact_verify(&params, &est, &cfg)?;
    println!("answer: {} after {} sequence(s)", if verdict.answer { "yes" } else { "no" }, verdict.sequences_tried);
    if let Some(s) = &verdict.schedule {
        for id in &s.sequence {
            println!("  vehicle {} enters at {:.3} s", id + 1, s.entry(*id).unwrap_or(f64::NAN));
        }
    }

    // a single order can also be scheduled directly
    let inst = SchedulingInstance::from_estimate(&params, &est, &cfg)?;
    let reversed = schedule_for_sequence(&[3, 2, 1, 0], &inst)?;
    println!("order 4,3,2,1 feasible: {}", reversed.feasible);
    Ok(())
}
