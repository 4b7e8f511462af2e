//! Release times, deadlines, process times and idle-times for the first
//! reference scenario.

use intersection_supervisor::params::{SchedulingConfig, SchedulingInstance};
use intersection_supervisor::sim::scenario::ScenarioConfig;

fn main() -> intersection_supervisor::Result<()> {
    let scenario = ScenarioConfig::scenario1();
    let inst = SchedulingInstance::from_estimate(&scenario.params(), &scenario.nominal_estimate(), &SchedulingConfig::default())?;

    for job in &inst.jobs {
        println!(
            "vehicle {}: R = {:.3} s, D = {:.3} s, P(R) = {:.3} s, P(D) = {:.3} s",
            job.id + 1,
            job.release,
            job.deadline,
            job.process_time(job.release)?,
            job.process_time(job.deadline)?,
        );
    }
    for w in &inst.idle {
        println!("uncontrolled vehicle {} may occupy the intersection during ({:.3}, {:.3})", w.id + 1, w.start, w.end);
    }
    println!("theta_max = {:.4} s", inst.theta_max()?);
    Ok(())
}
