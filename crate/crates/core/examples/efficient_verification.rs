//! Polynomial-time verification for twelve controlled vehicles: the relaxed
//! problem with a uniform process time picks the order, the exact earliest
//! schedule checks it.

use std::time::Instant;

use intersection_supervisor::efficient::{approx_verify, relaxed_exact};
use intersection_supervisor::params::SchedulingConfig;
use intersection_supervisor::sim::scenario::ScenarioConfig;

fn main() -> intersection_supervisor::Result<()> {
    let scenario = ScenarioConfig::scenario2();
    let (params, est) = (scenario.params(), scenario.nominal_estimate());
    let cfg = SchedulingConfig::default();

    let relaxed = relaxed_exact(&params, &est, &cfg)?;
    println!("relaxed: feasible = {}, theta_max = {:.3} s", relaxed.feasible, relaxed.theta_max);

    let started = Instant::now();
    let verdict = approx_verify(&params, &est, &cfg)?;
    println!("approx: {} in {:.1} ms", if verdict.answer { "yes" } else { "no" }, started.elapsed().as_secs_f64() * 1e3);
    if let (Some(s), Some(t_bar)) = (&verdict.schedule, &relaxed.t_bar) {
        for id in &s.sequence {
            println!("  vehicle {:>2}: entry {:.3} s (relaxed {:.3} s)", id + 1, s.entries[id], t_bar[id]);
        }
    }
    Ok(())
}
