//! Drive a supervisor session by hand: the vehicles move exactly as predicted
//! under zero disturbance and the estimate is just propagated each period.

use intersection_supervisor::dynamics::{predict_step, InputSignal};
use intersection_supervisor::sim::scenario::ScenarioConfig;
use intersection_supervisor::supervisor::{initialize_session, supervisor_step, Mode, SupervisorConfig};

fn main() -> intersection_supervisor::Result<()> {
    let scenario = ScenarioConfig::scenario1();
    let params = scenario.params();
    let cfg = SupervisorConfig::new(scenario.tau);
    let desired: Vec<InputSignal> = scenario
        .vehicles
        .iter()
        .map(|v| InputSignal::Constant(v.desired.unwrap_or(0.0)))
        .collect();
    let mut est = scenario.nominal_estimate();

    let mut session = initialize_session(Mode::Efficient, &params, &est, &desired, &cfg)?;
    let mut overrides = 0;
    for k in 0..40 {
        let d = supervisor_step(&mut session, &est, &desired)?;
        if d.overridden {
            overrides += 1;
            let u: Vec<String> = d.output[..scenario.n_controlled()]
                .iter()
                .map(|s| format!("{:+.1}", s.value_at(0.0)))
                .collect();
            println!("step {k:>2}: override, inputs {}", u.join(" "));
        }
        est = params
            .iter()
            .zip(&est)
            .zip(&d.output)
            .map(|((p, e), u)| predict_step(p, e, u, cfg.tau, cfg.sched.step))
            .collect::<Result<_, _>>()?;
    }
    println!("overrode on {overrides} of {} steps", session.step);
    Ok(())
}
