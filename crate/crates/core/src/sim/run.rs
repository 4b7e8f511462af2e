//! Seeded closed-loop simulation.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    correct_estimate, march, Bounds, Disturbance, InputSignal, StateInterval, VehicleState,
};
use crate::error::{Error, Result};
use crate::sim::scenario::ScenarioConfig;
use crate::supervisor::{initialize_session, positions_in_bad_set, supervisor_step, Mode, SupervisorConfig};

/// One vehicle at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub vehicle: u64,
    pub y_true: f64,
    pub v_true: f64,
    pub y_meas: f64,
    pub v_meas: f64,
    pub est: StateInterval,
    /// Input applied at the start of the step.
    pub input: f64,
    pub overridden: bool,
    pub answer: bool,
    pub wall_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMetrics {
    /// Steps during which the true positions entered the Bad set.
    pub collisions: usize,
    pub overrides: usize,
    pub blocked: usize,
    pub incompatible_measurements: usize,
    /// Trace records whose true state lies outside the estimate.
    pub containment_violations: usize,
    /// Steps in which efficient mode fell back to the previous sequence.
    pub fallbacks: usize,
    /// Overridden steps whose next safe signal was confirmed feasible.
    pub safe_signal_checks: usize,
    pub steps: usize,
    pub max_iter_s: f64,
    pub mean_iter_s: f64,
    /// Every vehicle is past its intersection exit.
    pub completed: bool,
}

/// Knobs that do not belong in a scenario file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub exact_cap: Option<u64>,
    /// Stop at the first blocked step instead of returning an error.
    pub tolerate_blocking: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            exact_cap: None,
            tolerate_blocking: true,
        }
    }
}

/// Random source for one vehicle during one step, independent of every other
/// vehicle and step.
fn stream(seed: u64, vehicle: usize, step: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((vehicle as u64) << 32) | step as u64);
    rng
}

fn draw(rng: &mut ChaCha8Rng, b: Bounds) -> f64 {
    if b.min == b.max {
        b.min
    } else {
        rng.gen_range(b.min..=b.max)
    }
}

/// Supervisor settings for a scenario.
pub fn supervisor_config(cfg: &ScenarioConfig, opts: &RunOptions) -> SupervisorConfig {
    let mut s = SupervisorConfig::new(cfg.tau);
    s.exact_cap = opts.exact_cap;
    s
}

pub fn desired_inputs(cfg: &ScenarioConfig) -> Vec<InputSignal> {
    cfg.vehicles
        .iter()
        .map(|v| InputSignal::Constant(v.desired.unwrap_or(0.0)))
        .collect()
}

/// Runs the scenario in closed loop with the given supervisor.
pub fn run_simulation(cfg: &ScenarioConfig, mode: Mode) -> Result<(Vec<TraceRecord>, RunMetrics)> {
    run_simulation_with(cfg, mode, &RunOptions::default())
}

pub fn run_simulation_with(
    cfg: &ScenarioConfig,
    mode: Mode,
    opts: &RunOptions,
) -> Result<(Vec<TraceRecord>, RunMetrics)> {
    cfg.validate()?;
    let params = cfg.params();
    let noise = cfg.noise();
    let scfg = supervisor_config(cfg, opts);
    let h = scfg.sched.step;
    let desired = desired_inputs(cfg);
    let n = params.len();

    let mut truth: Vec<VehicleState> = cfg.vehicles.iter().map(|v| v.initial).collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream(cfg.seed, i, 0)).collect();
    let mut meas: Vec<VehicleState> = truth
        .iter()
        .zip(&noise)
        .zip(rngs.iter_mut())
        .map(|((x, nb), rng)| measure(x, nb, rng))
        .collect();
    // the initial state is known up to the noise bounds; the first
    // measurement can only tighten that
    let mut est: Vec<StateInterval> = cfg
        .nominal_estimate()
        .into_iter()
        .zip(&meas)
        .zip(&noise)
        .map(|((prior, m), nb)| correct_estimate(&prior, m, nb))
        .collect::<Result<_>>()?;

    let mut session = initialize_session(mode, &params, &est, &desired, &scfg)?;
    let mut trace = Vec::new();
    let mut m = RunMetrics::default();
    let mut total_wall = 0.0;

    for k in 0..cfg.steps {
        if k > 0 {
            rngs = (0..n).map(|i| stream(cfg.seed, i, k)).collect();
            meas = truth
                .iter()
                .zip(&noise)
                .zip(rngs.iter_mut())
                .map(|((x, nb), rng)| measure(x, nb, rng))
                .collect();
            let pred = session
                .last_prediction
                .clone()
                .expect("a completed step leaves a prediction");
            est = Vec::with_capacity(n);
            for i in 0..n {
                let corrected = match correct_estimate(&pred[i], &meas[i], &noise[i]) {
                    Ok(e) => e,
                    Err(Error::IncompatibleMeasurement { component }) => {
                        log::warn!("step {k}, vehicle {i}: measurement incompatible in {component}; keeping the prediction");
                        m.incompatible_measurements += 1;
                        pred[i]
                    }
                    Err(e) => return Err(e),
                };
                est.push(corrected.clamp_speed(params[i].speed));
            }
        }

        let decision = match supervisor_step(&mut session, &est, &desired) {
            Ok(d) => d,
            Err(Error::Blocked { step }) if opts.tolerate_blocking => {
                log::error!("supervisor blocked at step {step}");
                m.blocked += 1;
                break;
            }
            Err(e) => return Err(e),
        };
        m.steps += 1;
        total_wall += decision.wall_s;
        m.max_iter_s = m.max_iter_s.max(decision.wall_s);
        if decision.overridden {
            m.overrides += 1;
            if !decision.schedule_used.feasible {
                return Err(Error::ContractViolation(format!(
                    "step {k}: override left an infeasible safe schedule"
                )));
            }
            m.safe_signal_checks += 1;
        }
        if decision.fallback_used {
            m.fallbacks += 1;
        }

        for i in 0..n {
            let inside = est[i].contains_with(&truth[i], 1e-9);
            if !inside {
                m.containment_violations += 1;
            }
            let applied = if params[i].controlled {
                decision.output[i].value_at(0.0)
            } else {
                f64::NAN
            };
            trace.push(TraceRecord {
                step: k,
                vehicle: cfg.vehicles[i].label,
                y_true: truth[i].y,
                v_true: truth[i].v,
                y_meas: meas[i].y,
                v_meas: meas[i].v,
                est: est[i],
                input: applied,
                overridden: decision.overridden,
                answer: decision.answer,
                wall_s: decision.wall_s,
            });
        }

        // advance the true states over one period
        let substeps = (cfg.tau / h).round() as usize;
        let mut collided = false;
        for j in 0..substeps {
            let t0 = j as f64 * h;
            for i in 0..n {
                let p = &params[i];
                let d = Disturbance {
                    dy: draw(&mut rngs[i], p.dist_y),
                    dv: draw(&mut rngs[i], p.dist_v),
                };
                let sig = if p.controlled {
                    decision.output[i].shifted(t0)
                } else {
                    InputSignal::Constant(draw(&mut rngs[i], p.input))
                };
                truth[i] = march(p, 0, truth[i], &sig, d, h, h, |_, _, _, _| ControlFlow::Continue(()))?;
            }
            let y: Vec<f64> = truth.iter().map(|x| x.y).collect();
            collided |= positions_in_bad_set(&params, &y);
        }
        if collided {
            m.collisions += 1;
        }
        if truth.iter().zip(&params).all(|(x, p)| x.y >= p.beta) {
            m.completed = true;
            break;
        }
    }
    if m.steps > 0 {
        m.mean_iter_s = total_wall / m.steps as f64;
    }
    Ok((trace, m))
}

fn measure(x: &VehicleState, nb: &crate::dynamics::NoiseBounds, rng: &mut ChaCha8Rng) -> VehicleState {
    // true = measured + delta
    VehicleState::new(x.y - draw(rng, nb.y), x.v - draw(rng, nb.v))
}
