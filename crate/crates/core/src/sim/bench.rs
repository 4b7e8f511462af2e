//! Per-iteration supervisor timing against the number of controlled vehicles.

use crate::error::Result;
use crate::sim::run::{run_simulation_with, RunOptions};
use crate::sim::scenario::ScenarioConfig;
use crate::supervisor::Mode;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub mode: Mode,
    pub iterations: usize,
    pub median_s: f64,
    pub max_s: f64,
    /// Set when the run was not attempted or stopped early.
    pub note: Option<String>,
}

/// Two uncontrolled vehicles just before the entry, followed by `n`
/// controlled vehicles 6 m apart, everyone at 8 m/s. Period, seed and
/// per-vehicle parameters come from the template's first controlled and
/// first uncontrolled vehicles (reference values when it has none).
pub fn synthetic_scenario(template: &ScenarioConfig, n: usize, steps: usize) -> ScenarioConfig {
    let pick = |controlled: bool| {
        template
            .vehicles
            .iter()
            .find(|v| v.params.controlled == controlled)
            .cloned()
    };
    let mut y = vec![-3.0, -9.0];
    let mut controlled = vec![false, false];
    for i in 0..n {
        y.push(-20.0 - 6.0 * i as f64);
        controlled.push(true);
    }
    let v = vec![8.0; y.len()];
    let mut cfg = ScenarioConfig::reference_with(&y, &v, &controlled, steps);
    for spec in &mut cfg.vehicles {
        if let Some(t) = pick(spec.params.controlled) {
            spec.params = t.params;
            spec.noise = t.noise;
            spec.desired = t.desired;
        }
    }
    cfg.tau = template.tau;
    cfg.seed = template.seed;
    cfg
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Times `reps` closed-loop iterations of `mode` on `cfg`.
pub fn time_iterations(cfg: &ScenarioConfig, mode: Mode, reps: usize, opts: &RunOptions) -> Result<BenchRow> {
    let mut c = cfg.clone();
    c.steps = reps;
    let n = c.n_controlled();
    let row = |iterations, median_s, max_s, note| BenchRow {
        n,
        mode,
        iterations,
        median_s,
        max_s,
        note,
    };
    match run_simulation_with(&c, mode, opts) {
        Ok((trace, m)) => {
            let mut walls: Vec<f64> = Vec::new();
            let mut last = None;
            for r in &trace {
                if last != Some(r.step) {
                    walls.push(r.wall_s);
                    last = Some(r.step);
                }
            }
            let note = (m.blocked > 0).then(|| "blocked".to_string());
            Ok(row(walls.len(), median(&mut walls), m.max_iter_s, note))
        }
        Err(e) => Ok(row(0, f64::NAN, f64::NAN, Some(e.to_string()))),
    }
}

/// Both modes for every `n`; exact mode is skipped above `exact_max_n`.
/// The template itself is used when `n` equals its controlled count.
pub fn bench_scaling(
    template: &ScenarioConfig,
    ns: &[usize],
    reps: usize,
    exact_max_n: usize,
    opts: &RunOptions,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let cfg = if n == template.n_controlled() {
            template.clone()
        } else {
            synthetic_scenario(template, n, reps)
        };
        for mode in [Mode::Exact, Mode::Efficient] {
            if mode == Mode::Exact && n > exact_max_n {
                rows.push(BenchRow {
                    n,
                    mode,
                    iterations: 0,
                    median_s: f64::NAN,
                    max_s: f64::NAN,
                    note: Some(format!("skipped above {exact_max_n} vehicles")),
                });
                continue;
            }
            rows.push(time_iterations(&cfg, mode, reps, opts)?);
        }
    }
    Ok(rows)
}

/// Least-squares slope of log(median) against log(n) over rows with timings.
pub fn log_log_slope(rows: &[BenchRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.median_s.is_finite() && r.median_s > 0.0)
        .map(|r| ((r.n as f64).ln(), r.median_s.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn rows_text(rows: &[BenchRow]) -> String {
    let mut s = String::from("n,mode,iterations,median_s,max_s,note\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6},{}\n",
            r.n,
            r.mode,
            r.iterations,
            r.median_s,
            r.max_s,
            r.note.as_deref().unwrap_or("")
        ));
    }
    s
}
