//! Per-iteration time of both supervisors as the fleet grows.

use intersection_supervisor::sim::bench::{bench_scaling, log_log_slope, rows_text};
use intersection_supervisor::sim::run::RunOptions;
use intersection_supervisor::sim::scenario::ScenarioConfig;
use intersection_supervisor::supervisor::Mode;

fn main() -> intersection_supervisor::Result<()> {
    let opts = RunOptions {
        exact_cap: Some(200_000),
        ..RunOptions::default()
    };
    let rows = bench_scaling(&ScenarioConfig::scenario1(), &[4, 8, 16, 32], 15, 8, &opts)?;
    print!("{}", rows_text(&rows));
    let eff: Vec<_> = rows.into_iter().filter(|r| r.mode == Mode::Efficient).collect();
    if let Some(k) = log_log_slope(&eff) {
        println!("efficient slope on log-log axes: {k:.2}");
    }
    Ok(())
}
