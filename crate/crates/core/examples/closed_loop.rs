//! Seeded closed-loop run of a scenario file with trace and metrics output.
//!
//! `cargo run --release --example closed_loop -- scenarios/scenario1.txt efficient 7`

use std::path::Path;

use intersection_supervisor::sim::output::{emit_outputs, metrics_text};
use intersection_supervisor::sim::run::run_simulation;
use intersection_supervisor::sim::scenario::ScenarioConfig;
use intersection_supervisor::supervisor::Mode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = match args.first() {
        Some(path) => ScenarioConfig::load(Path::new(path))?,
        None => ScenarioConfig::scenario1(),
    };
    let mode: Mode = args.get(1).map_or("efficient", String::as_str).parse()?;
    if let Some(seed) = args.get(2) {
        cfg.seed = seed.parse()?;
    }

    let (trace, metrics) = run_simulation(&cfg, mode)?;
    let out = std::env::temp_dir().join("closed_loop_trace.csv");
    emit_outputs(&trace, &metrics, Some(&out), None, false)?;
    print!("{}", metrics_text(&metrics, true));
    println!("trace: {}", out.display());
    Ok(())
}
