//! Trace (CSV) and metrics (`key=value`) files.
//!
//! Wall-clock columns are written as `0` unless timing is requested, so that a
//! fixed scenario, seed and mode always produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::run::{RunMetrics, TraceRecord};

pub const TRACE_HEADER: &str =
    "step,vehicle,y_true,v_true,y_meas,v_meas,y_lo,y_hi,v_lo,v_hi,input,overridden,answer,wall_s";

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

pub fn trace_csv(trace: &[TraceRecord], timing: bool) -> String {
    let mut s = String::with_capacity(64 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.vehicle,
            num(r.y_true),
            num(r.v_true),
            num(r.y_meas),
            num(r.v_meas),
            num(r.est.lo.y),
            num(r.est.hi.y),
            num(r.est.lo.v),
            num(r.est.hi.v),
            num(r.input),
            u8::from(r.overridden),
            if r.answer { "yes" } else { "no" },
            if timing { num(r.wall_s) } else { "0".into() },
        );
    }
    s
}

pub fn metrics_text(m: &RunMetrics, timing: bool) -> String {
    let t = |x: f64| if timing { format!("{x:.6}") } else { "0".into() };
    format!(
        "collisions={}\noverrides={}\nblocked={}\nincompatible_measurements={}\nmax_iter_s={}\nmean_iter_s={}\ncompleted={}\n",
        m.collisions,
        m.overrides,
        m.blocked,
        m.incompatible_measurements,
        t(m.max_iter_s),
        t(m.mean_iter_s),
        m.completed
    )
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes whichever of the two files has a path.
pub fn emit_outputs(
    trace: &[TraceRecord],
    metrics: &RunMetrics,
    trace_path: Option<&Path>,
    metrics_path: Option<&Path>,
    timing: bool,
) -> Result<()> {
    if let Some(p) = trace_path {
        write(p, &trace_csv(trace, timing))?;
    }
    if let Some(p) = metrics_path {
        write(p, &metrics_text(metrics, timing))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(trace_csv(&[], false), format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn metrics_keys() {
        let text = metrics_text(&RunMetrics::default(), false);
        let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
        assert_eq!(
            keys,
            [
                "collisions",
                "overrides",
                "blocked",
                "incompatible_measurements",
                "max_iter_s",
                "mean_iter_s",
                "completed"
            ]
        );
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = emit_outputs(&[], &RunMetrics::default(), Some(Path::new("/nonexistent/dir/t.csv")), None, false)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/t.csv"));
    }
}
