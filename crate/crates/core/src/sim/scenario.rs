//! Scenario files and the two reference scenarios.
//!
//! ```text
//! tau=0.1
//! steps=300
//! seed=7
//! drag=0.001
//! # id, controlled, y0, v0, alpha, beta, v_min, v_max, u/w min, u/w max,
//! # d_y min/max, d_v min/max, noise y min/max, noise v min/max, desired input
//! vehicle,1,1,-42,10,0,5,1.39,13.9,-2.5,2.5,-0.05,0.05,-0.05,0.05,-3,3,-0.05,0.05,1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{Bounds, NoiseBounds, StateInterval, VehicleParams, VehicleState};
use crate::error::{Error, Result};

/// One vehicle of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleSpec {
    /// Label from the scenario file.
    pub label: u64,
    pub params: VehicleParams,
    pub initial: VehicleState,
    pub noise: NoiseBounds,
    /// Constant desired input (controlled vehicles only).
    pub desired: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub tau: f64,
    pub steps: usize,
    pub seed: u64,
    pub vehicles: Vec<VehicleSpec>,
}

const REF_NOISE: NoiseBounds = NoiseBounds {
    y: Bounds::symmetric(3.0),
    v: Bounds::symmetric(0.05),
};

fn reference_vehicle(label: u64, controlled: bool, y0: f64, v0: f64) -> VehicleSpec {
    VehicleSpec {
        label,
        params: VehicleParams::reference(controlled),
        initial: VehicleState::new(y0, v0),
        noise: REF_NOISE,
        desired: controlled.then_some(1.0),
    }
}

impl ScenarioConfig {
    /// Four controlled and two uncontrolled vehicles.
    pub fn scenario1() -> Self {
        let y = [-42.0, -50.0, -55.0, -60.0, -60.0, -65.0];
        let v = [10.0, 9.0, 8.0, 8.0, 10.0, 8.0];
        Self::reference(&y, &v, 4, 300)
    }

    /// Twelve controlled vehicles behind two uncontrolled ones (the first two).
    pub fn scenario2() -> Self {
        let y = [
            -25.0, -30.0, -35.0, -40.0, -45.0, -50.0, -55.0, -60.0, -65.0, -65.0, -70.0, -75.0,
            -80.0, -85.0,
        ];
        let v = [6.0, 9.0, 9.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 9.5, 8.0, 8.0, 8.0, 8.0];
        let controlled: Vec<bool> = (0..y.len()).map(|i| i >= 2).collect();
        Self::reference_with(&y, &v, &controlled, 600)
    }

    /// Reference parameters; the first `controlled` vehicles are controlled.
    pub fn reference(y0: &[f64], v0: &[f64], controlled: usize, steps: usize) -> Self {
        let flags: Vec<bool> = (0..y0.len()).map(|i| i < controlled).collect();
        Self::reference_with(y0, v0, &flags, steps)
    }

    /// Reference parameters with an explicit controlled flag per vehicle.
    pub fn reference_with(y0: &[f64], v0: &[f64], controlled: &[bool], steps: usize) -> Self {
        let vehicles = y0
            .iter()
            .zip(v0)
            .zip(controlled)
            .enumerate()
            .map(|(i, ((y, v), c))| reference_vehicle(i as u64 + 1, *c, *y, *v))
            .collect();
        Self {
            tau: 0.1,
            steps,
            seed: 0,
            vehicles,
        }
    }

    pub fn params(&self) -> Vec<VehicleParams> {
        self.vehicles.iter().map(|v| v.params.clone()).collect()
    }

    pub fn noise(&self) -> Vec<NoiseBounds> {
        self.vehicles.iter().map(|v| v.noise).collect()
    }

    pub fn n_controlled(&self) -> usize {
        self.vehicles.iter().filter(|v| v.params.controlled).count()
    }

    /// Measurement band around the exact initial state, limited to the speed range.
    pub fn nominal_estimate(&self) -> Vec<StateInterval> {
        self.vehicles
            .iter()
            .map(|v| v.noise.band(&v.initial).clamp_speed(v.params.speed))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.n_controlled() == 0 {
            return bad("at least one controlled vehicle is required".into());
        }
        for v in &self.vehicles {
            v.params.validate()?;
            if v.noise.y.min > v.noise.y.max || v.noise.v.min > v.noise.v.max {
                return bad(format!("vehicle {}: noise bounds are reversed", v.label));
            }
            if !v.params.speed.contains(v.initial.v) {
                return bad(format!("vehicle {}: initial speed outside the limits", v.label));
            }
            if let Some(u) = v.desired {
                if !v.params.input.contains(u) {
                    return bad(format!("vehicle {}: desired input outside the input bounds", v.label));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the line-oriented scenario format; `origin` labels errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Scenario {
            path: origin.to_string(),
            line,
            message,
        };
        let mut tau = None;
        let mut steps = None;
        let mut seed = None;
        let mut drag = 0.001;
        let mut vehicles = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vehicle,") {
                vehicles.push((line_no, rest.to_string()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected key=value or vehicle line, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| err(line_no, format!("{key}: {e}")))
            };
            match key {
                "tau" => tau = Some(num(value)?),
                "drag" => drag = num(value)?,
                "steps" => {
                    steps = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| err(line_no, format!("steps: {e}")))?,
                    )
                }
                "seed" => {
                    seed = Some(
                        value
                            .parse::<u64>()
                            .map_err(|e| err(line_no, format!("seed: {e}")))?,
                    )
                }
                other => return Err(err(line_no, format!("unknown header `{other}`"))),
            }
        }

        let mut specs = Vec::new();
        for (line_no, rest) in vehicles {
            let f: Vec<&str> = rest.split(',').map(str::trim).collect();
            if f.len() != 19 {
                return Err(err(line_no, format!("vehicle line needs 19 fields after `vehicle`, got {}", f.len())));
            }
            let num = |i: usize| {
                f[i].parse::<f64>()
                    .map_err(|e| err(line_no, format!("field {}: `{}`: {e}", i + 2, f[i])))
            };
            let label = f[0]
                .parse::<u64>()
                .map_err(|e| err(line_no, format!("vehicle id `{}`: {e}", f[0])))?;
            let controlled = match f[1] {
                "1" => true,
                "0" => false,
                other => return Err(err(line_no, format!("controlled flag must be 0 or 1, got `{other}`"))),
            };
            let desired = match f[18] {
                "-" | "" => None,
                _ => Some(num(18)?),
            };
            if controlled && desired.is_none() {
                return Err(err(line_no, "controlled vehicle needs a desired input".into()));
            }
            specs.push(VehicleSpec {
                label,
                params: VehicleParams {
                    speed: Bounds::new(num(6)?, num(7)?),
                    input: Bounds::new(num(8)?, num(9)?),
                    dist_y: Bounds::new(num(10)?, num(11)?),
                    dist_v: Bounds::new(num(12)?, num(13)?),
                    drag,
                    alpha: num(4)?,
                    beta: num(5)?,
                    controlled,
                },
                initial: VehicleState::new(num(2)?, num(3)?),
                noise: NoiseBounds {
                    y: Bounds::new(num(14)?, num(15)?),
                    v: Bounds::new(num(16)?, num(17)?),
                },
                desired: if controlled { desired } else { None },
            });
        }

        let cfg = Self {
            tau: tau.ok_or_else(|| err(0, "missing tau".into()))?,
            steps: steps.ok_or_else(|| err(0, "missing steps".into()))?,
            seed: seed.ok_or_else(|| err(0, "missing seed".into()))?,
            vehicles: specs,
        };
        cfg.validate().map_err(|e| err(0, e.to_string()))?;
        Ok(cfg)
    }

    /// Serializes back to the scenario format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let drag = self.vehicles.first().map_or(0.001, |v| v.params.drag);
        let _ = writeln!(s, "tau={}\nsteps={}\nseed={}\ndrag={}", self.tau, self.steps, self.seed, drag);
        for v in &self.vehicles {
            let p = &v.params;
            let desired = v.desired.map_or("-".to_string(), |u| u.to_string());
            let _ = writeln!(
                s,
                "vehicle,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                v.label,
                u8::from(p.controlled),
                v.initial.y,
                v.initial.v,
                p.alpha,
                p.beta,
                p.speed.min,
                p.speed.max,
                p.input.min,
                p.input.max,
                p.dist_y.min,
                p.dist_y.max,
                p.dist_v.min,
                p.dist_v.max,
                v.noise.y.min,
                v.noise.y.max,
                v.noise.v.min,
                v.noise.v.max,
                desired
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = ScenarioConfig::scenario1();
        cfg.seed = 42;
        let back = ScenarioConfig::parse(&cfg.to_text(), "mem").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "tau=0.1\nsteps=10\nseed=1\nvehicle,1,1,-42\n";
        match ScenarioConfig::parse(text, "x.txt") {
            Err(Error::Scenario { line, path, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(path, "x.txt");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_all_uncontrolled() {
        let text = "tau=0.1\nsteps=10\nseed=1\n\
            vehicle,1,0,-42,10,0,5,1.39,13.9,-0.5,0.5,-0.05,0.05,-0.05,0.05,-3,3,-0.05,0.05,-\n";
        assert!(ScenarioConfig::parse(text, "x").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\ntau=0.1 # period\n\nsteps=5\nseed=3\n\
            vehicle,7,1,-42,10,0,5,1.39,13.9,-2.5,2.5,-0.05,0.05,-0.05,0.05,-3,3,-0.05,0.05,1\n";
        let cfg = ScenarioConfig::parse(text, "x").unwrap();
        assert_eq!(cfg.vehicles.len(), 1);
        assert_eq!(cfg.vehicles[0].label, 7);
        assert_eq!(cfg.vehicles[0].params.drag, 0.001);
    }
}
