//! Run configuration: scenario resolution, sweep grids, output formats.

use weaksim_core::{Error, Result, ScenarioSpec};

/// Stdout rendering for single-run commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// A width grid for sweeps, linear or log spaced.
#[derive(Debug, Clone, Copy)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepRange {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > 0.0 && self.min < self.max) {
            return Err(Error::InvalidConfig(format!(
                "sweep bounds must be positive with min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidConfig(
                "sweep needs at least two points".into(),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect()
    }
}

/// Loads a scenario by builtin name or from a JSON file path.
pub fn load_scenario(spec: &str) -> Result<ScenarioSpec> {
    if weaksim_core::BUILTIN_NAMES.contains(&spec) {
        return ScenarioSpec::builtin(spec);
    }
    let path = std::path::Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {spec}: {e}")))?;
        return ScenarioSpec::from_json(&text);
    }
    Err(Error::UnknownScenario(spec.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grids() {
        let lin = SweepRange {
            min: 1.0,
            max: 3.0,
            points: 3,
            log: false,
        };
        lin.validate().unwrap();
        assert_eq!(lin.values(), vec![1.0, 2.0, 3.0]);

        let log = SweepRange {
            min: 1.0,
            max: 100.0,
            points: 3,
            log: true,
        };
        let v = log.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_validation() {
        for bad in [
            SweepRange { min: -1.0, max: 2.0, points: 5, log: false },
            SweepRange { min: 3.0, max: 2.0, points: 5, log: false },
            SweepRange { min: 1.0, max: 2.0, points: 1, log: false },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn load_builtin_and_reject_unknown() {
        assert!(load_scenario("two_state_22").is_ok());
        assert!(matches!(
            load_scenario("not_a_scenario"),
            Err(Error::UnknownScenario(_))
        ));
    }
}
