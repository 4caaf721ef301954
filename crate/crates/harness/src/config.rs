use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rmflab_core::RmfKind;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    LowerBound,
    UpperBound,
    Clt,
    VarianceMax,
    GaussMax,
    Verify,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::LowerBound => "lowerbound",
            Experiment::UpperBound => "upperbound",
            Experiment::Clt => "clt",
            Experiment::VarianceMax => "variancemax",
            Experiment::GaussMax => "gaussmax",
            Experiment::Verify => "verify",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lowerbound" => Experiment::LowerBound,
            "upperbound" => Experiment::UpperBound,
            "clt" => Experiment::Clt,
            "variancemax" => Experiment::VarianceMax,
            "gaussmax" => Experiment::GaussMax,
            "verify" => Experiment::Verify,
            other => return Err(HarnessError::Config(format!("unknown experiment {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Declarative description of one campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub kind: RmfKind,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub epsilon: f64,
    pub master_seed: u64,
    pub subsample: Option<usize>,
    pub output_path: PathBuf,
    /// Threshold slack for the Gaussian maximum, `√((2−δ) log n)`.
    pub delta: f64,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, kind: RmfKind, n_values: Vec<usize>, trials: usize) -> Self {
        Self {
            experiment,
            kind,
            n_values,
            trials,
            epsilon: 0.25,
            master_seed: 0,
            subsample: None,
            output_path: PathBuf::from(format!("{}.csv", experiment.as_str())),
            delta: 0.01,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.experiment != Experiment::Verify {
            if self.n_values.is_empty() {
                return Err(HarnessError::Config("no N values".into()));
            }
            if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarnessError::Config("N values must be strictly ascending".into()));
            }
            if self.n_values[0] < 2 {
                return Err(HarnessError::Config("N must be at least 2".into()));
            }
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(HarnessError::Config(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        if self.subsample == Some(0) {
            return Err(HarnessError::Config("subsample must be positive".into()));
        }
        Ok(())
    }
}

/// `n_min, n_min·f, n_min·f², … ≤ n_max`, each rounded and strictly increasing.
pub fn geometric_n_values(n_min: usize, n_max: usize, factor: f64) -> Result<Vec<usize>> {
    if n_min == 0 || n_min > n_max {
        return Err(HarnessError::Config(format!("bad range [{n_min}, {n_max}]")));
    }
    if !(factor > 1.0) {
        if n_min == n_max {
            return Ok(vec![n_min]);
        }
        return Err(HarnessError::Config(format!("step factor {factor} must exceed 1")));
    }
    let mut out = vec![n_min];
    let mut x = n_min as f64;
    loop {
        x *= factor;
        let next = (x.round() as usize).max(out[out.len() - 1] + 1);
        if next > n_max {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_values() {
        assert_eq!(geometric_n_values(1024, 4096, 2.0).unwrap(), vec![1024, 2048, 4096]);
        assert_eq!(geometric_n_values(10, 10, 2.0).unwrap(), vec![10]);
        assert_eq!(geometric_n_values(5, 9, 1.1).unwrap(), vec![5, 6, 7, 8, 9]);
        assert!(geometric_n_values(10, 5, 2.0).is_err());
        assert!(geometric_n_values(5, 10, 1.0).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new(Experiment::Clt, RmfKind::Steinhaus, vec![8, 4], 1);
        assert!(c.validate().is_err());
        c.n_values = vec![4, 8];
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
    }
}
