//! Experiment configuration files.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use rearrange::directing::PiecewiseLinearFn;
use rearrange::exactgeom::parse_rational;
use rearrange::sritest::{CellBox, ConditioningPartition};
use rearrange::RearrangementSpec;
use serde::Deserialize;

use crate::Failure;

/// One JSON file per experiment. Command-line flags override the shared
/// run parameters.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: Option<RearrangementSpec>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub alpha: Option<f64>,
    pub workers: Option<usize>,
    pub partitions: Option<Vec<PartitionConfig>>,
    pub out: Option<PathBuf>,
    pub theta: Option<Number>,
    pub c: Option<Number>,
    pub function: Option<FunctionConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionConfig {
    Dyadic {
        k: usize,
    },
    Grid {
        k: usize,
        axis: usize,
        bins: usize,
    },
    Sublevel {
        k: usize,
        theta: f64,
        c: f64,
    },
    Cells {
        k: usize,
        label: String,
        cells: Vec<CellBox>,
    },
}

impl PartitionConfig {
    pub fn build(self) -> rearrange::Result<ConditioningPartition> {
        match self {
            PartitionConfig::Dyadic { k } => ConditioningPartition::dyadic(k),
            PartitionConfig::Grid { k, axis, bins } => ConditioningPartition::grid(k, axis, bins),
            PartitionConfig::Sublevel { k, theta, c } => ConditioningPartition::sublevel(k, theta, c),
            PartitionConfig::Cells { k, label, cells } => ConditioningPartition::from_cells(k, label, cells),
        }
    }
}

/// A JSON number, or a string such as `"1/3"` for an exact rational.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn rational(&self) -> Result<BigRational, Failure> {
        let text = match self {
            Number::Float(x) => x.to_string(),
            Number::Text(s) => s.clone(),
        };
        parse_rational(&text).map_err(|e| Failure::config(e.to_string()))
    }

    fn is_text(&self) -> bool {
        matches!(self, Number::Text(_))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub breakpoints: Vec<Number>,
    pub values: Vec<Number>,
}

/// A directing function in floating point, or in exact arithmetic when any
/// entry was written as a string.
pub enum Function {
    Float(PiecewiseLinearFn),
    Exact(PiecewiseLinearFn<BigRational>),
}

impl FunctionConfig {
    pub fn build(&self) -> Result<Function, Failure> {
        let invalid = |e: rearrange::Error| Failure::config(e.to_string());
        let all = || self.breakpoints.iter().chain(&self.values);
        if all().any(Number::is_text) {
            let conv = |v: &[Number]| v.iter().map(Number::rational).collect::<Result<Vec<_>, _>>();
            let f = PiecewiseLinearFn::new(conv(&self.breakpoints)?, conv(&self.values)?).map_err(invalid)?;
            return Ok(Function::Exact(f));
        }
        let conv = |v: &[Number]| {
            v.iter()
                .map(|n| match n {
                    Number::Float(x) => *x,
                    Number::Text(_) => unreachable!(),
                })
                .collect()
        };
        let f = PiecewiseLinearFn::new(conv(&self.breakpoints), conv(&self.values)).map_err(invalid)?;
        Ok(Function::Float(f))
    }
}
