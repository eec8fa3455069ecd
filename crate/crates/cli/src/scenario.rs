use std::path::Path;

use seqclt::{SequenceSpec, Standardization, TrigPoly};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("horizon n must be at least 1")]
    ZeroHorizon,
    #[error("samples must be at least 2, got {0}")]
    TooFewSamples(usize),
}

/// One run configuration: observable, map sequence and horizon, plus the
/// Monte Carlo settings used by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawScenario")]
pub struct Scenario {
    pub function: TrigPoly,
    pub sequence: SequenceSpec,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub standardization: Standardization,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    function: TrigPoly,
    sequence: SequenceSpec,
    n: u64,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    standardization: Standardization,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = ScenarioError;

    fn try_from(raw: RawScenario) -> Result<Self, Self::Error> {
        if raw.function.is_zero() {
            return Err(ScenarioError::ZeroFunction);
        }
        if raw.n == 0 {
            return Err(ScenarioError::ZeroHorizon);
        }
        if let Some(m) = raw.samples {
            if m < 2 {
                return Err(ScenarioError::TooFewSamples(m));
            }
        }
        Ok(Self {
            function: raw.function,
            sequence: raw.sequence,
            n: raw.n,
            samples: raw.samples,
            seed: raw.seed,
            standardization: raw.standardization,
        })
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        seqclt::report::to_json(self).expect("scenario serialization cannot fail")
    }
}
