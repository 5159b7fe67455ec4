//! Portfolio documents: a raw quadratic block or an already remapped one.

use std::io::Read;
use std::path::Path;

use dgn_core::model::{remap, PortfolioSpec, RemappedPortfolio};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_days: Option<f64>,
}

/// `theta`, `delta`, and row-major `gamma` and `sigma`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBlock {
    pub theta: f64,
    pub delta: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemappedBlock {
    pub theta: f64,
    pub delta: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Top-level document. Extra keys are ignored so that `remap` output, which
/// also carries diagnostics, reads back in.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PortfolioFile {
    #[serde(default)]
    pub metadata: Option<Metadata>,
    #[serde(default)]
    pub raw: Option<RawBlock>,
    #[serde(default)]
    pub remapped: Option<RemappedBlock>,
}

/// A validated portfolio together with where it came from.
pub struct Loaded {
    pub metadata: Option<Metadata>,
    pub portfolio: RemappedPortfolio,
}

/// Reads `path`, or standard input for `-`.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Parse(format!("standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    };
    let file: PortfolioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    file.into_loaded()
}

fn matrix(name: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Invalid(format!(
            "{name} must be a {n}x{n} matrix to match delta"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        n,
        n,
        rows.iter().flatten().copied(),
    ))
}

impl PortfolioFile {
    pub fn into_loaded(self) -> Result<Loaded, CliError> {
        let portfolio = match (self.raw, self.remapped) {
            (Some(r), None) => {
                let n = r.delta.len();
                let spec = PortfolioSpec::new(
                    r.theta,
                    DVector::from_vec(r.delta),
                    matrix("gamma", &r.gamma, n)?,
                    matrix("sigma", &r.sigma, n)?,
                )
                .map_err(|e| CliError::Invalid(e.to_string()))?;
                remap(&spec).map_err(|e| CliError::Invalid(e.to_string()))?
            }
            (None, Some(r)) => RemappedPortfolio::new(r.theta, r.delta, r.lambda)
                .map_err(|e| CliError::Invalid(e.to_string()))?,
            (Some(_), Some(_)) => {
                return Err(CliError::Invalid(
                    "exactly one of \"raw\" and \"remapped\" may be given, found both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Invalid(
                    "exactly one of \"raw\" and \"remapped\" must be given, found neither".into(),
                ))
            }
        };
        Ok(Loaded {
            metadata: self.metadata,
            portfolio,
        })
    }
}
