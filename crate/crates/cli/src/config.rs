//! Experiment configuration: one JSON document, unknown keys rejected.
//!
//! ```json
//! {
//!   "sigma_low": 0.0, "sigma_high": 0.4, "rate": 0.06,
//!   "kind": "put", "strike": 100, "penalty": 5, "penalty_factor": 1,
//!   "t0": 0, "maturity": 0.5, "n_list": [200, 400, 700, 1200],
//!   "spots": [80, 90, 100, 110, 120],
//!   "outputs": { "csv": "table1.csv", "svg": null, "grid_export": false }
//! }
//! ```
//!
//! `kind` may also be `"constant"`, in which case `constant` gives the value
//! of `f = g` and strike/penalty are ignored. A single `n` may replace `n_list`.

use std::path::Path;

use dynkin_core::{
    make_discounted, step_size, validate_order, DiscountedPayoffs, GameOptionSpec, GridParams, OptionKind,
    VolatilityInterval,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    Put,
    Call,
    Constant,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
    #[serde(default)]
    pub grid_export: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sigma_low: f64,
    pub sigma_high: f64,
    #[serde(default)]
    pub rate: f64,
    pub kind: PayoffKind,
    #[serde(default)]
    pub strike: Option<f64>,
    #[serde(default)]
    pub penalty: Option<f64>,
    #[serde(default = "one")]
    pub penalty_factor: f64,
    #[serde(default)]
    pub constant: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    pub maturity: f64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    pub spots: Vec<f64>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Step counts in ascending order, duplicates removed.
    pub fn ns(&self) -> Vec<usize> {
        let mut ns = match (&self.n_list, self.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        };
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    pub fn interval(&self) -> Result<VolatilityInterval> {
        VolatilityInterval::new(self.sigma_low, self.sigma_high).map_err(|e| CliError::at("sigma_low/sigma_high", e))
    }

    pub fn spec(&self) -> Result<Option<GameOptionSpec>> {
        let kind = match self.kind {
            PayoffKind::Put => OptionKind::Put,
            PayoffKind::Call => OptionKind::Call,
            PayoffKind::Constant => return Ok(None),
        };
        let strike = self.strike.ok_or_else(|| CliError::Validation("strike: required for put/call".into()))?;
        let penalty = self.penalty.ok_or_else(|| CliError::Validation("penalty: required for put/call".into()))?;
        GameOptionSpec::new(kind, strike, penalty, self.penalty_factor, self.rate)
            .map(Some)
            .map_err(|e| CliError::at("kind/strike/penalty/penalty_factor/rate", e))
    }

    pub fn payoffs(&self) -> Result<DiscountedPayoffs> {
        match self.spec()? {
            Some(spec) => Ok(make_discounted(&spec)),
            None => Ok(DiscountedPayoffs::constant(self.constant.unwrap_or(0.0))),
        }
    }

    pub fn grid(&self, n: usize, spot: f64) -> Result<GridParams> {
        GridParams::new(self.t0, self.maturity, n, spot).map_err(|e| CliError::at("t0/maturity/n_list/spots", e))
    }

    pub fn validate(&self) -> Result<()> {
        self.interval()?;
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(CliError::Validation(format!("rate: {} must be >= 0", self.rate)));
        }
        match self.kind {
            PayoffKind::Constant => {
                let c = self
                    .constant
                    .ok_or_else(|| CliError::Validation("constant: required for kind \"constant\"".into()))?;
                if !c.is_finite() {
                    return Err(CliError::Validation("constant: must be finite".into()));
                }
            }
            _ => {
                if self.constant.is_some() {
                    return Err(CliError::Validation("constant: only valid with kind \"constant\"".into()));
                }
                self.spec()?;
            }
        }
        if self.n.is_some() && self.n_list.is_some() {
            return Err(CliError::Validation("n/n_list: give one, not both".into()));
        }
        let ns = self.ns();
        if ns.is_empty() {
            return Err(CliError::Validation("n_list: must be nonempty".into()));
        }
        if self.spots.is_empty() {
            return Err(CliError::Validation("spots: must be nonempty".into()));
        }
        for (i, &s) in self.spots.iter().enumerate() {
            for &n in &ns {
                self.grid(n, s).map_err(|e| match e {
                    CliError::Validation(m) => CliError::Validation(format!("spots[{i}] / n = {n}: {m}")),
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    /// Checks `g ≥ f` on the lattice of every configured cell.
    pub fn validate_order(&self) -> Result<()> {
        let payoffs = self.payoffs()?;
        let iv = self.interval()?;
        for &s in &self.spots {
            for n in self.ns() {
                let grid = self.grid(n, s)?;
                let a = step_size(&grid, iv.sigma_high()).map_err(|e| CliError::at("sigma_high", e))?;
                validate_order(&payoffs, &grid, a).map_err(|r| {
                    CliError::Validation(format!(
                        "payoffs: g < f at (k={}, z={}) for spot {s}, n = {n}: f = {}, g = {}",
                        r.k, r.z, r.f, r.g
                    ))
                })?;
            }
        }
        Ok(())
    }
}
