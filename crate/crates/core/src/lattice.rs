//! Geometry of the recombining trinomial grid.
//!
//! Layer `k` holds the nodes `z = -k..=k`; node `z` carries the lattice price
//! `s·exp(a·z)` where `a = σ̄·sqrt((T - t0)/n)`. Prices are never stored per
//! node, they are recomputed from the signed index on demand.

use crate::error::{Error, Result};

/// Start time, maturity, step count and spot of one lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub t0: f64,
    pub maturity: f64,
    pub n: usize,
    pub spot: f64,
}

impl GridParams {
    pub fn new(t0: f64, maturity: f64, n: usize, spot: f64) -> Result<Self> {
        let p = Self { t0, maturity, n, spot };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.maturity.is_finite()) {
            return Err(Error::InvalidParams("times must be finite".into()));
        }
        if self.t0 < 0.0 {
            return Err(Error::InvalidParams(format!("t0 = {} must be >= 0", self.t0)));
        }
        if self.maturity <= 0.0 {
            return Err(Error::InvalidParams(format!("maturity = {} must be > 0", self.maturity)));
        }
        if self.t0 >= self.maturity {
            return Err(Error::InvalidParams(format!("t0 = {} must be < maturity = {}", self.t0, self.maturity)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be >= 1".into()));
        }
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(Error::InvalidParams(format!("spot = {} must be > 0", self.spot)));
        }
        Ok(())
    }

    /// Time step `(T - t0)/n`.
    pub fn dt(&self) -> f64 {
        (self.maturity - self.t0) / self.n as f64
    }

    /// Total number of nodes in the triangular grid, `(n+1)²`.
    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }
}

/// Log-price increment between neighbouring nodes of a layer.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogStep(f64);

impl LogStep {
    /// Wraps a raw increment; `a` must be positive and finite.
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Self(a))
        } else {
            Err(Error::InvalidParams(format!("log step a = {a} must be > 0")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

pub fn step_size(params: &GridParams, sigma_high: f64) -> Result<LogStep> {
    params.validate()?;
    if !(sigma_high > 0.0 && sigma_high.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma_high = {sigma_high} must be > 0")));
    }
    LogStep::new(sigma_high * params.dt().sqrt())
}

#[inline]
pub fn node_value(s: f64, a: LogStep, z: i64) -> f64 {
    s * (a.0 * z as f64).exp()
}

/// Time of layer `k`. Layer `n` is pinned to the maturity itself.
pub fn layer_time(params: &GridParams, k: usize) -> Result<f64> {
    if k > params.n {
        return Err(Error::IndexOutOfRange(format!("layer {k} > n = {}", params.n)));
    }
    Ok(layer_time_unchecked(params, k))
}

#[inline]
pub(crate) fn layer_time_unchecked(params: &GridParams, k: usize) -> f64 {
    if k == params.n {
        params.maturity
    } else {
        params.t0 + k as f64 * params.dt()
    }
}
