//! Game option payoffs on the discounted price scale.
//!
//! A game option pays the holder `f` when the holder exercises and `g ≥ f`
//! when the writer cancels; `h` is a running payment rate. The built-in game
//! put and call carry undiscounted payoffs
//!
//! ```text
//! put:  f̂(x) = (K - x)⁺,  ĝ(x) = C·(K - x)⁺ + δ
//! call: f̂(x) = (x - K)⁺,  ĝ(x) = C·(x - K)⁺ + δ
//! ```
//!
//! and are moved onto the discounted lattice by `f(t, x) = e^{-rt}·f̂(e^{rt}·x)`
//! (same for `g`), with `h ≡ 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{layer_time, node_value, GridParams, LogStep};

pub type PayoffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Put,
    Call,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOptionSpec {
    pub kind: OptionKind,
    pub strike: f64,
    pub penalty: f64,
    pub penalty_factor: f64,
    pub rate: f64,
}

impl GameOptionSpec {
    pub fn new(kind: OptionKind, strike: f64, penalty: f64, penalty_factor: f64, rate: f64) -> Result<Self> {
        let s = Self { kind, strike, penalty, penalty_factor, rate };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParams(format!("{what} = {v} out of range")));
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return bad("strike", self.strike);
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad("penalty", self.penalty);
        }
        if !(self.penalty_factor >= 1.0 && self.penalty_factor.is_finite()) {
            return bad("penalty_factor", self.penalty_factor);
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return bad("rate", self.rate);
        }
        Ok(())
    }

    /// Undiscounted intrinsic value `f̂(x)`.
    pub fn intrinsic(&self, x: f64) -> f64 {
        match self.kind {
            OptionKind::Put => (self.strike - x).max(0.0),
            OptionKind::Call => (x - self.strike).max(0.0),
        }
    }
}

/// The `(f, g, h)` triple evaluated on `(time, lattice price)`.
#[derive(Clone)]
pub struct DiscountedPayoffs {
    lower: PayoffFn,
    upper: PayoffFn,
    running: PayoffFn,
}

impl fmt::Debug for DiscountedPayoffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscountedPayoffs").finish_non_exhaustive()
    }
}

impl DiscountedPayoffs {
    /// Arbitrary caller-supplied triple. The functions must be pure.
    pub fn from_fns<F, G, H>(f: F, g: G, h: H) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { lower: Arc::new(f), upper: Arc::new(g), running: Arc::new(h) }
    }

    /// `f = g = c`, `h ≡ 0`.
    pub fn constant(c: f64) -> Self {
        Self::from_fns(move |_, _| c, move |_, _| c, |_, _| 0.0)
    }

    /// Holder payoff `f(t, x)`.
    #[inline]
    pub fn f(&self, t: f64, x: f64) -> f64 {
        (self.lower)(t, x)
    }

    /// Writer payoff `g(t, x)`.
    #[inline]
    pub fn g(&self, t: f64, x: f64) -> f64 {
        (self.upper)(t, x)
    }

    /// Running rate `h(t, x)`.
    #[inline]
    pub fn h(&self, t: f64, x: f64) -> f64 {
        (self.running)(t, x)
    }

    /// Same triple with `c` added to both `f` and `g`.
    pub fn shifted(&self, c: f64) -> Self {
        let (f, g) = (self.lower.clone(), self.upper.clone());
        Self {
            lower: Arc::new(move |t, x| f(t, x) + c),
            upper: Arc::new(move |t, x| g(t, x) + c),
            running: self.running.clone(),
        }
    }
}

pub fn make_discounted(spec: &GameOptionSpec) -> DiscountedPayoffs {
    let spec = *spec;
    let lower = move |t: f64, x: f64| {
        let growth = (spec.rate * t).exp();
        spec.intrinsic(growth * x) / growth
    };
    let upper = move |t: f64, x: f64| {
        let growth = (spec.rate * t).exp();
        (spec.penalty_factor * spec.intrinsic(growth * x) + spec.penalty) / growth
    };
    DiscountedPayoffs::from_fns(lower, upper, |_, _| 0.0)
}

/// Worst `g - f` found on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderReport {
    pub k: usize,
    pub z: i64,
    pub f: f64,
    pub g: f64,
}

impl OrderReport {
    pub fn gap(&self) -> f64 {
        self.g - self.f
    }
}

impl From<OrderReport> for Error {
    fn from(r: OrderReport) -> Self {
        Error::OrderViolation { k: r.k, z: r.z, f: r.f, g: r.g }
    }
}

const ORDER_SLACK: f64 = 1e-12;

/// Checks `g ≥ f` at every node `(k, z)` of the lattice; on failure returns
/// the node with the most negative gap.
pub fn validate_order(p: &DiscountedPayoffs, params: &GridParams, a: LogStep) -> std::result::Result<(), OrderReport> {
    let mut worst: Option<OrderReport> = None;
    for k in 0..=params.n {
        let t = layer_time(params, k).expect("k within 0..=n");
        for z in -(k as i64)..=(k as i64) {
            let x = node_value(params.spot, a, z);
            let (f, g) = (p.f(t, x), p.g(t, x));
            let gap = g - f;
            if worst.is_none_or(|w| gap < w.gap() || gap.is_nan()) {
                worst = Some(OrderReport { k, z, f, g });
            }
        }
    }
    match worst {
        Some(w) if w.gap().is_nan() || w.gap() < -ORDER_SLACK => Err(w),
        _ => Ok(()),
    }
}
