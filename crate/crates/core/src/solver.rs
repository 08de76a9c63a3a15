//! Robust backward recursion on the trinomial lattice.
//!
//! With `Δ = (T - t0)/n`, `t_k = t0 + kΔ` and `x_z = s·e^{a·z}`:
//!
//! ```text
//! J_n(z) = f(T, x_z)
//! J_k(z) = max( f(t_k, x_z), min( g(t_k, x_z), Δ·h(t_k, x_z) + C_k(z) ) )
//! C_k(z) = max_{p ∈ {p_min, 1}} (1-p)·J_{k+1}(z) + p/(1+e^a)·J_{k+1}(z+1) + p·e^a/(1+e^a)·J_{k+1}(z-1)
//! ```
//!
//! The continuation is linear in `p`, so its supremum over `[p_min, 1]` sits at
//! an endpoint. When `f = g` at a node the outer `max` picks `f`: a
//! simultaneous stop pays the holder's (low) payoff.

use crate::error::{Error, Result};
use crate::lattice::{layer_time_unchecked, node_value, step_size, GridParams, LogStep};
use crate::payoffs::{DiscountedPayoffs, OrderReport};
use crate::uncertainty::{p_range, PRange, VolatilityInterval};

/// Order slack shared with [`crate::payoffs::validate_order`].
const ORDER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// Layer `k` holds `z = -k, -k+1, ..., k`.
    Trinomial,
    /// Layer `k` holds `z = -k, -k+2, ..., k`.
    Binomial,
}

impl LatticeKind {
    fn stride(self) -> i64 {
        match self {
            LatticeKind::Trinomial => 1,
            LatticeKind::Binomial => 2,
        }
    }

    pub fn layer_len(self, k: usize) -> usize {
        match self {
            LatticeKind::Trinomial => 2 * k + 1,
            LatticeKind::Binomial => k + 1,
        }
    }
}

/// How much of the grid a solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    /// Two working layers; only `J_0` survives.
    #[default]
    Rolling,
    /// Every layer plus the continuation values.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    pub retention: Retention,
    /// Replace the endpoint maximum by a scan over this many uniformly spaced
    /// `p` values. Only used to cross-check the endpoint reduction.
    pub p_scan: Option<usize>,
}

/// Triangular array of recursion values.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    kind: LatticeKind,
    params: GridParams,
    step: LogStep,
    layers: Vec<Vec<f64>>,
    continuation: Option<Vec<Vec<f64>>>,
}

impl ValueGrid {
    pub(crate) fn from_parts(
        kind: LatticeKind,
        params: GridParams,
        step: LogStep,
        layers: Vec<Vec<f64>>,
        continuation: Option<Vec<Vec<f64>>>,
    ) -> Self {
        Self { kind, params, step, layers, continuation }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn step(&self) -> LogStep {
        self.step
    }

    /// True when every layer was retained.
    pub fn is_full(&self) -> bool {
        self.layers.len() == self.params.n + 1
    }

    /// Values of layer `k`, ordered by ascending `z`.
    pub fn layer(&self, k: usize) -> Option<&[f64]> {
        if self.is_full() {
            self.layers.get(k).map(Vec::as_slice)
        } else if k == 0 {
            Some(&self.layers[0])
        } else {
            None
        }
    }

    /// Continuation values of layer `k < n`, ordered like [`ValueGrid::layer`].
    pub fn continuation_layer(&self, k: usize) -> Option<&[f64]> {
        self.continuation.as_ref()?.get(k).map(Vec::as_slice)
    }

    /// Grid index of the `i`-th entry of layer `k`.
    #[inline]
    pub fn z_at(&self, k: usize, i: usize) -> i64 {
        -(k as i64) + self.kind.stride() * i as i64
    }

    /// Entry position of index `z` in layer `k`, if the layer has such a node.
    pub fn index_of(&self, k: usize, z: i64) -> Option<usize> {
        let off = z + k as i64;
        let stride = self.kind.stride();
        if off < 0 || off > 2 * k as i64 || off % stride != 0 {
            None
        } else {
            Some((off / stride) as usize)
        }
    }

    /// Grid indices present in layer `k`.
    pub fn z_range(&self, k: usize) -> impl Iterator<Item = i64> {
        let stride = self.kind.stride() as usize;
        (-(k as i64)..=k as i64).step_by(stride)
    }

    /// Lattice (discounted) price of node `z`.
    pub fn price(&self, z: i64) -> f64 {
        node_value(self.params.spot, self.step, z)
    }

    pub fn time(&self, k: usize) -> f64 {
        layer_time_unchecked(&self.params, k.min(self.params.n))
    }

    /// `J_0(0)`.
    pub fn root(&self) -> f64 {
        self.layers[0][0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameValue {
    pub value: f64,
}

pub fn value(grid: &ValueGrid) -> GameValue {
    GameValue { value: grid.root() }
}

/// Per-solve constants of the continuation step.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    p_min: f64,
    w_up: f64,
    w_down: f64,
}

impl Kernel {
    fn new(range: PRange, a: LogStep) -> Self {
        let ea = a.get().exp();
        Self { p_min: range.p_min, w_up: 1.0 / (1.0 + ea), w_down: ea / (1.0 + ea) }
    }

    #[inline]
    fn at(&self, p: f64, down: f64, mid: f64, up: f64) -> f64 {
        (1.0 - p) * mid + p * self.w_up * up + p * self.w_down * down
    }

    #[inline]
    fn endpoints(&self, down: f64, mid: f64, up: f64) -> f64 {
        self.at(self.p_min, down, mid, up).max(self.at(1.0, down, mid, up))
    }
}

/// Worst-case one-step expectation at node `z`; `next_layer` holds
/// `J_{k+1}(-m..=m)` in ascending order.
pub fn continuation(next_layer: &[f64], z: i64, range: PRange, a: LogStep) -> Result<f64> {
    if next_layer.len().is_multiple_of(2) {
        return Err(Error::IndexOutOfRange(format!("layer of even length {} is not centred", next_layer.len())));
    }
    let m = (next_layer.len() / 2) as i64;
    if z - 1 < -m || z + 1 > m {
        return Err(Error::IndexOutOfRange(format!("node {z} needs neighbours within -{m}..={m}")));
    }
    let i = (z + m) as usize;
    let kernel = Kernel::new(range, a);
    Ok(kernel.endpoints(next_layer[i - 1], next_layer[i], next_layer[i + 1]))
}

pub fn solve(params: &GridParams, payoffs: &DiscountedPayoffs, interval: &VolatilityInterval) -> Result<ValueGrid> {
    solve_with(params, payoffs, interval, SolveOptions::default())
}

pub fn solve_with(
    params: &GridParams,
    payoffs: &DiscountedPayoffs,
    interval: &VolatilityInterval,
    options: SolveOptions,
) -> Result<ValueGrid> {
    let a = step_size(params, interval.sigma_high())?;
    let range = p_range(interval, a);
    let kernel = Kernel::new(range, a);
    let scan = match options.p_scan {
        Some(c) if c < 2 => return Err(Error::InvalidParams(format!("p scan needs >= 2 points, got {c}"))),
        Some(c) => Some(range.grid(c)),
        None => None,
    };
    let cont_fn = |down: f64, mid: f64, up: f64| match &scan {
        None => kernel.endpoints(down, mid, up),
        Some(ps) => ps.iter().map(|&p| kernel.at(p, down, mid, up)).fold(f64::NEG_INFINITY, f64::max),
    };
    backward(LatticeKind::Trinomial, params, a, payoffs, options.retention, |next, i| {
        cont_fn(next[i], next[i + 1], next[i + 2])
    })
}

/// Shared backward sweep. `step(next, i)` returns the one-step expectation
/// for entry `i` of the current layer given the next layer.
pub(crate) fn backward<S>(
    kind: LatticeKind,
    params: &GridParams,
    a: LogStep,
    payoffs: &DiscountedPayoffs,
    retention: Retention,
    step: S,
) -> Result<ValueGrid>
where
    S: Fn(&[f64], usize) -> f64,
{
    let n = params.n;
    let s = params.spot;
    let dt = params.dt();
    let stride = kind.stride();
    let mut worst: Option<OrderReport> = None;
    let mut track = |k: usize, z: i64, f: f64, g: f64| {
        let gap = g - f;
        if worst.is_none_or(|w| gap < w.gap()) {
            worst = Some(OrderReport { k, z, f, g });
        }
    };

    let t_n = layer_time_unchecked(params, n);
    let mut next: Vec<f64> = Vec::with_capacity(kind.layer_len(n));
    for i in 0..kind.layer_len(n) {
        let z = -(n as i64) + stride * i as i64;
        let x = node_value(s, a, z);
        let (f, g) = (payoffs.f(t_n, x), payoffs.g(t_n, x));
        if !(f.is_finite() && g.is_finite()) {
            return Err(Error::NumericOverflow { k: n, z });
        }
        track(n, z, f, g);
        next.push(f);
    }

    let full = retention == Retention::Full;
    let mut layers: Vec<Vec<f64>> = Vec::new();
    let mut conts: Vec<Vec<f64>> = Vec::new();
    if full {
        layers.resize(n + 1, Vec::new());
        conts.resize(n, Vec::new());
    }

    for k in (0..n).rev() {
        let t = layer_time_unchecked(params, k);
        let len = kind.layer_len(k);
        let mut cur = Vec::with_capacity(len);
        let mut cont_layer = if full { Vec::with_capacity(len) } else { Vec::new() };
        for i in 0..len {
            let z = -(k as i64) + stride * i as i64;
            let x = node_value(s, a, z);
            let f = payoffs.f(t, x);
            let g = payoffs.g(t, x);
            let h = payoffs.h(t, x);
            if !(f.is_finite() && g.is_finite() && h.is_finite()) {
                return Err(Error::NumericOverflow { k, z });
            }
            track(k, z, f, g);
            let c = step(&next, i);
            let j = f.max(g.min(dt * h + c));
            if !j.is_finite() {
                return Err(Error::NumericOverflow { k, z });
            }
            cur.push(j);
            if full {
                cont_layer.push(c);
            }
        }
        if full {
            layers[k + 1] = std::mem::replace(&mut next, cur);
            conts[k] = cont_layer;
        } else {
            next = cur;
        }
    }

    if let Some(w) = worst {
        if w.gap().is_nan() || w.gap() < -ORDER_SLACK {
            return Err(w.into());
        }
    }

    let (layers, continuation) = if full {
        layers[0] = next;
        (layers, Some(conts))
    } else {
        (vec![next], None)
    };
    Ok(ValueGrid::from_parts(kind, *params, a, layers, continuation))
}
