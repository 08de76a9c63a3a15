//! Optimal stopping regions read off a completed value grid.
//!
//! The writer cancels at the first node where the value meets the upper
//! payoff (`J = g`); the holder exercises where `J = f`. Membership is decided
//! by value equality within `tol·(1 + (g - f))`, so a node where `g` ties the
//! continuation value counts as a stop node.
//!
//! For a game call the writer's region has the shape
//! `{t ≤ T₁, K ≤ x ≤ b(t)} ∪ [T₁, T₂]×{K}` in stock-price coordinates. On the
//! lattice the level `{K}` is represented, layer by layer, by the lowest node
//! whose stock price is at least `K`.

use crate::error::{Error, Result};
use crate::payoffs::DiscountedPayoffs;
use crate::solver::ValueGrid;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFlag {
    SellerStop,
    BuyerStop,
    Both,
    Continue,
}

impl NodeFlag {
    pub fn code(self) -> &'static str {
        match self {
            NodeFlag::SellerStop => "S",
            NodeFlag::BuyerStop => "B",
            NodeFlag::Both => "SB",
            NodeFlag::Continue => "C",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "S" => NodeFlag::SellerStop,
            "B" => NodeFlag::BuyerStop,
            "SB" => NodeFlag::Both,
            "C" => NodeFlag::Continue,
            _ => return None,
        })
    }

    pub fn seller_stops(self) -> bool {
        matches!(self, NodeFlag::SellerStop | NodeFlag::Both)
    }

    pub fn buyer_stops(self) -> bool {
        matches!(self, NodeFlag::BuyerStop | NodeFlag::Both)
    }
}

/// Flags laid out like the grid layers: `layers[k][i]` belongs to node
/// `grid.z_at(k, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFlags {
    pub layers: Vec<Vec<NodeFlag>>,
}

impl RegionFlags {
    pub fn count(&self, pred: impl Fn(NodeFlag) -> bool) -> usize {
        self.layers.iter().flatten().filter(|f| pred(**f)).count()
    }
}

pub fn classify(grid: &ValueGrid, payoffs: &DiscountedPayoffs, tol: f64) -> Result<RegionFlags> {
    if !grid.is_full() {
        return Err(Error::MissingGrid);
    }
    let mut layers = Vec::with_capacity(grid.n() + 1);
    for k in 0..=grid.n() {
        let t = grid.time(k);
        let values = grid.layer(k).expect("full grid");
        let flags = grid
            .z_range(k)
            .zip(values)
            .map(|(z, &j)| {
                let x = grid.price(z);
                let (f, g) = (payoffs.f(t, x), payoffs.g(t, x));
                let slack = tol * (1.0 + (g - f).abs());
                match ((j - g).abs() <= slack, (j - f).abs() <= slack) {
                    (true, true) => NodeFlag::Both,
                    (true, false) => NodeFlag::SellerStop,
                    (false, true) => NodeFlag::BuyerStop,
                    (false, false) => NodeFlag::Continue,
                }
            })
            .collect();
        layers.push(flags);
    }
    Ok(RegionFlags { layers })
}

/// Strike and rate used to express lattice nodes as stock prices `e^{rt}·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub strike: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRegion {
    pub flags: RegionFlags,
    /// Per layer `(t_k, b)`: the largest seller-stop stock price, `None` if the
    /// layer has no seller-stop node.
    pub boundary: Vec<(f64, Option<f64>)>,
    /// Last layer time whose seller-stop set reaches above the `{K}` node.
    pub t1: Option<f64>,
    /// Last layer time with a nonempty seller-stop set.
    pub t2: Option<f64>,
    /// Index of the `{K}` node per layer, if any node sits at or above `K`.
    pub strike_nodes: Vec<Option<i64>>,
}

impl StoppingRegion {
    /// Defined boundary points `(t_k, b(t_k))`, in time order.
    pub fn boundary_points(&self) -> Vec<(f64, f64)> {
        self.boundary.iter().filter_map(|&(t, b)| b.map(|b| (t, b))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.t2.is_none()
    }
}

fn stock_price(grid: &ValueGrid, frame: &BoundaryFrame, k: usize, z: i64) -> f64 {
    (frame.rate * grid.time(k)).exp() * grid.price(z)
}

pub fn seller_boundary(flags: &RegionFlags, grid: &ValueGrid, frame: &BoundaryFrame) -> StoppingRegion {
    let mut boundary = Vec::with_capacity(flags.layers.len());
    let mut strike_nodes = Vec::with_capacity(flags.layers.len());
    let (mut t1, mut t2) = (None, None);
    for (k, layer) in flags.layers.iter().enumerate() {
        let t = grid.time(k);
        let strike_z = grid.z_range(k).find(|&z| stock_price(grid, frame, k, z) >= frame.strike * (1.0 - 1e-12));
        strike_nodes.push(strike_z);

        let stops: Vec<i64> = grid.z_range(k).zip(layer).filter(|(_, f)| f.seller_stops()).map(|(z, _)| z).collect();
        let b = stops.iter().max().map(|&z| stock_price(grid, frame, k, z));
        boundary.push((t, b));
        if !stops.is_empty() {
            t2 = Some(t);
            if strike_z.is_some_and(|kz| stops.iter().any(|&z| z > kz)) {
                t1 = Some(t);
            }
        }
    }
    StoppingRegion { flags: flags.clone(), boundary, t1, t2, strike_nodes }
}

/// Layers `k` (with `t_k ≤ T₁`) whose seller-stop nodes at or above the
/// `{K}` node do not form one contiguous run starting at that node.
pub fn band_gaps(region: &StoppingRegion, grid: &ValueGrid) -> Vec<usize> {
    let Some(t1) = region.t1 else { return Vec::new() };
    let mut bad = Vec::new();
    for (k, layer) in region.flags.layers.iter().enumerate() {
        if grid.time(k) > t1 {
            break;
        }
        let Some(kz) = region.strike_nodes[k] else { continue };
        let run: Vec<bool> =
            grid.z_range(k).zip(layer).filter(|(z, _)| *z >= kz).map(|(_, f)| f.seller_stops()).collect();
        if !run.iter().any(|&s| s) {
            continue;
        }
        let first_stop = run.iter().position(|&s| s).unwrap();
        let last_stop = run.iter().rposition(|&s| s).unwrap();
        if first_stop != 0 || run[first_stop..=last_stop].iter().any(|&s| !s) {
            bad.push(k);
        }
    }
    bad
}
