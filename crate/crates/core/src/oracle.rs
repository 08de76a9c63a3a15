//! Brute-force valuation of the robust game on small instances.
//!
//! Nothing here reuses the lattice kernel: the tree is non-recombining (one
//! node per move history), transition probabilities are recomputed from the
//! raw parameters, and the worst case is found by scanning a grid of `p`
//! values rather than by comparing the two endpoints.
//!
//! [`brute_force_value`] runs backward induction over the history tree.
//! [`strategy_enumeration_value`] goes further back to the definition of the
//! lower value: it enumerates adapted `p`-policies and both players' stopping
//! rules and sums path probabilities explicitly.

use crate::error::{Error, Result};
use crate::lattice::GridParams;
use crate::payoffs::DiscountedPayoffs;
use crate::solver::GameValue;
use crate::uncertainty::VolatilityInterval;

pub const MAX_TREE_STEPS: usize = 10;
pub const MAX_ENUMERATION_STEPS: usize = 2;
const MAX_ENUMERATION_WORK: f64 = 5e7;

/// One node of the non-recombining tree.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryNode {
    pub path: Vec<i8>,
    pub price: f64,
    pub time: f64,
}

/// Raw model constants, derived without the lattice helpers.
struct Model {
    spot: f64,
    t0: f64,
    maturity: f64,
    n: usize,
    log_step: f64,
    p_grid: Vec<f64>,
}

impl Model {
    fn new(params: &GridParams, interval: &VolatilityInterval, p_points: usize) -> Result<Self> {
        params.validate()?;
        if p_points < 2 {
            return Err(Error::InvalidParams(format!("p grid needs >= 2 points, got {p_points}")));
        }
        let horizon = params.maturity - params.t0;
        let log_step = interval.sigma_high() * (horizon / params.n as f64).sqrt();
        let lo = interval.sigma_low() * interval.sigma_low() / (interval.sigma_high() * interval.sigma_high())
            * (-4.0 * log_step).exp();
        let p_grid = (0..p_points)
            .map(|i| if i == p_points - 1 { 1.0 } else { lo + (1.0 - lo) * (i as f64) / ((p_points - 1) as f64) })
            .collect();
        Ok(Self { spot: params.spot, t0: params.t0, maturity: params.maturity, n: params.n, log_step, p_grid })
    }

    fn dt(&self) -> f64 {
        (self.maturity - self.t0) / self.n as f64
    }

    fn node(&self, path: Vec<i8>) -> HistoryNode {
        let level: i64 = path.iter().map(|&m| m as i64).sum();
        let time = if path.len() == self.n { self.maturity } else { self.t0 + path.len() as f64 * self.dt() };
        HistoryNode { price: self.spot * (self.log_step * level as f64).exp(), time, path }
    }

    /// Probability of `mv` in {-1, 0, +1} under parameter `p`.
    fn prob(&self, p: f64, mv: i8) -> f64 {
        let e = self.log_step.exp();
        match mv {
            1 => p / (1.0 + e),
            -1 => p * e / (1.0 + e),
            _ => 1.0 - p,
        }
    }
}

const MOVES: [i8; 3] = [-1, 0, 1];

pub fn brute_force_value(
    params: &GridParams,
    payoffs: &DiscountedPayoffs,
    interval: &VolatilityInterval,
    p_points: usize,
) -> Result<GameValue> {
    if params.n > MAX_TREE_STEPS {
        return Err(Error::SizeLimit(format!("history tree limited to n <= {MAX_TREE_STEPS}, got {}", params.n)));
    }
    let model = Model::new(params, interval, p_points)?;
    let root = model.node(Vec::new());
    Ok(GameValue { value: tree_value(&model, payoffs, &root) })
}

fn tree_value(model: &Model, payoffs: &DiscountedPayoffs, node: &HistoryNode) -> f64 {
    let exercise = payoffs.f(node.time, node.price);
    if node.path.len() == model.n {
        return exercise;
    }
    let children: Vec<(i8, f64)> = MOVES
        .iter()
        .map(|&mv| {
            let mut path = node.path.clone();
            path.push(mv);
            (mv, tree_value(model, payoffs, &model.node(path)))
        })
        .collect();
    let worst_case = model
        .p_grid
        .iter()
        .map(|&p| children.iter().map(|&(mv, v)| model.prob(p, mv) * v).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let carry_on = model.dt() * payoffs.h(node.time, node.price) + worst_case;
    // holder moves first; if the holder waits the writer may cancel
    let cancel = payoffs.g(node.time, node.price);
    let writer = if cancel <= carry_on { cancel } else { carry_on };
    if exercise >= writer {
        exercise
    } else {
        writer
    }
}

/// Decision nodes are the histories of length `0..n`, numbered level by level
/// with the moves read as base-3 digits.
fn history_id(path: &[i8]) -> usize {
    let offset = (3usize.pow(path.len() as u32) - 1) / 2;
    offset + path.iter().fold(0usize, |acc, &m| acc * 3 + (m + 1) as usize)
}

pub fn strategy_enumeration_value(
    params: &GridParams,
    payoffs: &DiscountedPayoffs,
    interval: &VolatilityInterval,
    p_points: usize,
) -> Result<GameValue> {
    if params.n > MAX_ENUMERATION_STEPS {
        return Err(Error::SizeLimit(format!(
            "strategy enumeration limited to n <= {MAX_ENUMERATION_STEPS}, got {}",
            params.n
        )));
    }
    let model = Model::new(params, interval, p_points)?;
    let n = model.n;
    let decisions = (3usize.pow(n as u32) - 1) / 2;
    let m = model.p_grid.len();
    let work = (m as f64).powi(decisions as i32) * 4f64.powi(decisions as i32) * 3f64.powi(n as i32);
    if work > MAX_ENUMERATION_WORK {
        return Err(Error::SizeLimit(format!("enumeration work {work:e} too large; use a coarser p grid")));
    }

    // every complete path with its nodes along the way
    let paths: Vec<Vec<HistoryNode>> = (0..3usize.pow(n as u32))
        .map(|code| {
            let mut moves = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                moves.push(MOVES[c % 3]);
                c /= 3;
            }
            moves.reverse();
            (0..=n).map(|k| model.node(moves[..k].to_vec())).collect()
        })
        .collect();

    let rules = 1usize << decisions;
    let stop_time = |rule: usize, nodes: &[HistoryNode]| -> usize {
        (0..n).find(|&k| rule >> history_id(&nodes[k].path) & 1 == 1).unwrap_or(n)
    };
    let dt = model.dt();

    let mut best = f64::NEG_INFINITY;
    let mut policy = vec![0usize; decisions];
    loop {
        let weights: Vec<f64> = paths
            .iter()
            .map(|nodes| {
                (1..=n)
                    .map(|k| {
                        let p = model.p_grid[policy[history_id(&nodes[k - 1].path)]];
                        model.prob(p, nodes[k].path[k - 1])
                    })
                    .product()
            })
            .collect();

        let mut lower = f64::NEG_INFINITY;
        for holder in 0..rules {
            let mut worst = f64::INFINITY;
            for writer in 0..rules {
                let mut expectation = 0.0;
                for (nodes, w) in paths.iter().zip(&weights) {
                    let eta = stop_time(holder, nodes);
                    let zeta = stop_time(writer, nodes);
                    let end = eta.min(zeta);
                    let running: f64 = nodes[..end].iter().map(|x| dt * payoffs.h(x.time, x.price)).sum();
                    let terminal = if eta <= zeta {
                        payoffs.f(nodes[eta].time, nodes[eta].price)
                    } else {
                        payoffs.g(nodes[zeta].time, nodes[zeta].price)
                    };
                    expectation += w * (terminal + running);
                }
                worst = worst.min(expectation);
            }
            lower = lower.max(worst);
        }
        best = best.max(lower);

        // next policy in lexicographic order
        let mut i = 0;
        loop {
            if i == decisions {
                return Ok(GameValue { value: best });
            }
            policy[i] += 1;
            if policy[i] < m {
                break;
            }
            policy[i] = 0;
            i += 1;
        }
    }
}
