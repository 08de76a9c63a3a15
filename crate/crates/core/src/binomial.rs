//! Single-volatility CRR comparator.
//!
//! Works on the same discounted price scale as the robust solver: with
//! `u = e^{σ√Δ}`, `d = 1/u` and `q = (1 - d)/(u - d)` the lattice price is a
//! martingale, and the game recursion is
//! `J_k = max(f_k, min(g_k, Δ·h_k + q·J_{k+1}^up + (1-q)·J_{k+1}^down))`.
//!
//! Binomial layer `k` occupies the trinomial indices `z = -k, -k+2, ..., k`
//! of a grid with log step `σ√Δ`, so its nodes can be compared one-to-one
//! with a robust grid whose `σ̄ = σ`.

use crate::error::{Error, Result};
use crate::lattice::{step_size, GridParams};
use crate::payoffs::DiscountedPayoffs;
use crate::solver::{backward, GameValue, LatticeKind, Retention, ValueGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialParams {
    pub sigma: f64,
    pub params: GridParams,
}

impl BinomialParams {
    pub fn new(sigma: f64, params: GridParams) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma = {sigma} must be > 0")));
        }
        params.validate()?;
        Ok(Self { sigma, params })
    }
}

pub fn crr_solve(bp: &BinomialParams, payoffs: &DiscountedPayoffs, retention: Retention) -> Result<ValueGrid> {
    let a = step_size(&bp.params, bp.sigma)?;
    let u = a.get().exp();
    let d = 1.0 / u;
    let q = (1.0 - d) / (u - d);
    backward(LatticeKind::Binomial, &bp.params, a, payoffs, retention, |next, j| q * next[j + 1] + (1.0 - q) * next[j])
}

pub fn crr_game_price(bp: &BinomialParams, payoffs: &DiscountedPayoffs) -> Result<GameValue> {
    Ok(GameValue { value: crr_solve(bp, payoffs, Retention::Rolling)?.root() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoffs::{make_discounted, GameOptionSpec, OptionKind};

    fn bp(sigma: f64, t: f64, n: usize, s: f64) -> BinomialParams {
        BinomialParams::new(sigma, GridParams::new(0.0, t, n, s).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_payoffs() {
        let v = crr_game_price(&bp(0.3, 1.0, 25, 100.0), &DiscountedPayoffs::constant(4.0)).unwrap();
        assert!((v.value - 4.0).abs() < 1e-12);
        let id = DiscountedPayoffs::from_fns(|_, x| x, |_, x| x, |_, _| 0.0);
        let v = crr_game_price(&bp(0.3, 1.0, 25, 100.0), &id).unwrap();
        assert!((v.value - 100.0).abs() < 1e-9);
    }

    #[test]
    fn table_comparators() {
        let put = make_discounted(&GameOptionSpec::new(OptionKind::Put, 100.0, 5.0, 1.0, 0.06).unwrap());
        let v = crr_game_price(&bp(0.4, 0.5, 1200, 80.0), &put).unwrap().value;
        assert!((v - 20.6).abs() < 0.1);
        let call = make_discounted(&GameOptionSpec::new(OptionKind::Call, 100.0, 5.0, 1.0, 0.06).unwrap());
        let v = crr_game_price(&bp(0.4, 0.5, 200, 80.0), &call).unwrap().value;
        assert!((v - 2.0625).abs() < 5e-5);
    }

    #[test]
    fn grid_layout() {
        let put = make_discounted(&GameOptionSpec::new(OptionKind::Put, 100.0, 5.0, 1.0, 0.06).unwrap());
        let g = crr_solve(&bp(0.4, 0.5, 10, 100.0), &put, Retention::Full).unwrap();
        assert_eq!(g.kind(), LatticeKind::Binomial);
        for k in 0..=10 {
            assert_eq!(g.layer(k).unwrap().len(), k + 1);
            let zs: Vec<i64> = g.z_range(k).collect();
            assert_eq!(zs.len(), k + 1);
            assert_eq!(g.index_of(k, k as i64), Some(k));
            if k > 0 {
                assert_eq!(g.index_of(k, -(k as i64) + 1), None);
            }
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(BinomialParams::new(0.0, GridParams::new(0.0, 1.0, 3, 1.0).unwrap()).is_err());
    }
}
