//! One-step transition laws of the lattice under volatility uncertainty.
//!
//! Every admissible law is indexed by a scalar `p`: the process moves up with
//! probability `p/(1+e^a)`, down with probability `p·e^a/(1+e^a)` and stays
//! with probability `1-p`. Any such law keeps the lattice price a martingale,
//! and its normalized squared log-return equals `σ̄²·p`, so `p` ranges over
//! `[e^{-4a}·σ̲²/σ̄², 1]`.
//!
//! `σ̲ = 0` is accepted (`p_min = 0`, the stock may freeze for a step). The
//! convergence bound of the scheme is only established for `σ̲ > 0`.

use crate::error::{Error, Result};
use crate::lattice::LogStep;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolatilityInterval {
    sigma_low: f64,
    sigma_high: f64,
}

impl VolatilityInterval {
    pub fn new(sigma_low: f64, sigma_high: f64) -> Result<Self> {
        if !(sigma_high > 0.0 && sigma_high.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma_high = {sigma_high} must be > 0")));
        }
        if !(sigma_low >= 0.0 && sigma_low <= sigma_high) {
            return Err(Error::InvalidParams(format!(
                "sigma_low = {sigma_low} must lie in [0, sigma_high = {sigma_high}]"
            )));
        }
        Ok(Self { sigma_low, sigma_high })
    }

    /// Degenerate interval `[σ, σ]`.
    pub fn point(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn sigma_low(&self) -> f64 {
        self.sigma_low
    }

    pub fn sigma_high(&self) -> f64 {
        self.sigma_high
    }
}

/// Admissible range `[p_min, 1]` of the transition parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRange {
    pub p_min: f64,
    pub p_max: f64,
}

impl PRange {
    pub fn contains(&self, p: f64) -> bool {
        p >= self.p_min && p <= self.p_max
    }

    /// `count` uniformly spaced values from `p_min` to `p_max`, endpoints included.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        assert!(count >= 2, "p grid needs both endpoints");
        let w = self.p_max - self.p_min;
        (0..count)
            .map(|i| if i + 1 == count { self.p_max } else { self.p_min + w * i as f64 / (count - 1) as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTriple {
    pub p_up: f64,
    pub p_stay: f64,
    pub p_down: f64,
}

impl ProbabilityTriple {
    /// `e^a·p_up + e^{-a}·p_down + p_stay`; equals 1 for every admissible law.
    pub fn expected_ratio(&self, a: LogStep) -> f64 {
        a.get().exp() * self.p_up + (-a.get()).exp() * self.p_down + self.p_stay
    }
}

pub fn p_range(interval: &VolatilityInterval, a: LogStep) -> PRange {
    let ratio = interval.sigma_low / interval.sigma_high;
    PRange { p_min: (-4.0 * a.get()).exp() * ratio * ratio, p_max: 1.0 }
}

pub fn triple(p: f64, a: LogStep) -> Result<ProbabilityTriple> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    let ea = a.get().exp();
    let p_up = p / (1.0 + ea);
    Ok(ProbabilityTriple { p_up, p_stay: 1.0 - p, p_down: p * ea / (1.0 + ea) })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(x: f64) -> LogStep {
        LogStep::new(x).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(VolatilityInterval::new(0.0, 0.4).is_ok());
        assert!(VolatilityInterval::new(0.5, 0.4).is_err());
        assert!(VolatilityInterval::new(-0.1, 0.4).is_err());
        assert!(VolatilityInterval::new(0.0, 0.0).is_err());
        assert!(VolatilityInterval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn p_range_examples() {
        let r = p_range(&VolatilityInterval::new(0.0, 0.4).unwrap(), a(0.02));
        assert_eq!(r.p_min, 0.0);
        assert_eq!(r.p_max, 1.0);

        let r = p_range(&VolatilityInterval::point(0.4).unwrap(), a(0.02));
        assert!((r.p_min - 0.923_116_346_386_635_782_9).abs() < 1e-15);

        let r = p_range(&VolatilityInterval::new(0.2, 0.4).unwrap(), a(0.02));
        assert!((r.p_min - 0.230_779_086_596_658_945_7).abs() < 1e-15);
    }

    #[test]
    fn triple_examples() {
        let t = triple(0.0, a(0.02)).unwrap();
        assert_eq!((t.p_up, t.p_stay, t.p_down), (0.0, 1.0, 0.0));

        let t = triple(1.0, a(0.02)).unwrap();
        assert!((t.p_up - 0.495_000_166_660_000_269_8).abs() < 1e-15);
        assert!((t.p_down - 0.504_999_833_339_999_730_2).abs() < 1e-15);
        assert_eq!(t.p_stay, 0.0);
        assert!((t.p_up + t.p_down - 1.0).abs() < 1e-15);

        assert_eq!(triple(1.5, a(0.02)), Err(Error::Domain(1.5)));
        assert_eq!(triple(-0.01, a(0.02)), Err(Error::Domain(-0.01)));
    }

    #[test]
    fn grid_hits_both_endpoints() {
        let r = PRange { p_min: 0.3, p_max: 1.0 };
        let g = r.grid(101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.3);
        assert_eq!(g[100], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn triple_is_a_martingale_law(p in 0.0f64..=1.0, x in 1e-6f64..=2.0) {
            let t = triple(p, a(x)).unwrap();
            prop_assert!((t.p_up + t.p_stay + t.p_down - 1.0).abs() <= 1e-12);
            prop_assert!((t.expected_ratio(a(x)) - 1.0).abs() <= 1e-12);
            prop_assert!(t.p_up >= 0.0 && t.p_down >= 0.0 && t.p_stay >= 0.0);
        }

        #[test]
        fn second_moment_lies_in_band(lo in 0.0f64..1.0, hi in 0.01f64..1.0, x in 1e-4f64..0.5, u in 0.0f64..=1.0) {
            let hi = hi.max(lo + 1e-3);
            let iv = VolatilityInterval::new(lo, hi).unwrap();
            let r = p_range(&iv, a(x));
            let p = r.p_min + u * (r.p_max - r.p_min);
            let t = triple(p, a(x)).unwrap();
            // normalized squared log-return: σ̄²·(p_up + p_down) = σ̄²·p
            let m = hi * hi * (t.p_up + t.p_down);
            prop_assert!((m - hi * hi * p).abs() < 1e-12);
            prop_assert!(m >= lo * lo * (-4.0 * x).exp() - 1e-12);
            prop_assert!(m <= hi * hi + 1e-12);
        }

        #[test]
        fn p_min_monotone_in_sigma_low(l1 in 0.0f64..0.5, l2 in 0.0f64..0.5, x in 1e-4f64..1.0) {
            let (lo, hi_low) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
            let r_lo = p_range(&VolatilityInterval::new(lo, 0.5).unwrap(), a(x));
            let r_hi = p_range(&VolatilityInterval::new(hi_low, 0.5).unwrap(), a(x));
            prop_assert!(r_lo.p_min <= r_hi.p_min);
        }
    }
}
