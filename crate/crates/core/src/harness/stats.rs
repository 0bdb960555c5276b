use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::exact::{rat, Rational, RationalString};

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    Wilson,
}

/// A success proportion with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    /// Half-width of the interval.
    pub ci95: f64,
    pub low: f64,
    pub high: f64,
    pub method: CiMethod,
}

impl RateEstimate {
    /// Normal approximation, switching to Wilson's score interval when
    /// `p̂·trials < 10`.
    pub fn new(successes: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        if p * n < 10.0 {
            let z2 = Z95 * Z95;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
            RateEstimate {
                successes,
                trials,
                rate: p,
                ci95: half,
                low: (center - half).max(0.0),
                high: (center + half).min(1.0),
                method: CiMethod::Wilson,
            }
        } else {
            let half = Z95 * (p * (1.0 - p) / n).sqrt();
            RateEstimate {
                successes,
                trials,
                rate: p,
                ci95: half,
                low: (p - half).max(0.0),
                high: (p + half).min(1.0),
                method: CiMethod::Normal,
            }
        }
    }

    /// Standard error `√(p̂(1−p̂)/n)`.
    pub fn standard_error(&self) -> f64 {
        let n = self.trials.max(1) as f64;
        (self.rate * (1.0 - self.rate) / n).sqrt()
    }
}

/// Half-width `1.96·√(p̂(1−p̂)(1/t₀+1/t₁))` with the pooled rate `p̂`.
pub fn advantage_ci95(s0: u64, t0: u64, s1: u64, t1: u64) -> f64 {
    let (t0f, t1f) = (t0.max(1) as f64, t1.max(1) as f64);
    let p = (s0 + s1) as f64 / (t0f + t1f);
    Z95 * (p * (1.0 - p) * (1.0 / t0f + 1.0 / t1f)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirthdayBaseline {
    pub n: u64,
    pub q: u64,
    pub no_collision: RationalString,
    pub no_collision_f64: f64,
    pub collision_f64: f64,
}

/// `∏_{i=1}^{q−1} (1 − i/N)`: the chance that `q` uniform queries see no
/// repeated image.
pub fn birthday_no_collision(n: u64, q: u64) -> Result<Rational> {
    if n == 0 || q > n {
        return param(format!("birthday product needs 0 < q <= N (q={q}, N={n})"));
    }
    let mut p = Rational::one();
    for i in 1..q {
        p *= rat((n - i) as i64, n as i64);
    }
    Ok(p)
}

pub fn birthday_baseline(n: u64, q: u64) -> Result<BirthdayBaseline> {
    let exact = birthday_no_collision(n, q)?;
    let f = exact.to_f64().unwrap_or(0.0);
    Ok(BirthdayBaseline { n, q, no_collision: RationalString::from(&exact), no_collision_f64: f, collision_f64: 1.0 - f })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birthday_examples() {
        assert_eq!(birthday_no_collision(10, 1).unwrap(), rat(1, 1));
        assert_eq!(birthday_no_collision(4, 2).unwrap(), rat(3, 4));
        let b = birthday_baseline(365, 23).unwrap();
        assert!((b.no_collision_f64 - 0.492_702_765_7).abs() < 1e-9);
        assert!(birthday_no_collision(3, 4).is_err());
    }

    #[test]
    fn wilson_when_sparse() {
        let e = RateEstimate::new(0, 100);
        assert_eq!(e.method, CiMethod::Wilson);
        assert!(e.high > 0.0 && e.low == 0.0);
        let e = RateEstimate::new(500, 1000);
        assert_eq!(e.method, CiMethod::Normal);
        assert!((e.ci95 - 1.96 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pooled_advantage_width() {
        let h = advantage_ci95(30, 100, 10, 100);
        assert!((h - 1.96 * (0.2f64 * 0.8 * 0.02).sqrt()).abs() < 1e-12);
    }
}
