//! Treatment assignment policies and the global A/B-test baseline.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{Covariates, RowSubset, Treatment};
use crate::error::{Error, Result};
use crate::tree::{NodeStats, Tree};

/// A rule mapping covariates to a treatment.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Tree(Tree),
    Constant(Treatment),
    /// Independent draws: `B` with probability `p_b`.
    Random {
        p_b: f64,
    },
}

impl Policy {
    pub fn random(p_b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_b) {
            return Err(Error::InvalidArgument(format!("p_B must lie in [0, 1], got {p_b}")));
        }
        Ok(Policy::Random { p_b })
    }

    /// Treatments for `rows` of `frame`. Random draws come from a PRNG
    /// seeded with `seed`, one uniform per row in the given order; other
    /// policies ignore the seed.
    pub fn assign(&self, frame: &Covariates, rows: &[usize], seed: u64) -> Result<Vec<Treatment>> {
        match self {
            Policy::Tree(tree) => {
                let bound = tree.bind(frame)?;
                Ok(rows.iter().map(|&r| bound.predict(r)).collect())
            }
            Policy::Constant(t) => Ok(vec![*t; rows.len()]),
            Policy::Random { p_b } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(rows
                    .iter()
                    .map(|_| {
                        if rng.random::<f64>() < *p_b {
                            Treatment::B
                        } else {
                            Treatment::A
                        }
                    })
                    .collect())
            }
        }
    }

    /// Convenience wrapper over [`Policy::assign`] for a row subset.
    pub fn assign_subset(&self, rows: &RowSubset<'_>, seed: u64) -> Result<Vec<Treatment>> {
        self.assign(rows.data().covariates(), rows.indices(), seed)
    }
}

/// Outcome of a one-sided pooled two-proportion z-test of `p_B > p_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbTestDecision {
    pub chosen: Treatment,
    pub z_statistic: f64,
    pub p_a_hat: f64,
    pub p_b_hat: f64,
    pub n_a: u64,
    pub n_b: u64,
    pub alpha: f64,
    pub critical_value: f64,
}

impl fmt::Display for AbTestDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z={:.4} p_A={:.4} (n={}) p_B={:.4} (n={}) critical={:.4} alpha={} decision={}",
            self.z_statistic,
            self.p_a_hat,
            self.n_a,
            self.p_b_hat,
            self.n_b,
            self.critical_value,
            self.alpha,
            self.chosen
        )
    }
}

/// Upper `alpha` quantile of the standard normal.
pub fn upper_normal_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(1.0 - alpha))
}

/// Pooled z-test from arm counts. A pooled rate of exactly 0 or 1 gives
/// `z = 0` and keeps the control.
pub fn ab_decision_from_stats(stats: &NodeStats, alpha: f64) -> Result<AbTestDecision> {
    if stats.n_a == 0 || stats.n_b == 0 {
        return Err(Error::InvalidArgument(format!(
            "both arms must be non-empty (n_A={}, n_B={})",
            stats.n_a, stats.n_b
        )));
    }
    let critical_value = upper_normal_quantile(alpha)?;
    let (n_a, n_b) = (stats.n_a as f64, stats.n_b as f64);
    let p_a = stats.y_a as f64 / n_a;
    let p_b = stats.y_b as f64 / n_b;
    let pooled_successes = stats.y_a + stats.y_b;
    let z = if pooled_successes == 0 || pooled_successes == stats.total() {
        0.0
    } else {
        let p = pooled_successes as f64 / stats.total() as f64;
        (p_b - p_a) / (p * (1.0 - p) * (1.0 / n_a + 1.0 / n_b)).sqrt()
    };
    Ok(AbTestDecision {
        chosen: if z > critical_value { Treatment::B } else { Treatment::A },
        z_statistic: z,
        p_a_hat: p_a,
        p_b_hat: p_b,
        n_a: stats.n_a,
        n_b: stats.n_b,
        alpha,
        critical_value,
    })
}

/// Global A/B decision on the logged rows: `B` only if the test rejects.
pub fn global_ab_decision(rows: &RowSubset<'_>, alpha: f64) -> Result<AbTestDecision> {
    ab_decision_from_stats(&NodeStats::from_subset(rows), alpha)
}
