use std::cmp::Ordering;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::data::{RowSubset, Treatment};

/// Per-arm row and success counts for a region of covariate space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeStats {
    pub n_a: u64,
    pub y_a: u64,
    pub n_b: u64,
    pub y_b: u64,
}

impl NodeStats {
    pub fn new(n_a: u64, y_a: u64, n_b: u64, y_b: u64) -> Self {
        debug_assert!(y_a <= n_a && y_b <= n_b);
        NodeStats { n_a, y_a, n_b, y_b }
    }

    /// Counts rows and successes per arm within `subset`.
    pub fn from_subset(subset: &RowSubset<'_>) -> Self {
        let data = subset.data();
        let (outcome, treatment) = (data.outcome(), data.treatment());
        let mut stats = NodeStats::default();
        for &i in subset.indices() {
            stats.push(treatment[i], outcome[i]);
        }
        stats
    }

    #[inline]
    pub fn push(&mut self, t: Treatment, y: u8) {
        match t {
            Treatment::A => {
                self.n_a += 1;
                self.y_a += y as u64;
            }
            Treatment::B => {
                self.n_b += 1;
                self.y_b += y as u64;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.n_a + self.n_b
    }

    pub fn count(&self, t: Treatment) -> u64 {
        match t {
            Treatment::A => self.n_a,
            Treatment::B => self.n_b,
        }
    }

    pub fn successes(&self, t: Treatment) -> u64 {
        match t {
            Treatment::A => self.y_a,
            Treatment::B => self.y_b,
        }
    }

    pub fn min_arm(&self) -> u64 {
        self.n_a.min(self.n_b)
    }

    /// Mean outcome among rows that received `t`; `None` when that arm is empty.
    pub fn empirical_profit(&self, t: Treatment) -> Option<f64> {
        let n = self.count(t);
        (n > 0).then(|| self.successes(t) as f64 / n as f64)
    }

    /// Arm with the larger empirical profit. Ties, and nodes where neither
    /// arm is observed, go to `A`; an empty arm never wins over a populated one.
    pub fn best_treatment(&self) -> Treatment {
        match (self.n_a, self.n_b) {
            (0, 0) => Treatment::A,
            (0, _) => Treatment::B,
            (_, 0) => Treatment::A,
            _ => {
                // y_b / n_b > y_a / n_a
                if (self.y_b as u128) * (self.n_a as u128) > (self.y_a as u128) * (self.n_b as u128) {
                    Treatment::B
                } else {
                    Treatment::A
                }
            }
        }
    }

    /// Node value `|S| * max(y_A/n_A, y_B/n_B)`; `None` if either arm is empty.
    pub fn node_value(&self) -> Option<f64> {
        self.value_fraction().map(Frac::to_f64)
    }

    /// Node value as an exact fraction.
    pub fn value_fraction(&self) -> Option<Frac> {
        if self.n_a == 0 || self.n_b == 0 {
            return None;
        }
        let t = self.best_treatment();
        Some(Frac::new(
            self.total() as u128 * self.successes(t) as u128,
            self.count(t) as u128,
        ))
    }
}

impl Add for NodeStats {
    type Output = NodeStats;

    fn add(self, o: NodeStats) -> NodeStats {
        NodeStats {
            n_a: self.n_a + o.n_a,
            y_a: self.y_a + o.y_a,
            n_b: self.n_b + o.n_b,
            y_b: self.y_b + o.y_b,
        }
    }
}

impl Sub for NodeStats {
    type Output = NodeStats;

    fn sub(self, o: NodeStats) -> NodeStats {
        NodeStats {
            n_a: self.n_a - o.n_a,
            y_a: self.y_a - o.y_a,
            n_b: self.n_b - o.n_b,
            y_b: self.y_b - o.y_b,
        }
    }
}

/// Non-negative fraction compared by cross-multiplication. If a product
/// overflows `u128` the comparison falls back to `f64` with a 1e-12
/// relative tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        Frac { num, den }
    }

    pub fn zero() -> Self {
        Frac { num: 0, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Sum, or `None` on overflow.
    pub fn checked_add(self, o: Frac) -> Option<Frac> {
        if self.den == o.den {
            return Some(Frac::new(self.num.checked_add(o.num)?, self.den));
        }
        let num = self.num.checked_mul(o.den)?.checked_add(o.num.checked_mul(self.den)?)?;
        Some(Frac::new(num, self.den.checked_mul(o.den)?))
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => {
                let (l, r) = (self.to_f64(), other.to_f64());
                if (l - r).abs() <= 1e-12 * l.abs().max(r.abs()) {
                    Ordering::Equal
                } else {
                    l.total_cmp(&r)
                }
            }
        }
    }
}

/// `Q(left) + Q(right)` as an exact fraction; `None` if any arm is empty.
pub fn pair_value(left: &NodeStats, right: &NodeStats) -> Option<Frac> {
    let l = left.value_fraction()?;
    let r = right.value_fraction()?;
    Some(l.checked_add(r).unwrap_or_else(|| approx_frac(l.to_f64() + r.to_f64())))
}

// Only reached for counts near 2^40 per node.
fn approx_frac(x: f64) -> Frac {
    const SCALE: f64 = (1u64 << 52) as f64;
    let den = (SCALE / x.max(1.0)).floor().max(1.0);
    Frac::new((x * den).round() as u128, den as u128)
}
