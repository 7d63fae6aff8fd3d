//! Exhaustive split search over one node.
//!
//! Quantitative features are sorted once and swept left to right while
//! prefix statistics are maintained; candidate thresholds sit at midpoints
//! between consecutive distinct values. Categorical features get one
//! equality split per level. Scores are `Q(left) + Q(right)`, compared
//! exactly.

use serde::{Deserialize, Serialize};

use super::stats::{pair_value, Frac, NodeStats};
use super::GrowthConfig;
use crate::data::{ColumnValues, RowSubset};

/// How a split routes a row to the left child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SplitRule {
    /// Left iff `x <= threshold`.
    Threshold { threshold: f64 },
    /// Left iff the row's level equals `label`. `level` is the code in the
    /// training data's dictionary.
    Equality { level: u32, label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPredicate {
    /// Covariate index in the training dataset.
    pub feature: usize,
    #[serde(flatten)]
    pub rule: SplitRule,
}

/// Best admissible split found for a node.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub predicate: SplitPredicate,
    /// `Q(left) + Q(right)`.
    pub objective: f64,
    pub left: NodeStats,
    pub right: NodeStats,
    pub(crate) exact: Frac,
}

impl SplitCandidate {
    pub fn exact_objective(&self) -> Frac {
        self.exact
    }
}

/// Midpoint `m` of `a < b` with `a <= m < b`.
pub fn midpoint(a: f64, b: f64) -> f64 {
    let m = a / 2.0 + b / 2.0;
    if m >= a && m < b {
        m
    } else {
        a
    }
}

fn admissible(s: &NodeStats, min_bucket: u64) -> bool {
    s.n_a >= min_bucket && s.n_b >= min_bucket
}

/// Best admissible split of `subset` on covariate `feature`. Among equal
/// scores the smallest threshold (or lowest level code) wins.
pub fn best_split_for_feature(subset: &RowSubset<'_>, feature: usize, cfg: &GrowthConfig) -> Option<SplitCandidate> {
    let data = subset.data();
    let (outcome, treatment) = (data.outcome(), data.treatment());
    let min_bucket = cfg.min_bucket;
    let total = NodeStats::from_subset(subset);
    if total.min_arm() < 2 * min_bucket {
        return None;
    }

    let mut best: Option<(Frac, SplitRule, NodeStats)> = None;
    let mut consider = |left: NodeStats, rule: &dyn Fn() -> SplitRule| {
        let right = total - left;
        if !admissible(&left, min_bucket) || !admissible(&right, min_bucket) {
            return;
        }
        let score = pair_value(&left, &right).expect("admissible sides have both arms");
        if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
            best = Some((score, rule(), left));
        }
    };

    match &data.covariates().column(feature).values {
        ColumnValues::Quantitative(values) => {
            let mut rows: Vec<usize> = subset.indices().to_vec();
            rows.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            let mut left = NodeStats::default();
            for w in 0..rows.len().saturating_sub(1) {
                let i = rows[w];
                left.push(treatment[i], outcome[i]);
                let (a, b) = (values[i], values[rows[w + 1]]);
                if a < b {
                    consider(left, &|| SplitRule::Threshold {
                        threshold: midpoint(a, b),
                    });
                }
            }
        }
        ColumnValues::Categorical(col) => {
            let mut per_level = vec![NodeStats::default(); col.levels.len()];
            for &i in subset.indices() {
                per_level[col.codes[i] as usize].push(treatment[i], outcome[i]);
            }
            for (code, left) in per_level.into_iter().enumerate() {
                if left.total() == 0 {
                    continue;
                }
                consider(left, &|| SplitRule::Equality {
                    level: code as u32,
                    label: col.levels[code].clone(),
                });
            }
        }
    }

    best.map(|(exact, rule, left)| SplitCandidate {
        predicate: SplitPredicate { feature, rule },
        objective: exact.to_f64(),
        left,
        right: total - left,
        exact,
    })
}

/// Best admissible split over all covariates; ties go to the lowest
/// feature index.
pub fn best_split(subset: &RowSubset<'_>, cfg: &GrowthConfig) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    for feature in 0..subset.data().n_covariates() {
        if let Some(c) = best_split_for_feature(subset, feature, cfg) {
            if best.as_ref().is_none_or(|b| c.exact > b.exact) {
                best = Some(c);
            }
        }
    }
    best
}
