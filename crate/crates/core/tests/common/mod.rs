//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rand::Rng;

use abtree::data::{ColumnValues, Covariate, Dataset, RowSubset, Treatment};
use abtree::prune::PruneSequence;
use abtree::tree::{GrowthConfig, NodeKind, NodeStats, SplitRule, Tree, TreeNode};

pub type Q = Ratio<i64>;

/// `|S| * max(y_A / n_A, y_B / n_B)` computed with exact rationals.
pub fn node_value(n_a: i64, y_a: i64, n_b: i64, y_b: i64) -> Q {
    let n = n_a + n_b;
    let qa = Q::new(y_a * n, n_a);
    let qb = Q::new(y_b * n, n_b);
    qa.max(qb)
}

/// Arm counts of `rows` computed by direct filtering.
pub fn counts(data: &Dataset, rows: &[usize]) -> (i64, i64, i64, i64) {
    let (mut n_a, mut y_a, mut n_b, mut y_b) = (0, 0, 0, 0);
    for &i in rows {
        let y = data.outcome()[i] as i64;
        match data.treatment()[i] {
            Treatment::A => {
                n_a += 1;
                y_a += y;
            }
            Treatment::B => {
                n_b += 1;
                y_b += y;
            }
        }
    }
    (n_a, y_a, n_b, y_b)
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleRule {
    /// Left iff `x <= lower`; `upper` is the next distinct value.
    Below {
        lower: f64,
        upper: f64,
    },
    Level(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub rule: OracleRule,
    pub objective: Q,
}

/// Enumerates every admissible partition in (feature, threshold or level)
/// order and keeps the first strict maximum.
pub fn brute_force_split(subset: &RowSubset<'_>, min_bucket: i64) -> Option<OracleSplit> {
    let data = subset.data();
    let rows = subset.indices();
    let mut best: Option<OracleSplit> = None;
    let mut offer = |feature: usize, rule: OracleRule, left: Vec<usize>, right: Vec<usize>| {
        let (la, lya, lb, lyb) = counts(data, &left);
        let (ra, rya, rb, ryb) = counts(data, &right);
        if la.min(lb).min(ra).min(rb) < min_bucket {
            return;
        }
        let objective = node_value(la, lya, lb, lyb) + node_value(ra, rya, rb, ryb);
        if best.as_ref().is_none_or(|b| objective > b.objective) {
            best = Some(OracleSplit {
                feature,
                rule,
                objective,
            });
        }
    };
    for feature in 0..data.n_covariates() {
        match &data.covariates().column(feature).values {
            ColumnValues::Quantitative(x) => {
                let mut distinct: Vec<f64> = rows.iter().map(|&i| x[i]).collect();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                for w in distinct.windows(2) {
                    let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i] <= w[0]);
                    offer(
                        feature,
                        OracleRule::Below {
                            lower: w[0],
                            upper: w[1],
                        },
                        left,
                        right,
                    );
                }
            }
            ColumnValues::Categorical(col) => {
                for code in 0..col.levels.len() as u32 {
                    let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col.codes[i] == code);
                    offer(feature, OracleRule::Level(code), left, right);
                }
            }
        }
    }
    best
}

/// Whether the library's chosen split describes the same partition as the
/// oracle's.
pub fn same_predicate(feature: usize, rule: &SplitRule, oracle: &OracleSplit) -> bool {
    if feature != oracle.feature {
        return false;
    }
    match (rule, &oracle.rule) {
        (SplitRule::Threshold { threshold }, OracleRule::Below { lower, upper }) => {
            *lower <= *threshold && *threshold < *upper
        }
        (SplitRule::Equality { level, .. }, OracleRule::Level(code)) => level == code,
        _ => false,
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Random mixed-kind dataset. Quantitative columns are drawn from a small
/// grid half of the time so that ties are common.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, p: usize) -> Dataset {
    let p_b = rng.random_range(0.2..0.8);
    let p_y = rng.random_range(0.1..0.9);
    let treatment: Vec<Treatment> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < p_b {
                Treatment::B
            } else {
                Treatment::A
            }
        })
        .collect();
    let outcome: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < p_y)).collect();
    let covariates = (0..p)
        .map(|j| {
            let name = format!("x{j}");
            if rng.random_bool(0.35) {
                let k = rng.random_range(2..=5);
                let labels: Vec<String> = (0..n).map(|_| format!("c{}", rng.random_range(0..k))).collect();
                Covariate::categorical(name, &labels)
            } else if rng.random_bool(0.5) {
                let k = rng.random_range(2..=8);
                Covariate::quantitative(name, (0..n).map(|_| rng.random_range(0..k) as f64 * 0.5).collect())
            } else {
                Covariate::quantitative(name, (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
            }
        })
        .collect();
    Dataset::from_parts(outcome, treatment, covariates).expect("valid random dataset")
}

/// Dataset whose outcome depends on the covariates and the treatment, so
/// that trees grow past the root.
pub fn structured_dataset<R: Rng>(rng: &mut R, n: usize, p: usize) -> Dataset {
    let quantitative: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let group: Vec<String> = (0..n).map(|_| format!("g{}", rng.random_range(0..3))).collect();
    let treatment: Vec<Treatment> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Treatment::B
            } else {
                Treatment::A
            }
        })
        .collect();
    let cut = rng.random_range(-1.0..1.0);
    let outcome = (0..n)
        .map(|i| {
            let x = quantitative[0][i];
            let effect = if x > cut { 1.5 } else { -1.5 };
            let t = f64::from(u8::from(treatment[i] == Treatment::B));
            let bump = if group[i] == "g1" { 0.7 } else { 0.0 };
            let eta = 0.3 * quantitative[p - 1][i] + t * effect + bump;
            u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
        })
        .collect();
    let mut covariates: Vec<Covariate> = quantitative
        .into_iter()
        .enumerate()
        .map(|(j, v)| Covariate::quantitative(format!("x{j}"), v))
        .collect();
    covariates.push(Covariate::categorical("group", &group));
    Dataset::from_parts(outcome, treatment, covariates).expect("valid structured dataset")
}

pub fn random_growth<R: Rng>(rng: &mut R) -> GrowthConfig {
    let min_bucket = rng.random_range(1..=8);
    GrowthConfig {
        min_split: rng.random_range(2 * min_bucket..=3 * min_bucket + 5),
        min_bucket,
        max_depth: rng.random_range(1..=6),
    }
}

pub fn stats_q(s: &NodeStats) -> Q {
    node_value(s.n_a as i64, s.y_a as i64, s.n_b as i64, s.y_b as i64)
}

fn big(q: &Q) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Sum of leaf values, recomputed from leaf counts.
pub fn leaf_objective(tree: &Tree) -> BigRational {
    tree.root
        .leaves()
        .iter()
        .fold(BigRational::from_integer(0.into()), |acc, l| {
            acc + big(&stats_q(&l.stats))
        })
}

/// Checks leaf sizes, count additivity and leaf labels. Returns a
/// description of the first violation.
pub fn check_tree(tree: &Tree, cfg: &GrowthConfig) -> Result<(), String> {
    fn walk(node: &TreeNode, cfg: &GrowthConfig) -> Result<(), String> {
        match &node.kind {
            NodeKind::Leaf { treatment } => {
                if node.stats.min_arm() < cfg.min_bucket {
                    return Err(format!(
                        "leaf {} has {:?}, below min_bucket {}",
                        node.id, node.stats, cfg.min_bucket
                    ));
                }
                let s = node.stats;
                let b_better = s.y_b as u128 * s.n_a as u128 > s.y_a as u128 * s.n_b as u128;
                let expected = if b_better { Treatment::B } else { Treatment::A };
                if *treatment != expected {
                    return Err(format!(
                        "leaf {} labelled {treatment} but {expected} has the higher rate",
                        node.id
                    ));
                }
                Ok(())
            }
            NodeKind::Split { left, right, .. } => {
                if left.stats + right.stats != node.stats {
                    return Err(format!("node {}: children do not sum to parent", node.id));
                }
                if left.depth != node.depth + 1 || right.depth != node.depth + 1 || node.depth >= cfg.max_depth {
                    return Err(format!("node {}: depth bookkeeping", node.id));
                }
                walk(left, cfg)?;
                walk(right, cfg)
            }
        }
    }
    walk(&tree.root, cfg)
}

fn ids(node: &TreeNode) -> Vec<(usize, bool)> {
    node.preorder().iter().map(|n| (n.id, n.is_leaf())).collect()
}

/// Checks that each tree in the sequence is the previous one with exactly
/// one internal node collapsed, and that objectives chain exactly.
pub fn check_sequence(seq: &PruneSequence) -> Result<(), String> {
    if seq.trees.len() != seq.steps.len() + 1 {
        return Err("tree and step counts disagree".into());
    }
    if !seq.trees.last().expect("nonempty").root.is_leaf() {
        return Err("sequence does not end at the root leaf".into());
    }
    if seq.initial_objective != leaf_objective(&seq.trees[0]) {
        return Err("initial objective differs from recomputed leaf sum".into());
    }
    let mut running = seq.initial_objective.clone();
    for (k, step) in seq.steps.iter().enumerate() {
        let (before, after) = (&seq.trees[k], &seq.trees[k + 1]);
        let collapsed = before
            .root
            .preorder()
            .into_iter()
            .find(|n| n.id == step.collapsed_node)
            .ok_or_else(|| format!("step {k}: node {} not in previous tree", step.collapsed_node))?;
        let Some((l, r)) = collapsed.children() else {
            return Err(format!("step {k}: node {} was already a leaf", step.collapsed_node));
        };
        if !l.is_leaf() || !r.is_leaf() {
            return Err(format!("step {k}: collapsed node had a non-leaf child"));
        }
        let expected: Vec<(usize, bool)> = ids(&before.root)
            .into_iter()
            .filter(|(id, _)| *id != l.id && *id != r.id)
            .map(|(id, leaf)| (id, leaf || id == step.collapsed_node))
            .collect();
        if ids(&after.root) != expected {
            return Err(format!("step {k}: trees are not nested by a single collapse"));
        }
        if after.n_leaves() + 1 != before.n_leaves() {
            return Err(format!("step {k}: leaf count did not drop by one"));
        }
        running -= &step.delta;
        if running != step.resulting_objective || running != leaf_objective(after) {
            return Err(format!("step {k}: objective bookkeeping is not exact"));
        }
    }
    Ok(())
}
