//! Weakest-link pruning and hold-out subtree selection.
//!
//! Starting from a fully grown tree, the internal node whose two leaf
//! children contribute the least objective over their parent is collapsed,
//! repeatedly, until only the root remains. This yields a nested sequence of
//! subtrees; one is then picked by scoring each on a hold-out set.
//!
//! Deltas and objectives are tracked as exact rationals, so the bookkeeping
//! identity `objective[t] = objective[t-1] - delta[t]` holds exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::data::RowSubset;
use crate::error::{Error, Result};
use crate::tree::{NodeKind, NodeStats, Tree, TreeNode};

/// Exact node value `|S| * max(y_A/n_A, y_B/n_B)`.
pub fn exact_node_value(stats: &NodeStats) -> Option<BigRational> {
    if stats.n_a == 0 || stats.n_b == 0 {
        return None;
    }
    let t = stats.best_treatment();
    Some(BigRational::new(
        BigInt::from(stats.total()) * BigInt::from(stats.successes(t)),
        BigInt::from(stats.count(t)),
    ))
}

/// Exact sum of node values over the leaves of `tree`.
pub fn exact_objective(tree: &Tree) -> BigRational {
    tree.root
        .leaves()
        .iter()
        .filter_map(|l| exact_node_value(&l.stats))
        .fold(BigRational::zero(), |acc, q| acc + q)
}

/// `Q(left) + Q(right) - Q(parent)` for a node whose children are both leaves.
pub fn collapse_delta_exact(node: &TreeNode) -> Result<BigRational> {
    let (l, r) = node
        .children()
        .filter(|(l, r)| l.is_leaf() && r.is_leaf())
        .ok_or_else(|| Error::InvalidArgument(format!("node {} does not have two leaf children", node.id)))?;
    let value =
        |s: &NodeStats| exact_node_value(s).ok_or_else(|| Error::InvalidArgument("node with an empty arm".into()));
    Ok(value(&l.stats)? + value(&r.stats)? - value(&node.stats)?)
}

pub fn collapse_delta(node: &TreeNode) -> Result<f64> {
    collapse_delta_exact(node).map(|d| to_f64(&d))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One collapse in a prune sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneStep {
    /// Id of the internal node that became a leaf.
    pub collapsed_node: usize,
    pub delta: BigRational,
    /// Sum of leaf values after the collapse.
    pub resulting_objective: BigRational,
}

impl PruneStep {
    pub fn delta_f64(&self) -> f64 {
        to_f64(&self.delta)
    }

    pub fn objective_f64(&self) -> f64 {
        to_f64(&self.resulting_objective)
    }
}

/// Nested subtrees from the full tree down to the root leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneSequence {
    pub trees: Vec<Tree>,
    pub steps: Vec<PruneStep>,
    pub initial_objective: BigRational,
}

#[derive(Serialize)]
struct StepRecord {
    node_id: usize,
    delta: f64,
    objective: f64,
    delta_exact: String,
    objective_exact: String,
    leaves_after: usize,
}

#[derive(Serialize)]
struct SequenceRecord {
    initial_objective: f64,
    initial_leaves: usize,
    steps: Vec<StepRecord>,
}

impl PruneSequence {
    /// Audit record: per step the collapsed node id, delta and objective.
    pub fn to_json(&self) -> Result<String> {
        let record = SequenceRecord {
            initial_objective: to_f64(&self.initial_objective),
            initial_leaves: self.trees[0].n_leaves(),
            steps: self
                .steps
                .iter()
                .zip(&self.trees[1..])
                .map(|(s, t)| StepRecord {
                    node_id: s.collapsed_node,
                    delta: s.delta_f64(),
                    objective: s.objective_f64(),
                    delta_exact: s.delta.to_string(),
                    objective_exact: s.resulting_objective.to_string(),
                    leaves_after: t.n_leaves(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }
}

/// Collapses weakest links until the root is a leaf. Among equal deltas
/// the deeper node goes first, then the earlier one in pre-order.
pub fn prune_sequence(tree: &Tree) -> PruneSequence {
    let mut current = tree.clone();
    let initial_objective = exact_objective(&current);
    let mut objective = initial_objective.clone();
    let mut trees = vec![current.clone()];
    let mut steps = Vec::new();

    while !current.root.is_leaf() {
        let (delta, id) = current
            .root
            .preorder()
            .into_iter()
            .filter_map(|n| collapse_delta_exact(n).ok().map(|d| (d, n.depth, n.id)))
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)).then_with(|| a.2.cmp(&b.2)))
            .map(|(d, _, id)| (d, id))
            .expect("a non-leaf tree has an internal node with two leaf children");

        let node = current.root.find_mut(id).expect("candidate id exists");
        *node = TreeNode::leaf(node.id, node.depth, node.stats);
        objective -= &delta;
        steps.push(PruneStep {
            collapsed_node: id,
            delta,
            resulting_objective: objective.clone(),
        });
        trees.push(current.clone());
    }

    PruneSequence {
        trees,
        steps,
        initial_objective,
    }
}

/// Hold-out score used to choose among pruned subtrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMetric {
    /// Fraction of hold-out rows whose logged treatment equals the tree's.
    #[default]
    AssignmentMatch,
    /// Mean outcome over hold-out rows whose logged treatment equals the
    /// tree's. Zero when no row matches.
    HoldoutProfit,
}

impl FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "assignment-match" => Ok(SelectionMetric::AssignmentMatch),
            "holdout-profit" => Ok(SelectionMetric::HoldoutProfit),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric `{other}`, expected assignment-match or holdout-profit"
            ))),
        }
    }
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMetric::AssignmentMatch => "assignment-match",
            SelectionMetric::HoldoutProfit => "holdout-profit",
        })
    }
}

/// Ratio of counts, ordered exactly.
#[derive(Debug, Clone, Copy)]
pub struct CountRatio {
    pub num: u64,
    pub den: u64,
}

impl CountRatio {
    pub fn value(&self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    fn cmp_exact(&self, o: &CountRatio) -> Ordering {
        let (a_den, b_den) = (self.den.max(1) as u128, o.den.max(1) as u128);
        (self.num as u128 * b_den).cmp(&(o.num as u128 * a_den))
    }
}

/// Scores one tree on the hold-out rows.
pub fn holdout_score(tree: &Tree, holdout: &RowSubset<'_>, metric: SelectionMetric) -> Result<CountRatio> {
    if holdout.is_empty() {
        return Err(Error::InvalidArgument("hold-out set is empty".into()));
    }
    let data = holdout.data();
    let bound = tree.bind(data.covariates())?;
    let (mut matched, mut successes) = (0u64, 0u64);
    for &i in holdout.indices() {
        if bound.predict(i) == data.treatment()[i] {
            matched += 1;
            successes += data.outcome()[i] as u64;
        }
    }
    Ok(match metric {
        SelectionMetric::AssignmentMatch => CountRatio {
            num: matched,
            den: holdout.len() as u64,
        },
        SelectionMetric::HoldoutProfit => CountRatio {
            num: successes,
            den: matched,
        },
    })
}

/// The chosen subtree and its hold-out score.
#[derive(Debug, Clone, Copy)]
pub struct Selection<'s> {
    pub index: usize,
    pub tree: &'s Tree,
    pub score: CountRatio,
}

/// Picks the subtree with the highest hold-out score; ties go to the tree
/// with fewer leaves.
pub fn select_subtree<'s>(
    seq: &'s PruneSequence,
    holdout: &RowSubset<'_>,
    metric: SelectionMetric,
) -> Result<Selection<'s>> {
    let mut best: Option<(Selection<'s>, usize)> = None;
    for (index, tree) in seq.trees.iter().enumerate() {
        let score = holdout_score(tree, holdout, metric)?;
        let leaves = tree.n_leaves();
        let better = match &best {
            None => true,
            Some((b, b_leaves)) => match score.cmp_exact(&b.score) {
                Ordering::Greater => true,
                Ordering::Equal => leaves < *b_leaves,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((Selection { index, tree, score }, leaves));
        }
    }
    best.map(|(s, _)| s)
        .ok_or_else(|| Error::InvalidArgument("empty prune sequence".into()))
}

/// Depth-first check that every internal node's stats equal the sum of its
/// children's.
pub fn stats_are_additive(node: &TreeNode) -> bool {
    match &node.kind {
        NodeKind::Leaf { .. } => true,
        NodeKind::Split { left, right, .. } => {
            left.stats + right.stats == node.stats && stats_are_additive(left) && stats_are_additive(right)
        }
    }
}
