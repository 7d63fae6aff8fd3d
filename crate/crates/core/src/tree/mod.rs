//! Treatment-assignment trees.
//!
//! A tree partitions covariate space with binary splits and assigns to each
//! leaf the arm with the higher empirical success rate among the training
//! rows that fall in it. Growth is greedy: at every node the split that
//! maximizes the summed node values of the two children is taken, subject
//! to per-arm minimum counts on both sides.

mod export;
mod split;
mod stats;

use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, ColumnValues, Covariates, Dataset, RowSubset, Treatment};
use crate::error::{Error, Result};

pub use split::{best_split, best_split_for_feature, midpoint, SplitCandidate, SplitPredicate, SplitRule};
pub use stats::{pair_value, Frac, NodeStats};

/// Stopping rules for tree growth. All counts are per arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthConfig {
    /// A node is only split when both arms have at least this many rows.
    pub min_split: u64,
    /// Every leaf keeps at least this many rows of each arm.
    pub min_bucket: u64,
    pub max_depth: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            min_split: 20,
            min_bucket: 7,
            max_depth: 5,
        }
    }
}

impl GrowthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_bucket < 1 {
            return Err(Error::InvalidArgument("min_bucket must be at least 1".into()));
        }
        if self.min_split < 2 * self.min_bucket {
            log::warn!(
                "min_split ({}) is below 2 * min_bucket ({}); such nodes can never be split",
                self.min_split,
                2 * self.min_bucket
            );
        }
        Ok(())
    }
}

/// Name and kind of a covariate the tree was trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Pre-order position in the fully grown tree. Stable under pruning.
    pub id: usize,
    pub depth: usize,
    pub stats: NodeStats,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Leaf {
        treatment: Treatment,
    },
    Split {
        predicate: SplitPredicate,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(id: usize, depth: usize, stats: NodeStats) -> Self {
        TreeNode {
            id,
            depth,
            stats,
            kind: NodeKind::Leaf {
                treatment: stats.best_treatment(),
            },
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn children(&self) -> Option<(&TreeNode, &TreeNode)> {
        match &self.kind {
            NodeKind::Split { left, right, .. } => Some((left, right)),
            NodeKind::Leaf { .. } => None,
        }
    }

    /// Nodes in pre-order.
    pub fn preorder(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            if let Some((l, r)) = n.children() {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        self.preorder().into_iter().filter(|n| n.is_leaf()).collect()
    }

    pub fn find_mut(&mut self, id: usize) -> Option<&mut TreeNode> {
        if self.id == id {
            return Some(self);
        }
        match &mut self.kind {
            NodeKind::Split { left, right, .. } => {
                // ids are pre-order, so the right subtree starts after every left id
                if id < right.id {
                    left.find_mut(id)
                } else {
                    right.find_mut(id)
                }
            }
            NodeKind::Leaf { .. } => None,
        }
    }

    fn assign_ids(&mut self, next: &mut usize) {
        self.id = *next;
        *next += 1;
        if let NodeKind::Split { left, right, .. } = &mut self.kind {
            left.assign_ids(next);
            right.assign_ids(next);
        }
    }
}

/// A fitted tree plus the covariates it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub features: Vec<FeatureSpec>,
    pub root: TreeNode,
}

impl Tree {
    pub fn n_leaves(&self) -> usize {
        self.root.leaves().len()
    }

    pub fn n_nodes(&self) -> usize {
        self.root.preorder().len()
    }

    /// Training objective: sum of node values over leaves.
    pub fn objective(&self) -> f64 {
        self.root
            .leaves()
            .iter()
            .map(|l| l.stats.node_value().unwrap_or(0.0))
            .sum()
    }

    /// Resolves feature names against `frame` so rows can be routed.
    pub fn bind<'a>(&'a self, frame: &'a Covariates) -> Result<BoundTree<'a>> {
        let columns = self
            .features
            .iter()
            .map(|f| {
                let idx = frame
                    .position(&f.name)
                    .ok_or_else(|| Error::Model(format!("input has no covariate `{}`", f.name)))?;
                let kind = frame.column(idx).values.kind();
                if kind != f.kind {
                    return Err(Error::Model(format!(
                        "covariate `{}` is {kind} in the input but {} in the model",
                        f.name, f.kind
                    )));
                }
                Ok(idx)
            })
            .collect::<Result<_>>()?;
        Ok(BoundTree {
            tree: self,
            frame,
            columns,
        })
    }

    /// Treatment for a single covariate record given in model feature order.
    pub fn predict(&self, row: &[FeatureValue<'_>]) -> Result<Treatment> {
        if row.len() != self.features.len() {
            return Err(Error::Model(format!(
                "expected {} covariate values, got {}",
                self.features.len(),
                row.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match &node.kind {
                NodeKind::Leaf { treatment } => return Ok(*treatment),
                NodeKind::Split { predicate, left, right } => {
                    let go_left = match (&predicate.rule, &row[predicate.feature]) {
                        (SplitRule::Threshold { threshold }, FeatureValue::Real(x)) => x <= threshold,
                        (SplitRule::Equality { label, .. }, FeatureValue::Level(l)) => label == l,
                        _ => {
                            return Err(Error::Model(format!(
                                "value for `{}` has the wrong kind",
                                self.features[predicate.feature].name
                            )))
                        }
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    /// Treatments for the given rows of a dataset.
    pub fn predict_rows(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<Treatment>> {
        let bound = self.bind(data.covariates())?;
        Ok(rows.iter().map(|&r| bound.predict(r)).collect())
    }
}

/// One covariate value of a record passed to [`Tree::predict`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue<'a> {
    Real(f64),
    Level(&'a str),
}

/// A tree whose features have been matched to the columns of a frame.
pub struct BoundTree<'a> {
    tree: &'a Tree,
    frame: &'a Covariates,
    columns: Vec<usize>,
}

impl BoundTree<'_> {
    /// Routes row `row` of the frame. A categorical level the tree never
    /// saw fails every equality test and therefore goes right.
    pub fn predict(&self, row: usize) -> Treatment {
        self.leaf_of(row).1
    }

    /// Id and treatment of the leaf that `row` lands in.
    pub fn leaf_of(&self, row: usize) -> (usize, Treatment) {
        let mut node = &self.tree.root;
        loop {
            match &node.kind {
                NodeKind::Leaf { treatment } => return (node.id, *treatment),
                NodeKind::Split { predicate, left, right } => {
                    let col = &self.frame.column(self.columns[predicate.feature]).values;
                    let go_left = match (&predicate.rule, col) {
                        (SplitRule::Threshold { threshold }, ColumnValues::Quantitative(v)) => v[row] <= *threshold,
                        (SplitRule::Equality { label, .. }, ColumnValues::Categorical(c)) => c.label(row) == label,
                        _ => unreachable!("kinds checked in bind"),
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }
}

/// Grows a tree on `subset`.
///
/// A node becomes a leaf when it reaches `max_depth`, when either arm has
/// fewer than `min_split` rows, when no admissible split exists, or when
/// the best split does not strictly increase the summed node value.
pub fn grow(subset: &RowSubset<'_>, cfg: &GrowthConfig) -> Result<Tree> {
    cfg.validate()?;
    let data = subset.data();
    let stats = NodeStats::from_subset(subset);
    if stats.min_arm() < cfg.min_bucket {
        return Err(Error::InsufficientArms {
            n_a: stats.n_a,
            n_b: stats.n_b,
            min_bucket: cfg.min_bucket,
        });
    }
    let mut root = grow_node(subset, stats, 0, cfg);
    root.assign_ids(&mut 0);
    let features = data
        .covariates()
        .columns()
        .iter()
        .map(|c| FeatureSpec {
            name: c.name.clone(),
            kind: c.values.kind(),
        })
        .collect();
    Ok(Tree { features, root })
}

fn grow_node(subset: &RowSubset<'_>, stats: NodeStats, depth: usize, cfg: &GrowthConfig) -> TreeNode {
    let leaf = || TreeNode::leaf(0, depth, stats);
    if depth >= cfg.max_depth || stats.min_arm() < cfg.min_split {
        return leaf();
    }
    let Some(candidate) = best_split(subset, cfg) else {
        return leaf();
    };
    let parent = stats.value_fraction().expect("both arms present");
    if candidate.exact <= parent {
        return leaf();
    }

    let data = subset.data();
    let column = &data.covariates().column(candidate.predicate.feature).values;
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        subset
            .indices()
            .iter()
            .partition(|&&i| match (&candidate.predicate.rule, column) {
                (SplitRule::Threshold { threshold }, ColumnValues::Quantitative(v)) => v[i] <= *threshold,
                (SplitRule::Equality { level, .. }, ColumnValues::Categorical(c)) => c.codes[i] == *level,
                _ => unreachable!("rule kind matches column kind"),
            });
    let left = grow_node(&RowSubset::from_sorted(data, left_rows), candidate.left, depth + 1, cfg);
    let right = grow_node(
        &RowSubset::from_sorted(data, right_rows),
        candidate.right,
        depth + 1,
        cfg,
    );
    TreeNode {
        id: 0,
        depth,
        stats,
        kind: NodeKind::Split {
            predicate: candidate.predicate,
            left: Box::new(left),
            right: Box::new(right),
        },
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::data::{Covariate, Dataset, Treatment};

    /// Eight rows where `x <= 2.5` favours A and `x > 2.5` favours B.
    pub(crate) fn eight_rows() -> Dataset {
        use Treatment::*;
        let rows = [
            (1.0, A, 1),
            (1.0, B, 0),
            (2.0, A, 1),
            (2.0, B, 0),
            (3.0, A, 0),
            (3.0, B, 1),
            (4.0, A, 0),
            (4.0, B, 1),
        ];
        Dataset::from_parts(
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| r.1).collect(),
            vec![Covariate::quantitative("x", rows.iter().map(|r| r.0).collect())],
        )
        .unwrap()
    }
}
