//! Model persistence (JSON) and Graphviz rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FeatureSpec, NodeKind, SplitRule, Tree, TreeNode};
use crate::data::{ColumnKind, Treatment};
use crate::error::{Error, Result};

/// Format tag written into every model file. Loading rejects other tags.
pub const MODEL_FORMAT: &str = "abtree-model/v1";

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    features: Vec<FeatureSpec>,
    root: TreeNode,
}

impl Tree {
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            features: self.features.clone(),
            root: self.root.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Tree> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            Some(other) => {
                return Err(Error::Model(format!(
                    "unsupported model format `{other}`, expected `{MODEL_FORMAT}`"
                )))
            }
            None => return Err(Error::Model("model file has no format tag".into())),
        }
        let doc: ModelDocument = serde_json::from_value(value)?;
        let tree = Tree {
            features: doc.features,
            root: doc.root,
        };
        tree.check()?;
        Ok(tree)
    }

    fn check(&self) -> Result<()> {
        for node in self.root.preorder() {
            if let NodeKind::Split { predicate, .. } = &node.kind {
                let feature = self.features.get(predicate.feature).ok_or_else(|| {
                    Error::Model(format!(
                        "node {} refers to unknown feature {}",
                        node.id, predicate.feature
                    ))
                })?;
                let ok = matches!(
                    (&predicate.rule, feature.kind),
                    (SplitRule::Threshold { .. }, ColumnKind::Quantitative)
                        | (SplitRule::Equality { .. }, ColumnKind::Categorical)
                );
                if !ok {
                    return Err(Error::Model(format!(
                        "node {} applies a {:?} rule to {} feature `{}`",
                        node.id, predicate.rule, feature.kind, feature.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Graphviz description with one node per tree node. Leaves show the
    /// assigned arm and per-arm success rate and size.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph abtree {\n  node [shape=box, fontname=\"Helvetica\"];\n");
        for node in self.root.preorder() {
            let label = match &node.kind {
                NodeKind::Split { predicate, .. } => {
                    let name = &self.features[predicate.feature].name;
                    let test = match &predicate.rule {
                        SplitRule::Threshold { threshold } => format!("{name} <= {threshold}"),
                        SplitRule::Equality { label, .. } => format!("{name} = {label}"),
                    };
                    format!("{test}\\nn_A={}, n_B={}", node.stats.n_a, node.stats.n_b)
                }
                NodeKind::Leaf { treatment } => format!("assign {treatment}\\n{}", leaf_summary(node)),
            };
            let style = if node.is_leaf() {
                ", style=filled, fillcolor=\"#fff2a8\""
            } else {
                ""
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"{style}];", node.id, escape(&label));
            if let Some((l, r)) = node.children() {
                let _ = writeln!(out, "  n{} -> n{} [label=\"yes\"];", node.id, l.id);
                let _ = writeln!(out, "  n{} -> n{} [label=\"no\"];", node.id, r.id);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn leaf_summary(node: &TreeNode) -> String {
    let rate = |t: Treatment| {
        node.stats
            .empirical_profit(t)
            .map(|p| format!("{p:.3}"))
            .unwrap_or_else(|| "NA".into())
    };
    format!(
        "P̃_A={}, n_A={}; P̃_B={}, n_B={}",
        rate(Treatment::A),
        node.stats.n_a,
        rate(Treatment::B),
        node.stats.n_b
    )
}

// Keeps the `\n` line breaks inserted above.
fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}
