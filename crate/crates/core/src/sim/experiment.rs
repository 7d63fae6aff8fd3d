//! The four-method comparison run over repeated simulated datasets.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    counterfactual_profit, covariate_rows, derive_seed, expected_profit, oracle_assignments, simulate_dataset,
    Scenario, Stream, MODEL_COVARIATES,
};
use crate::data::split_dataset;
use crate::error::Result;
use crate::policy::{global_ab_decision, Policy};
use crate::prune::{prune_sequence, select_subtree};
use crate::tree::{grow, GrowthConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Random,
    AbTest,
    AbtreeNoprune,
    AbtreePruned,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Random,
        Method::AbTest,
        Method::AbtreeNoprune,
        Method::AbtreePruned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::AbTest => "ab_test",
            Method::AbtreeNoprune => "abtree_noprune",
            Method::AbtreePruned => "abtree_pruned",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Score of one method on one repetition's test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodRecord {
    pub rep: usize,
    pub method: Method,
    /// Mean of counterfactual outcomes drawn under the method's assignments.
    pub mean_profit: f64,
    /// Expectation of `mean_profit` given the test covariates.
    pub expected_profit: f64,
    /// Standard error of `mean_profit` around `expected_profit`.
    pub standard_error: f64,
}

/// Per-repetition metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepInfo {
    pub rep: usize,
    pub data_seed: u64,
    pub split_seed: u64,
    pub random_policy_seed: u64,
    pub counterfactual_seed: u64,
    pub n_test: usize,
    /// Decision of the global test on train + validation.
    pub ab_choice: String,
    pub ab_z: f64,
    pub noprune_leaves: usize,
    pub full_train_leaves: usize,
    pub pruned_leaves: usize,
    /// Expected test-set profit of the pointwise-optimal assignment.
    pub oracle_expected_profit: f64,
    pub oracle_standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub growth: GrowthConfig,
    /// One record per (rep, method), ordered by rep then method.
    pub records: Vec<MethodRecord>,
    pub reps: Vec<RepInfo>,
}

impl ExperimentResult {
    pub fn profits(&self, method: Method) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.mean_profit)
            .collect()
    }

    pub fn mean_profit(&self, method: Method) -> f64 {
        let p = self.profits(method);
        p.iter().sum::<f64>() / p.len() as f64
    }
}

/// Runs every repetition of `scenario`. Repetitions execute on the current
/// rayon pool; the output does not depend on its size.
pub fn run_experiment(scenario: &Scenario, growth: &GrowthConfig) -> Result<ExperimentResult> {
    scenario.validate()?;
    growth.validate()?;
    let per_rep: Vec<(Vec<MethodRecord>, RepInfo)> = (0..scenario.n_reps)
        .into_par_iter()
        .map(|rep| run_rep(scenario, growth, rep))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(per_rep.len() * Method::ALL.len());
    let mut reps = Vec::with_capacity(per_rep.len());
    for (r, info) in per_rep {
        records.extend(r);
        reps.push(info);
    }
    Ok(ExperimentResult {
        scenario: *scenario,
        growth: *growth,
        records,
        reps,
    })
}

fn run_rep(scenario: &Scenario, growth: &GrowthConfig, rep: usize) -> Result<(Vec<MethodRecord>, RepInfo)> {
    let seed = |s| derive_seed(scenario.master_seed, rep as u64, s);
    let full = simulate_dataset(scenario, rep)?;
    let modeled = full.select_covariates(&MODEL_COVARIATES)?;
    let (train, val, test) = split_dataset(&modeled, scenario.fractions, seed(Stream::Split))?;
    let train_val = train.union(&val)?;

    let ab = global_ab_decision(&train_val, scenario.alpha)?;
    let noprune = grow(&train_val, growth)?;
    let full_train = grow(&train, growth)?;
    let sequence = prune_sequence(&full_train);
    let selected = select_subtree(&sequence, &val, scenario.metric)?;

    let policies = [
        (Method::Random, Policy::random(0.5)?),
        (Method::AbTest, Policy::Constant(ab.chosen)),
        (Method::AbtreeNoprune, Policy::Tree(noprune.clone())),
        (Method::AbtreePruned, Policy::Tree(selected.tree.clone())),
    ];

    let test_rows = covariate_rows(&full, test.indices())?;
    let cf_seed = seed(Stream::Counterfactual);
    let mut records = Vec::with_capacity(policies.len());
    for (method, policy) in &policies {
        let assigned = policy.assign_subset(&test, seed(Stream::RandomPolicy))?;
        let mean_profit = counterfactual_profit(scenario, &test_rows, &assigned, cf_seed)?;
        let (expected, se) = expected_profit(scenario.response, &test_rows, &assigned)?;
        records.push(MethodRecord {
            rep,
            method: *method,
            mean_profit,
            expected_profit: expected,
            standard_error: se,
        });
    }

    let oracle = oracle_assignments(scenario.response, &test_rows);
    let (oracle_expected, oracle_se) = expected_profit(scenario.response, &test_rows, &oracle)?;
    let info = RepInfo {
        rep,
        data_seed: seed(Stream::Data),
        split_seed: seed(Stream::Split),
        random_policy_seed: seed(Stream::RandomPolicy),
        counterfactual_seed: cf_seed,
        n_test: test.len(),
        ab_choice: ab.chosen.to_string(),
        ab_z: ab.z_statistic,
        noprune_leaves: noprune.n_leaves(),
        full_train_leaves: full_train.n_leaves(),
        pruned_leaves: selected.tree.n_leaves(),
        oracle_expected_profit: oracle_expected,
        oracle_standard_error: oracle_se,
    };
    Ok((records, info))
}

/// Writes `scenario,rep,method,mean_profit` rows for every result.
pub fn write_results_csv<W: Write>(results: &[ExperimentResult], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["scenario", "rep", "method", "mean_profit"])?;
    for result in results {
        let label = result.scenario.label();
        for r in &result.records {
            wtr.write_record([
                label.as_str(),
                &r.rep.to_string(),
                r.method.as_str(),
                &r.mean_profit.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Cross-repetition mean and sample standard deviation for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub scenario: String,
    pub method: Method,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl fmt::Display for MethodSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<16} {:<15} {:.4} ± {:.4} (n={})",
            self.scenario, self.method, self.mean, self.sd, self.n
        )
    }
}

pub fn summarize(result: &ExperimentResult) -> Vec<MethodSummary> {
    Method::ALL
        .iter()
        .map(|&method| {
            let p = result.profits(method);
            let n = p.len();
            let mean = p.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            MethodSummary {
                scenario: result.scenario.label(),
                method,
                mean,
                sd,
                n,
            }
        })
        .collect()
}
