//! Simulation harness for comparing assignment methods.
//!
//! Synthetic experiments draw a fair coin for the treatment, five
//! independent uniform covariates, and a binary outcome whose log-odds are
//! given by one of four response functions. Because the generating model is
//! known, any policy can be scored by re-drawing outcomes under the
//! treatments it chooses.

mod experiment;
mod seed;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnValues, Covariate, Dataset, Treatment};
use crate::error::{Error, Result};
use crate::prune::SelectionMetric;

pub use experiment::{
    run_experiment, summarize, write_results_csv, ExperimentResult, Method, MethodRecord, MethodSummary, RepInfo,
};
pub use seed::{derive_seed, Stream};

/// Number of simulated covariates.
pub const N_COVARIATES: usize = 5;

/// Covariate names in generated datasets.
pub const COVARIATE_NAMES: [&str; N_COVARIATES] = ["X1", "X2", "X3", "X4", "X5"];

/// Covariates the tree methods may use; `X5` is withheld.
pub const MODEL_COVARIATES: [&str; 4] = ["X1", "X2", "X3", "X4"];

/// One simulated covariate vector.
pub type CovariateRow = [f64; N_COVARIATES];

/// Sign with `sgn(0) = +1`.
pub fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Log-odds of success as a function of covariates and treatment
/// (`A` = 0, `B` = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseFunction {
    /// `2T sgn(X1 - 0.2) + X3 + X4`
    Phi1,
    /// `2T sgn(X1) sgn(X2 - 0.3) + X2 + 0.2 X3 + 0.5 X4`
    Phi2,
    /// `3T sgn(X1) + 2 X2 + X3 + 0.5 X5`
    Phi3,
    /// `3T sgn(X1) + T sgn(X2) + X3`
    Phi4,
}

impl ResponseFunction {
    pub const ALL: [ResponseFunction; 4] = [Self::Phi1, Self::Phi2, Self::Phi3, Self::Phi4];

    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Self::Phi1),
            2 => Ok(Self::Phi2),
            3 => Ok(Self::Phi3),
            4 => Ok(Self::Phi4),
            _ => Err(Error::InvalidArgument(format!(
                "response function index must be 1-4, got {k}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Phi1 => 1,
            Self::Phi2 => 2,
            Self::Phi3 => 3,
            Self::Phi4 => 4,
        }
    }

    pub fn eval(self, x: &CovariateRow, t: Treatment) -> f64 {
        let t = match t {
            Treatment::A => 0.0,
            Treatment::B => 1.0,
        };
        let [x1, x2, x3, x4, x5] = *x;
        match self {
            Self::Phi1 => 2.0 * t * sgn(x1 - 0.2) + x3 + x4,
            Self::Phi2 => 2.0 * t * sgn(x1) * sgn(x2 - 0.3) + x2 + 0.2 * x3 + 0.5 * x4,
            Self::Phi3 => 3.0 * t * sgn(x1) + 2.0 * x2 + x3 + 0.5 * x5,
            Self::Phi4 => 3.0 * t * sgn(x1) + t * sgn(x2) + x3,
        }
    }

    /// Success probability under treatment `t`.
    pub fn success_probability(self, x: &CovariateRow, t: Treatment) -> f64 {
        logistic(self.eval(x, t))
    }

    /// Pointwise best arm; ties go to `A`.
    pub fn oracle_treatment(self, x: &CovariateRow) -> Treatment {
        if self.eval(x, Treatment::B) > self.eval(x, Treatment::A) {
            Treatment::B
        } else {
            Treatment::A
        }
    }
}

/// Support of the simulated covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateMode {
    /// `Uniform(0, 1)`.
    #[default]
    Verbatim,
    /// `Uniform(-1, 1)`, so that `sgn(X1)` and `sgn(X2)` take both signs.
    Centered,
}

impl FromStr for CovariateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "centered" => Ok(Self::Centered),
            other => Err(Error::InvalidArgument(format!(
                "unknown covariate mode `{other}`, expected verbatim or centered"
            ))),
        }
    }
}

impl fmt::Display for CovariateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verbatim => "verbatim",
            Self::Centered => "centered",
        })
    }
}

/// Everything that determines a simulated comparison apart from the tree
/// growth parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub response: ResponseFunction,
    pub n_rows: usize,
    pub n_reps: usize,
    pub master_seed: u64,
    pub covariate_mode: CovariateMode,
    /// Train, validation and test proportions.
    pub fractions: (f64, f64, f64),
    /// Subtree selection rule for the pruned tree.
    pub metric: SelectionMetric,
    /// Significance level of the A/B baseline.
    pub alpha: f64,
}

impl Scenario {
    pub fn new(response: ResponseFunction) -> Self {
        Scenario {
            response,
            n_rows: 5000,
            n_reps: 50,
            master_seed: 0,
            covariate_mode: CovariateMode::Verbatim,
            fractions: (0.5, 0.25, 0.25),
            metric: SelectionMetric::AssignmentMatch,
            alpha: 0.05,
        }
    }

    /// Short identifier such as `phi1_verbatim`.
    pub fn label(&self) -> String {
        format!("phi{}_{}", self.response.index(), self.covariate_mode)
    }

    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_reps == 0 {
            return Err(Error::InvalidArgument(
                "scenario needs at least one row and one repetition".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Generates the dataset for repetition `rep`: columns `y`, `T`, `X1..X5`.
pub fn simulate_dataset(scenario: &Scenario, rep: usize) -> Result<Dataset> {
    scenario.validate()?;
    if rep >= scenario.n_reps {
        return Err(Error::InvalidArgument(format!(
            "repetition {rep} out of range for {} repetitions",
            scenario.n_reps
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scenario.master_seed, rep as u64, Stream::Data));
    let n = scenario.n_rows;
    let mut outcome = Vec::with_capacity(n);
    let mut treatment = Vec::with_capacity(n);
    let mut columns: Vec<Vec<f64>> = (0..N_COVARIATES).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let t = if rng.random::<f64>() < 0.5 {
            Treatment::B
        } else {
            Treatment::A
        };
        let mut x = [0.0; N_COVARIATES];
        for (j, xj) in x.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *xj = match scenario.covariate_mode {
                CovariateMode::Verbatim => u,
                CovariateMode::Centered => 2.0 * u - 1.0,
            };
            columns[j].push(*xj);
        }
        let p = scenario.response.success_probability(&x, t);
        outcome.push(u8::from(rng.random::<f64>() < p));
        treatment.push(t);
    }
    let covariates = COVARIATE_NAMES
        .iter()
        .zip(columns)
        .map(|(name, values)| Covariate::quantitative(*name, values))
        .collect();
    Dataset::from_parts(outcome, treatment, covariates)
}

/// Covariate vectors of the given rows of a simulated dataset.
pub fn covariate_rows(data: &Dataset, rows: &[usize]) -> Result<Vec<CovariateRow>> {
    let mut cols: Vec<&[f64]> = Vec::with_capacity(N_COVARIATES);
    for name in COVARIATE_NAMES {
        let idx = data
            .covariates()
            .position(name)
            .ok_or_else(|| Error::Schema(format!("simulated dataset lacks `{name}`")))?;
        match &data.covariates().column(idx).values {
            ColumnValues::Quantitative(v) => cols.push(v),
            ColumnValues::Categorical(_) => return Err(Error::Schema(format!("`{name}` must be quantitative"))),
        }
    }
    Ok(rows.iter().map(|&r| std::array::from_fn(|j| cols[j][r])).collect())
}

/// Mean of outcomes re-drawn under `assignments`. One uniform is drawn per
/// row, in order, from a PRNG seeded with `seed`; policies scored with the
/// same seed therefore share their randomness.
pub fn counterfactual_profit(
    scenario: &Scenario,
    rows: &[CovariateRow],
    assignments: &[Treatment],
    seed: u64,
) -> Result<f64> {
    check_lengths(rows, assignments)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = rows
        .iter()
        .zip(assignments)
        .filter(|(x, &t)| rng.random::<f64>() < scenario.response.success_probability(x, t))
        .count();
    Ok(successes as f64 / rows.len() as f64)
}

/// Exact expected counterfactual profit given the rows, with the standard
/// error of the corresponding Monte Carlo mean.
pub fn expected_profit(
    response: ResponseFunction,
    rows: &[CovariateRow],
    assignments: &[Treatment],
) -> Result<(f64, f64)> {
    check_lengths(rows, assignments)?;
    let (mut mean, mut var) = (0.0, 0.0);
    for (x, &t) in rows.iter().zip(assignments) {
        let p = response.success_probability(x, t);
        mean += p;
        var += p * (1.0 - p);
    }
    let n = rows.len() as f64;
    Ok((mean / n, var.sqrt() / n))
}

/// Pointwise-optimal assignment for each row.
pub fn oracle_assignments(response: ResponseFunction, rows: &[CovariateRow]) -> Vec<Treatment> {
    rows.iter().map(|x| response.oracle_treatment(x)).collect()
}

fn check_lengths(rows: &[CovariateRow], assignments: &[Treatment]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    if rows.len() != assignments.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} assignments",
            rows.len(),
            assignments.len()
        )));
    }
    Ok(())
}
