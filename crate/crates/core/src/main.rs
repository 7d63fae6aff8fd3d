use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use abtree::data::{ColumnKind, Covariates, CsvOptions, Dataset, RowSubset, Schema};
use abtree::prune::{prune_sequence, select_subtree, SelectionMetric};
use abtree::sim::{run_experiment, summarize, write_results_csv, CovariateMode, ResponseFunction, Scenario};
use abtree::tree::{grow, GrowthConfig, Tree};
use abtree::Policy;

#[derive(Parser)]
#[command(
    name = "abtree",
    version,
    about = "Tree-based treatment assignment for two-arm experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow (and optionally prune) a tree from a training CSV.
    Fit(FitArgs),
    /// Assign treatments to the rows of a CSV with a saved model.
    Predict(PredictArgs),
    /// Run the simulated comparison of assignment methods.
    Simulate(SimulateArgs),
    /// Render a saved model as DOT or JSON.
    Export(ExportArgs),
}

#[derive(Args, Clone, Copy)]
struct GrowthArgs {
    /// Minimum rows per arm for a node to be split.
    #[arg(long, default_value_t = 20)]
    min_split: u64,
    /// Minimum rows per arm in every child.
    #[arg(long, default_value_t = 7)]
    min_bucket: u64,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
}

impl From<GrowthArgs> for GrowthConfig {
    fn from(g: GrowthArgs) -> Self {
        GrowthConfig {
            min_split: g.min_split,
            min_bucket: g.min_bucket,
            max_depth: g.max_depth,
        }
    }
}

#[derive(Args)]
struct CsvArgs {
    /// Field delimiter (single byte).
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Input files have no header row; columns are taken in schema order.
    #[arg(long)]
    no_header: bool,
}

impl CsvArgs {
    fn options(&self) -> anyhow::Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        Ok(CsvOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    train: PathBuf,
    /// Hold-out rows used to choose among pruned subtrees.
    #[arg(long)]
    val: Option<PathBuf>,
    /// Sidecar file with one `name:kind` line per column.
    #[arg(long)]
    schema: PathBuf,
    #[command(flatten)]
    growth: GrowthArgs,
    /// Prune and select a subtree on the validation set.
    #[arg(long, requires = "val")]
    prune: bool,
    #[arg(long, default_value = "assignment-match")]
    metric: SelectionMetric,
    #[arg(long)]
    model_out: PathBuf,
    /// Also write the prune sequence as JSON.
    #[arg(long, requires = "prune")]
    sequence_out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field delimiter of the input; the input must have a header row.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct SimulateArgs {
    /// Response functions to run, e.g. `1,2,3,4`.
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = clap::value_parser!(u8).range(1..=4))]
    phi: Vec<u8>,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "verbatim")]
    mode: CovariateMode,
    #[command(flatten)]
    growth: GrowthArgs,
    #[arg(long, default_value = "assignment-match")]
    metric: SelectionMetric,
    /// Significance level of the A/B baseline.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Results CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print per-method mean and standard deviation to standard error.
    #[arg(long)]
    summary: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Simulate(a) => simulate(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_dataset(path: &Path, schema: &Schema, opts: &CsvOptions) -> anyhow::Result<Dataset> {
    Dataset::read_csv(path, schema, opts).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<Tree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read model {}", path.display()))?;
    Tree::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

fn fit(a: FitArgs) -> anyhow::Result<()> {
    let opts = a.csv.options()?;
    let schema = Schema::read_sidecar(&a.schema).with_context(|| format!("reading schema {}", a.schema.display()))?;
    let growth = GrowthConfig::from(a.growth);
    growth.validate()?;
    let train = read_dataset(&a.train, &schema, &opts)?;
    let full = grow(&RowSubset::all(&train), &growth)?;
    info!("grown tree: {} leaves, objective {}", full.n_leaves(), full.objective());

    let model = if a.prune {
        let val_path = a.val.as_deref().expect("clap enforces --val with --prune");
        let val = read_dataset(val_path, &schema, &opts)?;
        let seq = prune_sequence(&full);
        if let Some(p) = &a.sequence_out {
            std::fs::write(p, seq.to_json()?).with_context(|| format!("cannot write {}", p.display()))?;
        }
        let chosen = select_subtree(&seq, &RowSubset::all(&val), a.metric)?;
        info!(
            "selected subtree {} of {} ({} leaves, {} = {:.4})",
            chosen.index,
            seq.trees.len(),
            chosen.tree.n_leaves(),
            a.metric,
            chosen.score.value()
        );
        chosen.tree.clone()
    } else {
        if a.val.is_some() {
            warn!("--val is only used with --prune; ignoring it");
        }
        full
    };
    std::fs::write(&a.model_out, model.to_json()?)
        .with_context(|| format!("cannot write {}", a.model_out.display()))?;
    Ok(())
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let opts = CsvArgs {
        delimiter: a.delimiter,
        no_header: false,
    }
    .options()?;
    let tree = load_model(&a.model)?;
    let wanted: Vec<(String, ColumnKind)> = tree.features.iter().map(|f| (f.name.clone(), f.kind)).collect();
    let file = File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let frame = Covariates::read_csv(io::BufReader::new(file), &wanted, &opts)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let rows: Vec<usize> = (0..frame.n_rows()).collect();
    let assigned = Policy::Tree(tree).assign(&frame, &rows, 0)?;

    let mut wtr = csv::Writer::from_writer(output(a.out.as_deref())?);
    wtr.write_record(["row_index", "treatment"])?;
    for (i, t) in assigned.iter().enumerate() {
        wtr.write_record([i.to_string().as_str(), t.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let growth = GrowthConfig::from(a.growth);
    growth.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads).build()?;
    let mut results = Vec::with_capacity(a.phi.len());
    for &k in &a.phi {
        let scenario = Scenario {
            n_rows: a.n,
            n_reps: a.reps,
            master_seed: a.seed,
            covariate_mode: a.mode,
            metric: a.metric,
            alpha: a.alpha,
            ..Scenario::new(ResponseFunction::from_index(k)?)
        };
        info!("running {} ({} reps of {} rows)", scenario.label(), a.reps, a.n);
        results.push(pool.install(|| run_experiment(&scenario, &growth))?);
    }
    write_results_csv(&results, output(a.out.as_deref())?)?;
    if a.summary {
        for r in &results {
            for s in summarize(r) {
                eprintln!("{s}");
            }
        }
    }
    Ok(())
}

fn export(a: ExportArgs) -> anyhow::Result<()> {
    let tree = load_model(&a.model)?;
    let text = match a.format {
        ExportFormat::Dot => tree.to_dot(),
        ExportFormat::Json => tree.to_json()?,
    };
    let mut out = output(a.out.as_deref())?;
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
