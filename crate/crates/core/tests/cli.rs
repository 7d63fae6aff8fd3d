mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use abtree::data::{CsvOptions, Dataset, RowSubset};
use abtree::prune::{prune_sequence, select_subtree, SelectionMetric};
use abtree::tree::{grow, GrowthConfig, Tree};

fn abtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abtree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
    train: PathBuf,
    val: PathBuf,
    schema: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let write = |name: &str, data: &Dataset| {
            let path = dir.path().join(name);
            data.write_csv(fs::File::create(&path).unwrap(), &CsvOptions::default())
                .unwrap();
            path
        };
        let train_data = common::structured_dataset(&mut rng, 600, 2);
        let val_data = common::structured_dataset(&mut rng, 300, 2);
        let train = write("train.csv", &train_data);
        let val = write("val.csv", &val_data);
        let schema = dir.path().join("schema.txt");
        fs::write(&schema, train_data.written_schema().to_sidecar()).unwrap();
        Workspace {
            dir,
            train,
            val,
            schema,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn fit(&self, model: &Path) -> Output {
        abtree(&[
            "fit",
            "--train",
            s(&self.train),
            "--val",
            s(&self.val),
            "--schema",
            s(&self.schema),
            "--min-bucket",
            "10",
            "--min-split",
            "25",
            "--prune",
            "--model-out",
            s(model),
        ])
    }
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn in_memory_model(ws: &Workspace) -> Tree {
    let schema = abtree::data::Schema::read_sidecar(&ws.schema).unwrap();
    let opts = CsvOptions::default();
    let train = Dataset::read_csv(&ws.train, &schema, &opts).unwrap();
    let val = Dataset::read_csv(&ws.val, &schema, &opts).unwrap();
    let cfg = GrowthConfig {
        min_split: 25,
        min_bucket: 10,
        max_depth: 5,
    };
    let full = grow(&RowSubset::all(&train), &cfg).unwrap();
    let seq = prune_sequence(&full);
    select_subtree(&seq, &RowSubset::all(&val), SelectionMetric::AssignmentMatch)
        .unwrap()
        .tree
        .clone()
}

#[test]
fn fit_export_predict_pipeline() {
    let ws = Workspace::new();
    let model = ws.path("m.json");
    assert_ok(&ws.fit(&model));

    let out = abtree(&["export", "--model", s(&model), "--format", "dot"]);
    assert_ok(&out);
    let dot = String::from_utf8(out.stdout).unwrap();
    let tree = Tree::from_json(&fs::read_to_string(&model).unwrap()).unwrap();
    assert!(dot.starts_with("digraph"));
    let node_lines = dot
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains("->"))
        .count();
    assert_eq!(node_lines, tree.n_nodes());

    let assigned = ws.path("a.csv");
    assert_ok(&abtree(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&ws.val),
        "--out",
        s(&assigned),
    ]));
    let text = fs::read_to_string(&assigned).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row_index,treatment"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 300);
    assert!(rows
        .iter()
        .enumerate()
        .all(|(i, l)| l == &format!("{i},A") || l == &format!("{i},B")));
}

#[test]
fn predictions_match_in_memory_fit_byte_for_byte() {
    let ws = Workspace::new();
    let model = ws.path("m.json");
    assert_ok(&ws.fit(&model));
    let tree = in_memory_model(&ws);
    assert_eq!(Tree::from_json(&fs::read_to_string(&model).unwrap()).unwrap(), tree);

    let exported = ws.path("exported.json");
    assert_ok(&abtree(&[
        "export",
        "--model",
        s(&model),
        "--format",
        "json",
        "--out",
        s(&exported),
    ]));

    let schema = abtree::data::Schema::read_sidecar(&ws.schema).unwrap();
    let input = Dataset::read_csv(&ws.val, &schema, &CsvOptions::default()).unwrap();
    let rows: Vec<usize> = (0..input.n_rows()).collect();
    let mut expected = String::from("row_index,treatment\n");
    for (i, t) in tree.predict_rows(&input, &rows).unwrap().iter().enumerate() {
        expected.push_str(&format!("{i},{t}\n"));
    }

    let out = abtree(&["predict", "--model", s(&exported), "--input", s(&ws.val)]);
    assert_ok(&out);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn inputs_are_not_modified() {
    let ws = Workspace::new();
    let before: Vec<Vec<u8>> = [&ws.train, &ws.val, &ws.schema]
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    let model = ws.path("m.json");
    assert_ok(&ws.fit(&model));
    let model_bytes = fs::read(&model).unwrap();
    assert_ok(&abtree(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&ws.train),
        "--out",
        s(&ws.path("a.csv")),
    ]));
    assert_ok(&abtree(&["export", "--model", s(&model)]));
    let after: Vec<Vec<u8>> = [&ws.train, &ws.val, &ws.schema]
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    assert_eq!(before, after);
    assert_eq!(model_bytes, fs::read(&model).unwrap());
}

#[test]
fn sequence_audit_is_written() {
    let ws = Workspace::new();
    let seq = ws.path("seq.json");
    let out = abtree(&[
        "fit",
        "--train",
        s(&ws.train),
        "--val",
        s(&ws.val),
        "--schema",
        s(&ws.schema),
        "--prune",
        "--sequence-out",
        s(&seq),
        "--model-out",
        s(&ws.path("m.json")),
    ]);
    assert_ok(&out);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&seq).unwrap()).unwrap();
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.last().unwrap()["leaves_after"], 1);
}

#[test]
fn usage_errors_exit_1() {
    let ws = Workspace::new();
    assert_eq!(abtree(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(abtree(&[]).status.code(), Some(1));
    // --prune needs a validation set
    let out = abtree(&[
        "fit",
        "--train",
        s(&ws.train),
        "--schema",
        s(&ws.schema),
        "--prune",
        "--model-out",
        s(&ws.path("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!ws.path("m.json").exists());
    assert_eq!(abtree(&["simulate", "--phi", "7"]).status.code(), Some(1));
    assert_eq!(abtree(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let ws = Workspace::new();
    let missing = abtree(&[
        "fit",
        "--train",
        s(&ws.path("nope.csv")),
        "--schema",
        s(&ws.schema),
        "--model-out",
        s(&ws.path("m.json")),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));

    let wrong_schema = ws.path("wrong.txt");
    fs::write(&wrong_schema, "y:outcome\nT:treatment\nx0:quantitative\n").unwrap();
    let out = abtree(&[
        "fit",
        "--train",
        s(&ws.train),
        "--schema",
        s(&wrong_schema),
        "--model-out",
        s(&ws.path("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert_eq!(msg.trim().lines().count(), 1, "{msg}");

    let bad_model = ws.path("bad.json");
    fs::write(&bad_model, r#"{"format":"other/v9","features":[],"root":{}}"#).unwrap();
    assert_eq!(abtree(&["export", "--model", s(&bad_model)]).status.code(), Some(2));
}

#[test]
fn simulate_writes_one_row_per_rep_and_method() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.csv");
    let out = abtree(&[
        "simulate",
        "--phi",
        "1",
        "--n",
        "5000",
        "--reps",
        "50",
        "--seed",
        "42",
        "--out",
        s(&out_path),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 201);
    assert_eq!(lines[0], "scenario,rep,method,mean_profit");

    let again = dir.path().join("r2.csv");
    assert_ok(&abtree(&[
        "simulate",
        "--phi",
        "1",
        "--n",
        "5000",
        "--reps",
        "50",
        "--seed",
        "42",
        "--threads",
        "3",
        "--out",
        s(&again),
    ]));
    assert_eq!(fs::read(&out_path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn simulate_summary_goes_to_stderr() {
    let out = abtree(&[
        "simulate",
        "--phi",
        "3,4",
        "--n",
        "800",
        "--reps",
        "2",
        "--mode",
        "centered",
        "--summary",
    ]);
    assert_ok(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1 + 2 * 2 * 4);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().filter(|l| l.starts_with("phi4_centered")).count(), 4);
}
