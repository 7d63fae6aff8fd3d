//! Two-arm experiment datasets.
//!
//! A [`Dataset`] is a columnar table holding a binary outcome, a treatment
//! indicator normalized to [`Treatment::A`] (control) and [`Treatment::B`],
//! and any number of quantitative or categorical covariates. Datasets are
//! immutable once built; partitions of the rows are expressed as
//! [`RowSubset`] views.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two treatment arms. `A` is the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Treatment {
    A,
    B,
}

impl Treatment {
    pub const BOTH: [Treatment; 2] = [Treatment::A, Treatment::B];

    pub fn as_str(self) -> &'static str {
        match self {
            Treatment::A => "A",
            Treatment::B => "B",
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Treatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Treatment::A),
            "B" => Ok(Treatment::B),
            other => Err(Error::InvalidArgument(format!(
                "unknown treatment `{other}`, expected A or B"
            ))),
        }
    }
}

/// Role a CSV column plays in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Outcome,
    Treatment,
    Quantitative,
    Categorical,
    Ignore,
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outcome" => Ok(ColumnKind::Outcome),
            "treatment" => Ok(ColumnKind::Treatment),
            "quantitative" | "covariate-quantitative" => Ok(ColumnKind::Quantitative),
            "categorical" | "covariate-categorical" => Ok(ColumnKind::Categorical),
            "ignore" => Ok(ColumnKind::Ignore),
            other => Err(Error::Schema(format!("unknown column kind `{other}`"))),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Outcome => "outcome",
            ColumnKind::Treatment => "treatment",
            ColumnKind::Quantitative => "quantitative",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Ignore => "ignore",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSchema {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered column roles plus the raw labels that map onto the two arms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
    /// Raw labels for `(A, B)` as they appear in the file.
    pub treatment_labels: (String, String),
}

impl Schema {
    /// Builds and validates a schema with the default treatment labels `A`/`B`.
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        let schema = Schema {
            columns,
            treatment_labels: ("A".to_string(), "B".to_string()),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn with_treatment_labels(mut self, a: impl Into<String>, b: impl Into<String>) -> Result<Self> {
        self.treatment_labels = (a.into(), b.into());
        self.validate()?;
        Ok(self)
    }

    /// Parses the sidecar format: one `name:kind` per line. A treatment line
    /// may carry custom labels as `name:treatment=control,treated`. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        let mut labels = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, spec) = line
                .rsplit_once(':')
                .ok_or_else(|| Error::Schema(format!("line {}: expected `name:kind`, found `{line}`", lineno + 1)))?;
            let (kind, extra) = match spec.split_once('=') {
                Some((k, rest)) => (k.trim(), Some(rest)),
                None => (spec.trim(), None),
            };
            let kind: ColumnKind = kind.parse()?;
            if let Some(extra) = extra {
                if kind != ColumnKind::Treatment {
                    return Err(Error::Schema(format!(
                        "line {}: only treatment columns take labels",
                        lineno + 1
                    )));
                }
                let (a, b) = extra.split_once(',').ok_or_else(|| {
                    Error::Schema(format!(
                        "line {}: treatment labels must be `control,treated`",
                        lineno + 1
                    ))
                })?;
                labels = Some((a.trim().to_string(), b.trim().to_string()));
            }
            columns.push(ColumnSchema::new(name.trim(), kind));
        }
        let mut schema = Schema::new(columns)?;
        if let Some((a, b)) = labels {
            schema = schema.with_treatment_labels(a, b)?;
        }
        Ok(schema)
    }

    pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_sidecar(&std::fs::read_to_string(path)?)
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for col in &self.columns {
            out.push_str(&col.name);
            out.push(':');
            out.push_str(&col.kind.to_string());
            if col.kind == ColumnKind::Treatment && (self.treatment_labels.0 != "A" || self.treatment_labels.1 != "B") {
                out.push_str(&format!("={},{}", self.treatment_labels.0, self.treatment_labels.1));
            }
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let count = |k: ColumnKind| self.columns.iter().filter(|c| c.kind == k).count();
        if count(ColumnKind::Outcome) != 1 {
            return Err(Error::Schema("exactly one outcome column is required".into()));
        }
        if count(ColumnKind::Treatment) != 1 {
            return Err(Error::Schema("exactly one treatment column is required".into()));
        }
        if count(ColumnKind::Quantitative) + count(ColumnKind::Categorical) == 0 {
            return Err(Error::Schema("at least one covariate column is required".into()));
        }
        let mut seen = HashMap::new();
        for col in &self.columns {
            if col.name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if seen.insert(col.name.as_str(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate column `{}`", col.name)));
            }
        }
        let (a, b) = &self.treatment_labels;
        if a.is_empty() || b.is_empty() || a == b {
            return Err(Error::Schema(
                "treatment labels must be two distinct non-empty strings".into(),
            ));
        }
        Ok(())
    }

    fn name_of(&self, kind: ColumnKind) -> &str {
        &self
            .columns
            .iter()
            .find(|c| c.kind == kind)
            .expect("validated schema")
            .name
    }
}

/// Categorical column stored as dense codes into a level dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalColumn {
    pub codes: Vec<u32>,
    /// Level labels indexed by code, in first-appearance order.
    pub levels: Vec<String>,
}

impl CategoricalColumn {
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut dict: HashMap<String, u32> = HashMap::new();
        let mut levels = Vec::new();
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *dict.entry(l.to_string()).or_insert_with(|| {
                    levels.push(l.to_string());
                    (levels.len() - 1) as u32
                })
            })
            .collect();
        CategoricalColumn { codes, levels }
    }

    pub fn code_of(&self, label: &str) -> Option<u32> {
        self.levels.iter().position(|l| l == label).map(|p| p as u32)
    }

    pub fn label(&self, row: usize) -> &str {
        &self.levels[self.codes[row] as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Quantitative(Vec<f64>),
    Categorical(CategoricalColumn),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Quantitative(v) => v.len(),
            ColumnValues::Categorical(c) => c.codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnValues::Quantitative(_) => ColumnKind::Quantitative,
            ColumnValues::Categorical(_) => ColumnKind::Categorical,
        }
    }
}

/// A named covariate column.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub values: ColumnValues,
}

impl Covariate {
    pub fn quantitative(name: impl Into<String>, values: Vec<f64>) -> Self {
        Covariate {
            name: name.into(),
            values: ColumnValues::Quantitative(values),
        }
    }

    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, labels: &[S]) -> Self {
        Covariate {
            name: name.into(),
            values: ColumnValues::Categorical(CategoricalColumn::from_labels(labels)),
        }
    }

    fn format_value(&self, row: usize) -> String {
        match &self.values {
            ColumnValues::Quantitative(v) => v[row].to_string(),
            ColumnValues::Categorical(c) => c.label(row).to_string(),
        }
    }
}

/// Covariate columns without outcome or treatment, e.g. rows to score.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    n_rows: usize,
    columns: Vec<Covariate>,
}

impl Covariates {
    pub fn new(columns: Vec<Covariate>) -> Result<Self> {
        let n_rows = columns.first().map(|c| c.values.len()).unwrap_or(0);
        for col in &columns {
            if col.values.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    col.name,
                    col.values.len()
                )));
            }
            if let ColumnValues::Quantitative(v) = &col.values {
                if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::Numeric {
                        row: row + 1,
                        column: col.name.clone(),
                        value: v[row].to_string(),
                    });
                }
            }
        }
        Ok(Covariates { n_rows, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Covariate] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &Covariate {
        &self.columns[index]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Reads covariate columns by name from a headed CSV; other columns are
    /// skipped. Used to score new rows with a fitted model.
    pub fn read_csv<R: Read>(reader: R, wanted: &[(String, ColumnKind)], options: &CsvOptions) -> Result<Self> {
        let mut rdr = options.reader(reader, true);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut positions = Vec::with_capacity(wanted.len());
        for (name, _) in wanted {
            let pos = header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("input is missing column `{name}`")))?;
            positions.push(pos);
        }
        let mut builders: Vec<ColumnBuilder> = wanted
            .iter()
            .map(|(name, kind)| ColumnBuilder::new(name, *kind))
            .collect();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            for (b, &pos) in builders.iter_mut().zip(&positions) {
                b.push(record.get(pos).unwrap_or(""), row)?;
            }
        }
        Covariates::new(builders.into_iter().map(ColumnBuilder::finish).collect())
    }
}

/// CSV dialect options.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

impl CsvOptions {
    fn reader<R: Read>(&self, reader: R, has_header: bool) -> csv::Reader<R> {
        csv::ReaderBuilder::new()
            .delimiter(self.delimiter)
            .has_headers(has_header)
            .flexible(false)
            .from_reader(reader)
    }
}

enum ColumnBuilder {
    Quantitative(String, Vec<f64>),
    Categorical(String, Vec<String>),
}

impl ColumnBuilder {
    fn new(name: &str, kind: ColumnKind) -> Self {
        match kind {
            ColumnKind::Categorical => ColumnBuilder::Categorical(name.to_string(), Vec::new()),
            _ => ColumnBuilder::Quantitative(name.to_string(), Vec::new()),
        }
    }

    fn push(&mut self, raw: &str, row: usize) -> Result<()> {
        let field = raw.trim();
        match self {
            ColumnBuilder::Quantitative(name, values) => {
                if field.is_empty() {
                    return Err(Error::MissingValue {
                        row,
                        column: name.clone(),
                    });
                }
                let x: f64 = field
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| Error::Numeric {
                        row,
                        column: name.clone(),
                        value: field.to_string(),
                    })?;
                values.push(x);
            }
            ColumnBuilder::Categorical(name, values) => {
                if field.is_empty() {
                    return Err(Error::MissingValue {
                        row,
                        column: name.clone(),
                    });
                }
                values.push(field.to_string());
            }
        }
        Ok(())
    }

    fn finish(self) -> Covariate {
        match self {
            ColumnBuilder::Quantitative(name, v) => Covariate::quantitative(name, v),
            ColumnBuilder::Categorical(name, v) => Covariate::categorical(name, &v),
        }
    }
}

/// Outcome, treatment and covariates for a two-arm experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    outcome: Vec<u8>,
    treatment: Vec<Treatment>,
    covariates: Covariates,
}

impl Dataset {
    /// Assembles a dataset from columns, naming the outcome `y` and the
    /// treatment `T`.
    pub fn from_parts(outcome: Vec<u8>, treatment: Vec<Treatment>, covariates: Vec<Covariate>) -> Result<Self> {
        let mut columns = vec![
            ColumnSchema::new("y", ColumnKind::Outcome),
            ColumnSchema::new("T", ColumnKind::Treatment),
        ];
        columns.extend(
            covariates
                .iter()
                .map(|c| ColumnSchema::new(c.name.clone(), c.values.kind())),
        );
        let schema = Schema::new(columns)?;
        Self::with_schema(schema, outcome, treatment, Covariates::new(covariates)?)
    }

    fn with_schema(
        schema: Schema,
        outcome: Vec<u8>,
        treatment: Vec<Treatment>,
        covariates: Covariates,
    ) -> Result<Self> {
        let n = outcome.len();
        if treatment.len() != n || (covariates.n_rows() != n && !covariates.columns.is_empty()) {
            return Err(Error::Schema(format!(
                "column lengths differ: outcome {n}, treatment {}, covariates {}",
                treatment.len(),
                covariates.n_rows()
            )));
        }
        if let Some(row) = outcome.iter().position(|&y| y > 1) {
            return Err(Error::OutcomeDomain {
                row: row + 1,
                value: outcome[row].to_string(),
            });
        }
        Ok(Dataset {
            schema,
            outcome,
            treatment,
            covariates,
        })
    }

    /// Parses a CSV file with the given schema.
    pub fn read_csv(path: impl AsRef<Path>, schema: &Schema, options: &CsvOptions) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::parse_csv(std::io::BufReader::new(file), schema, options)
    }

    /// Parses CSV from any reader. With a header, columns are matched by
    /// name and the header must name exactly the schema's columns; without
    /// one, schema order is positional. Row numbers in errors count data
    /// rows from 1.
    pub fn parse_csv<R: Read>(reader: R, schema: &Schema, options: &CsvOptions) -> Result<Self> {
        schema.validate()?;
        let mut rdr = options.reader(reader, options.has_header);
        let positions: Vec<usize> = if options.has_header {
            let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
            for h in &header {
                if !schema.columns.iter().any(|c| &c.name == h) {
                    return Err(Error::Schema(format!("header column `{h}` is not in the schema")));
                }
            }
            schema
                .columns
                .iter()
                .map(|c| {
                    header
                        .iter()
                        .position(|h| h == &c.name)
                        .ok_or_else(|| Error::Schema(format!("schema column `{}` not found in header", c.name)))
                })
                .collect::<Result<_>>()?
        } else {
            (0..schema.columns.len()).collect()
        };

        let (label_a, label_b) = &schema.treatment_labels;
        let mut outcome = Vec::new();
        let mut treatment = Vec::new();
        let mut builders: Vec<(usize, ColumnBuilder)> = Vec::new();
        for (ci, col) in schema.columns.iter().enumerate() {
            if matches!(col.kind, ColumnKind::Quantitative | ColumnKind::Categorical) {
                builders.push((positions[ci], ColumnBuilder::new(&col.name, col.kind)));
            }
        }

        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            if record.len() != schema.columns.len() {
                return Err(Error::Schema(format!(
                    "row {row} has {} fields, expected {}",
                    record.len(),
                    schema.columns.len()
                )));
            }
            for (ci, col) in schema.columns.iter().enumerate() {
                let field = record.get(positions[ci]).unwrap_or("").trim();
                match col.kind {
                    ColumnKind::Outcome => {
                        if field.is_empty() {
                            return Err(Error::MissingValue {
                                row,
                                column: col.name.clone(),
                            });
                        }
                        outcome.push(match field {
                            "0" => 0,
                            "1" => 1,
                            other => {
                                return Err(Error::OutcomeDomain {
                                    row,
                                    value: other.to_string(),
                                })
                            }
                        });
                    }
                    ColumnKind::Treatment => {
                        if field.is_empty() {
                            return Err(Error::MissingValue {
                                row,
                                column: col.name.clone(),
                            });
                        }
                        treatment.push(if field == label_a {
                            Treatment::A
                        } else if field == label_b {
                            Treatment::B
                        } else {
                            return Err(Error::TreatmentDomain {
                                row,
                                value: field.to_string(),
                            });
                        });
                    }
                    _ => {}
                }
            }
            for (pos, b) in builders.iter_mut() {
                b.push(record.get(*pos).unwrap_or(""), row)?;
            }
        }

        let covariates = Covariates::new(builders.into_iter().map(|(_, b)| b.finish()).collect())?;
        Self::with_schema(schema.clone(), outcome, treatment, covariates)
    }

    /// Writes the dataset as CSV in schema column order. Ignored columns
    /// are not retained and are not written.
    pub fn write_csv<W: Write>(&self, writer: W, options: &CsvOptions) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(options.delimiter)
            .from_writer(writer);
        let cols: Vec<&ColumnSchema> = self
            .schema
            .columns
            .iter()
            .filter(|c| c.kind != ColumnKind::Ignore)
            .collect();
        if options.has_header {
            wtr.write_record(cols.iter().map(|c| c.name.as_str()))?;
        }
        let (label_a, label_b) = &self.schema.treatment_labels;
        for row in 0..self.n_rows() {
            let fields: Vec<String> = cols
                .iter()
                .map(|c| match c.kind {
                    ColumnKind::Outcome => self.outcome[row].to_string(),
                    ColumnKind::Treatment => match self.treatment[row] {
                        Treatment::A => label_a.clone(),
                        Treatment::B => label_b.clone(),
                    },
                    _ => {
                        let idx = self.covariates.position(&c.name).expect("schema covariate");
                        self.covariates.column(idx).format_value(row)
                    }
                })
                .collect();
            wtr.write_record(&fields)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Schema with ignored columns removed, matching what `write_csv` emits.
    pub fn written_schema(&self) -> Schema {
        Schema {
            columns: self
                .schema
                .columns
                .iter()
                .filter(|c| c.kind != ColumnKind::Ignore)
                .cloned()
                .collect(),
            treatment_labels: self.schema.treatment_labels.clone(),
        }
    }

    /// Keeps only the named covariates, in the given order.
    pub fn select_covariates(&self, names: &[&str]) -> Result<Dataset> {
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .covariates
                .position(name)
                .ok_or_else(|| Error::Schema(format!("no covariate named `{name}`")))?;
            cols.push(self.covariates.column(idx).clone());
        }
        let mut columns = vec![
            ColumnSchema::new(self.schema.name_of(ColumnKind::Outcome), ColumnKind::Outcome),
            ColumnSchema::new(self.schema.name_of(ColumnKind::Treatment), ColumnKind::Treatment),
        ];
        columns.extend(cols.iter().map(|c| ColumnSchema::new(c.name.clone(), c.values.kind())));
        let schema = Schema {
            columns,
            treatment_labels: self.schema.treatment_labels.clone(),
        };
        schema.validate()?;
        Self::with_schema(
            schema,
            self.outcome.clone(),
            self.treatment.clone(),
            Covariates::new(cols)?,
        )
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.outcome.len()
    }

    pub fn outcome(&self) -> &[u8] {
        &self.outcome
    }

    pub fn treatment(&self) -> &[Treatment] {
        &self.treatment
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.columns.len()
    }
}

/// A sorted, duplicate-free selection of rows from a [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct RowSubset<'a> {
    data: &'a Dataset,
    indices: Vec<usize>,
}

impl<'a> RowSubset<'a> {
    pub fn all(data: &'a Dataset) -> Self {
        RowSubset {
            data,
            indices: (0..data.n_rows()).collect(),
        }
    }

    /// Sorts the indices; fails on duplicates or out-of-range rows.
    pub fn new(data: &'a Dataset, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("row subset contains duplicate indices".into()));
        }
        if indices.last().is_some_and(|&last| last >= data.n_rows()) {
            return Err(Error::InvalidArgument("row subset index out of range".into()));
        }
        Ok(RowSubset { data, indices })
    }

    pub(crate) fn from_sorted(data: &'a Dataset, indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        RowSubset { data, indices }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Union with another subset of the same dataset.
    pub fn union(&self, other: &RowSubset<'a>) -> Result<RowSubset<'a>> {
        if !std::ptr::eq(self.data, other.data) {
            return Err(Error::InvalidArgument(
                "cannot union subsets of different datasets".into(),
            ));
        }
        let mut idx = Vec::with_capacity(self.len() + other.len());
        idx.extend_from_slice(&self.indices);
        idx.extend_from_slice(&other.indices);
        idx.sort_unstable();
        idx.dedup();
        Ok(RowSubset::from_sorted(self.data, idx))
    }
}

/// Partitions rows into train/validation/test subsets. Validation and test
/// receive `floor(f * n)` rows each; the remainder goes to train. The row
/// permutation comes from a PRNG seeded with `seed`.
pub fn split_dataset(
    data: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(RowSubset<'_>, RowSubset<'_>, RowSubset<'_>)> {
    let (f_train, f_val, f_test) = fractions;
    for f in [f_train, f_val, f_test] {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must be positive, got {f}"
            )));
        }
    }
    if (f_train + f_val + f_test - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must sum to 1, got {}",
            f_train + f_val + f_test
        )));
    }
    let n = data.n_rows();
    let floor = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
    let n_val = floor(f_val);
    let n_test = floor(f_test);
    let n_train = n - n_val - n_test;

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let take = |range: std::ops::Range<usize>| {
        let mut v = perm[range].to_vec();
        v.sort_unstable();
        RowSubset::from_sorted(data, v)
    };
    Ok((
        take(0..n_train),
        take(n_train..n_train + n_val),
        take(n_train + n_val..n),
    ))
}
