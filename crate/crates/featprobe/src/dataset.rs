//! Columnar datasets with declared column roles, fold splitting, and
//! vector standardization.
//!
//! A [`Dataset`] is immutable after construction and safe to share
//! read-only across parallel workers.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Missing-value markers recognized at ingestion.
const MISSING_MARKERS: [&str; 2] = ["?", ""];

/// Default cap on categorical cardinality for one-hot expansion.
pub const DEFAULT_MAX_ONEHOT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColType {
    Numeric,
    Categorical,
}

/// Role declaration plus per-column type hints, as supplied by CLI flags
/// or a JSON sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub label: String,
    #[serde(default)]
    pub prediction: Option<String>,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub candidates: Vec<String>,
    #[serde(default)]
    pub types: HashMap<String, ColType>,
    #[serde(default = "default_max_onehot")]
    pub max_onehot: usize,
}

fn default_max_onehot() -> usize {
    DEFAULT_MAX_ONEHOT
}

impl Schema {
    pub fn new(label: impl Into<String>) -> Self {
        Schema {
            label: label.into(),
            prediction: None,
            group: None,
            candidates: Vec::new(),
            types: HashMap::new(),
            max_onehot: DEFAULT_MAX_ONEHOT,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(serde_json::from_reader(file)?)
    }
}

#[derive(Debug, Clone)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn is_numeric(&self) -> bool {
        matches!(self.data, ColumnData::Numeric(_))
    }
}

/// Bindings of column names to their roles in a run.
#[derive(Debug, Clone)]
pub struct Roles {
    pub label: String,
    pub prediction: Option<String>,
    pub group: Option<String>,
    pub candidates: Vec<String>,
}

/// Immutable columnar table with role bindings.
///
/// Categorical columns with cardinality within the one-hot cap are
/// expanded to 0/1 indicator columns at load time; `blocks` maps each
/// original column name to the numeric columns that now represent it.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    index: HashMap<String, usize>,
    n_rows: usize,
    pub roles: Roles,
    pub dropped_rows: usize,
    blocks: Vec<(String, Vec<String>)>,
}

impl Dataset {
    /// Build a dataset from already-numeric columns. Intended for
    /// synthetic data and tests; no one-hot expansion is performed.
    pub fn from_numeric_columns(
        cols: Vec<(String, Vec<f64>)>,
        roles: Roles,
    ) -> Result<Dataset> {
        let n_rows = cols.first().map(|(_, v)| v.len()).unwrap_or(0);
        let mut columns = Vec::with_capacity(cols.len());
        let mut blocks = Vec::with_capacity(cols.len());
        for (name, v) in cols {
            if v.len() != n_rows {
                return Err(Error::schema(format!(
                    "column '{name}' has {} rows, expected {n_rows}",
                    v.len()
                )));
            }
            blocks.push((name.clone(), vec![name.clone()]));
            columns.push(Column {
                name,
                data: ColumnData::Numeric(v),
            });
        }
        let ds = Dataset {
            index: columns
                .iter()
                .enumerate()
                .map(|(i, c)| (c.name.clone(), i))
                .collect(),
            columns,
            n_rows,
            roles,
            dropped_rows: 0,
            blocks,
        };
        ds.check_roles()?;
        Ok(ds)
    }

    fn check_roles(&self) -> Result<()> {
        let mut seen = Vec::new();
        let mut check = |name: &str, role: &str| -> Result<()> {
            if !self.index.contains_key(name) {
                return Err(Error::schema(format!(
                    "{role} column '{name}' not found in data"
                )));
            }
            if seen.contains(&name.to_string()) {
                return Err(Error::schema(format!(
                    "column '{name}' bound to more than one role"
                )));
            }
            seen.push(name.to_string());
            Ok(())
        };
        check(&self.roles.label, "label")?;
        if let Some(p) = &self.roles.prediction {
            check(p, "prediction")?;
        }
        if let Some(g) = &self.roles.group {
            check(g, "group")?;
        }
        for c in &self.roles.candidates {
            if !self.index.contains_key(c) && !self.blocks.iter().any(|(n, _)| n == c) {
                return Err(Error::schema(format!(
                    "candidate column '{c}' not found in data"
                )));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.index.get(name).map(|&i| &self.columns[i])
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Numeric values of a column, or a schema error.
    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name) {
            Some(Column {
                data: ColumnData::Numeric(v),
                ..
            }) => Ok(v),
            Some(_) => Err(Error::schema(format!("column '{name}' is not numeric"))),
            None => Err(Error::schema(format!("column '{name}' not found"))),
        }
    }

    /// The numeric columns that represent one original column
    /// (the one-hot block for an expanded categorical, or the column
    /// itself). Unknown names resolve to a direct column lookup.
    pub fn block(&self, name: &str) -> Result<Vec<&[f64]>> {
        if let Some((_, expanded)) = self.blocks.iter().find(|(n, _)| n == name) {
            return expanded.iter().map(|c| self.numeric(c)).collect();
        }
        Ok(vec![self.numeric(name)?])
    }

    /// Names of the numeric columns backing a block.
    pub fn block_names(&self, name: &str) -> Vec<String> {
        match self.blocks.iter().find(|(n, _)| n == name) {
            Some((_, expanded)) => expanded.clone(),
            None => vec![name.to_string()],
        }
    }

    /// Original (pre-expansion) feature names, excluding role columns.
    pub fn feature_names(&self) -> Vec<String> {
        self.blocks
            .iter()
            .map(|(n, _)| n.clone())
            .filter(|n| {
                *n != self.roles.label
                    && Some(n) != self.roles.prediction.as_ref()
                    && Some(n) != self.roles.group.as_ref()
            })
            .collect()
    }

    /// Numeric columns for a set of original feature names, expanded.
    pub fn feature_matrix(&self, names: &[String]) -> Result<Vec<&[f64]>> {
        let mut out = Vec::new();
        for n in names {
            out.extend(self.block(n)?);
        }
        Ok(out)
    }

    pub fn label(&self) -> Result<&[f64]> {
        self.numeric(&self.roles.label.clone())
    }

    /// Group ids by first appearance; `None` when no group role is bound.
    pub fn group_ids(&self) -> Option<Vec<usize>> {
        let name = self.roles.group.as_ref()?;
        let col = self.column(name)?;
        let mut ids = Vec::with_capacity(self.n_rows);
        let mut map: HashMap<u64, usize> = HashMap::new();
        match &col.data {
            ColumnData::Numeric(v) => {
                for x in v {
                    let key = x.to_bits();
                    let next = map.len();
                    ids.push(*map.entry(key).or_insert(next));
                }
            }
            ColumnData::Categorical { codes, .. } => {
                for c in codes {
                    let next = map.len();
                    ids.push(*map.entry(*c as u64).or_insert(next));
                }
            }
        }
        Some(ids)
    }

    /// Write the table back to CSV. Numeric values use shortest
    /// round-trip formatting, so finite doubles survive a reload
    /// bit-exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let io_err = |e| Error::Io {
            path: path.display().to_string(),
            source: e,
        };
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(file, "{}", header.join(",")).map_err(io_err)?;
        let mut line = String::new();
        for row in 0..self.n_rows {
            line.clear();
            for (i, col) in self.columns.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                match &col.data {
                    ColumnData::Numeric(v) => line.push_str(&format!("{}", v[row])),
                    ColumnData::Categorical { codes, levels } => {
                        line.push_str(&levels[codes[row] as usize])
                    }
                }
            }
            writeln!(file, "{line}").map_err(io_err)?;
        }
        Ok(())
    }
}

/// Load a CSV file under a role schema.
///
/// Rows with a missing marker in any column are dropped and counted.
/// Categorical columns (hinted or inferred) are one-hot expanded when
/// their cardinality is within `schema.max_onehot`; larger cardinality
/// requires an explicit categorical hint and the column is then kept
/// unexpanded (usable as label or group only).
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let n_cols = header.len();

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let fields: Vec<&str> = record.iter().map(|f| f.trim()).collect();
        if fields.len() != n_cols {
            return Err(Error::schema(format!(
                "row has {} fields, header has {n_cols}",
                fields.len()
            )));
        }
        if fields.iter().any(|f| MISSING_MARKERS.contains(f)) {
            dropped += 1;
            continue;
        }
        for (c, f) in fields.iter().enumerate() {
            raw[c].push(f.to_string());
        }
    }
    let n_rows = raw.first().map(|c| c.len()).unwrap_or(0);

    // Resolve each column's type: explicit hint wins, otherwise numeric
    // when every value parses.
    let mut types = Vec::with_capacity(n_cols);
    for (c, name) in header.iter().enumerate() {
        let t = match schema.types.get(name) {
            Some(t) => *t,
            None => {
                if raw[c].iter().all(|v| v.parse::<f64>().is_ok()) {
                    ColType::Numeric
                } else {
                    ColType::Categorical
                }
            }
        };
        types.push(t);
    }

    let parse_numeric = |c: usize| -> Result<Vec<f64>> {
        raw[c]
            .iter()
            .enumerate()
            .map(|(r, v)| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    row: r,
                    column: header[c].clone(),
                    token: v.clone(),
                })
            })
            .collect()
    };
    let encode_categorical = |c: usize| -> (Vec<u32>, Vec<String>) {
        let mut levels: Vec<String> = raw[c].to_vec();
        levels.sort();
        levels.dedup();
        let idx: HashMap<&String, u32> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l, i as u32))
            .collect();
        let codes = raw[c].iter().map(|v| idx[v]).collect();
        (codes, levels)
    };

    let is_role = |name: &str| {
        name == schema.label
            || Some(name) == schema.prediction.as_deref()
            || Some(name) == schema.group.as_deref()
    };
    if !header.iter().any(|h| *h == schema.label) {
        return Err(Error::schema(format!(
            "label column '{}' not found in data",
            schema.label
        )));
    }

    let mut columns: Vec<Column> = Vec::new();
    let mut blocks: Vec<(String, Vec<String>)> = Vec::new();
    for (c, name) in header.iter().enumerate() {
        match types[c] {
            ColType::Numeric => {
                let v = parse_numeric(c)?;
                columns.push(Column {
                    name: name.clone(),
                    data: ColumnData::Numeric(v),
                });
                blocks.push((name.clone(), vec![name.clone()]));
            }
            ColType::Categorical => {
                let (codes, levels) = encode_categorical(c);
                if name == &schema.label {
                    // Binary categorical labels map to 0/1 by sorted level order.
                    if levels.len() != 2 {
                        return Err(Error::schema(format!(
                            "label column '{name}' is categorical with {} levels; \
                             expected numeric or binary categorical",
                            levels.len()
                        )));
                    }
                    let v = codes.iter().map(|&c| c as f64).collect();
                    columns.push(Column {
                        name: name.clone(),
                        data: ColumnData::Numeric(v),
                    });
                    blocks.push((name.clone(), vec![name.clone()]));
                } else if Some(name.as_str()) == schema.group.as_deref() {
                    columns.push(Column {
                        name: name.clone(),
                        data: ColumnData::Categorical { codes, levels },
                    });
                    blocks.push((name.clone(), vec![]));
                } else if levels.len() <= schema.max_onehot {
                    let mut expanded_names = Vec::with_capacity(levels.len());
                    for (li, level) in levels.iter().enumerate() {
                        let col_name = format!("{name}={level}");
                        let v: Vec<f64> = codes
                            .iter()
                            .map(|&c| if c as usize == li { 1.0 } else { 0.0 })
                            .collect();
                        expanded_names.push(col_name.clone());
                        columns.push(Column {
                            name: col_name,
                            data: ColumnData::Numeric(v),
                        });
                    }
                    blocks.push((name.clone(), expanded_names));
                } else if schema.types.contains_key(name) {
                    columns.push(Column {
                        name: name.clone(),
                        data: ColumnData::Categorical { codes, levels },
                    });
                    blocks.push((name.clone(), vec![]));
                } else {
                    return Err(Error::schema(format!(
                        "categorical column '{name}' has cardinality {} > max_onehot {}; \
                         add an explicit type hint to keep it",
                        levels.len(),
                        schema.max_onehot
                    )));
                }
            }
        }
    }
    if let Some(p) = &schema.prediction {
        if !header.iter().any(|h| h == p) {
            return Err(Error::schema(format!(
                "prediction column '{p}' not found in data"
            )));
        }
        if is_role(p) && types[header.iter().position(|h| h == p).unwrap()] != ColType::Numeric {
            return Err(Error::schema(format!(
                "prediction column '{p}' must be numeric"
            )));
        }
    }
    if let Some(g) = &schema.group {
        if !header.iter().any(|h| h == g) {
            return Err(Error::schema(format!("group column '{g}' not found in data")));
        }
    }

    let ds = Dataset {
        index: columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), i))
            .collect(),
        columns,
        n_rows,
        roles: Roles {
            label: schema.label.clone(),
            prediction: schema.prediction.clone(),
            group: schema.group.clone(),
            candidates: schema.candidates.clone(),
        },
        dropped_rows: dropped,
        blocks,
    };
    ds.check_roles()?;
    Ok(ds)
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&r| self.fold_of[r] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&r| self.fold_of[r] != fold)
            .collect()
    }
}

/// Partition rows into `k` folds of near-equal size. When a group role
/// is bound, all rows of one group land in the same fold and folds are
/// balanced by row count instead.
pub fn split_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::argument(format!("fold count k={k} must be >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fold_of = match ds.group_ids() {
        Some(gids) => {
            let n_groups = gids.iter().copied().max().map(|m| m + 1).unwrap_or(0);
            if k > n_groups {
                return Err(Error::argument(format!(
                    "fold count k={k} exceeds number of groups {n_groups}"
                )));
            }
            let mut group_rows: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
            for (row, &g) in gids.iter().enumerate() {
                group_rows[g].push(row);
            }
            let mut order: Vec<usize> = (0..n_groups).collect();
            order.shuffle(&mut rng);
            let mut sizes = vec![0usize; k];
            let mut fold_of = vec![0usize; ds.n_rows()];
            for g in order {
                let fold = (0..k).min_by_key(|&f| (sizes[f], f)).unwrap();
                sizes[fold] += group_rows[g].len();
                for &row in &group_rows[g] {
                    fold_of[row] = fold;
                }
            }
            fold_of
        }
        None => {
            if k > ds.n_rows() {
                return Err(Error::argument(format!(
                    "fold count k={k} exceeds number of rows {}",
                    ds.n_rows()
                )));
            }
            let mut order: Vec<usize> = (0..ds.n_rows()).collect();
            order.shuffle(&mut rng);
            let mut fold_of = vec![0usize; ds.n_rows()];
            for (pos, &row) in order.iter().enumerate() {
                fold_of[row] = pos % k;
            }
            fold_of
        }
    };
    Ok(FoldAssignment { fold_of, k, seed })
}

/// Mean/std pair recorded by [`standardize`]. Population convention
/// (divide by n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Standardization {
    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation (divide by n).
pub fn population_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Center to mean 0 and scale to population std 1. A zero-variance
/// input maps to all zeros with `std` recorded as 0.
pub fn standardize(v: &[f64]) -> (Vec<f64>, Standardization) {
    assert!(!v.is_empty(), "standardize requires a non-empty vector");
    let m = mean(v);
    let s = population_std(v);
    let out = if s > 0.0 {
        v.iter().map(|x| (x - m) / s).collect()
    } else {
        vec![0.0; v.len()]
    };
    (out, Standardization { mean: m, std: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;


    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_small_numeric() {
        let f = write_tmp("a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
        let ds = load_csv(f.path(), &Schema::new("y")).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(
            ds.columns().iter().map(|c| c.name.as_str()).collect::<Vec<_>>(),
            vec!["a", "b", "y"]
        );
        assert_eq!(ds.numeric("a").unwrap(), &[1.0, 3.0, 5.0]);
        assert_eq!(ds.dropped_rows, 0);
    }

    #[test]
    fn missing_label_is_schema_error() {
        let f = write_tmp("a,b\n1,2\n");
        let err = load_csv(f.path(), &Schema::new("y")).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn onehot_expansion_and_dropped_rows() {
        // ADULT-style mix of numeric and categorical attributes with
        // missing markers.
        let f = write_tmp(
            "age,workclass,hours,income\n\
             39,State-gov,40,<=50K\n\
             50,?,13,<=50K\n\
             38,Private,40,<=50K\n\
             53,Private,40,>50K\n\
             28,Self-emp,40,>50K\n",
        );
        let ds = load_csv(f.path(), &Schema::new("income")).unwrap();
        assert_eq!(ds.dropped_rows, 1);
        assert_eq!(ds.n_rows(), 4);
        let names: Vec<_> = ds.columns().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "age",
                "workclass=Private",
                "workclass=Self-emp",
                "workclass=State-gov",
                "hours",
                "income"
            ]
        );
        assert_eq!(ds.numeric("workclass=Private").unwrap(), &[0.0, 1.0, 1.0, 0.0]);
        // binary categorical label maps to 0/1 by sorted level order
        assert_eq!(ds.label().unwrap(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(ds.block_names("workclass").len(), 3);
    }

    #[test]
    fn high_cardinality_without_hint_is_rejected() {
        let mut content = String::from("id,y\n");
        for i in 0..40 {
            content.push_str(&format!("id{i},{}\n", i % 2));
        }
        let f = write_tmp(&content);
        let err = load_csv(f.path(), &Schema::new("y")).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("id"), "{msg}");

        let mut schema = Schema::new("y");
        schema.types.insert("id".into(), ColType::Categorical);
        let ds = load_csv(f.path(), &schema).unwrap();
        assert!(!ds.column("id").unwrap().is_numeric());
    }

    #[test]
    fn numeric_hint_parse_error_reports_position() {
        let f = write_tmp("a,y\nfoo,0\n");
        let mut schema = Schema::new("y");
        schema.types.insert("a".into(), ColType::Numeric);
        let err = load_csv(f.path(), &schema).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 0, .. }), "{err}");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cols = vec![
            ("a".to_string(), vec![0.1, -3.75e-9, 1234567.25]),
            ("y".to_string(), vec![1.0, 0.5, 1.0 / 3.0]),
        ];
        let ds = Dataset::from_numeric_columns(cols, Roles {
            label: "y".into(),
            prediction: None,
            group: None,
            candidates: vec![],
        })
        .unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        ds.write_csv(tmp.path()).unwrap();
        let ds2 = load_csv(tmp.path(), &Schema::new("y")).unwrap();
        assert_eq!(ds.numeric("a").unwrap(), ds2.numeric("a").unwrap());
        assert_eq!(ds.numeric("y").unwrap(), ds2.numeric("y").unwrap());
    }

    fn plain_ds(n: usize) -> Dataset {
        Dataset::from_numeric_columns(
            vec![
                ("x".to_string(), (0..n).map(|i| i as f64).collect()),
                ("y".to_string(), vec![0.0; n]),
            ],
            Roles {
                label: "y".into(),
                prediction: None,
                group: None,
                candidates: vec![],
            },
        )
        .unwrap()
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one() {
        let ds = plain_ds(506);
        let fa = split_folds(&ds, 10, 7).unwrap();
        let mut sizes = vec![0usize; 10];
        for &f in &fa.fold_of {
            sizes[f] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 506);
        assert!(sizes.iter().all(|&s| s == 50 || s == 51), "{sizes:?}");
    }

    #[test]
    fn folds_of_n_equals_k_are_singletons() {
        let ds = plain_ds(10);
        let fa = split_folds(&ds, 10, 0).unwrap();
        let mut sizes = vec![0usize; 10];
        for &f in &fa.fold_of {
            sizes[f] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn folds_are_deterministic() {
        let ds = plain_ds(101);
        assert_eq!(
            split_folds(&ds, 5, 42).unwrap(),
            split_folds(&ds, 5, 42).unwrap()
        );
        assert_ne!(
            split_folds(&ds, 5, 42).unwrap(),
            split_folds(&ds, 5, 43).unwrap()
        );
    }

    #[test]
    fn grouped_folds_keep_groups_intact() {
        let n = 23;
        let gids: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
        let ds = Dataset::from_numeric_columns(
            vec![
                ("x".to_string(), (0..n).map(|i| i as f64).collect()),
                ("y".to_string(), vec![0.0; n]),
                ("q".to_string(), gids.clone()),
            ],
            Roles {
                label: "y".into(),
                prediction: None,
                group: Some("q".into()),
                candidates: vec![],
            },
        )
        .unwrap();
        let fa = split_folds(&ds, 3, 11).unwrap();
        for g in 0..7 {
            let folds: Vec<usize> = (0..n)
                .filter(|&i| gids[i] == g as f64)
                .map(|i| fa.fold_of[i])
                .collect();
            assert!(folds.windows(2).all(|w| w[0] == w[1]), "group {g} split");
        }
    }

    #[test]
    fn k_out_of_range() {
        let ds = plain_ds(5);
        assert!(split_folds(&ds, 1, 0).is_err());
        assert!(split_folds(&ds, 6, 0).is_err());
    }

    #[test]
    fn standardize_two_points() {
        let (z, s) = standardize(&[1.0, 3.0]);
        assert_eq!(z, vec![-1.0, 1.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn standardize_degenerate() {
        let (z, s) = standardize(&[5.0, 5.0, 5.0]);
        assert_eq!(z, vec![0.0, 0.0, 0.0]);
        assert_eq!(s.std, 0.0);
    }

    proptest! {
        #[test]
        fn standardize_contract(v in proptest::collection::vec(-1e6f64..1e6, 2..64)) {
            let (z, s) = standardize(&v);
            if s.std > 0.0 {
                let m = mean(&z);
                prop_assert!(m.abs() <= 1e-12 * mean(&v).abs().max(1.0));
                prop_assert!((population_std(&z) - 1.0).abs() <= 1e-10);
                // idempotence
                let (z2, _) = standardize(&z);
                for (a, b) in z.iter().zip(&z2) {
                    prop_assert!((a - b).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn split_folds_is_pure(n in 4usize..200, k in 2usize..4, seed: u64) {
            let ds = plain_ds(n);
            let a = split_folds(&ds, k, seed).unwrap();
            let b = split_folds(&ds, k, seed).unwrap();
            prop_assert_eq!(&a, &b);
            let mut sizes = vec![0usize; k];
            for &f in &a.fold_of { sizes[f] += 1; }
            let (mn, mx) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(mx - mn <= 1);
        }
    }
}
