//! Audit dataset: feature schema, CSV ingestion, one-hot encoding.
//!
//! Downstream modules only ever see a purely numeric matrix; categorical
//! provenance is preserved through the encoding map so regions can be
//! reported in terms of the original columns.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Whether scores are higher-is-better performance values in [0, 1]
/// or signed residuals (error magnitudes, lower is better).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Performance,
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Declared category labels, in expansion order. Empty for continuous.
    #[serde(default)]
    pub categories: Vec<String>,
}

/// Ordered description of the raw (pre-encoding) feature columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<Column>,
}

impl FeatureSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut names = HashSet::new();
        for col in &columns {
            if !names.insert(col.name.clone()) {
                return Err(Error::Schema(format!("duplicate column name `{}`", col.name)));
            }
            match col.kind {
                ColumnKind::Categorical => {
                    if col.categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "categorical column `{}` declares no categories",
                            col.name
                        )));
                    }
                    let mut cats = HashSet::new();
                    for c in &col.categories {
                        if !cats.insert(c) {
                            return Err(Error::Schema(format!(
                                "categorical column `{}` has duplicate category `{c}`",
                                col.name
                            )));
                        }
                    }
                }
                ColumnKind::Continuous => {
                    if !col.categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "continuous column `{}` declares categories",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(Self { columns })
    }

    /// Shorthand for an all-continuous schema `x1..xp`.
    pub fn continuous(p: usize) -> Self {
        Self {
            columns: (1..=p)
                .map(|i| Column {
                    name: format!("x{i}"),
                    kind: ColumnKind::Continuous,
                    categories: Vec::new(),
                })
                .collect(),
        }
    }

    /// Width of the one-hot expanded matrix.
    pub fn encoded_width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Continuous => 1,
                ColumnKind::Categorical => c.categories.len(),
            })
            .sum()
    }
}

/// The schema sidecar file: columns plus the score column and score
/// orientation. Serialized as JSON next to the data CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaFile {
    pub columns: Vec<Column>,
    pub score_column: String,
    pub orientation: Orientation,
}

impl SchemaFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SchemaFile = serde_json::from_str(&text)?;
        // validate through the schema constructor
        FeatureSchema::new(file.columns.clone())?;
        Ok(file)
    }
}

/// Maps an expanded column index back to its raw column, and for one-hot
/// indicators, the category index within that column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub source_column: usize,
    pub category: Option<usize>,
}

/// A raw cell value prior to encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Number(f64),
    Label(String),
}

/// The (X, y) the detection pipeline consumes: a one-hot expanded
/// numeric matrix plus one performance score per row.
#[derive(Debug, Clone)]
pub struct AuditDataset {
    pub schema: FeatureSchema,
    /// Row-major n x p matrix, p = schema.encoded_width().
    pub features: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    pub encoding_map: Vec<EncodedColumn>,
    pub orientation: Orientation,
}

impl AuditDataset {
    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_cols(&self) -> usize {
        self.encoding_map.len()
    }

    fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        if self.features.len() != self.scores.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} scores",
                self.features.len(),
                self.scores.len()
            )));
        }
        let p = self.encoding_map.len();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Shape(format!("row {i} has {} entries, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("row {i} contains a non-finite feature value")));
            }
        }
        for (i, &s) in self.scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Domain(format!("score {i} is not finite")));
            }
            if self.orientation == Orientation::Performance && !(0.0..=1.0).contains(&s) {
                return Err(Error::Domain(format!(
                    "performance score {s} at row {i} lies outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn new(
        schema: FeatureSchema,
        features: Vec<Vec<f64>>,
        scores: Vec<f64>,
        encoding_map: Vec<EncodedColumn>,
        orientation: Orientation,
    ) -> Result<Self> {
        let ds = Self {
            schema,
            features,
            scores,
            encoding_map,
            orientation,
        };
        ds.validate()?;
        Ok(ds)
    }
}

/// One-hot encodes raw rows against a schema. Continuous columns are
/// copied verbatim; a categorical column of k declared categories
/// expands to k indicator columns in declared order.
pub fn one_hot_encode(
    raw_rows: &[Vec<RawValue>],
    schema: &FeatureSchema,
) -> Result<(Vec<Vec<f64>>, Vec<EncodedColumn>)> {
    let mut encoding_map = Vec::new();
    for (ci, col) in schema.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Continuous => encoding_map.push(EncodedColumn {
                source_column: ci,
                category: None,
            }),
            ColumnKind::Categorical => {
                for k in 0..col.categories.len() {
                    encoding_map.push(EncodedColumn {
                        source_column: ci,
                        category: Some(k),
                    });
                }
            }
        }
    }

    let mut matrix = Vec::with_capacity(raw_rows.len());
    for (ri, raw) in raw_rows.iter().enumerate() {
        if raw.len() != schema.columns.len() {
            return Err(Error::Shape(format!(
                "row {ri} has {} cells, schema declares {}",
                raw.len(),
                schema.columns.len()
            )));
        }
        let mut row = Vec::with_capacity(encoding_map.len());
        for (ci, (col, cell)) in schema.columns.iter().zip(raw).enumerate() {
            match (col.kind, cell) {
                (ColumnKind::Continuous, RawValue::Number(v)) => row.push(*v),
                (ColumnKind::Categorical, RawValue::Label(label)) => {
                    let hit = col.categories.iter().position(|c| c == label);
                    let Some(idx) = hit else {
                        return Err(Error::Parse {
                            row: ri,
                            column: col.name.clone(),
                            message: format!("unknown category `{label}`"),
                        });
                    };
                    for k in 0..col.categories.len() {
                        row.push(if k == idx { 1.0 } else { 0.0 });
                    }
                }
                (ColumnKind::Continuous, RawValue::Label(l)) => {
                    return Err(Error::Parse {
                        row: ri,
                        column: col.name.clone(),
                        message: format!("expected a number, got `{l}`"),
                    });
                }
                (ColumnKind::Categorical, RawValue::Number(_)) => {
                    return Err(Error::Parse {
                        row: ri,
                        column: schema.columns[ci].name.clone(),
                        message: "expected a category label, got a number".into(),
                    });
                }
            }
        }
        matrix.push(row);
    }
    Ok((matrix, encoding_map))
}

/// Loads a CSV file (UTF-8, header row, `.` decimal point) against a
/// schema. Rows come back in file order; nothing is imputed or dropped.
pub fn load_csv(
    path: &Path,
    schema: &FeatureSchema,
    score_column: &str,
    orientation: Orientation,
) -> Result<AuditDataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let header_pos = |name: &str| headers.iter().position(|h| h == name);

    let mut col_idx = Vec::with_capacity(schema.columns.len());
    for col in &schema.columns {
        let Some(i) = header_pos(&col.name) else {
            return Err(Error::Schema(format!("header is missing column `{}`", col.name)));
        };
        col_idx.push(i);
    }
    let Some(score_idx) = header_pos(score_column) else {
        return Err(Error::Schema(format!("header is missing score column `{score_column}`")));
    };

    let mut raw_rows = Vec::new();
    let mut scores = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let mut raw = Vec::with_capacity(schema.columns.len());
        for (col, &i) in schema.columns.iter().zip(&col_idx) {
            let cell = record.get(i).unwrap_or("");
            match col.kind {
                ColumnKind::Continuous => {
                    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                        row: ri,
                        column: col.name.clone(),
                        message: format!("`{cell}` is not a number"),
                    })?;
                    raw.push(RawValue::Number(v));
                }
                ColumnKind::Categorical => raw.push(RawValue::Label(cell.trim().to_string())),
            }
        }
        let score_cell = record.get(score_idx).unwrap_or("");
        let score: f64 = score_cell.trim().parse().map_err(|_| Error::Parse {
            row: ri,
            column: score_column.to_string(),
            message: format!("`{score_cell}` is not a number"),
        })?;
        raw_rows.push(raw);
        scores.push(score);
    }
    if raw_rows.is_empty() {
        return Err(Error::EmptyInput(format!("{} contains no data rows", path.display())));
    }

    let (features, encoding_map) = one_hot_encode(&raw_rows, schema)?;
    AuditDataset::new(schema.clone(), features, scores, encoding_map, orientation)
}

/// Returns a seeded row permutation of the dataset. Feature row i and
/// score i move together.
pub fn shuffle_rows(dataset: &AuditDataset, seed: u64) -> AuditDataset {
    let mut order: Vec<usize> = (0..dataset.n_rows()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    AuditDataset {
        schema: dataset.schema.clone(),
        features: order.iter().map(|&i| dataset.features[i].clone()).collect(),
        scores: order.iter().map(|&i| dataset.scores[i]).collect(),
        encoding_map: dataset.encoding_map.clone(),
        orientation: dataset.orientation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn gender_schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            Column {
                name: "age".into(),
                kind: ColumnKind::Continuous,
                categories: vec![],
            },
            Column {
                name: "gender".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["Female".into(), "Male".into()],
            },
        ])
        .unwrap()
    }

    #[test]
    fn one_hot_expands_in_declared_order() {
        let schema = gender_schema();
        let rows = vec![
            vec![RawValue::Number(5.0), RawValue::Label("Female".into())],
            vec![RawValue::Number(5.0), RawValue::Label("Male".into())],
        ];
        let (m, map) = one_hot_encode(&rows, &schema).unwrap();
        assert_eq!(m[0], vec![5.0, 1.0, 0.0]);
        assert_eq!(m[1], vec![5.0, 0.0, 1.0]);
        assert_eq!(map.len(), 3);
        assert_eq!(map[1].source_column, 1);
        assert_eq!(map[1].category, Some(0));
    }

    #[test]
    fn one_hot_width_sums_category_counts() {
        let schema = FeatureSchema::new(vec![
            Column {
                name: "a".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["p".into(), "q".into()],
            },
            Column {
                name: "b".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["r".into(), "s".into(), "t".into()],
            },
            Column {
                name: "c".into(),
                kind: ColumnKind::Continuous,
                categories: vec![],
            },
        ])
        .unwrap();
        assert_eq!(schema.encoded_width(), 6);
        let rows: Vec<Vec<RawValue>> = (0..4)
            .map(|i| {
                vec![
                    RawValue::Label("p".into()),
                    RawValue::Label("t".into()),
                    RawValue::Number(i as f64),
                ]
            })
            .collect();
        let (m, _) = one_hot_encode(&rows, &schema).unwrap();
        assert!(m.iter().all(|r| r.len() == 6));
        // indicators for each categorical column sum to exactly 1
        for r in &m {
            assert_eq!(r[0] + r[1], 1.0);
            assert_eq!(r[2] + r[3] + r[4], 1.0);
        }
    }

    #[test]
    fn one_hot_round_trip_recovers_labels() {
        let schema = gender_schema();
        let labels = ["Female", "Male", "Male", "Female"];
        let rows: Vec<Vec<RawValue>> = labels
            .iter()
            .map(|l| vec![RawValue::Number(1.0), RawValue::Label(l.to_string())])
            .collect();
        let (m, map) = one_hot_encode(&rows, &schema).unwrap();
        for (row, expected) in m.iter().zip(labels) {
            let recovered = map
                .iter()
                .enumerate()
                .find(|(j, enc)| enc.source_column == 1 && row[*j] == 1.0 && enc.category.is_some())
                .map(|(_, enc)| schema.columns[1].categories[enc.category.unwrap()].as_str())
                .unwrap();
            assert_eq!(recovered, expected);
        }
    }

    #[test]
    fn schema_rejects_duplicates() {
        assert!(FeatureSchema::new(vec![
            Column {
                name: "x".into(),
                kind: ColumnKind::Continuous,
                categories: vec![]
            },
            Column {
                name: "x".into(),
                kind: ColumnKind::Continuous,
                categories: vec![]
            },
        ])
        .is_err());
        assert!(FeatureSchema::new(vec![Column {
            name: "g".into(),
            kind: ColumnKind::Categorical,
            categories: vec!["a".into(), "a".into()]
        }])
        .is_err());
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_passes_through_continuous() {
        let schema = FeatureSchema::continuous(1);
        let f = write_csv("x1,score\n1.0,0.5\n2.0,0.6\n3.0,0.7\n");
        let ds = load_csv(f.path(), &schema, "score", Orientation::Performance).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_cols(), 1);
        assert_eq!(ds.scores, vec![0.5, 0.6, 0.7]);
    }

    #[test]
    fn load_csv_rejects_unknown_category() {
        let schema = gender_schema();
        let f = write_csv("age,gender,score\n5.0,Female,0.5\n6.0,Unknown,0.6\n");
        let err = load_csv(f.path(), &schema, "score", Orientation::Performance).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "gender");
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn load_csv_rejects_missing_column_and_empty_file() {
        let schema = FeatureSchema::continuous(2);
        let f = write_csv("x1,score\n1.0,0.5\n");
        assert!(matches!(
            load_csv(f.path(), &schema, "score", Orientation::Performance),
            Err(Error::Schema(_))
        ));
        let schema1 = FeatureSchema::continuous(1);
        let empty = write_csv("x1,score\n");
        assert!(matches!(
            load_csv(empty.path(), &schema1, "score", Orientation::Performance),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn load_csv_rejects_non_numeric_continuous_cell() {
        let schema = FeatureSchema::continuous(1);
        let f = write_csv("x1,score\noops,0.5\n");
        assert!(matches!(
            load_csv(f.path(), &schema, "score", Orientation::Performance),
            Err(Error::Parse { row: 0, .. })
        ));
    }

    fn toy_dataset(n: usize) -> AuditDataset {
        let schema = FeatureSchema::continuous(2);
        let features: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let scores: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let map = vec![
            EncodedColumn {
                source_column: 0,
                category: None,
            },
            EncodedColumn {
                source_column: 1,
                category: None,
            },
        ];
        AuditDataset::new(schema, features, scores, map, Orientation::Performance).unwrap()
    }

    #[test]
    fn shuffle_is_deterministic_and_preserves_pairs() {
        let ds = toy_dataset(5);
        let a = shuffle_rows(&ds, 42);
        let b = shuffle_rows(&ds, 42);
        assert_eq!(a.features, b.features);
        assert_eq!(a.scores, b.scores);

        let mut orig: Vec<(Vec<u64>, u64)> = ds
            .features
            .iter()
            .zip(&ds.scores)
            .map(|(r, s)| (r.iter().map(|v| v.to_bits()).collect(), s.to_bits()))
            .collect();
        let mut shuf: Vec<(Vec<u64>, u64)> = a
            .features
            .iter()
            .zip(&a.scores)
            .map(|(r, s)| (r.iter().map(|v| v.to_bits()).collect(), s.to_bits()))
            .collect();
        orig.sort();
        shuf.sort();
        assert_eq!(orig, shuf);
    }

    #[test]
    fn shuffle_single_row_is_identity() {
        let ds = toy_dataset(1);
        let out = shuffle_rows(&ds, 999);
        assert_eq!(out.features, ds.features);
        assert_eq!(out.scores, ds.scores);
    }

    #[test]
    fn performance_scores_outside_unit_interval_rejected() {
        let schema = FeatureSchema::continuous(1);
        let map = vec![EncodedColumn {
            source_column: 0,
            category: None,
        }];
        assert!(AuditDataset::new(
            schema.clone(),
            vec![vec![0.0]],
            vec![1.5],
            map.clone(),
            Orientation::Performance
        )
        .is_err());
        // residual orientation only requires finiteness
        assert!(AuditDataset::new(schema, vec![vec![0.0]], vec![1.5], map, Orientation::Residual).is_ok());
    }
}
