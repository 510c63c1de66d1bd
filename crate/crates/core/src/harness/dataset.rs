//! Dataset loading.
//!
//! Two layouts are accepted under a root directory:
//!
//! * release layout: `collected_data/r1_training_all.json` (simple channel) and
//!   `collected_data/r2_training_all.json` (complex channel), split membership
//!   in `data/{split}_id.json`, tables in `data/all_csv/<table_id>`;
//! * flat layout: `{split}.json` and tables in `all_csv/<table_id>`.
//!
//! Statement files map a table id to `[statements, labels, caption]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ranker::Label;
use crate::table::{parse_table, ParseOptions, Table, TableError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: unexpected layout: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("table `{0}` is referenced but not found")]
    MissingTable(String),
    #[error("table `{table_id}`: {statements} statements but {labels} labels")]
    LabelArityMismatch {
        table_id: String,
        statements: usize,
        labels: usize,
    },
    #[error("table `{table_id}`: {source}")]
    Table {
        table_id: String,
        source: TableError,
    },
    #[error("no dataset found under {0}")]
    UnknownLayout(PathBuf),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Simple,
    Complex,
    #[default]
    Unknown,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Simple => "simple",
            Channel::Complex => "complex",
            Channel::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "dev" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub table_id: String,
    pub statement: String,
    pub label: Label,
    #[serde(default)]
    pub channel: Channel,
    /// Reference program trace, when one is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_program: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub tables: BTreeMap<String, Table>,
}

impl Dataset {
    pub fn table(&self, id: &str) -> Option<&Table> {
        self.tables.get(id)
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json(path: &Path) -> Result<Value, DatasetError> {
    serde_json::from_str(&read(path)?).map_err(|source| DatasetError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn format_err(path: &Path, reason: impl Into<String>) -> DatasetError {
    DatasetError::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Entries of a statement file: table id → (statements, labels, caption).
type Entries = Vec<(String, Vec<String>, Vec<Label>, String)>;

fn statement_file(path: &Path) -> Result<Entries, DatasetError> {
    let Value::Object(map) = read_json(path)? else {
        return Err(format_err(path, "expected an object keyed by table id"));
    };
    let mut out = Vec::with_capacity(map.len());
    for (table_id, entry) in map {
        let parts = entry
            .as_array()
            .ok_or_else(|| format_err(path, format!("`{table_id}`: expected an array")))?;
        let statements: Vec<String> = parts
            .first()
            .and_then(Value::as_array)
            .ok_or_else(|| format_err(path, format!("`{table_id}`: missing statements")))?
            .iter()
            .map(|s| s.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| format_err(path, format!("`{table_id}`: non-string statement")))?;
        let labels: Vec<Label> = parts
            .get(1)
            .and_then(Value::as_array)
            .ok_or_else(|| format_err(path, format!("`{table_id}`: missing labels")))?
            .iter()
            .map(|v| v.as_i64().and_then(Label::from_int))
            .collect::<Option<_>>()
            .ok_or_else(|| format_err(path, format!("`{table_id}`: labels must be 0 or 1")))?;
        if statements.len() != labels.len() {
            return Err(DatasetError::LabelArityMismatch {
                table_id,
                statements: statements.len(),
                labels: labels.len(),
            });
        }
        let caption = parts
            .get(2)
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        out.push((table_id, statements, labels, caption));
    }
    Ok(out)
}

/// Parse one table file from `dir`, using `#` as the delimiter.
pub fn load_table(dir: &Path, table_id: &str, caption: &str) -> Result<Table, DatasetError> {
    let path = dir.join(table_id);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(DatasetError::MissingTable(table_id.to_string()))
        }
        Err(source) => return Err(DatasetError::Io { path, source }),
    };
    parse_table(table_id, &bytes, ParseOptions::default())
        .map(|t| t.with_caption(caption))
        .map_err(|source| DatasetError::Table {
            table_id: table_id.to_string(),
            source,
        })
}

fn assemble(
    entries: Vec<(Channel, Entries)>,
    keep: Option<&BTreeSet<String>>,
    table_dir: &Path,
) -> Result<Dataset, DatasetError> {
    let mut ds = Dataset::default();
    let mut captions: HashMap<String, String> = HashMap::new();
    for (channel, file) in entries {
        for (table_id, statements, labels, caption) in file {
            if keep.is_some_and(|k| !k.contains(&table_id)) {
                continue;
            }
            captions.entry(table_id.clone()).or_insert(caption);
            for (statement, label) in statements.into_iter().zip(labels) {
                ds.instances.push(Instance {
                    table_id: table_id.clone(),
                    statement,
                    label,
                    channel,
                    gold_program: None,
                });
            }
        }
    }
    for (id, caption) in captions {
        let table = load_table(table_dir, &id, &caption)?;
        ds.tables.insert(id, table);
    }
    Ok(ds)
}

/// Load every statement of `split` under `root` together with its tables.
pub fn load_dataset(root: &Path, split: Split) -> Result<Dataset, DatasetError> {
    let collected = root.join("collected_data");
    if collected.is_dir() {
        let ids_path = root.join("data").join(format!("{}_id.json", split.name()));
        let ids: BTreeSet<String> = serde_json::from_value(read_json(&ids_path)?)
            .map_err(|e| format_err(&ids_path, e.to_string()))?;
        let mut files = Vec::new();
        for (name, channel) in [
            ("r1_training_all.json", Channel::Simple),
            ("r2_training_all.json", Channel::Complex),
        ] {
            let p = collected.join(name);
            if p.is_file() {
                files.push((channel, statement_file(&p)?));
            }
        }
        return assemble(files, Some(&ids), &root.join("data").join("all_csv"));
    }
    let flat = root.join(format!("{}.json", split.name()));
    if flat.is_file() {
        return assemble(
            vec![(Channel::Unknown, statement_file(&flat)?)],
            None,
            &root.join("all_csv"),
        );
    }
    Err(DatasetError::UnknownLayout(root.to_path_buf()))
}

/// Read instances from JSON lines (`table_id`, `statement`, `label`, ...).
pub fn read_instances(path: &Path) -> Result<Vec<Instance>, DatasetError> {
    read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|source| DatasetError::Json {
                path: path.to_path_buf(),
                source,
            })
        })
        .collect()
}

/// A seeded sample of `n` instances, kept in their original order.
pub fn sample(instances: &[Instance], n: usize, seed: u64) -> Vec<Instance> {
    use rand::seq::index;
    use rand::SeedableRng;
    if n >= instances.len() {
        return instances.to_vec();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, instances.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| instances[i].clone()).collect()
}
