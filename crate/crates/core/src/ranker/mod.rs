//! Program scoring and the decision rules that turn candidates into a verdict.

mod decide;
mod features;
mod train;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Program;
use crate::linker::LinkedStatement;

pub use decide::{decide, decide_with_tie, Mode, Verdict};
pub use features::{feature_names, featurize, hash_feature, FeatureVector, DIM, HASH_BITS};
pub use train::{pairwise_accuracy, train, TrainConfig, TrainReport};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Refuted,
    Entailed,
}

impl Label {
    pub fn from_bool(b: bool) -> Label {
        if b {
            Label::Entailed
        } else {
            Label::Refuted
        }
    }

    pub fn as_bool(self) -> bool {
        self == Label::Entailed
    }

    /// Dataset encoding: ENTAILED = 1, REFUTED = 0.
    pub fn from_int(v: i64) -> Option<Label> {
        match v {
            0 => Some(Label::Refuted),
            1 => Some(Label::Entailed),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Entailed => "ENTAILED",
            Label::Refuted => "REFUTED",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "entailed" | "1" | "true" => Ok(Label::Entailed),
            "refuted" | "0" | "false" => Ok(Label::Refuted),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum RankerError {
    #[error("mode {0} needs a scoring model")]
    ModelMissing(Mode),
    #[error("every candidate in the dump has the same weak label")]
    DegenerateDump,
    #[error("dump has no candidates")]
    EmptyDump,
    #[error("bad trace `{trace}` in dump: {reason}")]
    BadTrace { trace: String, reason: String },
    #[error("model version {0} is not supported")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpCandidate {
    pub trace: String,
    pub result: bool,
}

/// One statement's search output, as written by batch search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub table_id: String,
    pub statement: String,
    pub label: Option<Label>,
    pub candidates: Vec<DumpCandidate>,
    /// Linking output, used for statement features. Re-tokenized from
    /// `statement` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked: Option<LinkedStatement>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub caption: String,
}

impl DumpRecord {
    pub fn linked_statement(&self) -> LinkedStatement {
        let mut l = self
            .linked
            .clone()
            .unwrap_or_else(|| LinkedStatement::unlinked(&self.statement));
        if l.caption.is_empty() {
            l.caption.clone_from(&self.caption);
        }
        l
    }
}

/// Read a JSON-lines dump.
pub fn read_dump(text: &str) -> Result<Vec<DumpRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

pub fn write_dump(records: &[DumpRecord]) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Anything that rates how well a program reflects a statement, in (0, 1).
pub trait Scorer: Sync {
    fn score(&self, linked: &LinkedStatement, program: &Program) -> f64;
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic model over hashed features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerModel {
    pub version: u32,
    pub hash_bits: u32,
    pub use_caption: bool,
    pub bias: f64,
    /// Non-zero weights only.
    pub weights: BTreeMap<u32, f64>,
}

impl ScorerModel {
    pub fn new(use_caption: bool) -> Self {
        ScorerModel {
            version: MODEL_VERSION,
            hash_bits: HASH_BITS,
            use_caption,
            bias: 0.0,
            weights: BTreeMap::new(),
        }
    }

    pub fn logit(&self, features: &FeatureVector) -> f64 {
        self.bias
            + features
                .entries
                .iter()
                .map(|(i, v)| self.weights.get(i).copied().unwrap_or(0.0) * v)
                .sum::<f64>()
    }

    pub fn score_features(&self, features: &FeatureVector) -> f64 {
        sigmoid(self.logit(features))
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<ScorerModel, RankerError> {
        let m: ScorerModel = serde_json::from_str(text)?;
        if m.version != MODEL_VERSION || m.hash_bits != HASH_BITS {
            return Err(RankerError::UnsupportedVersion(m.version));
        }
        Ok(m)
    }
}

impl Scorer for ScorerModel {
    fn score(&self, linked: &LinkedStatement, program: &Program) -> f64 {
        self.score_features(&featurize(linked, program, self.use_caption))
    }
}
