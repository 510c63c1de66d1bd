use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsl::Program;
use crate::linker::LinkedStatement;
use crate::search::CandidateSet;

use super::{Label, RankerError, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Majority of candidate results, each candidate weighted equally.
    Voting,
    /// Score-weighted sum of candidate results.
    Weighted,
    /// Result of the highest-scoring candidate.
    Ranking,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Voting => "voting",
            Mode::Weighted => "weighted",
            Mode::Ranking => "ranking",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "voting" => Ok(Mode::Voting),
            "weighted" => Ok(Mode::Weighted),
            "ranking" => Ok(Mode::Ranking),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub label: Label,
    pub confidence: f64,
    /// The chosen program in ranking mode.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "trace_opt")]
    pub rationale: Option<Program>,
}

fn trace_opt<S: serde::Serializer>(p: &Option<Program>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_str(&p.trace()),
        None => s.serialize_none(),
    }
}

/// [`decide_with_tie`] with ties going to REFUTED.
pub fn decide(
    candidates: &CandidateSet,
    linked: &LinkedStatement,
    scorer: Option<&dyn Scorer>,
    mode: Mode,
) -> Result<Verdict, RankerError> {
    decide_with_tie(candidates, linked, scorer, mode, Label::Refuted)
}

/// Turn candidates into a verdict. An empty candidate set, an even vote, or
/// a zero weighted sum yields `tie` with confidence 0.
pub fn decide_with_tie(
    candidates: &CandidateSet,
    linked: &LinkedStatement,
    scorer: Option<&dyn Scorer>,
    mode: Mode,
    tie: Label,
) -> Result<Verdict, RankerError> {
    let scorer = match (mode, scorer) {
        (Mode::Voting, _) => None,
        (_, Some(s)) => Some(s),
        (_, None) => return Err(RankerError::ModelMissing(mode)),
    };
    let undecided = Verdict {
        label: tie,
        confidence: 0.0,
        rationale: None,
    };
    let items = &candidates.items;
    if items.is_empty() {
        return Ok(undecided);
    }
    let n = items.len() as f64;
    Ok(match (mode, scorer) {
        (Mode::Voting, _) => {
            let yes = items.iter().filter(|c| c.result).count() as f64;
            let margin = yes - (n - yes);
            if margin == 0.0 {
                undecided
            } else {
                Verdict {
                    label: Label::from_bool(margin > 0.0),
                    confidence: margin.abs() / n,
                    rationale: None,
                }
            }
        }
        (Mode::Weighted, Some(s)) => {
            let scores: Vec<f64> = items.iter().map(|c| s.score(linked, &c.program)).collect();
            // Each side is summed on its own so an exact tie stays a tie.
            let side = |want: bool| -> f64 {
                items
                    .iter()
                    .zip(&scores)
                    .filter(|(c, _)| c.result == want)
                    .map(|(_, w)| *w)
                    .sum()
            };
            let (yes, no) = (side(true), side(false));
            let total = yes + no;
            let signed = yes - no;
            if yes == no || total <= 0.0 {
                undecided
            } else {
                Verdict {
                    label: Label::from_bool(signed > 0.0),
                    confidence: (signed.abs() / total).min(1.0),
                    rationale: None,
                }
            }
        }
        (Mode::Ranking, Some(s)) => {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, c) in items.iter().enumerate() {
                let sc = s.score(linked, &c.program);
                if sc > best_score {
                    best = i;
                    best_score = sc;
                }
            }
            Verdict {
                label: Label::from_bool(items[best].result),
                confidence: best_score.clamp(0.0, 1.0),
                rationale: Some(items[best].program.clone()),
            }
        }
        _ => unreachable!("scorer presence checked above"),
    })
}
