//! End-to-end verification and accuracy reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linker::{link, LinkedStatement};
use crate::ranker::{decide_with_tie, Label, Mode, Scorer, ScorerModel, Verdict};
use crate::search::{search, CandidateSet, SearchConfig};
use crate::table::Table;

use super::categories::{categorize, Category};
use super::dataset::{Channel, Instance};

/// Per-instance search budget when none is configured.
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub search: SearchConfig,
    pub mode: Mode,
    pub model: Option<ScorerModel>,
    /// Label returned on ties, empty candidate sets and timeouts.
    pub default_label: Label,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            search: SearchConfig {
                timeout_ms: Some(DEFAULT_TIMEOUT_MS),
                ..SearchConfig::default()
            },
            mode: Mode::Voting,
            model: None,
            default_label: Label::Refuted,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub linked: LinkedStatement,
    pub candidates: CandidateSet,
    pub verdict: Verdict,
    pub timed_out: bool,
}

impl Pipeline {
    /// Link, search and decide for one statement.
    pub fn verify(
        &self,
        table: &Table,
        statement: &str,
    ) -> Result<Verification, crate::ranker::RankerError> {
        let linked = link(statement, table);
        let candidates = search(table, &linked, &self.search);
        let timed_out = candidates.stats.timed_out;
        let verdict = if timed_out {
            Verdict {
                label: self.default_label,
                confidence: 0.0,
                rationale: None,
            }
        } else {
            let scorer = self.model.as_ref().map(|m| m as &dyn Scorer);
            decide_with_tie(&candidates, &linked, scorer, self.mode, self.default_label)?
        };
        Ok(Verification {
            linked,
            candidates,
            verdict,
            timed_out,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub table_id: String,
    pub statement: String,
    pub gold: Label,
    pub predicted: Label,
    pub confidence: f64,
    pub channel: Channel,
    pub categories: BTreeSet<Category>,
    pub candidates: usize,
    pub timed_out: bool,
    /// Whether the instance's reference program was among the candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_found: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceResult {
    pub fn correct(&self) -> bool {
        self.error.is_none() && self.predicted == self.gold
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }

    fn finish(&mut self) {
        self.accuracy = if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        };
    }
}

/// Counts indexed as `[gold][predicted]` with REFUTED = 0, ENTAILED = 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion(pub [[usize; 2]; 2]);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    pub overall: Tally,
    pub per_channel: BTreeMap<Channel, Tally>,
    pub per_category: BTreeMap<Category, Tally>,
    pub confusion: Confusion,
    pub timeouts: usize,
    pub errors: usize,
    /// Share of instances with a reference program whose program was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_recall: Option<f64>,
}

impl EvalReport {
    /// Fold per-instance results into a report. Order does not matter.
    pub fn from_results(results: &[InstanceResult]) -> EvalReport {
        let mut r = EvalReport::default();
        let mut with_gold = 0usize;
        let mut found = 0usize;
        for res in results {
            let ok = res.correct();
            r.overall.add(ok);
            r.per_channel.entry(res.channel).or_default().add(ok);
            for c in &res.categories {
                r.per_category.entry(*c).or_default().add(ok);
            }
            if res.error.is_some() {
                r.errors += 1;
            } else {
                let g = usize::from(res.gold.as_bool());
                let p = usize::from(res.predicted.as_bool());
                r.confusion.0[g][p] += 1;
            }
            r.timeouts += usize::from(res.timed_out);
            if let Some(f) = res.gold_found {
                with_gold += 1;
                found += usize::from(f);
            }
        }
        r.overall.finish();
        r.per_channel.values_mut().for_each(Tally::finish);
        r.per_category.values_mut().for_each(Tally::finish);
        r.search_recall = (with_gold > 0).then(|| found as f64 / with_gold as f64);
        r
    }

    /// Plain-text summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, name: &str, t: &Tally| {
            let _ = writeln!(
                out,
                "{name:<14} {:>8} {:>8} {:>9.4}",
                t.total, t.correct, t.accuracy
            );
        };
        if let Some(split) = &self.split {
            let _ = writeln!(out, "split: {split}");
        }
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>8} {:>9}",
            "group", "total", "correct", "accuracy"
        );
        row(&mut out, "overall", &self.overall);
        for (ch, t) in &self.per_channel {
            row(&mut out, &format!("channel:{ch}"), t);
        }
        for (cat, t) in &self.per_category {
            row(&mut out, cat.name(), t);
        }
        let [[rr, re], [er, ee]] = self.confusion.0;
        let _ = writeln!(out, "confusion (gold\\pred)  REFUTED ENTAILED");
        let _ = writeln!(out, "  REFUTED            {rr:>8} {re:>8}");
        let _ = writeln!(out, "  ENTAILED           {er:>8} {ee:>8}");
        let _ = writeln!(out, "timeouts: {}  errors: {}", self.timeouts, self.errors);
        if let Some(recall) = self.search_recall {
            let _ = writeln!(out, "search recall: {recall:.4}");
        }
        out
    }
}

fn run_one(
    index: usize,
    inst: &Instance,
    table: Option<&Table>,
    pipeline: &Pipeline,
) -> InstanceResult {
    let mut res = InstanceResult {
        index,
        table_id: inst.table_id.clone(),
        statement: inst.statement.clone(),
        gold: inst.label,
        predicted: pipeline.default_label,
        confidence: 0.0,
        channel: inst.channel,
        categories: categorize(&inst.statement),
        candidates: 0,
        timed_out: false,
        gold_found: None,
        error: None,
    };
    let Some(table) = table else {
        res.error = Some(format!("table `{}` not loaded", inst.table_id));
        return res;
    };
    match pipeline.verify(table, &inst.statement) {
        Ok(v) => {
            res.predicted = v.verdict.label;
            res.confidence = v.verdict.confidence;
            res.candidates = v.candidates.len();
            res.timed_out = v.timed_out;
            res.gold_found = inst
                .gold_program
                .as_ref()
                .map(|g| v.candidates.contains_trace(g));
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    res
}

/// Verify every instance in parallel. Results come back in input order.
pub fn evaluate_instances<'a>(
    instances: &[Instance],
    tables: impl Fn(&str) -> Option<&'a Table> + Sync,
    pipeline: &Pipeline,
) -> Vec<InstanceResult> {
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_one(i, inst, tables(&inst.table_id), pipeline))
        .collect()
}

pub fn evaluate<'a>(
    instances: &[Instance],
    tables: impl Fn(&str) -> Option<&'a Table> + Sync,
    pipeline: &Pipeline,
) -> EvalReport {
    EvalReport::from_results(&evaluate_instances(instances, tables, pipeline))
}
