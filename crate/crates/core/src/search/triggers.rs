//! Trigger-word pruning of the function set.
//!
//! The lexicon is data: a JSON file mapping words (or multi-word phrases) to
//! function names, plus the functions that are always enabled. Two pseudo
//! keys exist: `<num>` fires when the statement carries a number, and `n't`
//! also fires on any token ending in `n't`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use serde::Deserialize;
use thiserror::Error;

use crate::dsl::Op;
use crate::linker::LinkedStatement;

const BUILTIN: &str = include_str!("../../data/triggers.json");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed lexicon: {0}")]
    Json(#[from] serde_json::Error),
    #[error("lexicon refers to unknown function `{0}`")]
    UnknownFunction(String),
}

#[derive(Deserialize)]
struct RawLexicon {
    version: u32,
    always_on: Vec<String>,
    triggers: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct TriggerLexicon {
    pub version: u32,
    always_on: BTreeSet<Op>,
    /// (phrase words, phrase, functions)
    triggers: Vec<(Vec<String>, String, Vec<Op>)>,
}

static BUILTIN_LEXICON: LazyLock<TriggerLexicon> =
    LazyLock::new(|| TriggerLexicon::from_json(BUILTIN).expect("bundled trigger lexicon is valid"));

fn resolve(names: &[String]) -> Result<Vec<Op>, LexiconError> {
    names
        .iter()
        .map(|n| Op::from_name(n).ok_or_else(|| LexiconError::UnknownFunction(n.clone())))
        .collect()
}

impl TriggerLexicon {
    pub fn builtin() -> &'static TriggerLexicon {
        &BUILTIN_LEXICON
    }

    pub fn from_json(text: &str) -> Result<TriggerLexicon, LexiconError> {
        let raw: RawLexicon = serde_json::from_str(text)?;
        let always_on = resolve(&raw.always_on)?.into_iter().collect();
        let triggers = raw
            .triggers
            .into_iter()
            .map(|(phrase, names)| {
                let words = phrase.split_whitespace().map(str::to_string).collect();
                Ok((words, phrase, resolve(&names)?))
            })
            .collect::<Result<_, LexiconError>>()?;
        Ok(TriggerLexicon {
            version: raw.version,
            always_on,
            triggers,
        })
    }

    pub fn always_on(&self) -> &BTreeSet<Op> {
        &self.always_on
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Vec<Op>)> {
        self.triggers.iter().map(|(_, phrase, ops)| (phrase, ops))
    }

    /// Phrases of the lexicon that fire on `linked`.
    pub fn fired(&self, linked: &LinkedStatement) -> Vec<&str> {
        let texts: Vec<&str> = linked.tokens.iter().map(|t| t.text.as_str()).collect();
        let lemmas: Vec<&str> = linked.tokens.iter().map(|t| t.lemma.as_str()).collect();
        let has_number = !linked.numbers.is_empty();
        self.triggers
            .iter()
            .filter(|(words, phrase, _)| match phrase.as_str() {
                "<num>" => has_number,
                "n't" => texts.iter().any(|t| t.ends_with("n't")),
                _ => {
                    let words: Vec<&str> = words.iter().map(String::as_str).collect();
                    crate::linker::contains_run(&texts, &words)
                        || crate::linker::contains_run(&lemmas, &words)
                }
            })
            .map(|(_, phrase, _)| phrase.as_str())
            .collect()
    }

    /// Always-on functions plus every function triggered by the statement.
    pub fn filter(&self, linked: &LinkedStatement) -> BTreeSet<Op> {
        let fired: BTreeSet<&str> = self.fired(linked).into_iter().collect();
        let mut ops = self.always_on.clone();
        for (_, phrase, fns) in &self.triggers {
            if fired.contains(phrase.as_str()) {
                ops.extend(fns.iter().copied());
            }
        }
        ops
    }
}

/// Functions admitted into the search for this statement, using the bundled
/// lexicon. Ordered by catalog position.
pub fn trigger_filter(linked: &LinkedStatement) -> BTreeSet<Op> {
    TriggerLexicon::builtin().filter(linked)
}
