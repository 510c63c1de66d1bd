//! Keyword tagging of statements by the higher-order operation they express.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::linker::{contains_run, tokenize};

const BUILTIN: &str = include_str!("../../data/categories.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Aggregation,
    Negation,
    Superlative,
    Comparative,
    Ordinal,
    Unique,
    All,
    None,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Aggregation => "aggregation",
            Category::Negation => "negation",
            Category::Superlative => "superlative",
            Category::Comparative => "comparative",
            Category::Ordinal => "ordinal",
            Category::Unique => "unique",
            Category::All => "all",
            Category::None => "none",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Deserialize)]
struct RawCategories {
    #[allow(dead_code)]
    version: u32,
    categories: BTreeMap<Category, Vec<String>>,
}

static KEYWORDS: LazyLock<Vec<(Category, Vec<Vec<String>>)>> = LazyLock::new(|| {
    let raw: RawCategories =
        serde_json::from_str(BUILTIN).expect("bundled category lexicon is valid");
    raw.categories
        .into_iter()
        .map(|(cat, phrases)| {
            let phrases = phrases
                .iter()
                .map(|p| p.split_whitespace().map(str::to_string).collect())
                .collect();
            (cat, phrases)
        })
        .collect()
});

/// Operation tags for a statement; `{None}` when no keyword fires.
pub fn categorize(statement: &str) -> BTreeSet<Category> {
    let tokens = tokenize(statement);
    let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    let mut out = BTreeSet::new();
    for (cat, phrases) in KEYWORDS.iter() {
        let hit = phrases.iter().any(|words| {
            if words.len() == 1 && words[0] == "n't" {
                return texts.iter().any(|t| t.ends_with("n't"));
            }
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            contains_run(&texts, &words)
        });
        if hit {
            out.insert(*cat);
        }
    }
    if out.is_empty() {
        out.insert(Category::None);
    }
    out
}
