//! Entity linking: bind statement phrases to table cells, column names and
//! the caption.
//!
//! Linking is a greedy left-to-right longest match over lemmatized token
//! n-grams. A statement n-gram matches a target when it occurs as a contiguous
//! run inside the target's own lemmatized tokens. When several targets match
//! the chosen span, the one with the smallest character edit distance to the
//! span's surface text wins. Spans that match the caption are masked out of the
//! statement.

mod lemma;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::table::{normalize, CellValue, Table};

pub use lemma::{lemmatize, numeral, parse_number};

/// Replaces caption-bound phrases in `masked_text`.
pub const CAPTION_PLACEHOLDER: &str = "<caption>";

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with", "and", "or", "is", "are",
    "was", "were", "be", "been", "being", "there", "that", "this", "these", "those", "it", "its",
    "as", "from", "has", "have", "had", "than", "which", "who", "whom", "what", "when", "where",
    "do", "did", "does", "not", "no", "but", "if", "into", "out", "up", "he", "she", "they", "his",
    "her", "their", "them", "we", "our", "all", "any", "each", "every", "more", "most", "less",
    "least", "only", "also", "after", "before", "-", "'",
];

pub fn is_stopword(lemma: &str) -> bool {
    STOPWORDS.contains(&lemma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    /// Lowercased surface form.
    pub text: String,
    /// Numeral-mapped, lemmatized form used for matching.
    pub lemma: String,
    /// Byte range in the original statement.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkTarget {
    Cell { row: usize, col: usize },
    Column { col: usize },
    Caption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    /// Token range in the statement.
    pub span: Range<usize>,
    pub target: LinkTarget,
    /// Original statement text covered by the span.
    pub surface: String,
    /// Normalized text of the target (cell text, column name or caption).
    pub target_text: String,
}

/// A numeric literal found in the statement outside caption and text-cell links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberMention {
    pub token: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedStatement {
    pub original: String,
    pub tokens: Vec<Token>,
    pub links: Vec<EntityLink>,
    pub masked_text: String,
    pub numbers: Vec<NumberMention>,
    /// Caption of the table the statement was linked against.
    #[serde(default)]
    pub caption: String,
}

impl LinkedStatement {
    /// A statement with no table to link against.
    pub fn unlinked(statement: &str) -> Self {
        let tokens = tokenize(statement);
        let numbers = number_mentions(&tokens, &[]);
        LinkedStatement {
            original: statement.to_string(),
            tokens,
            links: Vec::new(),
            masked_text: statement.to_string(),
            numbers,
            caption: String::new(),
        }
    }

    /// Values pushed into the number cache before search, one per mention.
    pub fn num_seeds(&self) -> Vec<f64> {
        self.numbers.iter().map(|n| n.value).collect()
    }

    /// Values pushed into the string cache: the text of every linked text cell.
    pub fn str_seeds(&self, table: &Table) -> Vec<String> {
        self.links
            .iter()
            .filter_map(|l| match l.target {
                LinkTarget::Cell { row, col } => match &table.cell(row, col).parsed {
                    CellValue::Text(t) => Some(t.clone()),
                    CellValue::Number(_) => None,
                },
                _ => None,
            })
            .collect()
    }

    /// Token lemmas with caption-bound spans collapsed to one placeholder.
    pub fn masked_lemmas(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.tokens.len());
        let mut i = 0;
        while i < self.tokens.len() {
            if let Some(l) = self
                .links
                .iter()
                .find(|l| l.target == LinkTarget::Caption && l.span.start == i)
            {
                out.push(CAPTION_PLACEHOLDER);
                i = l.span.end;
            } else {
                out.push(self.tokens[i].lemma.as_str());
                i += 1;
            }
        }
        out
    }

    /// Columns touched by a cell or column-name link, ascending.
    pub fn linked_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self
            .links
            .iter()
            .filter_map(|l| match l.target {
                LinkTarget::Cell { col, .. } | LinkTarget::Column { col } => Some(col),
                LinkTarget::Caption => None,
            })
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '.' | ',' | '&' | '/')
}

/// Split into word tokens. Runs of alphanumerics form a token; `- ' . , & /`
/// stay inside a token when surrounded by alphanumerics (commas only between
/// digits), so `3,412`, `3.4`, `re-elected` and `mcfall's` are single tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        // A minus sign opens a token when it directly precedes a digit and
        // does not follow a word character: "-1" but not "1952-1964".
        let negative = chars[i].1 == '-'
            && chars.get(i + 1).is_some_and(|c| c.1.is_ascii_digit())
            && (i == 0 || !chars[i - 1].1.is_alphanumeric());
        if !negative && !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = if negative { i + 2 } else { i + 1 };
        loop {
            if end < chars.len() && chars[end].1.is_alphanumeric() {
                end += 1;
                continue;
            }
            if end + 1 < chars.len()
                && is_joiner(chars[end].1)
                && chars[end + 1].1.is_alphanumeric()
            {
                let c = chars[end].1;
                let between_digits =
                    chars[end - 1].1.is_ascii_digit() && chars[end + 1].1.is_ascii_digit();
                if c != ',' || between_digits {
                    end += 2;
                    continue;
                }
            }
            break;
        }
        let lo = chars[start].0;
        let hi = chars.get(end).map_or(text.len(), |c| c.0);
        let text_lower = text[lo..hi].to_lowercase();
        let lemma = numeral(&text_lower).unwrap_or_else(|| lemmatize(&text_lower));
        tokens.push(Token {
            text: text_lower,
            lemma,
            span: lo..hi,
        });
        i = end;
    }
    tokens
}

/// Lemma sequence for a piece of table text.
pub fn lemma_sequence(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.lemma).collect()
}

/// Whether an n-gram of lemmas may form a link on its own: it needs a content
/// word at both ends, and a lone number is left to the number cache.
pub fn is_linkable_ngram(lemmas: &[&str]) -> bool {
    match lemmas {
        [] => false,
        [only] => !is_stopword(only) && parse_number(only).is_none(),
        [first, .., last] => !is_stopword(first) && !is_stopword(last),
    }
}

/// True when `needle` occurs as a contiguous run in `haystack`.
pub fn contains_run<S: AsRef<str>>(haystack: &[S], needle: &[&str]) -> bool {
    !needle.is_empty()
        && haystack.len() >= needle.len()
        && haystack
            .windows(needle.len())
            .any(|w| w.iter().zip(needle).all(|(a, b)| a.as_ref() == *b))
}

struct Candidate {
    target: LinkTarget,
    text: String,
    lemmas: Vec<String>,
}

fn candidates(table: &Table) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            out.push(Candidate {
                target: LinkTarget::Cell { row: r, col: c },
                text: cell.text.clone(),
                lemmas: lemma_sequence(&cell.text),
            });
        }
    }
    for (c, col) in table.columns.iter().enumerate() {
        out.push(Candidate {
            target: LinkTarget::Column { col: c },
            text: col.name.clone(),
            lemmas: lemma_sequence(&col.name),
        });
    }
    let caption = normalize(&table.caption);
    if !caption.is_empty() {
        out.push(Candidate {
            target: LinkTarget::Caption,
            lemmas: lemma_sequence(&caption),
            text: caption,
        });
    }
    out
}

/// Pick the candidate with the smallest edit distance to `surface`; ties go to
/// the earliest candidate (cells row-major, then columns, then the caption).
pub fn closest_by_edit_distance<'c, I>(surface: &str, texts: I) -> Option<usize>
where
    I: IntoIterator<Item = &'c str>,
{
    texts
        .into_iter()
        .enumerate()
        .min_by_key(|(i, t)| (strsim::levenshtein(surface, t), *i))
        .map(|(i, _)| i)
}

/// Link `statement` against `table`.
pub fn link(statement: &str, table: &Table) -> LinkedStatement {
    let tokens = tokenize(statement);
    let lemmas: Vec<&str> = tokens.iter().map(|t| t.lemma.as_str()).collect();
    let cands = candidates(table);
    let mut links = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut linked = false;
        for len in (1..=tokens.len() - i).rev() {
            let gram = &lemmas[i..i + len];
            if !is_linkable_ngram(gram) {
                continue;
            }
            let matching: Vec<&Candidate> = cands
                .iter()
                .filter(|c| contains_run(&c.lemmas, gram))
                .collect();
            if matching.is_empty() {
                continue;
            }
            let surface = &statement[tokens[i].span.start..tokens[i + len - 1].span.end];
            let surface_norm = normalize(surface);
            let best =
                closest_by_edit_distance(&surface_norm, matching.iter().map(|c| c.text.as_str()))
                    .expect("non-empty");
            links.push(EntityLink {
                span: i..i + len,
                target: matching[best].target,
                surface: surface.to_string(),
                target_text: matching[best].text.clone(),
            });
            i += len;
            linked = true;
            break;
        }
        if !linked {
            i += 1;
        }
    }
    let masked_text = mask(statement, &tokens, &links);
    let numbers = number_mentions(&tokens, &suppressed_spans(table, &links));
    LinkedStatement {
        original: statement.to_string(),
        tokens,
        links,
        masked_text,
        numbers,
        caption: table.caption.clone(),
    }
}

/// Token ranges whose numbers are not seeded: caption spans, multi-token
/// column names, and multi-token spans bound to text cells (the cell's string
/// is seeded instead).
fn suppressed_spans(table: &Table, links: &[EntityLink]) -> Vec<Range<usize>> {
    links
        .iter()
        .filter(|l| match l.target {
            LinkTarget::Caption => true,
            LinkTarget::Cell { row, col } => {
                l.span.len() > 1 && table.cell(row, col).number().is_none()
            }
            // "first elected" names a column; its "first" is no ordinal.
            LinkTarget::Column { .. } => l.span.len() > 1,
        })
        .map(|l| l.span.clone())
        .collect()
}

fn number_mentions(tokens: &[Token], suppressed: &[Range<usize>]) -> Vec<NumberMention> {
    tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !suppressed.iter().any(|r| r.contains(i)))
        .filter_map(|(i, t)| parse_number(&t.lemma).map(|value| NumberMention { token: i, value }))
        .collect()
}

fn mask(statement: &str, tokens: &[Token], links: &[EntityLink]) -> String {
    let mut out = String::with_capacity(statement.len());
    let mut cursor = 0;
    for l in links.iter().filter(|l| l.target == LinkTarget::Caption) {
        let lo = tokens[l.span.start].span.start;
        let hi = tokens[l.span.end - 1].span.end;
        out.push_str(&statement[cursor..lo]);
        out.push_str(CAPTION_PLACEHOLDER);
        cursor = hi;
    }
    out.push_str(&statement[cursor..]);
    out
}
