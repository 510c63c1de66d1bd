//! Brute-force checks of linker output.
//!
//! Greedy left-to-right longest matching is characterized by three facts,
//! each checked by scanning every span against every target:
//!
//! 1. each link's span matches its target and no longer span from the same
//!    start matches any target;
//! 2. no linkable span starting at an uncovered token matches any target;
//! 3. the chosen target has the smallest edit distance to the span text among
//!    all matching targets, earliest target first on ties.

use tabverify::linker::{is_linkable_ngram, lemma_sequence, LinkTarget, LinkedStatement};
use tabverify::table::{normalize, Table};

/// Plain dynamic-programming Levenshtein distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Targets in tie-break order: cells row-major, columns, caption.
pub fn targets(table: &Table) -> Vec<(LinkTarget, String, Vec<String>)> {
    let mut out = Vec::new();
    for r in 0..table.row_count() {
        for c in 0..table.col_count() {
            let text = table.cell(r, c).text.clone();
            out.push((
                LinkTarget::Cell { row: r, col: c },
                text.clone(),
                lemma_sequence(&text),
            ));
        }
    }
    for (c, col) in table.columns.iter().enumerate() {
        out.push((
            LinkTarget::Column { col: c },
            col.name.clone(),
            lemma_sequence(&col.name),
        ));
    }
    let caption = normalize(&table.caption);
    if !caption.is_empty() {
        out.push((
            LinkTarget::Caption,
            caption.clone(),
            lemma_sequence(&caption),
        ));
    }
    out
}

fn occurs(hay: &[String], needle: &[&str]) -> bool {
    if needle.is_empty() || needle.len() > hay.len() {
        return false;
    }
    (0..=hay.len() - needle.len()).any(|s| (0..needle.len()).all(|k| hay[s + k] == needle[k]))
}

pub fn check(statement: &str, table: &Table, linked: &LinkedStatement) -> Result<(), String> {
    let lemmas: Vec<&str> = linked.tokens.iter().map(|t| t.lemma.as_str()).collect();
    let n = lemmas.len();
    let targets = targets(table);
    let matches = |lo: usize, hi: usize| -> Vec<usize> {
        let gram = &lemmas[lo..hi];
        if !is_linkable_ngram(gram) {
            return Vec::new();
        }
        (0..targets.len())
            .filter(|&k| occurs(&targets[k].2, gram))
            .collect()
    };

    let mut covered = vec![false; n];
    let mut last_end = 0;
    for l in &linked.links {
        if l.span.start < last_end || l.span.is_empty() || l.span.end > n {
            return Err(format!("links overlap or are out of order: {:?}", l.span));
        }
        last_end = l.span.end;
        for c in l.span.clone() {
            covered[c] = true;
        }
        let m = matches(l.span.start, l.span.end);
        if m.is_empty() {
            return Err(format!("span {:?} matches nothing", l.span));
        }
        for hi in l.span.end + 1..=n {
            if !matches(l.span.start, hi).is_empty() {
                return Err(format!("span {:?} extends to {hi}", l.span));
            }
        }
        let lo_byte = linked.tokens[l.span.start].span.start;
        let hi_byte = linked.tokens[l.span.end - 1].span.end;
        let surface = normalize(&statement[lo_byte..hi_byte]);
        let best = m
            .iter()
            .copied()
            .min_by_key(|&k| (levenshtein(&surface, &targets[k].1), k))
            .unwrap();
        if targets[best].0 != l.target || targets[best].1 != l.target_text {
            return Err(format!(
                "span {:?} `{surface}` linked to {:?}, closest is {:?}",
                l.span, l.target, targets[best].0
            ));
        }
    }
    for (i, &done) in covered.iter().enumerate() {
        if done {
            continue;
        }
        for hi in i + 1..=n {
            if !matches(i, hi).is_empty() {
                return Err(format!("uncovered token {i} starts matching span ..{hi}"));
            }
        }
    }
    Ok(())
}
