//! Sparse features over (statement, program) pairs.
//!
//! Features are named strings hashed into a fixed space of `2^HASH_BITS`
//! buckets. Collisions are tolerated.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::dsl::{Expr, Program};
use crate::linker::{is_stopword, tokenize, LinkTarget, LinkedStatement};

pub const HASH_BITS: u32 = 20;
pub const DIM: usize = 1 << HASH_BITS;

/// Sorted, duplicate-free (index, value) pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| weights[i as usize] * v)
            .sum()
    }
}

pub fn hash_feature(name: &str) -> u32 {
    let mut h = FnvHasher::default();
    h.write(name.as_bytes());
    (h.finish() & (DIM as u64 - 1)) as u32
}

fn add(out: &mut BTreeMap<String, f64>, name: String) {
    *out.entry(name).or_insert(0.0) += 1.0;
}

/// Named features before hashing. Prefixes: `s1:`/`s2:` statement unigrams and
/// bigrams, `p1:`/`p2:` function names and parent>child edges, `slot:` linked
/// argument indicators, `x:` token-function crosses, `depth:` application
/// count, `cap:` caption tokens.
pub fn feature_names(
    linked: &LinkedStatement,
    program: &Program,
    use_caption: bool,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let lemmas = linked.masked_lemmas();
    for l in &lemmas {
        add(&mut out, format!("s1:{l}"));
    }
    for w in lemmas.windows(2) {
        add(&mut out, format!("s2:{} {}", w[0], w[1]));
    }

    let mut fns = BTreeSet::new();
    for tree in program.trees() {
        tree.walk(&mut |e| {
            if let Expr::Call(op, args) = e {
                fns.insert(op.name());
                add(&mut out, format!("p1:{}", op.name()));
                for a in args {
                    if let Expr::Call(child, _) = a {
                        add(&mut out, format!("p2:{}>{}", op.name(), child.name()));
                    }
                }
            }
        });
    }

    let mentioned_cols: BTreeSet<&str> = linked
        .links
        .iter()
        .filter(|l| matches!(l.target, LinkTarget::Column { .. }))
        .map(|l| l.target_text.as_str())
        .collect();
    let linked_cells: BTreeSet<&str> = linked
        .links
        .iter()
        .filter(|l| matches!(l.target, LinkTarget::Cell { .. }))
        .map(|l| l.target_text.as_str())
        .collect();
    for tree in program.trees() {
        tree.walk(&mut |e| match e {
            Expr::Col(c) if mentioned_cols.contains(c.as_str()) => {
                add(&mut out, "slot:col_mentioned".into())
            }
            Expr::Col(_) => add(&mut out, "slot:col_unmentioned".into()),
            Expr::Str(s) if linked_cells.contains(s.as_str()) => {
                add(&mut out, "slot:str_linked".into())
            }
            _ => {}
        });
    }

    let content: BTreeSet<&str> = lemmas.iter().copied().filter(|l| !is_stopword(l)).collect();
    for l in &content {
        for f in &fns {
            add(&mut out, format!("x:{l}|{f}"));
        }
    }

    add(&mut out, format!("depth:{}", program.applications()));

    if use_caption {
        for t in tokenize(&linked.caption) {
            add(&mut out, format!("cap:{}", t.lemma));
        }
    }
    out
}

pub fn featurize(linked: &LinkedStatement, program: &Program, use_caption: bool) -> FeatureVector {
    let mut hashed: BTreeMap<u32, f64> = BTreeMap::new();
    for (name, v) in feature_names(linked, program, use_caption) {
        *hashed.entry(hash_feature(&name)).or_insert(0.0) += v;
    }
    FeatureVector {
        entries: hashed.into_iter().collect(),
    }
}
