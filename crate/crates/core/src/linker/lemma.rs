//! Fixed suffix-rule lemmatizer.
//!
//! Handles plural and verb inflections plus a couple of derivational endings
//! that matter for table text (`democratic` / `democrats`). The rules are
//! applied until nothing changes, so the result is always a fixed point.
//! Every rule shortens the word, which bounds the loop.

pub fn lemmatize(token: &str) -> String {
    let mut cur = token.to_lowercase();
    while let Some(next) = step(&cur) {
        debug_assert!(next.len() < cur.len());
        cur = next;
    }
    cur
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(is_vowel)
}

fn is_alpha_word(s: &str) -> bool {
    s.bytes()
        .all(|b| b.is_ascii_lowercase() || b == b'-' || b == b'\'')
}

/// consonant-vowel-consonant ending, last consonant not w/x/y
fn ends_cvc(s: &[u8]) -> bool {
    let n = s.len();
    n >= 3
        && !is_vowel(s[n - 3])
        && is_vowel(s[n - 2])
        && !is_vowel(s[n - 1])
        && !matches!(s[n - 1], b'w' | b'x' | b'y')
}

fn step(w: &str) -> Option<String> {
    if let Some(stem) = w.strip_suffix("'s") {
        return Some(stem.to_string());
    }
    if w.len() <= 3 || !is_alpha_word(w) {
        return None;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.len() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    if w.ends_with("sses") {
        return Some(w[..w.len() - 2].to_string());
    }
    if let Some(stem) = w.strip_suffix("es") {
        if stem.ends_with(['s', 'x', 'z']) || stem.ends_with("ch") || stem.ends_with("sh") {
            return Some(stem.to_string());
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return Some(w[..w.len() - 1].to_string());
    }
    if w.ends_with("eed") {
        return None;
    }
    for suffix in ["ed", "ing"] {
        if let Some(stem) = w.strip_suffix(suffix) {
            if stem.len() >= 2 && has_vowel(stem) {
                return Some(tidy_stem(stem));
            }
        }
    }
    if let Some(stem) = w.strip_suffix("ic") {
        if stem.len() >= 6 {
            return Some(stem.to_string());
        }
    }
    None
}

fn tidy_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if n >= 2
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        return stem[..n - 1].to_string();
    }
    let vowel_groups = stem
        .as_bytes()
        .windows(2)
        .filter(|w| is_vowel(w[0]) && !is_vowel(w[1]))
        .count();
    if vowel_groups == 1 && ends_cvc(b) {
        return format!("{stem}e");
    }
    stem.to_string()
}

const NUMBER_WORDS: [(&str, &str); 30] = [
    ("zero", "0"),
    ("one", "1"),
    ("two", "2"),
    ("three", "3"),
    ("four", "4"),
    ("five", "5"),
    ("six", "6"),
    ("seven", "7"),
    ("eight", "8"),
    ("nine", "9"),
    ("ten", "10"),
    ("eleven", "11"),
    ("twelve", "12"),
    ("thirteen", "13"),
    ("fourteen", "14"),
    ("fifteen", "15"),
    ("twenty", "20"),
    ("first", "1"),
    ("second", "2"),
    ("third", "3"),
    ("fourth", "4"),
    ("fifth", "5"),
    ("sixth", "6"),
    ("seventh", "7"),
    ("eighth", "8"),
    ("ninth", "9"),
    ("tenth", "10"),
    ("once", "1"),
    ("twice", "2"),
    ("thrice", "3"),
];

/// Map cardinal/ordinal number words and `2nd`-style ordinals to numerals.
pub fn numeral(token: &str) -> Option<String> {
    if let Some((_, n)) = NUMBER_WORDS.iter().find(|(w, _)| *w == token) {
        return Some(n.to_string());
    }
    let digits = token
        .strip_suffix("st")
        .or_else(|| token.strip_suffix("nd"))
        .or_else(|| token.strip_suffix("rd"))
        .or_else(|| token.strip_suffix("th"))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.to_string())
}

/// Value of a purely numeric token (`3`, `3,412`, `-2.5`).
pub fn parse_number(token: &str) -> Option<f64> {
    let body = token.strip_prefix('-').unwrap_or(token);
    if body.is_empty() || !body.bytes().next().is_some_and(|b| b.is_ascii_digit()) {
        return None;
    }
    if !body
        .bytes()
        .all(|b| b.is_ascii_digit() || b == b',' || b == b'.')
    {
        return None;
    }
    let cleaned: String = token.chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|n| n.is_finite())
}
