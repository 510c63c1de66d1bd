//! Seeded random tables and seeds.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tabverify::table::Table;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    rand::SeedableRng::seed_from_u64(seed)
}

const SMALL_CELLS: &[&str] = &["1", "2", "3", "5", "a", "b", "1.5"];

/// A table with up to `max_rows` x `max_cols` cells drawn from a tiny pool,
/// so that filters, ties and mixed-type columns are common.
pub fn small_table(rng: &mut TestRng, max_rows: usize, max_cols: usize) -> Table {
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let header: Vec<String> = (0..cols).map(|c| format!("c{c}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let cells: Vec<Vec<&str>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| *SMALL_CELLS.choose(rng).unwrap())
                .collect()
        })
        .collect();
    Table::from_rows("rand", "", &header, &cells).unwrap()
}

const WIDE_CELLS: &[&str] = &[
    "0", "1", "2", "2", "3", "4", "7", "10", "12", "-3", "2.5", "0.1", "1,000", "3,412", "45%",
    "apple", "pear", "fig", "kiwi", "new york", "la", "x y", "3.4 (ot)",
];

/// Up to 6 x 4 tables with a wider value pool, for interpreter checks.
pub fn table(rng: &mut TestRng) -> Table {
    let rows = rng.gen_range(1..=6);
    let cols = rng.gen_range(1..=4);
    let header: Vec<String> = (0..cols).map(|c| format!("col {c}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let numeric_col: Vec<bool> = (0..cols).map(|_| rng.gen_bool(0.6)).collect();
    let cells: Vec<Vec<&str>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|c| {
                    if numeric_col[c] && rng.gen_bool(0.9) {
                        *WIDE_CELLS[..15].choose(rng).unwrap()
                    } else {
                        *WIDE_CELLS.choose(rng).unwrap()
                    }
                })
                .collect()
        })
        .collect();
    Table::from_rows("rand", "", &header, &cells).unwrap()
}

/// Up to `max_total` seeds, numbers and strings mixed.
pub fn seeds(rng: &mut TestRng, max_total: usize) -> (Vec<f64>, Vec<String>) {
    let total = rng.gen_range(0..=max_total);
    let mut nums = Vec::new();
    let mut strs = Vec::new();
    for _ in 0..total {
        if rng.gen_bool(0.5) {
            nums.push(*[1.0, 2.0, 3.0, 5.0].choose(rng).unwrap());
        } else {
            strs.push(["a", "b", "z"].choose(rng).unwrap().to_string());
        }
    }
    (nums, strs)
}

const WORDS: &[&str] = &[
    "game",
    "games",
    "played",
    "playing",
    "democrat",
    "democratic",
    "democrats",
    "team",
    "teams",
    "score",
    "scored",
    "new",
    "york",
    "city",
    "cities",
    "the",
    "of",
    "in",
    "and",
    "won",
    "win",
    "3",
    "three",
    "first",
    "john",
    "mcfall",
    "mcfaul",
    "j.",
    "moss",
    "re-elected",
    "elected",
    "party",
    "more",
    "than",
    "2",
    "1,000",
    "season",
    "player's",
    "league",
];

fn phrase(rng: &mut TestRng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A table and a statement sharing vocabulary, for linker checks.
pub fn linker_pair(rng: &mut TestRng) -> (Table, String) {
    let rows = rng.gen_range(1..=4);
    let cols = rng.gen_range(1..=3);
    let mut header: Vec<String> = Vec::new();
    while header.len() < cols {
        let h = phrase(rng, 2);
        if !header.contains(&h) {
            header.push(h);
        }
    }
    let cells: Vec<Vec<String>> = (0..rows)
        .map(|_| (0..cols).map(|_| phrase(rng, 3)).collect())
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let cell_refs: Vec<Vec<&str>> = cells
        .iter()
        .map(|r| r.iter().map(String::as_str).collect())
        .collect();
    let caption = if rng.gen_bool(0.3) {
        phrase(rng, 3)
    } else {
        String::new()
    };
    let table = Table::from_rows("rand", &caption, &header_refs, &cell_refs).unwrap();
    let mut parts = Vec::new();
    for _ in 0..rng.gen_range(2..=6) {
        if rng.gen_bool(0.4) {
            let r = rng.gen_range(0..rows);
            let c = rng.gen_range(0..cols);
            parts.push(cells[r][c].clone());
        } else {
            parts.push(phrase(rng, 2));
        }
    }
    (table, parts.join(" "))
}
