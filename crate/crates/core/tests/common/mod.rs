//! Shared fixtures and independent reference implementations for the
//! integration tests.

#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod linker_bf;
pub mod reference;

use tabverify::table::Table;

/// Five incumbents: two democratic, three republican.
pub fn elections() -> Table {
    Table::from_rows(
        "elections",
        "united states house of representatives elections , 1972",
        &["district", "incumbent", "party", "first elected", "result"],
        &[
            vec![
                "california 3",
                "john e moss",
                "democratic",
                "1952",
                "re-elected",
            ],
            vec![
                "california 5",
                "phillip burton",
                "democratic",
                "1964",
                "re-elected",
            ],
            vec![
                "california 8",
                "george p miller",
                "republican",
                "1944",
                "lost renomination",
            ],
            vec![
                "california 14",
                "jerome waldie",
                "republican",
                "1966",
                "re-elected",
            ],
            vec![
                "california 15",
                "john j mcfall",
                "republican",
                "1956",
                "re-elected",
            ],
        ],
    )
    .unwrap()
}

pub fn mini_root() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mini")
}

/// The curated corpus: instances with reference programs, and their tables.
pub fn mini_corpus() -> (
    Vec<tabverify::harness::Instance>,
    std::collections::BTreeMap<String, Table>,
) {
    let root = mini_root();
    let instances = tabverify::harness::read_instances(&root.join("instances.jsonl")).unwrap();
    let ds = tabverify::harness::load_dataset(&root, tabverify::harness::Split::Test).unwrap();
    (instances, ds.tables)
}
