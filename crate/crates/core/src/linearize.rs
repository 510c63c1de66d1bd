//! Table-to-text serialization for sequence-pair models.
//!
//! Template mode reads a row as a sentence:
//! `row one's game is 51; the date is february; the score is 3.4 (ot).`
//! Concatenation mode joins raw cells with a separator token and returns the
//! column name of every cell as a parallel annotation list. A vertical scan
//! is a horizontal scan of the transposed view, whose first column `column`
//! holds the original column names and whose remaining columns are named
//! `row 1`, `row 2`, ... after the source rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::LinkedStatement;
use crate::table::{Table, View};

pub const SEP: &str = "[SEP]";

const ORDINAL_ONE: &str = "one";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearizeMode {
    Concatenation,
    #[default]
    Template,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scan {
    #[default]
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SegmentOrder {
    /// Table text first, then the statement.
    #[default]
    #[serde(rename = "tf")]
    TableThenFact,
    #[serde(rename = "ft")]
    FactThenTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearizationSpec {
    pub mode: LinearizeMode,
    pub scan: Scan,
    pub order: SegmentOrder,
}

macro_rules! parse_enum {
    ($ty:ty, $($text:literal => $val:expr),+) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($val),)+
                    _ => Err(format!("unknown {} `{s}`", stringify!($ty))),
                }
            }
        }
    };
}

parse_enum!(LinearizeMode, "template" => LinearizeMode::Template, "concatenation" => LinearizeMode::Concatenation, "concat" => LinearizeMode::Concatenation);
parse_enum!(Scan, "horizontal" => Scan::Horizontal, "vertical" => Scan::Vertical);
parse_enum!(SegmentOrder, "tf" => SegmentOrder::TableThenFact, "ft" => SegmentOrder::FactThenTable);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearizeError {
    #[error("cannot linearize an empty view")]
    EmptyView,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizedRecord {
    /// Both segments joined by the separator token.
    pub text: String,
    pub segments: [String; 2],
    /// Concatenation mode: column name of each emitted cell, in output order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

impl fmt::Display for LinearizedRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Keep the columns touched by a cell or column-name link; all columns when
/// nothing links.
pub fn prune_columns<'t>(table: &'t Table, linked: &LinkedStatement) -> View<'t> {
    let cols = linked.linked_columns();
    if cols.is_empty() {
        return View::full(table);
    }
    View::from_indices(table, 0..table.row_count(), cols).expect("linked columns index the table")
}

/// The view as a new table: one row per view column, one column per view row.
pub fn transpose(view: &View<'_>) -> Table {
    let table = view.table();
    let mut header = vec!["column".to_string()];
    header.extend(view.rows().iter().map(|r| format!("row {}", r + 1)));
    let rows: Vec<Vec<&str>> = view
        .cols()
        .iter()
        .map(|&c| {
            let mut row = vec![table.columns[c].raw_name.as_str()];
            row.extend(view.rows().iter().map(|&r| table.cell(r, c).raw.as_str()));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Table::from_rows(&table.table_id, &table.caption, &header, &rows)
        .expect("transposed headers are distinct and rows are rectangular")
}

fn row_label(source_row: usize) -> String {
    match source_row {
        0 => format!("row {ORDINAL_ONE}'s"),
        r => format!("row {}'s", r + 1),
    }
}

fn template(view: &View<'_>) -> String {
    let table = view.table();
    let rows: Vec<String> = view
        .rows()
        .iter()
        .map(|&r| {
            let parts: Vec<String> = view
                .cols()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let name = &table.columns[c].raw_name;
                    let cell = &table.cell(r, c).raw;
                    if i == 0 {
                        format!("{} {name} is {cell}", row_label(r))
                    } else {
                        format!("the {name} is {cell}")
                    }
                })
                .collect();
            format!("{}.", parts.join("; "))
        })
        .collect();
    rows.join(" ")
}

fn concatenation(view: &View<'_>) -> (String, Vec<String>) {
    let table = view.table();
    let mut cells = Vec::new();
    let mut names = Vec::new();
    for &r in view.rows() {
        for &c in view.cols() {
            cells.push(table.cell(r, c).raw.as_str());
            names.push(table.columns[c].raw_name.clone());
        }
    }
    (cells.join(&format!(" {SEP} ")), names)
}

fn horizontal(view: &View<'_>, mode: LinearizeMode) -> (String, Vec<String>) {
    match mode {
        LinearizeMode::Template => (template(view), Vec::new()),
        LinearizeMode::Concatenation => concatenation(view),
    }
}

pub fn linearize_record(
    view: &View<'_>,
    statement: &str,
    spec: &LinearizationSpec,
) -> Result<LinearizedRecord, LinearizeError> {
    if view.is_empty() || view.col_count() == 0 {
        return Err(LinearizeError::EmptyView);
    }
    let (table_text, annotations) = match spec.scan {
        Scan::Horizontal => horizontal(view, spec.mode),
        Scan::Vertical => {
            let t = transpose(view);
            horizontal(&View::full(&t), spec.mode)
        }
    };
    let segments = match spec.order {
        SegmentOrder::TableThenFact => [table_text, statement.to_string()],
        SegmentOrder::FactThenTable => [statement.to_string(), table_text],
    };
    Ok(LinearizedRecord {
        text: format!("{} {SEP} {}", segments[0], segments[1]),
        segments,
        annotations,
    })
}

/// The table text alone (no statement segment).
pub fn linearize_table(
    view: &View<'_>,
    spec: &LinearizationSpec,
) -> Result<String, LinearizeError> {
    let rec = linearize_record(
        view,
        "",
        &LinearizationSpec {
            order: SegmentOrder::TableThenFact,
            ..*spec
        },
    )?;
    let [table_text, _] = rec.segments;
    Ok(table_text)
}

/// Premise string: table text and statement joined by the separator.
pub fn linearize(
    view: &View<'_>,
    statement: &str,
    spec: &LinearizationSpec,
) -> Result<String, LinearizeError> {
    linearize_record(view, statement, spec).map(|r| r.text)
}
