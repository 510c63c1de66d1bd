//! Typed in-memory tables, cell type inference and table-file ingestion.
//!
//! Tables are immutable once parsed. Sub-tables are expressed as [`View`]s,
//! which hold row/column index lists into a borrowed [`Table`] and never copy
//! cell data.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Delimiter used by the released table files.
pub const DEFAULT_DELIMITER: char = '#';

/// Size bounds enforced when strict mode is requested.
pub const STRICT_MAX_ROWS: usize = 50;
pub const STRICT_MAX_COLS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table has no header or no data rows")]
    EmptyTable,
    #[error("line {0}: row does not have the header's number of cells")]
    RaggedRow(usize),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("table is {rows}x{cols}, strict mode allows at most {max_rows}x{max_cols}")]
    DimensionsExceeded {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("row {row}, column {col}: index out of bounds")]
    IndexOutOfBounds { row: usize, col: usize },
    #[error("cell `{0}` contains the delimiter or a line break and cannot be serialized")]
    Unserializable(String),
}

/// Parsed content of a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CellValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub raw: String,
    pub parsed: CellValue,
    /// Normalized text of `raw`; what string comparisons run against.
    pub text: String,
}

impl Cell {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let text = normalize(&raw);
        let parsed = infer_cell(&raw);
        Cell { raw, parsed, text }
    }

    pub fn number(&self) -> Option<f64> {
        match self.parsed {
            CellValue::Number(n) => Some(n),
            CellValue::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnMeta {
    /// Normalized column name; unique within a table.
    pub name: String,
    pub raw_name: String,
    /// True when every cell in the column parsed as a number.
    pub numeric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub table_id: String,
    pub caption: String,
    pub columns: Vec<ColumnMeta>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub delimiter: char,
    pub strict_dims: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delimiter: DEFAULT_DELIMITER,
            strict_dims: false,
        }
    }
}

/// Lowercase, trim and collapse internal whitespace.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

const MONTHS: [&str; 24] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "jan",
    "feb",
    "mar",
    "apr",
    "jun",
    "jul",
    "aug",
    "sep",
    "sept",
    "oct",
    "nov",
    "dec",
];

/// Classify a raw cell string as a number or normalized text.
///
/// Numbers are an optional sign, digits (optionally grouped by thousands
/// commas), and an optional decimal part. The numeric token may be followed by
/// `%` or by whitespace and a unit or annotation, which is dropped. Anything
/// that looks like a date or a score (`7-5`, `3 march 2001`, `1/2`) stays text.
pub fn infer_cell(raw: &str) -> CellValue {
    let text = normalize(raw);
    match leading_number(&text) {
        Some(n) => CellValue::Number(n),
        None => CellValue::Text(text),
    }
}

fn leading_number(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let first_group = i - int_start;
    if first_group == 0 {
        return None;
    }
    while bytes.get(i) == Some(&b',')
        && bytes
            .get(i + 1..i + 4)
            .is_some_and(|g| g.iter().all(u8::is_ascii_digit))
        && !bytes.get(i + 4).is_some_and(u8::is_ascii_digit)
    {
        if first_group > 3 {
            return None;
        }
        i += 4;
    }
    if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    let number: String = s[..i].chars().filter(|&c| c != ',').collect();
    let rest = &s[i..];
    let accepted = if rest.is_empty() || rest == "%" {
        true
    } else if let Some(tail) = rest.strip_prefix(' ') {
        let first = tail.split(' ').next().unwrap_or("");
        let first_word: String = first.chars().take_while(|c| c.is_alphabetic()).collect();
        !tail.starts_with(|c: char| c.is_ascii_digit()) && !MONTHS.contains(&first_word.as_str())
    } else {
        false
    };
    if !accepted {
        return None;
    }
    number.parse::<f64>().ok().filter(|n| n.is_finite())
}

impl Table {
    /// Build a table from column names and raw cell strings.
    pub fn from_rows(
        table_id: impl Into<String>,
        caption: impl Into<String>,
        header: &[&str],
        rows: &[Vec<&str>],
    ) -> Result<Table, TableError> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect();
        Self::build(table_id.into(), caption.into(), header, rows, |i| i + 2)
    }

    fn build(
        table_id: String,
        caption: String,
        header: Vec<String>,
        raw_rows: Vec<Vec<String>>,
        line_of: impl Fn(usize) -> usize,
    ) -> Result<Table, TableError> {
        if header.is_empty() || raw_rows.is_empty() {
            return Err(TableError::EmptyTable);
        }
        let mut columns: Vec<ColumnMeta> = Vec::with_capacity(header.len());
        for raw_name in header {
            let name = normalize(&raw_name);
            if columns.iter().any(|c| c.name == name) {
                return Err(TableError::DuplicateColumn(name));
            }
            columns.push(ColumnMeta {
                name,
                raw_name,
                numeric: true,
            });
        }
        let mut rows = Vec::with_capacity(raw_rows.len());
        for (i, raw) in raw_rows.into_iter().enumerate() {
            if raw.len() != columns.len() {
                return Err(TableError::RaggedRow(line_of(i)));
            }
            rows.push(raw.into_iter().map(Cell::new).collect::<Vec<_>>());
        }
        for (c, meta) in columns.iter_mut().enumerate() {
            meta.numeric = rows.iter().all(|r: &Vec<Cell>| r[c].number().is_some());
        }
        Ok(Table {
            table_id,
            caption,
            columns,
            rows,
        })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.columns.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let name = normalize(name);
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn with_caption(mut self, caption: impl Into<String>) -> Self {
        self.caption = caption.into();
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.table_id = id.into();
        self
    }

    /// Write the table back out in the delimited format, using raw cell text.
    pub fn serialize(&self, delimiter: char) -> Result<String, TableError> {
        let mut out = String::new();
        let mut push_line = |fields: &mut dyn Iterator<Item = &str>| -> Result<(), TableError> {
            let mut first = true;
            for f in fields {
                if f.contains(delimiter) || f.contains('\n') || f.contains('\r') {
                    return Err(TableError::Unserializable(f.to_string()));
                }
                if !first {
                    out.push(delimiter);
                }
                out.push_str(f);
                first = false;
            }
            out.push('\n');
            Ok(())
        };
        push_line(&mut self.columns.iter().map(|c| c.raw_name.as_str()))?;
        for row in &self.rows {
            push_line(&mut row.iter().map(|c| c.raw.as_str()))?;
        }
        Ok(out)
    }

    pub fn full_view(&self) -> View<'_> {
        View::full(self)
    }
}

/// Parse a delimited table file. The first non-empty line holds column names.
/// Empty lines are skipped; line numbers in errors are 1-based and count them.
pub fn parse_table(table_id: &str, bytes: &[u8], opts: ParseOptions) -> Result<Table, TableError> {
    let text = std::str::from_utf8(bytes).map_err(|_| TableError::InvalidUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or(TableError::EmptyTable)?;
    let header: Vec<String> = header.split(opts.delimiter).map(str::to_string).collect();
    let mut line_numbers = Vec::new();
    let mut rows = Vec::new();
    for (no, line) in lines {
        line_numbers.push(no);
        rows.push(line.split(opts.delimiter).map(str::to_string).collect());
    }
    let table = Table::build(table_id.to_string(), String::new(), header, rows, |i| {
        line_numbers[i]
    })?;
    if opts.strict_dims
        && (table.row_count() > STRICT_MAX_ROWS || table.col_count() > STRICT_MAX_COLS)
    {
        return Err(TableError::DimensionsExceeded {
            rows: table.row_count(),
            cols: table.col_count(),
            max_rows: STRICT_MAX_ROWS,
            max_cols: STRICT_MAX_COLS,
        });
    }
    Ok(table)
}

/// A sub-table: ordered row and column indices into a source table.
#[derive(Clone)]
pub struct View<'t> {
    table: &'t Table,
    rows: Arc<[usize]>,
    cols: Arc<[usize]>,
}

impl<'t> View<'t> {
    pub fn full(table: &'t Table) -> Self {
        View {
            table,
            rows: (0..table.row_count()).collect(),
            cols: (0..table.col_count()).collect(),
        }
    }

    /// Build a view from source-table indices. Indices are sorted and deduplicated.
    pub fn from_indices(
        table: &'t Table,
        rows: impl IntoIterator<Item = usize>,
        cols: impl IntoIterator<Item = usize>,
    ) -> Result<Self, TableError> {
        let rows = sorted_unique(rows);
        let cols = sorted_unique(cols);
        if let Some(&r) = rows.last().filter(|&&r| r >= table.row_count()) {
            return Err(TableError::IndexOutOfBounds { row: r, col: 0 });
        }
        if let Some(&c) = cols.last().filter(|&&c| c >= table.col_count()) {
            return Err(TableError::IndexOutOfBounds { row: 0, col: c });
        }
        Ok(View {
            table,
            rows: rows.into(),
            cols: cols.into(),
        })
    }

    pub fn table(&self) -> &'t Table {
        self.table
    }

    /// Source-table row indices, in source order.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_col(&self, col: usize) -> bool {
        self.cols.binary_search(&col).is_ok()
    }

    /// Project onto positions *within this view*. Positions are sorted and
    /// deduplicated, so the result keeps source order.
    pub fn project(&self, rows: &[usize], cols: &[usize]) -> Result<View<'t>, TableError> {
        let rows = sorted_unique(rows.iter().copied());
        let cols = sorted_unique(cols.iter().copied());
        if let Some(&r) = rows.last().filter(|&&r| r >= self.rows.len()) {
            return Err(TableError::IndexOutOfBounds { row: r, col: 0 });
        }
        if let Some(&c) = cols.last().filter(|&&c| c >= self.cols.len()) {
            return Err(TableError::IndexOutOfBounds { row: 0, col: c });
        }
        Ok(View {
            table: self.table,
            rows: rows.iter().map(|&r| self.rows[r]).collect(),
            cols: cols.iter().map(|&c| self.cols[c]).collect(),
        })
    }

    /// Keep the given source rows (already a subsequence of `self.rows`).
    pub(crate) fn with_rows(&self, rows: Vec<usize>) -> View<'t> {
        View {
            table: self.table,
            rows: rows.into(),
            cols: self.cols.clone(),
        }
    }

    pub fn cell(&self, row_pos: usize, col_pos: usize) -> &'t Cell {
        self.table.cell(self.rows[row_pos], self.cols[col_pos])
    }

    pub fn column_names(&self) -> impl Iterator<Item = &'t str> + '_ {
        self.cols
            .iter()
            .map(|&c| self.table.columns[c].name.as_str())
    }
}

fn sorted_unique(it: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl PartialEq for View<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.table, other.table) && self.rows == other.rows && self.cols == other.cols
    }
}

impl Eq for View<'_> {}

impl fmt::Debug for View<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("View")
            .field("table", &self.table.table_id)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}
