use std::fmt;

use crate::table::View;

use super::catalog::Type;

/// Relative tolerance for numeric equality.
pub const NUM_EQ_TOLERANCE: f64 = 1e-6;

/// Equality with relative tolerance; magnitudes below one compare absolutely.
pub fn num_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= NUM_EQ_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Run-time value of a DSL expression.
#[derive(Clone, PartialEq)]
pub enum TypedValue<'t> {
    Num(f64),
    Str(String),
    Bool(bool),
    View(View<'t>),
}

impl<'t> TypedValue<'t> {
    pub fn type_of(&self) -> Type {
        match self {
            TypedValue::Num(_) => Type::Num,
            TypedValue::Str(_) => Type::Str,
            TypedValue::Bool(_) => Type::Bool,
            TypedValue::View(_) => Type::View,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            TypedValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            TypedValue::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_view(&self) -> Option<&View<'t>> {
        match self {
            TypedValue::View(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Debug for TypedValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Num(n) => write!(f, "Num({n})"),
            TypedValue::Str(s) => write!(f, "Str({s:?})"),
            TypedValue::Bool(b) => write!(f, "Bool({b})"),
            TypedValue::View(v) => write!(f, "{v:?}"),
        }
    }
}

impl fmt::Display for TypedValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Num(n) => write!(f, "{n}"),
            TypedValue::Str(s) => write!(f, "{s:?}"),
            TypedValue::Bool(b) => write!(f, "{b}"),
            TypedValue::View(v) => {
                let table = v.table();
                let cols: Vec<&str> = v.column_names().collect();
                writeln!(f, "view {} rows x {} cols", v.row_count(), v.col_count())?;
                write!(f, "{}", cols.join(" | "))?;
                for &r in v.rows() {
                    let cells: Vec<&str> = v
                        .cols()
                        .iter()
                        .map(|&c| table.cell(r, c).raw.as_str())
                        .collect();
                    write!(f, "\n{}", cells.join(" | "))?;
                }
                Ok(())
            }
        }
    }
}
