use std::collections::HashSet;

use thiserror::Error;

use crate::table::{Cell, Table, View};

use super::catalog::Op;
use super::program::{Expr, Program};
use super::value::{num_eq, TypedValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("{0} applied to an empty view")]
    EmptyViewAggregate(Op),
    #[error("column `{0}` holds non-numeric cells")]
    NonNumericColumn(String),
    #[error("numeric result is not finite")]
    DivergentValue,
    #[error("hop needs a single-row view, got {0} rows")]
    HopArity(usize),
    #[error("ordinal {0} is out of range")]
    InvalidOrdinal(f64),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("{op} argument {index}: expected {expected}")]
    ArgMismatch {
        op: Op,
        index: usize,
        expected: &'static str,
    },
    #[error("column `{0}` used where a value is expected")]
    BareColumn(String),
    #[error("column `{0}` is not part of the view")]
    ColumnNotInView(String),
}

/// An evaluated argument: a value or a resolved column index.
#[derive(Debug, Clone, Copy)]
pub enum Arg<'a, 't> {
    Value(&'a TypedValue<'t>),
    Col(usize),
}

fn view_arg<'a, 't>(op: Op, args: &[Arg<'a, 't>], i: usize) -> Result<&'a View<'t>, ExecError> {
    match args.get(i) {
        Some(Arg::Value(TypedValue::View(v))) => Ok(v),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "View",
        }),
    }
}

fn col_arg(op: Op, args: &[Arg<'_, '_>], i: usize) -> Result<usize, ExecError> {
    match args.get(i) {
        Some(Arg::Col(c)) => Ok(*c),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "Col",
        }),
    }
}

fn num_arg(op: Op, args: &[Arg<'_, '_>], i: usize) -> Result<f64, ExecError> {
    match args.get(i) {
        Some(Arg::Value(TypedValue::Num(n))) => Ok(*n),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "Num",
        }),
    }
}

fn str_arg<'a>(op: Op, args: &[Arg<'a, '_>], i: usize) -> Result<&'a str, ExecError> {
    match args.get(i) {
        Some(Arg::Value(TypedValue::Str(s))) => Ok(s),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "Str",
        }),
    }
}

fn bool_arg(op: Op, args: &[Arg<'_, '_>], i: usize) -> Result<bool, ExecError> {
    match args.get(i) {
        Some(Arg::Value(TypedValue::Bool(b))) => Ok(*b),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "Bool",
        }),
    }
}

/// Comparison value for filters and quantifiers.
enum Probe<'a> {
    Num(f64),
    Str(&'a str),
}

fn val_arg<'a>(op: Op, args: &[Arg<'a, '_>], i: usize) -> Result<Probe<'a>, ExecError> {
    match args.get(i) {
        Some(Arg::Value(TypedValue::Num(n))) => Ok(Probe::Num(*n)),
        Some(Arg::Value(TypedValue::Str(s))) => Ok(Probe::Str(s)),
        _ => Err(ExecError::ArgMismatch {
            op,
            index: i,
            expected: "Num or Str",
        }),
    }
}

fn cell_matches(cell: &Cell, probe: &Probe<'_>) -> bool {
    match probe {
        Probe::Num(n) => cell.number().is_some_and(|c| num_eq(c, *n)),
        Probe::Str(s) => cell.text == *s,
    }
}

fn finite(n: f64) -> Result<TypedValue<'static>, ExecError> {
    if n.is_finite() {
        Ok(TypedValue::Num(n))
    } else {
        Err(ExecError::DivergentValue)
    }
}

fn checked_view<'t>(view: &View<'t>, col: usize) -> Result<(), ExecError> {
    if view.has_col(col) {
        Ok(())
    } else {
        Err(ExecError::ColumnNotInView(
            view.table().columns[col].name.clone(),
        ))
    }
}

/// Numeric values of `col` over the view's rows, paired with the source row.
fn numeric_column(view: &View<'_>, col: usize) -> Result<Vec<(usize, f64)>, ExecError> {
    checked_view(view, col)?;
    let table = view.table();
    view.rows()
        .iter()
        .map(|&r| {
            table
                .cell(r, col)
                .number()
                .map(|n| (r, n))
                .ok_or_else(|| ExecError::NonNumericColumn(table.columns[col].name.clone()))
        })
        .collect()
}

fn filter_rows<'t>(
    view: &View<'t>,
    col: usize,
    keep: impl Fn(&Cell) -> bool,
) -> Result<TypedValue<'t>, ExecError> {
    checked_view(view, col)?;
    let table = view.table();
    let rows = view
        .rows()
        .iter()
        .copied()
        .filter(|&r| keep(table.cell(r, col)))
        .collect();
    Ok(TypedValue::View(view.with_rows(rows)))
}

fn all_rows(
    view: &View<'_>,
    col: usize,
    pred: impl Fn(&Cell) -> bool,
) -> Result<TypedValue<'static>, ExecError> {
    checked_view(view, col)?;
    let table = view.table();
    Ok(TypedValue::Bool(
        view.rows().iter().all(|&r| pred(table.cell(r, col))),
    ))
}

/// Rows sorted by value, descending (`desc`) or ascending; ties keep source order.
fn ranked(view: &View<'_>, col: usize, desc: bool) -> Result<Vec<(usize, f64)>, ExecError> {
    let mut vals = numeric_column(view, col)?;
    if desc {
        vals.sort_by(|a, b| b.1.total_cmp(&a.1));
    } else {
        vals.sort_by(|a, b| a.1.total_cmp(&b.1));
    }
    Ok(vals)
}

fn ordinal(n: f64, len: usize) -> Result<usize, ExecError> {
    if n.fract() == 0.0 && n >= 1.0 && n <= len as f64 {
        Ok(n as usize - 1)
    } else {
        Err(ExecError::InvalidOrdinal(n))
    }
}

fn nth<'t>(op: Op, args: &[Arg<'_, 't>], desc: bool) -> Result<(View<'t>, usize, f64), ExecError> {
    let v = view_arg(op, args, 0)?;
    let c = col_arg(op, args, 1)?;
    let n = match op {
        Op::Argmax | Op::Argmin => 1.0,
        _ => num_arg(op, args, 2)?,
    };
    let vals = ranked(v, c, desc)?;
    if vals.is_empty() {
        return Err(ExecError::EmptyViewAggregate(op));
    }
    let (row, value) = vals[ordinal(n, vals.len())?];
    Ok((v.clone(), row, value))
}

/// Apply one catalog function to evaluated arguments.
pub fn apply<'t>(op: Op, args: &[Arg<'_, 't>]) -> Result<TypedValue<'t>, ExecError> {
    use TypedValue as V;
    if args.len() != op.arity() {
        return Err(ExecError::ArgMismatch {
            op,
            index: args.len(),
            expected: "matching arity",
        });
    }
    Ok(match op {
        Op::FilterEq | Op::FilterNotEq => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            let probe = val_arg(op, args, 2)?;
            let want = op == Op::FilterEq;
            filter_rows(v, c, |cell| cell_matches(cell, &probe) == want)?
        }
        Op::FilterGreater | Op::FilterLess | Op::FilterGe | Op::FilterLe => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            let n = num_arg(op, args, 2)?;
            filter_rows(v, c, |cell| {
                cell.number().is_some_and(|x| compare(op, x, n))
            })?
        }
        Op::FilterStrContains => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            let s = str_arg(op, args, 2)?;
            filter_rows(v, c, |cell| cell.text.contains(s))?
        }
        Op::Count => V::Num(view_arg(op, args, 0)?.row_count() as f64),
        Op::Sum => {
            let vals = numeric_column(view_arg(op, args, 0)?, col_arg(op, args, 1)?)?;
            finite(vals.iter().map(|x| x.1).sum())?
        }
        Op::Avg | Op::Max | Op::Min => {
            let vals = numeric_column(view_arg(op, args, 0)?, col_arg(op, args, 1)?)?;
            if vals.is_empty() {
                return Err(ExecError::EmptyViewAggregate(op));
            }
            let it = vals.iter().map(|x| x.1);
            finite(match op {
                Op::Avg => it.sum::<f64>() / vals.len() as f64,
                Op::Max => it.fold(f64::NEG_INFINITY, f64::max),
                _ => it.fold(f64::INFINITY, f64::min),
            })?
        }
        Op::CountDistinct => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            checked_view(v, c)?;
            let table = v.table();
            let distinct: HashSet<&str> = v
                .rows()
                .iter()
                .map(|&r| table.cell(r, c).text.as_str())
                .collect();
            V::Num(distinct.len() as f64)
        }
        Op::Argmax | Op::NthArgmax | Op::Argmin | Op::NthArgmin => {
            let desc = matches!(op, Op::Argmax | Op::NthArgmax);
            let (v, row, _) = nth(op, args, desc)?;
            V::View(v.with_rows(vec![row]))
        }
        Op::NthMax | Op::NthMin => {
            let (_, _, value) = nth(op, args, op == Op::NthMax)?;
            finite(value)?
        }
        Op::Hop => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            checked_view(v, c)?;
            if v.row_count() != 1 {
                return Err(ExecError::HopArity(v.row_count()));
            }
            let cell = v.table().cell(v.rows()[0], c);
            match cell.number() {
                Some(n) => V::Num(n),
                None => V::Str(cell.text.clone()),
            }
        }
        Op::FirstRow | Op::LastRow => {
            let v = view_arg(op, args, 0)?;
            let row = if op == Op::FirstRow {
                v.rows().first()
            } else {
                v.rows().last()
            };
            let row = *row.ok_or(ExecError::EmptyViewAggregate(op))?;
            V::View(v.with_rows(vec![row]))
        }
        Op::Eq | Op::NotEq | Op::Greater | Op::Less | Op::Ge | Op::Le => {
            let a = num_arg(op, args, 0)?;
            let b = num_arg(op, args, 1)?;
            V::Bool(compare(op, a, b))
        }
        Op::Diff => finite(num_arg(op, args, 0)? - num_arg(op, args, 1)?)?,
        Op::Add => finite(num_arg(op, args, 0)? + num_arg(op, args, 1)?)?,
        Op::StrEq | Op::NotStrEq => {
            let same = str_arg(op, args, 0)? == str_arg(op, args, 1)?;
            V::Bool(same == (op == Op::StrEq))
        }
        Op::And => V::Bool(bool_arg(op, args, 0)? && bool_arg(op, args, 1)?),
        Op::Or => V::Bool(bool_arg(op, args, 0)? || bool_arg(op, args, 1)?),
        Op::Not => V::Bool(!bool_arg(op, args, 0)?),
        Op::AllEq | Op::AllNotEq => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            let probe = val_arg(op, args, 2)?;
            let want = op == Op::AllEq;
            all_rows(v, c, |cell| cell_matches(cell, &probe) == want)?
        }
        Op::AllGreater | Op::AllLess | Op::AllGe | Op::AllLe => {
            let v = view_arg(op, args, 0)?;
            let c = col_arg(op, args, 1)?;
            let n = num_arg(op, args, 2)?;
            all_rows(v, c, |cell| {
                cell.number().is_some_and(|x| compare(op, x, n))
            })?
        }
        Op::Only => V::Bool(view_arg(op, args, 0)?.row_count() == 1),
        Op::IsNotEmpty => V::Bool(!view_arg(op, args, 0)?.is_empty()),
    })
}

/// Numeric comparison shared by comparisons, filters and quantifiers.
fn compare(op: Op, a: f64, b: f64) -> bool {
    match op {
        Op::Eq => num_eq(a, b),
        Op::NotEq => !num_eq(a, b),
        Op::Greater | Op::FilterGreater | Op::AllGreater => a > b && !num_eq(a, b),
        Op::Less | Op::FilterLess | Op::AllLess => a < b && !num_eq(a, b),
        Op::Ge | Op::FilterGe | Op::AllGe => a > b || num_eq(a, b),
        Op::Le | Op::FilterLe | Op::AllLe => a < b || num_eq(a, b),
        _ => unreachable!("{op} is not a comparison"),
    }
}

/// Evaluate an expression bottom-up against `table`.
pub fn execute_expr<'t>(expr: &Expr, table: &'t Table) -> Result<TypedValue<'t>, ExecError> {
    match expr {
        Expr::Table => Ok(TypedValue::View(View::full(table))),
        Expr::Num(n) => finite(*n),
        Expr::Str(s) => Ok(TypedValue::Str(s.clone())),
        Expr::Col(name) => Err(ExecError::BareColumn(name.clone())),
        Expr::Call(op, children) => {
            let mut values = Vec::with_capacity(children.len());
            let mut cols = Vec::with_capacity(children.len());
            for child in children {
                match child {
                    Expr::Col(name) => {
                        let c = table
                            .column_index(name)
                            .ok_or_else(|| ExecError::UnknownColumn(name.clone()))?;
                        cols.push(Some(c));
                        values.push(None);
                    }
                    other => {
                        cols.push(None);
                        values.push(Some(execute_expr(other, table)?));
                    }
                }
            }
            let args: Vec<Arg<'_, 't>> = values
                .iter()
                .zip(&cols)
                .map(|(v, c)| match (v, c) {
                    (Some(v), _) => Arg::Value(v),
                    (None, Some(c)) => Arg::Col(*c),
                    (None, None) => unreachable!(),
                })
                .collect();
            apply(*op, &args)
        }
    }
}

/// Execute a program: residue trees are evaluated (so their errors surface)
/// and the root's value is returned.
pub fn execute<'t>(program: &Program, table: &'t Table) -> Result<TypedValue<'t>, ExecError> {
    for r in &program.residue {
        execute_expr(r, table)?;
    }
    execute_expr(&program.root, table)
}
