//! Naive reference semantics for every catalog function, written directly
//! from the function contracts with loops over rows.

use tabverify::dsl::Op;
use tabverify::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub enum RVal {
    Num(f64),
    Str(String),
    Bool(bool),
    /// Source row indices, ascending. Views keep every column.
    Rows(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RArg {
    V(RVal),
    Col(usize),
}

pub fn close(a: f64, b: f64) -> bool {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= 1e-6 * scale
}

fn num(t: &Table, r: usize, c: usize) -> Option<f64> {
    t.cell(r, c).number()
}

fn text(t: &Table, r: usize, c: usize) -> &str {
    &t.cell(r, c).text
}

fn cmp_holds(kind: &str, a: f64, b: f64) -> bool {
    match kind {
        "eq" => close(a, b),
        "ne" => !close(a, b),
        "gt" => a > b && !close(a, b),
        "lt" => a < b && !close(a, b),
        "ge" => a > b || close(a, b),
        "le" => a < b || close(a, b),
        _ => unreachable!(),
    }
}

fn cmp_kind(op: Op) -> &'static str {
    use Op::*;
    match op {
        Eq => "eq",
        NotEq => "ne",
        Greater | FilterGreater | AllGreater => "gt",
        Less | FilterLess | AllLess => "lt",
        Ge | FilterGe | AllGe => "ge",
        Le | FilterLe | AllLe => "le",
        _ => unreachable!(),
    }
}

/// Value equality of a cell against a number or string probe.
fn cell_is(t: &Table, r: usize, c: usize, probe: &RVal) -> bool {
    match probe {
        RVal::Num(n) => matches!(num(t, r, c), Some(x) if close(x, *n)),
        RVal::Str(s) => text(t, r, c) == s,
        _ => false,
    }
}

fn all_numbers(t: &Table, rows: &[usize], c: usize) -> Result<Vec<f64>, ()> {
    let mut out = Vec::new();
    for &r in rows {
        match num(t, r, c) {
            Some(x) => out.push(x),
            None => return Err(()),
        }
    }
    Ok(out)
}

/// Position of the row with rank `n` (1-based) when sorted by value,
/// largest first if `desc`; equal values keep source order.
fn nth_rank(vals: &[f64], n: f64, desc: bool) -> Result<usize, ()> {
    if vals.is_empty() || n.fract() != 0.0 || n < 1.0 || n > vals.len() as f64 {
        return Err(());
    }
    let want = n as usize - 1;
    for (i, &v) in vals.iter().enumerate() {
        let mut rank = 0;
        for (j, &w) in vals.iter().enumerate() {
            let before = if desc { w > v } else { w < v };
            if before || (w == v && j < i) {
                rank += 1;
            }
        }
        if rank == want {
            return Ok(i);
        }
    }
    Err(())
}

fn finite(x: f64) -> Result<RVal, ()> {
    if x.is_finite() {
        Ok(RVal::Num(x))
    } else {
        Err(())
    }
}

/// Reference application. Any failure is `Err(())`.
pub fn apply(t: &Table, op: Op, args: &[RArg]) -> Result<RVal, ()> {
    use Op::*;
    use RArg::{Col, V};
    use RVal::*;
    let rows = |i: usize| match args.get(i) {
        Some(V(Rows(r))) => Ok(r.clone()),
        _ => Err(()),
    };
    let col = |i: usize| match args.get(i) {
        Some(Col(c)) if *c < t.col_count() => Ok(*c),
        _ => Err(()),
    };
    let number = |i: usize| match args.get(i) {
        Some(V(Num(n))) => Ok(*n),
        _ => Err(()),
    };
    let string = |i: usize| match args.get(i) {
        Some(V(Str(s))) => Ok(s.clone()),
        _ => Err(()),
    };
    let boolean = |i: usize| match args.get(i) {
        Some(V(Bool(b))) => Ok(*b),
        _ => Err(()),
    };
    let probe = |i: usize| match args.get(i) {
        Some(V(v @ (Num(_) | Str(_)))) => Ok(v.clone()),
        _ => Err(()),
    };
    if args.len() != op.arg_types().len() {
        return Err(());
    }
    match op {
        FilterEq | FilterNotEq => {
            let (rs, c, p) = (rows(0)?, col(1)?, probe(2)?);
            let keep_equal = op == FilterEq;
            let mut out = Vec::new();
            for r in rs {
                if cell_is(t, r, c, &p) == keep_equal {
                    out.push(r);
                }
            }
            Ok(Rows(out))
        }
        FilterGreater | FilterLess | FilterGe | FilterLe => {
            let (rs, c, n) = (rows(0)?, col(1)?, number(2)?);
            let mut out = Vec::new();
            for r in rs {
                if let Some(x) = num(t, r, c) {
                    if cmp_holds(cmp_kind(op), x, n) {
                        out.push(r);
                    }
                }
            }
            Ok(Rows(out))
        }
        FilterStrContains => {
            let (rs, c, s) = (rows(0)?, col(1)?, string(2)?);
            Ok(Rows(
                rs.into_iter()
                    .filter(|&r| text(t, r, c).contains(s.as_str()))
                    .collect(),
            ))
        }
        Count => Ok(Num(rows(0)?.len() as f64)),
        Sum => {
            let vals = all_numbers(t, &rows(0)?, col(1)?)?;
            let mut s = 0.0;
            for v in vals {
                s += v;
            }
            finite(s)
        }
        Avg | Max | Min => {
            let vals = all_numbers(t, &rows(0)?, col(1)?)?;
            if vals.is_empty() {
                return Err(());
            }
            let mut acc = vals[0];
            let mut s = 0.0;
            for &v in &vals {
                s += v;
                if (op == Max && v > acc) || (op == Min && v < acc) {
                    acc = v;
                }
            }
            finite(if op == Avg {
                s / vals.len() as f64
            } else {
                acc
            })
        }
        CountDistinct => {
            let (rs, c) = (rows(0)?, col(1)?);
            let mut seen: Vec<&str> = Vec::new();
            for r in rs {
                let s = text(t, r, c);
                if !seen.contains(&s) {
                    seen.push(s);
                }
            }
            Ok(Num(seen.len() as f64))
        }
        Argmax | Argmin | NthArgmax | NthArgmin | NthMax | NthMin => {
            let (rs, c) = (rows(0)?, col(1)?);
            let n = if matches!(op, Argmax | Argmin) {
                1.0
            } else {
                number(2)?
            };
            let vals = all_numbers(t, &rs, c)?;
            let desc = matches!(op, Argmax | NthArgmax | NthMax);
            let i = nth_rank(&vals, n, desc)?;
            if matches!(op, NthMax | NthMin) {
                finite(vals[i])
            } else {
                Ok(Rows(vec![rs[i]]))
            }
        }
        Hop => {
            let (rs, c) = (rows(0)?, col(1)?);
            if rs.len() != 1 {
                return Err(());
            }
            Ok(match num(t, rs[0], c) {
                Some(x) => Num(x),
                None => Str(text(t, rs[0], c).to_string()),
            })
        }
        FirstRow => rows(0)?.first().map(|&r| Rows(vec![r])).ok_or(()),
        LastRow => rows(0)?.last().map(|&r| Rows(vec![r])).ok_or(()),
        Eq | NotEq | Greater | Less | Ge | Le => {
            Ok(Bool(cmp_holds(cmp_kind(op), number(0)?, number(1)?)))
        }
        Diff => finite(number(0)? - number(1)?),
        Add => finite(number(0)? + number(1)?),
        StrEq => Ok(Bool(string(0)? == string(1)?)),
        NotStrEq => Ok(Bool(string(0)? != string(1)?)),
        And => Ok(Bool(boolean(0)? && boolean(1)?)),
        Or => Ok(Bool(boolean(0)? || boolean(1)?)),
        Not => Ok(Bool(!boolean(0)?)),
        AllEq | AllNotEq => {
            let (rs, c, p) = (rows(0)?, col(1)?, probe(2)?);
            let want = op == AllEq;
            Ok(Bool(rs.iter().all(|&r| cell_is(t, r, c, &p) == want)))
        }
        AllGreater | AllLess | AllGe | AllLe => {
            let (rs, c, n) = (rows(0)?, col(1)?, number(2)?);
            let mut ok = true;
            for r in rs {
                match num(t, r, c) {
                    Some(x) if cmp_holds(cmp_kind(op), x, n) => {}
                    _ => ok = false,
                }
            }
            Ok(Bool(ok))
        }
        Only => Ok(Bool(rows(0)?.len() == 1)),
        IsNotEmpty => Ok(Bool(!rows(0)?.is_empty())),
    }
}
