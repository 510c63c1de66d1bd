//! Expression trees, their canonical trace strings, and the static checker.
//!
//! Trace grammar:
//!
//! ```text
//! program := expr (";" expr)*
//! expr    := "T" | "num:" NUMBER | "str:" QUOTED | "col:" (BARE | QUOTED)
//!          | NAME "(" expr ("," expr)* ")"
//! ```
//!
//! The first expression of a program is its result. Any further expressions
//! are views that were computed from statement values but left unused.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::catalog::{Op, Type};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// The whole input table.
    Table,
    Num(f64),
    Str(String),
    Col(String),
    Call(Op, Vec<Expr>),
}

impl Expr {
    pub fn call(op: Op, args: Vec<Expr>) -> Expr {
        Expr::Call(op, args)
    }

    /// Number of function applications in the tree.
    pub fn applications(&self) -> usize {
        match self {
            Expr::Call(_, args) => 1 + args.iter().map(Expr::applications).sum::<usize>(),
            _ => 0,
        }
    }

    /// Visit every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Call(_, args) = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    pub fn ops(&self) -> Vec<Op> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Call(op, _) = e {
                out.push(*op);
            }
        });
        out
    }

    /// Whether the tree contains a number or string literal.
    pub fn has_literal(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Num(_) | Expr::Str(_)));
        found
    }

    pub fn trace(&self) -> String {
        self.to_string()
    }

    pub fn parse(trace: &str) -> Result<Expr, TraceError> {
        let mut p = Parser { src: trace, pos: 0 };
        let e = p.expr()?;
        p.finish()?;
        Ok(e)
    }
}

fn is_bare(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('"')
        && !name.starts_with(' ')
        && !name.ends_with(' ')
        && !name.contains([',', '(', ')', ';', '"', '\\', '\n'])
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Table => f.write_str("T"),
            Expr::Num(n) => write!(f, "num:{n}"),
            Expr::Str(s) => {
                f.write_str("str:")?;
                write_quoted(f, s)
            }
            Expr::Col(c) if is_bare(c) => write!(f, "col:{c}"),
            Expr::Col(c) => {
                f.write_str("col:")?;
                write_quoted(f, c)
            }
            Expr::Call(op, args) => {
                write!(f, "{}(", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char(')')
            }
        }
    }
}

/// A latent program: the result expression plus any unused statement-derived
/// views computed along the way, kept in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub root: Expr,
    pub residue: Vec<Expr>,
}

impl Program {
    pub fn new(root: Expr, mut residue: Vec<Expr>) -> Program {
        residue.sort_by_cached_key(Expr::trace);
        Program { root, residue }
    }

    pub fn single(root: Expr) -> Program {
        Program {
            root,
            residue: Vec::new(),
        }
    }

    pub fn trees(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.root).chain(&self.residue)
    }

    /// Function applications across all trees.
    pub fn applications(&self) -> usize {
        self.trees().map(Expr::applications).sum()
    }

    pub fn ops(&self) -> Vec<Op> {
        self.trees().flat_map(Expr::ops).collect()
    }

    pub fn trace(&self) -> String {
        self.to_string()
    }

    pub fn parse(trace: &str) -> Result<Program, TraceError> {
        let mut p = Parser { src: trace, pos: 0 };
        let root = p.expr()?;
        let mut residue = Vec::new();
        while p.eat(';') {
            residue.push(p.expr()?);
        }
        p.finish()?;
        Ok(Program::new(root, residue))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        for r in &self.residue {
            write!(f, ";{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unexpected end of trace")]
    UnexpectedEnd,
    #[error("unexpected `{found}` at byte {pos}")]
    Unexpected { pos: usize, found: char },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
}

impl<'s> Parser<'s> {
    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TraceError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => Err(TraceError::Unexpected {
                pos: self.pos,
                found,
            }),
            None => Err(TraceError::UnexpectedEnd),
        }
    }

    fn finish(&self) -> Result<(), TraceError> {
        match self.peek() {
            None => Ok(()),
            Some(found) => Err(TraceError::Unexpected {
                pos: self.pos,
                found,
            }),
        }
    }

    /// Text up to the next `,`, `)` or `;`.
    fn atom(&mut self) -> &'s str {
        let rest = self.rest();
        let end = rest.find([',', ')', ';']).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn quoted(&mut self) -> Result<String, TraceError> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            let c = self.peek().ok_or(TraceError::UnexpectedEnd)?;
            self.pos += c.len_utf8();
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let e = self.peek().ok_or(TraceError::UnexpectedEnd)?;
                    self.pos += e.len_utf8();
                    out.push(if e == 'n' { '\n' } else { e });
                }
                c => out.push(c),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, TraceError> {
        let rest = self.rest();
        if let Some(after) = rest.strip_prefix("num:") {
            self.pos += rest.len() - after.len();
            let text = self.atom();
            return text
                .parse::<f64>()
                .ok()
                .filter(|n| n.is_finite())
                .map(Expr::Num)
                .ok_or_else(|| TraceError::BadNumber(text.to_string()));
        }
        if let Some(after) = rest.strip_prefix("str:") {
            self.pos += rest.len() - after.len();
            return self.quoted().map(Expr::Str);
        }
        if let Some(after) = rest.strip_prefix("col:") {
            self.pos += rest.len() - after.len();
            if self.peek() == Some('"') {
                return self.quoted().map(Expr::Col);
            }
            return Ok(Expr::Col(self.atom().to_string()));
        }
        let name_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..name_len];
        if name.is_empty() {
            return match self.peek() {
                Some(found) => Err(TraceError::Unexpected {
                    pos: self.pos,
                    found,
                }),
                None => Err(TraceError::UnexpectedEnd),
            };
        }
        self.pos += name_len;
        if name == "T" && self.peek() != Some('(') {
            return Ok(Expr::Table);
        }
        let op = Op::from_name(name).ok_or_else(|| TraceError::UnknownFunction(name.into()))?;
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(Expr::Call(op, args))
    }
}

/// A signature violation. `tree` is 0 for the result expression and `i + 1`
/// for the i-th residue tree; `path` is the child-index path to the offending
/// argument.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error at tree {tree}, path {path:?}: expected {expected}, found {found}")]
pub struct TypeError {
    pub tree: usize,
    pub path: Vec<usize>,
    pub expected: String,
    pub found: String,
}

fn static_type(e: &Expr, path: &mut Vec<usize>) -> Result<Type, (Vec<usize>, String, String)> {
    match e {
        Expr::Table => Ok(Type::View),
        Expr::Num(_) => Ok(Type::Num),
        Expr::Str(_) => Ok(Type::Str),
        Expr::Col(_) => Ok(Type::Col),
        Expr::Call(op, args) => {
            if args.len() != op.arity() {
                return Err((
                    path.clone(),
                    format!("{} arguments", op.arity()),
                    format!("{} arguments", args.len()),
                ));
            }
            for (i, (arg, &slot)) in args.iter().zip(op.arg_types()).enumerate() {
                path.push(i);
                let t = static_type(arg, path)?;
                if !t.fits(slot) {
                    return Err((path.clone(), slot.to_string(), t.to_string()));
                }
                path.pop();
            }
            Ok(op.return_type())
        }
    }
}

/// Check one expression; returns its static type.
pub fn type_check_expr(e: &Expr) -> Result<Type, TypeError> {
    static_type(e, &mut Vec::new()).map_err(|(path, expected, found)| TypeError {
        tree: 0,
        path,
        expected,
        found,
    })
}

/// Check every tree of a program against the catalog signatures. Residue
/// trees must be views.
pub fn type_check(program: &Program) -> Result<(), TypeError> {
    for (tree, e) in program.trees().enumerate() {
        let t = static_type(e, &mut Vec::new()).map_err(|(path, expected, found)| TypeError {
            tree,
            path,
            expected,
            found,
        })?;
        if tree > 0 && t != Type::View {
            return Err(TypeError {
                tree,
                path: Vec::new(),
                expected: Type::View.to_string(),
                found: t.to_string(),
            });
        }
    }
    Ok(())
}
