//! The table DSL: a typed function catalog and its interpreter.
//!
//! Values are numbers, strings, booleans and views. Column arguments are names
//! resolved against the table schema. Programs are expression trees with a
//! canonical trace string; see [`program`] for the grammar.

pub mod catalog;
pub mod interp;
pub mod program;
pub mod value;

pub use catalog::{catalog, lookup, Family, FunctionDef, Op, Type, CATALOG_VERSION};
pub use interp::{apply, execute, execute_expr, Arg, ExecError};
pub use program::{type_check, type_check_expr, Expr, Program, TraceError, TypeError};
pub use value::{num_eq, TypedValue, NUM_EQ_TOLERANCE};
