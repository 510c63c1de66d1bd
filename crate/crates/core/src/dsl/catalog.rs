use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use serde::Serialize;

use crate::search::triggers::TriggerLexicon;

/// Version of the function catalog. Bump when a signature or semantics change.
pub const CATALOG_VERSION: u32 = 1;

/// Static type of an argument slot or a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Type {
    Num,
    Str,
    Bool,
    View,
    /// Column reference; drawn from the table schema, never cached.
    Col,
    /// Num or Str, resolved at run time.
    Val,
}

impl Type {
    /// Whether a value of static type `self` may fill a slot of type `slot`.
    /// `Val` results are accepted statically by `Num` and `Str` slots; the
    /// interpreter checks the actual variant.
    pub fn fits(self, slot: Type) -> bool {
        self == slot
            || matches!(
                (self, slot),
                (Type::Num, Type::Val)
                    | (Type::Str, Type::Val)
                    | (Type::Val, Type::Num | Type::Str)
            )
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Type::Num => "Num",
            Type::Str => "Str",
            Type::Bool => "Bool",
            Type::View => "View",
            Type::Col => "Col",
            Type::Val => "Val",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Filter,
    Aggregate,
    Superlative,
    RowAccess,
    NumCompare,
    Arithmetic,
    StrCompare,
    Logical,
    Quantifier,
    Cardinality,
}

macro_rules! ops {
    ($( $variant:ident => $name:literal, $family:ident, [$($arg:ident),*] -> $ret:ident; )*) => {
        /// Every function in the DSL.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum Op { $($variant),* }

        impl Op {
            pub const ALL: &'static [Op] = &[$(Op::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Op::$variant => $name),* }
            }

            pub fn family(self) -> Family {
                match self { $(Op::$variant => Family::$family),* }
            }

            pub fn arg_types(self) -> &'static [Type] {
                match self { $(Op::$variant => &[$(Type::$arg),*]),* }
            }

            pub fn return_type(self) -> Type {
                match self { $(Op::$variant => Type::$ret),* }
            }
        }
    };
}

ops! {
    FilterEq => "filter_eq", Filter, [View, Col, Val] -> View;
    FilterNotEq => "filter_not_eq", Filter, [View, Col, Val] -> View;
    FilterGreater => "filter_greater", Filter, [View, Col, Num] -> View;
    FilterLess => "filter_less", Filter, [View, Col, Num] -> View;
    FilterGe => "filter_ge", Filter, [View, Col, Num] -> View;
    FilterLe => "filter_le", Filter, [View, Col, Num] -> View;
    FilterStrContains => "filter_str_contains", Filter, [View, Col, Str] -> View;

    Count => "count", Aggregate, [View] -> Num;
    Sum => "sum", Aggregate, [View, Col] -> Num;
    Avg => "avg", Aggregate, [View, Col] -> Num;
    Max => "max", Aggregate, [View, Col] -> Num;
    Min => "min", Aggregate, [View, Col] -> Num;
    CountDistinct => "count_distinct", Aggregate, [View, Col] -> Num;

    Argmax => "argmax", Superlative, [View, Col] -> View;
    Argmin => "argmin", Superlative, [View, Col] -> View;
    NthArgmax => "nth_argmax", Superlative, [View, Col, Num] -> View;
    NthArgmin => "nth_argmin", Superlative, [View, Col, Num] -> View;
    NthMax => "nth_max", Superlative, [View, Col, Num] -> Num;
    NthMin => "nth_min", Superlative, [View, Col, Num] -> Num;

    Hop => "hop", RowAccess, [View, Col] -> Val;
    FirstRow => "first_row", RowAccess, [View] -> View;
    LastRow => "last_row", RowAccess, [View] -> View;

    Eq => "eq", NumCompare, [Num, Num] -> Bool;
    NotEq => "not_eq", NumCompare, [Num, Num] -> Bool;
    Greater => "greater", NumCompare, [Num, Num] -> Bool;
    Less => "less", NumCompare, [Num, Num] -> Bool;
    Ge => "ge", NumCompare, [Num, Num] -> Bool;
    Le => "le", NumCompare, [Num, Num] -> Bool;
    Diff => "diff", Arithmetic, [Num, Num] -> Num;
    Add => "add", Arithmetic, [Num, Num] -> Num;

    StrEq => "str_eq", StrCompare, [Str, Str] -> Bool;
    NotStrEq => "not_str_eq", StrCompare, [Str, Str] -> Bool;

    And => "and", Logical, [Bool, Bool] -> Bool;
    Or => "or", Logical, [Bool, Bool] -> Bool;
    Not => "not", Logical, [Bool] -> Bool;

    AllEq => "all_eq", Quantifier, [View, Col, Val] -> Bool;
    AllNotEq => "all_not_eq", Quantifier, [View, Col, Val] -> Bool;
    AllGreater => "all_greater", Quantifier, [View, Col, Num] -> Bool;
    AllLess => "all_less", Quantifier, [View, Col, Num] -> Bool;
    AllGe => "all_ge", Quantifier, [View, Col, Num] -> Bool;
    AllLe => "all_le", Quantifier, [View, Col, Num] -> Bool;

    Only => "only", Cardinality, [View] -> Bool;
    IsNotEmpty => "is_not_empty", Cardinality, [View] -> Bool;
}

impl Op {
    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.name() == name)
    }

    pub fn arity(self) -> usize {
        self.arg_types().len()
    }

    /// Number of cached (Num/Str/Bool/Val) arguments the function consumes.
    pub fn cached_args(self) -> usize {
        self.arg_types()
            .iter()
            .filter(|t| matches!(t, Type::Num | Type::Str | Type::Bool | Type::Val))
            .count()
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A catalog entry: signature plus the trigger words that admit it into a
/// pruned search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionDef {
    pub op: Op,
    pub name: &'static str,
    pub arg_types: Vec<Type>,
    pub return_type: Type,
    pub triggers: BTreeSet<String>,
}

static CATALOG: LazyLock<Vec<FunctionDef>> = LazyLock::new(|| {
    let lexicon = TriggerLexicon::builtin();
    let mut triggers: BTreeMap<Op, BTreeSet<String>> = BTreeMap::new();
    for (word, ops) in lexicon.entries() {
        for op in ops {
            triggers.entry(*op).or_default().insert(word.clone());
        }
    }
    Op::ALL
        .iter()
        .map(|&op| FunctionDef {
            op,
            name: op.name(),
            arg_types: op.arg_types().to_vec(),
            return_type: op.return_type(),
            triggers: triggers.remove(&op).unwrap_or_default(),
        })
        .collect()
});

/// The full function catalog, in a stable order.
pub fn catalog() -> &'static [FunctionDef] {
    &CATALOG
}

pub fn lookup(name: &str) -> Option<&'static FunctionDef> {
    catalog().iter().find(|f| f.name == name)
}
