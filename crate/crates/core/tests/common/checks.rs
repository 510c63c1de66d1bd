//! Property checks shared by the focused integration tests and the
//! acceptance suite. Each returns how many cases ran and what failed.

use rand::seq::SliceRandom;
use rand::Rng;

use tabverify::dsl::{
    apply, execute, execute_expr, type_check, Arg, Expr, Op, Program, Type, TypedValue,
};
use tabverify::linker::link;
use tabverify::search::{search, search_with_seeds, CandidateSet, SearchConfig, Seeds};
use tabverify::table::{Table, View};

use super::gen::{self, TestRng};
use super::linker_bf;
use super::oracle;
use super::reference::{self, close, RArg, RVal};

#[derive(Debug, Default)]
pub struct Outcome {
    pub cases: usize,
    /// Cases where both sides produced a value rather than an error.
    pub values: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn fail(&mut self, msg: String) {
        if self.failures.len() < 20 {
            self.failures.push(msg);
        } else {
            self.failures.push(String::new());
            self.failures.truncate(20);
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.ok() {
            format!("{} cases", self.cases)
        } else {
            format!("{} cases, failures: {:?}", self.cases, self.failures)
        }
    }
}

pub fn candidate_pairs(set: &CandidateSet) -> std::collections::BTreeSet<(String, bool)> {
    set.items
        .iter()
        .map(|c| (c.trace.clone(), c.result))
        .collect()
}

/// Search output against the exhaustive enumerator on small random tables.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut out = Outcome::default();
    for case in 0..cases {
        let table = gen::small_table(&mut rng, 3, 3);
        let (nums, strs) = gen::seeds(&mut rng, 2);
        let max_step = 1 + case % 3;
        let expected = oracle::enumerate(&table, &nums, &strs, max_step);
        let seeds = Seeds { nums, strs };
        let got = candidate_pairs(&search_with_seeds(
            &table,
            &seeds,
            Op::ALL,
            &SearchConfig::exhaustive(max_step),
        ));
        out.cases += 1;
        if got != expected {
            let missing: Vec<_> = expected.difference(&got).take(3).collect();
            let extra: Vec<_> = got.difference(&expected).take(3).collect();
            out.fail(format!("case {case}: missing {missing:?} extra {extra:?}"));
        }
    }
    out
}

fn to_rval(v: &TypedValue<'_>) -> RVal {
    match v {
        TypedValue::Num(n) => RVal::Num(*n),
        TypedValue::Str(s) => RVal::Str(s.clone()),
        TypedValue::Bool(b) => RVal::Bool(*b),
        TypedValue::View(v) => RVal::Rows(v.rows().to_vec()),
    }
}

fn same(a: &RVal, b: &RVal) -> bool {
    match (a, b) {
        (RVal::Num(x), RVal::Num(y)) => {
            x == y || (close(*x, *y) && (x - y).abs() < 1e-9 * x.abs().max(1.0))
        }
        _ => a == b,
    }
}

fn random_arg(rng: &mut TestRng, table: &Table, slot: Type, nums: &[f64], strs: &[String]) -> RArg {
    let slot = if rng.gen_bool(0.03) {
        *[Type::Num, Type::Str, Type::Bool, Type::View]
            .choose(rng)
            .unwrap()
    } else {
        slot
    };
    match slot {
        Type::View => {
            let rows: Vec<usize> = (0..table.row_count())
                .filter(|_| rng.gen_bool(0.6))
                .collect();
            RArg::V(RVal::Rows(rows))
        }
        Type::Col => RArg::Col(rng.gen_range(0..table.col_count())),
        Type::Num => RArg::V(RVal::Num(*nums.choose(rng).unwrap())),
        Type::Str => RArg::V(RVal::Str(strs.choose(rng).unwrap().clone())),
        Type::Val => {
            if rng.gen_bool(0.5) {
                RArg::V(RVal::Num(*nums.choose(rng).unwrap()))
            } else {
                RArg::V(RVal::Str(strs.choose(rng).unwrap().clone()))
            }
        }
        Type::Bool => RArg::V(RVal::Bool(rng.gen_bool(0.5))),
    }
}

/// Every catalog function against the reference semantics.
pub fn interpreter_conformance(tables: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut out = Outcome::default();
    for _ in 0..tables {
        let table = gen::table(&mut rng);
        let mut nums: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0, -1.0, 0.5, 1e308, 2.0000001];
        let mut strs: Vec<String> = vec!["a".into(), "zzz".into(), String::new(), "e".into()];
        for r in 0..table.row_count() {
            for c in 0..table.col_count() {
                let cell = table.cell(r, c);
                nums.extend(cell.number());
                strs.push(cell.text.clone());
            }
        }
        for &op in Op::ALL {
            for _ in 0..4 {
                let rargs: Vec<RArg> = op
                    .arg_types()
                    .iter()
                    .map(|&t| random_arg(&mut rng, &table, t, &nums, &strs))
                    .collect();
                let values: Vec<Option<TypedValue<'_>>> = rargs
                    .iter()
                    .map(|a| match a {
                        RArg::Col(_) => None,
                        RArg::V(RVal::Num(n)) => Some(TypedValue::Num(*n)),
                        RArg::V(RVal::Str(s)) => Some(TypedValue::Str(s.clone())),
                        RArg::V(RVal::Bool(b)) => Some(TypedValue::Bool(*b)),
                        RArg::V(RVal::Rows(rows)) => Some(TypedValue::View(
                            View::from_indices(&table, rows.iter().copied(), 0..table.col_count())
                                .unwrap(),
                        )),
                    })
                    .collect();
                let args: Vec<Arg<'_, '_>> = rargs
                    .iter()
                    .zip(&values)
                    .map(|(a, v)| match (a, v) {
                        (RArg::Col(c), _) => Arg::Col(*c),
                        (_, Some(v)) => Arg::Value(v),
                        _ => unreachable!(),
                    })
                    .collect();
                let got = apply(op, &args).map(|v| to_rval(&v));
                let want = reference::apply(&table, op, &rargs);
                out.cases += 1;
                let agree = match (&got, &want) {
                    (Ok(a), Ok(b)) => {
                        out.values += 1;
                        same(a, b)
                    }
                    (Err(_), Err(())) => true,
                    _ => false,
                };
                if !agree {
                    out.fail(format!("{op} {rargs:?}: got {got:?}, reference {want:?}"));
                }
            }
        }
    }
    out
}

fn run(trace: &str, t: &Table) -> Option<TypedValue<'static>> {
    let e = Expr::parse(trace).ok()?;
    match execute_expr(&e, t).ok()? {
        TypedValue::Num(n) => Some(TypedValue::Num(n)),
        TypedValue::Str(s) => Some(TypedValue::Str(s)),
        TypedValue::Bool(b) => Some(TypedValue::Bool(b)),
        TypedValue::View(_) => None,
    }
}

fn num_of(trace: &str, t: &Table) -> Option<f64> {
    match run(trace, t)? {
        TypedValue::Num(n) => Some(n),
        _ => None,
    }
}

/// Filter partition and superlative identities.
pub fn interpreter_laws(tables: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut out = Outcome::default();
    for _ in 0..tables {
        let t = gen::table(&mut rng);
        let total = t.row_count() as f64;
        for c in 0..t.col_count() {
            let col = Expr::Col(t.columns[c].name.clone()).to_string();
            let numeric_rows = (0..t.row_count())
                .filter(|&r| t.cell(r, c).number().is_some())
                .count() as f64;
            for r in 0..t.row_count() {
                let cell = t.cell(r, c);
                let mut probes = vec![Expr::Str(cell.text.clone()).to_string()];
                if let Some(n) = cell.number() {
                    probes.push(Expr::Num(n).to_string());
                }
                for p in &probes {
                    out.cases += 1;
                    let eq = num_of(&format!("count(filter_eq(T,{col},{p}))"), &t);
                    let ne = num_of(&format!("count(filter_not_eq(T,{col},{p}))"), &t);
                    if eq.zip(ne).map(|(a, b)| a + b) != Some(total) {
                        out.fail(format!(
                            "eq/not_eq partition on {col} {p}: {eq:?} + {ne:?} != {total}"
                        ));
                    }
                }
                if let Some(n) = cell.number() {
                    let p = Expr::Num(n).to_string();
                    for (a, b) in [
                        ("filter_greater", "filter_le"),
                        ("filter_less", "filter_ge"),
                    ] {
                        out.cases += 1;
                        let x = num_of(&format!("count({a}(T,{col},{p}))"), &t);
                        let y = num_of(&format!("count({b}(T,{col},{p}))"), &t);
                        if x.zip(y).map(|(a, b)| a + b) != Some(numeric_rows) {
                            out.fail(format!("{a}/{b} partition on {col} {p}"));
                        }
                    }
                }
            }
            if numeric_rows == total {
                for (arg, agg) in [("argmax", "max"), ("argmin", "min")] {
                    out.cases += 1;
                    let hop = num_of(&format!("hop({arg}(T,{col}),{col})"), &t);
                    let direct = num_of(&format!("{agg}(T,{col})"), &t);
                    if hop.is_none() || hop != direct {
                        out.fail(format!("hop({arg}) {hop:?} != {agg} {direct:?} on {col}"));
                    }
                }
                out.cases += 1;
                if num_of(&format!("nth_max(T,{col},num:1)"), &t)
                    != num_of(&format!("max(T,{col})"), &t)
                {
                    out.fail(format!("nth_max 1 != max on {col}"));
                }
            }
        }
    }
    out
}

/// Linker output against the brute-force characterization.
pub fn linker_properties(pairs: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut out = Outcome::default();
    for _ in 0..pairs {
        let (table, statement) = gen::linker_pair(&mut rng);
        let linked = link(&statement, &table);
        out.cases += 1;
        if let Err(e) = linker_bf::check(&statement, &table, &linked) {
            out.fail(format!("`{statement}`: {e}"));
        }
    }
    out
}

/// Replays a program on typed caches: literals must be taken from the seeded
/// caches (each entry once) and the caches must end empty.
pub fn replay_consumes_all(program: &Program, seeds: &Seeds) -> bool {
    let mut nums = seeds.nums.clone();
    let mut strs = seeds.strs.clone();
    let mut ok = true;
    for tree in program.trees() {
        tree.walk(&mut |e| match e {
            Expr::Num(n) => match nums.iter().position(|x| x.to_bits() == n.to_bits()) {
                Some(i) => {
                    nums.remove(i);
                }
                None => ok = false,
            },
            Expr::Str(s) => match strs.iter().position(|x| x == s) {
                Some(i) => {
                    strs.remove(i);
                }
                None => ok = false,
            },
            _ => {}
        });
    }
    ok && nums.is_empty() && strs.is_empty()
}

/// Structural checks on every candidate of a default-configured search.
pub fn check_candidates(table: &Table, statement: &str, out: &mut Outcome) -> CandidateSet {
    let linked = link(statement, table);
    let seeds = Seeds::from_linked(&linked, table);
    let set = search(table, &linked, &SearchConfig::default());
    if set.len() > 50 {
        out.fail(format!("`{statement}`: {} candidates", set.len()));
    }
    for c in &set.items {
        out.cases += 1;
        let root_bool = tabverify::dsl::type_check_expr(&c.program.root) == Ok(Type::Bool);
        let typed = type_check(&c.program).is_ok();
        let depth = c.program.applications() <= 7;
        let complete = replay_consumes_all(&c.program, &seeds);
        let reexec = execute(&c.program, table) == Ok(TypedValue::Bool(c.result));
        if !(root_bool && typed && depth && complete && reexec) {
            out.fail(format!(
                "`{statement}` {}: bool {root_bool} typed {typed} depth {depth} complete {complete} reexec {reexec}",
                c.trace
            ));
        }
    }
    set
}

const DUMP_WORDS: &[&str] = &[
    "team", "score", "season", "points", "player", "city", "year", "games", "rank", "votes",
    "party", "club", "total", "record", "goals", "venue",
];

/// A dump where the candidates agreeing with the label always route through
/// `argmax` and the others through `count`, over otherwise random columns
/// and statements.
pub fn separable_dump(statements: usize, seed: u64) -> Vec<tabverify::ranker::DumpRecord> {
    use tabverify::ranker::{DumpCandidate, DumpRecord, Label};
    let mut rng = gen::rng(seed);
    (0..statements)
        .map(|i| {
            let label = Label::from_bool(rng.gen_bool(0.5));
            let words: Vec<&str> = (0..rng.gen_range(3..8))
                .map(|_| *DUMP_WORDS.choose(&mut rng).unwrap())
                .collect();
            let mut candidates = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let (a, b) = (
                    DUMP_WORDS.choose(&mut rng).unwrap(),
                    DUMP_WORDS.choose(&mut rng).unwrap(),
                );
                let n = rng.gen_range(1..20);
                candidates.push(DumpCandidate {
                    trace: format!("eq(hop(argmax(T,col:{a}),col:{b}),num:{n})"),
                    result: label.as_bool(),
                });
            }
            for _ in 0..rng.gen_range(1..4) {
                let (a, w) = (
                    DUMP_WORDS.choose(&mut rng).unwrap(),
                    DUMP_WORDS.choose(&mut rng).unwrap(),
                );
                let n = rng.gen_range(1..20);
                candidates.push(DumpCandidate {
                    trace: format!("eq(count(filter_eq(T,col:{a},str:\"{w}\")),num:{n})"),
                    result: !label.as_bool(),
                });
            }
            candidates.sort_by(|x, y| x.trace.cmp(&y.trace));
            candidates.dedup_by(|x, y| x.trace == y.trace);
            DumpRecord {
                table_id: format!("synthetic-{i}"),
                statement: words.join(" "),
                label: Some(label),
                candidates,
                linked: None,
                caption: String::new(),
            }
        })
        .collect()
}

/// Pairwise ranking accuracy of `model` on a dump, counted directly: for each
/// statement, every (agreeing, disagreeing) candidate pair is a trial and a
/// strictly higher score for the agreeing one is a win.
pub fn pairwise_wins(
    model: &dyn tabverify::ranker::Scorer,
    dump: &[tabverify::ranker::DumpRecord],
) -> (usize, usize) {
    let mut wins = 0;
    let mut trials = 0;
    for rec in dump {
        let linked = rec.linked_statement();
        let label = rec.label.expect("labelled dump").as_bool();
        let scored: Vec<(f64, bool)> = rec
            .candidates
            .iter()
            .map(|c| {
                (
                    model.score(&linked, &Program::parse(&c.trace).unwrap()),
                    c.result == label,
                )
            })
            .collect();
        for p in scored.iter().filter(|s| s.1) {
            for n in scored.iter().filter(|s| !s.1) {
                trials += 1;
                wins += usize::from(p.0 > n.0);
            }
        }
    }
    (wins, trials)
}
