//! Breadth-first latent program search over typed caches.
//!
//! A search state holds four caches of intermediate values (numbers, strings,
//! booleans, views), each value paired with the expression that produced it.
//! The input table is always available as a view argument and is never
//! consumed; every other cached value is popped when a function uses it, and
//! the function's result is pushed back. Column arguments come from the table
//! schema.
//!
//! After each application:
//!
//! * a boolean result with the number, string and boolean caches empty is a
//!   finished program (the view cache may still hold values);
//! * any other result with those three caches empty is dropped;
//! * otherwise the result is cached and the new state is queued.
//!
//! Views left in the cache that were computed from statement values stay in
//! the emitted program as residue, so replaying a program always consumes
//! every seed.

pub mod triggers;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dsl::{apply, Arg, Expr, Op, Program, Type, TypedValue};
use crate::linker::LinkedStatement;
use crate::table::{Table, View};

pub use triggers::{trigger_filter, TriggerLexicon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Maximum function applications along one search path.
    pub max_step: usize,
    /// Stop once this many distinct programs are collected.
    pub max_traces: usize,
    pub trigger_pruning: bool,
    /// Skip states whose cache values equal an already queued state's.
    pub memoize: bool,
    /// Stop after expanding this many states.
    pub max_states: Option<usize>,
    pub timeout_ms: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_step: 7,
            max_traces: 50,
            trigger_pruning: true,
            memoize: true,
            max_states: Some(200_000),
            timeout_ms: None,
        }
    }
}

impl SearchConfig {
    /// Exhaustive settings: no pruning, no memo, no caps besides depth.
    pub fn exhaustive(max_step: usize) -> Self {
        SearchConfig {
            max_step,
            max_traces: usize::MAX,
            trigger_pruning: false,
            memoize: false,
            max_states: None,
            timeout_ms: None,
        }
    }
}

/// Statement values placed in the caches before search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Seeds {
    pub nums: Vec<f64>,
    pub strs: Vec<String>,
}

impl Seeds {
    pub fn from_linked(linked: &LinkedStatement, table: &Table) -> Seeds {
        Seeds {
            nums: linked.num_seeds(),
            strs: linked.str_seeds(table),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub program: Program,
    pub trace: String,
    pub result: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub deduped: usize,
    pub errored: usize,
    pub discarded: usize,
    pub bound_pruned: usize,
    pub duplicate_programs: usize,
    pub truncated: bool,
    pub timed_out: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    /// Sorted by trace.
    pub items: Vec<Candidate>,
    pub stats: SearchStats,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains_trace(&self, trace: &str) -> bool {
        self.items.iter().any(|c| c.trace == trace)
    }
}

#[derive(Clone)]
struct Entry<'t> {
    value: TypedValue<'t>,
    expr: Arc<Expr>,
    trace: Arc<str>,
}

impl<'t> Entry<'t> {
    fn new(value: TypedValue<'t>, expr: Expr) -> Self {
        let trace = expr.trace().into();
        Entry {
            value,
            expr: Arc::new(expr),
            trace,
        }
    }
}

/// Typed caches plus the number of applications that produced them.
#[derive(Clone)]
pub struct CacheState<'t> {
    num: Vec<Entry<'t>>,
    str: Vec<Entry<'t>>,
    bool: Vec<Entry<'t>>,
    view: Vec<Entry<'t>>,
    depth: usize,
}

impl<'t> CacheState<'t> {
    pub fn seeded(seeds: &Seeds) -> Self {
        CacheState {
            num: seeds
                .nums
                .iter()
                .map(|&n| Entry::new(TypedValue::Num(n), Expr::Num(n)))
                .collect(),
            str: seeds
                .strs
                .iter()
                .map(|s| Entry::new(TypedValue::Str(s.clone()), Expr::Str(s.clone())))
                .collect(),
            bool: Vec::new(),
            view: Vec::new(),
            depth: 0,
        }
    }

    /// Push a value into the cache matching its type.
    pub fn push(&mut self, value: TypedValue<'t>, expr: Expr) {
        let entry = Entry::new(value, expr);
        match entry.value {
            TypedValue::Num(_) => self.num.push(entry),
            TypedValue::Str(_) => self.str.push(entry),
            TypedValue::Bool(_) => self.bool.push(entry),
            TypedValue::View(_) => self.view.push(entry),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Count of number, string and boolean values still to be consumed.
    pub fn pending(&self) -> usize {
        self.num.len() + self.str.len() + self.bool.len()
    }

    fn order_key(&self) -> String {
        let mut key = String::new();
        for (tag, cache) in [
            ("N", &self.num),
            ("S", &self.str),
            ("B", &self.bool),
            ("V", &self.view),
        ] {
            let mut traces: Vec<&str> = cache.iter().map(|e| &*e.trace).collect();
            traces.sort_unstable();
            key.push_str(tag);
            for t in traces {
                key.push('|');
                key.push_str(t);
            }
            key.push('\n');
        }
        key
    }

    fn memo_key(&self) -> MemoKey {
        let mut num: Vec<u64> = self
            .num
            .iter()
            .map(|e| e.value.as_num().unwrap_or_default().to_bits())
            .collect();
        num.sort_unstable();
        let mut str: Vec<String> = self
            .str
            .iter()
            .map(|e| match &e.value {
                TypedValue::Str(s) => s.clone(),
                _ => String::new(),
            })
            .collect();
        str.sort_unstable();
        let mut bool: Vec<bool> = self.bool.iter().filter_map(|e| e.value.as_bool()).collect();
        bool.sort_unstable();
        let mut view: Vec<(Vec<usize>, Vec<usize>)> = self
            .view
            .iter()
            .filter_map(|e| e.value.as_view())
            .map(|v| (v.rows().to_vec(), v.cols().to_vec()))
            .collect();
        view.sort_unstable();
        MemoKey {
            num,
            str,
            bool,
            view,
        }
    }
}

#[derive(Hash, PartialEq, Eq)]
struct MemoKey {
    num: Vec<u64>,
    str: Vec<String>,
    bool: Vec<bool>,
    view: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Cache-content memo for [`dedupe`].
#[derive(Default)]
pub struct Memo {
    seen: HashSet<MemoKey>,
}

impl Memo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Returns true when a state with the same cache values (as multisets) was
/// recorded before; otherwise records this one and returns false.
/// Expressions do not take part in the comparison.
pub fn dedupe(state: &CacheState<'_>, seen: &mut Memo) -> bool {
    !seen.seen.insert(state.memo_key())
}

#[derive(Debug, Clone, Copy)]
enum Pick {
    Table,
    View(usize),
    Col(usize),
    Num(usize),
    Str(usize),
    Bool(usize),
}

/// Lower bound on the applications needed to empty `pending` cached values.
struct StepBound {
    /// Most values a boolean-returning function can consume in one step.
    final_take: usize,
    /// Largest net reduction of pending values by a non-final step.
    step_take: isize,
}

impl StepBound {
    fn new(ops: &[Op]) -> Self {
        let final_take = ops
            .iter()
            .filter(|op| op.return_type() == Type::Bool)
            .map(|op| op.cached_args())
            .max()
            .unwrap_or(0);
        let step_take = ops
            .iter()
            .map(|op| {
                let produced = isize::from(op.return_type() != Type::View);
                op.cached_args() as isize - produced
            })
            .max()
            .unwrap_or(0);
        StepBound {
            final_take,
            step_take,
        }
    }

    fn min_steps(&self, pending: usize) -> Option<usize> {
        if pending <= self.final_take {
            return Some(1);
        }
        if self.step_take <= 0 {
            return None;
        }
        let rest = pending - self.final_take;
        Some(1 + rest.div_ceil(self.step_take as usize))
    }
}

struct Searcher<'a, 't> {
    table: &'t Table,
    full: TypedValue<'t>,
    ops: &'a [Op],
    cfg: &'a SearchConfig,
    bound: StepBound,
    memo: Memo,
    found: BTreeMap<String, Candidate>,
    stats: SearchStats,
    deadline: Option<Instant>,
}

impl<'t> Searcher<'_, 't> {
    fn done(&self) -> bool {
        self.found.len() >= self.cfg.max_traces
    }

    /// Enumerate argument choices for `op` in `state`, calling `f` on each.
    fn choices(&self, op: Op, state: &CacheState<'t>, f: &mut impl FnMut(&[Pick])) {
        let slots = op.arg_types();
        let mut picks = Vec::with_capacity(slots.len());
        self.choose(slots, state, &mut picks, f);
    }

    fn choose(
        &self,
        slots: &[Type],
        state: &CacheState<'t>,
        picks: &mut Vec<Pick>,
        f: &mut impl FnMut(&[Pick]),
    ) {
        let Some((&slot, rest)) = slots.split_first() else {
            f(picks);
            return;
        };
        let used = |picks: &[Pick], want: fn(Pick) -> Option<usize>, i: usize| {
            picks.iter().any(|&p| want(p) == Some(i))
        };
        let mut go = |pick: Pick, picks: &mut Vec<Pick>| {
            picks.push(pick);
            self.choose(rest, state, picks, f);
            picks.pop();
        };
        match slot {
            Type::View => {
                go(Pick::Table, picks);
                for i in 0..state.view.len() {
                    if !used(
                        picks,
                        |p| if let Pick::View(i) = p { Some(i) } else { None },
                        i,
                    ) {
                        go(Pick::View(i), picks);
                    }
                }
            }
            Type::Col => {
                for c in 0..self.table.col_count() {
                    go(Pick::Col(c), picks);
                }
            }
            Type::Num | Type::Val | Type::Str | Type::Bool => {
                if matches!(slot, Type::Num | Type::Val) {
                    for i in 0..state.num.len() {
                        if !used(
                            picks,
                            |p| if let Pick::Num(i) = p { Some(i) } else { None },
                            i,
                        ) {
                            go(Pick::Num(i), picks);
                        }
                    }
                }
                if matches!(slot, Type::Str | Type::Val) {
                    for i in 0..state.str.len() {
                        if !used(
                            picks,
                            |p| if let Pick::Str(i) = p { Some(i) } else { None },
                            i,
                        ) {
                            go(Pick::Str(i), picks);
                        }
                    }
                }
                if slot == Type::Bool {
                    for i in 0..state.bool.len() {
                        if !used(
                            picks,
                            |p| if let Pick::Bool(i) = p { Some(i) } else { None },
                            i,
                        ) {
                            go(Pick::Bool(i), picks);
                        }
                    }
                }
            }
        }
    }

    fn expand(&mut self, state: &CacheState<'t>, next: &mut Vec<CacheState<'t>>) {
        for &op in self.ops {
            let mut successors: Vec<(Vec<Pick>, Result<TypedValue<'t>, crate::dsl::ExecError>)> =
                Vec::new();
            self.choices(op, state, &mut |picks| {
                let args: Vec<Arg<'_, 't>> = picks
                    .iter()
                    .map(|p| match *p {
                        Pick::Table => Arg::Value(&self.full),
                        Pick::View(i) => Arg::Value(&state.view[i].value),
                        Pick::Col(c) => Arg::Col(c),
                        Pick::Num(i) => Arg::Value(&state.num[i].value),
                        Pick::Str(i) => Arg::Value(&state.str[i].value),
                        Pick::Bool(i) => Arg::Value(&state.bool[i].value),
                    })
                    .collect();
                successors.push((picks.to_vec(), apply(op, &args)));
            });
            for (picks, result) in successors {
                let value = match result {
                    Ok(v) => v,
                    Err(_) => {
                        self.stats.errored += 1;
                        continue;
                    }
                };
                self.step(op, state, &picks, value, next);
                if self.done() {
                    return;
                }
            }
        }
    }

    fn step(
        &mut self,
        op: Op,
        state: &CacheState<'t>,
        picks: &[Pick],
        value: TypedValue<'t>,
        next: &mut Vec<CacheState<'t>>,
    ) {
        let args: Vec<Expr> = picks
            .iter()
            .map(|p| match *p {
                Pick::Table => Expr::Table,
                Pick::View(i) => (*state.view[i].expr).clone(),
                Pick::Col(c) => Expr::Col(self.table.columns[c].name.clone()),
                Pick::Num(i) => (*state.num[i].expr).clone(),
                Pick::Str(i) => (*state.str[i].expr).clone(),
                Pick::Bool(i) => (*state.bool[i].expr).clone(),
            })
            .collect();
        let expr = Expr::Call(op, args);

        let mut child = state.clone();
        child.depth += 1;
        let consumed = |cache: &mut Vec<Entry<'t>>, want: fn(Pick) -> Option<usize>| {
            let mut idx: Vec<usize> = picks.iter().filter_map(|&p| want(p)).collect();
            idx.sort_unstable_by(|a, b| b.cmp(a));
            for i in idx {
                cache.remove(i);
            }
        };
        consumed(&mut child.view, |p| {
            if let Pick::View(i) = p {
                Some(i)
            } else {
                None
            }
        });
        consumed(&mut child.num, |p| {
            if let Pick::Num(i) = p {
                Some(i)
            } else {
                None
            }
        });
        consumed(&mut child.str, |p| {
            if let Pick::Str(i) = p {
                Some(i)
            } else {
                None
            }
        });
        consumed(&mut child.bool, |p| {
            if let Pick::Bool(i) = p {
                Some(i)
            } else {
                None
            }
        });

        if child.pending() == 0 {
            match value {
                TypedValue::Bool(result) => self.emit(&child, expr, result),
                _ => self.stats.discarded += 1,
            }
            return;
        }
        child.push(value, expr);
        if child.depth >= self.cfg.max_step {
            return;
        }
        let remaining = self.cfg.max_step - child.depth;
        match self.bound.min_steps(child.pending()) {
            Some(k) if k <= remaining => {}
            _ => {
                self.stats.bound_pruned += 1;
                return;
            }
        }
        if self.cfg.memoize && dedupe(&child, &mut self.memo) {
            self.stats.deduped += 1;
            return;
        }
        next.push(child);
    }

    fn emit(&mut self, state: &CacheState<'t>, root: Expr, result: bool) {
        let residue: Vec<Expr> = state
            .view
            .iter()
            .filter(|e| e.expr.has_literal())
            .map(|e| (*e.expr).clone())
            .collect();
        let program = Program::new(root, residue);
        let trace = program.trace();
        if self.found.contains_key(&trace) {
            self.stats.duplicate_programs += 1;
            return;
        }
        self.found.insert(
            trace.clone(),
            Candidate {
                program,
                trace,
                result,
            },
        );
    }

    fn out_of_budget(&mut self) -> bool {
        if let Some(limit) = self.cfg.max_states {
            if self.stats.expanded >= limit {
                self.stats.truncated = true;
                return true;
            }
        }
        if let Some(deadline) = self.deadline {
            if self.stats.expanded.is_multiple_of(64) && Instant::now() >= deadline {
                self.stats.timed_out = true;
                return true;
            }
        }
        false
    }

    fn run(mut self, seeds: &Seeds) -> CandidateSet {
        let mut frontier = vec![CacheState::seeded(seeds)];
        'levels: while !frontier.is_empty() {
            frontier.sort_by_cached_key(CacheState::order_key);
            let mut next = Vec::new();
            for state in &frontier {
                if self.out_of_budget() {
                    break 'levels;
                }
                self.stats.expanded += 1;
                self.expand(state, &mut next);
                if self.done() {
                    break 'levels;
                }
            }
            frontier = next;
        }
        CandidateSet {
            items: self.found.into_values().collect(),
            stats: self.stats,
        }
    }
}

/// Search from explicit seeds with an explicit function set (catalog order is
/// used regardless of the order given).
pub fn search_with_seeds(
    table: &Table,
    seeds: &Seeds,
    functions: &[Op],
    cfg: &SearchConfig,
) -> CandidateSet {
    let mut ops = functions.to_vec();
    ops.sort_unstable();
    ops.dedup();
    if cfg.max_step == 0 || cfg.max_traces == 0 {
        return CandidateSet::default();
    }
    let searcher = Searcher {
        table,
        full: TypedValue::View(View::full(table)),
        bound: StepBound::new(&ops),
        ops: &ops,
        cfg,
        memo: Memo::new(),
        found: BTreeMap::new(),
        stats: SearchStats::default(),
        deadline: cfg
            .timeout_ms
            .map(|ms| Instant::now() + Duration::from_millis(ms)),
    };
    searcher.run(seeds)
}

/// Search for programs verifying `linked` against `table`.
pub fn search(table: &Table, linked: &LinkedStatement, cfg: &SearchConfig) -> CandidateSet {
    let seeds = Seeds::from_linked(linked, table);
    let ops: Vec<Op> = if cfg.trigger_pruning {
        trigger_filter(linked).into_iter().collect()
    } else {
        Op::ALL.to_vec()
    };
    search_with_seeds(table, &seeds, &ops, cfg)
}
