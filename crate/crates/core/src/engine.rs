//! The four matching semantics, implemented as structural recursion over
//! `Expr`.
//!
//! * `match_plain` — ordinary PEG matching: a result is consumed-up-to or
//!   failed.
//! * `match_fft` — plain matching plus the farthest failure position.
//! * `match_ffl` — farthest failure plus the ordered list of expressions
//!   that were expected there.
//! * `match_labeled` — labeled failures: throws, catch sets on choices, and
//!   the raise position; a failure record is maintained in parallel so a
//!   plain `fail` outcome can still be reported with full context.
//!
//! All four are pure: a `Grammar` can be matched concurrently from many
//! threads. Recursion is bounded by a step budget so that a defective
//! grammar surfaces as a clean error instead of a hang.

use std::fmt;

use crate::expr::{Expr, Label};
use crate::grammar::Grammar;

/// Byte offset into the input. A larger offset means a shorter remaining
/// suffix, i.e. a farther failure.
pub type Position = usize;

/// Default step budget for a single match.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Outcome of plain matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlainResult {
    /// Matched, consuming input up to this end position.
    Consumed(Position),
    Failed,
}

/// Outcome of labeled matching: success, or a label raised at a position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabeledResult {
    Consumed(Position),
    /// The label and the position that was current when it was produced.
    Raised(Label, Position),
}

/// One entry of an expected list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpectedItem {
    Terminal(u8),
    Literal(Vec<u8>),
    /// A class, by its display name.
    Class(String),
    /// A rule, by name.
    NonTerminal(String),
    /// A printed expression, e.g. `!IDRest` or `^sc`.
    Predicate(String),
}

/// Farthest failure position plus what was expected there.
///
/// `at` is absent exactly when `expected` is empty: either nothing failed,
/// or we know both where and what.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FailureRecord {
    pub at: Option<Position>,
    pub expected: Vec<ExpectedItem>,
}

impl FailureRecord {
    pub fn none() -> Self {
        FailureRecord::default()
    }

    pub fn at(pos: Position, item: ExpectedItem) -> Self {
        FailureRecord {
            at: Some(pos),
            expected: vec![item],
        }
    }

    pub fn is_none(&self) -> bool {
        self.at.is_none()
    }
}

/// Picks the farther of two possible failure positions. Any position beats
/// none, and a larger offset (shorter suffix) beats a smaller one.
pub fn smallest(a: Option<Position>, b: Option<Position>) -> Option<Position> {
    match (a, b) {
        (None, r) => r,
        (l, None) => l,
        (Some(x), Some(y)) => Some(x.max(y)),
    }
}

/// Merges two failure records: the farther position wins with its list, and
/// equal positions concatenate `r1`'s items before `r2`'s, dropping
/// duplicates.
pub fn join(r1: FailureRecord, r2: FailureRecord) -> FailureRecord {
    let merged = match (r1.at, r2.at) {
        (None, _) => r2,
        (_, None) => r1,
        (Some(x), Some(y)) if x > y => r1,
        (Some(x), Some(y)) if x < y => r2,
        _ => {
            let mut expected = r1.expected;
            for item in r2.expected {
                if !expected.contains(&item) {
                    expected.push(item);
                }
            }
            FailureRecord {
                at: r1.at,
                expected,
            }
        }
    };
    debug_assert_eq!(merged.at.is_none(), merged.expected.is_empty());
    merged
}

/// Collapses a rule body's record to the rule itself when its farthest
/// failure sits exactly at the rule's start position.
pub fn join_var(r: FailureRecord, rule_start: Position, name: &str) -> FailureRecord {
    if r.at == Some(rule_start) {
        FailureRecord {
            at: r.at,
            expected: vec![ExpectedItem::NonTerminal(name.to_owned())],
        }
    } else {
        r
    }
}

/// How non-lexical rules fold their body's expected list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStrategy {
    /// Collapse to the rule name when the farthest failure is at the rule's
    /// own start.
    Join,
    /// Always propagate the body's list unchanged.
    Propagate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// The step budget ran out; the grammar most likely diverges.
    StepBudgetExceeded,
    /// A rule was referenced that the grammar does not define.
    UnknownRule(String),
    /// A throw was encountered in a mode that only handles plain failure.
    ThrowUnsupported(Label),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::StepBudgetExceeded => write!(f, "step budget exceeded"),
            EngineError::UnknownRule(name) => write!(f, "unknown rule '{}'", name),
            EngineError::ThrowUnsupported(l) => {
                write!(f, "throw '^{}' is not supported in this mode", l)
            }
        }
    }
}

impl std::error::Error for EngineError {}

/// Matcher for one grammar. All `match_*` entry points start from the
/// grammar's start rule at the given input position.
#[derive(Debug, Clone, Copy)]
pub struct Engine<'g> {
    grammar: &'g Grammar,
    step_budget: u64,
}

impl<'g> Engine<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Engine {
            grammar,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_step_budget(mut self, steps: u64) -> Self {
        self.step_budget = steps;
        self
    }

    fn run<'i>(&self, input: &'i [u8]) -> Run<'g, 'i> {
        Run {
            grammar: self.grammar,
            input,
            steps: self.step_budget,
        }
    }

    fn start_expr(&self) -> Expr {
        Expr::NonTerminal(self.grammar.start().to_owned())
    }

    /// Plain PEG matching. A throw behaves like a plain failure here.
    pub fn match_plain(&self, input: &[u8], start: Position) -> Result<PlainResult, EngineError> {
        let mut run = self.run(input);
        Ok(to_plain(run.plain(&self.start_expr(), start)?))
    }

    /// Plain matching plus the farthest failure position; the position is
    /// absent when no failure occurred anywhere in the derivation.
    pub fn match_fft(
        &self,
        input: &[u8],
        start: Position,
    ) -> Result<(PlainResult, Option<Position>), EngineError> {
        let mut run = self.run(input);
        let (res, far) = run.fft(&self.start_expr(), start)?;
        Ok((to_plain(res), far))
    }

    /// Farthest failure with expected lists. Lexical rules report like
    /// single tokens; `strategy` says how other rules fold their lists.
    pub fn match_ffl(
        &self,
        input: &[u8],
        start: Position,
        strategy: VarStrategy,
    ) -> Result<(PlainResult, FailureRecord), EngineError> {
        let mut run = self.run(input);
        let (res, rec) = run.ffl(&self.start_expr(), start, strategy)?;
        Ok((to_plain(res), rec))
    }

    /// Labeled matching, with a failure record maintained in parallel so a
    /// plain `fail` outcome can be rendered with an expected list.
    pub fn match_labeled(
        &self,
        input: &[u8],
        start: Position,
    ) -> Result<(LabeledResult, FailureRecord), EngineError> {
        let mut run = self.run(input);
        let (res, rec) = run.labeled(&self.start_expr(), start)?;
        let res = match res {
            LOut::Ok(end) => LabeledResult::Consumed(end),
            LOut::Raise(label, at) => LabeledResult::Raised(label, at),
        };
        Ok((res, rec))
    }
}

fn to_plain(res: Option<Position>) -> PlainResult {
    match res {
        Some(end) => PlainResult::Consumed(end),
        None => PlainResult::Failed,
    }
}

/// Labeled-mode internal outcome.
enum LOut {
    Ok(Position),
    Raise(Label, Position),
}

struct Run<'g, 'i> {
    grammar: &'g Grammar,
    input: &'i [u8],
    steps: u64,
}

impl<'g, 'i> Run<'g, 'i> {
    fn tick(&mut self) -> Result<(), EngineError> {
        if self.steps == 0 {
            return Err(EngineError::StepBudgetExceeded);
        }
        self.steps -= 1;
        Ok(())
    }

    fn rule(&self, name: &str) -> Result<&'g Expr, EngineError> {
        self.grammar
            .rule(name)
            .ok_or_else(|| EngineError::UnknownRule(name.to_owned()))
    }

    /// Matches an atom that consumes input; `None` means it failed.
    fn eat(&self, expr: &Expr, pos: Position) -> Option<Position> {
        match expr {
            Expr::Terminal(b) => (self.input.get(pos) == Some(b)).then(|| pos + 1),
            Expr::Any => (pos < self.input.len()).then(|| pos + 1),
            Expr::Literal(text) => self.input[pos.min(self.input.len())..]
                .starts_with(text)
                .then(|| pos + text.len()),
            Expr::Class(c) => self
                .input
                .get(pos)
                .filter(|&&b| c.contains(b))
                .map(|_| pos + 1),
            _ => unreachable!("eat is only called on consuming atoms"),
        }
    }

    fn expected_atom(expr: &Expr) -> ExpectedItem {
        match expr {
            Expr::Terminal(b) => ExpectedItem::Terminal(*b),
            Expr::Literal(text) => ExpectedItem::Literal(text.clone()),
            Expr::Class(c) => ExpectedItem::Class(c.display().to_owned()),
            Expr::Any => ExpectedItem::Class("any character".to_owned()),
            _ => unreachable!(),
        }
    }

    // --- plain semantics -------------------------------------------------

    fn plain(&mut self, expr: &Expr, pos: Position) -> Result<Option<Position>, EngineError> {
        self.tick()?;
        match expr {
            Expr::Empty => Ok(Some(pos)),
            Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) => {
                Ok(self.eat(expr, pos))
            }
            Expr::NonTerminal(name) => {
                let body = self.rule(name)?;
                self.plain(body, pos)
            }
            Expr::Sequence(l, r) => match self.plain(l, pos)? {
                Some(mid) => self.plain(r, mid),
                None => Ok(None),
            },
            Expr::Choice { left, right, .. } => match self.plain(left, pos)? {
                Some(end) => Ok(Some(end)),
                None => self.plain(right, pos),
            },
            Expr::Star(body) => {
                let mut cur = pos;
                while let Some(next) = self.plain(body, cur)? {
                    cur = next;
                }
                Ok(Some(cur))
            }
            Expr::Not(body) => Ok(match self.plain(body, pos)? {
                Some(_) => None,
                None => Some(pos),
            }),
            // Plain matching has no labels; a throw degrades to failure.
            Expr::Throw(_) => Ok(None),
        }
    }

    // --- farthest failure tracking ---------------------------------------

    fn fft(
        &mut self,
        expr: &Expr,
        pos: Position,
    ) -> Result<(Option<Position>, Option<Position>), EngineError> {
        self.tick()?;
        match expr {
            Expr::Empty => Ok((Some(pos), None)),
            Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) => {
                Ok(match self.eat(expr, pos) {
                    Some(end) => (Some(end), None),
                    None => (None, Some(pos)),
                })
            }
            Expr::NonTerminal(name) => {
                let body = self.rule(name)?;
                self.fft(body, pos)
            }
            Expr::Sequence(l, r) => {
                let (res, v) = self.fft(l, pos)?;
                match res {
                    Some(mid) => {
                        let (res, w) = self.fft(r, mid)?;
                        Ok((res, smallest(v, w)))
                    }
                    None => Ok((None, v)),
                }
            }
            Expr::Choice { left, right, .. } => {
                let (res, v) = self.fft(left, pos)?;
                match res {
                    Some(end) => Ok((Some(end), v)),
                    None => {
                        let (res, w) = self.fft(right, pos)?;
                        Ok((res, smallest(v, w)))
                    }
                }
            }
            Expr::Star(body) => {
                let mut cur = pos;
                let mut far = None;
                loop {
                    let (res, v) = self.fft(body, cur)?;
                    far = smallest(v, far);
                    match res {
                        Some(next) => cur = next,
                        None => return Ok((Some(cur), far)),
                    }
                }
            }
            // What happens inside a predicate takes no part in error
            // reporting; a failing predicate blames its own position.
            Expr::Not(body) => {
                let (res, _inner) = self.fft(body, pos)?;
                Ok(match res {
                    Some(_) => (None, Some(pos)),
                    None => (Some(pos), None),
                })
            }
            Expr::Throw(l) => Err(EngineError::ThrowUnsupported(l.clone())),
        }
    }

    // --- farthest failure with expected lists -----------------------------

    fn ffl(
        &mut self,
        expr: &Expr,
        pos: Position,
        strategy: VarStrategy,
    ) -> Result<(Option<Position>, FailureRecord), EngineError> {
        self.tick()?;
        match expr {
            Expr::Empty => Ok((Some(pos), FailureRecord::none())),
            Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) => {
                Ok(match self.eat(expr, pos) {
                    Some(end) => (Some(end), FailureRecord::none()),
                    None => (None, FailureRecord::at(pos, Self::expected_atom(expr))),
                })
            }
            Expr::NonTerminal(name) => {
                let body = self.rule(name)?;
                let (res, rec) = self.ffl(body, pos, strategy)?;
                if self.grammar.is_lexical(name) {
                    // A lexical rule reports like a terminal: inner failures
                    // vanish on success, a failed match blames the rule at
                    // its start.
                    Ok(match res {
                        Some(end) => (Some(end), FailureRecord::none()),
                        None => (
                            None,
                            FailureRecord::at(pos, ExpectedItem::NonTerminal(name.clone())),
                        ),
                    })
                } else {
                    let rec = match strategy {
                        VarStrategy::Join => join_var(rec, pos, name),
                        VarStrategy::Propagate => rec,
                    };
                    Ok((res, rec))
                }
            }
            Expr::Sequence(l, r) => {
                let (res, r1) = self.ffl(l, pos, strategy)?;
                match res {
                    Some(mid) => {
                        let (res, r2) = self.ffl(r, mid, strategy)?;
                        Ok((res, join(r2, r1)))
                    }
                    None => Ok((None, r1)),
                }
            }
            Expr::Choice { left, right, .. } => {
                let (res, r1) = self.ffl(left, pos, strategy)?;
                match res {
                    Some(end) => Ok((Some(end), r1)),
                    None => {
                        let (res, r2) = self.ffl(right, pos, strategy)?;
                        Ok((res, join(r2, r1)))
                    }
                }
            }
            Expr::Star(body) => {
                let mut cur = pos;
                let mut acc = FailureRecord::none();
                loop {
                    let (res, rec) = self.ffl(body, cur, strategy)?;
                    acc = join(rec, acc);
                    match res {
                        Some(next) => cur = next,
                        None => return Ok((Some(cur), acc)),
                    }
                }
            }
            Expr::Not(body) => {
                let (res, _inner) = self.ffl(body, pos, strategy)?;
                Ok(match res {
                    Some(_) => (
                        None,
                        FailureRecord::at(pos, ExpectedItem::Predicate(expr.to_string())),
                    ),
                    None => (Some(pos), FailureRecord::none()),
                })
            }
            Expr::Throw(l) => Err(EngineError::ThrowUnsupported(l.clone())),
        }
    }

    // --- labeled failures --------------------------------------------------

    fn labeled(
        &mut self,
        expr: &Expr,
        pos: Position,
    ) -> Result<(LOut, FailureRecord), EngineError> {
        self.tick()?;
        match expr {
            Expr::Empty => Ok((LOut::Ok(pos), FailureRecord::none())),
            Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) => {
                Ok(match self.eat(expr, pos) {
                    Some(end) => (LOut::Ok(end), FailureRecord::none()),
                    None => (
                        LOut::Raise(Label::fail(), pos),
                        FailureRecord::at(pos, Self::expected_atom(expr)),
                    ),
                })
            }
            Expr::NonTerminal(name) => {
                let body = self.rule(name)?;
                let (res, rec) = self.labeled(body, pos)?;
                let rec = if self.grammar.is_lexical(name) {
                    match res {
                        LOut::Ok(_) => FailureRecord::none(),
                        LOut::Raise(..) => {
                            FailureRecord::at(pos, ExpectedItem::NonTerminal(name.clone()))
                        }
                    }
                } else {
                    join_var(rec, pos, name)
                };
                Ok((res, rec))
            }
            Expr::Sequence(l, r) => {
                let (res, r1) = self.labeled(l, pos)?;
                match res {
                    LOut::Ok(mid) => {
                        let (res, r2) = self.labeled(r, mid)?;
                        Ok((res, join(r2, r1)))
                    }
                    raise => Ok((raise, r1)),
                }
            }
            Expr::Choice { left, right, catch } => {
                let (res, r1) = self.labeled(left, pos)?;
                match res {
                    LOut::Ok(end) => Ok((LOut::Ok(end), r1)),
                    LOut::Raise(label, at) => {
                        if catch.contains(&label) {
                            let (res, r2) = self.labeled(right, pos)?;
                            Ok((res, join(r2, r1)))
                        } else {
                            Ok((LOut::Raise(label, at), r1))
                        }
                    }
                }
            }
            Expr::Star(body) => {
                let mut cur = pos;
                let mut acc = FailureRecord::none();
                loop {
                    let (res, rec) = self.labeled(body, cur)?;
                    acc = join(rec, acc);
                    match res {
                        LOut::Ok(next) => cur = next,
                        LOut::Raise(label, at) => {
                            // Repetition stops silently only on `fail`; any
                            // other label propagates.
                            if label.is_fail() {
                                return Ok((LOut::Ok(cur), acc));
                            }
                            return Ok((LOut::Raise(label, at), acc));
                        }
                    }
                }
            }
            Expr::Not(body) => {
                let (res, _inner) = self.labeled(body, pos)?;
                Ok(match res {
                    LOut::Ok(_) => (
                        LOut::Raise(Label::fail(), pos),
                        FailureRecord::at(pos, ExpectedItem::Predicate(expr.to_string())),
                    ),
                    LOut::Raise(label, _) if label.is_fail() => {
                        (LOut::Ok(pos), FailureRecord::none())
                    }
                    // A non-fail label escapes the predicate, but nothing
                    // inside it joins the record.
                    LOut::Raise(label, at) => (LOut::Raise(label, at), FailureRecord::none()),
                })
            }
            Expr::Throw(label) => Ok((
                LOut::Raise(label.clone(), pos),
                FailureRecord::at(pos, ExpectedItem::Predicate(format!("^{}", label))),
            )),
        }
    }
}
