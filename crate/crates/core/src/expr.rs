//! Parsing-expression AST: labels, byte classes, and the eleven core
//! expression variants shared by every matching mode.

use std::collections::BTreeSet;
use std::fmt;

/// A failure label.
///
/// The distinguished `fail` label is what ordinary mismatches produce; it is
/// the only label that repetition and the negative predicate absorb.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    /// The built-in `fail` label.
    pub fn fail() -> Self {
        Label("fail".to_owned())
    }

    pub fn is_fail(&self) -> bool {
        self.0 == "fail"
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of input bytes plus the display name used in error messages.
///
/// The display name is whatever the grammar author wrote (e.g. `[a-z0-9]`),
/// so diagnostics can name the class as a single token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharClass {
    ranges: Vec<(u8, u8)>,
    display: String,
}

impl CharClass {
    /// Builds a class from inclusive byte ranges with an explicit display name.
    pub fn new(ranges: impl IntoIterator<Item = (u8, u8)>, display: impl Into<String>) -> Self {
        CharClass {
            ranges: normalize_ranges(ranges),
            display: display.into(),
        }
    }

    /// Builds a class from inclusive byte ranges, deriving a canonical
    /// bracket-syntax display name.
    pub fn from_ranges(ranges: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let ranges = normalize_ranges(ranges);
        let display = canonical_display(&ranges);
        CharClass { ranges, display }
    }

    pub fn contains(&self, byte: u8) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo <= byte && byte <= hi)
    }

    pub fn display(&self) -> &str {
        &self.display
    }

    pub fn ranges(&self) -> &[(u8, u8)] {
        &self.ranges
    }
}

fn normalize_ranges(ranges: impl IntoIterator<Item = (u8, u8)>) -> Vec<(u8, u8)> {
    let mut ranges: Vec<(u8, u8)> = ranges
        .into_iter()
        .map(|(lo, hi)| if lo <= hi { (lo, hi) } else { (hi, lo) })
        .collect();
    ranges.sort_unstable();
    let mut merged: Vec<(u8, u8)> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        match merged.last_mut() {
            Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

fn canonical_display(ranges: &[(u8, u8)]) -> String {
    let mut out = String::from("[");
    for &(lo, hi) in ranges {
        push_class_byte(&mut out, lo);
        if hi > lo {
            out.push('-');
            push_class_byte(&mut out, hi);
        }
    }
    out.push(']');
    out
}

fn push_class_byte(out: &mut String, b: u8) {
    match b {
        b']' | b'\\' | b'-' => {
            out.push('\\');
            out.push(b as char);
        }
        _ => push_escaped_byte(out, b),
    }
}

/// Escapes a byte for quoted atoms; printable ASCII passes through.
pub(crate) fn push_escaped_byte(out: &mut String, b: u8) {
    match b {
        b'\n' => out.push_str("\\n"),
        b'\t' => out.push_str("\\t"),
        b'\r' => out.push_str("\\r"),
        b'\\' => out.push_str("\\\\"),
        0x20..=0x7e => out.push(b as char),
        _ => out.push_str(&format!("\\x{:02x}", b)),
    }
}

/// A core parsing expression.
///
/// `Literal` and `Class` are first-class atoms rather than sugar: error
/// messages have to name them as single tokens. A `Choice` carries the set
/// of labels it catches; the plain `p1 / p2` form carries exactly `{fail}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Matches the empty string.
    Empty,
    /// Matches one specific byte.
    Terminal(u8),
    /// Matches any single byte.
    Any,
    /// Matches an exact non-empty byte string, atomically: it consumes the
    /// whole text or fails at its start position.
    Literal(Vec<u8>),
    /// Matches one byte from a set.
    Class(CharClass),
    /// Invokes another rule.
    NonTerminal(String),
    Sequence(Box<Expr>, Box<Expr>),
    Choice {
        left: Box<Expr>,
        right: Box<Expr>,
        catch: BTreeSet<Label>,
    },
    /// Greedy repetition, zero or more.
    Star(Box<Expr>),
    /// Negative predicate; consumes nothing.
    Not(Box<Expr>),
    /// Raises the given label at the current position.
    Throw(Label),
}

impl Expr {
    pub fn seq(left: Expr, right: Expr) -> Expr {
        Expr::Sequence(Box::new(left), Box::new(right))
    }

    /// Chains a sequence left-associatively, the way the parser builds them.
    pub fn seq_all(parts: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = parts.into_iter();
        let first = it.next().expect("seq_all needs at least one part");
        it.fold(first, Expr::seq)
    }

    /// Ordered choice catching only `fail`.
    pub fn choice(left: Expr, right: Expr) -> Expr {
        Expr::choice_catch(left, right, [Label::fail()])
    }

    pub fn choice_catch(left: Expr, right: Expr, catch: impl IntoIterator<Item = Label>) -> Expr {
        let catch: BTreeSet<Label> = catch.into_iter().collect();
        assert!(!catch.is_empty(), "a choice catches at least one label");
        Expr::Choice {
            left: Box::new(left),
            right: Box::new(right),
            catch,
        }
    }

    pub fn star(body: Expr) -> Expr {
        Expr::Star(Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(body: Expr) -> Expr {
        Expr::Not(Box::new(body))
    }

    pub fn throw(label: impl Into<String>) -> Expr {
        Expr::Throw(Label::new(label))
    }

    /// A literal atom. Panics on empty text; literals are non-empty by
    /// construction.
    pub fn lit(text: impl AsRef<[u8]>) -> Expr {
        let text = text.as_ref().to_vec();
        assert!(!text.is_empty(), "literal text must be non-empty");
        Expr::Literal(text)
    }

    pub fn term(byte: u8) -> Expr {
        Expr::Terminal(byte)
    }

    pub fn nt(name: impl Into<String>) -> Expr {
        Expr::NonTerminal(name.into())
    }

    /// Visits this expression and all sub-expressions, outermost first.
    pub fn for_each(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Sequence(l, r) => {
                l.for_each(f);
                r.for_each(f);
            }
            Expr::Choice { left, right, .. } => {
                left.for_each(f);
                right.for_each(f);
            }
            Expr::Star(b) | Expr::Not(b) => b.for_each(f),
            _ => {}
        }
    }
}

// Precedence levels for printing: choice < sequence < prefix < postfix < atom.
const P_CHOICE: u8 = 0;
const P_SEQ: u8 = 1;
const P_PREFIX: u8 = 2;
const P_POSTFIX: u8 = 3;
const P_ATOM: u8 = 4;

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Choice { .. } => P_CHOICE,
            Expr::Sequence(..) => P_SEQ,
            Expr::Not(_) => P_PREFIX,
            Expr::Star(_) => P_POSTFIX,
            _ => P_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let needs_parens = self.prec() < min;
        if needs_parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Empty => f.write_str("e")?,
            Expr::Terminal(b) => {
                let mut s = String::new();
                if *b == b'\'' {
                    s.push_str("\\'");
                } else {
                    push_escaped_byte(&mut s, *b);
                }
                write!(f, "'{}'", s)?;
            }
            Expr::Any => f.write_str(".")?,
            Expr::Literal(text) => {
                let mut s = String::new();
                for &b in text {
                    if b == b'"' {
                        s.push_str("\\\"");
                    } else {
                        push_escaped_byte(&mut s, b);
                    }
                }
                write!(f, "\"{}\"", s)?;
            }
            Expr::Class(c) => f.write_str(c.display())?,
            Expr::NonTerminal(name) => f.write_str(name)?,
            Expr::Sequence(l, r) => {
                l.fmt_prec(f, P_SEQ)?;
                f.write_str(" ")?;
                r.fmt_prec(f, P_PREFIX)?;
            }
            Expr::Choice { left, right, catch } => {
                left.fmt_prec(f, P_CHOICE)?;
                let default_catch = catch.len() == 1 && catch.iter().all(Label::is_fail);
                if default_catch {
                    f.write_str(" / ")?;
                } else {
                    let names: Vec<&str> = catch.iter().map(Label::name).collect();
                    write!(f, " /{{{}}} ", names.join(","))?;
                }
                right.fmt_prec(f, P_SEQ)?;
            }
            Expr::Star(body) => {
                body.fmt_prec(f, P_ATOM)?;
                f.write_str("*")?;
            }
            Expr::Not(body) => {
                f.write_str("!")?;
                body.fmt_prec(f, P_PREFIX)?;
            }
            Expr::Throw(label) => write!(f, "^{}", label)?,
        }
        if needs_parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, P_CHOICE)
    }
}
