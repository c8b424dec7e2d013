//! Rendering engine outcomes as human-readable syntax-error messages.
//!
//! Message shapes are fixed and byte-deterministic:
//!
//! ```text
//! name:line:col: syntax error, unexpected 'until', expecting ';', '=' ...
//! name:line:col: syntax error, there is a missing ';'
//! name:line:col: syntax error [label]
//! ```

use crate::engine::{ExpectedItem, FailureRecord, Position};
use crate::expr::Label;
use crate::grammar::Grammar;

/// A rendered syntax-error report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub source: String,
    pub line: usize,
    pub column: usize,
    /// The offending lexeme, or `end of input`.
    pub unexpected: String,
    /// Expected entries as printed, in record order.
    pub expected: Vec<String>,
    pub label: Option<Label>,
    /// The complete message line.
    pub message: String,
}

/// Translates a byte offset into a 1-based line and column. `\n` separates
/// lines; a column counts bytes since the last newline. Tabs count as one
/// column.
pub fn line_col(input: &[u8], pos: Position) -> (usize, usize) {
    let pos = pos.min(input.len());
    let line = 1 + input[..pos].iter().filter(|&&b| b == b'\n').count();
    let col = match input[..pos].iter().rposition(|&b| b == b'\n') {
        Some(nl) => pos - nl,
        None => pos + 1,
    };
    (line, col)
}

/// The lexeme found at `pos`: the identifier run starting there, the single
/// byte if the run is empty, or `end of input`.
pub fn unexpected_lexeme(input: &[u8], pos: Position) -> String {
    if pos >= input.len() {
        return "end of input".to_owned();
    }
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut end = pos;
    while end < input.len() && is_ident(input[end]) {
        end += 1;
    }
    if end == pos {
        end = pos + 1;
    }
    String::from_utf8_lossy(&input[pos..end]).into_owned()
}

fn print_item(item: &ExpectedItem) -> String {
    match item {
        ExpectedItem::Terminal(b) => format!("'{}'", String::from_utf8_lossy(&[*b])),
        ExpectedItem::Literal(text) => format!("'{}'", String::from_utf8_lossy(text)),
        ExpectedItem::Class(name) => name.clone(),
        ExpectedItem::NonTerminal(name) => name.clone(),
        ExpectedItem::Predicate(printed) => printed.clone(),
    }
}

/// Renders a farthest-failure record as an `expecting ...` message.
///
/// The record must carry a failure position.
pub fn render_ffl(source: &str, input: &[u8], record: &FailureRecord) -> Diagnostic {
    let at = record
        .at
        .expect("render_ffl needs a record with a failure position");
    let (line, column) = line_col(input, at);
    let unexpected = unexpected_lexeme(input, at);
    let expected: Vec<String> = record.expected.iter().map(print_item).collect();
    let message = format!(
        "{}:{}:{}: syntax error, unexpected '{}', expecting {}",
        source,
        line,
        column,
        unexpected,
        expected.join(", ")
    );
    Diagnostic {
        source: source.to_owned(),
        line,
        column,
        unexpected,
        expected,
        label: None,
        message,
    }
}

/// Renders a raised label.
///
/// A label with a cataloged message renders that message. The `fail` label
/// has no message of its own: it delegates to the farthest-failure record
/// gathered in parallel, which is both farther and more informative than the
/// raise position. An uncataloged label renders generically.
pub fn render_label(
    grammar: &Grammar,
    label: &Label,
    at: Position,
    input: &[u8],
    source: &str,
    fallback: &FailureRecord,
) -> Diagnostic {
    if label.is_fail() {
        if fallback.at.is_some() {
            let mut d = render_ffl(source, input, fallback);
            d.label = Some(label.clone());
            return d;
        }
        return generic(grammar, label, at, input, source);
    }
    if let Some(message) = grammar.message(label) {
        let (line, column) = line_col(input, at);
        let message_line = format!("{}:{}:{}: syntax error, {}", source, line, column, message);
        return Diagnostic {
            source: source.to_owned(),
            line,
            column,
            unexpected: unexpected_lexeme(input, at),
            expected: Vec::new(),
            label: Some(label.clone()),
            message: message_line,
        };
    }
    generic(grammar, label, at, input, source)
}

fn generic(
    _grammar: &Grammar,
    label: &Label,
    at: Position,
    input: &[u8],
    source: &str,
) -> Diagnostic {
    let (line, column) = line_col(input, at);
    let message = format!("{}:{}:{}: syntax error [{}]", source, line, column, label);
    Diagnostic {
        source: source.to_owned(),
        line,
        column,
        unexpected: unexpected_lexeme(input, at),
        expected: Vec::new(),
        label: Some(label.clone()),
        message,
    }
}
