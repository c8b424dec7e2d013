//! The textual grammar format.
//!
//! One declaration per line (continuation lines are allowed as long as they
//! do not look like the start of a new declaration):
//!
//! ```text
//! # comment
//! Name  <- expression
//! lex NAME <- expression          # lexical rule: reports like a token
//! label name = "message"
//! ```
//!
//! Atoms: `'c'` single byte, `"text"` literal, `[a-z0-9]` class, `.` any
//! byte, `e` the empty string. Operators, loosest to tightest: choice `/`
//! and `/{l1,l2}`, sequence by juxtaposition, prefix `!` and `&`, postfix
//! `*`, `+`, `?`. `^label` throws; `expect(p, l)`, `try(p)` and `nofail(p)`
//! are sugar. The first rule is the start rule.

use std::collections::BTreeSet;

use crate::expr::{push_escaped_byte, CharClass, Expr, Label};
use crate::grammar::Grammar;

/// Byte range within the grammar file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        SourceSpan { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammarErrorKind {
    Malformed,
    DuplicateRule,
    UnknownEscape,
    LabelRedeclaration,
    ReservedName,
    UnknownReference,
}

/// An error in a grammar file, with the byte span it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarError {
    pub kind: GrammarErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl std::fmt::Display for GrammarError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for GrammarError {}

/// Surface expression tree, before sugar expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surface {
    Empty,
    Terminal(u8),
    Any,
    Literal(Vec<u8>),
    Class(CharClass),
    NonTerminal(String),
    Sequence(Box<Surface>, Box<Surface>),
    Choice(Box<Surface>, Box<Surface>, BTreeSet<Label>),
    Star(Box<Surface>),
    Plus(Box<Surface>),
    Opt(Box<Surface>),
    Not(Box<Surface>),
    And(Box<Surface>),
    Throw(Label),
    /// `expect(p, l)`: `p` or throw `l`.
    Expect(Box<Surface>, Label),
    /// `try(p)`: errors inside become plain failure at this boundary once
    /// the grammar is run through the four-values translation.
    Try(Box<Surface>),
    /// `nofail(p)`: failure of `p` becomes an `error` throw.
    Nofail(Box<Surface>),
}

/// Expands surface sugar into the eleven core variants.
pub fn desugar(surface: &Surface) -> Expr {
    match surface {
        Surface::Empty => Expr::Empty,
        Surface::Terminal(b) => Expr::Terminal(*b),
        Surface::Any => Expr::Any,
        Surface::Literal(text) => Expr::Literal(text.clone()),
        Surface::Class(c) => Expr::Class(c.clone()),
        Surface::NonTerminal(name) => Expr::NonTerminal(name.clone()),
        Surface::Sequence(l, r) => Expr::seq(desugar(l), desugar(r)),
        Surface::Choice(l, r, catch) => {
            Expr::choice_catch(desugar(l), desugar(r), catch.iter().cloned())
        }
        Surface::Star(b) => Expr::star(desugar(b)),
        Surface::Plus(b) => Expr::seq(desugar(b), Expr::star(desugar(b))),
        Surface::Opt(b) => Expr::choice(desugar(b), Expr::Empty),
        Surface::Not(b) => Expr::not(desugar(b)),
        Surface::And(b) => Expr::not(Expr::not(desugar(b))),
        Surface::Throw(l) => Expr::Throw(l.clone()),
        Surface::Expect(b, l) => Expr::choice(desugar(b), Expr::Throw(l.clone())),
        // `p /{error} ^fail`: inert until the four-values translation
        // rewrites the body, at which point it undoes errors.
        Surface::Try(b) => Expr::choice_catch(
            desugar(b),
            Expr::Throw(Label::fail()),
            [Label::new("error")],
        ),
        Surface::Nofail(b) => Expr::choice(desugar(b), Expr::Throw(Label::new("error"))),
    }
}

const RESERVED: [&str; 6] = ["e", "lex", "label", "try", "nofail", "expect"];

/// Parses a grammar file. Errors are collected per declaration so one bad
/// rule does not hide the rest.
pub fn parse_grammar(text: &[u8]) -> Result<Grammar, Vec<GrammarError>> {
    let mut errors: Vec<GrammarError> = Vec::new();
    let mut rules: Vec<ParsedRule> = Vec::new();
    let mut labels: Vec<(String, String, SourceSpan)> = Vec::new();

    for decl in split_declarations(text, &mut errors) {
        match lex_tokens(text, decl) {
            Ok(tokens) => {
                let mut parser = Parser {
                    tokens: &tokens,
                    at: 0,
                    decl_end: decl.end,
                };
                match parser.parse_declaration() {
                    Ok(Decl::Rule(rule)) => rules.push(rule),
                    Ok(Decl::Label {
                        name,
                        message,
                        span,
                    }) => labels.push((name, message, span)),
                    Err(e) => errors.push(e),
                }
            }
            Err(e) => errors.push(e),
        }
    }

    if rules.is_empty() && errors.is_empty() {
        errors.push(GrammarError {
            kind: GrammarErrorKind::Malformed,
            span: SourceSpan::new(0, 0),
            message: "grammar file declares no rules".to_owned(),
        });
    }

    // Duplicate rules and label redeclarations.
    let mut seen_rules: BTreeSet<&str> = BTreeSet::new();
    for rule in &rules {
        if !seen_rules.insert(&rule.name) {
            errors.push(GrammarError {
                kind: GrammarErrorKind::DuplicateRule,
                span: rule.name_span,
                message: format!("rule '{}' is declared twice", rule.name),
            });
        }
    }
    let mut seen_labels: BTreeSet<&str> = BTreeSet::new();
    for (name, _, span) in &labels {
        if name == "fail" {
            errors.push(GrammarError {
                kind: GrammarErrorKind::ReservedName,
                span: *span,
                message: "the 'fail' label is implicit and cannot carry a message".to_owned(),
            });
        } else if !seen_labels.insert(name) {
            errors.push(GrammarError {
                kind: GrammarErrorKind::LabelRedeclaration,
                span: *span,
                message: format!("label '{}' is declared twice", name),
            });
        }
    }

    // Every referenced rule must exist.
    let known: BTreeSet<&str> = rules.iter().map(|r| r.name.as_str()).collect();
    for rule in &rules {
        for (target, span) in &rule.refs {
            if !known.contains(target.as_str()) {
                errors.push(GrammarError {
                    kind: GrammarErrorKind::UnknownReference,
                    span: *span,
                    message: format!("reference to undefined rule '{}'", target),
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let mut grammar = Grammar::new(rules[0].name.clone());
    for rule in rules {
        if rule.lexical {
            grammar.add_lexical_rule(rule.name, desugar(&rule.body));
        } else {
            grammar.add_rule(rule.name, desugar(&rule.body));
        }
    }
    for (name, message, _) in labels {
        grammar.set_message(Label::new(name), message);
    }
    grammar.declare_used_labels();
    Ok(grammar)
}

/// Prints a grammar in the textual format. Parsing the output yields a
/// structurally identical grammar.
pub fn write_grammar(grammar: &Grammar) -> String {
    let mut out = String::new();
    for (name, body) in grammar.rules() {
        if grammar.is_lexical(name) {
            out.push_str("lex ");
        }
        out.push_str(name);
        out.push_str(" <- ");
        out.push_str(&body.to_string());
        out.push('\n');
    }
    for (label, message) in grammar.messages() {
        out.push_str("label ");
        out.push_str(label.name());
        out.push_str(" = \"");
        for &b in message.as_bytes() {
            if b == b'"' {
                out.push_str("\\\"");
            } else {
                push_escaped_byte(&mut out, b);
            }
        }
        out.push_str("\"\n");
    }
    out
}

// --- declaration splitting --------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct DeclSpan {
    start: usize,
    end: usize,
}

fn split_declarations(text: &[u8], errors: &mut Vec<GrammarError>) -> Vec<DeclSpan> {
    let mut decls: Vec<DeclSpan> = Vec::new();
    let mut open: Option<DeclSpan> = None;
    let mut line_start = 0;
    while line_start <= text.len() {
        let line_end = text[line_start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| line_start + i)
            .unwrap_or(text.len());
        let line = &text[line_start..line_end];
        if starts_declaration(line) {
            if let Some(d) = open.take() {
                decls.push(d);
            }
            open = Some(DeclSpan {
                start: line_start,
                end: line_end,
            });
        } else if !blank_or_comment(line) {
            match open.as_mut() {
                Some(d) => d.end = line_end,
                None => errors.push(GrammarError {
                    kind: GrammarErrorKind::Malformed,
                    span: SourceSpan::new(line_start, line_end),
                    message: "expected a rule or label declaration".to_owned(),
                }),
            }
        }
        if line_end == text.len() {
            break;
        }
        line_start = line_end + 1;
    }
    if let Some(d) = open {
        decls.push(d);
    }
    decls
}

fn blank_or_comment(line: &[u8]) -> bool {
    let t = trim_start(line);
    t.is_empty() || t[0] == b'#'
}

fn trim_start(line: &[u8]) -> &[u8] {
    let from = line
        .iter()
        .position(|&b| b != b' ' && b != b'\t' && b != b'\r')
        .unwrap_or(line.len());
    &line[from..]
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// A line starts a declaration when it looks like `name <-`, `lex name <-`
/// or `label name =` after indentation.
fn starts_declaration(line: &[u8]) -> bool {
    let t = trim_start(line);
    let word_end = t.iter().position(|&b| !is_word_byte(b)).unwrap_or(t.len());
    if word_end == 0 {
        return false;
    }
    let (word, rest) = t.split_at(word_end);
    let rest = trim_start(rest);
    match word {
        b"lex" => {
            let w2 = rest
                .iter()
                .position(|&b| !is_word_byte(b))
                .unwrap_or(rest.len());
            w2 > 0 && trim_start(&rest[w2..]).starts_with(b"<-")
        }
        b"label" => {
            let w2 = rest
                .iter()
                .position(|&b| !is_word_byte(b))
                .unwrap_or(rest.len());
            w2 > 0 && trim_start(&rest[w2..]).starts_with(b"=")
        }
        _ => rest.starts_with(b"<-"),
    }
}

// --- lexer -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    CharLit(u8),
    StrLit(Vec<u8>),
    ClassLit(CharClass),
    Dot,
    Bang,
    Amp,
    StarOp,
    PlusOp,
    Question,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Equals,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex_tokens(text: &[u8], decl: DeclSpan) -> Result<Vec<Token>, GrammarError> {
    let mut tokens = Vec::new();
    let mut i = decl.start;
    let end = decl.end;
    while i < end {
        let b = text[i];
        if b == b' ' || b == b'\t' || b == b'\r' || b == b'\n' {
            i += 1;
            continue;
        }
        if b == b'#' {
            while i < end && text[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match b {
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b'!' => {
                i += 1;
                Tok::Bang
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'*' => {
                i += 1;
                Tok::StarOp
            }
            b'+' => {
                i += 1;
                Tok::PlusOp
            }
            b'?' => {
                i += 1;
                Tok::Question
            }
            b'/' => {
                i += 1;
                Tok::Slash
            }
            b'^' => {
                i += 1;
                Tok::Caret
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'{' => {
                i += 1;
                Tok::LBrace
            }
            b'}' => {
                i += 1;
                Tok::RBrace
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'=' => {
                i += 1;
                Tok::Equals
            }
            b'<' => {
                if text.get(i + 1) == Some(&b'-') {
                    i += 2;
                    Tok::Arrow
                } else {
                    return Err(err_at(
                        GrammarErrorKind::Malformed,
                        start,
                        i + 1,
                        "stray '<'; terminals must be quoted",
                    ));
                }
            }
            b'\'' => {
                let (bytes, next) = lex_quoted(text, i, end, b'\'')?;
                i = next;
                if bytes.len() != 1 {
                    return Err(err_at(
                        GrammarErrorKind::Malformed,
                        start,
                        i,
                        "single quotes hold exactly one byte; use \"...\" for literals",
                    ));
                }
                Tok::CharLit(bytes[0])
            }
            b'"' => {
                let (bytes, next) = lex_quoted(text, i, end, b'"')?;
                i = next;
                Tok::StrLit(bytes)
            }
            b'[' => {
                let (class, next) = lex_class(text, i, end)?;
                i = next;
                Tok::ClassLit(class)
            }
            _ if is_word_byte(b) => {
                while i < end && is_word_byte(text[i]) {
                    i += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&text[start..i]).into_owned())
            }
            _ => {
                return Err(err_at(
                    GrammarErrorKind::Malformed,
                    start,
                    start + 1,
                    &format!("unexpected character '{}'", text[start] as char),
                ));
            }
        };
        tokens.push(Token {
            tok,
            span: SourceSpan::new(start, i),
        });
    }
    Ok(tokens)
}

fn err_at(kind: GrammarErrorKind, start: usize, end: usize, message: &str) -> GrammarError {
    GrammarError {
        kind,
        span: SourceSpan::new(start, end),
        message: message.to_owned(),
    }
}

/// Reads one possibly-escaped byte starting at `i`.
fn read_byte(text: &[u8], i: usize, end: usize) -> Result<(u8, usize), GrammarError> {
    if text[i] != b'\\' {
        return Ok((text[i], i + 1));
    }
    let esc = text.get(i + 1).copied().filter(|_| i + 1 < end);
    let b = match esc {
        Some(b'n') => b'\n',
        Some(b't') => b'\t',
        Some(b'r') => b'\r',
        Some(b'0') => 0,
        Some(b'\\') => b'\\',
        Some(b'\'') => b'\'',
        Some(b'"') => b'"',
        Some(b'[') => b'[',
        Some(b']') => b']',
        Some(b'-') => b'-',
        Some(b'x') => {
            let hex = |j: usize| -> Option<u8> {
                text.get(j)
                    .filter(|_| j < end)
                    .and_then(|&c| (c as char).to_digit(16))
                    .map(|d| d as u8)
            };
            match (hex(i + 2), hex(i + 3)) {
                (Some(hi), Some(lo)) => return Ok((hi * 16 + lo, i + 4)),
                _ => {
                    return Err(err_at(
                        GrammarErrorKind::UnknownEscape,
                        i,
                        (i + 4).min(end),
                        "\\x escape needs two hex digits",
                    ))
                }
            }
        }
        _ => {
            return Err(err_at(
                GrammarErrorKind::UnknownEscape,
                i,
                (i + 2).min(end),
                "unknown escape sequence",
            ))
        }
    };
    Ok((b, i + 2))
}

fn lex_quoted(
    text: &[u8],
    open: usize,
    end: usize,
    quote: u8,
) -> Result<(Vec<u8>, usize), GrammarError> {
    let mut bytes = Vec::new();
    let mut i = open + 1;
    while i < end && text[i] != quote {
        if text[i] == b'\n' {
            break;
        }
        let (b, next) = read_byte(text, i, end)?;
        bytes.push(b);
        i = next;
    }
    if i >= end || text[i] != quote {
        return Err(err_at(
            GrammarErrorKind::Malformed,
            open,
            i.min(end),
            "unterminated quoted atom",
        ));
    }
    Ok((bytes, i + 1))
}

fn lex_class(text: &[u8], open: usize, end: usize) -> Result<(CharClass, usize), GrammarError> {
    let mut ranges: Vec<(u8, u8)> = Vec::new();
    let mut i = open + 1;
    while i < end && text[i] != b']' {
        if text[i] == b'\n' {
            break;
        }
        let (lo, next) = read_byte(text, i, end)?;
        i = next;
        if i + 1 < end && text[i] == b'-' && text[i + 1] != b']' {
            let (hi, next) = read_byte(text, i + 1, end)?;
            i = next;
            ranges.push((lo, hi));
        } else {
            ranges.push((lo, lo));
        }
    }
    if i >= end || text[i] != b']' {
        return Err(err_at(
            GrammarErrorKind::Malformed,
            open,
            i.min(end),
            "unterminated character class",
        ));
    }
    if ranges.is_empty() {
        return Err(err_at(
            GrammarErrorKind::Malformed,
            open,
            i + 1,
            "character class must not be empty",
        ));
    }
    let display = String::from_utf8_lossy(&text[open..=i]).into_owned();
    Ok((CharClass::new(ranges, display), i + 1))
}

// --- parser -------------------------------------------------------------------

struct ParsedRule {
    name: String,
    name_span: SourceSpan,
    lexical: bool,
    body: Surface,
    /// Non-terminal references with their spans, for resolution checks.
    refs: Vec<(String, SourceSpan)>,
}

enum Decl {
    Rule(ParsedRule),
    Label {
        name: String,
        message: String,
        span: SourceSpan,
    },
}

struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
    decl_end: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Tok> {
        self.tokens.get(self.at).map(|t| &t.tok)
    }

    fn peek_span(&self) -> SourceSpan {
        self.tokens
            .get(self.at)
            .map(|t| t.span)
            .unwrap_or(SourceSpan::new(self.decl_end, self.decl_end))
    }

    fn next(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.at);
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn err(&self, message: String) -> GrammarError {
        GrammarError {
            kind: GrammarErrorKind::Malformed,
            span: self.peek_span(),
            message,
        }
    }

    fn expect_tok(&mut self, want: &Tok, what: &str) -> Result<SourceSpan, GrammarError> {
        match self.tokens.get(self.at) {
            Some(t) if t.tok == *want => {
                self.at += 1;
                Ok(t.span)
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), GrammarError> {
        match self.tokens.get(self.at) {
            Some(Token {
                tok: Tok::Ident(name),
                span,
            }) => {
                self.at += 1;
                Ok((name.clone(), *span))
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn parse_declaration(&mut self) -> Result<Decl, GrammarError> {
        let (first, first_span) = self.ident("a rule name")?;
        if first == "label" {
            let (name, span) = self.ident("a label name")?;
            self.expect_tok(&Tok::Equals, "'=' after the label name")?;
            let message = match self.next() {
                Some(Token {
                    tok: Tok::StrLit(bytes),
                    ..
                }) => String::from_utf8_lossy(bytes).into_owned(),
                _ => return Err(self.err("expected a quoted message".to_owned())),
            };
            self.expect_end()?;
            return Ok(Decl::Label {
                name,
                message,
                span,
            });
        }

        let (lexical, name, name_span) = if first == "lex" {
            let (name, span) = self.ident("a rule name after 'lex'")?;
            (true, name, span)
        } else {
            (false, first, first_span)
        };

        if RESERVED.contains(&name.as_str()) {
            return Err(GrammarError {
                kind: GrammarErrorKind::ReservedName,
                span: name_span,
                message: format!("'{}' is reserved and cannot name a rule", name),
            });
        }
        if name.as_bytes()[0].is_ascii_digit() {
            return Err(GrammarError {
                kind: GrammarErrorKind::Malformed,
                span: name_span,
                message: "rule names cannot start with a digit".to_owned(),
            });
        }

        self.expect_tok(&Tok::Arrow, "'<-' after the rule name")?;
        let mut refs = Vec::new();
        let body = self.parse_expression(&mut refs)?;
        self.expect_end()?;
        Ok(Decl::Rule(ParsedRule {
            name,
            name_span,
            lexical,
            body,
            refs,
        }))
    }

    fn expect_end(&mut self) -> Result<(), GrammarError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("unexpected trailing content".to_owned())),
        }
    }

    fn parse_expression(
        &mut self,
        refs: &mut Vec<(String, SourceSpan)>,
    ) -> Result<Surface, GrammarError> {
        let mut acc = self.parse_sequence(refs)?;
        while self.peek() == Some(&Tok::Slash) {
            self.next();
            let catch = if self.peek() == Some(&Tok::LBrace) {
                self.next();
                let mut labels = BTreeSet::new();
                loop {
                    let (name, _) = self.ident("a label inside the catch set")?;
                    labels.insert(Label::new(name));
                    match self.next() {
                        Some(Token {
                            tok: Tok::Comma, ..
                        }) => continue,
                        Some(Token {
                            tok: Tok::RBrace, ..
                        }) => break,
                        _ => return Err(self.err("expected ',' or '}'".to_owned())),
                    }
                }
                labels
            } else {
                BTreeSet::from([Label::fail()])
            };
            let rhs = self.parse_sequence(refs)?;
            acc = Surface::Choice(Box::new(acc), Box::new(rhs), catch);
        }
        Ok(acc)
    }

    fn starts_primary(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Tok::Ident(_)
                    | Tok::CharLit(_)
                    | Tok::StrLit(_)
                    | Tok::ClassLit(_)
                    | Tok::Dot
                    | Tok::Bang
                    | Tok::Amp
                    | Tok::Caret
                    | Tok::LParen
            )
        )
    }

    fn parse_sequence(
        &mut self,
        refs: &mut Vec<(String, SourceSpan)>,
    ) -> Result<Surface, GrammarError> {
        let mut acc = self.parse_prefix(refs)?;
        while self.starts_primary() {
            let rhs = self.parse_prefix(refs)?;
            acc = Surface::Sequence(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_prefix(
        &mut self,
        refs: &mut Vec<(String, SourceSpan)>,
    ) -> Result<Surface, GrammarError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.next();
                Ok(Surface::Not(Box::new(self.parse_prefix(refs)?)))
            }
            Some(Tok::Amp) => {
                self.next();
                Ok(Surface::And(Box::new(self.parse_prefix(refs)?)))
            }
            _ => self.parse_postfix(refs),
        }
    }

    fn parse_postfix(
        &mut self,
        refs: &mut Vec<(String, SourceSpan)>,
    ) -> Result<Surface, GrammarError> {
        let mut acc = self.parse_primary(refs)?;
        loop {
            match self.peek() {
                Some(Tok::StarOp) => {
                    self.next();
                    acc = Surface::Star(Box::new(acc));
                }
                Some(Tok::PlusOp) => {
                    self.next();
                    acc = Surface::Plus(Box::new(acc));
                }
                Some(Tok::Question) => {
                    self.next();
                    acc = Surface::Opt(Box::new(acc));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_primary(
        &mut self,
        refs: &mut Vec<(String, SourceSpan)>,
    ) -> Result<Surface, GrammarError> {
        let token = match self.next() {
            Some(t) => t,
            None => {
                return Err(GrammarError {
                    kind: GrammarErrorKind::Malformed,
                    span: SourceSpan::new(self.decl_end, self.decl_end),
                    message: "expected an expression".to_owned(),
                })
            }
        };
        match &token.tok {
            Tok::CharLit(b) => Ok(Surface::Terminal(*b)),
            Tok::StrLit(bytes) if bytes.is_empty() => Err(GrammarError {
                kind: GrammarErrorKind::Malformed,
                span: token.span,
                message: "literal text must be non-empty".to_owned(),
            }),
            Tok::StrLit(bytes) => Ok(Surface::Literal(bytes.clone())),
            Tok::ClassLit(c) => Ok(Surface::Class(c.clone())),
            Tok::Dot => Ok(Surface::Any),
            Tok::Caret => {
                let (name, _) = self.ident("a label after '^'")?;
                Ok(Surface::Throw(Label::new(name)))
            }
            Tok::LParen => {
                let inner = self.parse_expression(refs)?;
                self.expect_tok(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "e" => Ok(Surface::Empty),
                "try" | "nofail" | "expect" => {
                    let kind = name.clone();
                    self.expect_tok(&Tok::LParen, &format!("'(' after '{}'", kind))?;
                    let inner = self.parse_expression(refs)?;
                    let surface = match kind.as_str() {
                        "try" => Surface::Try(Box::new(inner)),
                        "nofail" => Surface::Nofail(Box::new(inner)),
                        _ => {
                            self.expect_tok(&Tok::Comma, "',' before the label")?;
                            let (label, _) = self.ident("a label")?;
                            Surface::Expect(Box::new(inner), Label::new(label))
                        }
                    };
                    self.expect_tok(&Tok::RParen, "')'")?;
                    Ok(surface)
                }
                "lex" | "label" => Err(GrammarError {
                    kind: GrammarErrorKind::ReservedName,
                    span: token.span,
                    message: format!("'{}' is reserved and cannot be referenced", name),
                }),
                _ if name.as_bytes()[0].is_ascii_digit() => Err(GrammarError {
                    kind: GrammarErrorKind::Malformed,
                    span: token.span,
                    message: format!("'{}' cannot start an expression", name),
                }),
                _ => {
                    refs.push((name.clone(), token.span));
                    Ok(Surface::NonTerminal(name.clone()))
                }
            },
            other => Err(GrammarError {
                kind: GrammarErrorKind::Malformed,
                span: token.span,
                message: format!("unexpected token {:?} in expression", other),
            }),
        }
    }
}
