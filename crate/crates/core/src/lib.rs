//! A parsing-expression-grammar engine built around error reporting.
//!
//! The same grammar can be matched under four semantics: plain PEG
//! matching, farthest-failure tracking, farthest failure with expected
//! lists, and labeled failures. On top of that sit grammar transforms (star
//! desugaring, the four-values encoding, try/nofail boundaries) and a
//! diagnostics layer that renders precise `file:line:col` syntax errors.

pub mod diag;
pub mod engine;
pub mod expr;
pub mod grammar;
pub mod text;
pub mod transform;

pub use diag::{line_col, render_ffl, render_label, unexpected_lexeme, Diagnostic};
pub use engine::{
    join, join_var, smallest, Engine, EngineError, ExpectedItem, FailureRecord, LabeledResult,
    PlainResult, Position, VarStrategy, DEFAULT_STEP_BUDGET,
};
pub use expr::{CharClass, Expr, Label};
pub use grammar::{nullable, validate, Grammar, IssueKind, ValidationIssue};
pub use text::{
    desugar, parse_grammar, write_grammar, GrammarError, GrammarErrorKind, SourceSpan, Surface,
};
pub use transform::{
    classify_outcome, desugar_star, expand_nofail, expand_try, four_values, FourValue,
    TransformError,
};
