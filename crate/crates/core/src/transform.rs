//! Grammar-to-grammar rewrites: star desugaring, the four-values encoding,
//! and the try/nofail boundaries.
//!
//! The four-values encoding drives matching with three labels. `epsn` means
//! success without consuming, plain success means consuming success, `fail`
//! means failure without consuming, and `error` means failure after
//! consuming. Sequence and choice are rewritten so that `error` aborts
//! backtracking on its own; `try` turns an `error` back into `fail` where
//! arbitrary lookahead is wanted, and `nofail` turns `fail` into `error`.

use std::fmt;

use crate::engine::{LabeledResult, Position};
use crate::expr::{Expr, Label};
use crate::grammar::Grammar;

/// Outcome classification for a four-values-translated parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourValue {
    /// Success consuming some input, up to the given end.
    Ok(Position),
    /// Success consuming nothing.
    Epsn,
    /// Failure consuming nothing; backtracking may continue.
    Fail,
    /// Failure after consuming input; aborts backtracking.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    /// The four-values translation covers neither repetition nor predicates.
    Unsupported {
        construct: &'static str,
        rule: String,
    },
    /// A grammar label collides with one the translation introduces.
    LabelInUse(Label),
    /// A translated parse produced a label the classification cannot place.
    UnexpectedLabel(Label),
    /// A translated parse succeeded consuming nothing; translated grammars
    /// throw `epsn` instead, so this flags a translation defect.
    EmptySuccess(Position),
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::Unsupported { construct, rule } => {
                write!(
                    f,
                    "four-values translation cannot handle {} (rule '{}')",
                    construct, rule
                )
            }
            TransformError::LabelInUse(l) => {
                write!(
                    f,
                    "label '{}' is reserved by the four-values translation",
                    l
                )
            }
            TransformError::UnexpectedLabel(l) => {
                write!(f, "translated parse raised unexpected label '{}'", l)
            }
            TransformError::EmptySuccess(p) => {
                write!(f, "translated parse succeeded emptily at {}", p)
            }
        }
    }
}

impl std::error::Error for TransformError {}

/// Replaces every repetition with a fresh rule: `p*` becomes a reference to
/// `A` with `A <- p A / e`. Matching behaviour under the labeled semantics
/// is preserved exactly, including raised labels and their positions.
pub fn desugar_star(grammar: &Grammar) -> Grammar {
    let mut out = Grammar::new(grammar.start());
    let mut taken: Vec<String> = grammar.rules().map(|(n, _)| n.to_owned()).collect();
    let mut fresh: Vec<(String, Expr)> = Vec::new();
    let mut counter = 0usize;

    for (name, body) in grammar.rules() {
        let body = strip_stars(body, &mut taken, &mut fresh, &mut counter);
        if grammar.is_lexical(name) {
            out.add_lexical_rule(name, body);
        } else {
            out.add_rule(name, body);
        }
    }
    for (name, body) in fresh {
        out.add_rule(name, body);
    }
    for label in grammar.labels() {
        out.declare_label(label.clone());
    }
    for (label, message) in grammar.messages() {
        out.set_message(label.clone(), message);
    }
    out
}

fn strip_stars(
    expr: &Expr,
    taken: &mut Vec<String>,
    fresh: &mut Vec<(String, Expr)>,
    counter: &mut usize,
) -> Expr {
    match expr {
        Expr::Star(body) => {
            let body = strip_stars(body, taken, fresh, counter);
            let name = loop {
                let candidate = format!("Star_{}", *counter);
                *counter += 1;
                if !taken.iter().any(|n| n == &candidate) {
                    break candidate;
                }
            };
            taken.push(name.clone());
            let rec = Expr::choice(Expr::seq(body, Expr::nt(name.clone())), Expr::Empty);
            fresh.push((name.clone(), rec));
            Expr::nt(name)
        }
        Expr::Sequence(l, r) => Expr::seq(
            strip_stars(l, taken, fresh, counter),
            strip_stars(r, taken, fresh, counter),
        ),
        Expr::Choice { left, right, catch } => Expr::choice_catch(
            strip_stars(left, taken, fresh, counter),
            strip_stars(right, taken, fresh, counter),
            catch.iter().cloned(),
        ),
        Expr::Not(b) => Expr::not(strip_stars(b, taken, fresh, counter)),
        other => other.clone(),
    }
}

fn epsn() -> Label {
    Label::new("epsn")
}

fn error() -> Label {
    Label::new("error")
}

/// True for the shape `try` leaves behind: `p /{error} ^fail`.
fn as_try_marker(expr: &Expr) -> Option<&Expr> {
    if let Expr::Choice { left, right, catch } = expr {
        let catches_error_only = catch.len() == 1 && catch.contains(&error());
        if catches_error_only {
            if let Expr::Throw(l) = right.as_ref() {
                if l.is_fail() {
                    return Some(left);
                }
            }
        }
    }
    None
}

/// Applies the four-values translation to every rule body.
///
/// The input must be star-free (run `desugar_star` first) and free of
/// predicates and throws, except for `try` boundaries, which are translated
/// through. The output grammar drives matching with the labels `epsn`,
/// `fail` and `error`; classify the outcome with `classify_outcome`.
pub fn four_values(grammar: &Grammar) -> Result<Grammar, TransformError> {
    let mut out = Grammar::new(grammar.start());
    for (name, body) in grammar.rules() {
        check_labels_fresh(name, body)?;
        let translated = translate(name, body)?;
        if grammar.is_lexical(name) {
            out.add_lexical_rule(name, translated);
        } else {
            out.add_rule(name, translated);
        }
    }
    for label in grammar.labels() {
        out.declare_label(label.clone());
    }
    for (label, message) in grammar.messages() {
        out.set_message(label.clone(), message);
    }
    out.declare_label(epsn());
    out.declare_label(error());
    out.declare_used_labels();
    Ok(out)
}

/// Walks a rule body looking for uses of the translation's own labels.
/// Try markers are skipped over; they are the one sanctioned use.
fn check_labels_fresh(_rule: &str, body: &Expr) -> Result<(), TransformError> {
    fn walk(expr: &Expr, clash: &mut Option<Label>) {
        if let Some(inner) = as_try_marker(expr) {
            walk(inner, clash);
            return;
        }
        match expr {
            Expr::Throw(l) if *l == epsn() || *l == error() => {
                clash.get_or_insert(l.clone());
            }
            Expr::Choice { left, right, catch } => {
                for reserved in [epsn(), error()] {
                    if catch.contains(&reserved) {
                        clash.get_or_insert(reserved);
                    }
                }
                walk(left, clash);
                walk(right, clash);
            }
            Expr::Sequence(l, r) => {
                walk(l, clash);
                walk(r, clash);
            }
            Expr::Star(b) | Expr::Not(b) => walk(b, clash),
            _ => {}
        }
    }
    let mut clash = None;
    walk(body, &mut clash);
    match clash {
        Some(l) => Err(TransformError::LabelInUse(l)),
        None => Ok(()),
    }
}

fn translate(rule: &str, expr: &Expr) -> Result<Expr, TransformError> {
    if let Some(inner) = as_try_marker(expr) {
        // try p  =  [p] /{error} ^fail
        return Ok(Expr::choice_catch(
            translate(rule, inner)?,
            Expr::Throw(Label::fail()),
            [error()],
        ));
    }
    match expr {
        Expr::Empty => Ok(Expr::Throw(epsn())),
        Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) => Ok(expr.clone()),
        Expr::NonTerminal(_) => Ok(expr.clone()),
        Expr::Sequence(p1, p2) => {
            let t1 = translate(rule, p1)?;
            let t2 = translate(rule, p2)?;
            // [p1 p2] = (t1 ((t2 / ^error) /{epsn} e)) /{epsn} t2
            let tail = Expr::choice_catch(
                Expr::choice(t2.clone(), Expr::Throw(error())),
                Expr::Empty,
                [epsn()],
            );
            Ok(Expr::choice_catch(Expr::seq(t1, tail), t2, [epsn()]))
        }
        Expr::Choice { left, right, catch } => {
            let default = catch.len() == 1 && catch.iter().all(Label::is_fail);
            if !default {
                return Err(TransformError::Unsupported {
                    construct: "a labeled choice",
                    rule: rule.to_owned(),
                });
            }
            let t1 = translate(rule, left)?;
            let t2 = translate(rule, right)?;
            // [p1 / p2] = (t1 /{epsn} (t2 / ^epsn)) / t2
            let guarded =
                Expr::choice_catch(t1, Expr::choice(t2.clone(), Expr::Throw(epsn())), [epsn()]);
            Ok(Expr::choice(guarded, t2))
        }
        Expr::Star(_) => Err(TransformError::Unsupported {
            construct: "repetition (desugar stars first)",
            rule: rule.to_owned(),
        }),
        Expr::Not(_) => Err(TransformError::Unsupported {
            construct: "a predicate",
            rule: rule.to_owned(),
        }),
        Expr::Throw(_) => Err(TransformError::Unsupported {
            construct: "a throw",
            rule: rule.to_owned(),
        }),
    }
}

/// Wraps an already-translated expression in a try boundary:
/// `[try p] = [p] /{error} ^fail`.
pub fn expand_try(translated: Expr) -> Expr {
    Expr::choice_catch(translated, Expr::Throw(Label::fail()), [error()])
}

/// Wraps an expression so that its failure aborts backtracking:
/// `nofail p = p / ^error`. The `error` label must be declared.
pub fn expand_nofail(expr: Expr) -> Expr {
    Expr::choice(expr, Expr::Throw(error()))
}

/// Classifies the outcome of matching a four-values-translated grammar.
pub fn classify_outcome(
    result: &LabeledResult,
    start: Position,
) -> Result<FourValue, TransformError> {
    match result {
        LabeledResult::Consumed(end) if *end > start => Ok(FourValue::Ok(*end)),
        LabeledResult::Consumed(end) => Err(TransformError::EmptySuccess(*end)),
        LabeledResult::Raised(l, _) if *l == epsn() => Ok(FourValue::Epsn),
        LabeledResult::Raised(l, _) if l.is_fail() => Ok(FourValue::Fail),
        LabeledResult::Raised(l, _) if *l == error() => Ok(FourValue::Error),
        LabeledResult::Raised(l, _) => Err(TransformError::UnexpectedLabel(l.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Engine;
    use crate::grammar::validate;

    fn single(name: &str, body: Expr) -> Grammar {
        let mut g = Grammar::new(name);
        g.add_rule(name, body);
        g.declare_used_labels();
        g
    }

    fn run_four_values(g: &Grammar, input: &[u8]) -> FourValue {
        let translated = four_values(g).expect("translation should succeed");
        let (res, _) = Engine::new(&translated).match_labeled(input, 0).unwrap();
        classify_outcome(&res, 0).expect("classification should succeed")
    }

    #[test]
    fn desugar_star_introduces_fresh_rule() {
        let g = single("S", Expr::star(Expr::term(b'a')));
        let out = desugar_star(&g);
        assert_eq!(out.rule("S").unwrap(), &Expr::nt("Star_0"));
        assert_eq!(
            out.rule("Star_0").unwrap(),
            &Expr::choice(Expr::seq(Expr::term(b'a'), Expr::nt("Star_0")), Expr::Empty)
        );
        assert!(validate(&out).is_empty());
    }

    #[test]
    fn desugar_star_leaves_star_free_grammars_alone() {
        let g = single("S", Expr::seq(Expr::term(b'a'), Expr::term(b'b')));
        assert_eq!(desugar_star(&g).rule("S"), g.rule("S"));
    }

    #[test]
    fn desugar_star_avoids_name_collisions() {
        let mut g = Grammar::new("S");
        g.add_rule(
            "S",
            Expr::seq(Expr::nt("Star_0"), Expr::star(Expr::term(b'a'))),
        );
        g.add_rule("Star_0", Expr::term(b'x'));
        let out = desugar_star(&g);
        assert!(out.rule("Star_1").is_some());
        assert_eq!(out.rule("Star_0").unwrap(), &Expr::term(b'x'));
    }

    #[test]
    fn nested_star_desugaring_is_rejected_by_validate() {
        let g = single("S", Expr::star(Expr::star(Expr::term(b'a'))));
        let out = desugar_star(&g);
        assert!(!validate(&out).is_empty());
    }

    #[test]
    fn translated_grammar_declares_the_driving_labels() {
        let g = single("S", Expr::choice(Expr::term(b'a'), Expr::Empty));
        let out = four_values(&g).unwrap();
        for l in [Label::fail(), epsn(), error()] {
            assert!(out.labels().contains(&l), "missing {}", l);
        }
        assert!(validate(&out).is_empty());
    }

    #[test]
    fn sequence_error_row() {
        // ['a' 'b'] on "ac": 'a' consumes, then 'b' fails after input was
        // consumed, which is an error.
        let g = single("S", Expr::seq(Expr::term(b'a'), Expr::term(b'b')));
        assert_eq!(run_four_values(&g, b"ac"), FourValue::Error);
    }

    #[test]
    fn choice_second_alternative_row() {
        let g = single("S", Expr::choice(Expr::term(b'a'), Expr::term(b'b')));
        assert_eq!(run_four_values(&g, b"b"), FourValue::Ok(1));
    }

    #[test]
    fn choice_epsn_row() {
        let g = single("S", Expr::choice(Expr::Empty, Expr::term(b'b')));
        assert_eq!(run_four_values(&g, b"z"), FourValue::Epsn);
    }

    #[test]
    fn four_values_rejects_predicates_stars_and_throws() {
        for bad in [
            Expr::not(Expr::term(b'a')),
            Expr::star(Expr::term(b'a')),
            Expr::throw("x"),
        ] {
            let g = single("S", bad);
            assert!(four_values(&g).is_err());
        }
    }

    #[test]
    fn four_values_rejects_reserved_labels() {
        let g = single("S", Expr::throw("epsn"));
        assert_eq!(
            four_values(&g).unwrap_err(),
            TransformError::LabelInUse(Label::new("epsn"))
        );
    }

    fn spelled(word: &str) -> Expr {
        Expr::seq_all(word.bytes().map(Expr::term))
    }

    #[test]
    fn try_converts_error_to_fail() {
        // try("repeat") against "read": the spelled-out keyword consumes
        // "re" and then errors; the boundary turns that into a failure.
        let with_try = single(
            "S",
            Expr::choice_catch(spelled("repeat"), Expr::Throw(Label::fail()), [error()]),
        );
        assert_eq!(run_four_values(&with_try, b"read"), FourValue::Fail);

        let without = single("S", spelled("repeat"));
        assert_eq!(run_four_values(&without, b"read"), FourValue::Error);
    }

    #[test]
    fn try_restores_backtracking_in_a_choice() {
        let try_repeat =
            Expr::choice_catch(spelled("repeat"), Expr::Throw(Label::fail()), [error()]);
        let with_try = single("S", Expr::choice(try_repeat, spelled("read")));
        assert_eq!(run_four_values(&with_try, b"read x;"), FourValue::Ok(4));

        let without = single("S", Expr::choice(spelled("repeat"), spelled("read")));
        assert_eq!(run_four_values(&without, b"read x;"), FourValue::Error);
    }

    #[test]
    fn try_over_success_changes_nothing() {
        let plain = single("S", spelled("read"));
        let with_try = single(
            "S",
            Expr::choice_catch(spelled("read"), Expr::Throw(Label::fail()), [error()]),
        );
        assert_eq!(
            run_four_values(&plain, b"read"),
            run_four_values(&with_try, b"read")
        );
    }

    #[test]
    fn nofail_turns_failure_into_error() {
        let mut g = Grammar::new("S");
        g.add_rule("S", expand_nofail(Expr::term(b';')));
        g.declare_used_labels();
        let (res, _) = Engine::new(&g).match_labeled(b"x", 0).unwrap();
        assert_eq!(res, LabeledResult::Raised(Label::new("error"), 0));
    }

    #[test]
    fn nofail_passes_success_through() {
        let mut g = Grammar::new("S");
        g.add_rule("S", expand_nofail(Expr::term(b';')));
        g.declare_used_labels();
        let (res, _) = Engine::new(&g).match_labeled(b";", 0).unwrap();
        assert_eq!(res, LabeledResult::Consumed(1));
    }

    #[test]
    fn nested_nofail_is_observationally_single() {
        let cases: &[(&[u8], Expr)] = &[
            (b"ab", Expr::seq(Expr::term(b'a'), Expr::term(b'b'))),
            (b"x", Expr::term(b'a')),
            (b"", Expr::term(b'a')),
            (b"a", Expr::choice(Expr::term(b'a'), Expr::term(b'b'))),
        ];
        for (input, p) in cases {
            let mut g1 = Grammar::new("S");
            g1.add_rule("S", expand_nofail(p.clone()));
            g1.declare_used_labels();
            let mut g2 = Grammar::new("S");
            g2.add_rule("S", expand_nofail(expand_nofail(p.clone())));
            g2.declare_used_labels();
            let r1 = Engine::new(&g1).match_labeled(input, 0).unwrap().0;
            let r2 = Engine::new(&g2).match_labeled(input, 0).unwrap().0;
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn translated_terminals_never_yield_epsn_or_error() {
        for body in [Expr::term(b'a'), Expr::lit("ab"), Expr::Any] {
            let g = single("S", body);
            for input in [&b"ab"[..], b"a", b"z", b""] {
                let got = run_four_values(&g, input);
                assert!(
                    matches!(got, FourValue::Ok(_) | FourValue::Fail),
                    "{:?} on {:?} gave {:?}",
                    g.rule("S"),
                    input,
                    got
                );
            }
        }
    }

    #[test]
    fn classify_trivials() {
        assert_eq!(
            classify_outcome(&LabeledResult::Consumed(3), 0),
            Ok(FourValue::Ok(3))
        );
        assert_eq!(
            classify_outcome(&LabeledResult::Raised(Label::new("epsn"), 0), 0),
            Ok(FourValue::Epsn)
        );
        assert_eq!(
            classify_outcome(&LabeledResult::Raised(Label::new("error"), 2), 0),
            Ok(FourValue::Error)
        );
        assert_eq!(
            classify_outcome(&LabeledResult::Raised(Label::fail(), 0), 0),
            Ok(FourValue::Fail)
        );
    }

    #[test]
    fn classify_flags_empty_success_and_foreign_labels() {
        assert_eq!(
            classify_outcome(&LabeledResult::Consumed(2), 2),
            Err(TransformError::EmptySuccess(2))
        );
        assert_eq!(
            classify_outcome(&LabeledResult::Raised(Label::new("other"), 0), 0),
            Err(TransformError::UnexpectedLabel(Label::new("other")))
        );
    }

    #[test]
    fn ll1_fixtures_agree_with_plain_verdict() {
        let fixtures: Vec<(Expr, Vec<&[u8]>)> = vec![
            (
                Expr::choice(Expr::term(b'a'), Expr::term(b'b')),
                vec![b"a", b"b", b"c", b""],
            ),
            (
                Expr::seq(
                    Expr::term(b'a'),
                    Expr::choice(Expr::term(b'b'), Expr::Empty),
                ),
                vec![b"ab", b"a", b"ax", b"x"],
            ),
            (
                Expr::choice(Expr::seq(Expr::term(b'a'), Expr::term(b'b')), Expr::Empty),
                vec![b"ab", b"", b"zz"],
            ),
        ];
        for (body, inputs) in fixtures {
            let g = single("S", body);
            let translated = four_values(&g).unwrap();
            for input in inputs {
                let plain = Engine::new(&g).match_plain(input, 0).unwrap();
                let (res, _) = Engine::new(&translated).match_labeled(input, 0).unwrap();
                let fv = classify_outcome(&res, 0).unwrap();
                match plain {
                    crate::engine::PlainResult::Consumed(_) => {
                        assert!(matches!(fv, FourValue::Ok(_) | FourValue::Epsn))
                    }
                    crate::engine::PlainResult::Failed => {
                        assert!(matches!(fv, FourValue::Fail | FourValue::Error))
                    }
                }
            }
        }
    }
}
