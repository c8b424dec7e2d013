//! Grammar model and static well-formedness checks.
//!
//! `validate` performs a conservative analysis (no left recursion, no
//! nullable star body) so that every matching mode terminates on every
//! finite input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;

use crate::expr::{Expr, Label};

/// A grammar: named rules in declaration order, a start rule, the label set,
/// lexical-rule flags, and the label-to-message catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    rules: IndexMap<String, Expr>,
    start: String,
    labels: BTreeSet<Label>,
    lexical: BTreeSet<String>,
    messages: BTreeMap<Label, String>,
}

impl Grammar {
    /// Creates an empty grammar. The `fail` label is always present.
    pub fn new(start: impl Into<String>) -> Self {
        let mut labels = BTreeSet::new();
        labels.insert(Label::fail());
        Grammar {
            rules: IndexMap::new(),
            start: start.into(),
            labels,
            lexical: BTreeSet::new(),
            messages: BTreeMap::new(),
        }
    }

    /// Adds or replaces a rule. Rules keep their insertion order.
    pub fn add_rule(&mut self, name: impl Into<String>, body: Expr) {
        self.rules.insert(name.into(), body);
    }

    /// Adds a rule and flags it lexical: in the expected-list semantics it
    /// reports errors like a single token.
    pub fn add_lexical_rule(&mut self, name: impl Into<String>, body: Expr) {
        let name = name.into();
        self.lexical.insert(name.clone());
        self.rules.insert(name, body);
    }

    pub fn rule(&self, name: &str) -> Option<&Expr> {
        self.rules.get(name)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.rules.iter().map(|(n, e)| (n.as_str(), e))
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn set_start(&mut self, start: impl Into<String>) {
        self.start = start.into();
    }

    pub fn is_lexical(&self, name: &str) -> bool {
        self.lexical.contains(name)
    }

    pub fn mark_lexical(&mut self, name: impl Into<String>) {
        self.lexical.insert(name.into());
    }

    pub fn declare_label(&mut self, label: Label) {
        self.labels.insert(label);
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn set_message(&mut self, label: Label, message: impl Into<String>) {
        self.labels.insert(label.clone());
        self.messages.insert(label, message.into());
    }

    pub fn message(&self, label: &Label) -> Option<&str> {
        self.messages.get(label).map(String::as_str)
    }

    pub fn messages(&self) -> impl Iterator<Item = (&Label, &str)> {
        self.messages.iter().map(|(l, m)| (l, m.as_str()))
    }

    /// Adds every label that appears in a throw or a catch set to the label
    /// set. Grammar files declare labels implicitly by using them.
    pub fn declare_used_labels(&mut self) {
        let mut used: BTreeSet<Label> = BTreeSet::new();
        for (_, body) in self.rules.iter() {
            body.for_each(&mut |e| match e {
                Expr::Throw(l) => {
                    used.insert(l.clone());
                }
                Expr::Choice { catch, .. } => {
                    used.extend(catch.iter().cloned());
                }
                _ => {}
            });
        }
        self.labels.extend(used);
    }

    /// True when any rule contains a throw operator.
    pub fn uses_throw(&self) -> bool {
        let mut found = false;
        for (_, body) in self.rules.iter() {
            body.for_each(&mut |e| {
                if matches!(e, Expr::Throw(_)) {
                    found = true;
                }
            });
        }
        found
    }
}

/// What a validation issue is about. The list is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    UnknownNonTerminal,
    UndeclaredLabel,
    LeftRecursion,
    NullableStarBody,
    EmptyGrammar,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IssueKind::UnknownNonTerminal => "unknown-nonterminal",
            IssueKind::UndeclaredLabel => "undeclared-label",
            IssueKind::LeftRecursion => "left-recursion",
            IssueKind::NullableStarBody => "nullable-star-body",
            IssueKind::EmptyGrammar => "empty-grammar",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub rule: String,
    pub detail: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in rule '{}': {}", self.kind, self.rule, self.detail)
    }
}

/// Checks the grammar for the defects that could make matching diverge or
/// reference something undefined. An empty result means every engine mode
/// terminates on every finite input.
///
/// Issues come out in a fixed order: reference problems rule by rule, then
/// left recursion, then nullable star bodies.
pub fn validate(grammar: &Grammar) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    if grammar.rule_count() == 0 {
        issues.push(ValidationIssue {
            kind: IssueKind::EmptyGrammar,
            rule: grammar.start().to_owned(),
            detail: "grammar has no rules".to_owned(),
        });
        return issues;
    }

    if grammar.rule(grammar.start()).is_none() {
        issues.push(ValidationIssue {
            kind: IssueKind::UnknownNonTerminal,
            rule: grammar.start().to_owned(),
            detail: format!("start rule '{}' is not defined", grammar.start()),
        });
    }

    for (name, body) in grammar.rules() {
        let mut seen_refs: BTreeSet<String> = BTreeSet::new();
        let mut seen_labels: BTreeSet<Label> = BTreeSet::new();
        body.for_each(&mut |e| match e {
            Expr::NonTerminal(target) => {
                if grammar.rule(target).is_none() && seen_refs.insert(target.clone()) {
                    issues.push(ValidationIssue {
                        kind: IssueKind::UnknownNonTerminal,
                        rule: name.to_owned(),
                        detail: format!("reference to undefined rule '{}'", target),
                    });
                }
            }
            Expr::Throw(l) => {
                if !grammar.labels().contains(l) && seen_labels.insert(l.clone()) {
                    issues.push(ValidationIssue {
                        kind: IssueKind::UndeclaredLabel,
                        rule: name.to_owned(),
                        detail: format!("throw of undeclared label '{}'", l),
                    });
                }
            }
            Expr::Choice { catch, .. } => {
                for l in catch {
                    if !grammar.labels().contains(l) && seen_labels.insert(l.clone()) {
                        issues.push(ValidationIssue {
                            kind: IssueKind::UndeclaredLabel,
                            rule: name.to_owned(),
                            detail: format!("catch of undeclared label '{}'", l),
                        });
                    }
                }
            }
            _ => {}
        });
    }

    let nullmap = rule_nullable(grammar);

    // A rule is left-recursive when it can reach itself through calls made
    // before any input is consumed.
    let heads: IndexMap<&str, BTreeSet<String>> = grammar
        .rules()
        .map(|(name, body)| {
            let mut set = BTreeSet::new();
            head_refs(body, &nullmap, &mut set);
            (name, set)
        })
        .collect();
    for (name, _) in grammar.rules() {
        let mut reachable: BTreeSet<String> = BTreeSet::new();
        let mut work: Vec<&str> = heads[name].iter().map(String::as_str).collect();
        while let Some(next) = work.pop() {
            if reachable.insert(next.to_owned()) {
                if let Some(hs) = heads.get(next) {
                    work.extend(hs.iter().map(String::as_str));
                }
            }
        }
        if reachable.contains(name) {
            issues.push(ValidationIssue {
                kind: IssueKind::LeftRecursion,
                rule: name.to_owned(),
                detail: format!("rule '{}' can invoke itself without consuming input", name),
            });
        }
    }

    for (name, body) in grammar.rules() {
        let mut reported = false;
        body.for_each(&mut |e| {
            if let Expr::Star(inner) = e {
                if expr_nullable(inner, &nullmap) && !reported {
                    reported = true;
                    issues.push(ValidationIssue {
                        kind: IssueKind::NullableStarBody,
                        rule: name.to_owned(),
                        detail: format!(
                            "repetition body '{}' can succeed without consuming",
                            inner
                        ),
                    });
                }
            }
        });
    }

    issues
}

/// True when some input exists on which `expr` can succeed consuming
/// nothing. Conservative: a negative predicate counts as nullable, a throw
/// never does.
pub fn nullable(expr: &Expr, grammar: &Grammar) -> bool {
    expr_nullable(expr, &rule_nullable(grammar))
}

fn rule_nullable(grammar: &Grammar) -> IndexMap<String, bool> {
    let mut map: IndexMap<String, bool> = grammar
        .rules()
        .map(|(n, _)| (n.to_owned(), false))
        .collect();
    loop {
        let mut changed = false;
        for (name, body) in grammar.rules() {
            if !map[name] && expr_nullable(body, &map) {
                map[name] = true;
                changed = true;
            }
        }
        if !changed {
            return map;
        }
    }
}

fn expr_nullable(expr: &Expr, rules: &IndexMap<String, bool>) -> bool {
    match expr {
        Expr::Empty | Expr::Star(_) | Expr::Not(_) => true,
        Expr::Terminal(_) | Expr::Any | Expr::Literal(_) | Expr::Class(_) | Expr::Throw(_) => false,
        Expr::NonTerminal(name) => rules.get(name).copied().unwrap_or(false),
        Expr::Sequence(l, r) => expr_nullable(l, rules) && expr_nullable(r, rules),
        Expr::Choice { left, right, .. } => {
            expr_nullable(left, rules) || expr_nullable(right, rules)
        }
    }
}

/// Rules reachable from `expr` before any input is consumed. Predicate and
/// star bodies run at the current position, so they count.
fn head_refs(expr: &Expr, rules: &IndexMap<String, bool>, out: &mut BTreeSet<String>) {
    match expr {
        Expr::NonTerminal(name) => {
            out.insert(name.clone());
        }
        Expr::Sequence(l, r) => {
            head_refs(l, rules, out);
            if expr_nullable(l, rules) {
                head_refs(r, rules, out);
            }
        }
        Expr::Choice { left, right, .. } => {
            head_refs(left, rules, out);
            head_refs(right, rules, out);
        }
        Expr::Star(body) | Expr::Not(body) => head_refs(body, rules, out),
        _ => {}
    }
}
