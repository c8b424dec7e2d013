//! Command-line driver: load a grammar, match an input file under a chosen
//! mode, print a diagnostic on failure.
//!
//! Exit status: 0 when the match consumed the input, 1 for a syntax error
//! in the input (one diagnostic on stderr), 2 for grammar-file errors,
//! validation issues or bad usage.

use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use pegfail::{
    classify_outcome, desugar_star, four_values, line_col, parse_grammar, render_ffl, render_label,
    unexpected_lexeme, validate, Engine, EngineError, FailureRecord, FourValue, Grammar,
    LabeledResult, PlainResult, Position, VarStrategy, DEFAULT_STEP_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Plain matching; reports the unconsumed suffix.
    Plain,
    /// Farthest failure position only.
    Farthest,
    /// Farthest failure with the expected-expression list.
    Expected,
    /// Labeled failures with per-label messages.
    Labeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Join,
    Propagate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Transform {
    None,
    FourValues,
}

#[derive(Debug, Parser)]
#[command(
    name = "pegfail",
    version,
    about = "Match inputs against a PEG under four error-reporting modes"
)]
struct Args {
    /// Grammar file.
    #[arg(long)]
    grammar: String,

    /// Input file to match.
    #[arg(long)]
    input: Option<String>,

    /// Matching mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Start from this rule instead of the first one.
    #[arg(long)]
    start: Option<String>,

    /// Accept a match that leaves an unconsumed suffix.
    #[arg(long)]
    no_require_eof: bool,

    /// How non-lexical rules fold expected lists in expected mode.
    #[arg(long, value_enum, default_value = "join")]
    var_strategy: Strategy,

    /// Grammar transform to apply before matching.
    #[arg(long, value_enum, default_value = "none")]
    transform: Transform,

    /// Only load and validate the grammar.
    #[arg(long)]
    validate_only: bool,

    /// Step budget for one match.
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    steps: u64,
}

fn main() -> ExitCode {
    ExitCode::from(run(&Args::parse()))
}

fn run(args: &Args) -> u8 {
    let grammar_text = match std::fs::read(&args.grammar) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("{}: {}", args.grammar, e);
            return 2;
        }
    };
    let mut grammar = match parse_grammar(&grammar_text) {
        Ok(g) => g,
        Err(errors) => {
            for err in errors {
                let (line, col) = line_col(&grammar_text, err.span.start);
                eprintln!("{}:{}:{}: error: {}", args.grammar, line, col, err);
            }
            return 2;
        }
    };

    if let Some(start) = &args.start {
        if grammar.rule(start).is_none() {
            eprintln!("{}: start rule '{}' is not defined", args.grammar, start);
            return 2;
        }
        grammar.set_start(start.clone());
    }

    let issues = validate(&grammar);
    if !issues.is_empty() {
        for issue in issues {
            eprintln!("{}: {}", args.grammar, issue);
        }
        return 2;
    }
    if args.validate_only {
        return 0;
    }

    let (Some(input_path), Some(mode)) = (&args.input, args.mode) else {
        eprintln!("--input and --mode are required unless --validate-only is given");
        return 2;
    };
    let input = match std::fs::read(input_path) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("{}: {}", input_path, e);
            return 2;
        }
    };

    if args.transform == Transform::FourValues {
        if mode != Mode::Labeled {
            eprintln!("--transform four-values only works with --mode labeled");
            return 2;
        }
        grammar = desugar_star(&grammar);
        grammar = match four_values(&grammar) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("{}: {}", args.grammar, e);
                return 2;
            }
        };
        return run_four_values(args, &grammar, &input, input_path);
    }

    if matches!(mode, Mode::Farthest | Mode::Expected) && grammar.uses_throw() {
        eprintln!(
            "{}: mode '{}' needs a throw-free grammar",
            args.grammar,
            if mode == Mode::Farthest {
                "farthest"
            } else {
                "expected"
            }
        );
        return 2;
    }

    let engine = Engine::new(&grammar).with_step_budget(args.steps);
    let require_eof = !args.no_require_eof;
    let source = input_path.as_str();

    let outcome = match mode {
        Mode::Plain => engine.match_plain(&input, 0).map(|res| match res {
            PlainResult::Consumed(end) if done(end, &input, require_eof) => None,
            PlainResult::Consumed(end) => Some(position_message(source, &input, end)),
            PlainResult::Failed => Some(position_message(source, &input, 0)),
        }),
        Mode::Farthest => engine.match_fft(&input, 0).map(|(res, far)| match res {
            PlainResult::Consumed(end) if done(end, &input, require_eof) => None,
            PlainResult::Consumed(end) => {
                Some(position_message(source, &input, far.unwrap_or(end)))
            }
            PlainResult::Failed => Some(position_message(source, &input, far.unwrap_or(0))),
        }),
        Mode::Expected => {
            let strategy = match args.var_strategy {
                Strategy::Join => VarStrategy::Join,
                Strategy::Propagate => VarStrategy::Propagate,
            };
            engine
                .match_ffl(&input, 0, strategy)
                .map(|(res, rec)| match res {
                    PlainResult::Consumed(end) if done(end, &input, require_eof) => None,
                    PlainResult::Consumed(end) => Some(record_message(source, &input, &rec, end)),
                    PlainResult::Failed => Some(record_message(source, &input, &rec, 0)),
                })
        }
        Mode::Labeled => engine.match_labeled(&input, 0).map(|(res, rec)| match res {
            LabeledResult::Consumed(end) if done(end, &input, require_eof) => None,
            LabeledResult::Consumed(end) => Some(record_message(source, &input, &rec, end)),
            LabeledResult::Raised(label, at) => {
                Some(render_label(&grammar, &label, at, &input, source, &rec).message)
            }
        }),
    };

    report(outcome)
}

fn done(end: Position, input: &[u8], require_eof: bool) -> bool {
    end == input.len() || !require_eof
}

/// Position-only message, used by the plain and farthest modes.
fn position_message(source: &str, input: &[u8], at: Position) -> String {
    let (line, col) = line_col(input, at);
    format!(
        "{}:{}:{}: syntax error, unexpected '{}'",
        source,
        line,
        col,
        unexpected_lexeme(input, at)
    )
}

/// Expected-list message when the record has one, else position-only.
fn record_message(source: &str, input: &[u8], rec: &FailureRecord, fallback: Position) -> String {
    if rec.at.is_some() {
        render_ffl(source, input, rec).message
    } else {
        position_message(source, input, fallback)
    }
}

fn run_four_values(args: &Args, grammar: &Grammar, input: &[u8], source: &str) -> u8 {
    let engine = Engine::new(grammar).with_step_budget(args.steps);
    let (res, rec) = match engine.match_labeled(input, 0) {
        Ok(r) => r,
        Err(e) => return engine_failure(e),
    };
    let outcome = match classify_outcome(&res, 0) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: {}", source, e);
            return 2;
        }
    };
    let require_eof = !args.no_require_eof;
    let message = match outcome {
        FourValue::Ok(end) if done(end, input, require_eof) => None,
        FourValue::Epsn if input.is_empty() || !require_eof => None,
        FourValue::Ok(end) => Some(position_message(source, input, end)),
        FourValue::Epsn => Some(position_message(source, input, 0)),
        FourValue::Fail | FourValue::Error => {
            let LabeledResult::Raised(label, at) = &res else {
                unreachable!("fail and error come from raises");
            };
            Some(render_label(grammar, label, *at, input, source, &rec).message)
        }
    };
    report(Ok(message))
}

fn engine_failure(e: EngineError) -> u8 {
    eprintln!("engine error: {}", e);
    2
}

fn report(outcome: Result<Option<String>, EngineError>) -> u8 {
    match outcome {
        Ok(None) => 0,
        Ok(Some(message)) => {
            eprintln!("{}", message);
            1
        }
        Err(e) => engine_failure(e),
    }
}
