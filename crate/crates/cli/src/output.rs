use std::process::ExitCode;

use serde_json::{json, Map, Value};
use tsint::Error;

use crate::config::{FlagError, Format, RunConfig};
use crate::run::Outcome;

fn kind(e: &Error) -> &'static str {
    match e.root() {
        Error::InvalidScale(_) => "invalid-scale",
        Error::EndpointNotInScale(_) => "endpoint-not-in-scale",
        Error::EmptyRestriction { .. } => "empty-restriction",
        Error::PointNotInScale(_) => "point-not-in-scale",
        Error::MismatchedEndpoints { .. } => "mismatched-endpoints",
        Error::InvalidPartition(_) => "invalid-partition",
        Error::Syntax { .. } => "syntax",
        Error::Arity(_) => "arity",
        Error::Domain { .. } => "domain",
        Error::UnknownConvexFn(_) => "unknown-convex-fn",
        Error::NonConvergent { .. } => "non-convergent",
        Error::NonMonotoneIntegrator { .. } => "non-monotone-integrator",
        Error::SelectionOutOfCell { .. } => "selection-out-of-cell",
        Error::NoConvergence { .. } => "no-convergence",
        Error::PreconditionViolated { .. } => "precondition-violated",
        Error::OrderingViolated { .. } => "ordering-violated",
        Error::GeneratorExhausted { .. } => "generator-exhausted",
        Error::InvalidArgument(_) => "invalid-argument",
        Error::Axis { .. } => unreachable!("root strips axes"),
    }
}

fn error_json(e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), kind(e).into());
    m.insert("message".into(), e.to_string().into());
    match e.root() {
        Error::NoConvergence { partial, .. } => {
            m.insert("partial".into(), serde_json::to_value(partial).unwrap());
        }
        Error::NonConvergent { estimate, error, .. } => {
            m.insert("partial".into(), json!({ "estimate": estimate, "error": error }));
        }
        _ => {}
    }
    Value::Object(m)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, v) in m {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, v) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn print(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{v}"),
        Format::Text => {
            let mut lines = Vec::new();
            flatten("", v, &mut lines);
            let w = lines.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in lines {
                println!("{k:<w$}  {v}");
            }
        }
    }
}

pub fn emit(config: &RunConfig, outcome: &Outcome) -> ExitCode {
    let mut m = Map::new();
    m.insert("config".into(), serde_json::to_value(config).unwrap());
    if let Some(r) = &outcome.result {
        m.insert("result".into(), r.clone());
    }
    if let Some(e) = &outcome.error {
        m.insert("error".into(), error_json(e));
        eprintln!("tsint: {e}");
    }
    m.insert("replay".into(), config.replay().into());
    print(&Value::Object(m), config.format);
    ExitCode::from(outcome.code)
}

/// Diagnostic with a caret under the offending column, then a JSON error.
pub fn flag_error(err: &FlagError, format: Format) -> ExitCode {
    let column = match err.error.root() {
        Error::Syntax { column, .. } => Some(*column),
        Error::InvalidScale(msg) => msg
            .rsplit_once("at column ")
            .and_then(|(_, c)| c.parse::<usize>().ok()),
        _ => None,
    };
    eprintln!("tsint: invalid --{}: {}", err.flag, err.error);
    if let Some(c) = column {
        eprintln!("  {}", err.source_text);
        eprintln!("  {}^", " ".repeat(c.saturating_sub(1)));
    }
    let mut e = error_json(&err.error);
    e["flag"] = err.flag.clone().into();
    if let Some(c) = column {
        e["column"] = c.into();
    }
    print(&json!({ "error": e }), format);
    ExitCode::from(2)
}
