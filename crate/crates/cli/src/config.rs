//! Fully resolved run configurations and the command lines that reproduce them.

use serde::{Deserialize, Serialize};
use tsint::expr::ScaleSpec;
use tsint::inequalities::{shell_quote, InequalityId, InstanceSpec, Ordering};
use tsint::integrate::Order;
use tsint::{Error, ExprFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Eval {
        scale: String,
        f: String,
        g: String,
        a: f64,
        b: f64,
        tol: f64,
        transition: bool,
        max_cells: usize,
    },
    Double {
        scale_t: String,
        scale_s: String,
        f: String,
        g1: String,
        g2: String,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        tol: f64,
        max_cells: usize,
    },
    Iterated {
        scale_t: String,
        scale_s: String,
        f: String,
        g1: String,
        g2: String,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        tol: f64,
        order: Order,
        max_cells: usize,
    },
    Derive {
        scale: String,
        f: String,
        at: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h0: Option<f64>,
    },
    Check {
        inequality: InequalityId,
        instance: InstanceSpec,
    },
    Fuzz {
        inequality: InequalityId,
        trials: u64,
        seed: u64,
        tol: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<Ordering>,
        misorder: bool,
        max_rejections: usize,
        #[serde(default)]
        signed_weights: bool,
    },
    ExampleQscale {
        q: f64,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub format: Format,
}

/// A flag value that failed validation.
#[derive(Debug)]
pub struct FlagError {
    pub flag: String,
    pub source_text: String,
    pub error: Error,
}

impl FlagError {
    pub fn new(flag: &str, source_text: &str, error: Error) -> Self {
        FlagError { flag: flag.to_string(), source_text: source_text.to_string(), error }
    }
}

pub fn normalize_scale(flag: &str, src: &str) -> Result<(ScaleSpec, String), FlagError> {
    let spec = ScaleSpec::parse(src).map_err(|e| FlagError::new(flag, src, e))?;
    spec.build().map_err(|e| FlagError::new(flag, src, e))?;
    let text = spec.to_string();
    Ok((spec, text))
}

pub fn normalize_expr(flag: &str, src: &str, arity: usize) -> Result<String, FlagError> {
    ExprFn::parse(src, arity).map(|e| e.to_string()).map_err(|e| FlagError::new(flag, src, e))
}

/// Accepts a bare configuration or a whole report carrying one under `config`.
pub fn from_json(src: &str) -> Result<RunConfig, serde_json::Error> {
    let mut v: serde_json::Value = serde_json::from_str(src)?;
    if let Some(c) = v.get_mut("config") {
        v = c.take();
    }
    serde_json::from_value(v)
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Eval { .. } => "eval",
            Command::Double { .. } => "double",
            Command::Iterated { .. } => "iterated",
            Command::Derive { .. } => "derive",
            Command::Check { .. } => "check",
            Command::Fuzz { .. } => "fuzz",
            Command::ExampleQscale { .. } => "example-qscale",
        }
    }

    /// Shell command line that reruns this configuration.
    pub fn replay(&self) -> String {
        let mut args: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| args.push((k.to_string(), v));
        let mut head = format!("tsint {}", self.name());
        match &self.command {
            Command::Eval { scale, f, g, a, b, tol, transition, max_cells } => {
                push("scale", scale.clone());
                push("f", f.clone());
                push("g", g.clone());
                push("a", num(*a));
                push("b", num(*b));
                push("tol", num(*tol));
                if *transition {
                    push("transition", String::new());
                }
                push("max-cells", max_cells.to_string());
            }
            Command::Double { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, max_cells }
            | Command::Iterated { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, max_cells, .. } => {
                push("scale-t", scale_t.clone());
                push("scale-s", scale_s.clone());
                push("f", f.clone());
                push("g1", g1.clone());
                push("g2", g2.clone());
                push("a", num(*a));
                push("b", num(*b));
                push("c", num(*c));
                push("d", num(*d));
                push("tol", num(*tol));
                push("max-cells", max_cells.to_string());
                if let Command::Iterated { order, .. } = &self.command {
                    push("order", serde_json::to_value(order).unwrap().as_str().unwrap().to_string());
                }
            }
            Command::Derive { scale, f, at, h0 } => {
                push("scale", scale.clone());
                push("f", f.clone());
                push("at", num(*at));
                if let Some(h) = h0 {
                    push("h0", num(*h));
                }
            }
            Command::Check { inequality, instance } => {
                head.push_str(&format!(" {inequality}"));
                for (k, v) in instance.fields() {
                    push(k, v);
                }
            }
            Command::Fuzz { inequality, trials, seed, tol, order, misorder, max_rejections, signed_weights } => {
                head.push_str(&format!(" {inequality}"));
                push("trials", trials.to_string());
                push("seed", seed.to_string());
                push("tol", num(*tol));
                if let Some(o) = order {
                    push("order", o.name().to_string());
                }
                if *misorder {
                    push("misorder", String::new());
                }
                push("max-rejections", max_rejections.to_string());
                if *signed_weights {
                    push("signed-weights", String::new());
                }
            }
            Command::ExampleQscale { q, tol } => {
                push("q", num(*q));
                push("tol", num(*tol));
            }
        }
        if self.format == Format::Text {
            push("format", "text".into());
        }
        for (k, v) in args {
            head.push_str(&format!(" --{k}"));
            if !v.is_empty() {
                head.push(' ');
                head.push_str(&shell_quote(&v));
            }
        }
        head
    }
}
