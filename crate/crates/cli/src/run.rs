use serde::Serialize;
use serde_json::{json, Value};
use tsint::inequalities::{check, fuzz, qscale_example, GeneratorConfig};
use tsint::integrate::{iterated_integral_with, rs_double_integral_with, rs_integral_via_transition_with, rs_integral_with, Rect};
use tsint::timescale::delta_derivative;
use tsint::{Error, ExprFn, Options, ScaleSpec, TimeScale};

use crate::config::{Command, RunConfig};

pub struct Outcome {
    pub result: Option<Value>,
    pub error: Option<Error>,
    pub code: u8,
}

impl Outcome {
    fn ok(v: impl Serialize, code: u8) -> Self {
        Outcome { result: Some(serde_json::to_value(v).expect("serializable")), error: None, code }
    }

    fn err(e: Error, in_check: bool) -> Self {
        let code = exit_code(&e, in_check);
        Outcome { result: None, error: Some(e), code }
    }
}

pub fn exit_code(e: &Error, in_check: bool) -> u8 {
    match e.root() {
        _ if e.is_no_convergence() => 3,
        _ if e.is_precondition() && in_check => 4,
        Error::GeneratorExhausted { .. } => 4,
        Error::Domain { .. } if in_check => 4,
        _ => 2,
    }
}

fn scale(text: &str) -> Result<TimeScale, Error> {
    ScaleSpec::parse(text)?.build()
}

/// An integrator written in `t` or `s`, evaluated on the diagonal.
fn integrator(src: &str) -> Result<impl Fn(f64) -> Result<f64, Error>, Error> {
    let g = ExprFn::parse(src, 2)?;
    Ok(move |t: f64| g.eval2(t, t))
}

fn opts(tol: f64, max_cells: usize) -> Options {
    Options { tol, max_cells, ..Options::default() }
}

pub fn execute(config: &RunConfig) -> Outcome {
    let in_check = matches!(config.command, Command::Check { .. } | Command::Fuzz { .. });
    match run(&config.command) {
        Ok(o) => o,
        Err(e) => Outcome::err(e, in_check),
    }
}

fn run(cmd: &Command) -> Result<Outcome, Error> {
    Ok(match cmd {
        Command::Eval { scale: s, f, g, a, b, tol, transition, max_cells } => {
            let ts = scale(s)?;
            let (f, g) = (ExprFn::parse(f, 1)?, ExprFn::parse(g, 1)?);
            let o = opts(*tol, *max_cells);
            let r = if *transition {
                rs_integral_via_transition_with(&ts, &f, &g, *a, *b, &o)?
            } else {
                rs_integral_with(&ts, &f, &g, *a, *b, &o)?
            };
            Outcome::ok(r, 0)
        }
        Command::Double { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, max_cells }
        | Command::Iterated { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, max_cells, .. } => {
            let (t1, t2) = (scale(scale_t)?, scale(scale_s)?);
            let f = ExprFn::parse(f, 2)?;
            let (g1, g2) = (integrator(g1)?, integrator(g2)?);
            let rect = Rect { a: *a, b: *b, c: *c, d: *d };
            let o = opts(*tol, *max_cells);
            let r = match cmd {
                Command::Iterated { order, .. } => iterated_integral_with(&t1, &t2, &f, &g1, &g2, rect, *order, &o)?,
                _ => rs_double_integral_with(&t1, &t2, &f, &g1, &g2, rect, &o)?,
            };
            Outcome::ok(r, 0)
        }
        Command::Derive { scale: s, f, at, h0 } => {
            let ts = scale(s)?;
            let f = ExprFn::parse(f, 1)?;
            let value = delta_derivative(&ts, &f, *at, *h0)?;
            Outcome::ok(
                json!({
                    "value": value,
                    "sigma": ts.sigma(*at)?,
                    "mu": ts.mu(*at)?,
                    "point": ts.classify(*at)?.to_string(),
                }),
                0,
            )
        }
        Command::Check { inequality, instance } => {
            let r = check(*inequality, instance)?;
            let code = if r.passed { 0 } else { 5 };
            Outcome::ok(r, code)
        }
        Command::Fuzz { inequality, trials, seed, tol, order, misorder, max_rejections, signed_weights } => {
            let cfg = GeneratorConfig {
                tol: *tol,
                ordering: *order,
                misorder: *misorder,
                max_rejections: *max_rejections,
                signed_weights: *signed_weights,
            };
            let r = fuzz(*inequality, *trials, *seed, &cfg)?;
            let code = if r.violations > 0 { 6 } else { 0 };
            Outcome::ok(r, code)
        }
        Command::ExampleQscale { q, tol } => Outcome::ok(qscale_example(*q, *tol)?, 0),
    })
}
