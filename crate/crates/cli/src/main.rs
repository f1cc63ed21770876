//! `tsint`: integrals on time scales and numerical checks of convex-function
//! inequalities from the command line.
//!
//! Exit status: 0 success, 2 invalid input, 3 no convergence, 4 failed
//! hypothesis, 5 failed inequality, 6 fuzz campaign found violations.

mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsint::inequalities::{InequalityId, InstanceSpec};
use tsint::integrate::Order;
use tsint::Options;

use config::{normalize_expr, normalize_scale, Command, FlagError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "tsint", version, about = "Riemann-Stieltjes delta integrals on time scales")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// ∫_a^b f Δg with certified bounds.
    Eval(EvalArgs),
    /// Double integral over [a,b) × [c,d) by product-cell refinement.
    Double(DoubleArgs),
    /// Iterated integral in either order.
    Iterated(IteratedArgs),
    /// Delta derivative at a point.
    Derive(DeriveArgs),
    /// Check one inequality on one instance.
    Check(CheckArgs),
    /// Check one inequality on seeded random instances.
    Fuzz(FuzzArgs),
    /// The q-scale Winckler example next to its printed values.
    ExampleQscale(QArgs),
    /// Run a configuration as printed in the `config` field of a report.
    RunConfig {
        /// JSON object.
        json: String,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Time scale, e.g. "union(interval(0,1),points(2,3))" or its JSON form.
    #[arg(long, allow_hyphen_values = true)]
    scale: String,
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    #[arg(long, allow_hyphen_values = true, default_value = "t")]
    g: String,
    /// Defaults to the least point of the scale.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Defaults to the greatest point of the scale.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Integrate f·g^Δ with respect to t instead.
    #[arg(long)]
    transition: bool,
    /// Refinement budget; defaults to $TSINT_MAX_CELLS or 1000000.
    #[arg(long)]
    max_cells: Option<usize>,
}

#[derive(Args)]
struct DoubleArgs {
    /// Scale for both axes.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "scale_t")]
    scale: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "scale_s")]
    scale_t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    scale_s: Option<String>,
    /// Integrand in t and s.
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    /// Integrator of the t axis.
    #[arg(long, allow_hyphen_values = true, default_value = "t")]
    g1: String,
    /// Integrator of the s axis (written in t or s).
    #[arg(long, allow_hyphen_values = true, default_value = "s")]
    g2: String,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Refinement budget; defaults to $TSINT_MAX_CELLS or 1000000.
    #[arg(long)]
    max_cells: Option<usize>,
}

#[derive(Args)]
struct IteratedArgs {
    #[command(flatten)]
    rect: DoubleArgs,
    /// `ts`: t outside, s inside.
    #[arg(long, default_value = "ts")]
    order: Order,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long, allow_hyphen_values = true)]
    scale: String,
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    #[arg(long, allow_hyphen_values = true)]
    at: f64,
    /// Initial step at right-dense points.
    #[arg(long)]
    h0: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    inequality: InequalityId,
    #[arg(long, allow_hyphen_values = true)]
    scale: String,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f2: Option<String>,
    /// Convex function: square, exp, abs, xlogx, power_<p>, neg_entropy.
    #[arg(long = "F")]
    convex: Option<String>,
    /// Subgradient at kinks: mid, left or right.
    #[arg(long)]
    kink: Option<String>,
    /// similar or opposite.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Args)]
struct FuzzArgs {
    inequality: InequalityId,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Ordering class for the Chebyshev checks; random per trial if omitted.
    #[arg(long)]
    order: Option<tsint::inequalities::Ordering>,
    /// Generate pairs that violate the declared ordering.
    #[arg(long)]
    misorder: bool,
    #[arg(long, default_value_t = 1000)]
    max_rejections: usize,
    /// Let weights change sign where the hypotheses allow it (majorisation-eq).
    #[arg(long)]
    signed_weights: bool,
}

#[derive(Args)]
struct QArgs {
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn endpoints(scale: &tsint::expr::ScaleSpec, lo: Option<f64>, hi: Option<f64>) -> (f64, f64) {
    let s = scale.build().expect("validated scale");
    (lo.unwrap_or(s.min()), hi.unwrap_or(s.max()))
}

fn budget(flag: Option<usize>) -> usize {
    flag.unwrap_or(Options::default().max_cells)
}

fn resolve_double(r: DoubleArgs, order: Option<Order>) -> Result<Command, FlagError> {
    let (st, ss) = match (&r.scale, &r.scale_t, &r.scale_s) {
        (_, Some(t), Some(s)) => (normalize_scale("scale-t", t)?, normalize_scale("scale-s", s)?),
        (Some(both), ..) => {
            let n = normalize_scale("scale", both)?;
            (n.clone(), n)
        }
        _ => unreachable!("clap enforces a scale"),
    };
    let (a, b) = endpoints(&st.0, r.a, r.b);
    let (c, d) = endpoints(&ss.0, r.c, r.d);
    let (f, g1, g2) = (normalize_expr("f", &r.f, 2)?, normalize_expr("g1", &r.g1, 2)?, normalize_expr("g2", &r.g2, 2)?);
    let (scale_t, scale_s, tol, max_cells) = (st.1, ss.1, r.tol, budget(r.max_cells));
    Ok(match order {
        None => Command::Double { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, max_cells },
        Some(order) => Command::Iterated { scale_t, scale_s, f, g1, g2, a, b, c, d, tol, order, max_cells },
    })
}

fn resolve(cmd: Cmd) -> Result<Command, FlagError> {
    Ok(match cmd {
        Cmd::Eval(e) => {
            let (spec, scale) = normalize_scale("scale", &e.scale)?;
            let (a, b) = endpoints(&spec, e.a, e.b);
            Command::Eval {
                scale,
                f: normalize_expr("f", &e.f, 1)?,
                g: normalize_expr("g", &e.g, 1)?,
                a,
                b,
                tol: e.tol,
                transition: e.transition,
                max_cells: budget(e.max_cells),
            }
        }
        Cmd::Double(d) => resolve_double(d, None)?,
        Cmd::Iterated(i) => resolve_double(i.rect, Some(i.order))?,
        Cmd::Derive(d) => Command::Derive {
            scale: normalize_scale("scale", &d.scale)?.1,
            f: normalize_expr("f", &d.f, 1)?,
            at: d.at,
            h0: d.h0,
        },
        Cmd::Check(c) => {
            let mut spec = InstanceSpec::new(normalize_scale("scale", &c.scale)?.0);
            let fields = [
                ("a", c.a),
                ("b", c.b),
                ("g", c.g),
                ("f", c.f),
                ("p", c.p),
                ("x", c.x),
                ("y", c.y),
                ("f1", c.f1),
                ("f2", c.f2),
                ("F", c.convex),
                ("kink", c.kink),
                ("order", c.order),
                ("tol", c.tol),
                ("seed", c.seed),
            ];
            for (k, v) in fields {
                if let Some(v) = v {
                    spec = spec.with(k, &v).map_err(|e| FlagError::new(k, &v, e))?;
                }
            }
            Command::Check { inequality: c.inequality, instance: spec }
        }
        Cmd::Fuzz(f) => Command::Fuzz {
            inequality: f.inequality,
            trials: f.trials,
            seed: f.seed,
            tol: f.tol,
            order: f.order,
            misorder: f.misorder,
            max_rejections: f.max_rejections,
            signed_weights: f.signed_weights,
        },
        Cmd::ExampleQscale(q) => Command::ExampleQscale { q: q.q, tol: q.tol },
        Cmd::RunConfig { .. } => unreachable!("handled by the caller"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.cmd {
        Cmd::RunConfig { json } => match config::from_json(&json) {
            Ok(c) => c,
            Err(e) => {
                let err = FlagError::new("config", &json, tsint::Error::InvalidArgument(e.to_string()));
                return output::flag_error(&err, cli.format);
            }
        },
        cmd => match resolve(cmd) {
            Ok(command) => RunConfig { command, format: cli.format },
            Err(e) => return output::flag_error(&e, cli.format),
        },
    };
    let outcome = run::execute(&config);
    output::emit(&config, &outcome)
}
