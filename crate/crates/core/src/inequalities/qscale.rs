//! The Winckler example on the closure of `q^ℤ` restricted to `[0, 1]`, with
//! `g(t) = t²` and `p(t) = t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{ExprFn, ScaleSpec};
use crate::integrate::{rs_integral, IntegralResult};
use crate::numeric::CompensatedSum;

/// Numbers behind the example, next to the values printed with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QScaleReport {
    pub q: f64,
    pub tol: f64,
    pub scale: String,
    /// `∫₀¹ t Δ(t²)` from the integration engine.
    pub engine: IntegralResult,
    /// `Σ_k t_k (σ(t_k)² - t_k²)` summed term by term.
    pub series: f64,
    /// `(q² - 1)/(q³ - 1)`.
    pub closed_form: f64,
    pub engine_minus_series: f64,
    /// `(∫₀¹ t Δ(t²))²` from the engine.
    pub square_of_integral: f64,
    /// `1/(q - 1)²`, the value printed for the square.
    pub printed_square_claim: f64,
    pub printed_claim_agrees: bool,
    /// `(Σ_k q^(-2k))²`, the `f ≡ 1` case of the final display.
    pub unit_display_lhs: f64,
    /// `1/(q² - 1)²`.
    pub unit_display_rhs: f64,
    pub unit_display_equal: bool,
}

const MAX_TERMS: usize = 1_000_000;

fn geometric(q: f64, term: impl Fn(f64) -> f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in 1..=MAX_TERMS {
        let v = term(q.powi(-(k as i32)));
        acc.add(v);
        if v <= f64::EPSILON * 1e-3 * acc.value() {
            break;
        }
    }
    acc.value()
}

pub fn qscale_example(q: f64, tol: f64) -> Result<QScaleReport> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
    }
    let spec = ScaleSpec::Qtail { q, at: 0.0, upto: 1.0, skip: 0 };
    let scale = spec.build()?;
    let engine = rs_integral(&scale, &ExprFn::identity(), &ExprFn::parse("t^2", 1)?, 0.0, 1.0, tol)?;
    let series = geometric(q, |t| t * ((q * t) * (q * t) - t * t));
    let closed_form = (q * q - 1.0) / (q * q * q - 1.0);
    let square = engine.value * engine.value;
    let printed = 1.0 / ((q - 1.0) * (q - 1.0));
    let s = geometric(q, |t| t * t);
    let lhs = s * s;
    let rhs = 1.0 / ((q * q - 1.0) * (q * q - 1.0));
    Ok(QScaleReport {
        q,
        tol,
        scale: spec.to_string(),
        engine_minus_series: engine.value - series,
        engine,
        series,
        closed_form,
        square_of_integral: square,
        printed_square_claim: printed,
        printed_claim_agrees: (square - printed).abs() <= 1e-9 * printed.max(1.0),
        unit_display_lhs: lhs,
        unit_display_rhs: rhs,
        unit_display_equal: (lhs - rhs).abs() <= 8.0 * f64::EPSILON * rhs,
    })
}
