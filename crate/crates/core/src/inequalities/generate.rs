//! Random instances that satisfy the hypotheses of each inequality by
//! construction (up to the rejection step in the fuzzer).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::checks::Setup;
use super::{GeneratorConfig, InequalityId, InstanceSpec, Ordering};
use crate::error::{Error, Result};
use crate::expr::{ConvexFn, ExprFn, ScaleSpec};

#[derive(Clone, Copy)]
enum Dom {
    Real,
    Positive,
    Unit,
}

fn dom_of(convex: &ConvexFn) -> Dom {
    match convex.domain() {
        (lo, ..) if lo.is_infinite() => Dom::Real,
        (_, hi, ..) if hi.is_infinite() => Dom::Positive,
        _ => Dom::Unit,
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Uniform draw rounded to two decimals.
fn coef(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    round2(rng.gen_range(lo..=hi))
}

/// Uniform multiple of 1/8 in `[lo, hi]`.
fn eighth(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range((lo * 8.0) as i32..=(hi * 8.0) as i32) as f64 / 8.0
}

/// `c0 ± |c|·body ...`, skipping zero terms.
fn sum(c0: f64, terms: &[(f64, &str)]) -> String {
    let mut s = format!("{c0}");
    for &(c, body) in terms {
        if c != 0.0 {
            let op = if c < 0.0 { '-' } else { '+' };
            s.push_str(&format!(" {op} {}*{body}", c.abs()));
        }
    }
    s
}

fn scale(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=3);
    let mut parts = Vec::new();
    let mut x = 0.0;
    for k in 0..n {
        if k > 0 {
            x += eighth(rng, 0.25, 0.5);
        }
        match rng.gen_range(0..4) {
            0 => {
                let len = eighth(rng, 0.5, 1.0);
                parts.push(format!("interval({x},{})", x + len));
                x += len;
            }
            1 => {
                let m = rng.gen_range(if n == 1 { 2 } else { 1 }..=4);
                let mut vs = vec![x.to_string()];
                for _ in 1..m {
                    x += eighth(rng, 0.25, 0.5);
                    vs.push(x.to_string());
                }
                parts.push(format!("points({})", vs.join(",")));
            }
            2 => {
                let h = *[0.25, 0.5].choose(rng).unwrap();
                let m = rng.gen_range(1..=3) as f64;
                parts.push(format!("hgrid({x},{},{h})", x + m * h));
                x += m * h;
            }
            _ => {
                let q = *[1.5, 2.0, 3.0].choose(rng).unwrap();
                let len = eighth(rng, 0.5, 1.0);
                parts.push(format!("qtail(q={q},at={x},upto={})", x + len));
                x += len;
            }
        }
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("union({})", parts.join(","))
    }
}

fn integrator(rng: &mut ChaCha8Rng) -> &'static str {
    ["t", "t", "t", "2*t", "t^2", "t + 0.25*t^2", "exp(0.25*t)"].choose(rng).unwrap()
}

/// Strictly monotone, increasing for `dir > 0`.
fn monotone(rng: &mut ChaCha8Rng, dir: f64) -> String {
    let c = coef(rng, -1.0, 1.0);
    let d = dir * coef(rng, 0.1, 1.0);
    match rng.gen_range(0..4) {
        0 => sum(c, &[(d, "t")]),
        1 => sum(c, &[(d, "t"), (dir * coef(rng, 0.0, 0.05), "t^3")]),
        2 => sum(c, &[(d, &format!("exp({}*t)", coef(rng, 0.1, 0.4)))]),
        _ => {
            let m = coef(rng, 0.0, 3.0);
            sum(c, &[(d, &format!("(t - {m})/(1 + abs(t - {m}))"))])
        }
    }
}

fn general(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.5) {
        let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return monotone(rng, dir);
    }
    sum(coef(rng, -1.0, 1.0), &[(coef(rng, -0.5, 0.5), "t"), (coef(rng, -0.1, 0.1), "t^2")])
}

/// Positive on `t ≥ 0`.
fn positive(rng: &mut ChaCha8Rng) -> String {
    let c = coef(rng, 0.2, 2.0);
    let d = coef(rng, 0.0, 1.0);
    match rng.gen_range(0..5) {
        0 => sum(c, &[(d, "t")]),
        1 => sum(c, &[(d, &format!("(t - {})^2", coef(rng, 0.0, 3.0)))]),
        2 => sum(c, &[(d, "1/(1 + t)")]),
        3 => sum(c, &[(d, &format!("exp({}*t)", coef(rng, 0.1, 0.4)))]),
        _ => {
            let m = coef(rng, 0.0, 3.0);
            let d = round2(coef(rng, -1.0, 1.0) * c * 0.9);
            sum(c, &[(d, &format!("(t - {m})/(1 + abs(t - {m}))"))])
        }
    }
}

/// Positive on `t ≥ 0` and strictly monotone.
fn positive_monotone(rng: &mut ChaCha8Rng, dir: f64) -> String {
    let d = coef(rng, 0.1, 1.0);
    if dir > 0.0 {
        let c = coef(rng, 0.5, 2.0);
        match rng.gen_range(0..3) {
            0 => sum(c, &[(d, "t")]),
            1 => sum(c, &[(d, &format!("exp({}*t)", coef(rng, 0.1, 0.4)))]),
            _ => sum(round2(c + d), &[(d, &format!("(t - {m})/(1 + abs(t - {m}))", m = coef(rng, 0.0, 3.0)))]),
        }
    } else {
        let c = coef(rng, 0.5, 2.0);
        match rng.gen_range(0..3) {
            0 => sum(c, &[(d, "1/(1 + t)")]),
            1 => sum(round2(c + 6.0 * d), &[(-d, "t")]),
            _ => sum(round2(c + d), &[(-d, &format!("(t - {m})/(1 + abs(t - {m}))", m = coef(rng, 0.0, 3.0)))]),
        }
    }
}

/// Values in `(0, 1)`, monotone.
fn unit(rng: &mut ChaCha8Rng, dir: f64) -> String {
    let m = coef(rng, 0.3, 0.7);
    let r = dir * coef(rng, 0.0, m.min(1.0 - m) - 0.05);
    let c = coef(rng, 0.0, 3.0);
    sum(m, &[(r, &format!("(t - {c})/(1 + abs(t - {c}))"))])
}

fn in_domain(rng: &mut ChaCha8Rng, dom: Dom) -> String {
    let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match dom {
        Dom::Real => general(rng),
        Dom::Positive => positive(rng),
        Dom::Unit => unit(rng, dir),
    }
}

fn weight(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.25) {
        "1".into()
    } else {
        positive(rng)
    }
}

/// Affine weight that may change sign.
fn signed_weight(rng: &mut ChaCha8Rng) -> String {
    sum(coef(rng, -1.0, 1.0), &[(coef(rng, -1.0, 1.0), "t")])
}

fn any_convex(rng: &mut ChaCha8Rng) -> ConvexFn {
    let name = ["square", "exp", "abs", "xlogx", "power_1", "power_1.5", "power_2", "power_3", "neg_entropy"]
        .choose(rng)
        .unwrap();
    ConvexFn::from_name(name).expect("catalog name")
}

fn parse(src: &str) -> Result<ExprFn> {
    ExprFn::parse(src, 1)
}

/// `∫p·d / ∫p` on the instance so far.
fn weighted_mean(spec: &InstanceSpec, d: &ExprFn) -> Result<f64> {
    let st = Setup::new(spec)?;
    let p = spec.p.as_ref().expect("weight is set");
    let tol = spec.tol / 100.0;
    let num = st.integral_to(&|t: f64| Ok(p.eval1(t)? * d.eval1(t)?), tol)?;
    let den = st.integral_to(p, tol)?;
    if den.value.abs() <= 1e-3 {
        return Err(Error::precondition("weight has vanishing integral", None));
    }
    Ok(num.value / den.value)
}

/// `(y) + (d) + c`.
fn shifted(y: &str, d: &str, c: f64) -> String {
    match c {
        c if c < 0.0 => format!("({y}) + ({d}) - {}", -c),
        c if c > 0.0 => format!("({y}) + ({d}) + {c}"),
        _ => format!("({y}) + ({d})"),
    }
}

/// One candidate instance for `id`.
pub(crate) fn generate(id: InequalityId, rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<InstanceSpec> {
    let mut spec = InstanceSpec::new(ScaleSpec::parse(&scale(rng))?);
    spec.g = parse(integrator(rng))?;
    spec.tol = cfg.tol;
    spec.seed = rng.gen::<u32>() as u64;
    let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match id {
        InequalityId::Positivity | InequalityId::Monotone => spec.f = Some(parse(&weight(rng))?),
        InequalityId::Subdifferential => spec.convex = Some(any_convex(rng)),
        InequalityId::Theorem5 | InequalityId::Jensen | InequalityId::ReverseJensen => {
            let convex = any_convex(rng);
            let dom = dom_of(&convex);
            spec.p = Some(parse(&weight(rng))?);
            spec.x = Some(parse(&in_domain(rng, dom))?);
            spec.y = Some(parse(&in_domain(rng, dom))?);
            match id {
                InequalityId::Jensen => spec.y = None,
                InequalityId::ReverseJensen => spec.x = None,
                _ => {}
            }
            spec.convex = Some(convex);
        }
        InequalityId::Chebyshev | InequalityId::ChebyshevKernel => {
            let order = cfg.ordering.unwrap_or(if rng.gen_bool(0.5) { Ordering::Similar } else { Ordering::Opposite });
            let flip = if cfg.misorder { -1.0 } else { 1.0 };
            spec.p = Some(parse(&weight(rng))?);
            spec.f1 = Some(parse(&monotone(rng, dir))?);
            spec.f2 = Some(parse(&monotone(rng, dir * order.sign() * flip))?);
            spec.order = Some(order);
        }
        InequalityId::Winckler => {
            spec.p = Some(parse(&weight(rng))?);
            let f = positive(rng);
            spec.f = Some(parse(&if rng.gen_bool(0.25) { format!("0 - ({f})") } else { f })?);
        }
        InequalityId::MajorisationEq => {
            spec.convex = Some(ConvexFn::from_name(["square", "exp", "abs"].choose(rng).unwrap())?);
            let p = if cfg.signed_weights { signed_weight(rng) } else { weight(rng) };
            spec.p = Some(parse(&p)?);
            let y = monotone(rng, dir);
            let d = monotone(rng, dir);
            let c = weighted_mean(&spec, &parse(&d)?)?;
            spec.y = Some(parse(&y)?);
            spec.x = Some(parse(&shifted(&y, &d, -c))?);
        }
        InequalityId::MajorisationLe => {
            let name = ["exp", "power_1", "power_1.5", "power_2", "power_3"].choose(rng).unwrap();
            spec.convex = Some(ConvexFn::from_name(name)?);
            spec.p = Some(parse(&weight(rng))?);
            let y = positive_monotone(rng, dir);
            let d = sum(coef(rng, -0.5, 0.5), &[(dir * coef(rng, 0.05, 0.5), "t/(1 + t)")]);
            let c = if rng.gen_bool(0.25) { 0.0 } else { coef(rng, 0.01, 0.5) };
            let shift = c - weighted_mean(&spec, &parse(&d)?)?;
            spec.y = Some(parse(&y)?);
            spec.x = Some(parse(&shifted(&y, &d, shift))?);
        }
    }
    Ok(spec)
}
