use super::{Component, Loc, TimeScale};
use crate::error::{Error, Result};
use crate::func::RealFn;

const LEVELS: usize = 4;
const TOL: f64 = 1e-8;

/// Extrapolates difference quotients taken at steps `h, h/r, h/r², …`.
fn richardson(t: f64, d: [f64; LEVELS], r: f64) -> Result<f64> {
    let mut table = [[0.0; LEVELS]; LEVELS];
    for j in 0..LEVELS {
        table[j][0] = d[j];
        let mut rm = 1.0;
        for m in 1..=j {
            rm *= r;
            table[j][m] = table[j][m - 1] + (table[j][m - 1] - table[j - 1][m - 1]) / (rm - 1.0);
        }
    }
    let est = table[LEVELS - 1][LEVELS - 1];
    let error = (est - table[LEVELS - 2][LEVELS - 2]).abs();
    if !est.is_finite() || error > TOL * est.abs().max(1.0) {
        return Err(Error::NonConvergent { t, estimate: est, error });
    }
    Ok(est)
}

/// One-sided derivative of `f` at `t` using points of the stretch `[lo, hi]` only.
pub(crate) fn dense_derivative<F: RealFn + ?Sized>(
    f: &F,
    t: f64,
    (lo, hi): (f64, f64),
    h0: Option<f64>,
) -> Result<f64> {
    let h0 = h0.unwrap_or(1e-3 * (hi - lo));
    let (room_f, room_b) = (hi - t, t - lo);
    let (h, dir) = if room_f >= h0 {
        (h0, 1.0)
    } else if room_b >= h0 {
        (h0, -1.0)
    } else if room_f >= room_b {
        (room_f, 1.0)
    } else {
        (room_b, -1.0)
    };
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("no room for a difference quotient at t={t}")));
    }
    let ft = f.eval(t)?;
    let mut d = [0.0; LEVELS];
    let mut step = h;
    for dj in &mut d {
        let s = t + dir * step;
        *dj = (f.eval(s)? - ft) / (s - t);
        step /= 2.0;
    }
    richardson(t, d, 2.0)
}

/// Derivative at a point of a stretch by central differences, for functions
/// assumed differentiable there; falls back to [`dense_derivative`] within
/// the initial step of either end.
pub(crate) fn central_derivative<F: RealFn + ?Sized>(f: &F, t: f64, (lo, hi): (f64, f64)) -> Result<f64> {
    let h = 1e-2 * (hi - lo);
    if !(t - h >= lo && t + h <= hi && h > 0.0) {
        return dense_derivative(f, t, (lo, hi), None);
    }
    let mut d = [0.0; LEVELS];
    let mut step = h;
    for dj in &mut d {
        *dj = (f.eval(t + step)? - f.eval(t - step)?) / (2.0 * step);
        step /= 2.0;
    }
    // the error expands in even powers of the step
    richardson(t, d, 4.0)
}

/// Δ-derivative of `f` at `t`: the exact quotient `(f(σ(t)) - f(t)) / μ(t)` at
/// right-scattered points, a Richardson-extrapolated one-sided limit at
/// right-dense points (default initial step 1e-3 of the local span).
pub fn delta_derivative<F: RealFn + ?Sized>(scale: &TimeScale, f: &F, t: f64, h0: Option<f64>) -> Result<f64> {
    if let Some(h) = h0 {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("initial step must be positive, got {h}")));
        }
    }
    let loc = scale.locate(t)?;
    let t = scale.canonical(t)?;
    let sigma = scale.sigma(t)?;
    if sigma > t {
        return Ok((f.eval(sigma)? - f.eval(t)?) / (sigma - t));
    }
    match loc {
        Loc::Interval(i) => {
            let c = scale.components()[i];
            dense_derivative(f, t, (c.min(), c.max()), h0)
        }
        Loc::Accumulation(i) => {
            let Component::QTail(q) = scale.components()[i] else { unreachable!() };
            let h0 = h0.unwrap_or(1e-3 * (q.top() - q.at));
            let target = h0 * (q.q.powi(3) / 8.0).max(1.0);
            let mut k = q.first;
            while q.point(k) - q.at > target && k < q.first + 10_000 {
                k += 1;
            }
            let ft = f.eval(t)?;
            let mut d = [0.0; LEVELS];
            for (j, dj) in d.iter_mut().enumerate() {
                let s = q.point(k + j as u32);
                *dj = (f.eval(s)? - ft) / (s - t);
            }
            richardson(t, d, q.q)
        }
        _ => Err(Error::InvalidArgument(format!(
            "t={t} is a left-scattered maximum; the delta derivative is undefined there"
        ))),
    }
}
