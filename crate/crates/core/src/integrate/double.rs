//! Double Δ-integrals over product cells, and iterated integrals.

use std::cell::Cell as StdCell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::enclosure::{enclose1, enclose2, N1, N2};
use super::{increment, integrate_segments, key, rs_integral_with, sample_at, validate_integrator, IntegralResult, Options, INITIAL_CELLS};
use crate::error::{Error, Result};
use crate::func::{RealFn, RealFn2};
use crate::interval::Interval;
use crate::numeric::CompensatedSum;
use crate::timescale::{Segment, TimeScale};

/// The rectangle `[a, b) × [c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Order of an iterated integral: `Ts` integrates over `s` inside and `t`
/// outside, `St` the other way round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Ts,
    St,
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ts" => Ok(Order::Ts),
            "st" => Ok(Order::St),
            other => Err(Error::InvalidArgument(format!("order must be ts or st, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Span {
    Atom { t: f64, w: f64 },
    Dense { lo: f64, hi: f64, stretch: (f64, f64) },
}

impl Span {
    fn pos(&self) -> f64 {
        match *self {
            Span::Atom { t, .. } => t,
            Span::Dense { lo, .. } => lo,
        }
    }

    fn split(&self) -> Option<(Span, Span)> {
        let Span::Dense { lo, hi, stretch } = *self else { return None };
        let mid = lo + (hi - lo) / 2.0;
        if !(lo < mid && mid < hi) || hi - lo < 1e-12 * (stretch.1 - stretch.0) {
            return None;
        }
        Some((Span::Dense { lo, hi: mid, stretch }, Span::Dense { lo: mid, hi, stretch }))
    }
}

struct Axis {
    spans: Vec<Span>,
    remainders: Vec<(f64, f64, f64)>,
    mass: f64,
}

fn axis<G: RealFn + ?Sized>(scale: &TimeScale, g: &G, lo: f64, hi: f64, name: &'static str) -> Result<Axis> {
    let annotate = |e: Error| Error::Axis { axis: name, source: Box::new(e) };
    let segs = scale.segments(lo, hi).map_err(annotate)?;
    validate_integrator(g, &segs).map_err(annotate)?;
    let mut spans = Vec::new();
    let mut remainders = Vec::new();
    for s in segs {
        match s {
            Segment::Atom { t, next } => spans.push(Span::Atom { t, w: increment(g, t, next).map_err(annotate)? }),
            Segment::Remainder { at, top } => {
                let w = increment(g, at, top).map_err(annotate)?;
                spans.push(Span::Atom { t: at, w });
                remainders.push((at, top, w));
            }
            Segment::Dense { lo, hi } => {
                for i in 0..INITIAL_CELLS {
                    spans.push(Span::Dense {
                        lo: sample_at(lo, hi, i, INITIAL_CELLS + 1),
                        hi: sample_at(lo, hi, i + 1, INITIAL_CELLS + 1),
                        stretch: (lo, hi),
                    });
                }
            }
        }
    }
    let mass = increment(g, scale.canonical(lo)?, scale.canonical(hi)?).map_err(annotate)?;
    Ok(Axis { spans, remainders, mass })
}

struct Cell2 {
    x: Span,
    y: Span,
    lower: f64,
    upper: f64,
    /// Width attributable to each axis.
    split: (f64, f64),
}

fn enclose_product<F, G1, G2>(f: &F, g1: &G1, g2: &G2, x: Span, y: Span) -> Result<Cell2>
where
    F: RealFn2 + ?Sized,
    G1: RealFn + ?Sized,
    G2: RealFn + ?Sized,
{
    let ((lower, upper), split) = match (x, y) {
        (Span::Atom { t, w: w1 }, Span::Atom { t: s, w: w2 }) => {
            let v = f.eval2(t, s)? * w1 * w2;
            ((v, v), (0.0, 0.0))
        }
        (Span::Atom { t, w }, Span::Dense { lo, hi, .. }) => {
            let mut fs = [0.0; N1];
            let mut gs = [0.0; N1];
            for k in 0..N1 {
                let s = sample_at(lo, hi, k, N1);
                fs[k] = f.eval2(t, s)?;
                gs[k] = g2.eval(s)?;
            }
            let (l, u) = enclose1(&fs, &gs, f.range2(Interval::point(t), Interval::new(lo, hi)));
            ((l * w, u * w), (0.0, (u - l) * w))
        }
        (Span::Dense { lo, hi, .. }, Span::Atom { t: s, w }) => {
            let mut fs = [0.0; N1];
            let mut gs = [0.0; N1];
            for k in 0..N1 {
                let t = sample_at(lo, hi, k, N1);
                fs[k] = f.eval2(t, s)?;
                gs[k] = g1.eval(t)?;
            }
            let (l, u) = enclose1(&fs, &gs, f.range2(Interval::new(lo, hi), Interval::point(s)));
            ((l * w, u * w), ((u - l) * w, 0.0))
        }
        (Span::Dense { lo: x0, hi: x1, .. }, Span::Dense { lo: y0, hi: y1, .. }) => {
            let ts: [f64; N2] = std::array::from_fn(|k| sample_at(x0, x1, k, N2));
            let ss: [f64; N2] = std::array::from_fn(|l| sample_at(y0, y1, l, N2));
            let mut fs = [[0.0; N2]; N2];
            for k in 0..N2 {
                for l in 0..N2 {
                    fs[k][l] = f.eval2(ts[k], ss[l])?;
                }
            }
            let g1s = ts.map(|t| g1.eval(t)).into_iter().collect::<Result<Vec<_>>>()?;
            let g2s = ss.map(|s| g2.eval(s)).into_iter().collect::<Result<Vec<_>>>()?;
            let range = f.range2(Interval::new(x0, x1), Interval::new(y0, y1));
            enclose2(&fs, &g1s.try_into().unwrap(), &g2s.try_into().unwrap(), range)
        }
    };
    Ok(Cell2 { x, y, lower, upper, split })
}

/// `∬ f(t,s) Δg₁(t) Δg₂(s)` over `[a,b) × [c,d)`, refined on product cells.
pub fn rs_double_integral<F, G1, G2>(
    t1: &TimeScale,
    t2: &TimeScale,
    f: &F,
    g1: &G1,
    g2: &G2,
    rect: Rect,
    tol: f64,
) -> Result<IntegralResult>
where
    F: RealFn2 + ?Sized,
    G1: RealFn + ?Sized,
    G2: RealFn + ?Sized,
{
    rs_double_integral_with(t1, t2, f, g1, g2, rect, &Options::with_tol(tol))
}

/// [`rs_double_integral`] with explicit options; `validate` is ignored.
pub fn rs_double_integral_with<F, G1, G2>(
    t1: &TimeScale,
    t2: &TimeScale,
    f: &F,
    g1: &G1,
    g2: &G2,
    rect: Rect,
    opts: &Options,
) -> Result<IntegralResult>
where
    F: RealFn2 + ?Sized,
    G1: RealFn + ?Sized,
    G2: RealFn + ?Sized,
{
    opts.check()?;
    let ax1 = axis(t1, g1, rect.a, rect.b, "t")?;
    let ax2 = axis(t2, g2, rect.c, rect.d, "s")?;

    let mut tail = 0.0;
    let others = |ax: &Axis| -> Vec<f64> { ax.spans.iter().map(Span::pos).collect() };
    for &(at, top, w) in &ax1.remainders {
        let osc = match f.range2(Interval::new(at, top), Interval::new(rect.c, rect.d)) {
            Some(r) => r.hi - r.lo,
            None => {
                let mut m = 0.0f64;
                for s in others(&ax2) {
                    m = m.max((f.eval2(top, s)? - f.eval2(at, s)?).abs());
                }
                2.0 * m
            }
        };
        tail += osc * w * ax2.mass;
    }
    for &(at, top, w) in &ax2.remainders {
        let osc = match f.range2(Interval::new(rect.a, rect.b), Interval::new(at, top)) {
            Some(r) => r.hi - r.lo,
            None => {
                let mut m = 0.0f64;
                for t in others(&ax1) {
                    m = m.max((f.eval2(t, top)? - f.eval2(t, at)?).abs());
                }
                2.0 * m
            }
        };
        tail += osc * w * ax1.mass;
    }

    let mut cells = Vec::with_capacity(ax1.spans.len() * ax2.spans.len());
    for &x in &ax1.spans {
        for &y in &ax2.spans {
            cells.push(enclose_product(f, g1, g2, x, y)?);
        }
    }
    let mut alive = vec![true; cells.len()];
    let mut heap: BinaryHeap<_> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.upper > c.lower)
        .map(|(i, c)| key(c.upper - c.lower, i))
        .collect();
    let mut width: f64 = cells.iter().map(|c| c.upper - c.lower).sum();
    let target = opts.tol - tail;
    let mut live = cells.len();
    let mut refinements = 0;
    while width > target && target > 0.0 && live < opts.max_cells {
        let Some((_, Reverse(i))) = heap.pop() else { break };
        let (x, y, split) = (cells[i].x, cells[i].y, cells[i].split);
        let children = match (x.split(), y.split()) {
            (Some((x0, x1)), Some((y0, y1))) => {
                if split.0 >= split.1 {
                    [(x0, y), (x1, y)]
                } else {
                    [(x, y0), (x, y1)]
                }
            }
            (Some((x0, x1)), None) => [(x0, y), (x1, y)],
            (None, Some((y0, y1))) => [(x, y0), (x, y1)],
            (None, None) => continue,
        };
        let old = cells[i].upper - cells[i].lower;
        alive[i] = false;
        width -= old;
        for (cx, cy) in children {
            let c = enclose_product(f, g1, g2, cx, cy)?;
            width += c.upper - c.lower;
            if c.upper > c.lower {
                heap.push(key(c.upper - c.lower, cells.len()));
            }
            cells.push(c);
            alive.push(true);
        }
        live += 1;
        refinements += 1;
        if width <= target {
            width = cells.iter().zip(&alive).filter(|(_, a)| **a).map(|(c, _)| c.upper - c.lower).sum();
        }
    }

    let mut live_cells: Vec<&Cell2> = cells.iter().zip(&alive).filter(|(_, a)| **a).map(|(c, _)| c).collect();
    live_cells.sort_by(|p, q| p.x.pos().total_cmp(&q.x.pos()).then(p.y.pos().total_cmp(&q.y.pos())));
    let lower = live_cells.iter().map(|c| c.lower).collect::<CompensatedSum>().value();
    let upper = live_cells.iter().map(|c| c.upper).collect::<CompensatedSum>().value();
    let gap_total: f64 = live_cells.iter().map(|c| c.upper - c.lower).sum();
    let converged = gap_total + tail <= opts.tol;
    let result = IntegralResult::from_bounds(lower, upper.max(lower), tail, refinements, converged);
    if converged {
        Ok(result)
    } else {
        Err(Error::NoConvergence { max_cells: opts.max_cells, partial: Box::new(result) })
    }
}

/// Iterated integral: the inner integral is computed to `tol / (4 G)` where `G`
/// is the outer integrator's total increase, the outer one to `tol / 2`, and
/// the inner error is folded into the bounds.
#[allow(clippy::too_many_arguments)]
pub fn iterated_integral<F, G1, G2>(
    t1: &TimeScale,
    t2: &TimeScale,
    f: &F,
    g1: &G1,
    g2: &G2,
    rect: Rect,
    order: Order,
    tol: f64,
) -> Result<IntegralResult>
where
    F: RealFn2 + ?Sized,
    G1: RealFn + ?Sized,
    G2: RealFn + ?Sized,
{
    iterated_integral_with(t1, t2, f, g1, g2, rect, order, &Options::with_tol(tol))
}

/// [`iterated_integral`] with explicit options; `max_cells` bounds each
/// one-dimensional integral.
#[allow(clippy::too_many_arguments)]
pub fn iterated_integral_with<F, G1, G2>(
    t1: &TimeScale,
    t2: &TimeScale,
    f: &F,
    g1: &G1,
    g2: &G2,
    rect: Rect,
    order: Order,
    opts: &Options,
) -> Result<IntegralResult>
where
    F: RealFn2 + ?Sized,
    G1: RealFn + ?Sized,
    G2: RealFn + ?Sized,
{
    opts.check()?;
    match order {
        Order::Ts => iterate(t1, g1, (rect.a, rect.b), t2, g2, (rect.c, rect.d), &|t, s| f.eval2(t, s), ("outer (t)", "inner (s)"), opts),
        Order::St => iterate(t2, g2, (rect.c, rect.d), t1, g1, (rect.a, rect.b), &|s, t| f.eval2(t, s), ("outer (s)", "inner (t)"), opts),
    }
}

#[allow(clippy::too_many_arguments)]
fn iterate<GO, GI>(
    outer: &TimeScale,
    g_out: &GO,
    (a, b): (f64, f64),
    inner: &TimeScale,
    g_in: &GI,
    (c, d): (f64, f64),
    f: &dyn Fn(f64, f64) -> Result<f64>,
    (outer_name, inner_name): (&'static str, &'static str),
    opts: &Options,
) -> Result<IntegralResult>
where
    GO: RealFn + ?Sized,
    GI: RealFn + ?Sized,
{
    let inner_err = |e: Error| Error::Axis { axis: inner_name, source: Box::new(e) };
    let outer_err = |e: Error| Error::Axis { axis: outer_name, source: Box::new(e) };
    let inner_segs = inner.segments(c, d).map_err(inner_err)?;
    validate_integrator(g_in, &inner_segs).map_err(inner_err)?;
    let mass = increment(g_out, outer.canonical(a).map_err(outer_err)?, outer.canonical(b).map_err(outer_err)?)
        .map_err(outer_err)?;
    let tol = opts.tol;
    let inner_opts = Options { tol: tol / (4.0 * mass.max(1e-300)), validate: false, ..*opts };
    let e_in = StdCell::new(0.0f64);
    let integrand = |x: f64| -> Result<f64> {
        let row = |y: f64| f(x, y);
        let r = integrate_segments(&inner_segs, &row, g_in, &inner_opts).map_err(inner_err)?;
        e_in.set(e_in.get().max(r.error_bound()));
        Ok(r.value)
    };
    let outer_opts = Options { tol: tol / 2.0, validate: true, ..*opts };
    let r = rs_integral_with(outer, &integrand, g_out, a, b, &outer_opts).map_err(|e| match e {
        Error::Axis { .. } => e,
        other => outer_err(other),
    })?;
    let widen = e_in.get() * mass;
    let result = IntegralResult::from_bounds(r.lower - widen, r.upper + widen, r.tail_bound, r.refinements, true);
    let converged = result.error_bound() <= tol;
    if converged {
        Ok(result)
    } else {
        let partial = IntegralResult { converged: false, ..result };
        Err(Error::NoConvergence { max_cells: outer_opts.max_cells, partial: Box::new(partial) })
    }
}
