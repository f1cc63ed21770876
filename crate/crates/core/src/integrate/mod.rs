//! Riemann–Stieltjes Δ-integrals: Darboux bounds, Δ-sums and adaptive
//! single, double and iterated integrals.
//!
//! `[a, b)_T` is split into right-scattered points, whose contribution
//! `f(t)(g(σ(t)) - g(t))` is exact, dense stretches, refined adaptively until
//! the summed cell widths meet the tolerance, and q-tail remainders below the
//! truncation cutoff, which are bounded separately as `tail_bound`.

mod double;
mod enclosure;

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Identity, RealFn, Scaled};
use crate::interval::Interval;
use crate::numeric::{Approx, CompensatedSum};
use crate::timescale::{delta_derivative, Partition, Segment, TimeScale};

pub use double::{iterated_integral, iterated_integral_with, rs_double_integral, rs_double_integral_with, Order, Rect};

use enclosure::{enclose1, sample_bounds, N1};

/// Default refinement budget (number of live cells).
pub const DEFAULT_MAX_CELLS: usize = 1_000_000;

const INITIAL_CELLS: usize = 4;
const VALIDATION_SAMPLES: usize = 513;

static ENV_MAX_CELLS: LazyLock<usize> = LazyLock::new(|| {
    std::env::var("TSINT_MAX_CELLS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_MAX_CELLS)
});

/// Value with certified-style bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub tail_bound: f64,
    pub refinements: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub(crate) fn zero() -> Self {
        IntegralResult::from_bounds(0.0, 0.0, 0.0, 0, true)
    }

    fn from_bounds(lower: f64, upper: f64, tail_bound: f64, refinements: usize, converged: bool) -> Self {
        let value = if lower == upper { lower } else { lower + (upper - lower) / 2.0 };
        IntegralResult { value, lower, upper, gap: upper - lower, tail_bound, refinements, converged }
    }

    /// Total error budget `gap + tail_bound`.
    pub fn error_bound(&self) -> f64 {
        self.gap + self.tail_bound
    }

    pub fn approx(&self) -> Approx {
        Approx::new(self.value, self.error_bound())
    }
}

/// Tuning knobs for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub tol: f64,
    /// Refinement budget; defaults to `TSINT_MAX_CELLS` or 10⁶.
    pub max_cells: usize,
    /// Check that the integrator is non-decreasing before integrating.
    pub validate: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { tol: 1e-8, max_cells: *ENV_MAX_CELLS, validate: true }
    }
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Options { tol, ..Options::default() }
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_cells == 0 {
            return Err(Error::InvalidArgument("cell budget must be positive".into()));
        }
        Ok(())
    }
}

/// `g(t1) - g(t0)`, clamping drops within rounding to zero.
pub(crate) fn increment<G: RealFn + ?Sized>(g: &G, t0: f64, t1: f64) -> Result<f64> {
    let (a, b) = (g.eval(t0)?, g.eval(t1)?);
    clamp_increment(t0, a, b)
}

fn clamp_increment(t0: f64, a: f64, b: f64) -> Result<f64> {
    let d = b - a;
    if d >= 0.0 {
        Ok(d)
    } else if d >= -1e-12 * a.abs().max(b.abs()).max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NonMonotoneIntegrator { at: t0, drop: d })
    }
}

/// Checks `g(σ(t)) ≥ g(t)` at scattered points and sampled non-decrease on
/// dense stretches.
pub(crate) fn validate_integrator<G: RealFn + ?Sized>(g: &G, segs: &[Segment]) -> Result<()> {
    for s in segs {
        match *s {
            Segment::Atom { t, next } => {
                increment(g, t, next)?;
            }
            Segment::Remainder { at, top } => {
                increment(g, at, top)?;
            }
            Segment::Dense { lo, hi } => {
                let n = VALIDATION_SAMPLES - 1;
                let mut prev = g.eval(lo)?;
                for k in 1..=n {
                    let t0 = lo + (hi - lo) * ((k - 1) as f64 / n as f64);
                    let t = if k == n { hi } else { lo + (hi - lo) * (k as f64 / n as f64) };
                    let v = g.eval(t)?;
                    clamp_increment(t0, prev, v)?;
                    prev = v;
                }
            }
        }
    }
    Ok(())
}

/// Bounds of `f` over `[lo, hi]`: interval enclosure if available, otherwise
/// 17 samples with a Lipschitz pad.
fn bounds_on<F: RealFn + ?Sized>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if let Some(r) = f.range(Interval::new(lo, hi)) {
        return Ok((r.lo, r.hi));
    }
    let fs: Vec<f64> = (0..N1).map(|k| f.eval(sample_at(lo, hi, k, N1))).collect::<Result<_>>()?;
    Ok(sample_bounds(&fs))
}

pub(crate) fn sample_at(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if k == n - 1 {
        hi
    } else {
        lo + (hi - lo) * (k as f64 / (n - 1) as f64)
    }
}

/// Lower and upper Darboux–Stieltjes sums `L(P,f,g)`, `U(P,f,g)`.
pub fn darboux_bounds<F, G>(scale: &TimeScale, f: &F, g: &G, p: &Partition) -> Result<(f64, f64)>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let segs = scale.segments(p.a(), p.b())?;
    let mut lower = CompensatedSum::new();
    let mut upper = CompensatedSum::new();
    let mut first = 0;
    for (x, y) in p.cells() {
        let (mut m, mut big_m) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut j = first;
        while j < segs.len() {
            let piece = match segs[j] {
                Segment::Atom { t, .. } if t >= y => break,
                Segment::Atom { t, .. } if t >= x => {
                    let v = f.eval(t)?;
                    Some((v, v))
                }
                Segment::Dense { lo, .. } | Segment::Remainder { at: lo, .. } if lo >= y => break,
                Segment::Dense { lo, hi } | Segment::Remainder { at: lo, top: hi } => {
                    let (plo, phi) = (lo.max(x), hi.min(y));
                    if plo < phi {
                        Some(bounds_on(f, plo, phi)?)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            if let Some((lo, hi)) = piece {
                m = m.min(lo);
                big_m = big_m.max(hi);
            }
            j += 1;
        }
        while first < segs.len() {
            let done = match segs[first] {
                Segment::Atom { t, .. } => t < y,
                Segment::Dense { hi, .. } | Segment::Remainder { top: hi, .. } => hi <= y,
            };
            if !done {
                break;
            }
            first += 1;
        }
        if m > big_m {
            return Err(Error::InvalidPartition(format!("cell [{x}, {y}) contains no point of the scale")));
        }
        let dg = increment(g, x, y)?;
        lower.add(m * dg);
        upper.add(big_m * dg);
    }
    Ok((lower.value(), upper.value()))
}

/// A Riemann–Stieltjes Δ-sum together with its partition and tags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RSSum {
    pub value: f64,
    pub partition: Partition,
    pub tags: Vec<f64>,
}

/// `Σ f(x_i)(g(t_i) - g(t_{i-1}))` with `x_i ∈ [t_{i-1}, t_i)_T`.
pub fn rs_sum<F, G>(scale: &TimeScale, f: &F, g: &G, p: &Partition, tags: &[f64]) -> Result<RSSum>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    if tags.len() != p.len() {
        return Err(Error::InvalidArgument(format!(
            "{} selection points for {} cells",
            tags.len(),
            p.len()
        )));
    }
    let mut sum = CompensatedSum::new();
    let mut canonical = Vec::with_capacity(tags.len());
    for (i, ((lo, hi), &x)) in p.cells().zip(tags).enumerate() {
        let out = || Error::SelectionOutOfCell { index: i, x, lo, hi };
        let xc = scale.canonical(x).map_err(|_| out())?;
        if !(lo <= xc && xc < hi) {
            return Err(out());
        }
        sum.add(f.eval(xc)? * (g.eval(hi)? - g.eval(lo)?));
        canonical.push(xc);
    }
    Ok(RSSum { value: sum.value(), partition: p.clone(), tags: canonical })
}

struct Cell {
    lo: f64,
    hi: f64,
    stretch: (f64, f64),
    lower: f64,
    upper: f64,
}

fn enclose_cell<F, G>(f: &F, g: &G, lo: f64, hi: f64, stretch: (f64, f64)) -> Result<Cell>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let mut fs = [0.0; N1];
    let mut gs = [0.0; N1];
    for k in 0..N1 {
        let x = sample_at(lo, hi, k, N1);
        fs[k] = f.eval_dense(x, stretch)?;
        gs[k] = g.eval(x)?;
    }
    let (lower, upper) = enclose1(&fs, &gs, f.range(Interval::new(lo, hi)));
    Ok(Cell { lo, hi, stretch, lower, upper })
}

/// Width ordering key for the refinement heap: wider first, then older first.
fn key(width: f64, idx: usize) -> (u64, Reverse<usize>) {
    (width.max(0.0).to_bits(), Reverse(idx))
}

/// Integrates over pre-computed segments.
pub(crate) fn integrate_segments<F, G>(segs: &[Segment], f: &F, g: &G, opts: &Options) -> Result<IntegralResult>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let mut items: Vec<(f64, f64, f64)> = Vec::new();
    let mut tail = 0.0;
    let mut cells: Vec<Cell> = Vec::new();
    for s in segs {
        match *s {
            Segment::Atom { t, next } => {
                let v = f.eval(t)? * increment(g, t, next)?;
                items.push((t, v, v));
            }
            Segment::Remainder { at, top } => {
                let w = increment(g, at, top)?;
                let fa = f.eval(at)?;
                let osc = match f.range(Interval::new(at, top)) {
                    Some(r) => r.hi - r.lo,
                    None => 2.0 * (f.eval(top)? - fa).abs(),
                };
                items.push((at, fa * w, fa * w));
                tail += osc * w;
            }
            Segment::Dense { lo, hi } => {
                for i in 0..INITIAL_CELLS {
                    let a = sample_at(lo, hi, i, INITIAL_CELLS + 1);
                    let b = sample_at(lo, hi, i + 1, INITIAL_CELLS + 1);
                    cells.push(enclose_cell(f, g, a, b, (lo, hi))?);
                }
            }
        }
    }

    let mut alive = vec![true; cells.len()];
    let mut heap: BinaryHeap<_> = cells.iter().enumerate().map(|(i, c)| key(c.upper - c.lower, i)).collect();
    let mut width: f64 = cells.iter().map(|c| c.upper - c.lower).sum();
    let target = opts.tol - tail;
    let mut live = cells.len();
    let mut refinements = 0;
    while width > target && target > 0.0 && live < opts.max_cells {
        let Some((_, Reverse(i))) = heap.pop() else { break };
        let (lo, hi, stretch) = (cells[i].lo, cells[i].hi, cells[i].stretch);
        let mid = lo + (hi - lo) / 2.0;
        if !(lo < mid && mid < hi) || hi - lo < 1e-12 * (stretch.1 - stretch.0) {
            continue;
        }
        let left = enclose_cell(f, g, lo, mid, stretch)?;
        let right = enclose_cell(f, g, mid, hi, stretch)?;
        width += (left.upper - left.lower) + (right.upper - right.lower) - (cells[i].upper - cells[i].lower);
        alive[i] = false;
        for c in [left, right] {
            heap.push(key(c.upper - c.lower, cells.len()));
            cells.push(c);
            alive.push(true);
        }
        live += 1;
        refinements += 1;
        if width <= target {
            // guard against drift in the running total
            width = cells.iter().zip(&alive).filter(|(_, a)| **a).map(|(c, _)| c.upper - c.lower).sum();
        }
    }

    items.extend(cells.iter().zip(&alive).filter(|(_, a)| **a).map(|(c, _)| (c.lo, c.lower, c.upper)));
    items.sort_by(|x, y| x.0.total_cmp(&y.0));
    let lower = items.iter().map(|x| x.1).collect::<CompensatedSum>().value();
    let upper = items.iter().map(|x| x.2).collect::<CompensatedSum>().value();
    let gap_total: f64 = cells.iter().zip(&alive).filter(|(_, a)| **a).map(|(c, _)| c.upper - c.lower).sum();
    let converged = gap_total + tail <= opts.tol;
    let result = IntegralResult::from_bounds(lower, upper.max(lower), tail, refinements, converged);
    if converged {
        Ok(result)
    } else {
        Err(Error::NoConvergence { max_cells: opts.max_cells, partial: Box::new(result) })
    }
}

/// `∫_a^b f(t) Δg(t)` to absolute tolerance `tol` (gap plus tail bound).
pub fn rs_integral<F, G>(scale: &TimeScale, f: &F, g: &G, a: f64, b: f64, tol: f64) -> Result<IntegralResult>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    rs_integral_with(scale, f, g, a, b, &Options::with_tol(tol))
}

pub fn rs_integral_with<F, G>(scale: &TimeScale, f: &F, g: &G, a: f64, b: f64, opts: &Options) -> Result<IntegralResult>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    opts.check()?;
    let segs = scale.segments(a, b)?;
    if opts.validate {
        validate_integrator(g, &segs)?;
    }
    integrate_segments(&segs, f, g, opts)
}

/// `t ↦ f(t) g^Δ(t)`: the scattered quotient off dense stretches, the
/// one-sided derivative inside them.
struct Transition<'a, F: ?Sized, G: ?Sized> {
    scale: &'a TimeScale,
    f: &'a F,
    g: &'a G,
}

impl<F: RealFn + ?Sized, G: RealFn + ?Sized> RealFn for Transition<'_, F, G> {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.f.eval(t)? * delta_derivative(self.scale, self.g, t, None)?)
    }

    fn eval_dense(&self, t: f64, stretch: (f64, f64)) -> Result<f64> {
        Ok(self.f.eval(t)? * crate::timescale::central_derivative(self.g, t, stretch)?)
    }
}

/// `∫_a^b f(t) g^Δ(t) Δt`, the right-hand side of the transition identity.
pub fn rs_integral_via_transition<F, G>(scale: &TimeScale, f: &F, g: &G, a: f64, b: f64, tol: f64) -> Result<IntegralResult>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    rs_integral_via_transition_with(scale, f, g, a, b, &Options::with_tol(tol))
}

pub fn rs_integral_via_transition_with<F, G>(
    scale: &TimeScale,
    f: &F,
    g: &G,
    a: f64,
    b: f64,
    opts: &Options,
) -> Result<IntegralResult>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    opts.check()?;
    let segs = scale.segments(a, b)?;
    if opts.validate {
        validate_integrator(g, &segs)?;
    }
    let h = Transition { scale, f, g };
    integrate_segments(&segs, &h, &Identity, opts)
}

/// `t ↦ ∫_a^t f Δg` on `[a, b]_T`.
pub struct Cumulative<'a, F: ?Sized, G: ?Sized> {
    scale: &'a TimeScale,
    f: &'a F,
    g: &'a G,
    a: f64,
    b: f64,
    opts: Options,
}

pub fn cumulative<'a, F, G>(scale: &'a TimeScale, f: &'a F, g: &'a G, a: f64, b: f64, tol: f64) -> Result<Cumulative<'a, F, G>>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let opts = Options::with_tol(tol);
    opts.check()?;
    let segs = scale.segments(a, b)?;
    validate_integrator(g, &segs)?;
    let a = scale.canonical(a)?;
    let b = scale.canonical(b)?;
    Ok(Cumulative { scale, f, g, a, b, opts: Options { validate: false, ..opts } })
}

impl<F: RealFn + ?Sized, G: RealFn + ?Sized> Cumulative<'_, F, G> {
    fn point(&self, t: f64) -> Result<f64> {
        let t = self.scale.canonical(t)?;
        if t < self.a || t > self.b {
            return Err(Error::InvalidArgument(format!("{t} is outside [{}, {}]", self.a, self.b)));
        }
        Ok(t)
    }

    /// `∫_a^t f Δg`.
    pub fn at(&self, t: f64) -> Result<IntegralResult> {
        let t = self.point(t)?;
        if t == self.a {
            return Ok(IntegralResult::zero());
        }
        rs_integral_with(self.scale, self.f, self.g, self.a, t, &self.opts)
    }

    /// Values at an ascending list of points, accumulated piece by piece so
    /// that each piece gets an equal share of the tolerance.
    pub fn on_grid(&self, ts: &[f64]) -> Result<Vec<IntegralResult>> {
        let ts = ts.iter().map(|&t| self.point(t)).collect::<Result<Vec<_>>>()?;
        if ts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("grid points must be ascending".into()));
        }
        let opts = Options { tol: self.opts.tol / ts.len().max(1) as f64, ..self.opts };
        let mut out = Vec::with_capacity(ts.len());
        let (mut lower, mut upper, mut tail) = (CompensatedSum::new(), CompensatedSum::new(), 0.0);
        let mut refinements = 0;
        let mut prev = self.a;
        for t in ts {
            if t > prev {
                let piece = rs_integral_with(self.scale, self.f, self.g, prev, t, &opts)?;
                lower.add(piece.lower);
                upper.add(piece.upper);
                tail += piece.tail_bound;
                refinements += piece.refinements;
                prev = t;
            }
            out.push(IntegralResult::from_bounds(lower.value(), upper.value(), tail, refinements, true));
        }
        Ok(out)
    }
}

/// Comparison of `∫ αf Δ(βg)` with `αβ ∫ f Δg`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub bound: f64,
    pub passed: bool,
}

pub fn linearity_check<F, G>(
    scale: &TimeScale,
    f: &F,
    g: &G,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<LinearityReport>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be non-negative, got {beta}")));
    }
    let lhs = rs_integral(scale, &Scaled(alpha, f), &Scaled(beta, g), a, b, tol)?.value;
    let rhs = alpha * beta * rs_integral(scale, f, g, a, b, tol)?.value;
    let difference = (lhs - rhs).abs();
    let bound = 2.0 * tol * (alpha * beta).abs().max(1.0);
    Ok(LinearityReport { lhs, rhs, difference, bound, passed: difference <= bound })
}
