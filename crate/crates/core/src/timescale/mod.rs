//! Time scales: finite unions of closed intervals, isolated points and
//! q-geometric tails, with jump operators and graininess.

mod derivative;
mod partition;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use derivative::delta_derivative;
pub(crate) use derivative::central_derivative;
pub use partition::{common_refinement, make_partition, Partition};

/// Default relative gap below which tail points are truncated.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

const MAX_TAIL_POINTS: u32 = 100_000;

pub(crate) fn snap_tol(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

/// Points `at + (upto - at)·q^(-k)` for `k ≥ first`, together with `at` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QTail {
    pub q: f64,
    pub at: f64,
    pub upto: f64,
    pub first: u32,
}

impl QTail {
    pub fn new(q: f64, at: f64, upto: f64, first: u32) -> Result<QTail> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidScale(format!("qtail ratio must exceed 1, got {q}")));
        }
        if !(at.is_finite() && upto.is_finite() && at < upto) {
            return Err(Error::InvalidScale(format!(
                "qtail needs finite at < upto, got at={at}, upto={upto}"
            )));
        }
        Ok(QTail { q, at, upto, first })
    }

    /// The `k`-th point.
    pub fn point(&self, k: u32) -> f64 {
        if k == 0 {
            self.upto
        } else {
            self.at + (self.upto - self.at) * self.q.powi(-(k as i32))
        }
    }

    /// Largest point.
    pub fn top(&self) -> f64 {
        self.point(self.first)
    }

    /// Gap `point(k) - point(k+1)`.
    pub fn gap(&self, k: u32) -> f64 {
        (self.upto - self.at) * self.q.powi(-(k as i32)) * (1.0 - 1.0 / self.q)
    }

    /// Last index kept before truncation at relative gap `cutoff`.
    pub fn last(&self, cutoff: f64) -> u32 {
        let k = ((1.0 - 1.0 / self.q) / cutoff).ln() / self.q.ln();
        (k.floor().max(0.0) as u32).clamp(self.first, self.first.max(MAX_TAIL_POINTS))
    }

    /// Index of `t` if it is one of the tail points (not the accumulation point).
    pub fn index_of(&self, t: f64) -> Option<u32> {
        let x = (t - self.at) / (self.upto - self.at);
        if !(x > 0.0) || t > self.top() + snap_tol(t) {
            return None;
        }
        let k = (-x.ln() / self.q.ln()).round();
        if k < self.first as f64 || k > 1e6 {
            return None;
        }
        let k = k as u32;
        ((self.point(k) - t).abs() <= 1e-9 * self.gap(k) + snap_tol(t) * 1e-3).then_some(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Component {
    Point(f64),
    Interval { lo: f64, hi: f64 },
    QTail(QTail),
}

impl Component {
    pub fn interval(lo: f64, hi: f64) -> Result<Component> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidScale(format!("interval({lo},{hi})")));
        }
        Ok(if lo == hi { Component::Point(lo) } else { Component::Interval { lo, hi } })
    }

    pub fn min(&self) -> f64 {
        match *self {
            Component::Point(v) => v,
            Component::Interval { lo, .. } => lo,
            Component::QTail(q) => q.at,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Component::Point(v) => v,
            Component::Interval { hi, .. } => hi,
            Component::QTail(q) => q.top(),
        }
    }
}

/// Where a point sits inside a time scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loc {
    Point(usize),
    Interval(usize),
    Tail(usize, u32),
    Accumulation(usize),
}

/// Left/right scatteredness of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub right_scattered: bool,
    pub left_scattered: bool,
}

impl PointClass {
    pub fn is_isolated(&self) -> bool {
        self.right_scattered && self.left_scattered
    }

    pub fn is_dense(&self) -> bool {
        !self.right_scattered && !self.left_scattered
    }

    pub fn is_right_dense(&self) -> bool {
        !self.right_scattered
    }

    pub fn is_left_dense(&self) -> bool {
        !self.left_scattered
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_isolated() {
            f.write_str("isolated")
        } else if self.is_dense() {
            f.write_str("dense")
        } else if self.right_scattered {
            f.write_str("right-scattered, left-dense")
        } else {
            f.write_str("left-scattered, right-dense")
        }
    }
}

/// Piece of `[a, b)_T` used by the integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Right-scattered point `t` with forward jump `next`.
    Atom { t: f64, next: f64 },
    /// Dense stretch `[lo, hi)`.
    Dense { lo: f64, hi: f64 },
    /// The untruncated part `[at, top)` of a q-tail.
    Remainder { at: f64, top: f64 },
}

/// A nonempty bounded time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    comps: Vec<Component>,
    cutoff: f64,
}

impl TimeScale {
    pub fn new(components: Vec<Component>) -> Result<TimeScale> {
        TimeScale::with_cutoff(components, DEFAULT_CUTOFF)
    }

    /// Builds a scale, sorting and merging the components.
    pub fn with_cutoff(mut components: Vec<Component>, cutoff: f64) -> Result<TimeScale> {
        if components.is_empty() {
            return Err(Error::InvalidScale("empty time scale".into()));
        }
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(Error::InvalidScale(format!("tail cutoff must be in (0, 1), got {cutoff}")));
        }
        for c in &mut components {
            match *c {
                Component::Point(v) if !v.is_finite() => {
                    return Err(Error::InvalidScale(format!("point {v} is not finite")))
                }
                Component::Interval { lo, hi } => *c = Component::interval(lo, hi)?,
                Component::QTail(q) => {
                    QTail::new(q.q, q.at, q.upto, q.first)?;
                    if q.q.powi(-(q.first as i32)) == 0.0 {
                        return Err(Error::InvalidScale("qtail skip is too large".into()));
                    }
                }
                _ => {}
            }
        }
        components.sort_by(|x, y| x.min().total_cmp(&y.min()).then(x.max().total_cmp(&y.max())));
        let mut out: Vec<Component> = Vec::with_capacity(components.len());
        for c in components {
            let Some(last) = out.last_mut() else {
                out.push(c);
                continue;
            };
            let touch = c.min() <= last.max() + snap_tol(last.max());
            match (*last, c) {
                (_, _) if !touch => out.push(c),
                (Component::Interval { lo, hi }, Component::Interval { hi: h2, .. }) => {
                    *last = Component::Interval { lo, hi: hi.max(h2) }
                }
                (Component::Interval { .. }, Component::Point(_)) => {}
                (Component::Point(p), Component::Interval { lo, hi }) => {
                    *last = Component::Interval { lo: lo.min(p), hi }
                }
                (Component::Point(_), Component::Point(_)) => {}
                (Component::Point(p), Component::QTail(q)) if (p - q.at).abs() <= snap_tol(p) => {
                    *last = Component::QTail(q)
                }
                (Component::QTail(q), Component::Point(p))
                    if q.index_of(p).is_some() || (p - q.at).abs() <= snap_tol(p) => {}
                (a, b) => {
                    return Err(Error::InvalidScale(format!(
                        "components {a:?} and {b:?} overlap; a q-tail may only share its own points"
                    )))
                }
            }
        }
        Ok(TimeScale { comps: out, cutoff })
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn min(&self) -> f64 {
        self.comps[0].min()
    }

    pub fn max(&self) -> f64 {
        self.comps[self.comps.len() - 1].max()
    }

    /// True when the scale has no dense stretch and no tail.
    pub fn is_discrete(&self) -> bool {
        self.comps.iter().all(|c| matches!(c, Component::Point(_)))
    }

    /// Locates `t`, tolerating a relative error of about 1e-12. Deep in a
    /// tail several points may lie within that tolerance; the nearest wins.
    pub fn locate(&self, t: f64) -> Result<Loc> {
        if !t.is_finite() {
            return Err(Error::PointNotInScale(t));
        }
        let tol = snap_tol(t);
        let lo = self.comps.partition_point(|c| c.max() < t - tol);
        let hi = self.comps.partition_point(|c| c.min() <= t + tol);
        let mut best: Option<(f64, Loc)> = None;
        let mut offer = |d: f64, loc: Loc| {
            if d <= tol && best.is_none_or(|(b, _)| d < b) {
                best = Some((d, loc));
            }
        };
        for i in lo..hi.max(lo) {
            match self.comps[i] {
                Component::Point(v) => offer((v - t).abs(), Loc::Point(i)),
                Component::Interval { lo, hi } => offer((lo - t).max(t - hi).max(0.0), Loc::Interval(i)),
                Component::QTail(q) => {
                    if let Some(k) = q.index_of(t) {
                        offer((q.point(k) - t).abs(), Loc::Tail(i, k));
                    }
                    offer((t - q.at).abs(), Loc::Accumulation(i));
                }
            }
        }
        best.map(|(_, loc)| loc).ok_or(Error::PointNotInScale(t))
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_ok()
    }

    /// The stored representative of `t` (exact endpoints and tail points).
    pub fn canonical(&self, t: f64) -> Result<f64> {
        Ok(match self.locate(t)? {
            Loc::Point(i) => self.comps[i].min(),
            Loc::Interval(i) => match self.comps[i] {
                Component::Interval { lo, hi } => t.clamp(lo, hi),
                _ => unreachable!(),
            },
            Loc::Tail(i, k) => self.tail(i).point(k),
            Loc::Accumulation(i) => self.comps[i].min(),
        })
    }

    fn tail(&self, i: usize) -> QTail {
        match self.comps[i] {
            Component::QTail(q) => q,
            _ => unreachable!("component {i} is not a tail"),
        }
    }

    fn next_min(&self, i: usize) -> Option<f64> {
        self.comps.get(i + 1).map(Component::min)
    }

    fn prev_max(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).map(|j| self.comps[j].max())
    }

    /// Forward jump σ(t); σ(max T) = max T.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        let loc = self.locate(t)?;
        let t = self.canonical(t)?;
        Ok(match loc {
            Loc::Point(i) => self.next_min(i).unwrap_or(t),
            Loc::Interval(i) if t < self.comps[i].max() => t,
            Loc::Interval(i) => self.next_min(i).unwrap_or(t),
            Loc::Tail(i, k) => {
                let q = self.tail(i);
                if k > q.first {
                    q.point(k - 1)
                } else {
                    self.next_min(i).unwrap_or(t)
                }
            }
            Loc::Accumulation(_) => t,
        })
    }

    /// Backward jump ρ(t); ρ(min T) = min T.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let loc = self.locate(t)?;
        let t = self.canonical(t)?;
        Ok(match loc {
            Loc::Point(i) | Loc::Accumulation(i) => self.prev_max(i).unwrap_or(t),
            Loc::Interval(i) if t > self.comps[i].min() => t,
            Loc::Interval(i) => self.prev_max(i).unwrap_or(t),
            Loc::Tail(i, k) => self.tail(i).point(k + 1),
        })
    }

    /// Graininess μ(t) = σ(t) - t.
    pub fn mu(&self, t: f64) -> Result<f64> {
        Ok(self.sigma(t)? - self.canonical(t)?)
    }

    /// Classification from σ and ρ. The maximum has no points to its right and
    /// counts as right-scattered; likewise the minimum is left-scattered.
    pub fn classify(&self, t: f64) -> Result<PointClass> {
        let c = self.canonical(t)?;
        Ok(PointClass {
            right_scattered: c == self.max() || self.sigma(c)? > c,
            left_scattered: c == self.min() || self.rho(c)? < c,
        })
    }

    /// The time scale `[a, b] ∩ T`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<TimeScale> {
        if !(a < b) {
            return Err(Error::EmptyRestriction { a, b });
        }
        let a = self.canonical(a).map_err(|_| Error::EndpointNotInScale(a))?;
        let b = self.canonical(b).map_err(|_| Error::EndpointNotInScale(b))?;
        if a >= b {
            return Err(Error::EmptyRestriction { a, b });
        }
        let mut out = Vec::new();
        for c in &self.comps {
            if c.max() < a || c.min() > b {
                continue;
            }
            match *c {
                Component::Point(v) => out.push(Component::Point(v)),
                Component::Interval { lo, hi } => out.push(Component::interval(lo.max(a), hi.min(b))?),
                Component::QTail(q) => {
                    let first = if b < q.top() {
                        // None when b is the accumulation point
                        q.index_of(b)
                    } else {
                        Some(q.first)
                    };
                    match (first, a > q.at) {
                        (None, _) => out.push(Component::Point(q.at)),
                        (Some(first), false) => out.push(Component::QTail(QTail { first, ..q })),
                        (Some(first), true) => {
                            let last = q.index_of(a).expect("a is a tail point");
                            out.extend((first..=last).map(|k| Component::Point(q.point(k))));
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyRestriction { a, b });
        }
        out.sort_by(|x, y| x.min().total_cmp(&y.min()));
        Ok(TimeScale { comps: out, cutoff: self.cutoff })
    }

    /// Decomposes `[a, b)_T` into atoms, dense stretches and tail remainders,
    /// in ascending order.
    pub fn segments(&self, a: f64, b: f64) -> Result<Vec<Segment>> {
        let r = self.restrict(a, b)?;
        let b = r.max();
        let mut out = Vec::new();
        for (i, c) in r.comps.iter().enumerate() {
            let next = r.next_min(i);
            match *c {
                Component::Point(v) => {
                    if let Some(n) = next {
                        out.push(Segment::Atom { t: v, next: n });
                    }
                }
                Component::Interval { lo, hi } => {
                    out.push(Segment::Dense { lo, hi });
                    if let Some(n) = next {
                        out.push(Segment::Atom { t: hi, next: n });
                    }
                }
                Component::QTail(q) => {
                    let last = q.last(self.cutoff).max(q.first);
                    out.push(Segment::Remainder { at: q.at, top: q.point(last) });
                    for k in (q.first..=last).rev() {
                        let t = q.point(k);
                        let n = if k > q.first { Some(q.point(k - 1)) } else { next };
                        if let Some(n) = n {
                            if t < b {
                                out.push(Segment::Atom { t, next: n });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Scattered points of `[a, b]_T` (tail points down to the cutoff, and the
    /// tail accumulation points), plus dense stretches, in order.
    pub(crate) fn skeleton(&self, a: f64, b: f64) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
        let mut points = Vec::new();
        let mut stretches = Vec::new();
        for s in self.segments(a, b)? {
            match s {
                Segment::Atom { t, .. } => points.push(t),
                Segment::Dense { lo, hi } => {
                    points.push(lo);
                    stretches.push((lo, hi));
                }
                Segment::Remainder { at, top } => {
                    points.push(at);
                    points.push(top);
                }
            }
        }
        points.push(self.canonical(b)?);
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok((points, stretches))
    }
}
