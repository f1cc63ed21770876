use std::collections::BTreeMap;
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{missing, CheckReport, InequalityId, InstanceSpec, Ordering, RELATIVE_SLACK};
use crate::error::{Error, Result};
use crate::expr::{ConvexFn, ExprFn};
use crate::func::{Lambda, RealFn, RealFn2};
use crate::integrate::{
    cumulative, integrate_segments, rs_double_integral, sample_at, validate_integrator, Options, Rect,
};
use crate::interval::Interval;
use crate::numeric::Approx;
use crate::timescale::{Segment, TimeScale};

/// Samples per dense stretch for pointwise hypotheses (sign, domain, monotonicity).
const FINE_SAMPLES: usize = 513;
/// Samples per dense stretch for pairwise ordering checks.
const PAIR_SAMPLES: usize = 65;
const RANDOM_PAIRS: usize = 64;
const SUBGRADIENT_SAMPLES: usize = 4096;
const NEGLIGIBLE: f64 = 1e-12;

/// A validated scale restriction `[a, b]_T` with its segments.
pub(crate) struct Setup<'a> {
    pub spec: &'a InstanceSpec,
    pub scale: TimeScale,
    pub a: f64,
    pub b: f64,
    segs: Vec<Segment>,
    opts: Options,
}

impl<'a> Setup<'a> {
    pub fn new(spec: &'a InstanceSpec) -> Result<Setup<'a>> {
        if !(spec.tol > 0.0 && spec.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", spec.tol)));
        }
        let scale = spec.scale.build()?;
        let end = |v: f64| scale.canonical(v).map_err(|_| Error::EndpointNotInScale(v));
        let a = end(spec.a.unwrap_or(scale.min()))?;
        let b = end(spec.b.unwrap_or(scale.max()))?;
        let segs = scale.segments(a, b)?;
        validate_integrator(&spec.g, &segs)?;
        let opts = Options { tol: spec.tol, validate: false, ..Options::default() };
        Ok(Setup { spec, scale, a, b, segs, opts })
    }

    pub fn integral(&self, f: &dyn RealFn) -> Result<Approx> {
        self.integral_to(f, self.opts.tol)
    }

    pub fn integral_to(&self, f: &dyn RealFn, tol: f64) -> Result<Approx> {
        let opts = Options { tol, ..self.opts };
        Ok(integrate_segments(&self.segs, f, &self.spec.g, &opts)?.approx())
    }

    /// Scattered points, accumulation points, `n` samples per dense stretch and `b`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.segs {
            match *s {
                Segment::Atom { t, .. } => out.push(t),
                Segment::Remainder { at, .. } => out.push(at),
                Segment::Dense { lo, hi } => out.extend((0..n).map(|k| sample_at(lo, hi, k, n))),
            }
        }
        out.push(self.b);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> f64 {
        let k = rng.gen_range(0..=self.segs.len());
        match self.segs.get(k) {
            Some(Segment::Atom { t, .. }) => *t,
            Some(Segment::Remainder { at, .. }) => *at,
            Some(Segment::Dense { lo, hi }) => rng.gen_range(*lo..*hi),
            None => self.b,
        }
    }

    fn nonnegative(&self, name: &str, f: &dyn RealFn) -> Result<()> {
        for t in self.grid(FINE_SAMPLES) {
            let v = f.eval(t)?;
            if v < -NEGLIGIBLE {
                return Err(Error::precondition(format!("{name} is negative ({name}(t) = {v})"), Some(t)));
            }
        }
        Ok(())
    }

    fn maps_into(&self, name: &str, x: &dyn RealFn, convex: &ConvexFn) -> Result<()> {
        for t in self.grid(FINE_SAMPLES) {
            let v = x.eval(t)?;
            if !convex.contains(v) {
                return Err(Error::precondition(
                    format!("{name}(t) = {v} is outside the domain of {}", convex.name()),
                    Some(t),
                ));
            }
        }
        Ok(())
    }

    fn co_monotone(&self, y: &dyn RealFn, d: &dyn RealFn) -> Result<()> {
        let grid = self.grid(FINE_SAMPLES);
        let vy = grid.iter().map(|&t| y.eval(t)).collect::<Result<Vec<_>>>()?;
        let vd = grid.iter().map(|&t| d.eval(t)).collect::<Result<Vec<_>>>()?;
        let breaks = |v: &[f64], dir: f64| {
            (1..v.len()).find(|&i| dir * (v[i] - v[i - 1]) < -NEGLIGIBLE * v[i].abs().max(v[i - 1].abs()).max(1.0))
        };
        for dir in [1.0, -1.0] {
            if breaks(&vy, dir).is_none() && breaks(&vd, dir).is_none() {
                return Ok(());
            }
        }
        let i = breaks(&vy, 1.0).or_else(|| breaks(&vd, 1.0)).unwrap_or(0);
        Err(Error::precondition("y and x - y are not monotone in the same direction", Some(grid[i])))
    }

    fn ordered(&self, f1: &ExprFn, f2: &ExprFn, order: Ordering) -> Result<()> {
        let sign = order.sign();
        let test = |t: f64, s: f64, u1: f64, u2: f64, w1: f64, w2: f64| {
            let product = (u1 - w1) * (u2 - w2);
            if sign * product < -NEGLIGIBLE {
                Err(Error::OrderingViolated { t, s, product })
            } else {
                Ok(())
            }
        };
        let grid = self.grid(PAIR_SAMPLES);
        let v1 = grid.iter().map(|&t| f1.eval1(t)).collect::<Result<Vec<_>>>()?;
        let v2 = grid.iter().map(|&t| f2.eval1(t)).collect::<Result<Vec<_>>>()?;
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                test(grid[i], grid[j], v1[i], v2[i], v1[j], v2[j])?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        for _ in 0..RANDOM_PAIRS {
            let (t, s) = (self.random_point(&mut rng), self.random_point(&mut rng));
            test(t, s, f1.eval1(t)?, f2.eval1(t)?, f1.eval1(s)?, f2.eval1(s)?)?;
        }
        Ok(())
    }

    /// `p`, or the unit weight when the instance leaves it out.
    fn weight(&self) -> Result<&'a ExprFn> {
        static UNIT: LazyLock<ExprFn> = LazyLock::new(|| ExprFn::constant(1.0));
        Ok(self.spec.p.as_ref().unwrap_or(&UNIT))
    }
}

fn need<'s>(e: &'s Option<ExprFn>, name: &str) -> Result<&'s ExprFn> {
    e.as_ref().ok_or_else(|| missing(name))
}

fn product<'a>(fs: Vec<&'a dyn RealFn>) -> Lambda<'a> {
    let ranges = fs.clone();
    Lambda::new(move |t| fs.iter().try_fold(1.0, |acc, f| Ok(acc * f.eval(t)?))).with_range(move |iv| {
        ranges.iter().try_fold(Interval::point(1.0), |acc, f| acc.mul(f.range(iv)?).ok())
    })
}

fn compose<'a>(convex: &'a ConvexFn, x: &'a dyn RealFn) -> Lambda<'a> {
    Lambda::new(move |t| convex.eval(x.eval(t)?)).with_range(move |iv| convex.range(x.range(iv)?))
}

fn subgradient_of<'a>(convex: &'a ConvexFn, y: &'a dyn RealFn) -> Lambda<'a> {
    Lambda::new(move |t| convex.phi(y.eval(t)?)).with_range(move |iv| convex.phi_range(y.range(iv)?))
}

fn difference<'a>(x: &'a dyn RealFn, y: &'a dyn RealFn) -> Lambda<'a> {
    Lambda::new(move |t| Ok(x.eval(t)? - y.eval(t)?)).with_range(move |iv| x.range(iv)?.sub(y.range(iv)?).ok())
}

fn reciprocal(f: &dyn RealFn) -> Lambda<'_> {
    Lambda::new(move |t| Ok(1.0 / f.eval(t)?)).with_range(move |iv| Interval::point(1.0).div(f.range(iv)?).ok())
}

fn report(
    spec: &InstanceSpec,
    id: InequalityId,
    lhs: f64,
    rhs: f64,
    margin: Approx,
    details: BTreeMap<String, f64>,
) -> CheckReport {
    let slack = RELATIVE_SLACK * lhs.abs().max(rhs.abs()).max(1.0) + margin.err;
    CheckReport {
        inequality: id,
        lhs,
        rhs,
        margin: margin.value,
        slack,
        passed: margin.value >= -slack,
        details,
        instance: spec.clone(),
        replay: spec.replay_command(id),
    }
}

fn details<const N: usize>(items: [(&str, f64); N]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Dispatches to the check for `id`.
pub fn check(id: InequalityId, spec: &InstanceSpec) -> Result<CheckReport> {
    match id {
        InequalityId::Positivity => check_positivity(spec),
        InequalityId::Monotone => check_monotone_cumulative(spec),
        InequalityId::Subdifferential => check_subdifferential(spec),
        InequalityId::Theorem5 => check_theorem5(spec),
        InequalityId::Jensen => check_jensen(spec),
        InequalityId::ReverseJensen => check_reverse_jensen(spec),
        InequalityId::ChebyshevKernel => check_chebyshev_kernel(spec),
        InequalityId::Chebyshev => check_chebyshev(spec),
        InequalityId::Winckler => check_winckler(spec),
        InequalityId::MajorisationEq => check_majorisation_eq(spec),
        InequalityId::MajorisationLe => check_majorisation_le(spec),
    }
}

/// `∫ f Δg ≥ 0` for `f ≥ 0`.
pub fn check_positivity(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let f = need(&spec.f, "f")?;
    st.nonnegative("f", f)?;
    let v = st.integral(f)?;
    Ok(report(spec, InequalityId::Positivity, v.value, 0.0, v, BTreeMap::new()))
}

/// `t ↦ ∫_a^t f Δg` is non-decreasing for `f ≥ 0`; the margin is the
/// smallest increment over pairs of grid points.
pub fn check_monotone_cumulative(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let f = need(&spec.f, "f")?;
    st.nonnegative("f", f)?;
    let grid = st.grid(PAIR_SAMPLES);
    let cum = cumulative(&st.scale, f, &spec.g, st.a, st.b, spec.tol)?.on_grid(&grid)?;
    let mut running_max = f64::NEG_INFINITY;
    let mut margin = f64::INFINITY;
    let mut err: f64 = 0.0;
    for r in &cum {
        if running_max.is_finite() {
            margin = margin.min(r.value - running_max);
        }
        running_max = running_max.max(r.value);
        err = err.max(r.error_bound());
    }
    if !margin.is_finite() {
        margin = 0.0;
    }
    let last = cum.last().map_or(0.0, |r| r.value);
    Ok(report(
        spec,
        InequalityId::Monotone,
        margin,
        0.0,
        Approx::new(margin, 2.0 * err),
        details([("cumulative_at_b", last), ("grid_points", grid.len() as f64)]),
    ))
}

/// `F(x) - F(y) ≥ (x - y) φ(y)` at random pairs of the domain.
pub fn check_subdifferential(spec: &InstanceSpec) -> Result<CheckReport> {
    let convex = spec.convex_fn()?;
    let r = convex.check_subgradient(SUBGRADIENT_SAMPLES, spec.seed)?;
    let (x, y) = r.argmin;
    let lhs = convex.eval(x)? - convex.eval(y)?;
    let rhs = (x - y) * convex.phi(y)?;
    let mut out = report(
        spec,
        InequalityId::Subdifferential,
        lhs,
        rhs,
        Approx::exact(r.min_margin),
        details([("x", x), ("y", y), ("samples", r.samples as f64)]),
    );
    out.slack += RELATIVE_SLACK * convex.eval(x)?.abs().max(convex.eval(y)?.abs());
    out.passed = out.margin >= -out.slack;
    Ok(out)
}

/// `∫pF(x) - ∫pF(y) ≥ ∫p x φ(y) - ∫p y φ(y)`.
pub fn check_theorem5(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let convex = spec.convex_fn()?;
    let (p, x, y) = (st.weight()?, need(&spec.x, "x")?, need(&spec.y, "y")?);
    st.nonnegative("p", p)?;
    st.maps_into("x", x, &convex)?;
    st.maps_into("y", y, &convex)?;
    let (fx, fy, phi) = (compose(&convex, x), compose(&convex, y), subgradient_of(&convex, y));
    let l1 = st.integral(&product(vec![p, &fx]))?;
    let l2 = st.integral(&product(vec![p, &fy]))?;
    let r1 = st.integral(&product(vec![p, x, &phi]))?;
    let r2 = st.integral(&product(vec![p, y, &phi]))?;
    let (lhs, rhs) = (l1 - l2, r1 - r2);
    Ok(report(spec, InequalityId::Theorem5, lhs.value, rhs.value, lhs - rhs, BTreeMap::new()))
}

fn mass(st: &Setup, p: &ExprFn) -> Result<Approx> {
    st.nonnegative("p", p)?;
    let a = st.integral(p)?;
    if !(a.value > a.err) {
        return Err(Error::precondition(format!("A = ∫p Δg must be positive, got {}", a.value), None));
    }
    Ok(a)
}

/// `(1/A) ∫pF(x) ≥ F((1/A) ∫p x)` with `A = ∫p > 0`.
pub fn check_jensen(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let convex = spec.convex_fn()?;
    let (p, x) = (st.weight()?, need(&spec.x, "x")?);
    let a = mass(&st, p)?;
    st.maps_into("x", x, &convex)?;
    let fx = compose(&convex, x);
    let lhs = st.integral(&product(vec![p, &fx]))? / a;
    let mean = st.integral(&product(vec![p, x]))? / a;
    let rhs = mean.map(|m| convex.eval(m))?;
    Ok(report(
        spec,
        InequalityId::Jensen,
        lhs.value,
        rhs.value,
        lhs - rhs,
        details([("A", a.value), ("mean", mean.value)]),
    ))
}

/// `0 ≤ m₁ ≤ B`, where `m₁` is the Jensen gap of `y` and
/// `B = (1/A)[∫p y φ(y) - (1/A) ∫p y · ∫p φ(y)]`. The margin is `min(m₁, B - m₁)`.
pub fn check_reverse_jensen(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let convex = spec.convex_fn()?;
    let (p, y) = (st.weight()?, need(&spec.y, "y")?);
    let a = mass(&st, p)?;
    st.maps_into("y", y, &convex)?;
    let (fy, phi) = (compose(&convex, y), subgradient_of(&convex, y));
    let mean = st.integral(&product(vec![p, y]))? / a;
    let m1 = st.integral(&product(vec![p, &fy]))? / a - mean.map(|m| convex.eval(m))?;
    let i_yphi = st.integral(&product(vec![p, y, &phi]))?;
    let i_phi = st.integral(&product(vec![p, &phi]))?;
    let bound = (i_yphi - mean * i_phi) / a;
    let m2 = bound - m1;
    let margin = if m1.value <= m2.value { m1 } else { m2 };
    Ok(report(
        spec,
        InequalityId::ReverseJensen,
        m1.value,
        bound.value,
        margin,
        details([("m1", m1.value), ("m2", m2.value), ("upper_bound", bound.value), ("A", a.value)]),
    ))
}

struct Kernel<'a> {
    p: &'a ExprFn,
    f1: &'a ExprFn,
    f2: &'a ExprFn,
}

impl RealFn2 for Kernel<'_> {
    fn eval2(&self, t: f64, s: f64) -> Result<f64> {
        let (p, f1, f2) = (self.p, self.f1, self.f2);
        Ok(p.eval1(t)? * p.eval1(s)? * (f1.eval1(t)? - f1.eval1(s)?) * (f2.eval1(t)? - f2.eval1(s)?))
    }

    fn range2(&self, t: Interval, s: Interval) -> Option<Interval> {
        let r = |e: &ExprFn, i: Interval| e.range(i, None);
        let d1 = r(self.f1, t)?.sub(r(self.f1, s)?).ok()?;
        let d2 = r(self.f2, t)?.sub(r(self.f2, s)?).ok()?;
        r(self.p, t)?.mul(r(self.p, s)?).ok()?.mul(d1).ok()?.mul(d2).ok()
    }
}

fn chebyshev_setup<'a>(st: &Setup<'a>) -> Result<(&'a ExprFn, &'a ExprFn, &'a ExprFn, Ordering)> {
    let spec = st.spec;
    let (p, f1, f2) = (st.weight()?, need(&spec.f1, "f1")?, need(&spec.f2, "f2")?);
    let order = spec.order.unwrap_or_default();
    st.ordered(f1, f2, order)?;
    st.nonnegative("p", p)?;
    Ok((p, f1, f2, order))
}

/// `sign · ∬ p(t)p(s)(f₁(t)-f₁(s))(f₂(t)-f₂(s)) Δg(t)Δg(s) ≥ 0`.
pub fn check_chebyshev_kernel(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let (p, f1, f2, order) = chebyshev_setup(&st)?;
    let rect = Rect { a: st.a, b: st.b, c: st.a, d: st.b };
    let r = rs_double_integral(&st.scale, &st.scale, &Kernel { p, f1, f2 }, &spec.g, &spec.g, rect, spec.tol)?;
    let v = r.approx();
    Ok(report(spec, InequalityId::ChebyshevKernel, v.value, 0.0, v * order.sign(), BTreeMap::new()))
}

/// `sign · (∫p · ∫p f₁f₂ - ∫p f₁ · ∫p f₂) ≥ 0`.
pub fn check_chebyshev(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let (p, f1, f2, order) = chebyshev_setup(&st)?;
    let a = st.integral(p)?;
    let lhs = a * st.integral(&product(vec![p, f1, f2]))?;
    let rhs = st.integral(&product(vec![p, f1]))? * st.integral(&product(vec![p, f2]))?;
    Ok(report(
        spec,
        InequalityId::Chebyshev,
        lhs.value,
        rhs.value,
        (lhs - rhs) * order.sign(),
        details([("A", a.value)]),
    ))
}

/// `∫pf · ∫(p/f) ≥ (∫p)²` for `f` of constant sign. The opposite orientation
/// is recorded as `printed_orientation_margin`.
pub fn check_winckler(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let (p, f) = (st.weight()?, need(&spec.f, "f")?);
    st.nonnegative("p", p)?;
    let mut sign = 0.0;
    for t in st.grid(FINE_SAMPLES) {
        let v = f.eval1(t)?;
        if v.abs() < NEGLIGIBLE {
            return Err(Error::domain("1/f: f vanishes", t, None));
        }
        if sign == 0.0 {
            sign = v.signum();
        } else if v.signum() != sign {
            return Err(Error::precondition("f changes sign", Some(t)));
        }
    }
    let inv = reciprocal(f);
    let a = st.integral(p)?;
    let lhs = st.integral(&product(vec![p, f]))? * st.integral(&product(vec![p, &inv]))?;
    let rhs = a * a;
    Ok(report(
        spec,
        InequalityId::Winckler,
        lhs.value,
        rhs.value,
        lhs - rhs,
        details([("printed_orientation_margin", rhs.value - lhs.value)]),
    ))
}

fn majorisation(st: &Setup, convex: &ConvexFn) -> Result<(Approx, Approx, Approx, Approx)> {
    let spec = st.spec;
    let (p, x, y) = (st.weight()?, need(&spec.x, "x")?, need(&spec.y, "y")?);
    st.maps_into("x", x, convex)?;
    st.maps_into("y", y, convex)?;
    st.co_monotone(y, &difference(x, y))?;
    let ix = st.integral(&product(vec![p, x]))?;
    let iy = st.integral(&product(vec![p, y]))?;
    let (fx, fy) = (compose(convex, x), compose(convex, y));
    let lx = st.integral(&product(vec![p, &fx]))?;
    let ly = st.integral(&product(vec![p, &fy]))?;
    Ok((ix, iy, lx, ly))
}

fn integral_slack(u: Approx, v: Approx) -> f64 {
    RELATIVE_SLACK * u.value.abs().max(v.value.abs()).max(1.0) + u.err + v.err
}

/// `∫pF(y) ≤ ∫pF(x)` when `y`, `x - y` are co-monotone and `∫p x = ∫p y`.
pub fn check_majorisation_eq(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let convex = spec.convex_fn()?;
    let (ix, iy, lx, ly) = majorisation(&st, &convex)?;
    let defect = ix.value - iy.value;
    if defect.abs() > integral_slack(ix, iy) {
        return Err(Error::precondition(format!("∫p x Δg - ∫p y Δg = {defect} is not zero"), None));
    }
    Ok(report(
        spec,
        InequalityId::MajorisationEq,
        lx.value,
        ly.value,
        lx - ly,
        details([("integral_defect", defect)]),
    ))
}

/// `∫pF(y) ≤ ∫pF(x)` for non-decreasing `F`, `p ≥ 0`, co-monotone `y`,
/// `x - y` and `∫p y ≤ ∫p x`.
pub fn check_majorisation_le(spec: &InstanceSpec) -> Result<CheckReport> {
    let st = Setup::new(spec)?;
    let convex = spec.convex_fn()?;
    if !convex.is_nondecreasing() {
        return Err(Error::precondition(format!("{} is not non-decreasing", convex.name()), None));
    }
    st.nonnegative("p", st.weight()?)?;
    let (ix, iy, lx, ly) = majorisation(&st, &convex)?;
    let excess = iy.value - ix.value;
    if excess > integral_slack(ix, iy) {
        return Err(Error::precondition(format!("∫p y Δg exceeds ∫p x Δg by {excess}"), None));
    }
    Ok(report(
        spec,
        InequalityId::MajorisationLe,
        lx.value,
        ly.value,
        lx - ly,
        details([("integral_excess", -excess)]),
    ))
}
