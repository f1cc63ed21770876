//! Real functions of one and two variables as seen by the integration engine.

use crate::error::Result;
use crate::expr::ExprFn;
use crate::interval::Interval;

/// A real function of `t`.
pub trait RealFn {
    fn eval(&self, t: f64) -> Result<f64>;

    /// Value used inside the dense stretch `[lo, hi]`. Differs from [`RealFn::eval`]
    /// only for integrands whose definition depends on the local structure of
    /// the scale.
    fn eval_dense(&self, t: f64, _stretch: (f64, f64)) -> Result<f64> {
        self.eval(t)
    }

    /// Rigorous enclosure of the range over `t`, if one is available.
    fn range(&self, _t: Interval) -> Option<Interval> {
        None
    }
}

/// A real function of `(t, s)`.
pub trait RealFn2 {
    fn eval2(&self, t: f64, s: f64) -> Result<f64>;

    fn range2(&self, _t: Interval, _s: Interval) -> Option<Interval> {
        None
    }
}

impl RealFn for ExprFn {
    fn eval(&self, t: f64) -> Result<f64> {
        self.eval1(t)
    }

    fn range(&self, t: Interval) -> Option<Interval> {
        self.range(t, None)
    }
}

impl RealFn2 for ExprFn {
    fn eval2(&self, t: f64, s: f64) -> Result<f64> {
        if self.arity() == 1 {
            self.eval1(t)
        } else {
            ExprFn::eval2(self, t, s)
        }
    }

    fn range2(&self, t: Interval, s: Interval) -> Option<Interval> {
        self.range(t, (self.arity() == 2).then_some(s))
    }
}

impl<F: Fn(f64) -> Result<f64>> RealFn for F {
    fn eval(&self, t: f64) -> Result<f64> {
        self(t)
    }
}

impl<F: Fn(f64, f64) -> Result<f64>> RealFn2 for F {
    fn eval2(&self, t: f64, s: f64) -> Result<f64> {
        self(t, s)
    }
}

type Eval<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;
type Range<'a> = Box<dyn Fn(Interval) -> Option<Interval> + 'a>;

/// A closure together with an optional range enclosure.
pub struct Lambda<'a> {
    eval: Eval<'a>,
    range: Option<Range<'a>>,
}

impl<'a> Lambda<'a> {
    pub fn new(eval: impl Fn(f64) -> Result<f64> + 'a) -> Self {
        Lambda { eval: Box::new(eval), range: None }
    }

    pub fn with_range(mut self, range: impl Fn(Interval) -> Option<Interval> + 'a) -> Self {
        self.range = Some(Box::new(range));
        self
    }
}

impl RealFn for Lambda<'_> {
    fn eval(&self, t: f64) -> Result<f64> {
        (self.eval)(t)
    }

    fn range(&self, t: Interval) -> Option<Interval> {
        self.range.as_ref().and_then(|r| r(t))
    }
}

/// The identity `t ↦ t`.
pub struct Identity;

impl RealFn for Identity {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(t)
    }

    fn range(&self, t: Interval) -> Option<Interval> {
        Some(t)
    }
}

/// Scalar multiple `c·f`.
pub struct Scaled<'a, F: ?Sized>(pub f64, pub &'a F);

impl<F: RealFn + ?Sized> RealFn for Scaled<'_, F> {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.0 * self.1.eval(t)?)
    }

    fn eval_dense(&self, t: f64, stretch: (f64, f64)) -> Result<f64> {
        Ok(self.0 * self.1.eval_dense(t, stretch)?)
    }

    fn range(&self, t: Interval) -> Option<Interval> {
        Interval::point(self.0).mul(self.1.range(t)?).ok()
    }
}
