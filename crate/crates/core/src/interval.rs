//! Outward-rounded interval arithmetic, used to enclose the range of an
//! expression over a box.

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Reason an enclosure could not be formed (the function is unbounded or
/// undefined somewhere on the box).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unbounded;

type IResult = Result<Interval, Unbounded>;

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn widened(lo: f64, hi: f64) -> IResult {
        if lo.is_nan() || hi.is_nan() {
            return Err(Unbounded);
        }
        let (lo, hi) = (lo.next_down(), hi.next_up());
        if lo.is_finite() && hi.is_finite() {
            Ok(Interval { lo, hi })
        } else {
            Err(Unbounded)
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(self, o: Interval) -> IResult {
        Self::widened(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn sub(self, o: Interval) -> IResult {
        Self::widened(self.lo - o.hi, self.hi - o.lo)
    }

    pub fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: Interval) -> IResult {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi)
    }

    pub fn div(self, o: Interval) -> IResult {
        if o.contains_zero() {
            return Err(Unbounded);
        }
        let inv = Self::widened(1.0 / o.hi, 1.0 / o.lo)?;
        self.mul(inv)
    }

    pub fn exp(self) -> IResult {
        Self::widened(self.lo.exp(), self.hi.exp())
    }

    pub fn ln(self) -> IResult {
        if self.lo <= 0.0 {
            return Err(Unbounded);
        }
        Self::widened(self.lo.ln(), self.hi.ln())
    }

    pub fn sqrt(self) -> IResult {
        if self.lo < 0.0 {
            return Err(Unbounded);
        }
        Self::widened(self.lo.sqrt(), self.hi.sqrt()).map(|i| Interval { lo: i.lo.max(0.0), hi: i.hi })
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn min(self, o: Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn max(self, o: Interval) -> Interval {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn pow(self, e: Interval) -> IResult {
        if e.is_point() && e.lo.fract() == 0.0 && e.lo.abs() <= 1024.0 {
            return self.powi(e.lo as i32);
        }
        // non-integer exponents need a non-negative base
        if self.lo < 0.0 {
            return Err(Unbounded);
        }
        if self.lo == 0.0 && e.lo <= 0.0 {
            return Err(Unbounded);
        }
        // x^y = exp(y ln x) is monotone in each argument on x > 0, so the
        // extremes sit at the corners (0^y = 0 for y > 0)
        let c = [
            self.lo.powf(e.lo),
            self.lo.powf(e.hi),
            self.hi.powf(e.lo),
            self.hi.powf(e.hi),
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi).map(|i| Interval { lo: i.lo.max(0.0), hi: i.hi })
    }

    fn powi(self, n: i32) -> IResult {
        if n == 0 {
            return Ok(Interval::point(1.0));
        }
        if n < 0 {
            if self.contains_zero() {
                return Err(Unbounded);
            }
            return Interval::point(1.0).div(self.powi(-n)?);
        }
        let f = |x: f64| x.powf(n as f64);
        if n % 2 == 1 || self.lo >= 0.0 {
            Self::widened(f(self.lo), f(self.hi))
        } else if self.hi <= 0.0 {
            Self::widened(f(self.hi), f(self.lo))
        } else {
            Self::widened(0.0, f(self.lo).max(f(self.hi))).map(|i| Interval { lo: 0.0, hi: i.hi })
        }
    }
}
