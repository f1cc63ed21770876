//! Small numerical helpers: compensated summation and first-order error
//! propagation for quantities built out of integrals.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// A value with an absolute error bound, propagated to first order (plus the
/// second-order cross term for products).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub err: f64,
}

impl Approx {
    pub fn new(value: f64, err: f64) -> Self {
        Approx { value, err: err.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Approx { value, err: 0.0 }
    }

    /// Image under a scalar map, bounding the error by evaluating at `value ± err`.
    pub fn map<E>(self, f: impl Fn(f64) -> std::result::Result<f64, E>) -> std::result::Result<Approx, E> {
        let mid = f(self.value)?;
        if self.err == 0.0 {
            return Ok(Approx::exact(mid));
        }
        let hi = f(self.value + self.err).map(|v| (v - mid).abs()).unwrap_or(f64::INFINITY);
        let lo = f(self.value - self.err).map(|v| (v - mid).abs()).unwrap_or(f64::INFINITY);
        Ok(Approx::new(mid, hi.max(lo)))
    }
}

impl Add for Approx {
    type Output = Approx;
    fn add(self, rhs: Approx) -> Approx {
        Approx::new(self.value + rhs.value, self.err + rhs.err)
    }
}

impl Sub for Approx {
    type Output = Approx;
    fn sub(self, rhs: Approx) -> Approx {
        Approx::new(self.value - rhs.value, self.err + rhs.err)
    }
}

impl Neg for Approx {
    type Output = Approx;
    fn neg(self) -> Approx {
        Approx::new(-self.value, self.err)
    }
}

impl Mul for Approx {
    type Output = Approx;
    fn mul(self, rhs: Approx) -> Approx {
        Approx::new(
            self.value * rhs.value,
            self.value.abs() * rhs.err + rhs.value.abs() * self.err + self.err * rhs.err,
        )
    }
}

impl Mul<f64> for Approx {
    type Output = Approx;
    fn mul(self, rhs: f64) -> Approx {
        Approx::new(self.value * rhs, self.err * rhs.abs())
    }
}

impl Div for Approx {
    type Output = Approx;
    fn div(self, rhs: Approx) -> Approx {
        let q = self.value / rhs.value;
        let denom = (rhs.value.abs() - rhs.err).max(0.0);
        let err = if denom == 0.0 {
            f64::INFINITY
        } else {
            (self.err + q.abs() * rhs.err) / denom
        };
        Approx::new(q, err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn approx_product_bounds_error() {
        let a = Approx::new(2.0, 0.1);
        let b = Approx::new(3.0, 0.2);
        let c = a * b;
        assert_eq!(c.value, 6.0);
        assert!((c.err - (2.0 * 0.2 + 3.0 * 0.1 + 0.02)).abs() < 1e-15);
        // every product of representatives lies within the bound
        for x in [1.9, 2.0, 2.1] {
            for y in [2.8, 3.0, 3.2] {
                assert!((x * y - c.value).abs() <= c.err + 1e-12);
            }
        }
    }

    #[test]
    fn approx_map_uses_worst_side() {
        let a = Approx::new(1.0, 0.5);
        let sq = a.map(|x| Ok::<f64, ()>(x * x)).unwrap();
        assert_eq!(sq.value, 1.0);
        assert_eq!(sq.err, 1.25);
    }
}
