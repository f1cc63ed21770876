//! Catalog of convex functions with explicit subgradient selections.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExprFn;
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexKind {
    Square,
    Exp,
    Abs,
    XLogX,
    /// `x^p` on `[0, ∞)`, `p ≥ 1`.
    Power(f64),
    /// `x ln x + (1-x) ln(1-x)` on `(0, 1)`.
    NegEntropy,
}

/// Which element of `[F'₋, F'₊]` to use where `F` has a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KinkSelection {
    #[default]
    Midpoint,
    Left,
    Right,
}

impl std::str::FromStr for KinkSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" | "mid" => Ok(KinkSelection::Midpoint),
            "left" => Ok(KinkSelection::Left),
            "right" => Ok(KinkSelection::Right),
            other => Err(Error::InvalidArgument(format!("unknown kink selection `{other}`"))),
        }
    }
}

/// A convex function `F` on an interval `I` together with a selection `φ ∈ ∂F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFn {
    kind: ConvexKind,
    kink: KinkSelection,
    expr: ExprFn,
}

/// Result of [`ConvexFn::check_subgradient`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgradientReport {
    pub samples: usize,
    pub min_margin: f64,
    pub argmin: (f64, f64),
}

impl ConvexFn {
    /// Looks up a catalog entry: `square`, `exp`, `abs`, `xlogx`, `power_<p>` (p ≥ 1), `neg_entropy`.
    pub fn from_name(name: &str) -> Result<ConvexFn> {
        let kind = match name {
            "square" => ConvexKind::Square,
            "exp" => ConvexKind::Exp,
            "abs" => ConvexKind::Abs,
            "xlogx" => ConvexKind::XLogX,
            "neg_entropy" => ConvexKind::NegEntropy,
            _ => match name.strip_prefix("power_").and_then(|p| p.parse::<f64>().ok()) {
                Some(p) if p.is_finite() && p >= 1.0 => ConvexKind::Power(p),
                _ => return Err(Error::UnknownConvexFn(name.to_string())),
            },
        };
        Ok(ConvexFn::new(kind))
    }

    pub fn new(kind: ConvexKind) -> ConvexFn {
        let src = match kind {
            ConvexKind::Square => "t^2".to_string(),
            ConvexKind::Exp => "exp(t)".to_string(),
            ConvexKind::Abs => "abs(t)".to_string(),
            ConvexKind::XLogX => "t * ln(t)".to_string(),
            ConvexKind::Power(p) => format!("t^{p}"),
            ConvexKind::NegEntropy => "t * ln(t) + (1 - t) * ln(1 - t)".to_string(),
        };
        let expr = ExprFn::parse(&src, 1).expect("catalog expressions parse");
        ConvexFn { kind, kink: KinkSelection::Midpoint, expr }
    }

    pub fn with_kink(mut self, kink: KinkSelection) -> ConvexFn {
        self.kink = kink;
        self
    }

    pub fn kind(&self) -> ConvexKind {
        self.kind
    }

    pub fn kink(&self) -> KinkSelection {
        self.kink
    }

    pub fn name(&self) -> String {
        match self.kind {
            ConvexKind::Square => "square".into(),
            ConvexKind::Exp => "exp".into(),
            ConvexKind::Abs => "abs".into(),
            ConvexKind::XLogX => "xlogx".into(),
            ConvexKind::Power(p) => format!("power_{p}"),
            ConvexKind::NegEntropy => "neg_entropy".into(),
        }
    }

    /// `F` as an expression in `t`.
    pub fn expr(&self) -> &ExprFn {
        &self.expr
    }

    /// Domain `I` as `(lo, hi, lo_open, hi_open)`.
    pub fn domain(&self) -> (f64, f64, bool, bool) {
        match self.kind {
            ConvexKind::Square | ConvexKind::Exp | ConvexKind::Abs => {
                (f64::NEG_INFINITY, f64::INFINITY, true, true)
            }
            ConvexKind::XLogX => (0.0, f64::INFINITY, true, true),
            ConvexKind::Power(_) => (0.0, f64::INFINITY, false, true),
            ConvexKind::NegEntropy => (0.0, 1.0, true, true),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi, lo_open, hi_open) = self.domain();
        x.is_finite()
            && (if lo_open { x > lo } else { x >= lo })
            && (if hi_open { x < hi } else { x <= hi })
    }

    /// Known to be non-decreasing on its domain.
    pub fn is_nondecreasing(&self) -> bool {
        matches!(self.kind, ConvexKind::Exp | ConvexKind::Power(_))
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::domain(format!("{} outside its domain", self.name()), x, None))
        }
    }

    fn finite(&self, x: f64, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("{} overflow", self.name()), x, None))
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let v = match self.kind {
            ConvexKind::Square => x * x,
            ConvexKind::Exp => x.exp(),
            ConvexKind::Abs => x.abs(),
            ConvexKind::XLogX => x * x.ln(),
            ConvexKind::Power(p) => x.powf(p),
            ConvexKind::NegEntropy => x * x.ln() + (1.0 - x) * (-x).ln_1p(),
        };
        self.finite(x, v)
    }

    /// Left derivative `F'₋(x)`.
    pub fn left_derivative(&self, x: f64) -> Result<f64> {
        match self.kind {
            ConvexKind::Abs if x <= 0.0 => Ok(-1.0),
            ConvexKind::Abs => Ok(1.0),
            _ => self.smooth_derivative(x),
        }
    }

    /// Right derivative `F'₊(x)`.
    pub fn right_derivative(&self, x: f64) -> Result<f64> {
        match self.kind {
            ConvexKind::Abs if x < 0.0 => Ok(-1.0),
            ConvexKind::Abs => Ok(1.0),
            _ => self.smooth_derivative(x),
        }
    }

    fn smooth_derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let v = match self.kind {
            ConvexKind::Square => 2.0 * x,
            ConvexKind::Exp => x.exp(),
            ConvexKind::XLogX => x.ln() + 1.0,
            ConvexKind::Power(p) if p == 1.0 => 1.0,
            ConvexKind::Power(p) => p * x.powf(p - 1.0),
            ConvexKind::NegEntropy => x.ln() - (-x).ln_1p(),
            ConvexKind::Abs => unreachable!(),
        };
        self.finite(x, v)
    }

    /// The selected subgradient `φ(x)`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        match self.kind {
            ConvexKind::Abs => {
                self.check(x)?;
                Ok(if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    match self.kink {
                        KinkSelection::Midpoint => 0.0,
                        KinkSelection::Left => -1.0,
                        KinkSelection::Right => 1.0,
                    }
                })
            }
            _ => self.smooth_derivative(x),
        }
    }

    /// Minimiser of `F` over the real line, if attained inside `I`.
    fn argmin(&self) -> Option<f64> {
        match self.kind {
            ConvexKind::Square | ConvexKind::Abs => Some(0.0),
            ConvexKind::XLogX => Some((-1.0f64).exp()),
            ConvexKind::NegEntropy => Some(0.5),
            ConvexKind::Exp | ConvexKind::Power(_) => None,
        }
    }

    /// Enclosure of `F` over `x` (a subset of `I`).
    pub fn range(&self, x: Interval) -> Option<Interval> {
        let a = self.eval(x.lo).ok()?;
        let b = self.eval(x.hi).ok()?;
        let lo = match self.argmin() {
            Some(m) if x.lo < m && m < x.hi => self.eval(m).ok()?,
            _ => a.min(b),
        };
        pad(lo, a.max(b))
    }

    /// Enclosure of `φ` over `x`, using that `φ` is non-decreasing.
    pub fn phi_range(&self, x: Interval) -> Option<Interval> {
        pad(self.phi(x.lo).ok()?, self.phi(x.hi).ok()?)
    }

    /// Evaluates `F(x) - F(y) - (x - y) φ(y)` at `samples` random pairs in `I`.
    pub fn check_subgradient(&self, samples: usize, seed: u64) -> Result<SubgradientReport> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        let (lo, hi) = match self.domain() {
            (lo, hi, ..) if lo.is_infinite() && hi.is_infinite() => (-4.0, 4.0),
            (_, hi, ..) if hi.is_infinite() => (1e-6, 4.0),
            _ => (1e-6, 1.0 - 1e-6),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = SubgradientReport { samples, min_margin: f64::INFINITY, argmin: (0.0, 0.0) };
        for _ in 0..samples {
            let x = rng.gen_range(lo..=hi);
            let y = rng.gen_range(lo..=hi);
            let m = self.eval(x)? - self.eval(y)? - (x - y) * self.phi(y)?;
            if m < report.min_margin {
                report.min_margin = m;
                report.argmin = (x, y);
            }
        }
        Ok(report)
    }
}

fn pad(lo: f64, hi: f64) -> Option<Interval> {
    let e = |v: f64| 4.0 * f64::EPSILON * v.abs() + f64::MIN_POSITIVE;
    let (lo, hi) = (lo - e(lo), hi + e(hi));
    (lo.is_finite() && hi.is_finite()).then(|| Interval::new(lo, hi))
}

impl fmt::Display for ConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for ConvexFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for ConvexFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        ConvexFn::from_name(&name).map_err(serde::de::Error::custom)
    }
}
