//! Numerical checks of integral inequalities for convex functions on time
//! scales, over explicit instances and seeded random families.
//!
//! Every check returns a [`CheckReport`] whose `margin` is oriented so that
//! `margin ≥ -slack` means the inequality holds on that instance. Failed
//! hypotheses are reported as errors (see [`Error::is_precondition`]), never
//! as failed inequalities.

mod checks;
mod fuzz;
mod generate;
mod qscale;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::{ConvexFn, ExprFn, KinkSelection, ScaleSpec};

pub use checks::{
    check, check_chebyshev, check_chebyshev_kernel, check_jensen, check_majorisation_eq, check_majorisation_le,
    check_monotone_cumulative, check_positivity, check_reverse_jensen, check_subdifferential, check_theorem5,
    check_winckler,
};
pub use fuzz::{fuzz, FailingTrial, FuzzReport, GeneratorConfig};
pub use qscale::{qscale_example, QScaleReport};

/// Relative part of the comparison slack.
pub const RELATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityId {
    Positivity,
    Monotone,
    Subdifferential,
    Theorem5,
    Jensen,
    ReverseJensen,
    ChebyshevKernel,
    Chebyshev,
    Winckler,
    MajorisationEq,
    MajorisationLe,
}

impl InequalityId {
    pub const ALL: [InequalityId; 11] = [
        InequalityId::Positivity,
        InequalityId::Monotone,
        InequalityId::Subdifferential,
        InequalityId::Theorem5,
        InequalityId::Jensen,
        InequalityId::ReverseJensen,
        InequalityId::ChebyshevKernel,
        InequalityId::Chebyshev,
        InequalityId::Winckler,
        InequalityId::MajorisationEq,
        InequalityId::MajorisationLe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::Positivity => "positivity",
            InequalityId::Monotone => "monotone",
            InequalityId::Subdifferential => "subdifferential",
            InequalityId::Theorem5 => "theorem5",
            InequalityId::Jensen => "jensen",
            InequalityId::ReverseJensen => "reverse-jensen",
            InequalityId::ChebyshevKernel => "chebyshev-kernel",
            InequalityId::Chebyshev => "chebyshev",
            InequalityId::Winckler => "winckler",
            InequalityId::MajorisationEq => "majorisation-eq",
            InequalityId::MajorisationLe => "majorisation-le",
        }
    }

    /// True if the check needs a declared ordering of `f1`, `f2`.
    pub fn needs_ordering(self) -> bool {
        matches!(self, InequalityId::Chebyshev | InequalityId::ChebyshevKernel)
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown inequality `{s}`")))
    }
}

/// Declared ordering of a pair `f1`, `f2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    #[default]
    Similar,
    Opposite,
}

impl Ordering {
    pub fn sign(self) -> f64 {
        match self {
            Ordering::Similar => 1.0,
            Ordering::Opposite => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ordering::Similar => "similar",
            Ordering::Opposite => "opposite",
        }
    }
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similar" => Ok(Ordering::Similar),
            "opposite" => Ok(Ordering::Opposite),
            other => Err(Error::InvalidArgument(format!("ordering must be similar or opposite, got `{other}`"))),
        }
    }
}

fn ser_scale<S: Serializer>(spec: &ScaleSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&spec.to_string())
}

fn de_scale<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ScaleSpec, D::Error> {
    let src = String::deserialize(d)?;
    ScaleSpec::parse(&src).map_err(serde::de::Error::custom)
}

fn default_g() -> ExprFn {
    ExprFn::identity()
}

fn default_tol() -> f64 {
    1e-8
}

/// Inputs of a check. Fields not used by the target inequality are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(serialize_with = "ser_scale", deserialize_with = "de_scale")]
    pub scale: ScaleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default = "default_g")]
    pub g: ExprFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<ExprFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<ExprFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<ExprFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ExprFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<ExprFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<ExprFn>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<ConvexFn>,
    #[serde(default)]
    pub kink: KinkSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Ordering>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn parse_f64(field: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("--{field}: `{v}` is not a finite number")))
}

impl InstanceSpec {
    pub fn new(scale: ScaleSpec) -> InstanceSpec {
        InstanceSpec {
            scale,
            a: None,
            b: None,
            g: default_g(),
            f: None,
            p: None,
            x: None,
            y: None,
            f1: None,
            f2: None,
            convex: None,
            kink: KinkSelection::default(),
            order: None,
            tol: default_tol(),
            seed: 0,
        }
    }

    /// Starts from a scale given in the text DSL.
    pub fn on(scale: &str) -> Result<InstanceSpec> {
        Ok(InstanceSpec::new(ScaleSpec::parse(scale)?))
    }

    /// Sets a field from its textual form, as given on the command line.
    pub fn with(mut self, field: &str, value: &str) -> Result<InstanceSpec> {
        let expr = || ExprFn::parse(value, 1);
        match field {
            "scale" => self.scale = ScaleSpec::parse(value)?,
            "a" => self.a = Some(parse_f64(field, value)?),
            "b" => self.b = Some(parse_f64(field, value)?),
            "g" => self.g = expr()?,
            "f" => self.f = Some(expr()?),
            "p" => self.p = Some(expr()?),
            "x" => self.x = Some(expr()?),
            "y" => self.y = Some(expr()?),
            "f1" => self.f1 = Some(expr()?),
            "f2" => self.f2 = Some(expr()?),
            "F" => self.convex = Some(ConvexFn::from_name(value)?),
            "kink" => self.kink = value.parse()?,
            "order" => self.order = Some(value.parse()?),
            "tol" => self.tol = parse_f64(field, value)?,
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("--seed: `{value}` is not an unsigned integer")))?
            }
            other => return Err(Error::InvalidArgument(format!("unknown field `{other}`"))),
        }
        Ok(self)
    }

    /// `(field, value)` pairs that rebuild this spec through [`InstanceSpec::with`].
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("scale", self.scale.to_string())];
        out.extend(self.a.map(|a| ("a", format!("{a:?}"))));
        out.extend(self.b.map(|b| ("b", format!("{b:?}"))));
        out.push(("g", self.g.to_string()));
        for (name, e) in [("f", &self.f), ("p", &self.p), ("x", &self.x), ("y", &self.y), ("f1", &self.f1), ("f2", &self.f2)] {
            out.extend(e.as_ref().map(|e| (name, e.to_string())));
        }
        out.extend(self.convex.as_ref().map(|c| ("F", c.name())));
        if self.kink != KinkSelection::default() {
            out.push(("kink", format!("{:?}", self.kink).to_lowercase()));
        }
        out.extend(self.order.map(|o| ("order", o.name().to_string())));
        out.push(("tol", format!("{:?}", self.tol)));
        out.push(("seed", self.seed.to_string()));
        out
    }

    /// Shell command line that reruns `id` on this instance.
    pub fn replay_command(&self, id: InequalityId) -> String {
        let mut cmd = format!("tsint check {id}");
        for (k, v) in self.fields() {
            cmd.push_str(&format!(" --{k} {}", shell_quote(&v)));
        }
        cmd
    }

    pub(crate) fn convex_fn(&self) -> Result<ConvexFn> {
        let c = self.convex.clone().ok_or_else(|| missing("F"))?;
        Ok(c.with_kink(self.kink))
    }
}

pub(crate) fn missing(field: &str) -> Error {
    Error::InvalidArgument(format!("this check needs --{field}"))
}

/// Single-quotes `s` unless it is made of shell-safe characters only.
pub fn shell_quote(s: &str) -> String {
    let safe = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "+-./_=:,@%^".contains(c));
    if safe {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub inequality: InequalityId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
    pub passed: bool,
    /// Auxiliary quantities (e.g. the two margins of the reverse Jensen check).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    pub instance: InstanceSpec,
    pub replay: String,
}


#[cfg(test)]
mod tests;
