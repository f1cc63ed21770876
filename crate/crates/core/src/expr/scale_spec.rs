//! Text and JSON descriptions of time scales.
//!
//! ```text
//! interval(a,b) | point(v) | points(v,...) | integers(a,b) | hgrid(a,b,h)
//!   | qtail(q=..,at=..,upto=..[,skip=k]) | union(spec,...)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timescale::{Component, QTail, TimeScale};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSpec {
    Interval { lo: f64, hi: f64 },
    Point { value: f64 },
    Points { values: Vec<f64> },
    Integers { from: i64, to: i64 },
    Hgrid { from: f64, to: f64, step: f64 },
    Qtail { q: f64, at: f64, upto: f64, #[serde(default)] skip: u32 },
    Union { parts: Vec<ScaleSpec> },
}

const MAX_GRID_POINTS: f64 = 1e6;

impl ScaleSpec {
    /// Parses the text DSL, or JSON when the input starts with `{`.
    pub fn parse(src: &str) -> Result<ScaleSpec> {
        let trimmed = src.trim();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| Error::InvalidScale(e.to_string()));
        }
        let mut p = SpecParser { src: trimmed.as_bytes(), pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("end of input"));
        }
        Ok(spec)
    }

    fn components(&self, out: &mut Vec<Component>) -> Result<()> {
        match self {
            ScaleSpec::Interval { lo, hi } => out.push(Component::interval(*lo, *hi)?),
            ScaleSpec::Point { value } => out.push(Component::Point(*value)),
            ScaleSpec::Points { values } => out.extend(values.iter().map(|v| Component::Point(*v))),
            ScaleSpec::Integers { from, to } => {
                if from > to || (*to as f64 - *from as f64) > MAX_GRID_POINTS {
                    return Err(Error::InvalidScale(format!("integers({from},{to})")));
                }
                out.extend((*from..=*to).map(|k| Component::Point(k as f64)));
            }
            ScaleSpec::Hgrid { from, to, step } => {
                let n = ((to - from) / step).round();
                let ok = step.is_finite()
                    && *step > 0.0
                    && from < to
                    && n <= MAX_GRID_POINTS
                    && ((from + n * step) - to).abs() <= 1e-9 * step;
                if !ok {
                    return Err(Error::InvalidScale(format!(
                        "hgrid({from},{to},{step}): step must divide the span"
                    )));
                }
                let n = n as u64;
                out.extend((0..n).map(|k| Component::Point(from + k as f64 * step)));
                out.push(Component::Point(*to));
            }
            ScaleSpec::Qtail { q, at, upto, skip } => {
                out.push(Component::QTail(QTail::new(*q, *at, *upto, *skip)?))
            }
            ScaleSpec::Union { parts } => {
                for p in parts {
                    p.components(out)?;
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<TimeScale> {
        let mut comps = Vec::new();
        self.components(&mut comps)?;
        TimeScale::new(comps)
    }
}

impl FromStr for ScaleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScaleSpec::parse(s)
    }
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleSpec::Interval { lo, hi } => write!(f, "interval({lo},{hi})"),
            ScaleSpec::Point { value } => write!(f, "point({value})"),
            ScaleSpec::Points { values } => {
                f.write_str("points(")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            ScaleSpec::Integers { from, to } => write!(f, "integers({from},{to})"),
            ScaleSpec::Hgrid { from, to, step } => write!(f, "hgrid({from},{to},{step})"),
            ScaleSpec::Qtail { q, at, upto, skip } => {
                write!(f, "qtail(q={q},at={at},upto={upto}")?;
                if *skip > 0 {
                    write!(f, ",skip={skip}")?;
                }
                f.write_str(")")
            }
            ScaleSpec::Union { parts } => {
                f.write_str("union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct SpecParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl SpecParser<'_> {
    fn error(&self, expected: &str) -> Error {
        Error::InvalidScale(format!("expected {expected} at column {}", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("a name"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || b"+-.".contains(&self.src[self.pos]))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.error("a number"))
            }
        }
    }

    fn numbers(&mut self) -> Result<Vec<f64>> {
        self.expect(b'(')?;
        let mut out = vec![self.number()?];
        while self.eat(b',') {
            out.push(self.number()?);
        }
        self.expect(b')')?;
        Ok(out)
    }

    fn arity(&self, name: &str, args: &[f64], n: usize) -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidScale(format!("{name} takes {n} arguments, got {}", args.len())))
        }
    }

    fn integer(&self, v: f64) -> Result<i64> {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            Ok(v as i64)
        } else {
            Err(Error::InvalidScale(format!("integers() needs integer bounds, got {v}")))
        }
    }

    fn spec(&mut self) -> Result<ScaleSpec> {
        let start = self.pos;
        let name = self.ident()?;
        Ok(match name.as_str() {
            "union" => {
                self.expect(b'(')?;
                let mut parts = vec![self.spec()?];
                while self.eat(b',') {
                    parts.push(self.spec()?);
                }
                self.expect(b')')?;
                ScaleSpec::Union { parts }
            }
            "qtail" => {
                self.expect(b'(')?;
                let (mut q, mut at, mut upto, mut skip) = (None, None, None, 0u32);
                loop {
                    let key = self.ident()?;
                    self.expect(b'=')?;
                    let v = self.number()?;
                    match key.as_str() {
                        "q" => q = Some(v),
                        "at" => at = Some(v),
                        "upto" => upto = Some(v),
                        "skip" if v >= 0.0 && v.fract() == 0.0 && v < 1e4 => skip = v as u32,
                        _ => return Err(Error::InvalidScale(format!("bad qtail argument `{key}={v}`"))),
                    }
                    if !self.eat(b',') {
                        break;
                    }
                }
                self.expect(b')')?;
                match (q, at, upto) {
                    (Some(q), Some(at), Some(upto)) => ScaleSpec::Qtail { q, at, upto, skip },
                    _ => return Err(Error::InvalidScale("qtail needs q=, at= and upto=".into())),
                }
            }
            "interval" | "point" | "points" | "integers" | "hgrid" => {
                let args = self.numbers()?;
                match name.as_str() {
                    "interval" => {
                        self.arity(&name, &args, 2)?;
                        ScaleSpec::Interval { lo: args[0], hi: args[1] }
                    }
                    "point" => {
                        self.arity(&name, &args, 1)?;
                        ScaleSpec::Point { value: args[0] }
                    }
                    "points" => ScaleSpec::Points { values: args },
                    "integers" => {
                        self.arity(&name, &args, 2)?;
                        ScaleSpec::Integers { from: self.integer(args[0])?, to: self.integer(args[1])? }
                    }
                    _ => {
                        self.arity(&name, &args, 3)?;
                        ScaleSpec::Hgrid { from: args[0], to: args[1], step: args[2] }
                    }
                }
            }
            _ => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error("interval, point, points, integers, hgrid, qtail or union"));
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let src = "union(interval(0,1),point(2),qtail(q=2,at=3,upto=4,skip=1))";
        let spec = ScaleSpec::parse(src).unwrap();
        assert_eq!(spec.to_string(), src);
        assert_eq!(ScaleSpec::parse(" union( interval(0, 1) , point(2), qtail(q=2, at=3, upto=4, skip=1) ) ").unwrap(), spec);
    }

    #[test]
    fn json_mirror_round_trips() {
        let spec = ScaleSpec::parse("union(integers(0,3),hgrid(4,5,0.25),points(7,8.5))").unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(ScaleSpec::parse(&json).unwrap(), spec);
    }

    #[test]
    fn builds_grids() {
        let t = ScaleSpec::parse("hgrid(0,1,0.25)").unwrap().build().unwrap();
        assert_eq!(t.min(), 0.0);
        assert_eq!(t.max(), 1.0);
        assert_eq!(t.sigma(0.5).unwrap(), 0.75);
        let z = ScaleSpec::parse("integers(-2,2)").unwrap().build().unwrap();
        assert_eq!(z.rho(0.0).unwrap(), -1.0);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["interval(0)", "interval(0,1", "circle(1)", "hgrid(0,1,0.3)", "qtail(q=2,at=0)", "points()", "union()"] {
            assert!(ScaleSpec::parse(bad).and_then(|s| s.build()).is_err(), "{bad}");
        }
    }
}
