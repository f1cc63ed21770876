//! Arithmetic expressions in `t` (and `s` for kernels of two variables).
//!
//! Expressions are parsed into an [`Expr`] tree, then compiled to a postfix
//! program that is evaluated on a small stack, either pointwise or over
//! intervals (for rigorous range enclosures).

mod convex;
mod parser;
mod scale_spec;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub use convex::{ConvexFn, ConvexKind, KinkSelection, SubgradientReport};
pub use scale_spec::ScaleSpec;

/// Free variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arg_count(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Expression tree. Numeric literals are non-negative; negation is always an
/// explicit [`Expr::Neg`] node, which keeps printing and re-parsing exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Literal, normalised so that negative values become `Neg(Num(|v|))`.
    pub fn num(v: f64) -> Expr {
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) => e.uses(var),
            Expr::Bin(_, l, r) => l.uses(var) || r.uses(var),
            Expr::Call(_, args) => args.iter().any(|a| a.uses(var)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_wrapped(f, e, e.precedence() < 3)
            }
            Expr::Bin(op, l, r) => {
                let (sym, prec) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => (" * ", 2),
                    BinOp::Div => (" / ", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // base is an atom, exponent a unary expression
                    write_wrapped(f, l, l.precedence() < 5)?;
                    f.write_str(sym)?;
                    write_wrapped(f, r, r.precedence() < 3)
                } else {
                    write_wrapped(f, l, l.precedence() < prec)?;
                    f.write_str(sym)?;
                    write_wrapped(f, r, r.precedence() <= prec && r.precedence() < 3)
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Push(f64),
    LoadT,
    LoadS,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Min,
    Max,
}

const INLINE_STACK: usize = 32;

/// A parsed, compiled expression of one (`t`) or two (`t`, `s`) variables.
#[derive(Debug, Clone)]
pub struct ExprFn {
    ast: Expr,
    arity: usize,
    program: Vec<Op>,
    depth: usize,
}

impl PartialEq for ExprFn {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast && self.arity == other.arity
    }
}

impl ExprFn {
    /// Parses `src` as an expression of `arity` variables (1: `t`; 2: `t`, `s`).
    pub fn parse(src: &str, arity: usize) -> Result<ExprFn> {
        if arity != 1 && arity != 2 {
            return Err(Error::Arity(format!("unsupported arity {arity}")));
        }
        let ast = parser::parse(src, arity)?;
        ExprFn::from_ast(ast, arity)
    }

    pub fn from_ast(ast: Expr, arity: usize) -> Result<ExprFn> {
        if arity == 1 && ast.uses(Var::S) {
            return Err(Error::Arity("variable `s` in a function of one variable".into()));
        }
        let mut program = Vec::new();
        compile(&ast, &mut program);
        let depth = stack_depth(&program);
        Ok(ExprFn { ast, arity, program, depth })
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> ExprFn {
        ExprFn::from_ast(Expr::num(c), 1).expect("constant has arity 1")
    }

    /// The identity `t`.
    pub fn identity() -> ExprFn {
        ExprFn::from_ast(Expr::Var(Var::T), 1).expect("identity has arity 1")
    }

    /// `c * self`.
    pub fn scaled(&self, c: f64) -> ExprFn {
        ExprFn::from_ast(Expr::bin(BinOp::Mul, Expr::num(c), self.ast.clone()), self.arity)
            .expect("scaling preserves arity")
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates at `t` (and `s` for two-variable expressions).
    pub fn eval(&self, t: f64, s: Option<f64>) -> Result<f64> {
        match (self.arity, s) {
            (1, None) => self.run(t, 0.0, None),
            (2, Some(s)) => self.run(t, s, Some(s)),
            (1, Some(_)) => Err(Error::Arity("function of one variable given two arguments".into())),
            _ => Err(Error::Arity("function of two variables given one argument".into())),
        }
    }

    /// Evaluates a one-variable expression.
    pub fn eval1(&self, t: f64) -> Result<f64> {
        self.eval(t, None)
    }

    /// Evaluates a two-variable expression.
    pub fn eval2(&self, t: f64, s: f64) -> Result<f64> {
        self.eval(t, Some(s))
    }

    fn run(&self, t: f64, s: f64, s_arg: Option<f64>) -> Result<f64> {
        if self.depth <= INLINE_STACK {
            let mut stack = [0.0f64; INLINE_STACK];
            self.exec(&mut stack, t, s, s_arg)
        } else {
            let mut stack = vec![0.0f64; self.depth];
            self.exec(&mut stack, t, s, s_arg)
        }
    }

    fn exec(&self, stack: &mut [f64], t: f64, s: f64, s_arg: Option<f64>) -> Result<f64> {
        let err = |what: &str| Error::domain(what, t, s_arg);
        let mut sp = 0usize;
        for op in &self.program {
            match *op {
                Op::Push(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Op::LoadT => {
                    stack[sp] = t;
                    sp += 1;
                }
                Op::LoadS => {
                    stack[sp] = s;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Exp | Op::Ln | Op::Abs | Op::Sqrt => {
                    let x = stack[sp - 1];
                    let y = match *op {
                        Op::Exp => x.exp(),
                        Op::Ln if x <= 0.0 => return Err(err("ln of a non-positive number")),
                        Op::Ln => x.ln(),
                        Op::Abs => x.abs(),
                        Op::Sqrt if x < 0.0 => return Err(err("sqrt of a negative number")),
                        _ => x.sqrt(),
                    };
                    if !y.is_finite() {
                        return Err(err("overflow"));
                    }
                    stack[sp - 1] = y;
                }
                _ => {
                    let b = stack[sp - 1];
                    let a = stack[sp - 2];
                    sp -= 1;
                    let y = match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div if b == 0.0 => return Err(err("division by zero")),
                        Op::Div => a / b,
                        Op::Pow => {
                            let y = a.powf(b);
                            if y.is_nan() {
                                return Err(err("power of a negative number to a non-integer exponent"));
                            }
                            if a == 0.0 && b < 0.0 {
                                return Err(err("zero to a negative power"));
                            }
                            y
                        }
                        Op::Min => a.min(b),
                        _ => a.max(b),
                    };
                    if !y.is_finite() {
                        return Err(err("overflow"));
                    }
                    stack[sp - 1] = y;
                }
            }
        }
        Ok(stack[0])
    }

    /// Outward-rounded enclosure of the range over `t ∈ tbox` (and `s ∈ sbox`).
    /// `None` when the expression is unbounded or undefined somewhere on the box.
    pub fn range(&self, tbox: Interval, sbox: Option<Interval>) -> Option<Interval> {
        let sbox = sbox.unwrap_or(Interval::point(0.0));
        let mut stack: Vec<Interval> = Vec::with_capacity(self.depth);
        for op in &self.program {
            let r = match *op {
                Op::Push(v) => Ok(Interval::point(v)),
                Op::LoadT => Ok(tbox),
                Op::LoadS => Ok(sbox),
                Op::Neg => Ok(stack.pop()?.neg()),
                Op::Exp => stack.pop()?.exp(),
                Op::Ln => stack.pop()?.ln(),
                Op::Abs => Ok(stack.pop()?.abs()),
                Op::Sqrt => stack.pop()?.sqrt(),
                _ => {
                    let b = stack.pop()?;
                    let a = stack.pop()?;
                    match *op {
                        Op::Add => a.add(b),
                        Op::Sub => a.sub(b),
                        Op::Mul => a.mul(b),
                        Op::Div => a.div(b),
                        Op::Pow => a.pow(b),
                        Op::Min => Ok(a.min(b)),
                        _ => Ok(a.max(b)),
                    }
                }
            };
            stack.push(r.ok()?);
        }
        stack.pop()
    }
}

fn compile(e: &Expr, out: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => out.push(Op::Push(*v)),
        Expr::Var(Var::T) => out.push(Op::LoadT),
        Expr::Var(Var::S) => out.push(Op::LoadS),
        Expr::Neg(inner) => {
            compile(inner, out);
            out.push(Op::Neg);
        }
        Expr::Bin(op, l, r) => {
            compile(l, out);
            compile(r, out);
            out.push(match op {
                BinOp::Add => Op::Add,
                BinOp::Sub => Op::Sub,
                BinOp::Mul => Op::Mul,
                BinOp::Div => Op::Div,
                BinOp::Pow => Op::Pow,
            });
        }
        Expr::Call(func, args) => {
            for a in args {
                compile(a, out);
            }
            out.push(match func {
                Func::Exp => Op::Exp,
                Func::Ln => Op::Ln,
                Func::Abs => Op::Abs,
                Func::Sqrt => Op::Sqrt,
                Func::Min => Op::Min,
                Func::Max => Op::Max,
            });
        }
    }
}

fn stack_depth(program: &[Op]) -> usize {
    let mut depth = 0usize;
    let mut max = 0usize;
    for op in program {
        match op {
            Op::Push(_) | Op::LoadT | Op::LoadS => depth += 1,
            Op::Neg | Op::Exp | Op::Ln | Op::Abs | Op::Sqrt => {}
            _ => depth -= 1,
        }
        max = max.max(depth);
    }
    max
}

impl fmt::Display for ExprFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl Serialize for ExprFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExprFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let src = String::deserialize(deserializer)?;
        ExprFn::parse(&src, 2)
            .and_then(|e| if e.ast.uses(Var::S) { Ok(e) } else { ExprFn::from_ast(e.ast, 1) })
            .map_err(serde::de::Error::custom)
    }
}
