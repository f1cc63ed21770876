//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 't' | 's' | func '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)`. Columns in errors are 1-based character positions.

use super::{BinOp, Expr, Func, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

fn syntax(column: usize, expected: &[&str]) -> Error {
    Error::Syntax { column, expected: expected.iter().map(|s| s.to_string()).collect() }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, col)),
            '-' | '\u{2212}' => out.push((Tok::Minus, col)),
            '*' => out.push((Tok::Star, col)),
            '/' => out.push((Tok::Slash, col)),
            '^' => out.push((Tok::Caret, col)),
            '(' => out.push((Tok::LParen, col)),
            ')' => out.push((Tok::RParen, col)),
            ',' => out.push((Tok::Comma, col)),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| syntax(col, &["number"]))?;
                out.push((Tok::Num(v), col));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            _ => return Err(syntax(col, &["number", "variable", "function", "operator"])),
        }
        i += 1;
    }
    out.push((Tok::Eof, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    arity: usize,
}

const OPERAND: &[&str] = &["number", "t", "s", "function", "(", "-"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.col(), &[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var(Var::T)),
                "s" if self.arity == 2 => Ok(Expr::Var(Var::S)),
                "s" => Err(Error::Arity(format!(
                    "variable `s` at column {col} in a function of one variable"
                ))),
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| {
                        syntax(col, &["t", "s", "exp", "ln", "abs", "sqrt", "min", "max"])
                    })?;
                    self.expect(Tok::LParen, "(")?;
                    let mut args = vec![self.expr()?];
                    while args.len() < func.arg_count() {
                        self.expect(Tok::Comma, ",")?;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, ")")?;
                    Ok(Expr::Call(func, args))
                }
            },
            _ => Err(syntax(col, OPERAND)),
        }
    }
}

/// Parses `src` into an expression tree over `arity` variables.
pub(crate) fn parse(src: &str, arity: usize) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, pos: 0, arity };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(syntax(p.col(), &["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_of(src: &str) -> usize {
        match parse(src, 1) {
            Err(Error::Syntax { column, .. }) => column,
            other => panic!("expected syntax error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn trailing_operator_reports_end_column() {
        assert_eq!(column_of("t +"), 4);
    }

    #[test]
    fn error_columns() {
        assert_eq!(column_of("(t"), 3);
        assert_eq!(column_of("t t"), 3);
        assert_eq!(column_of("foo(t)"), 1);
        assert_eq!(column_of("exp t"), 5);
        assert_eq!(column_of("min(t)"), 6);
        assert_eq!(column_of("t # 2"), 3);
        assert_eq!(column_of(""), 1);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("1 - 2 - 3", 1).unwrap();
        assert_eq!(e.to_string(), "1 - 2 - 3");
        let e = parse("1 - (2 - 3)", 1).unwrap();
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        let e = parse("-t^2*3", 1).unwrap();
        assert_eq!(
            e,
            Expr::bin(
                BinOp::Mul,
                Expr::Neg(Box::new(Expr::bin(BinOp::Pow, Expr::Var(Var::T), Expr::Num(2.0)))),
                Expr::Num(3.0)
            )
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3", 1).unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse(".5", 1).unwrap(), Expr::Num(0.5));
        assert_eq!(parse("2E2", 1).unwrap(), Expr::Num(200.0));
    }
}
