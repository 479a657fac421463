//! Text syntax for differential operators.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | ident ['^' ['-'] int] | deriv ['^' int] | '(' expr ')'
//! number := digits ['/' digits] ['i']
//! ```
//!
//! Every factor denotes an operator and `*` is composition, so `t*dt` is
//! `t ∂_t` while `dt*t` is `1 + t ∂_t`. Derivative tokens are `d` followed by
//! a coordinate name (`dt`, `dr`, `dzeta`, `dmu`, `dt1`, ...). The identifier
//! `i` is the imaginary unit. This is the form produced by `DiffOp`'s
//! `Display`, so printing and parsing round-trip.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::exactalg::{GaussianRational, Poly, Ring, Var};

/// Parses an operator over the standard ring.
pub fn parse_op_expr(text: &str) -> Result<DiffOp> {
    parse_op_expr_in(text, &Ring::standard())
}

pub fn parse_op_expr_in(text: &str, ring: &Ring) -> Result<DiffOp> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, ring };
    let op = parser.expr()?;
    match parser.peek() {
        Tok::Eof => Ok(op),
        Tok::RParen => Err(parser.error("unbalanced `)`")),
        other => Err(parser.error(&format!("syntax error: unexpected {}", other.describe()))),
    }
}

/// Parses a polynomial, i.e. an expression without derivatives.
pub fn parse_poly(text: &str) -> Result<Poly> {
    let op = parse_op_expr(text)?;
    if op.order() > 0 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected a polynomial, found a differential operator".into(),
        });
    }
    Ok(op.scalar_part())
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number(GaussianRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        let advance = |n: usize, column: &mut usize| *column += n;
        match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut column);
                i += 1;
                continue;
            }
            '+' | '-' | '*' | '^' | '(' | ')' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push((tok, pos));
                advance(1, &mut column);
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let num: String = chars[start..i].iter().collect();
                let mut den = String::from("1");
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    let s = i + 1;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    den = chars[s..i].iter().collect();
                }
                let imaginary = i < chars.len() && chars[i] == 'i' && !is_ident_char(chars.get(i + 1).copied());
                if imaginary {
                    i += 1;
                }
                let n: BigInt = num.parse().expect("digits");
                let d: BigInt = den.parse().expect("digits");
                if d.is_zero() {
                    return Err(parse_error(pos, "zero denominator in rational literal"));
                }
                let q = BigRational::new(n, d);
                let value = if imaginary {
                    GaussianRational::new(BigRational::zero(), q)
                } else {
                    GaussianRational::real(q)
                };
                column += i - start;
                out.push((Tok::Number(value), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && is_ident_char(Some(chars[i])) {
                    i += 1;
                }
                column += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => return Err(parse_error(pos, &format!("syntax error: unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

fn is_ident_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_')
}

fn parse_error(pos: Pos, message: &str) -> Error {
    Error::Parse {
        line: pos.line,
        column: pos.column,
        message: message.to_string(),
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok, Pos)>,
    pos: usize,
    ring: &'a Ring,
}

impl Parser<'_> {
    fn at(&self) -> &(Tok, Pos) {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.at().0
    }

    fn here(&self) -> Pos {
        self.at().1
    }

    fn bump(&mut self) -> Tok {
        let t = self.at().0.clone();
        self.pos += 1;
        t
    }

    fn error(&self, message: &str) -> Error {
        parse_error(self.here(), message)
    }

    fn expr(&mut self) -> Result<DiffOp> {
        let negate = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let first = self.term()?;
        let mut acc = if negate { -first } else { first };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.checked_add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.checked_sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<DiffOp> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.compose(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn exponent(&mut self, allow_negative: bool) -> Result<i32> {
        let negative = if allow_negative && *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Number(n) if n.is_real() && n.re().is_integer() => {
                let k: i32 = n
                    .re()
                    .to_integer()
                    .try_into()
                    .map_err(|_| self.error("exponent out of range"))?;
                Ok(if negative { -k } else { k })
            }
            _ => {
                self.pos -= 1;
                Err(self.error("syntax error: expected an integer exponent"))
            }
        }
    }

    fn factor(&mut self) -> Result<DiffOp> {
        let at = self.here();
        match self.bump() {
            Tok::Number(n) => Ok(DiffOp::scalar(Poly::constant(self.ring, n))),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.bump() != Tok::RParen {
                    self.pos -= 1;
                    return Err(self.error("syntax error: expected `)`"));
                }
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(&name, at),
            other => {
                self.pos -= 1;
                Err(self.error(&format!("syntax error: unexpected {}", other.describe())))
            }
        }
    }

    fn identifier(&mut self, name: &str, at: Pos) -> Result<DiffOp> {
        if name == "i" {
            return Ok(DiffOp::scalar(Poly::constant(self.ring, GaussianRational::i())));
        }
        if let Some(v) = Var::from_name(name) {
            let mut k = 1;
            if *self.peek() == Tok::Caret {
                self.bump();
                k = self.exponent(true)?;
            }
            let p = Poly::monomial(self.ring, GaussianRational::one(), &[(v, k)]).map_err(|e| match e {
                Error::NonInvertible(s) => parse_error(at, &format!("negative power of non-invertible symbol `{s}`")),
                Error::UnknownVariable(s) => parse_error(at, &format!("symbol `{s}` is not in this ring")),
                other => other,
            })?;
            return Ok(DiffOp::scalar(p));
        }
        if let Some(rest) = name.strip_prefix('d') {
            if let Some(v) = Var::from_name(rest) {
                if !v.is_differentiable() {
                    return Err(parse_error(at, &format!("cannot differentiate parameter `{}`", v.name())));
                }
                let mut k = 1;
                if *self.peek() == Tok::Caret {
                    self.bump();
                    k = self.exponent(false)?;
                }
                return DiffOp::term(Poly::one(self.ring), &[(v, k as u32)]).map_err(|e| match e {
                    Error::UnknownVariable(s) => parse_error(at, &format!("symbol `{s}` is not in this ring")),
                    other => other,
                });
            }
        }
        Err(parse_error(at, &format!("unknown symbol `{name}`")))
    }
}
