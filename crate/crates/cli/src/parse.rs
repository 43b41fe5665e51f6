//! Series expressions.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' term) | ('/' INT))*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] INT)?
//! atom   := INT | NAME | '(' expr ')'
//! ```
//!
//! `NAME` is a ring variable or `t`, the generator of the residue field of
//! `W` when `f > 1`. Negative exponents are accepted on variables only.

use std::sync::Arc;

use reciprocity_core::series::{SeriesRing, TruncatedSeries};
use reciprocity_core::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Name(String),
    Sym(char),
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesExpr {
    Int(i64),
    /// A variable and its source offset.
    Var(String, usize),
    Neg(Box<SeriesExpr>),
    Add(Box<SeriesExpr>, Box<SeriesExpr>),
    Sub(Box<SeriesExpr>, Box<SeriesExpr>),
    Mul(Box<SeriesExpr>, Box<SeriesExpr>),
    /// Division by an integer literal.
    Div(Box<SeriesExpr>, i64),
    Pow(Box<SeriesExpr>, i64),
}

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::ParseError { position, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().collect();
            let v = s.parse::<i64>().map_err(|_| err(start, "integer literal too large"))?;
            out.push((start, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Name(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else if c == '−' {
            out.push((i, Tok::Sym('-')));
            i += 1;
        } else {
            return Err(err(i, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(err(self.here(), "expected an integer literal")),
        }
    }

    fn expr(&mut self) -> Result<SeriesExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = SeriesExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = SeriesExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<SeriesExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = SeriesExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                let at = self.here();
                let d = self.int().map_err(|_| err(at, "division is by integer literals only"))?;
                if d == 0 {
                    return Err(err(at, "division by zero"));
                }
                lhs = SeriesExpr::Div(Box::new(lhs), d);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<SeriesExpr> {
        if self.eat('-') {
            return Ok(SeriesExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<SeriesExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.here();
        let neg = self.eat('-');
        let k = self.int()?;
        if neg && !matches!(base, SeriesExpr::Var(..)) {
            return Err(err(at, "negative exponents apply to variables only"));
        }
        Ok(SeriesExpr::Pow(Box::new(base), if neg { -k } else { k }))
    }

    fn atom(&mut self) -> Result<SeriesExpr> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(SeriesExpr::Int(v))
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(SeriesExpr::Var(n, at))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(err(self.here(), "expected ')'"));
                }
                Ok(e)
            }
            Some(t) => Err(err(at, format!("unexpected token {t:?}"))),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<SeriesExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(p.here(), "trailing input"));
    }
    Ok(e)
}

/// Evaluates an expression exactly in `ring`.
pub fn eval(expr: &SeriesExpr, ring: &Arc<SeriesRing>) -> Result<TruncatedSeries> {
    use SeriesExpr::*;
    Ok(match expr {
        Int(v) => TruncatedSeries::from_i64(ring, *v),
        Var(name, at) => variable(name, *at, ring, 1)?,
        Neg(a) => eval(a, ring)?.neg(),
        Add(a, b) => eval(a, ring)?.add(&eval(b, ring)?)?,
        Sub(a, b) => eval(a, ring)?.sub(&eval(b, ring)?)?,
        Mul(a, b) => eval(a, ring)?.mul(&eval(b, ring)?)?,
        Div(a, d) => eval(a, ring)?.div_i64(*d)?,
        Pow(a, k) => match (&**a, *k) {
            (Var(name, at), k) => variable(name, *at, ring, k)?,
            (a, k) => eval(a, ring)?.pow(k as u32)?,
        },
    })
}

fn variable(name: &str, at: usize, ring: &Arc<SeriesRing>, k: i64) -> Result<TruncatedSeries> {
    let ctx = ring.ctx().clone();
    if name == "t" && ring.vars().iter().all(|v| v.name != "t") {
        if ctx.f() < 2 {
            return Err(err(at, "'t' needs a residue degree f > 1"));
        }
        if k < 0 {
            return Err(err(at, "'t' has no negative powers here"));
        }
        let mut coords = vec![0u64; ctx.f()];
        coords[1] = 1;
        let t = TruncatedSeries::constant(ring, ctx.q_from_coords(&coords.into_iter().collect(), ctx.n() as i32))?;
        return t.pow(k as u32);
    }
    let i = ring
        .vars()
        .iter()
        .position(|v| v.name == name)
        .ok_or_else(|| err(at, format!("unknown variable '{name}'")))?;
    let mut e = vec![0i32; ring.nvars()];
    e[i] = i32::try_from(k).map_err(|_| err(at, "exponent too large"))?;
    TruncatedSeries::monomial(ring, &e, ctx.q_one())
}

/// `parse_series(text, ring)`: parse and evaluate.
pub fn parse_series(text: &str, ring: &Arc<SeriesRing>) -> Result<TruncatedSeries> {
    eval(&parse_expr(text)?, ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reciprocity_core::padic::PadicContext;
    use reciprocity_core::series::{CoeffKind, VarKind};

    fn yring(kind: CoeffKind) -> Arc<SeriesRing> {
        let ctx = PadicContext::new(3, 1, 4).unwrap();
        SeriesRing::univariate(&ctx, kind, "Y", VarKind::Kummer, 8, -4).unwrap()
    }

    #[test]
    fn examples() {
        let r = yring(CoeffKind::Integral);
        let s = parse_series("1 + 3*Y + Y^2", &r).unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[0], 1), (&[1], 3), (&[2], 1)]).unwrap();
        assert!(s.eq_within(&want));
        let s = parse_series("Y^-1 * (1 + Y)", &r).unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[-1], 1), (&[0], 1)]).unwrap();
        assert!(s.eq_within(&want));
        let half = parse_series("1/2", &r).unwrap();
        let ctx = r.ctx();
        assert!(ctx.q_eq(&half.coeff(&[0]), &ctx.q_from_ratio(1, 2).unwrap()));
    }

    #[test]
    fn errors() {
        let r = yring(CoeffKind::Integral);
        assert!(matches!(parse_series("1/3", &r), Err(Error::DivisorNotUnit(3))));
        assert!(parse_series("1/3", &yring(CoeffKind::Rational)).is_ok());
        assert!(matches!(parse_series("1 + * Y", &r), Err(Error::ParseError { position: 4, .. })));
        assert!(matches!(parse_series("Y / Y", &r), Err(Error::ParseError { position: 4, .. })));
        assert!(matches!(parse_series("(1+Y)^-1", &r), Err(Error::ParseError { .. })));
        assert!(matches!(parse_series("1 + Z", &r), Err(Error::ParseError { position: 4, .. })));
        assert!(matches!(parse_series("(1 + Y", &r), Err(Error::ParseError { position: 6, .. })));
    }

    #[test]
    fn residue_field_generator() {
        let ctx = PadicContext::new(3, 2, 3).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Integral, "Y", VarKind::Kummer, 4, 0).unwrap();
        let s = parse_series("(1 + t)*Y + t^2", &r).unwrap();
        let back = parse_series(&s.to_string(), &r).unwrap();
        assert!(s.eq_within(&back), "{s}");
        assert!(parse_series("t", &yring(CoeffKind::Integral)).is_err());
    }
}
