//! Canonical text form of expressions.
//!
//! `vj` is the vector `v_j`, `<vi,vj>` the invariant `<v_i, v_j>` (`i ≤ j`),
//! and `<vi,vj>^k` a power. Terms are `coeff*factor*factor…` joined by
//! ` + ` / ` - `, leading (highest-derivative) term first. Coefficients are
//! exact rationals such as `3/2`; a unit coefficient is omitted. A vector term
//! has exactly one bare `vj` factor, written last. The zero expression is `0`.
//! The v-sector uses `w` in place of `v`.

use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::{Dot, Monomial, ScalarDiffPoly};
use super::vector::{VectorDiffPoly, VectorTerm};
use super::{Coeff, DiffPolyError};

pub trait ToText {
    /// Renders with `symbol` as the name of the vector variable.
    fn to_text(&self, symbol: char) -> String;
}

fn write_monomial(out: &mut String, m: &Monomial, symbol: char) -> bool {
    // Dots ascending for readability, equal factors grouped into powers.
    let mut dots: Vec<Dot> = m.dots().to_vec();
    dots.reverse();
    let mut first = true;
    let mut i = 0;
    while i < dots.len() {
        let d = dots[i];
        let mut k = 1;
        while i + k < dots.len() && dots[i + k] == d {
            k += 1;
        }
        if !first {
            out.push('*');
        }
        first = false;
        let _ = write!(out, "<{symbol}{},{symbol}{}>", d.lo(), d.hi());
        if k > 1 {
            let _ = write!(out, "^{k}");
        }
        i += k;
    }
    !first
}

fn render<'a>(
    terms: impl Iterator<Item = (&'a Coeff, Box<dyn Fn(&mut String) -> bool + 'a>)>,
) -> String {
    let mut out = String::new();
    for (c, factors) in terms {
        let neg = c.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        let mut body = String::new();
        let has_factors = factors(&mut body);
        if !a.is_one() || !has_factors {
            let _ = write!(out, "{a}");
            if has_factors {
                out.push('*');
            }
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl ToText for ScalarDiffPoly {
    fn to_text(&self, symbol: char) -> String {
        render(self.0.iter().rev().map(|(m, c)| {
            let f: Box<dyn Fn(&mut String) -> bool> =
                Box::new(move |s: &mut String| write_monomial(s, m, symbol));
            (c, f)
        }))
    }
}

impl ToText for VectorDiffPoly {
    fn to_text(&self, symbol: char) -> String {
        render(self.0.iter().rev().map(|(t, c)| {
            let f: Box<dyn Fn(&mut String) -> bool> = Box::new(move |s: &mut String| {
                if write_monomial(s, t.monomial(), symbol) {
                    s.push('*');
                }
                let _ = write!(s, "{symbol}{}", t.order());
                true
            });
            (c, f)
        }))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    symbol: u8,
}

enum Factor {
    Number(Coeff),
    Dot(Dot, u32),
    Vector(u8),
}

type Term = (Coeff, Vec<Dot>, Vec<u8>);

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DiffPolyError> {
        Err(DiffPolyError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), DiffPolyError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn digits(&mut self) -> Result<&'a str, DiffPolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn order(&mut self) -> Result<u8, DiffPolyError> {
        let d = self.digits()?;
        match d.parse::<u8>() {
            Ok(v) => Ok(v),
            Err(_) => self.err("derivative order out of range"),
        }
    }

    fn vector_symbol(&mut self) -> Result<u8, DiffPolyError> {
        self.skip_ws();
        if self.peek() != Some(self.symbol) {
            return self.err(format!("expected '{}'", self.symbol as char));
        }
        self.pos += 1;
        self.order()
    }

    fn factor(&mut self) -> Result<Factor, DiffPolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'<') => {
                self.pos += 1;
                let i = self.vector_symbol()?;
                self.eat(b',')?;
                let j = self.vector_symbol()?;
                self.eat(b'>')?;
                self.skip_ws();
                let mut power = 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    power = match self.digits()?.parse::<u32>() {
                        Ok(p) if p >= 1 => p,
                        _ => return self.err("invalid power"),
                    };
                }
                Ok(Factor::Dot(Dot::new(i, j), power))
            }
            Some(c) if c.is_ascii_digit() => {
                let n: BigInt = self.digits()?.parse().expect("digits parse");
                self.skip_ws();
                let mut d = BigInt::one();
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    d = self.digits()?.parse().expect("digits parse");
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                }
                Ok(Factor::Number(BigRational::new(n, d)))
            }
            Some(c) if c == self.symbol => Ok(Factor::Vector(self.vector_symbol()?)),
            _ => self.err("expected a factor"),
        }
    }

    fn term(&mut self, sign: Coeff) -> Result<Term, DiffPolyError> {
        let mut coeff = sign;
        let mut dots = Vec::new();
        let mut vectors = Vec::new();
        loop {
            match self.factor()? {
                Factor::Number(c) => coeff *= c,
                Factor::Dot(d, p) => dots.extend(std::iter::repeat(d).take(p as usize)),
                Factor::Vector(j) => vectors.push(j),
            }
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coeff, dots, vectors))
    }

    fn expr(&mut self) -> Result<Vec<Term>, DiffPolyError> {
        let mut terms = Vec::new();
        self.skip_ws();
        let mut sign = Coeff::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            terms.push(self.term(sign)?);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => sign = Coeff::one(),
                Some(b'-') => sign = -Coeff::one(),
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
        }
        Ok(terms)
    }
}

fn parse_terms(src: &str, symbol: char) -> Result<Vec<Term>, DiffPolyError> {
    if !symbol.is_ascii_alphabetic() {
        return Err(DiffPolyError::Parse {
            pos: 0,
            msg: format!("invalid vector symbol '{symbol}'"),
        });
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        symbol: symbol as u8,
    };
    p.expr()
}

/// Parses a scalar expression written in the canonical form (any term and
/// factor order is accepted).
pub fn parse_scalar(src: &str, symbol: char) -> Result<ScalarDiffPoly, DiffPolyError> {
    let mut out = ScalarDiffPoly::zero();
    for (c, dots, vectors) in parse_terms(src, symbol)? {
        if !vectors.is_empty() {
            return Err(DiffPolyError::Parse {
                pos: 0,
                msg: "vector factor in a scalar expression".into(),
            });
        }
        out.0.add_term(Monomial::new(dots), c);
    }
    Ok(out)
}

/// Parses a vector expression; every nonzero term needs exactly one `vj` factor.
pub fn parse_vector(src: &str, symbol: char) -> Result<VectorDiffPoly, DiffPolyError> {
    let mut out = VectorDiffPoly::zero();
    for (c, dots, vectors) in parse_terms(src, symbol)? {
        match vectors.as_slice() {
            [j] => out.0.add_term(VectorTerm::new(Monomial::new(dots), *j), c),
            [] if c.is_zero() => {}
            _ => {
                return Err(DiffPolyError::Parse {
                    pos: 0,
                    msg: "each vector term needs exactly one vector factor".into(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::{int, ratio};

    #[test]
    fn renders_canonical_vector() {
        let p = VectorDiffPoly::v(3)
            + VectorDiffPoly::scalar_times_v(&(&ScalarDiffPoly::dot(0, 0) * &ratio(3, 2)), 1);
        assert_eq!(p.to_text('v'), "v3 + 3/2*<v0,v0>*v1");
        assert_eq!(p.to_text('w'), "w3 + 3/2*<w0,w0>*w1");
    }

    #[test]
    fn renders_scalar_with_powers_and_signs() {
        let h = &ScalarDiffPoly::dot(1, 1) * &ratio(-1, 2)
            + &ScalarDiffPoly::dot(0, 0).pow(2) * &ratio(1, 8);
        assert_eq!(h.to_text('v'), "-1/2*<v1,v1> + 1/8*<v0,v0>^2");
        assert_eq!(ScalarDiffPoly::zero().to_text('v'), "0");
        assert_eq!(ScalarDiffPoly::constant(int(-3)).to_text('v'), "-3");
    }

    #[test]
    fn round_trip() {
        for src in [
            "v5 + 5/2*<v0,v0>*v3 - 7*<v0,v1>^2*<v2,v2>*v0",
            "-v1",
            "0",
        ] {
            let p = parse_vector(src, 'v').unwrap();
            assert_eq!(p.to_text('v'), src);
        }
        let s = parse_scalar("1/2*<v2,v2> - 3/4*<v0,v0>*<v1,v1>", 'v').unwrap();
        assert_eq!(parse_scalar(&s.to_text('v'), 'v').unwrap(), s);
    }

    #[test]
    fn parser_accepts_any_order() {
        let a = parse_vector("v1*<v0,v0>*3/2 + v3", 'v').unwrap();
        let b = parse_vector("v3 + 3/2*<v0,v0>*v1", 'v').unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parser_errors() {
        assert!(parse_scalar("<v0,v1", 'v').is_err());
        assert!(parse_scalar("v1", 'v').is_err());
        assert!(parse_vector("<v0,v0>", 'v').is_err());
        assert!(parse_vector("v1*v2", 'v').is_err());
        assert!(parse_vector("w1", 'v').is_err());
        assert!(parse_scalar("1/0", 'v').is_err());
        assert!(parse_scalar("2 3", 'v').is_err());
    }
}
