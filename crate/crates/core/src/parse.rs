//! Text grammar for differential polynomials.
//!
//! ```text
//! expr     := ('+'|'-')? term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := atom ('^' int)?
//! atom     := rational | jet | '(' expr ')'
//! jet      := name tick* | name '(' nat ')'      name ∈ {u, F, G, H}
//! rational := nat ('/' nat)?
//! ```
//!
//! Whitespace is ignored. Negative powers are allowed on single terms.
//! The printer (`Display` for `DiffPoly`) emits this grammar.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::jet::{Indet, Monomial};
use crate::poly::{DiffPoly, Q};

/// Largest power applied to a multi-term expression.
const MAX_EXPANDED_POWER: i64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("overflow at position {pos}: {msg}")]
    Overflow { pos: usize, msg: String },
}

pub fn parse_function(text: &str) -> Result<DiffPoly, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc += &self.term()?;
            } else if self.eat(b'-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<DiffPoly, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let neg = self.eat(b'-');
        let digits = self.digits()?;
        let e: i32 = digits
            .parse()
            .map_err(|_| ParseError::Overflow { pos: start, msg: format!("exponent {digits} out of range") })?;
        let e = if neg { -e } else { e };
        self.power(base, e, start)
    }

    fn power(&self, base: DiffPoly, e: i32, pos: usize) -> Result<DiffPoly, ParseError> {
        if let Some((m, c)) = base.as_monomial() {
            if e < 0 && m.vars().any(|v| v.indet != Indet::U) {
                return Err(ParseError::Syntax { pos, msg: "negative powers are allowed only on u-jets".into() });
            }
            let c =
                if e >= 0 { num_traits::pow(c.clone(), e as usize) } else { num_traits::pow(c.recip(), (-e) as usize) };
            let m = m
                .factors()
                .iter()
                .try_fold(Monomial::one(), |acc, &(v, k)| k.checked_mul(e).map(|k| acc.mul_var(v, k)));
            let m = m.ok_or_else(|| ParseError::Overflow { pos, msg: "exponent out of range".into() })?;
            return Ok(DiffPoly::monomial(m, c));
        }
        if base.is_zero() {
            if e < 0 {
                return Err(ParseError::Syntax { pos, msg: "negative power of zero".into() });
            }
            return Ok(if e == 0 { DiffPoly::one() } else { DiffPoly::zero() });
        }
        if e < 0 {
            return Err(ParseError::Syntax { pos, msg: "negative power of a sum".into() });
        }
        if e as i64 > MAX_EXPANDED_POWER {
            return Err(ParseError::Overflow { pos, msg: format!("power {e} of a sum is too large to expand") });
        }
        Ok(base.pow(e as u32))
    }

    fn digits(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected digits"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n: BigInt = self.digits()?.parse().expect("digits");
                if self.eat(b'/') {
                    let d: BigInt = self.digits()?.parse().expect("digits");
                    if d.is_zero() {
                        return Err(self.syntax("zero denominator"));
                    }
                    Ok(DiffPoly::constant(Q::new(n, d)))
                } else {
                    Ok(DiffPoly::constant(Q::from_integer(n)))
                }
            }
            Some(c) => {
                let name = (c as char).to_string();
                let Some(w) = Indet::from_name(&name) else {
                    return Err(self.syntax(&format!("unexpected character '{}'", c as char)));
                };
                self.pos += 1;
                // ticks and the parenthesised order bind tightly: no whitespace
                if self.src.get(self.pos) == Some(&b'(') {
                    self.pos += 1;
                    let start = self.pos;
                    let digits = self.digits()?;
                    let order: u32 = digits.parse().map_err(|_| ParseError::Overflow {
                        pos: start,
                        msg: format!("jet order {digits} out of range"),
                    })?;
                    if !self.eat(b')') {
                        return Err(self.syntax("expected ')'"));
                    }
                    return Ok(DiffPoly::jet(w, order));
                }
                let mut order = 0u32;
                while self.src.get(self.pos) == Some(&b'\'') {
                    order += 1;
                    self.pos += 1;
                }
                Ok(DiffPoly::jet(w, order))
            }
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

impl std::str::FromStr for DiffPoly {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_function(s)
    }
}
