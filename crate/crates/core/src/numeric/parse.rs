//! Scalar text encoding.
//!
//! The canonical forms are `p/q` and `(a+b*sqrt(d))/c`. The reader accepts
//! any arithmetic expression over integers built with `+ - * /`,
//! parentheses and `sqrt(n)`, which covers both forms and hand-written
//! variants such as `(3-sqrt(5))/2`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ExactNumber, NumericError};

impl FromStr for ExactNumber {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_exact(s)
    }
}

pub fn parse_exact(text: &str) -> Result<ExactNumber, NumericError> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, what: &str) -> NumericError {
        NumericError::Parse {
            input: self.src.to_string(),
            detail: format!("{what} at byte {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExactNumber, NumericError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.checked_add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ExactNumber, NumericError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.checked_mul(&self.unary()?)?;
            } else if self.eat(b'/') {
                acc = acc.checked_div(&self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<ExactNumber, NumericError> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<ExactNumber, NumericError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(ExactNumber::Rational(n.into()))
            }
            Some(b's') => {
                if !self.src[self.pos..].starts_with("sqrt") {
                    return Err(self.error("unknown identifier"));
                }
                self.pos += 4;
                if !self.eat(b'(') {
                    return Err(self.error("expected '(' after sqrt"));
                }
                let neg = self.eat(b'-');
                let n = self.integer()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                let n = if neg { -n } else { n };
                if n == BigInt::from(0) {
                    return Ok(ExactNumber::zero());
                }
                ExactNumber::surd(BigRational::zero(), BigRational::one(), n)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn integer(&mut self) -> Result<BigInt, NumericError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        self.src[start..self.pos]
            .parse::<BigInt>()
            .map_err(|_| self.error("bad integer"))
    }
}
