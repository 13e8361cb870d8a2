//! Parser for the plain-text polynomial syntax.
//!
//! expr     := ['-'] term (('+'|'-') term)*
//! term     := rational ('*'? factor)* | ('*'? factor)+
//! factor   := primary ('^' int)*
//! primary  := var | '(' expr ')' | '[' expr (',' expr)+ ']'
//! var      := 'x' int
//! rational := int ('/' int)?
//!
//! Whitespace between tokens is insignificant; "0" parses to the zero
//! polynomial. The canonical printer's output round-trips through this parser.

use super::{commutator, FreeAlgError, NcPoly, Scalar};
use num::{BigInt, Zero};

pub fn parse_poly(input: &str) -> Result<NcPoly, FreeAlgError> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> FreeAlgError {
        FreeAlgError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<NcPoly, FreeAlgError> {
        self.skip_ws();
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<NcPoly, FreeAlgError> {
        self.skip_ws();
        let mut acc;
        let mut any = false;
        if self.peek().is_some_and(|b| b.is_ascii_digit()) {
            acc = NcPoly::constant(self.rational()?);
            any = true;
        } else {
            acc = NcPoly::one();
        }
        loop {
            self.skip_ws();
            let save = self.pos;
            if self.eat(b'*') {
                self.skip_ws();
            }
            match self.peek() {
                Some(b'x') | Some(b'(') | Some(b'[') => {
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                    any = true;
                }
                _ => {
                    self.pos = save;
                    break;
                }
            }
        }
        if !any {
            return Err(self.err("expected term"));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NcPoly, FreeAlgError> {
        let mut base = self.primary()?;
        loop {
            self.skip_ws();
            if self.eat(b'^') {
                self.skip_ws();
                let e = self.small_uint()?;
                base = power(&base, e);
            } else {
                break;
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<NcPoly, FreeAlgError> {
        self.skip_ws();
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let i = self.small_uint()?;
                if i == 0 {
                    return Err(self.err("variable index must be >= 1"));
                }
                Ok(NcPoly::var(i))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(b'[') => {
                self.pos += 1;
                let mut acc = self.expr()?;
                let mut args = 1;
                loop {
                    self.skip_ws();
                    if self.eat(b',') {
                        let next = self.expr()?;
                        acc = commutator(&acc, &next);
                        args += 1;
                    } else {
                        break;
                    }
                }
                self.skip_ws();
                if !self.eat(b']') {
                    return Err(self.err("expected ']'"));
                }
                if args < 2 {
                    return Err(self.err("commutator needs at least two arguments"));
                }
                Ok(acc)
            }
            _ => Err(self.err("expected variable, '(' or '['")),
        }
    }

    /// Unsigned integer that must fit in u32 (variable indices, exponents).
    fn small_uint(&mut self) -> Result<u32, FreeAlgError> {
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(b) = self.peek() {
            if !b.is_ascii_digit() {
                break;
            }
            v = v * 10 + (b - b'0') as u64;
            if v > u32::MAX as u64 {
                return Err(self.err("integer too large"));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        Ok(v as u32)
    }

    fn big_uint(&mut self) -> Result<BigInt, FreeAlgError> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Ok(s.parse::<BigInt>().unwrap())
    }

    fn rational(&mut self) -> Result<Scalar, FreeAlgError> {
        let num = self.big_uint()?;
        self.skip_ws();
        if self.eat(b'/') {
            self.skip_ws();
            let den_pos = self.pos;
            let den = self.big_uint()?;
            if den.is_zero() {
                return Err(FreeAlgError::Parse {
                    pos: den_pos,
                    msg: "zero denominator".to_string(),
                });
            }
            Ok(Scalar::new(num, den))
        } else {
            Ok(Scalar::from(num))
        }
    }
}

fn power(base: &NcPoly, e: u32) -> NcPoly {
    let mut acc = NcPoly::one();
    for _ in 0..e {
        acc = acc.mul(base);
    }
    acc
}
