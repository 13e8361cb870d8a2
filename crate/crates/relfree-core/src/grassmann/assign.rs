//! Text format for Grassmann variable assignments.
//!
//! ```text
//! # comment
//! shape: 6 2
//! x1 = e1 | g1 + e2 | g2 + e3 | 1
//! x2 = -2 * e4 | 1
//! ```
//!
//! The shape line lists factor ranks. Each assignment line maps a variable to
//! a sum of terms "coeff * gens | gens | ..." with one '|'-separated slot per
//! factor, '&'-joined generators inside a slot and '1' for the empty product.
//! Factor letters are e (one factor), e,g (two), e,f,g (three), and e for
//! every slot beyond three.

use super::{GrElement, GrassmannError, TensorShape};
use crate::freealg::Scalar;
use num::{BigInt, One};
use std::collections::BTreeMap;
use std::fmt::Write as _;

fn err(line: usize, msg: impl Into<String>) -> GrassmannError {
    GrassmannError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_assignment(
    text: &str,
) -> Result<(TensorShape, BTreeMap<u32, GrElement>), GrassmannError> {
    let mut shape: Option<TensorShape> = None;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("shape:") {
            if shape.is_some() {
                return Err(err(line_no, "duplicate shape line"));
            }
            let mut ranks = Vec::new();
            for tok in rest.split_whitespace() {
                let r: u32 = tok
                    .parse()
                    .map_err(|_| err(line_no, format!("bad rank '{tok}'")))?;
                ranks.push(r);
            }
            if ranks.is_empty() {
                return Err(err(line_no, "shape line needs at least one rank"));
            }
            shape = Some(TensorShape::new(ranks).map_err(|e| err(line_no, e.to_string()))?);
            continue;
        }
        let shape_ref = shape
            .as_ref()
            .ok_or_else(|| err(line_no, "shape line must come first"))?;
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected 'x<i> = <element>'"))?;
        let var = parse_var(lhs.trim()).ok_or_else(|| err(line_no, "bad variable name"))?;
        if map.contains_key(&var) {
            return Err(err(line_no, format!("duplicate assignment for x{var}")));
        }
        let el = parse_element(rhs.trim(), shape_ref, line_no)?;
        map.insert(var, el);
    }
    let shape = shape.ok_or_else(|| err(0, "missing shape line"))?;
    Ok((shape, map))
}

fn parse_var(s: &str) -> Option<u32> {
    let digits = s.strip_prefix('x')?;
    let v: u32 = digits.parse().ok()?;
    if v == 0 {
        None
    } else {
        Some(v)
    }
}

fn parse_element(s: &str, shape: &TensorShape, line: usize) -> Result<GrElement, GrassmannError> {
    let mut el = GrElement::zero();
    // split into signed terms at top level; '|' and '&' never contain '+'/'-'
    let mut rest = s;
    let mut sign = BigInt::one();
    if let Some(r) = rest.strip_prefix('-') {
        sign = -sign;
        rest = r.trim_start();
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r.trim_start();
    }
    loop {
        let end = rest
            .char_indices()
            .find(|&(i, ch)| i > 0 && (ch == '+' || ch == '-'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let (term, tail) = rest.split_at(end);
        let (mask, coeff) = parse_term(term.trim(), shape, line)?;
        el.add_term(mask, coeff * Scalar::from(sign.clone()));
        if tail.is_empty() {
            break;
        }
        sign = if tail.starts_with('-') {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        rest = tail[1..].trim_start();
        if rest.is_empty() {
            return Err(err(line, "dangling sign"));
        }
    }
    Ok(el)
}

fn parse_term(s: &str, shape: &TensorShape, line: usize) -> Result<(u128, Scalar), GrassmannError> {
    let (coeff, gens_part) = match s.split_once('*') {
        Some((c, g)) => (parse_rational(c.trim(), line)?, g.trim()),
        None => {
            // a bare rational is a multiple of the identity basis element
            if s.bytes().next().is_some_and(|b| b.is_ascii_digit()) && !s.contains('|') {
                return Ok((0, parse_rational(s, line)?));
            }
            (Scalar::one(), s)
        }
    };
    let slots: Vec<&str> = gens_part.split('|').map(str::trim).collect();
    if slots.len() != shape.num_factors() {
        return Err(err(
            line,
            format!(
                "term has {} factor slots, shape has {}",
                slots.len(),
                shape.num_factors()
            ),
        ));
    }
    let mut mask = 0u128;
    for (f, slot) in slots.iter().enumerate() {
        if *slot == "1" {
            continue;
        }
        for gen in slot.split('&') {
            let gen = gen.trim();
            let mut chars = gen.chars();
            let letter = chars
                .next()
                .ok_or_else(|| err(line, "empty generator name"))?;
            if letter != shape.factor_letter(f) {
                return Err(err(
                    line,
                    format!(
                        "generator '{gen}' in factor {} should use letter '{}'",
                        f + 1,
                        shape.factor_letter(f)
                    ),
                ));
            }
            let index: u32 = chars
                .as_str()
                .parse()
                .map_err(|_| err(line, format!("bad generator '{gen}'")))?;
            if index == 0 || index > shape.ranks()[f] {
                return Err(err(
                    line,
                    format!("generator '{gen}' out of range for factor {} ", f + 1),
                ));
            }
            let bit = 1u128 << (shape.offsets[f] + index - 1);
            if mask & bit != 0 {
                return Err(err(line, format!("repeated generator '{gen}'")));
            }
            mask |= bit;
        }
    }
    Ok((mask, coeff))
}

fn parse_rational(s: &str, line: usize) -> Result<Scalar, GrassmannError> {
    let parse_int = |t: &str| -> Result<BigInt, GrassmannError> {
        t.parse()
            .map_err(|_| err(line, format!("bad number '{t}'")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let num = parse_int(n.trim())?;
            let den = parse_int(d.trim())?;
            if den == BigInt::from(0) {
                return Err(err(line, "zero denominator"));
            }
            Ok(Scalar::new(num, den))
        }
        None => Ok(Scalar::from(parse_int(s)?)),
    }
}

pub fn print_assignment(shape: &TensorShape, map: &BTreeMap<u32, GrElement>) -> String {
    let mut out = String::new();
    let ranks: Vec<String> = shape.ranks().iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "shape: {}", ranks.join(" "));
    for (v, el) in map {
        let _ = writeln!(out, "x{v} = {}", el.display(shape));
    }
    out
}
