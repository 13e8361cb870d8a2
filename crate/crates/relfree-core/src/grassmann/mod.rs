//! Tensor products of finite-rank Grassmann (exterior) algebras over Q.
//!
//! A basis element of E_{r1} x ... x E_{rk} is one generator subset per
//! factor, packed into a u128 with per-factor bit ranges. The product is the
//! plain (non-super) tensor product: factors multiply independently and there
//! is no sign across factors, matching evaluations like
//! (e1 x 1)(1 x g1) = (1 x g1)(e1 x 1) = e1 x g1.

use crate::freealg::{NcPoly, Scalar};
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

mod assign;
pub use assign::{parse_assignment, print_assignment};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("factor rank must be >= 1")]
    BadRank,
    #[error("shape too large: total rank must be <= 24")]
    ShapeTooLarge,
    #[error("variable x{0} has no assigned value")]
    UnassignedVariable(u32),
    #[error("generator index {index} out of range for factor {factor} (rank {rank})")]
    GeneratorOutOfRange {
        factor: usize,
        index: u32,
        rank: u32,
    },
    #[error("assignment parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Shape of a tensor product of Grassmann algebras: one rank per factor.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorShape {
    ranks: Vec<u32>,
    offsets: Vec<u32>,
    total_bits: u32,
}

impl TensorShape {
    pub fn new(ranks: Vec<u32>) -> Result<Self, GrassmannError> {
        if ranks.is_empty() || ranks.iter().any(|&r| r == 0) {
            return Err(GrassmannError::BadRank);
        }
        let total: u32 = ranks.iter().sum();
        // full-basis random elements enumerate 2^total masks
        if total > 24 {
            return Err(GrassmannError::ShapeTooLarge);
        }
        let mut offsets = Vec::with_capacity(ranks.len());
        let mut off = 0;
        for &r in &ranks {
            offsets.push(off);
            off += r;
        }
        Ok(TensorShape {
            ranks,
            offsets,
            total_bits: total,
        })
    }

    pub fn num_factors(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn basis_size(&self) -> u64 {
        1u64 << self.total_bits
    }

    fn factor_mask(&self, factor: usize) -> u128 {
        (((1u128 << self.ranks[factor]) - 1) << self.offsets[factor]) as u128
    }

    /// Single generator (1-based index) of the given factor as an element.
    pub fn generator(&self, factor: usize, index: u32) -> Result<GrElement, GrassmannError> {
        if index == 0 || index > self.ranks[factor] {
            return Err(GrassmannError::GeneratorOutOfRange {
                factor,
                index,
                rank: self.ranks[factor],
            });
        }
        let mask = 1u128 << (self.offsets[factor] + index - 1);
        Ok(GrElement::from_term(mask, Scalar::one()))
    }

    /// Product of two basis masks: None if a generator repeats, else the sign
    /// from sorting (inversions counted within each factor only) and the union.
    fn merge(&self, a: u128, b: u128) -> Option<(bool, u128)> {
        if a & b != 0 {
            return None;
        }
        let mut positive = true;
        for f in 0..self.ranks.len() {
            let fm = self.factor_mask(f);
            let af = a & fm;
            let mut bf = b & fm;
            while bf != 0 {
                let j = bf.trailing_zeros();
                // a-generators with a larger index must jump over this one
                if (af >> (j + 1)).count_ones() % 2 == 1 {
                    positive = !positive;
                }
                bf &= bf - 1;
            }
        }
        Some((positive, a | b))
    }

    /// Canonical letter for a factor in the text format.
    pub fn factor_letter(&self, factor: usize) -> char {
        match self.ranks.len() {
            1 => 'e',
            2 => ['e', 'g'][factor],
            3 => ['e', 'f', 'g'][factor],
            _ => 'e',
        }
    }
}

/// Element of a Grassmann tensor product: sparse map from basis masks.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GrElement {
    terms: BTreeMap<u128, Scalar>,
}

impl GrElement {
    pub fn zero() -> Self {
        GrElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        GrElement::from_term(0, Scalar::one())
    }

    pub fn from_term(mask: u128, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mask, c);
        }
        GrElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u128, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mask: u128, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mask) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &GrElement) -> GrElement {
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.add_term(m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GrElement) -> GrElement {
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.add_term(m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> GrElement {
        GrElement {
            terms: self.terms.iter().map(|(&m, c)| (m, -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> GrElement {
        if s.is_zero() {
            return GrElement::zero();
        }
        GrElement {
            terms: self.terms.iter().map(|(&m, c)| (m, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &GrElement, shape: &TensorShape) -> GrElement {
        let mut out = GrElement::zero();
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if let Some((positive, m)) = shape.merge(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if positive { c } else { -c });
                }
            }
        }
        out
    }

    /// Canonical text form, e.g. "-8 * e1&e2 | g1&g2".
    pub fn display(&self, shape: &TensorShape) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (&mask, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mask == 0 {
                let _ = write!(out, "{abs}");
            } else {
                if !abs.is_one() {
                    let _ = write!(out, "{abs} * ");
                }
                out.push_str(&mask_text(mask, shape));
            }
        }
        out
    }
}

fn mask_text(mask: u128, shape: &TensorShape) -> String {
    let mut parts = Vec::new();
    for f in 0..shape.num_factors() {
        let letter = shape.factor_letter(f);
        let mf = (mask & shape.factor_mask(f)) >> shape.offsets[f];
        if mf == 0 {
            parts.push("1".to_string());
        } else {
            let mut gens = Vec::new();
            let mut m = mf;
            while m != 0 {
                let j = m.trailing_zeros();
                gens.push(format!("{letter}{}", j + 1));
                m &= m - 1;
            }
            parts.push(gens.join("&"));
        }
    }
    parts.join(" | ")
}

/// Evaluates a polynomial with every variable mapped to a Grassmann element.
pub fn gr_evaluate(
    p: &NcPoly,
    shape: &TensorShape,
    map: &BTreeMap<u32, GrElement>,
) -> Result<GrElement, GrassmannError> {
    let mut out = GrElement::zero();
    for (w, c) in p.terms() {
        let mut prod = GrElement::from_term(0, c.clone());
        for &l in &w.0 {
            let img = map.get(&l).ok_or(GrassmannError::UnassignedVariable(l))?;
            prod = prod.mul(img, shape);
            if prod.is_zero() {
                break;
            }
        }
        out = out.add(&prod);
    }
    Ok(out)
}

/// Random element with uniform integer coefficients in [-3, 3] on the full basis.
pub fn random_element(shape: &TensorShape, rng: &mut ChaCha8Rng) -> GrElement {
    let mut el = GrElement::zero();
    for mask in 0..shape.basis_size() {
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            el.add_term(mask as u128, Scalar::from(num::BigInt::from(c)));
        }
    }
    el
}

/// Random element supported on a bounded number of basis elements; used when
/// full-basis density would make probe products too expensive.
pub fn random_sparse_element(
    shape: &TensorShape,
    rng: &mut ChaCha8Rng,
    support: usize,
) -> GrElement {
    let mut el = GrElement::zero();
    for _ in 0..support {
        let mask = rng.gen_range(0..shape.basis_size());
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            el.add_term(mask as u128, Scalar::from(num::BigInt::from(c)));
        }
    }
    el
}

/// Outcome of a randomized identity probe.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub trials: u32,
    /// First trial index with a nonzero evaluation, if any.
    pub nonzero_trial: Option<u32>,
    /// The nonzero value and the assignment that produced it.
    pub witness: Option<(BTreeMap<u32, GrElement>, GrElement)>,
}

impl ProbeReport {
    pub fn all_zero(&self) -> bool {
        self.nonzero_trial.is_none()
    }
}

/// Evaluates `p` on random full-basis elements for `trials` seeded attempts.
///
/// Trial t uses ChaCha8 seeded with seed + t, so single trials can be replayed.
pub fn gr_random_identity_probe(
    p: &NcPoly,
    shape: &TensorShape,
    trials: u32,
    seed: u64,
) -> Result<ProbeReport, GrassmannError> {
    let vars = p.variables();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let map: BTreeMap<u32, GrElement> = vars
            .iter()
            .map(|&v| (v, random_element(shape, &mut rng)))
            .collect();
        let val = gr_evaluate(p, shape, &map)?;
        if !val.is_zero() {
            return Ok(ProbeReport {
                trials: t + 1,
                nonzero_trial: Some(t),
                witness: Some((map, val)),
            });
        }
    }
    Ok(ProbeReport {
        trials,
        nonzero_trial: None,
        witness: None,
    })
}

#[cfg(test)]
mod tests;
