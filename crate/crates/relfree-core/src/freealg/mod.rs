//! Free associative algebra Q<x1, x2, ...> with exact rational coefficients.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

mod parse;
pub use parse::parse_poly;

pub type Scalar = BigRational;

/// Convenience constructor for an exact rational scalar.
pub fn scalar(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum FreeAlgError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("not multihomogeneous: monomial {0} has a different multidegree than {1}")]
    NotMultihomogeneous(String, String),
    #[error("variable index must be >= 1")]
    BadVariable,
}

/// Monomial in noncommuting variables; letters are 1-based variable indices.
///
/// Ordered deg-lex: shorter words first, words of equal length lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn var(i: u32) -> Self {
        debug_assert!(i >= 1);
        Word(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Multiset of letters with multiplicities.
    pub fn content(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &l in &self.0 {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

/// Sparse polynomial: map from words to nonzero rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct NcPoly {
    terms: BTreeMap<Word, Scalar>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        NcPoly::monomial(Word::empty(), Scalar::one())
    }

    pub fn var(i: u32) -> Self {
        NcPoly::monomial(Word::var(i), Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        NcPoly::monomial(Word::empty(), c)
    }

    pub fn monomial(w: Word, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        NcPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending deg-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
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

    pub fn scale(&self, c: &Scalar) -> NcPoly {
        if c.is_zero() {
            return NcPoly::zero();
        }
        NcPoly {
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> NcPoly {
        NcPoly {
            terms: self.terms.iter().map(|(w, a)| (w.clone(), -a)).collect(),
        }
    }

    pub fn add(&self, other: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &NcPoly) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        out
    }

    /// Largest variable index appearing, or 0 for constants.
    pub fn max_variable(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|w| w.0.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|w| w.0.iter().copied())
            .collect()
    }

    /// Max word length among terms; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms
            .keys()
            .all(|w| w.content().values().all(|&d| d == 1))
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if w.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{abs}*{w}")?;
            }
        }
        Ok(())
    }
}

pub fn commutator(a: &NcPoly, b: &NcPoly) -> NcPoly {
    a.mul(b).sub(&b.mul(a))
}

/// Left-normed commutator [a1, a2, ..., ak] = [[...[a1,a2],...],ak].
pub fn left_normed(args: &[NcPoly]) -> NcPoly {
    assert!(
        args.len() >= 2,
        "left-normed commutator needs >= 2 arguments"
    );
    let mut acc = commutator(&args[0], &args[1]);
    for a in &args[2..] {
        acc = commutator(&acc, a);
    }
    acc
}

/// Left-normed commutator of single variables [x_{i1}, ..., x_{ik}].
pub fn left_normed_vars(idx: &[u32]) -> NcPoly {
    let args: Vec<NcPoly> = idx.iter().map(|&i| NcPoly::var(i)).collect();
    left_normed(&args)
}

/// Visits all permutations of (1..=n), passing `even = true` for even parity.
///
/// Heap's algorithm; each step is a single transposition, so parity alternates.
pub fn for_each_permutation<F: FnMut(&[u32], bool)>(n: usize, mut f: F) {
    let mut a: Vec<u32> = (1..=n as u32).collect();
    let mut c = vec![0usize; n];
    let mut even = true;
    f(&a, even);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            even = !even;
            f(&a, even);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Standard polynomial s_m = sum over permutations of sgn(s) x_{s(1)} ... x_{s(m)}.
pub fn standard_polynomial(m: usize) -> NcPoly {
    let mut p = NcPoly::zero();
    for_each_permutation(m, |perm, even| {
        let c = if even { Scalar::one() } else { -Scalar::one() };
        p.add_term(Word(perm.to_vec()), c);
    });
    p
}

/// Commutator-product form of s_2k:
/// (1/2^k) sum over S_2k of sgn(s) [x_{s(1)},x_{s(2)}] ... [x_{s(2k-1)},x_{s(2k)}].
pub fn standard_commutator_form(k: usize) -> NcPoly {
    let mut p = NcPoly::zero();
    for_each_permutation(2 * k, |perm, even| {
        let mut prod = NcPoly::one();
        for j in 0..k {
            let c = commutator(&NcPoly::var(perm[2 * j]), &NcPoly::var(perm[2 * j + 1]));
            prod = prod.mul(&c);
        }
        let sign = if even { Scalar::one() } else { -Scalar::one() };
        p = p.add(&prod.scale(&sign));
    });
    let half_k = Scalar::new(BigInt::one(), BigInt::from(1u64 << k));
    p.scale(&half_k)
}

/// Substitutes variables by polynomials; variables absent from the map are kept.
pub fn substitute(p: &NcPoly, map: &BTreeMap<u32, NcPoly>) -> NcPoly {
    let mut out = NcPoly::zero();
    for (w, c) in p.terms() {
        let mut prod = NcPoly::constant(c.clone());
        for &l in &w.0 {
            match map.get(&l) {
                Some(img) => prod = prod.mul(img),
                None => prod = prod.mul(&NcPoly::var(l)),
            }
        }
        out = out.add(&prod);
    }
    out
}

/// Renames variables by the given map; absent indices are kept. Must be injective
/// on the variables actually present (callers use alphabet permutations).
pub fn rename_variables(p: &NcPoly, map: &BTreeMap<u32, u32>) -> NcPoly {
    let mut out = NcPoly::zero();
    for (w, c) in p.terms() {
        let nw = Word(w.0.iter().map(|l| *map.get(l).unwrap_or(l)).collect());
        out.add_term(nw, c.clone());
    }
    out
}

/// Multidegree of a multihomogeneous polynomial; error if terms disagree.
///
/// The zero polynomial gets the empty multidegree.
pub fn multidegree(p: &NcPoly) -> Result<BTreeMap<u32, u32>, FreeAlgError> {
    let mut it = p.terms();
    let first = match it.next() {
        None => return Ok(BTreeMap::new()),
        Some((w, _)) => w,
    };
    let deg = first.content();
    for (w, _) in it {
        if w.content() != deg {
            return Err(FreeAlgError::NotMultihomogeneous(
                w.to_string(),
                first.to_string(),
            ));
        }
    }
    Ok(deg)
}

/// Splits into multihomogeneous components, ordered by content.
pub fn multihomogeneous_components(p: &NcPoly) -> Vec<NcPoly> {
    let mut groups: BTreeMap<BTreeMap<u32, u32>, NcPoly> = BTreeMap::new();
    for (w, c) in p.terms() {
        groups
            .entry(w.content())
            .or_insert_with(NcPoly::zero)
            .add_term(w.clone(), c.clone());
    }
    groups.into_values().collect()
}

/// Complete multilinearization of a multihomogeneous polynomial.
///
/// Each variable of degree d gets d copies: the original index plus d-1 fresh
/// indices, allocated in increasing variable order as the smallest positive
/// integers not used by the polynomial and not already allocated. Per monomial,
/// the occurrences of a variable receive all d! assignments of its copies; the
/// result is not rescaled, so identifying the copies again multiplies the input
/// by the product of the factorials.
pub fn multilinearize(p: &NcPoly) -> Result<NcPoly, FreeAlgError> {
    let deg = multidegree(p)?;
    let used: BTreeSet<u32> = deg.keys().copied().collect();
    let mut copies: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut allocated: BTreeSet<u32> = BTreeSet::new();
    let mut next = 1u32;
    for (&v, &d) in &deg {
        let mut list = vec![v];
        for _ in 1..d {
            while used.contains(&next) || allocated.contains(&next) {
                next += 1;
            }
            allocated.insert(next);
            list.push(next);
        }
        copies.insert(v, list);
    }

    let mut out = NcPoly::zero();
    for (w, c) in p.terms() {
        // positions of each variable within this monomial
        let mut positions: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &l) in w.0.iter().enumerate() {
            positions.entry(l).or_default().push(i);
        }
        let vars: Vec<u32> = positions.keys().copied().collect();
        let mut letters = w.0.clone();
        assign_copies(&vars, 0, &positions, &copies, &mut letters, c, &mut out);
    }
    Ok(out)
}

fn assign_copies(
    vars: &[u32],
    vi: usize,
    positions: &BTreeMap<u32, Vec<usize>>,
    copies: &BTreeMap<u32, Vec<u32>>,
    letters: &mut Vec<u32>,
    coeff: &Scalar,
    out: &mut NcPoly,
) {
    if vi == vars.len() {
        out.add_term(Word(letters.clone()), coeff.clone());
        return;
    }
    let v = vars[vi];
    let pos = &positions[&v];
    let cps = &copies[&v];
    debug_assert_eq!(pos.len(), cps.len());
    let mut perm: Vec<usize> = (0..cps.len()).collect();
    // iterate all bijections positions -> copies for this variable
    loop {
        for (j, &p) in pos.iter().enumerate() {
            letters[p] = cps[perm[j]];
        }
        assign_copies(vars, vi + 1, positions, copies, letters, coeff, out);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    for &p in pos {
        letters[p] = v;
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Commutator of two monomials expanded over single-variable brackets:
/// [x_{i1}...x_{ik}, y_{j1}...y_{jl}] as a sum of terms
/// x-prefix . y-prefix . [x_ia, y_jb] . y-suffix . x-suffix.
pub fn comm_expand_monomials(xs: &Word, ys: &Word) -> NcPoly {
    let mut out = NcPoly::zero();
    let k = xs.len();
    let l = ys.len();
    for a in 0..k {
        for b in 0..l {
            let mut head: Vec<u32> = Vec::with_capacity(k + l);
            head.extend_from_slice(&xs.0[..a]);
            head.extend_from_slice(&ys.0[..b]);
            let mut tail: Vec<u32> = Vec::new();
            tail.extend_from_slice(&ys.0[b + 1..]);
            tail.extend_from_slice(&xs.0[a + 1..]);
            // [x_ia, y_jb] = x_ia y_jb - y_jb x_ia
            for (first, second, sign) in [
                (xs.0[a], ys.0[b], Scalar::one()),
                (ys.0[b], xs.0[a], -Scalar::one()),
            ] {
                let mut word = head.clone();
                word.push(first);
                word.push(second);
                word.extend_from_slice(&tail);
                out.add_term(Word(word), sign);
            }
        }
    }
    out
}

/// Word as a polynomial with coefficient 1.
pub fn word_poly(letters: &[u32]) -> NcPoly {
    NcPoly::monomial(Word(letters.to_vec()), Scalar::one())
}

#[cfg(test)]
mod tests;
