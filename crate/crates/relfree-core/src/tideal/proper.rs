//! Proper polynomials: products of commutators, projection, and coordinates.
//!
//! A multilinear polynomial on a letter set S decomposes uniquely as
//! f = sum over A subset of S of asc(A) . gamma_A, where asc(A) is the ascending
//! word on A and each gamma_A is proper (a combination of products of pure
//! commutators on S minus A). The projection onto the A = empty part is
//! pi = U_{i1} U_{i2} ... (letters ascending), with U_i(g) = g - x_i . g|_{x_i -> 1}.
//! Each U_i only subtracts a left multiple of a substitution image, so any
//! T-ideal is stable under pi; this is what makes the proper route to
//! membership both sound and complete.

use crate::freealg::{left_normed_vars, NcPoly, Scalar, Word};
use num::{BigInt, Integer, One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};

/// Dimension of the proper multilinear subspace on n letters (derangement count).
pub fn proper_dim(n: usize) -> u64 {
    match n {
        0 => 1,
        1 => 0,
        _ => {
            let (mut a, mut b) = (1u64, 0u64); // D_0, D_1
            for k in 2..=n {
                let d = (k as u64 - 1) * (a + b);
                a = b;
                b = d;
            }
            b
        }
    }
}

/// f with every occurrence of the letter removed (the substitution x_i -> 1).
pub fn drop_letter(f: &NcPoly, letter: u32) -> NcPoly {
    let mut out = NcPoly::zero();
    for (w, c) in f.terms() {
        let nw: Vec<u32> = w.0.iter().copied().filter(|&l| l != letter).collect();
        out.add_term(Word(nw), c.clone());
    }
    out
}

/// Projection of a multilinear polynomial onto its proper part.
pub fn pi_proper(f: &NcPoly) -> NcPoly {
    debug_assert!(f.is_multilinear());
    let letters: Vec<u32> = f.variables().into_iter().collect();
    let mut g = f.clone();
    for &i in &letters {
        // U_i: remove every canonical component whose monomial prefix uses x_i
        let dropped = drop_letter(&g, i);
        g = g.sub(&NcPoly::var(i).mul(&dropped));
    }
    g
}

/// Canonical decomposition f = sum of asc(A) . gamma_A with gamma_A proper.
///
/// Returns the nonzero components as (A ascending, gamma_A), ordered by A.
pub fn canonical_components(f: &NcPoly) -> Vec<(Vec<u32>, NcPoly)> {
    debug_assert!(f.is_multilinear());
    let letters: Vec<u32> = f.variables().into_iter().collect();
    let n = letters.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let a: Vec<u32> = (0..n)
            .filter(|&j| mask >> j & 1 == 1)
            .map(|j| letters[j])
            .collect();
        let mut g = f.clone();
        for &l in &a {
            g = drop_letter(&g, l);
        }
        let gamma = pi_proper(&g);
        if !gamma.is_zero() {
            out.push((a, gamma));
        }
    }
    out.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Rebuilds the polynomial from its canonical components (test helper).
pub fn reassemble_components(parts: &[(Vec<u32>, NcPoly)]) -> NcPoly {
    let mut out = NcPoly::zero();
    for (a, gamma) in parts {
        let prefix = NcPoly::monomial(Word(a.clone()), Scalar::one());
        out = out.add(&prefix.mul(gamma));
    }
    out
}

/// One basis element: blocks of letters, each bracketed with its maximum first.
pub(crate) fn basis_element(blocks: &[Vec<u32>]) -> NcPoly {
    let mut prod = NcPoly::one();
    for b in blocks {
        prod = prod.mul(&left_normed_vars(b));
    }
    prod
}

/// Enumerates the proper basis on an arbitrary sorted letter set.
///
/// Set partitions into blocks of size >= 2; within a block the maximal letter
/// comes first followed by every permutation of the rest; blocks are multiplied
/// in ascending order of their maxima. On n letters the count is the
/// derangement number D_n.
pub fn proper_basis_on(letters: &[u32]) -> Vec<NcPoly> {
    let mut out = Vec::new();
    for_each_basis_blocks(letters, &mut |blocks: &[Vec<u32>]| {
        out.push(basis_element(blocks));
    });
    out
}

/// Walks the basis as ordered block lists (ascending maxima) without
/// expanding any bracket.
pub(crate) fn for_each_basis_blocks<F: FnMut(&[Vec<u32>])>(letters: &[u32], f: &mut F) {
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    partition_rec(letters, &mut blocks, f);
}

fn partition_rec<F: FnMut(&[Vec<u32>])>(rest: &[u32], blocks: &mut Vec<Vec<u32>>, f: &mut F) {
    if rest.is_empty() {
        if !blocks.is_empty() {
            emit_block_orders(blocks, 0, f);
        }
        return;
    }
    // the highest remaining letter anchors a new block; blocks are created in
    // descending order of maxima and multiplied back-to-front
    let max = rest[rest.len() - 1];
    let others = &rest[..rest.len() - 1];
    let k = others.len();
    for mask in 0u32..(1 << k) {
        if (mask.count_ones() as usize) < 1 {
            continue; // block needs size >= 2
        }
        let mut block = vec![max];
        let mut remaining = Vec::new();
        for (j, &l) in others.iter().enumerate() {
            if mask >> j & 1 == 1 {
                block.push(l);
            } else {
                remaining.push(l);
            }
        }
        blocks.push(block);
        partition_rec(&remaining, blocks, f);
        blocks.pop();
    }
}

/// Runs each block's tail through all permutations and emits the block lists.
fn emit_block_orders<F: FnMut(&[Vec<u32>])>(blocks: &[Vec<u32>], at: usize, f: &mut F) {
    if at == blocks.len() {
        // blocks were collected with descending maxima; order ascending
        let ordered: Vec<Vec<u32>> = blocks.iter().rev().cloned().collect();
        f(&ordered);
        return;
    }
    let head = blocks[at][0];
    let mut tail: Vec<u32> = blocks[at][1..].to_vec();
    tail.sort_unstable();
    loop {
        let mut with_order = blocks.to_vec();
        with_order[at] = std::iter::once(head).chain(tail.iter().copied()).collect();
        emit_block_orders(&with_order, at + 1, f);
        if !crate::tideal::words::next_arrangement(&mut tail) {
            break;
        }
    }
}

/// Deg-lex minimal word of a left-normed bracket on distinct letters.
///
/// The minimal word of [B, y] is the smaller of (min B)·y and y·(min B); on
/// equal lengths deg-lex is plain lex, so the recursion stays on letter lists.
pub(crate) fn bracket_min_word(entries: &[u32]) -> Vec<u32> {
    let mut m = vec![entries[0]];
    for &y in &entries[1..] {
        let mut a = m.clone();
        a.push(y);
        let mut b = Vec::with_capacity(m.len() + 1);
        b.push(y);
        b.extend_from_slice(&m);
        m = if a <= b { a } else { b };
    }
    m
}

/// Minimal words of the proper basis, without expanding a single bracket.
///
/// The minimal word of a product of homogeneous factors is the concatenation
/// of the factors' minimal words (words concatenate, lengths are fixed, and
/// that pair of factor words is unique, so its coefficient cannot cancel).
pub(crate) fn proper_min_words(letters: &[u32]) -> Vec<Word> {
    let mut out = Vec::new();
    for_each_basis_blocks(letters, &mut |blocks: &[Vec<u32>]| {
        let mut w = Vec::new();
        for b in blocks {
            w.extend(bracket_min_word(b));
        }
        out.push(Word(w));
    });
    out
}

/// Basis expansions echelonized by deg-lex leading word.
///
/// Basis elements whose leading words are already distinct pass through
/// untouched; the occasional collision (first at four letters, e.g. the
/// brackets [x4,x2,x1,x3] and [x4,x2,x3,x1] share the leading word x1x2x4x3)
/// is resolved by exact reduction against the earlier row. The result maps
/// each of the D_n staircase words to its reduced row and the combination of
/// original basis elements producing it.
pub(crate) fn reduced_basis_rows(
    letters: &[u32],
) -> BTreeMap<Word, (NcPoly, Vec<(usize, Scalar)>)> {
    let mut rows: BTreeMap<Word, (NcPoly, Vec<(usize, Scalar)>)> = BTreeMap::new();
    let mut id = 0usize;
    for_each_basis_blocks(letters, &mut |blocks| {
        let mut g = basis_element(blocks);
        let mut combo: Vec<(usize, Scalar)> = vec![(id, Scalar::one())];
        id += 1;
        loop {
            let (w, c) = match g.terms().next() {
                Some((w, c)) => (w.clone(), c.clone()),
                None => panic!("proper basis expansions must be linearly independent"),
            };
            let hit = rows.get(&w).cloned();
            match hit {
                Some((r, rcombo)) => {
                    let f = c / r.coeff(&w);
                    g = g.sub(&r.scale(&f));
                    crate::tideal::echelon::sub_scaled(&mut combo, &rcombo, &f);
                }
                None => {
                    rows.insert(w, (g, combo));
                    return;
                }
            }
        }
    });
    rows
}

/// Staircase rows plus the block lists of the underlying basis, for exact
/// presentations of proper polynomials.
pub(crate) struct PresentTable {
    pub rows: BTreeMap<Word, (NcPoly, Vec<(usize, Scalar)>)>,
    pub blocks: Vec<Vec<Vec<u32>>>,
}

impl PresentTable {
    pub fn new(letters: &[u32]) -> Self {
        let rows = reduced_basis_rows(letters);
        let mut blocks = Vec::new();
        for_each_basis_blocks(letters, &mut |b| blocks.push(b.to_vec()));
        PresentTable { rows, blocks }
    }
}

/// Coordinates on the proper subspace of a letter set.
///
/// Columns are the D_n staircase words of the reduced basis rows. A nonzero
/// proper polynomial has a nonzero coefficient on its own leading word, which
/// is a staircase word, so restriction to these columns is injective. Each
/// row keeps a certificate (leading numerator times the lcm of its
/// denominators); a prime dividing no certificate leaves the staircase
/// triangular mod p, so the restriction stays injective there too.
pub struct ProperCoords {
    letters: Vec<u32>,
    pivots: Vec<Word>,
    index: HashMap<Word, u32>,
    certs: Vec<BigInt>,
}

impl ProperCoords {
    pub fn new(letters: &[u32]) -> Self {
        let rows = reduced_basis_rows(letters);
        let mut pivots = Vec::with_capacity(rows.len());
        let mut certs = Vec::with_capacity(rows.len());
        for (w, (r, _)) in &rows {
            let lead = r.coeff(w);
            let mut den = BigInt::one();
            for (_, c) in r.terms() {
                den = den.lcm(c.denom());
            }
            pivots.push(w.clone());
            certs.push(lead.numer().abs() * den);
        }
        assert_eq!(
            pivots.len() as u64,
            proper_dim(letters.len()),
            "staircase must exhaust the proper subspace"
        );
        let index: HashMap<Word, u32> = pivots
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        ProperCoords {
            letters: letters.to_vec(),
            pivots,
            index,
            certs,
        }
    }

    /// True when every staircase certificate is a unit mod p.
    pub(crate) fn injective_mod(&self, p: u64) -> bool {
        let bp = BigInt::from(p);
        self.certs.iter().all(|c| !c.mod_floor(&bp).is_zero())
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    /// Dense coordinates of a proper polynomial, mapped through `to_fp`.
    ///
    /// Words outside the column set are dropped; this is injective for proper
    /// inputs (and only used for those).
    pub fn coords_mod<F: Fn(&Scalar) -> u64>(&self, p: &NcPoly, to_fp: F) -> Vec<u64> {
        let mut v = vec![0u64; self.pivots.len()];
        for (w, c) in p.terms() {
            if let Some(&i) = self.index.get(w) {
                v[i as usize] = to_fp(c);
            }
        }
        v
    }

    /// Sparse exact coordinates (column, coefficient), ascending by column.
    pub fn coords_exact(&self, p: &NcPoly) -> Vec<(u32, Scalar)> {
        let mut v = Vec::new();
        for (w, c) in p.terms() {
            if let Some(&i) = self.index.get(w) {
                v.push((i, c.clone()));
            }
        }
        v.sort_by_key(|&(i, _)| i);
        v
    }
}
