//! Exact certificates for two-factor bracket products of degree 7 and 8,
//! built by upgrading a low-degree certificate through a substitution.
//!
//! The lower central series L_1, L_2, ... of K<X> as a Lie algebra satisfies
//! [L_a, L_b] <= L_{a+b}, so a left-normed bracket whose entries lie in
//! L_{d_1}, ..., L_{d_r} lies in L_{d_1 + ... + d_r}. Consider a row
//! m . [c_1, ..., c_r] on letters z_1..z_n, where m is a word and every c_i
//! is either a word or a bracket of letters, and a substitution phi sending
//! some letters to left-normed brackets. Each entry contributes a Lie weight
//! to the image: a bracket entry contributes the summed weight of its
//! letters, a word entry only 1 (a product of images is merely an algebra
//! element), and prefix letters contribute nothing. The row itself lies in
//! I_4 whenever the unsubstituted weights sum to at least 4, and its image
//! lies in K<X> . L_q = I_q whenever the substituted weights sum to q.
//!
//! To certify [x_1..x_{p_1}] . [x_{p_1+1}..x_{p_1+p_2}] in I_q, pick a base
//! product [z_1..z_{a_1}] . [z_{a_1+1}..z_{a_1+a_2}] with a_i <= p_i and
//! send the leading letter of each factor to a left-normed bracket of length
//! p_i - a_i + 1; prepending letters to a left-normed bracket nests on the
//! left, so the base product maps exactly onto the target. A base
//! certificate drawn only from rows of image weight >= q upgrades termwise.
//! The exact solve runs over the multilinear component on a_1 + a_2 letters;
//! a fixed-prime screen picks candidate pivot rows first so that only a
//! small subset needs rational elimination, and the upgraded combination is
//! re-expanded and compared with the target, so the returned certificate is
//! exact and self-contained regardless of the screen.

use super::echelon::{ExactEchelon, ModpEchelon};
use super::field::Modp;
use super::words::{next_arrangement, ComponentSpace};
use super::{scalar_mod, Certificate, TidealError};
use crate::freealg::{left_normed, left_normed_vars, substitute, word_poly, NcPoly, Scalar};
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Fixed screening prime (Mersenne, fits the modular echelon's u64 range).
const SCREEN_PRIME: u64 = (1 << 61) - 1;

/// One bracket argument of a row: a word (weight 1) or a left-normed bracket
/// of letters in the given order (weight = summed letter weights).
#[derive(Clone, PartialEq)]
enum Entry {
    Word(Vec<u32>),
    Bracket(Vec<u32>),
}

impl Entry {
    fn weight(&self, w: &[usize]) -> usize {
        match self {
            Entry::Word(ws) if ws.len() == 1 => w[(ws[0] - 1) as usize],
            Entry::Word(_) => 1,
            Entry::Bracket(b) => b.iter().map(|&l| w[(l - 1) as usize]).sum(),
        }
    }

    fn poly(&self) -> NcPoly {
        match self {
            Entry::Word(ws) => word_poly(ws),
            Entry::Bracket(b) => left_normed_vars(b),
        }
    }

    fn key(&self) -> (u8, &[u32]) {
        match self {
            Entry::Word(ws) => (0, ws),
            Entry::Bracket(b) => (1, b),
        }
    }
}

/// A structured row: prefix word times one left-normed bracket of entries.
struct BaseRow {
    prefix: Vec<u32>,
    entries: Vec<Entry>,
}

impl BaseRow {
    fn expand(&self) -> NcPoly {
        let args: Vec<NcPoly> = self.entries.iter().map(Entry::poly).collect();
        let bracket = if args.len() == 1 {
            args.into_iter().next().unwrap()
        } else {
            left_normed(&args)
        };
        if self.prefix.is_empty() {
            bracket
        } else {
            word_poly(&self.prefix).mul(&bracket)
        }
    }

    /// Summed entry weights; with all-ones weights this bounds the Lie depth
    /// of the row itself, with upgraded weights the depth of its image.
    fn weight(&self, w: &[usize]) -> usize {
        self.entries.iter().map(|e| e.weight(w)).sum()
    }

    /// Sign-twin filter: a left-normed bracket is antisymmetric in its first
    /// two arguments, and so is each bracket entry, so half the enumerated
    /// rows are redundant up to sign.
    fn canonical(&self) -> bool {
        if self.entries.len() >= 2 && self.entries[0].key() > self.entries[1].key() {
            return false;
        }
        self.entries.iter().all(|e| match e {
            Entry::Bracket(b) => b[0] < b[1],
            Entry::Word(_) => true,
        })
    }
}

/// All structured rows on z_1..z_n that lie in I_4 by weight: every way of
/// cutting an arrangement into a prefix and bracket arguments, each argument
/// segment read as a word or as a bracket, with plain weight at least 4.
fn enumerate_rows(n: u32) -> Vec<BaseRow> {
    let plain = vec![1usize; n as usize];
    let mut out = Vec::new();
    let mut seq: Vec<u32> = (1..=n).collect();
    loop {
        // split off a prefix word, then cut the rest into bracket arguments
        for k in 0..seq.len() {
            let prefix: Vec<u32> = seq[..k].to_vec();
            let rest = &seq[k..];
            for cuts in 0u32..(1 << (rest.len() - 1)) {
                let mut segments: Vec<Vec<u32>> = vec![Vec::new()];
                for (i, &l) in rest.iter().enumerate() {
                    if i > 0 && cuts & (1 << (i - 1)) != 0 {
                        segments.push(Vec::new());
                    }
                    segments.last_mut().unwrap().push(l);
                }
                // each multi-letter argument is either a word or a bracket
                let multi: Vec<usize> = segments
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.len() > 1)
                    .map(|(i, _)| i)
                    .collect();
                for shape in 0u32..(1 << multi.len()) {
                    let entries: Vec<Entry> = segments
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let bit = multi.iter().position(|&m| m == i);
                            match bit {
                                Some(b) if shape & (1 << b) != 0 => Entry::Bracket(s.clone()),
                                _ => Entry::Word(s.clone()),
                            }
                        })
                        .collect();
                    if entries.len() == 1 && !matches!(entries[0], Entry::Bracket(_)) {
                        continue;
                    }
                    let row = BaseRow {
                        prefix: prefix.clone(),
                        entries,
                    };
                    if row.weight(&plain) >= 4 && row.canonical() {
                        out.push(row);
                    }
                }
            }
        }
        if !next_arrangement(&mut seq) {
            break;
        }
    }
    out
}

/// Rows on n letters together with their expansions, sorted narrow first so
/// the eliminations keep sparse pivots; computed once per letter count.
fn rows_with_polys(n: u32) -> &'static [(BaseRow, NcPoly)] {
    static ROWS5: OnceLock<Vec<(BaseRow, NcPoly)>> = OnceLock::new();
    static ROWS6: OnceLock<Vec<(BaseRow, NcPoly)>> = OnceLock::new();
    let cell = match n {
        5 => &ROWS5,
        6 => &ROWS6,
        _ => unreachable!("base products use 5 or 6 letters"),
    };
    cell.get_or_init(|| {
        let mut rows: Vec<(BaseRow, NcPoly)> = enumerate_rows(n)
            .into_iter()
            .map(|r| {
                let p = r.expand();
                (r, p)
            })
            .filter(|(_, p)| !p.is_zero())
            .collect();
        rows.sort_by_key(|(_, p)| p.num_terms());
        rows
    })
}

/// Bracket of length len starting at letter `start` (a bare variable for
/// length 1).
fn bracket_from(start: u32, len: usize) -> NcPoly {
    if len == 1 {
        NcPoly::var(start)
    } else {
        let letters: Vec<u32> = (start..start + len as u32).collect();
        left_normed_vars(&letters)
    }
}

/// Product of the two left-normed brackets [x_s..x_{s+l1-1}][x_{s+l1}..].
fn bracket_product(start: u32, l1: usize, l2: usize) -> NcPoly {
    let left: Vec<u32> = (start..start + l1 as u32).collect();
    let right: Vec<u32> = (start + l1 as u32..start + (l1 + l2) as u32).collect();
    left_normed_vars(&left).mul(&left_normed_vars(&right))
}

/// Attempt one base split: solve the base product against weight-filtered
/// rows and upgrade the combination through the factor substitution.
fn try_split(p1: usize, p2: usize, q: usize, a1: usize, a2: usize) -> Option<Certificate> {
    let n = a1 + a2;
    let w1 = p1 - a1 + 1;
    let w2 = p2 - a2 + 1;
    let mut weights = vec![1usize; n];
    weights[0] = w1;
    weights[a1] = w2;
    let content: BTreeMap<u32, u32> = (1..=n as u32).map(|v| (v, 1)).collect();
    let space = ComponentSpace::new(&content);
    let kept: Vec<&(BaseRow, NcPoly)> = rows_with_polys(n as u32)
        .iter()
        .filter(|(row, _)| row.weight(&weights) >= q)
        .collect();
    let base = bracket_product(1, a1, a2);

    // fixed-prime screen: walk the rows once mod p, recording which become
    // pivots, and probe the query every chunk so the walk stops as soon as
    // the accumulated pivots support the base
    let fp = Modp::new(SCREEN_PRIME);
    let mut screen = ModpEchelon::new(SCREEN_PRIME, space.dim());
    let mut pivot_pos: Vec<usize> = Vec::new();
    let base_mod = space.coords_mod(&base, |s| scalar_mod(&fp, s));
    let mut supported = false;
    for (pos, (_, poly)) in kept.iter().enumerate() {
        if screen
            .offer(space.coords_mod(poly, |s| scalar_mod(&fp, s)))
            .is_some()
        {
            pivot_pos.push(pos);
        }
        if (pos + 1) % 512 == 0 || pos + 1 == kept.len() {
            let mut probe = base_mod.clone();
            screen.reduce(&mut probe);
            if probe.iter().all(|&c| c == 0) {
                supported = true;
                break;
            }
        }
    }
    if !supported {
        return None;
    }

    // exact elimination over the screened pivot subset; the screen merely
    // selects candidates, membership rests on the rational solve
    let mut ech = ExactEchelon::new(space.dim());
    let mut chosen: Vec<usize> = Vec::new();
    for &pos in &pivot_pos {
        let id = chosen.len();
        if ech.offer(space.coords_exact(&kept[pos].1), id).is_some() {
            chosen.push(pos);
        }
    }
    let (residual, cert) = {
        let (r, c) = ech.reduce_query(space.coords_exact(&base));
        if r.is_empty() {
            (r, c)
        } else {
            // screen and exact ranks disagreed; fall back to the full sweep
            for (pos, (_, poly)) in kept.iter().enumerate() {
                if pivot_pos.binary_search(&pos).is_ok() {
                    continue;
                }
                let id = chosen.len();
                if ech.offer(space.coords_exact(poly), id).is_some() {
                    chosen.push(pos);
                }
            }
            ech.reduce_query(space.coords_exact(&base))
        }
    };
    if !residual.is_empty() {
        return None;
    }

    // upgrade: the leading letter of each base factor becomes a bracket and
    // the remaining target letters take over the plain slots
    let mut phi: BTreeMap<u32, NcPoly> = BTreeMap::new();
    phi.insert(1, bracket_from(1, w1));
    for j in 2..=a1 as u32 {
        phi.insert(j, NcPoly::var(w1 as u32 + j - 1));
    }
    phi.insert(a1 as u32 + 1, bracket_from(p1 as u32 + 1, w2));
    for j in 2..=a2 as u32 {
        phi.insert(a1 as u32 + j, NcPoly::var((p1 + w2) as u32 + j - 1));
    }
    let parts: Vec<(NcPoly, Scalar)> = cert
        .into_iter()
        .map(|(id, c)| (substitute(&kept[chosen[id]].1, &phi), c))
        .collect();
    let cert = Certificate { parts };
    assert!(
        cert.expand() == bracket_product(1, p1, p2),
        "upgraded combination must re-expand to the product"
    );
    Some(cert)
}

/// Exact certificate for [x_1..x_{p_1}] . [x_{p_1+1}..x_{p_1+p_2}] in I_q,
/// searched over base products of total degree 5 and 6.
pub(crate) fn upgraded_product_certificate(
    p1: usize,
    p2: usize,
    q: usize,
) -> Result<Certificate, TidealError> {
    for (a1, a2) in [(2, 3), (3, 2), (2, 4), (3, 3), (4, 2)] {
        if a1 > p1 || a2 > p2 {
            continue;
        }
        if let Some(cert) = try_split(p1, p2, q, a1, a2) {
            return Ok(cert);
        }
    }
    Err(TidealError::CertificateSearch(format!(
        "no weight-filtered certificate for a length-{p1} times length-{p2} bracket product in I{q}"
    )))
}

#[cfg(test)]
mod diag {
    use super::*;

    #[test]
    fn five_letter_family_spans_the_proper_multilinear_ideal_component() {
        let rows = rows_with_polys(5);
        let content: BTreeMap<u32, u32> = (1..=5u32).map(|v| (v, 1)).collect();
        let space = ComponentSpace::new(&content);
        let mut ech = ExactEchelon::new(space.dim());
        for (i, (_, poly)) in rows.iter().enumerate() {
            ech.offer(space.coords_exact(poly), i);
        }
        assert_eq!(ech.rank(), 74);
        let (res, _) = ech.reduce_query(space.coords_exact(&bracket_product(1, 2, 3)));
        assert!(res.is_empty());
    }
}
