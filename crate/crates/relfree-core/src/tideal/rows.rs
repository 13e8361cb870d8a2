//! Spanning rows for T-ideal components.
//!
//! Two recipes are used. The flanked recipe substitutes monomial blocks into a
//! multilinearized generator and adds flanking monomials on both sides; it
//! works for any generator set and is the documented spanning-set operation.
//! For the bracket ideals I_p there is a leaner complete family: I_p is the
//! left module K<X> . L_p (right multiples absorb via l.g = g.l + [l,g]), and
//! every element of L_p in a fixed multidegree is spanned by left-normed
//! brackets [w1, ..., wp, y1, ..., yk] with word entries w_i and single-letter
//! extensions y_j (an extension by a word shrinks via the Leibniz identity
//! [B, ux] = u[B,x] + x[B,u] + [B,u,x]). So the products
//! m . [w1, ..., wp, y1, ..., yk] over ordered set partitions of the letters
//! span the component of I_p.

use crate::freealg::{left_normed, substitute, word_poly, NcPoly};
use crate::tideal::words::next_arrangement;
use std::collections::BTreeMap;
use std::ops::ControlFlow;

/// One way of cutting an arranged letter sequence into row pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub prefix: usize,
    pub blocks: Vec<usize>,
    pub exts: usize,
}

/// All cuts for ideal rows of I_p on n letters, narrowest rows first.
///
/// Rows with more single-letter extensions have smaller bracket entries, so
/// pure brackets come first in the stream.
pub fn ip_cuts(p: usize, n: usize) -> Vec<Cut> {
    let mut out = Vec::new();
    if n < p {
        return out;
    }
    for exts in (0..=n - p).rev() {
        for prefix in 0..=n - p - exts {
            let rest = n - prefix - exts;
            let mut blocks = vec![1usize; p];
            blocks[p - 1] = rest - (p - 1);
            loop {
                out.push(Cut {
                    prefix,
                    blocks: blocks.clone(),
                    exts,
                });
                if !next_composition(&mut blocks) {
                    break;
                }
            }
        }
    }
    out
}

/// Next composition with fixed part count and sum, parts >= 1; lexicographic.
fn next_composition(parts: &mut [usize]) -> bool {
    let k = parts.len();
    if k < 2 {
        return false;
    }
    // rightmost part above 1 feeds the increment one position to its left
    let mut i = k - 1;
    while i > 0 {
        if parts[i] > 1 {
            break;
        }
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let tail_sum: usize = parts[i..].iter().sum();
    parts[i - 1] += 1;
    for part in parts[i..k - 1].iter_mut() {
        *part = 1;
    }
    parts[k - 1] = tail_sum - 1 - (k - 1 - i);
    true
}

/// Builds one ideal row m . [w1, ..., wp, y1, ..., yk] from an arrangement.
fn build_ip_row(seq: &[u32], cut: &Cut) -> NcPoly {
    let mut at = cut.prefix;
    let mut args: Vec<NcPoly> = Vec::with_capacity(cut.blocks.len() + cut.exts);
    for &b in &cut.blocks {
        args.push(word_poly(&seq[at..at + b]));
        at += b;
    }
    for _ in 0..cut.exts {
        args.push(NcPoly::var(seq[at]));
        at += 1;
    }
    let bracket = left_normed(&args);
    if cut.prefix == 0 {
        bracket
    } else {
        word_poly(&seq[..cut.prefix]).mul(&bracket)
    }
}

/// Streams the ideal rows of I_p on a letter multiset, skipping the first
/// `skip` rows (already consumed by a resumed echelon). The first two bracket
/// entries are antisymmetric, so only arrangements with entry one strictly
/// below entry two in deg-lex order are emitted. Returns the number of rows
/// visited, including skipped ones.
pub fn for_each_ip_row<F: FnMut(NcPoly) -> ControlFlow<()>>(
    p: usize,
    letters: &[u32],
    skip: usize,
    mut f: F,
) -> usize {
    debug_assert!(p >= 2);
    let n = letters.len();
    let cuts = ip_cuts(p, n);
    let mut seen = 0usize;
    for cut in &cuts {
        let mut seq: Vec<u32> = letters.to_vec();
        seq.sort_unstable();
        loop {
            let w1 = &seq[cut.prefix..cut.prefix + cut.blocks[0]];
            let w2 = &seq[cut.prefix + cut.blocks[0]..cut.prefix + cut.blocks[0] + cut.blocks[1]];
            let keep = cut.blocks[0].cmp(&cut.blocks[1]).then_with(|| w1.cmp(w2))
                == std::cmp::Ordering::Less;
            if keep {
                seen += 1;
                if seen > skip && f(build_ip_row(&seq, cut)).is_break() {
                    return seen;
                }
            }
            if !next_arrangement(&mut seq) {
                break;
            }
        }
    }
    seen
}

/// Streams the flanked spanning rows m_L . g(w1,...,wd) . m_R for one
/// multilinearized generator over a letter multiset.
pub fn for_each_flanked_row<F: FnMut(NcPoly) -> ControlFlow<()>>(
    g: &NcPoly,
    letters: &[u32],
    skip: usize,
    mut f: F,
) -> usize {
    debug_assert!(g.is_multilinear());
    let d = g.variables().len();
    debug_assert_eq!(
        g.variables(),
        (1..=d as u32).collect::<std::collections::BTreeSet<_>>(),
        "generator must be multilinear on x1..xd"
    );
    let n = letters.len();
    let mut seen = 0usize;
    if n < d {
        return seen;
    }
    for cut in flanked_cuts(d, n) {
        let mut seq: Vec<u32> = letters.to_vec();
        seq.sort_unstable();
        loop {
            seen += 1;
            if seen > skip && f(build_flanked_row(g, &seq, &cut)).is_break() {
                return seen;
            }
            if !next_arrangement(&mut seq) {
                break;
            }
        }
    }
    seen
}

/// Cuts (left flank, d blocks, right flank); single-letter blocks first.
fn flanked_cuts(d: usize, n: usize) -> Vec<(usize, Vec<usize>, usize)> {
    let mut out = Vec::new();
    let spare = n - d;
    for excess in 0..=spare {
        let flanks = spare - excess;
        for left in 0..=flanks {
            let right = flanks - left;
            let mut blocks = vec![1usize; d];
            blocks[d - 1] = 1 + excess;
            loop {
                out.push((left, blocks.clone(), right));
                if !next_composition(&mut blocks) {
                    break;
                }
            }
        }
    }
    out
}

fn build_flanked_row(g: &NcPoly, seq: &[u32], cut: &(usize, Vec<usize>, usize)) -> NcPoly {
    let (left, blocks, right) = cut;
    let mut at = *left;
    let mut map: BTreeMap<u32, NcPoly> = BTreeMap::new();
    for (i, &b) in blocks.iter().enumerate() {
        map.insert(i as u32 + 1, word_poly(&seq[at..at + b]));
        at += b;
    }
    let mut row = substitute(g, &map);
    if *left > 0 {
        row = word_poly(&seq[..*left]).mul(&row);
    }
    if *right > 0 {
        row = row.mul(&word_poly(&seq[seq.len() - right..]));
    }
    row
}

/// Reduction of f against the left-normed Lie basis [x_m, tau(1), ..., tau(n-1)]
/// on f's letters, m the maximal letter.
///
/// Each basis element has exactly one word starting with x_m, namely
/// x_m tau(1) ... tau(n-1) with coefficient 1, so matching coefficients on
/// x_m-first words gives the only possible combination; f lies in the
/// multilinear Lie component iff the residual is zero.
pub fn lie_reduce(f: &NcPoly) -> (Vec<(Vec<u32>, crate::freealg::Scalar)>, NcPoly) {
    debug_assert!(f.is_multilinear());
    let letters: Vec<u32> = f.variables().into_iter().collect();
    if letters.len() < 2 {
        return (Vec::new(), f.clone());
    }
    let top = *letters.last().unwrap();
    let mut combo = Vec::new();
    let mut residual = f.clone();
    for (w, c) in f.terms() {
        if w.0.first() == Some(&top) {
            let basis = crate::freealg::left_normed_vars(&w.0);
            residual = residual.sub(&basis.scale(c));
            combo.push((w.0.clone(), c.clone()));
        }
    }
    (combo, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::left_normed_vars;

    #[test]
    fn compositions_enumerate_once() {
        let mut parts = vec![1usize, 1, 3];
        let mut seen = vec![parts.clone()];
        while next_composition(&mut parts) {
            seen.push(parts.clone());
        }
        // compositions of 5 into 3 parts: C(4,2) = 6
        assert_eq!(seen.len(), 6);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
        for s in &seen {
            assert_eq!(s.iter().sum::<usize>(), 5);
            assert!(s.iter().all(|&x| x >= 1));
        }
    }

    #[test]
    fn ip_cut_count_matches_hand_count() {
        // degree 8, p = 7: the one spare letter is a prefix, an extension, or
        // an excess in one of seven blocks: 9 cuts
        assert_eq!(ip_cuts(7, 8).len(), 9);
        // degree 7, p = 5: two spares over prefix/extensions/five blocks
        assert_eq!(ip_cuts(5, 7).len(), 28);
    }

    #[test]
    fn pure_bracket_rows_come_first() {
        let cuts = ip_cuts(3, 5);
        assert_eq!(
            cuts[0],
            Cut {
                prefix: 0,
                blocks: vec![1, 1, 1],
                exts: 2
            }
        );
    }

    #[test]
    fn ip_rows_are_multilinear_on_the_letter_set() {
        let mut count = 0;
        for_each_ip_row(3, &[1, 2, 3, 4], 0, |row| {
            assert!(row.is_multilinear());
            assert_eq!(row.variables(), (1..=4).collect());
            count += 1;
            ControlFlow::Continue(())
        });
        assert!(count > 0);
    }

    #[test]
    fn lie_reduce_accepts_brackets_and_rejects_products() {
        let b = left_normed_vars(&[2, 3, 1, 4]);
        let (_, r) = lie_reduce(&b);
        assert!(r.is_zero(), "left-normed bracket is a Lie element");

        let nested =
            crate::freealg::commutator(&left_normed_vars(&[1, 2]), &left_normed_vars(&[3, 4]));
        let (_, r) = lie_reduce(&nested);
        assert!(r.is_zero(), "bracket of brackets is a Lie element");

        let prod = left_normed_vars(&[1, 2]).mul(&left_normed_vars(&[3, 4]));
        let (_, r) = lie_reduce(&prod);
        assert!(!r.is_zero(), "product of brackets is not a Lie element");
    }
}
