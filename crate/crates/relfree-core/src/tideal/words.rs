//! Indexed word lists for fixed multidegree components.

use crate::freealg::{NcPoly, Word};
use std::collections::{BTreeMap, HashMap};

/// Next lexicographic arrangement of a letter multiset; false once exhausted.
pub fn next_arrangement(a: &mut [u32]) -> bool {
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

/// All distinct arrangements of a letter multiset, in lexicographic order.
pub fn arrangements(letters: &[u32]) -> Vec<Vec<u32>> {
    let mut cur: Vec<u32> = letters.to_vec();
    cur.sort_unstable();
    let mut out = Vec::new();
    loop {
        out.push(cur.clone());
        if !next_arrangement(&mut cur) {
            break;
        }
    }
    out
}

/// All words of one multidegree component, indexed for coordinate vectors.
pub struct ComponentSpace {
    letters: Vec<u32>,
    words: Vec<Word>,
    index: HashMap<Word, u32>,
}

impl ComponentSpace {
    /// Component of the multidegree `content` (variable -> multiplicity).
    pub fn new(content: &BTreeMap<u32, u32>) -> Self {
        let mut letters = Vec::new();
        for (&v, &d) in content {
            for _ in 0..d {
                letters.push(v);
            }
        }
        let words: Vec<Word> = arrangements(&letters).into_iter().map(Word).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        ComponentSpace {
            letters,
            words,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn word_index(&self, w: &Word) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    /// Dense coordinate vector of a polynomial supported on this component,
    /// mapped through `to_fp`. Panics if a term lies outside the component.
    pub fn coords_mod<F: Fn(&crate::freealg::Scalar) -> u64>(
        &self,
        p: &NcPoly,
        to_fp: F,
    ) -> Vec<u64> {
        let mut v = vec![0u64; self.words.len()];
        for (w, c) in p.terms() {
            let i = self.word_index(w).expect("term outside component space") as usize;
            v[i] = to_fp(c);
        }
        v
    }

    /// Sparse exact coordinates, ascending by word index.
    pub fn coords_exact(&self, p: &NcPoly) -> Vec<(u32, crate::freealg::Scalar)> {
        let mut v: Vec<(u32, crate::freealg::Scalar)> = p
            .terms()
            .map(|(w, c)| {
                let i = self.word_index(w).expect("term outside component space");
                (i, c.clone())
            })
            .collect();
        v.sort_by_key(|&(i, _)| i);
        v
    }
}
