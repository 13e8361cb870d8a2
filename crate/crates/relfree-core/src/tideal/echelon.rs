//! Incremental row echelonization over Q and over prime fields.
//!
//! Both variants keep rows forward-reduced (zeros before the pivot, unit
//! pivot) and reduce vectors in a single ascending column sweep, so a residual
//! kept reduced against the current echelon stays reduced as rows are added.

use crate::freealg::Scalar;
use crate::tideal::field::Modp;
use num::{One, Zero};

/// Dense echelon over F_p; rows store only the suffix from their pivot column.
pub struct ModpEchelon {
    pub m: Modp,
    width: usize,
    pivot_row_of_col: Vec<u32>,
    rows: Vec<Vec<u64>>,
    pivcols: Vec<usize>,
}

const NO_ROW: u32 = u32::MAX;

impl ModpEchelon {
    pub fn new(p: u64, width: usize) -> Self {
        ModpEchelon {
            m: Modp::new(p),
            width,
            pivot_row_of_col: vec![NO_ROW; width],
            rows: Vec::new(),
            pivcols: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pivot column and stored suffix of a row (unit pivot at offset 0).
    pub fn row(&self, r: usize) -> (usize, &[u64]) {
        (self.pivcols[r], &self.rows[r])
    }

    /// Reduces v in place; afterwards v is zero on every pivot column.
    pub fn reduce(&self, v: &mut [u64]) {
        debug_assert_eq!(v.len(), self.width);
        for j in 0..self.width {
            if v[j] == 0 {
                continue;
            }
            let r = self.pivot_row_of_col[j];
            if r == NO_ROW {
                continue;
            }
            let c = v[j];
            let row = &self.rows[r as usize];
            for (t, &e) in row.iter().enumerate() {
                if e != 0 {
                    v[j + t] = self.m.sub(v[j + t], self.m.mul(c, e));
                }
            }
            debug_assert_eq!(v[j], 0);
        }
    }

    /// Reduces and inserts if independent; returns the new pivot column.
    pub fn offer(&mut self, mut v: Vec<u64>) -> Option<usize> {
        self.reduce(&mut v);
        let j = v.iter().position(|&e| e != 0)?;
        let inv = self.m.inv(v[j]);
        let mut suffix: Vec<u64> = v[j..].to_vec();
        for e in suffix.iter_mut() {
            *e = self.m.mul(*e, inv);
        }
        self.pivot_row_of_col[j] = self.rows.len() as u32;
        self.rows.push(suffix);
        self.pivcols.push(j);
        Some(j)
    }
}

/// Sparse row: (column, coefficient) sorted by column, coefficients nonzero.
pub type SparseRow = Vec<(u32, Scalar)>;

/// dst -= factor * src for sorted sparse vectors with arbitrary key type.
pub(crate) fn sub_scaled<K: Ord + Copy>(
    dst: &mut Vec<(K, Scalar)>,
    src: &[(K, Scalar)],
    factor: &Scalar,
) {
    let mut out: Vec<(K, Scalar)> = Vec::with_capacity(dst.len() + src.len());
    let (mut a, mut b) = (0usize, 0usize);
    while a < dst.len() || b < src.len() {
        let take_dst = match (dst.get(a), src.get(b)) {
            (Some(&(ka, _)), Some(&(kb, _))) => {
                if ka == kb {
                    let c = &dst[a].1 - factor * &src[b].1;
                    if !c.is_zero() {
                        out.push((ka, c));
                    }
                    a += 1;
                    b += 1;
                    continue;
                }
                ka < kb
            }
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_dst {
            out.push(dst[a].clone());
            a += 1;
        } else {
            let c = -(factor * &src[b].1);
            if !c.is_zero() {
                out.push((src[b].0, c));
            }
            b += 1;
        }
    }
    *dst = out;
}

/// Exact echelon with provenance: every stored row knows its expression as a
/// combination of the original rows it was built from.
pub struct ExactEchelon {
    width: usize,
    pivot_row_of_col: Vec<u32>,
    rows: Vec<SparseRow>,
    combos: Vec<Vec<(usize, Scalar)>>,
    pivcols: Vec<usize>,
}

impl ExactEchelon {
    pub fn new(width: usize) -> Self {
        ExactEchelon {
            width,
            pivot_row_of_col: vec![NO_ROW; width],
            rows: Vec::new(),
            combos: Vec::new(),
            pivcols: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, r: usize) -> &SparseRow {
        &self.rows[r]
    }

    /// Expression of stored row r as a combination of original offered rows.
    pub fn combo(&self, r: usize) -> &[(usize, Scalar)] {
        &self.combos[r]
    }

    /// Reduces v in place, applying the same elimination steps to `combo`,
    /// so "v = sum combo_i . orig_row_i" is preserved whenever it holds on
    /// entry.
    pub fn reduce(&self, v: &mut SparseRow, combo: &mut Vec<(usize, Scalar)>) {
        let mut idx = 0;
        while idx < v.len() {
            let (j, c) = v[idx].clone();
            let r = self.pivot_row_of_col[j as usize];
            if r == NO_ROW {
                idx += 1;
                continue;
            }
            let r = r as usize;
            sub_scaled(v, &self.rows[r], &c);
            sub_scaled(combo, &self.combos[r], &c);
        }
    }

    /// Reduces a query vector; returns the residual and, when the residual is
    /// zero, the certificate combination with query = sum cert_i . orig_row_i.
    pub fn reduce_query(&self, mut v: SparseRow) -> (SparseRow, Vec<(usize, Scalar)>) {
        let mut combo = Vec::new();
        self.reduce(&mut v, &mut combo);
        // the invariant is query = v + sum (-combo_i) . orig_row_i
        let cert = combo.into_iter().map(|(i, c)| (i, -c)).collect();
        (v, cert)
    }

    /// Reduces and inserts if independent; `orig_id` names the offered row.
    pub fn offer(&mut self, mut v: SparseRow, orig_id: usize) -> Option<usize> {
        let mut combo = vec![(orig_id, Scalar::one())];
        self.reduce(&mut v, &mut combo);
        if v.is_empty() {
            return None;
        }
        let lead = v[0].1.clone();
        let j = v[0].0 as usize;
        for (_, c) in v.iter_mut() {
            *c = &*c / &lead;
        }
        for (_, c) in combo.iter_mut() {
            *c = &*c / &lead;
        }
        self.pivot_row_of_col[j] = self.rows.len() as u32;
        self.rows.push(v);
        self.combos.push(combo);
        self.pivcols.push(j);
        Some(j)
    }
}
