//! Membership and dimension computations for consequence ideals.
//!
//! For a set G of multilinear generators, the consequences of G in degree n
//! are spanned by flanked substitution instances m_L * g(w_1..w_d) * m_R where
//! the words w_i and the flanking monomials m_L, m_R partition the letters
//! x1..xn. Membership of a multilinear polynomial in that span is decided by
//! streaming those rows through an echelon form, one canonical proper
//! component at a time.

mod echelon;
mod engine;
mod field;
mod proper;
mod rows;
mod transport;
mod words;


pub use proper::{
    canonical_components, drop_letter, pi_proper, proper_basis_on, proper_dim,
    reassemble_components,
};
pub use rows::{for_each_flanked_row, for_each_ip_row};

use crate::freealg::{
    left_normed_vars, multidegree, multihomogeneous_components, multilinearize, rename_variables,
    word_poly, FreeAlgError, NcPoly, Scalar, Word,
};
use num::{BigInt, Integer, ToPrimitive};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::ControlFlow;
use std::rc::Rc;

/// Seed used when a caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;

/// Bit size of the random primes used in modular mode.
pub const PRIME_BITS: u32 = 60;

/// Largest multilinear degree accepted by the membership routines.
pub const MAX_LETTERS: usize = 8;

/// Largest component dimension the exact repeated-letter fallback will build.
const CONTENT_DIM_BOUND: usize = 40_000;

#[derive(thiserror::Error, Debug)]
pub enum TidealError {
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("variables must be exactly x1..x{expected} with no gaps")]
    VariablesNotContiguous { expected: usize },
    #[error("degree {0} out of supported range (max {1})")]
    DegreeOutOfRange(usize, usize),
    #[error("bracket length {0} out of supported range 2..=8")]
    BadBracketLength(usize),
    #[error("generator list is empty after normalization")]
    EmptyGenerators,
    #[error("generator set not supported here: {0}")]
    UnsupportedGenerators(String),
    #[error("component {0} has dimension {1}, above the exact fallback bound {2}")]
    ContentTooLarge(String, usize, usize),
    #[error("rewrite fact failed verification: {0}")]
    EngineFact(String),
    #[error("certificate search exhausted: {0}")]
    CertificateSearch(String),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
}

/// How a linear-algebra question is decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Primes { count: usize, seed: u64 },
}

/// Exact arithmetic through degree 6; two independent 60-bit primes beyond.
pub fn default_mode(degree: usize) -> Mode {
    if degree <= 6 {
        Mode::Exact
    } else {
        Mode::Primes {
            count: 2,
            seed: DEFAULT_SEED,
        }
    }
}

/// A normalized generator set: each component multilinear in x1..xd.
///
/// `bracket_ideal(p)` is the single left-normed bracket [x1,..,xp]; its
/// consequence ideal contains every bracket of length >= p and is closed
/// under substitution and two-sided multiplication.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    label: String,
    bracket_len: Option<usize>,
    components: Vec<NcPoly>,
    min_degree: usize,
}

impl GeneratorSet {
    pub fn bracket_ideal(p: usize) -> Result<Self, TidealError> {
        if !(2..=8).contains(&p) {
            return Err(TidealError::BadBracketLength(p));
        }
        let letters: Vec<u32> = (1..=p as u32).collect();
        Ok(GeneratorSet {
            label: format!("I{p}"),
            bracket_len: Some(p),
            components: vec![left_normed_vars(&letters)],
            min_degree: p,
        })
    }

    /// Splits into multihomogeneous parts, multilinearizes each, renames
    /// letters to x1..xd, and drops duplicates. Sound because a T-ideal is
    /// closed under substitution and, in characteristic zero, a polynomial
    /// and its multilinearization generate the same T-ideal.
    pub fn from_polynomials(label: &str, gens: &[NcPoly]) -> Result<Self, TidealError> {
        let mut components: Vec<NcPoly> = Vec::new();
        for g in gens {
            for h in multihomogeneous_components(g) {
                let lin = multilinearize(&h)?;
                let (mut canon, _) = canonicalize_letters(&lin);
                if canon.is_zero() {
                    continue;
                }
                let lead = canon.terms().next().expect("nonzero").1.clone();
                canon = canon.scale(&lead.recip());
                if !components.contains(&canon) {
                    components.push(canon);
                }
            }
        }
        if components.is_empty() {
            return Err(TidealError::EmptyGenerators);
        }
        let min_degree = components.iter().map(|c| c.degree()).min().unwrap();
        Ok(GeneratorSet {
            label: label.to_string(),
            bracket_len: None,
            components,
            min_degree,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Present when the set is the single bracket [x1,..,xp].
    pub fn bracket_length(&self) -> Option<usize> {
        self.bracket_len
    }

    pub fn components(&self) -> &[NcPoly] {
        &self.components
    }

    pub fn min_degree(&self) -> usize {
        self.min_degree
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Member,
    MemberModPrimes(Vec<u64>),
    NonMember,
}

/// Explicit combination: the query equals the sum of coeff * row over parts.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub parts: Vec<(NcPoly, Scalar)>,
}

impl Certificate {
    pub fn expand(&self) -> NcPoly {
        let mut acc = NcPoly::zero();
        for (p, c) in &self.parts {
            acc = acc.add(&p.scale(c));
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
}

/// Per-multidegree breakdown of a general membership query.
#[derive(Debug, Clone)]
pub struct GeneralReport {
    pub verdict: Verdict,
    pub components: Vec<(BTreeMap<u32, u32>, MembershipReport)>,
}

struct GammaExactState {
    ech: echelon::ExactEchelon,
    rows: Vec<NcPoly>,
    consumed: usize,
    done: bool,
}

struct GammaModpState {
    ech: echelon::ModpEchelon,
    consumed: usize,
    done: bool,
}

struct ContentExactState {
    space: words::ComponentSpace,
    ech: echelon::ExactEchelon,
    consumed: usize,
    done: bool,
}

/// Shared incremental state: echelon forms are grown row by row and resumed
/// across queries, so a suite of related questions pays for each span once.
pub struct TidealCache {
    coords: HashMap<usize, Rc<proper::ProperCoords>>,
    present: HashMap<usize, Rc<proper::PresentTable>>,
    gamma_exact: HashMap<(String, usize), GammaExactState>,
    gamma_modp: HashMap<(String, usize, u64), GammaModpState>,
    content_exact: HashMap<(String, Vec<u32>), ContentExactState>,
    primes_memo: HashMap<(usize, u64), Vec<u64>>,
    engine_facts_ok: HashSet<usize>,
    modp_ok: HashSet<(usize, u64)>,
}

impl TidealCache {
    pub fn new() -> Self {
        TidealCache {
            coords: HashMap::new(),
            present: HashMap::new(),
            gamma_exact: HashMap::new(),
            gamma_modp: HashMap::new(),
            content_exact: HashMap::new(),
            primes_memo: HashMap::new(),
            engine_facts_ok: HashSet::new(),
            modp_ok: HashSet::new(),
        }
    }

    fn proper_coords(&mut self, m: usize) -> Rc<proper::ProperCoords> {
        self.coords
            .entry(m)
            .or_insert_with(|| {
                let letters: Vec<u32> = (1..=m as u32).collect();
                Rc::new(proper::ProperCoords::new(&letters))
            })
            .clone()
    }

    fn present_table(&mut self, m: usize) -> Rc<proper::PresentTable> {
        self.present
            .entry(m)
            .or_insert_with(|| {
                let letters: Vec<u32> = (1..=m as u32).collect();
                Rc::new(proper::PresentTable::new(&letters))
            })
            .clone()
    }

    /// Coordinates for degree m, with the staircase verified to stay
    /// triangular mod the given prime.
    fn proper_coords_mod(&mut self, m: usize, prime: u64) -> Rc<proper::ProperCoords> {
        let coords = self.proper_coords(m);
        if self.modp_ok.insert((m, prime)) {
            assert!(
                coords.injective_mod(prime),
                "prime {prime} degenerates the proper staircase at degree {m}"
            );
        }
        coords
    }

    pub fn primes(&mut self, count: usize, seed: u64) -> Vec<u64> {
        self.primes_memo
            .entry((count, seed))
            .or_insert_with(|| field::random_primes(count, seed, PRIME_BITS))
            .clone()
    }
}

impl Default for TidealCache {
    fn default() -> Self {
        TidealCache::new()
    }
}

/// Reduces a rational into F_p. Panics if the denominator vanishes mod p;
/// denominators here are tiny (powers of small integers), far below 2^59.
fn scalar_mod(fp: &field::Modp, s: &Scalar) -> u64 {
    let p = BigInt::from(fp.p);
    let num = s.numer().mod_floor(&p).to_u64().expect("residue fits u64");
    let den = s.denom().mod_floor(&p).to_u64().expect("residue fits u64");
    assert!(den != 0, "denominator divisible by working prime");
    fp.mul(num, fp.inv(den))
}

fn contiguous_letters(f: &NcPoly) -> Result<usize, TidealError> {
    let vars = f.variables();
    let n = vars.len();
    for (i, &v) in vars.iter().enumerate() {
        if v != i as u32 + 1 {
            return Err(TidealError::VariablesNotContiguous { expected: n });
        }
    }
    Ok(n)
}

/// Renames the variables of f to x1..xd preserving order; returns the map
/// old -> new.
pub fn canonicalize_letters(f: &NcPoly) -> (NcPoly, BTreeMap<u32, u32>) {
    let map: BTreeMap<u32, u32> = f
        .variables()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32 + 1))
        .collect();
    (rename_variables(f, &map), map)
}

/// Streams the consequence rows of `gens` on the letter multiset, skipping
/// the first `skip` (for resuming), and returns how many were passed over in
/// total including skipped ones. For a bracket ideal the rows are the lean
/// form m * [w1..wp, y1..yk]: these span the same space as the flanked list
/// because a right flank m_R can be folded in by [B, m_R] rewriting, each
/// correction being a longer bracket instance, and longer brackets unfold to
/// single-letter extensions y by the Leibniz rule.
fn stream_rows<F: FnMut(NcPoly) -> ControlFlow<()>>(
    gens: &GeneratorSet,
    letters: &[u32],
    skip: usize,
    mut f: F,
) -> usize {
    if let Some(p) = gens.bracket_len {
        rows::for_each_ip_row(p, letters, skip, f)
    } else {
        let mut total = 0usize;
        let mut stop = false;
        for g in &gens.components {
            let local = skip.saturating_sub(total);
            total += rows::for_each_flanked_row(g, letters, local, |r| {
                let c = f(r);
                if c.is_break() {
                    stop = true;
                }
                c
            });
            if stop {
                break;
            }
        }
        total
    }
}

fn new_gamma_exact(dim: usize) -> GammaExactState {
    GammaExactState {
        ech: echelon::ExactEchelon::new(dim),
        rows: Vec::new(),
        consumed: 0,
        done: false,
    }
}

/// Decides gamma in span(pi(rows)) over the rationals; on success returns the
/// combination in terms of the projected rows (canonical letters x1..xm).
fn gamma_member_exact(
    gens: &GeneratorSet,
    m: usize,
    gamma: &NcPoly,
    cache: &mut TidealCache,
) -> (bool, Option<Vec<(NcPoly, Scalar)>>) {
    let coords = cache.proper_coords(m);
    let key = (gens.label.clone(), m);
    let mut st = cache
        .gamma_exact
        .remove(&key)
        .unwrap_or_else(|| new_gamma_exact(coords.dim()));
    let query = coords.coords_exact(gamma);
    let (mut residual, mut acc) = st.ech.reduce_query(query);
    if !residual.is_empty() && !st.done {
        let letters: Vec<u32> = (1..=m as u32).collect();
        let mut finished_early = false;
        let consumed = stream_rows(gens, &letters, st.consumed, |raw| {
            let pr = proper::pi_proper(&raw);
            if pr.is_zero() {
                return ControlFlow::Continue(());
            }
            let v = coords.coords_exact(&pr);
            let id = st.rows.len();
            if let Some(col) = st.ech.offer(v, id) {
                st.rows.push(pr);
                let r = st.ech.rank() - 1;
                // the residual never holds pivot columns, so one lookup at
                // the fresh pivot keeps it fully reduced
                if let Ok(pos) = residual.binary_search_by_key(&(col as u32), |e| e.0) {
                    let c = residual[pos].1.clone();
                    let row = st.ech.row(r).clone();
                    let combo = st.ech.combo(r).to_vec();
                    echelon::sub_scaled(&mut residual, &row, &c);
                    let neg = -c;
                    echelon::sub_scaled(&mut acc, &combo, &neg);
                }
            }
            if residual.is_empty() {
                finished_early = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        st.consumed = consumed;
        if !finished_early {
            st.done = true;
        }
    }
    let out = if residual.is_empty() {
        let parts = acc
            .iter()
            .map(|(id, c)| (st.rows[*id].clone(), c.clone()))
            .collect();
        (true, Some(parts))
    } else {
        (false, None)
    };
    cache.gamma_exact.insert(key, st);
    out
}

/// Same question reduced mod a single prime; no certificate.
fn gamma_member_modp(
    gens: &GeneratorSet,
    m: usize,
    gamma: &NcPoly,
    prime: u64,
    cache: &mut TidealCache,
) -> bool {
    let coords = cache.proper_coords_mod(m, prime);
    let key = (gens.label.clone(), m, prime);
    let mut st = cache
        .gamma_modp
        .remove(&key)
        .unwrap_or_else(|| GammaModpState {
            ech: echelon::ModpEchelon::new(prime, coords.dim()),
            consumed: 0,
            done: false,
        });
    let fp = field::Modp::new(prime);
    let mut v = coords.coords_mod(gamma, |s| scalar_mod(&fp, s));
    st.ech.reduce(&mut v);
    let mut nnz = v.iter().filter(|&&x| x != 0).count();
    if nnz > 0 && !st.done {
        let letters: Vec<u32> = (1..=m as u32).collect();
        let mut finished_early = false;
        let consumed = stream_rows(gens, &letters, st.consumed, |raw| {
            let pr = proper::pi_proper(&raw);
            if pr.is_zero() {
                return ControlFlow::Continue(());
            }
            let w = coords.coords_mod(&pr, |s| scalar_mod(&fp, s));
            if let Some(col) = st.ech.offer(w) {
                let c = v[col];
                if c != 0 {
                    let r = st.ech.rank() - 1;
                    let (piv, suffix) = st.ech.row(r);
                    debug_assert_eq!(piv, col);
                    for (t, &s) in suffix.iter().enumerate() {
                        if s == 0 {
                            continue;
                        }
                        let old = v[piv + t];
                        let new = fp.sub(old, fp.mul(c, s));
                        if old != 0 && new == 0 {
                            nnz -= 1;
                        }
                        if old == 0 && new != 0 {
                            nnz += 1;
                        }
                        v[piv + t] = new;
                    }
                }
            }
            if nnz == 0 {
                finished_early = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        st.consumed = consumed;
        if !finished_early {
            st.done = true;
        }
    }
    let member = nnz == 0;
    cache.gamma_modp.insert(key, st);
    member
}

/// Decides membership of a multilinear polynomial on x1..xn in the degree-n
/// span of the consequences of `gens`.
///
/// The query is split into canonical components f = sum over A of asc(A) *
/// gamma_A; the splitting commutes with the consequence span because the span
/// is closed under each substitution x_i -> 1 and under the projections U_i,
/// so f lies in the span iff every gamma_A lies in its projected span.
pub fn membership_multilinear(
    f: &NcPoly,
    gens: &GeneratorSet,
    mode: &Mode,
    cache: &mut TidealCache,
) -> Result<MembershipReport, TidealError> {
    if f.is_zero() {
        return Ok(MembershipReport {
            verdict: Verdict::Member,
            certificate: Some(Certificate { parts: Vec::new() }),
        });
    }
    if !f.is_multilinear() {
        return Err(TidealError::NotMultilinear);
    }
    let n = contiguous_letters(f)?;
    if n > MAX_LETTERS {
        return Err(TidealError::DegreeOutOfRange(n, MAX_LETTERS));
    }
    let comps = canonical_components(f);
    match mode {
        Mode::Exact => {
            let mut parts: Vec<(NcPoly, Scalar)> = Vec::new();
            for (a, gamma) in &comps {
                let support: Vec<u32> = gamma.variables().iter().copied().collect();
                let m = support.len();
                if m == 0 {
                    // a nonzero constant component: every generator vanishes
                    // under x_i -> 1 for all i, so consequences have none
                    return Ok(MembershipReport {
                        verdict: Verdict::NonMember,
                        certificate: None,
                    });
                }
                let to_canon: BTreeMap<u32, u32> = support
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, i as u32 + 1))
                    .collect();
                let from_canon: BTreeMap<u32, u32> = support
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (i as u32 + 1, v))
                    .collect();
                let gc = rename_variables(gamma, &to_canon);
                let (member, cert) = gamma_member_exact(gens, m, &gc, cache);
                if !member {
                    return Ok(MembershipReport {
                        verdict: Verdict::NonMember,
                        certificate: None,
                    });
                }
                let prefix = word_poly(a);
                for (row, c) in cert.expect("member verdict carries a combination") {
                    let back = rename_variables(&row, &from_canon);
                    parts.push((prefix.mul(&back), c));
                }
            }
            Ok(MembershipReport {
                verdict: Verdict::Member,
                certificate: Some(Certificate { parts }),
            })
        }
        Mode::Primes { count, seed } => {
            let primes = cache.primes(*count, *seed);
            for (_a, gamma) in &comps {
                let support: Vec<u32> = gamma.variables().iter().copied().collect();
                let m = support.len();
                if m == 0 {
                    return Ok(MembershipReport {
                        verdict: Verdict::NonMember,
                        certificate: None,
                    });
                }
                let to_canon: BTreeMap<u32, u32> = support
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, i as u32 + 1))
                    .collect();
                let gc = rename_variables(gamma, &to_canon);
                for &p in &primes {
                    if !gamma_member_modp(gens, m, &gc, p, cache) {
                        // an exact combination can in principle have a
                        // denominator divisible by this prime, so confirm
                        // exactly before reporting non-membership
                        let (em, _) = gamma_member_exact(gens, m, &gc, cache);
                        if !em {
                            return Ok(MembershipReport {
                                verdict: Verdict::NonMember,
                                certificate: None,
                            });
                        }
                        break;
                    }
                }
            }
            Ok(MembershipReport {
                verdict: Verdict::MemberModPrimes(primes),
                certificate: None,
            })
        }
    }
}

/// Membership for arbitrary polynomials, one multihomogeneous component at a
/// time. Each component is multilinearized first; in characteristic zero the
/// component is recovered from its multilinearization by identifying letters
/// up to a nonzero integer factor, so the two memberships agree.
pub fn membership_general(
    f: &NcPoly,
    gens: &GeneratorSet,
    mode: &Mode,
    cache: &mut TidealCache,
) -> Result<GeneralReport, TidealError> {
    if f.is_zero() {
        return Ok(GeneralReport {
            verdict: Verdict::Member,
            components: Vec::new(),
        });
    }
    let mut components: Vec<(BTreeMap<u32, u32>, MembershipReport)> = Vec::new();
    let mut saw_modp = false;
    for comp in multihomogeneous_components(f) {
        let content = multidegree(&comp).expect("component is multihomogeneous");
        let lin = multilinearize(&comp)?;
        let (canon, _) = canonicalize_letters(&lin);
        let rep = membership_multilinear(&canon, gens, mode, cache)?;
        let non = rep.verdict == Verdict::NonMember;
        if matches!(rep.verdict, Verdict::MemberModPrimes(_)) {
            saw_modp = true;
        }
        components.push((content, rep));
        if non {
            return Ok(GeneralReport {
                verdict: Verdict::NonMember,
                components,
            });
        }
    }
    let verdict = if saw_modp {
        match mode {
            Mode::Primes { count, seed } => Verdict::MemberModPrimes(cache.primes(*count, *seed)),
            Mode::Exact => unreachable!("modular verdict in exact mode"),
        }
    } else {
        Verdict::Member
    };
    Ok(GeneralReport {
        verdict,
        components,
    })
}

/// Membership of the two-factor product [x1..xp1] . [xp1+1..xp1+p2] in I_q,
/// decided exactly at every supported total degree.
///
/// The single product generates the same T-ideal as I_{p1} I_{p2}: a middle
/// monomial between the factors commutes out at the cost of extending the
/// first bracket, and longer brackets are substitution instances of shorter
/// ones, so deciding the product decides the product ideal. Total degree up
/// to 6 runs through the multilinear echelon; degrees 7 and 8 through the
/// substitution-upgraded certificate.
pub fn product_bracket_membership(
    p1: usize,
    p2: usize,
    q: usize,
    cache: &mut TidealCache,
) -> Result<MembershipReport, TidealError> {
    for p in [p1, p2] {
        if !(2..=6).contains(&p) {
            return Err(TidealError::BadBracketLength(p));
        }
    }
    if !(2..=8).contains(&q) {
        return Err(TidealError::BadBracketLength(q));
    }
    let d = p1 + p2;
    if d > MAX_LETTERS {
        return Err(TidealError::DegreeOutOfRange(d, MAX_LETTERS));
    }
    let gens = GeneratorSet::bracket_ideal(q)?;
    if d <= 6 {
        let left: Vec<u32> = (1..=p1 as u32).collect();
        let right: Vec<u32> = (p1 as u32 + 1..=d as u32).collect();
        let f = left_normed_vars(&left).mul(&left_normed_vars(&right));
        return membership_multilinear(&f, &gens, &Mode::Exact, cache);
    }
    match transport::upgraded_product_certificate(p1, p2, q) {
        Ok(cert) => Ok(MembershipReport {
            verdict: Verdict::Member,
            certificate: Some(cert),
        }),
        // at degree 7 the target ideal has length at least 5, so its
        // spanning row family is small enough to solve head-on
        Err(TidealError::CertificateSearch(_)) if d == 7 => {
            let left: Vec<u32> = (1..=p1 as u32).collect();
            let right: Vec<u32> = (p1 as u32 + 1..=d as u32).collect();
            let f = left_normed_vars(&left).mul(&left_normed_vars(&right));
            membership_multilinear(&f, &gens, &Mode::Exact, cache)
        }
        Err(e) => Err(e),
    }
}

/// The flanked spanning list of degree-n consequences, materialized.
pub fn consequences_spanning_set(
    gens: &GeneratorSet,
    n: usize,
) -> Result<Vec<NcPoly>, TidealError> {
    if n == 0 || n > 7 {
        return Err(TidealError::DegreeOutOfRange(n, 7));
    }
    let letters: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::new();
    for g in &gens.components {
        rows::for_each_flanked_row(g, &letters, 0, |r| {
            out.push(r);
            ControlFlow::Continue(())
        });
    }
    Ok(out)
}

/// The proper polynomial basis of degree n on x1..xn.
pub fn proper_basis(n: usize) -> Result<Vec<NcPoly>, TidealError> {
    if !(2..=7).contains(&n) {
        return Err(TidealError::DegreeOutOfRange(n, 7));
    }
    let letters: Vec<u32> = (1..=n as u32).collect();
    Ok(proper::proper_basis_on(&letters))
}

fn gamma_rank_exact(gens: &GeneratorSet, m: usize, cache: &mut TidealCache) -> usize {
    let coords = cache.proper_coords(m);
    let key = (gens.label.clone(), m);
    let mut st = cache
        .gamma_exact
        .remove(&key)
        .unwrap_or_else(|| new_gamma_exact(coords.dim()));
    if !st.done {
        let full = coords.dim();
        let consumed = stream_rows(
            gens,
            &(1..=m as u32).collect::<Vec<_>>(),
            st.consumed,
            |raw| {
                let pr = proper::pi_proper(&raw);
                if !pr.is_zero() {
                    let v = coords.coords_exact(&pr);
                    let id = st.rows.len();
                    if st.ech.offer(v, id).is_some() {
                        st.rows.push(pr);
                    }
                }
                if st.ech.rank() == full {
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            },
        );
        st.consumed = consumed;
        st.done = true;
    }
    let rank = st.ech.rank();
    cache.gamma_exact.insert(key, st);
    rank
}

fn gamma_rank_modp(gens: &GeneratorSet, m: usize, prime: u64, cache: &mut TidealCache) -> usize {
    let coords = cache.proper_coords_mod(m, prime);
    let key = (gens.label.clone(), m, prime);
    let mut st = cache
        .gamma_modp
        .remove(&key)
        .unwrap_or_else(|| GammaModpState {
            ech: echelon::ModpEchelon::new(prime, coords.dim()),
            consumed: 0,
            done: false,
        });
    if !st.done {
        let fp = field::Modp::new(prime);
        let full = coords.dim();
        let consumed = stream_rows(
            gens,
            &(1..=m as u32).collect::<Vec<_>>(),
            st.consumed,
            |raw| {
                let pr = proper::pi_proper(&raw);
                if !pr.is_zero() {
                    let w = coords.coords_mod(&pr, |s| scalar_mod(&fp, s));
                    st.ech.offer(w);
                }
                if st.ech.rank() == full {
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            },
        );
        st.consumed = consumed;
        st.done = true;
    }
    let rank = st.ech.rank();
    cache.gamma_modp.insert(key, st);
    rank
}

#[derive(Debug, Clone)]
pub struct GammaDimReport {
    pub degree: usize,
    pub space_dim: usize,
    pub rank: usize,
    pub dim: usize,
    pub primes: Vec<u64>,
}

/// Dimension of the proper degree-n part of the relatively free algebra cut
/// out by `gens`: dim Gamma_n minus the rank of the projected consequence
/// rows. In modular mode the rank is a lower bound (max over the primes), so
/// the reported dimension is an upper bound; it is exact whenever it is 0.
pub fn gamma_dim_mod_ideal(
    gens: &GeneratorSet,
    n: usize,
    mode: &Mode,
    cache: &mut TidealCache,
) -> Result<GammaDimReport, TidealError> {
    if !(2..=7).contains(&n) {
        return Err(TidealError::DegreeOutOfRange(n, 7));
    }
    let space_dim = proper_dim(n) as usize;
    match mode {
        Mode::Exact => {
            let rank = gamma_rank_exact(gens, n, cache);
            Ok(GammaDimReport {
                degree: n,
                space_dim,
                rank,
                dim: space_dim - rank,
                primes: Vec::new(),
            })
        }
        Mode::Primes { count, seed } => {
            let primes = cache.primes(*count, *seed);
            let mut rank = 0usize;
            for &p in &primes {
                rank = rank.max(gamma_rank_modp(gens, n, p, cache));
            }
            Ok(GammaDimReport {
                degree: n,
                space_dim,
                rank,
                dim: space_dim - rank,
                primes,
            })
        }
    }
}

/// Membership of a multilinear polynomial in the span of left-normed brackets
/// of length >= p (no products). Exact and certificate-producing: a degree-n
/// multilinear Lie element is a combination of left-normed brackets with x1
/// innermost, and for n >= p those are all brackets of length >= p.
pub fn lie_membership(f: &NcPoly, p: usize) -> Result<MembershipReport, TidealError> {
    if !(2..=8).contains(&p) {
        return Err(TidealError::BadBracketLength(p));
    }
    if f.is_zero() {
        return Ok(MembershipReport {
            verdict: Verdict::Member,
            certificate: Some(Certificate { parts: Vec::new() }),
        });
    }
    if !f.is_multilinear() {
        return Err(TidealError::NotMultilinear);
    }
    let n = contiguous_letters(f)?;
    let (combo, residual) = rows::lie_reduce(f);
    if !residual.is_zero() || n < p {
        return Ok(MembershipReport {
            verdict: Verdict::NonMember,
            certificate: None,
        });
    }
    let parts = combo
        .into_iter()
        .map(|(seq, c)| (left_normed_vars(&seq), c))
        .collect();
    Ok(MembershipReport {
        verdict: Verdict::Member,
        certificate: Some(Certificate { parts }),
    })
}

/// Exact membership of a multihomogeneous polynomial in the span of the raw
/// consequence rows on its own letter multiset. This is the repeated-letter
/// fallback: the flanked row list is valid verbatim over a multiset of
/// letters, since the ordered-set-partition argument never needs the letters
/// to be distinct.
pub(crate) fn content_member_exact(
    q: &NcPoly,
    gens: &GeneratorSet,
    cache: &mut TidealCache,
) -> Result<bool, TidealError> {
    if q.is_zero() {
        return Ok(true);
    }
    let content = multidegree(q)?;
    // Letter names never matter here: the flanked row family commutes with
    // any bijective renaming, so membership is decided on the canonical
    // content (most repeated letter first). This collapses the cached
    // echelons across letter assignments of the same multiplicity shape.
    let mut order: Vec<(u32, u32)> = content.iter().map(|(&v, &m)| (v, m)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let rename: BTreeMap<u32, u32> = order
        .iter()
        .enumerate()
        .map(|(i, &(v, _))| (v, i as u32 + 1))
        .collect();
    if rename.iter().any(|(&from, &to)| from != to) {
        let canon = rename_variables(q, &rename);
        return content_member_exact(&canon, gens, cache);
    }
    let mut letters: Vec<u32> = Vec::new();
    for (&v, &mult) in &content {
        for _ in 0..mult {
            letters.push(v);
        }
    }
    if letters.len() > MAX_LETTERS {
        return Err(TidealError::ContentTooLarge(
            format!("{content:?}"),
            letters.len(),
            MAX_LETTERS,
        ));
    }
    let key = (gens.label.clone(), letters.clone());
    let mut st = match cache.content_exact.remove(&key) {
        Some(st) => st,
        None => {
            let space = words::ComponentSpace::new(&content);
            if space.dim() > CONTENT_DIM_BOUND {
                return Err(TidealError::ContentTooLarge(
                    format!("{content:?}"),
                    space.dim(),
                    CONTENT_DIM_BOUND,
                ));
            }
            ContentExactState {
                ech: echelon::ExactEchelon::new(space.dim()),
                space,
                consumed: 0,
                done: false,
            }
        }
    };
    let query = st.space.coords_exact(q);
    let (mut residual, _acc) = st.ech.reduce_query(query);
    if !residual.is_empty() && !st.done {
        let mut finished_early = false;
        let consumed = stream_rows(gens, &letters, st.consumed, |raw| {
            if raw.is_zero() {
                return ControlFlow::Continue(());
            }
            let v = st.space.coords_exact(&raw);
            if let Some(col) = st.ech.offer(v, 0) {
                let r = st.ech.rank() - 1;
                if let Ok(pos) = residual.binary_search_by_key(&(col as u32), |e| e.0) {
                    let c = residual[pos].1.clone();
                    let row = st.ech.row(r).clone();
                    echelon::sub_scaled(&mut residual, &row, &c);
                }
            }
            if residual.is_empty() {
                finished_early = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        st.consumed = consumed;
        if !finished_early {
            st.done = true;
        }
    }
    let member = residual.is_empty();
    cache.content_exact.insert(key, st);
    Ok(member)
}

/// One term of a presentation: coeff * asc(prefix) * product of left-normed
/// bracket blocks.
#[derive(Debug, Clone)]
pub(crate) struct PresTerm {
    pub coeff: Scalar,
    pub prefix: Vec<u32>,
    pub blocks: Vec<Vec<u32>>,
}

/// Exact rewriting of a multilinear polynomial as a combination of word
/// prefixes times proper-basis products, by canonical components and a
/// staircase solve against the reduced basis rows.
pub(crate) fn basis_presentation(f: &NcPoly, cache: &mut TidealCache) -> Vec<PresTerm> {
    let mut out = Vec::new();
    for (a, gamma) in canonical_components(f) {
        if gamma.variables().is_empty() {
            out.push(PresTerm {
                coeff: gamma.coeff(&Word::empty()),
                prefix: a.clone(),
                blocks: Vec::new(),
            });
            continue;
        }
        let letters: Vec<u32> = gamma.variables().iter().copied().collect();
        let k = letters.len();
        let fwd: BTreeMap<u32, u32> = letters
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32 + 1))
            .collect();
        let table = cache.present_table(k);
        // peel the deg-lex leading word against the staircase row holding it;
        // the remainder's leading word strictly grows, so this terminates
        let mut g = rename_variables(&gamma, &fwd);
        let mut acc: Vec<(usize, Scalar)> = Vec::new();
        while !g.is_zero() {
            let (w, c0) = g
                .terms()
                .next()
                .map(|(w, c)| (w.clone(), c.clone()))
                .expect("nonzero");
            let (row, combo) = table
                .rows
                .get(&w)
                .expect("leading word of a proper polynomial lies on the staircase");
            let c = c0 / row.coeff(&w);
            g = g.sub(&row.scale(&c));
            echelon::sub_scaled(&mut acc, combo, &(-c));
        }
        for (id, coeff) in acc {
            let blocks: Vec<Vec<u32>> = table.blocks[id]
                .iter()
                .map(|b| b.iter().map(|&l| letters[(l - 1) as usize]).collect())
                .collect();
            out.push(PresTerm {
                coeff,
                prefix: a.clone(),
                blocks,
            });
        }
    }
    out
}

/// Can one presentation term be seen to land in I_q under every substitution,
/// from its block sizes alone?
///
/// Always sound: a substituted block of size >= q is a length >= q bracket of
/// algebra elements. For q = 3 and 4 the further rules mirror verified letter
/// facts: a product with a size-3 and a size-2 block, or two size-3 blocks,
/// is a substitution instance of a verified product membership (blocks of
/// both sizes present force an adjacent mixed pair, and bracket factors
/// reorder freely because their commutators are length >= q brackets). A pure
/// product of k size-2 blocks with k past the alternation threshold vanishes
/// whenever 2k exceeds the substitution alphabet: mod I_q the letters of each
/// double can be extracted (corrections carry a triple times a double, which
/// drops), and a letter product with 2k > n repeats a letter, so an odd
/// transposition fixes it and 2 * product lies in I_q.
fn structurally_member(q: usize, n_rank: usize, blocks: &[Vec<u32>]) -> bool {
    if blocks.is_empty() {
        return false;
    }
    if blocks.iter().any(|b| b.len() >= q) {
        return true;
    }
    let b2 = blocks.iter().filter(|b| b.len() == 2).count();
    let b3 = blocks.iter().filter(|b| b.len() == 3).count();
    match q {
        3 => b2 >= 2 && 2 * b2 > n_rank,
        4 => b3 >= 2 || (b3 >= 1 && b2 >= 1) || (b3 == 0 && b2 >= 3 && 2 * b2 > n_rank),
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct BoundedReport {
    /// None: no counterexample among the admitted substitutions.
    pub counterexample: Option<Vec<(u32, Word)>>,
    /// True when every presentation term is structurally inside the ideal,
    /// which proves the identity for substitutions of any length.
    pub structural: bool,
    pub tuples_checked: u64,
    pub tuples_skipped: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PairRel {
    None,
    Sym,
    AntiSym,
}

fn pair_relations(f: &NcPoly, d: usize) -> Vec<Vec<PairRel>> {
    let mut rels = vec![vec![PairRel::None; d]; d];
    for i in 1..=d as u32 {
        for j in i + 1..=d as u32 {
            let mut map = BTreeMap::new();
            map.insert(i, j);
            map.insert(j, i);
            let g = rename_variables(f, &map);
            let rel = if g == *f {
                PairRel::Sym
            } else if g.add(f).is_zero() {
                PairRel::AntiSym
            } else {
                PairRel::None
            };
            rels[(i - 1) as usize][(j - 1) as usize] = rel;
        }
    }
    rels
}

/// All words of length 1..=cap over letters 1..=n, in (length, lex) order.
fn words_up_to(n: usize, cap: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for len in 1..=cap {
        let mut w = vec![1u32; len];
        'iter: loop {
            out.push(Word(w.clone()));
            let mut i = len;
            while i > 0 {
                i -= 1;
                if w[i] < n as u32 {
                    w[i] += 1;
                    for x in w.iter_mut().skip(i + 1) {
                        *x = 1;
                    }
                    continue 'iter;
                }
            }
            break;
        }
    }
    out
}

/// Checks whether a multilinear f on x1..xd vanishes identically in the
/// relatively free algebra cut out by `gens` on n_rank generators, testing
/// word substitutions of length at most cap.
///
/// The polynomial is first rewritten through the proper basis; if every term
/// is structurally inside the ideal the identity holds for all substitution
/// lengths and no sweep runs. Otherwise each admissible substitution tuple is
/// pushed through the mod-I_q rewriting engine, and any surviving residual is
/// settled by exact membership on its own letter content, so a reported
/// counterexample is exact.
pub fn bounded_identity_check(
    f: &NcPoly,
    n_rank: usize,
    gens: &GeneratorSet,
    cap: usize,
    cache: &mut TidealCache,
) -> Result<BoundedReport, TidealError> {
    bounded_check_impl(f, n_rank, gens, cap, false, cache)
}

pub(crate) fn bounded_check_impl(
    f: &NcPoly,
    n_rank: usize,
    gens: &GeneratorSet,
    cap: usize,
    force_sweep: bool,
    cache: &mut TidealCache,
) -> Result<BoundedReport, TidealError> {
    if f.is_zero() {
        return Ok(BoundedReport {
            counterexample: None,
            structural: true,
            tuples_checked: 0,
            tuples_skipped: 0,
        });
    }
    if !f.is_multilinear() {
        return Err(TidealError::NotMultilinear);
    }
    if n_rank == 0 || cap == 0 {
        return Err(TidealError::DegreeOutOfRange(0, MAX_LETTERS));
    }
    let d = contiguous_letters(f)?;
    let q = match gens.bracket_len {
        Some(q) => q,
        None => {
            return Err(TidealError::UnsupportedGenerators(
                "bounded identity checks run against bracket ideals".into(),
            ))
        }
    };
    let pres = basis_presentation(f, cache);
    bounded_check_core(f, &pres, d, q, n_rank, gens, cap, force_sweep, cache)
}

/// Runs the bounded sweep on a caller-supplied presentation of the
/// polynomial as prefix words times left-normed bracket blocks, skipping the
/// proper-basis rewrite. That rewrite echelonizes the full multilinear
/// component and is infeasible at degrees 7 and 8, while the sweep itself
/// only needs some presentation with the right expansion.
pub(crate) fn bounded_presented_check(
    terms: &[PresTerm],
    n_rank: usize,
    gens: &GeneratorSet,
    cap: usize,
    cache: &mut TidealCache,
) -> Result<BoundedReport, TidealError> {
    let mut f = NcPoly::zero();
    for t in terms {
        assert!(
            t.blocks.iter().all(|b| !b.is_empty()),
            "presentation blocks must be non-empty"
        );
        let mut p = word_poly(&t.prefix);
        for b in &t.blocks {
            let factor = if b.len() == 1 {
                NcPoly::var(b[0])
            } else {
                left_normed_vars(b)
            };
            p = p.mul(&factor);
        }
        f = f.add(&p.scale(&t.coeff));
    }
    if f.is_zero() {
        return Ok(BoundedReport {
            counterexample: None,
            structural: true,
            tuples_checked: 0,
            tuples_skipped: 0,
        });
    }
    if !f.is_multilinear() {
        return Err(TidealError::NotMultilinear);
    }
    if n_rank == 0 || cap == 0 {
        return Err(TidealError::DegreeOutOfRange(0, MAX_LETTERS));
    }
    let d = contiguous_letters(&f)?;
    let q = match gens.bracket_len {
        Some(q) => q,
        None => {
            return Err(TidealError::UnsupportedGenerators(
                "bounded identity checks run against bracket ideals".into(),
            ))
        }
    };
    bounded_check_core(&f, terms, d, q, n_rank, gens, cap, false, cache)
}

#[allow(clippy::too_many_arguments)]
fn bounded_check_core(
    f: &NcPoly,
    pres: &[PresTerm],
    d: usize,
    q: usize,
    n_rank: usize,
    gens: &GeneratorSet,
    cap: usize,
    force_sweep: bool,
    cache: &mut TidealCache,
) -> Result<BoundedReport, TidealError> {
    if !force_sweep
        && pres
            .iter()
            .all(|t| structurally_member(q, n_rank, &t.blocks))
    {
        return Ok(BoundedReport {
            counterexample: None,
            structural: true,
            tuples_checked: 0,
            tuples_skipped: 0,
        });
    }
    let eng = engine::Engine::new_checked(q, cache)?;
    let mwords = words_up_to(n_rank, cap);
    let rels = pair_relations(f, d);
    let mut related_pairs = 0usize;
    let mut sym_pairs = 0usize;
    let mut anti_pairs = 0usize;
    for i in 0..d {
        for j in i + 1..d {
            match rels[i][j] {
                PairRel::None => {}
                PairRel::Sym => {
                    related_pairs += 1;
                    sym_pairs += 1;
                }
                PairRel::AntiSym => {
                    related_pairs += 1;
                    anti_pairs += 1;
                }
            }
        }
    }
    let total_pairs = d * (d - 1) / 2;
    // alphabet canonicalization composes safely with the ordering constraints
    // only when all pairs carry one uniform relation (sorting is then a
    // G-invariant idempotent map onto enumerated tuples), or none do
    let uniform = related_pairs == total_pairs && (sym_pairs == 0 || anti_pairs == 0);
    let unrelated = related_pairs == 0;
    let alpha: Vec<Vec<u32>> = if (uniform || unrelated) && n_rank <= 6 {
        letter_permutations(n_rank)
    } else {
        Vec::new()
    };
    let mut checked = 0u64;
    let mut skipped = 0u64;
    let mut counterexample: Option<Vec<(u32, Word)>> = None;
    let mut failure: Option<TidealError> = None;
    let mut tuple = vec![0usize; d];
    let _ = sweep_rec(
        0,
        d,
        &mut tuple,
        &mwords,
        &rels,
        &mut |t: &[usize]| -> ControlFlow<()> {
            if !alpha.is_empty() {
                let cur: Vec<Word> = t.iter().map(|&i| mwords[i].clone()).collect();
                for perm in &alpha {
                    let mut img: Vec<Word> = cur
                        .iter()
                        .map(|w| Word(w.0.iter().map(|&l| perm[(l - 1) as usize]).collect()))
                        .collect();
                    if uniform {
                        img.sort();
                    }
                    // keep only the lexicographically least relabeling of
                    // each orbit; membership of the image is relabel-invariant
                    if img < cur {
                        skipped += 1;
                        return ControlFlow::Continue(());
                    }
                }
            }
            checked += 1;
            let mut acc: BTreeMap<engine::CanonTerm, Scalar> = BTreeMap::new();
            for term in pres {
                let mut prefix_img: Vec<u32> = Vec::new();
                for &l in &term.prefix {
                    prefix_img.extend_from_slice(&mwords[t[(l - 1) as usize]].0);
                }
                let blocks_img: Vec<Vec<Word>> = term
                    .blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .map(|&l| mwords[t[(l - 1) as usize]].clone())
                            .collect()
                    })
                    .collect();
                eng.accumulate(&mut acc, &term.coeff, &prefix_img, &blocks_img);
            }
            for r in engine::residual_polys(&acc) {
                match content_member_exact(&r, gens, cache) {
                    Ok(true) => {}
                    Ok(false) => {
                        counterexample = Some(
                            t.iter()
                                .enumerate()
                                .map(|(i, &w)| (i as u32 + 1, mwords[w].clone()))
                                .collect(),
                        );
                        return ControlFlow::Break(());
                    }
                    Err(e) => {
                        failure = Some(e);
                        return ControlFlow::Break(());
                    }
                }
            }
            ControlFlow::Continue(())
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(BoundedReport {
        counterexample,
        structural: false,
        tuples_checked: checked,
        tuples_skipped: skipped,
    })
}

fn letter_permutations(n: usize) -> Vec<Vec<u32>> {
    let mut perms = Vec::new();
    let mut cur: Vec<u32> = (1..=n as u32).collect();
    loop {
        perms.push(cur.clone());
        if !words::next_arrangement(&mut cur) {
            break;
        }
    }
    perms
}

/// Depth-first tuple enumeration under the pairwise ordering constraints:
/// t_i <= t_j for symmetric pairs, t_i < t_j for antisymmetric ones. Any
/// substitution tuple can be rearranged into this region by swapping related
/// slots (membership of the image is unchanged up to sign), so the region
/// meets every orbit; antisymmetric pairs with equal entries give a zero
/// image and are safe to omit.
fn sweep_rec<F: FnMut(&[usize]) -> ControlFlow<()>>(
    pos: usize,
    d: usize,
    tuple: &mut Vec<usize>,
    mwords: &[Word],
    rels: &[Vec<PairRel>],
    f: &mut F,
) -> ControlFlow<()> {
    if pos == d {
        return f(tuple);
    }
    let mut low = 0usize;
    for i in 0..pos {
        match rels[i][pos] {
            PairRel::Sym => low = low.max(tuple[i]),
            PairRel::AntiSym => low = low.max(tuple[i] + 1),
            PairRel::None => {}
        }
    }
    for v in low..mwords.len() {
        tuple[pos] = v;
        sweep_rec(pos + 1, d, tuple, mwords, rels, f)?;
    }
    ControlFlow::Continue(())
}
