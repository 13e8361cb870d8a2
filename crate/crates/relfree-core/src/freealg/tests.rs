use super::*;

fn p(s: &str) -> NcPoly {
    parse_poly(s).unwrap()
}

// Minimal independent polynomial arithmetic used as an oracle: terms as
// (word, coeff) pairs over i64, normalized by sorting and merging.
mod oracle {
    pub type OPoly = Vec<(Vec<u32>, i64)>;

    pub fn normalize(mut t: OPoly) -> OPoly {
        t.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: OPoly = Vec::new();
        for (w, c) in t {
            match out.last_mut() {
                Some((lw, lc)) if *lw == w => *lc += c,
                _ => out.push((w, c)),
            }
        }
        out.retain(|(_, c)| *c != 0);
        out
    }

    pub fn var(i: u32) -> OPoly {
        vec![(vec![i], 1)]
    }

    pub fn mul(a: &OPoly, b: &OPoly) -> OPoly {
        let mut t = Vec::new();
        for (wa, ca) in a {
            for (wb, cb) in b {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                t.push((w, ca * cb));
            }
        }
        normalize(t)
    }

    pub fn sub(a: &OPoly, b: &OPoly) -> OPoly {
        let mut t = a.clone();
        t.extend(b.iter().map(|(w, c)| (w.clone(), -c)));
        normalize(t)
    }

    pub fn comm(a: &OPoly, b: &OPoly) -> OPoly {
        sub(&mul(a, b), &mul(b, a))
    }

    pub fn left_normed(idx: &[u32]) -> OPoly {
        let mut acc = comm(&var(idx[0]), &var(idx[1]));
        for &i in &idx[2..] {
            acc = comm(&acc, &var(i));
        }
        acc
    }
}

fn assert_matches_oracle(poly: &NcPoly, o: &oracle::OPoly) {
    let got: Vec<(Vec<u32>, String)> = poly
        .terms()
        .map(|(w, c)| (w.0.clone(), c.to_string()))
        .collect();
    let mut want: Vec<(Vec<u32>, String)> =
        o.iter().map(|(w, c)| (w.clone(), c.to_string())).collect();
    want.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
    assert_eq!(got, want);
}

#[test]
fn word_order_is_deg_lex() {
    let mut ws = vec![
        Word(vec![2, 1]),
        Word(vec![1]),
        Word(vec![1, 1]),
        Word::empty(),
        Word(vec![2]),
        Word(vec![1, 2]),
    ];
    ws.sort();
    let want = vec![
        Word::empty(),
        Word(vec![1]),
        Word(vec![2]),
        Word(vec![1, 1]),
        Word(vec![1, 2]),
        Word(vec![2, 1]),
    ];
    assert_eq!(ws, want);
}

#[test]
fn square_of_sum() {
    let s = NcPoly::var(1).add(&NcPoly::var(2));
    let sq = s.mul(&s);
    assert_eq!(sq, p("x1*x1 + x1*x2 + x2*x1 + x2*x2"));
}

#[test]
fn commutator_antisymmetry_and_jacobi() {
    let a = p("x1 + 2*x2*x3");
    let b = p("x2 - x1*x1");
    let c = p("x3*x1 + 1/2*x2");
    assert_eq!(commutator(&a, &b), commutator(&b, &a).neg());
    let jac = commutator(&commutator(&a, &b), &c)
        .add(&commutator(&commutator(&b, &c), &a))
        .add(&commutator(&commutator(&c, &a), &b));
    assert!(jac.is_zero());
}

#[test]
fn left_normed_matches_independent_expansion() {
    for idx in [
        vec![1, 2],
        vec![1, 2, 3],
        vec![2, 1, 1],
        vec![1, 2, 3, 4],
        vec![3, 1, 4, 1, 5],
    ] {
        let got = left_normed_vars(&idx);
        let want = oracle::left_normed(&idx);
        assert_matches_oracle(&got, &want);
    }
}

#[test]
fn standard_polynomial_small() {
    assert_eq!(standard_polynomial(2), p("x1*x2 - x2*x1"));
    let s3 = standard_polynomial(3);
    assert_eq!(s3.num_terms(), 6);
    assert_eq!(s3.coeff(&Word(vec![1, 2, 3])), Scalar::one());
    assert_eq!(s3.coeff(&Word(vec![2, 1, 3])), -Scalar::one());
    assert_eq!(standard_polynomial(4).num_terms(), 24);
}

#[test]
fn standard_polynomial_alternates() {
    let s4 = standard_polynomial(4);
    // swapping two variables negates s4
    let swapped = rename_variables(&s4, &[(1u32, 3u32), (3u32, 1u32)].into_iter().collect());
    assert_eq!(swapped, s4.neg());
}

#[test]
fn commutator_form_equals_standard_polynomial() {
    for k in 1..=3 {
        assert_eq!(
            standard_commutator_form(k),
            standard_polynomial(2 * k),
            "k = {k}"
        );
    }
}

fn all_words(alphabet: u32, len: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for l in 1..=alphabet {
        cur.push(l);
        all_words(alphabet, len, out, cur);
        cur.pop();
    }
}

#[test]
fn comm_expand_matches_commutator_exhaustively() {
    // all words of length 1..=3 over {1..4}, plus a sample of length-4 words
    let mut words: Vec<Vec<u32>> = Vec::new();
    for l in 1..=3usize {
        all_words(4, l, &mut words, &mut Vec::new());
    }
    words.push(vec![1, 3, 2, 4]);
    words.push(vec![4, 4, 2, 1]);
    for xs in &words {
        for ys in &words {
            let got = comm_expand_monomials(&Word(xs.clone()), &Word(ys.clone()));
            let want = commutator(&word_poly(xs), &word_poly(ys));
            assert_eq!(got, want, "xs={xs:?} ys={ys:?}");
        }
    }
}

#[test]
fn multilinearize_triple_commutator_example() {
    let f = left_normed_vars(&[2, 1, 1]);
    let want = left_normed_vars(&[2, 1, 3]).add(&left_normed_vars(&[2, 3, 1]));
    assert_eq!(multilinearize(&f).unwrap(), want);
}

#[test]
fn multilinearize_square_of_commutator_example() {
    // copies: x1 -> (x1, x3), x2 -> (x2, x4)
    let c = commutator(&NcPoly::var(1), &NcPoly::var(2));
    let f = c.mul(&c);
    let mut want = NcPoly::zero();
    for (a, c1) in [(1u32, 3u32), (3, 1)] {
        for (b, d) in [(2u32, 4u32), (4, 2)] {
            let t = commutator(&NcPoly::var(a), &NcPoly::var(b))
                .mul(&commutator(&NcPoly::var(c1), &NcPoly::var(d)));
            want = want.add(&t);
        }
    }
    assert_eq!(multilinearize(&f).unwrap(), want);
}

#[test]
fn multilinearize_identification_recovers_scaled_input() {
    // substituting the fresh copies back multiplies by prod of d_i!
    let cases = [
        p("[x2,x1,x1]"),
        p("[x1,x2]^2"),
        p("x1^3"),
        p("x1*x2*x1*x2 - 2*x2*x2*x1*x1"),
    ];
    for f in cases {
        let deg = multidegree(&f).unwrap();
        let ml = multilinearize(&f).unwrap();
        assert!(ml.is_multilinear());
        // recover the copy allocation to build the identification map
        let used: BTreeSet<u32> = deg.keys().copied().collect();
        let mut back: BTreeMap<u32, NcPoly> = BTreeMap::new();
        let mut next = 1u32;
        let mut taken: BTreeSet<u32> = BTreeSet::new();
        let mut factor = Scalar::one();
        for (&v, &d) in &deg {
            for j in 1..d {
                while used.contains(&next) || taken.contains(&next) {
                    next += 1;
                }
                taken.insert(next);
                back.insert(next, NcPoly::var(v));
                factor = factor * Scalar::from(BigInt::from(j + 1));
            }
        }
        let ident = substitute(&ml, &back);
        assert_eq!(ident, f.scale(&factor));
    }
}

#[test]
fn multilinearize_rejects_inhomogeneous() {
    let f = p("x1 + x1*x2");
    assert!(matches!(
        multilinearize(&f),
        Err(FreeAlgError::NotMultihomogeneous(..))
    ));
}

#[test]
fn multihomogeneous_components_split() {
    let f = p("x1 + x1*x2 + 2*x2*x1 - 3");
    let comps = multihomogeneous_components(&f);
    assert_eq!(comps.len(), 3);
    let total = comps.iter().fold(NcPoly::zero(), |a, c| a.add(c));
    assert_eq!(total, f);
    for c in &comps {
        multidegree(c).unwrap();
    }
}

#[test]
fn substitute_keeps_unmapped_variables() {
    let f = p("[x1,x2]*x3");
    let img = substitute(&f, &[(2u32, p("x2*x2"))].into_iter().collect());
    assert_eq!(img, p("[x1,x2*x2]*x3"));
}

#[test]
fn standard_s4_substitution_image() {
    // s4(x1, x2, x1*x2*x1, x2^2) contains x2 * [x1*[x2,x1]*x1, x2] * x2 plus
    // four extra terms; cross-checked against an independent expansion.
    let s4 = standard_polynomial(4);
    let img = substitute(
        &s4,
        &[(3u32, p("x1*x2*x1")), (4u32, p("x2^2"))]
            .into_iter()
            .collect(),
    );

    // independent oracle: expand sum over permutations directly
    let args = [
        oracle::var(1),
        oracle::var(2),
        vec![(vec![1, 2, 1], 1)],
        vec![(vec![2, 2], 1)],
    ];
    let mut want = Vec::new();
    for_each_permutation(4, |perm, even| {
        let mut w = Vec::new();
        for &i in perm {
            w.push(&args[(i - 1) as usize]);
        }
        let prod = oracle::mul(&oracle::mul(w[0], w[1]), &oracle::mul(w[2], w[3]));
        let sgn = if even { 1 } else { -1 };
        want.extend(prod.into_iter().map(|(word, c)| (word, sgn * c)));
    });
    assert_matches_oracle(&img, &oracle::normalize(want));

    let inner = commutator(&p("x1*[x2,x1]*x1"), &NcPoly::var(2));
    assert_eq!(
        inner,
        p("x1*x2*x1^2*x2 - x1^2*x2*x1*x2 - x2*x1*x2*x1^2 + x2*x1^2*x2*x1")
    );
    let sandwich = NcPoly::var(2).mul(&inner).mul(&NcPoly::var(2));
    let extra = p("x1*x2*[x1,x2]*x2*x1*x2 - x2*x1*x2*[x1,x2]*x2*x1");
    assert_eq!(img, sandwich.add(&extra));
}

#[test]
fn parser_basics() {
    assert!(p("0").is_zero());
    assert_eq!(p("2x1"), p("2*x1"));
    assert_eq!(p("x1^2"), p("x1*x1"));
    assert_eq!(p("[x1,x2,x3]"), left_normed_vars(&[1, 2, 3]));
    assert_eq!(p("(x1+x2)^2"), p("x1*x1 + x1*x2 + x2*x1 + x2*x2"));
    assert_eq!(p("1/2 * [x1, x2]").scale(&scalar(2, 1)), p("[x1,x2]"));
    assert_eq!(p("-x1 + x2"), p("x2 - x1"));
    assert_eq!(p("x1 x2"), p("x1*x2"));
    assert_eq!(p("3/2"), NcPoly::constant(scalar(3, 2)));
}

#[test]
fn parser_rejects_bad_input() {
    for s in ["x0", "[x1]", "1/0", "x1 +", "()", "x1^", "y1", "x1 x"] {
        let r = parse_poly(s);
        assert!(matches!(r, Err(FreeAlgError::Parse { .. })), "input {s:?}");
    }
}

#[test]
fn printer_round_trips() {
    let cases = [
        "0",
        "x1",
        "-x1",
        "3/2",
        "x1*x2 - x2*x1",
        "[x1,x2,x3]",
        "1/2*[x1,x2]^2 - 7*x3",
        "[x1,x2]*[x3,x4]*[x5,x6]",
    ];
    for s in cases {
        let poly = p(s);
        let printed = poly.to_string();
        let reparsed = parse_poly(&printed).unwrap();
        assert_eq!(reparsed, poly, "printed form {printed:?}");
        // printing is a fixed point
        assert_eq!(reparsed.to_string(), printed);
    }
}

#[test]
fn permutation_iteration_covers_all_with_parity() {
    let mut seen = BTreeSet::new();
    let mut count = 0usize;
    for_each_permutation(4, |perm, even| {
        // recompute parity by counting inversions
        let mut inv = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if perm[i] > perm[j] {
                    inv += 1;
                }
            }
        }
        assert_eq!(inv % 2 == 0, even);
        seen.insert(perm.to_vec());
        count += 1;
    });
    assert_eq!(count, 24);
    assert_eq!(seen.len(), 24);
}

#[test]
fn rename_variables_applies_bijection() {
    let f = p("[x1,x2]*x3");
    let g = rename_variables(&f, &[(1u32, 2u32), (2, 1)].into_iter().collect());
    assert_eq!(g, p("[x2,x1]*x3"));
}
