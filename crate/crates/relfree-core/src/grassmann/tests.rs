use super::*;
use crate::freealg::{commutator, left_normed_vars, parse_poly, standard_polynomial};
use num::One;

fn shape(ranks: &[u32]) -> TensorShape {
    TensorShape::new(ranks.to_vec()).unwrap()
}

fn p(s: &str) -> NcPoly {
    parse_poly(s).unwrap()
}

/// Assignment text helper: shape line plus variable lines.
fn assignment(text: &str) -> (TensorShape, BTreeMap<u32, GrElement>) {
    parse_assignment(text).unwrap()
}

/// Independent sign oracle: factors as sorted index lists, products by list
/// concatenation with pairwise inversion counting.
mod oracle {
    pub fn factor_product(a: &[u32], b: &[u32]) -> Option<(bool, Vec<u32>)> {
        if a.iter().any(|x| b.contains(x)) {
            return None;
        }
        let mut inversions = 0usize;
        for &i in a {
            for &j in b {
                if i > j {
                    inversions += 1;
                }
            }
        }
        let mut out: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
        out.sort_unstable();
        Some((inversions % 2 == 0, out))
    }
}

fn mask_to_lists(mask: u128, sh: &TensorShape) -> Vec<Vec<u32>> {
    (0..sh.num_factors())
        .map(|f| {
            let mut v = Vec::new();
            for i in 0..sh.ranks()[f] {
                if mask & (1u128 << (sh.offsets[f] + i)) != 0 {
                    v.push(i);
                }
            }
            v
        })
        .collect()
}

#[test]
fn product_sign_matches_inversion_oracle() {
    use rand::{Rng, SeedableRng};
    let sh = shape(&[5, 3, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let a = rng.gen_range(0..sh.basis_size()) as u128;
        let b = rng.gen_range(0..sh.basis_size()) as u128;
        let got = sh.merge(a, b);
        let la = mask_to_lists(a, &sh);
        let lb = mask_to_lists(b, &sh);
        let mut positive = true;
        let mut ok = true;
        for f in 0..sh.num_factors() {
            match oracle::factor_product(&la[f], &lb[f]) {
                None => {
                    ok = false;
                    break;
                }
                Some((pos, _)) => {
                    if !pos {
                        positive = !positive;
                    }
                }
            }
        }
        match got {
            None => assert!(!ok, "merge said zero, oracle disagrees: {a:#x} {b:#x}"),
            Some((pos, m)) => {
                assert!(ok);
                assert_eq!(m, a | b);
                assert_eq!(pos, positive, "sign mismatch on {a:#x} * {b:#x}");
            }
        }
    }
}

#[test]
fn generators_square_to_zero_and_anticommute() {
    let sh = shape(&[4, 2]);
    let e1 = sh.generator(0, 1).unwrap();
    let e2 = sh.generator(0, 2).unwrap();
    let g1 = sh.generator(1, 1).unwrap();
    assert!(e1.mul(&e1, &sh).is_zero());
    assert!(g1.mul(&g1, &sh).is_zero());
    assert_eq!(e1.mul(&e2, &sh), e2.mul(&e1, &sh).neg());
    // factors commute with no sign: (e1 x 1)(1 x g1) = (1 x g1)(e1 x 1)
    assert_eq!(e1.mul(&g1, &sh), g1.mul(&e1, &sh));
    assert_eq!(e1.mul(&g1, &sh).display(&sh), "e1 | g1");
}

#[test]
fn product_is_associative_on_random_elements() {
    use rand::SeedableRng;
    let sh = shape(&[4, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let a = random_element(&sh, &mut rng);
        let b = random_element(&sh, &mut rng);
        let c = random_element(&sh, &mut rng);
        let left = a.mul(&b, &sh).mul(&c, &sh);
        let right = a.mul(&b.mul(&c, &sh), &sh);
        assert_eq!(left, right);
    }
}

#[test]
fn evaluation_is_a_ring_morphism() {
    use rand::SeedableRng;
    let sh = shape(&[3, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let map: BTreeMap<u32, GrElement> = (1..=3)
        .map(|v| (v, random_element(&sh, &mut rng)))
        .collect();
    let f = p("[x1,x2]*x3 - 2*x2");
    let g = p("x1*x3 + x2*x2 - 1");
    let ef = gr_evaluate(&f, &sh, &map).unwrap();
    let eg = gr_evaluate(&g, &sh, &map).unwrap();
    assert_eq!(
        gr_evaluate(&f.mul(&g), &sh, &map).unwrap(),
        ef.mul(&eg, &sh)
    );
    assert_eq!(gr_evaluate(&f.add(&g), &sh, &map).unwrap(), ef.add(&eg));
}

#[test]
fn evaluation_requires_every_variable() {
    let sh = shape(&[2]);
    let map = BTreeMap::new();
    assert_eq!(
        gr_evaluate(&p("x1"), &sh, &map),
        Err(GrassmannError::UnassignedVariable(1))
    );
}

/// x1 = e1 x g1 + e2 x g2 + e3 x 1 and xi = e_{i+2} x 1 for i >= 2, the
/// evaluation used for the product-of-commutators witnesses.
fn witness_assignment(nvars: u32, rank: u32) -> (TensorShape, BTreeMap<u32, GrElement>) {
    let mut text = format!("shape: {rank} 2\nx1 = e1 | g1 + e2 | g2 + e3 | 1\n");
    for i in 2..=nvars {
        text.push_str(&format!("x{i} = e{} | 1\n", i + 2));
    }
    assignment(&text)
}

#[test]
fn commutator_pair_witness_value() {
    let (sh, map) = witness_assignment(3, 5);
    let f = commutator(&p("x1"), &p("x2")).mul(&commutator(&p("x1"), &p("x3")));
    let v = gr_evaluate(&f, &sh, &map).unwrap();
    assert_eq!(v.display(&sh), "-8 * e1&e2&e4&e5 | g1&g2");
}

#[test]
fn five_variable_product_witness_value() {
    let (sh, map) = witness_assignment(5, 7);
    let f = p("[x1,x2]*[x1,x3]*[x4,x5]");
    let v = gr_evaluate(&f, &sh, &map).unwrap();
    assert_eq!(v.display(&sh), "-16 * e1&e2&e4&e5&e6&e7 | g1&g2");
}

#[test]
fn left_normed_square_witness_value() {
    // [x1,x2,x1][x1,x3]: two independent hand expansions (commutator calculus
    // and direct word expansion) both give +16, fixing this as the golden value.
    let (sh, map) = witness_assignment(3, 5);
    let f = left_normed_vars(&[1, 2, 1]).mul(&commutator(&p("x1"), &p("x3")));
    let v = gr_evaluate(&f, &sh, &map).unwrap();
    assert_eq!(v.display(&sh), "16 * e1&e2&e3&e4&e5 | g1&g2");
}

#[test]
fn even_variable_product_witness_value() {
    let (sh, map) = witness_assignment(4, 6);
    let f = p("[x1,x2]*[x1,x3]*[x1,x4]");
    let v = gr_evaluate(&f, &sh, &map).unwrap();
    assert_eq!(v.display(&sh), "-16 * e1&e2&e3&e4&e5&e6 | g1&g2");
}

#[test]
fn sandwich_commutator_triple_tensor_value() {
    let (sh, map) = assignment(
        "shape: 2 2 2\n\
         x1 = e1 | 1 | 1 + 1 | f1 | 1 + 1 | 1 | g1\n\
         x2 = e2 | 1 | 1 + 1 | f2 | 1 + 1 | 1 | g2\n",
    );
    let f = commutator(&p("x1*[x2,x1]*x1"), &p("x2"));
    let v = gr_evaluate(&f, &sh, &map).unwrap();
    assert_eq!(
        v.display(&sh),
        "-16 * e1&e2 | f1&f2 | g1 - 16 * e1&e2 | f1 | g1&g2 - 16 * e1 | f1&f2 | g1&g2"
    );
}

#[test]
fn nested_bracket_chain_values() {
    let (sh, map) = assignment(
        "shape: 8 2\n\
         x1 = e1 | 1\n\
         x2 = e2 | g1\n\
         x3 = e3 | g2\n\
         x4 = e4 | 1\n\
         x5 = e5 | 1\n\
         x6 = e6 | 1\n\
         x7 = e7 | 1\n\
         x8 = e8 | 1\n",
    );
    let u = left_normed_vars(&[1, 2, 3, 4]);
    assert_eq!(
        gr_evaluate(&u, &sh, &map).unwrap().display(&sh),
        "8 * e1&e2&e3&e4 | g1&g2"
    );
    let f6 = u.mul(&p("[x5,x6]"));
    assert_eq!(
        gr_evaluate(&f6, &sh, &map).unwrap().display(&sh),
        "16 * e1&e2&e3&e4&e5&e6 | g1&g2"
    );
    let f8 = f6.mul(&p("[x7,x8]"));
    assert_eq!(
        gr_evaluate(&f8, &sh, &map).unwrap().display(&sh),
        "32 * e1&e2&e3&e4&e5&e6&e7&e8 | g1&g2"
    );
}

#[test]
fn standard_polynomial_on_generators() {
    let sh = shape(&[4]);
    let map: BTreeMap<u32, GrElement> = (1..=4).map(|v| (v, sh.generator(0, v).unwrap())).collect();
    let v = gr_evaluate(&standard_polynomial(4), &sh, &map).unwrap();
    // every permutation sorts back with the sign it contributes, so terms add
    assert_eq!(v.display(&sh), "24 * e1&e2&e3&e4");
}

#[test]
fn probe_finds_nonzero_for_non_identity() {
    let r = gr_random_identity_probe(&p("[x1,x2]"), &shape(&[2]), 20, 1).unwrap();
    assert!(!r.all_zero());
    let (map, val) = r.witness.unwrap();
    let sh = shape(&[2]);
    assert_eq!(gr_evaluate(&p("[x1,x2]"), &sh, &map).unwrap(), val);
}

#[test]
fn probe_stays_zero_on_identities() {
    // the exterior algebra is Lie nilpotent of class 2
    let r = gr_random_identity_probe(&p("[x1,x2,x3]"), &shape(&[4]), 5, 42).unwrap();
    assert!(r.all_zero());
    // rank-2 second factor pushes the nilpotency class up by exactly two
    let r = gr_random_identity_probe(&p("[x1,x2,x3,x4,x5]"), &shape(&[3, 2]), 3, 42).unwrap();
    assert!(r.all_zero());
    let r = gr_random_identity_probe(&p("[x1,x2,x3]"), &shape(&[3, 2]), 20, 42).unwrap();
    assert!(!r.all_zero());
}

#[test]
fn assignment_round_trips_and_accepts_variants() {
    let (sh, map) = witness_assignment(3, 5);
    let text = print_assignment(&sh, &map);
    let (sh2, map2) = parse_assignment(&text).unwrap();
    assert_eq!(sh, sh2);
    assert_eq!(map, map2);

    let (sh, map) =
        assignment("# witness over one factor\nshape: 3\nx1 = 3/2 * e1&e2 - e3 + 2\nx2 = -e1\n");
    let x1 = &map[&1];
    assert_eq!(x1.display(&sh), "2 + 3/2 * e1&e2 - e3");
    assert_eq!(map[&2].display(&sh), "-e1");
}

#[test]
fn assignment_rejects_bad_input() {
    let bad = [
        "x1 = e1",                    // shape must come first
        "shape: 0",                   // zero rank
        "shape: 2\nshape: 2",         // duplicate shape
        "shape: 2\nx1 = g1",          // wrong letter for factor
        "shape: 2\nx1 = e3",          // index out of range
        "shape: 2\nx1 = e1&e1",       // repeated generator
        "shape: 2 2\nx1 = e1",        // missing factor slot
        "shape: 2\nx1 = e1\nx1 = e2", // duplicate variable
        "shape: 2\nx0 = e1",          // bad variable
        "shape: 2\nx1 = 1/0 * e1",    // zero denominator
        "shape: 2\nx1 = e1 +",        // dangling sign
        "shape: 30",                  // too large for full-basis probes
    ];
    for text in bad {
        assert!(parse_assignment(text).is_err(), "accepted: {text}");
    }
}

#[test]
fn scale_and_linear_ops() {
    let sh = shape(&[3]);
    let e1 = sh.generator(0, 1).unwrap();
    let e2 = sh.generator(0, 2).unwrap();
    let s = e1.add(&e2).scale(&Scalar::from(num::BigInt::from(3)));
    assert_eq!(s.display(&sh), "3 * e1 + 3 * e2");
    assert!(s.sub(&s).is_zero());
    assert_eq!(s.neg().display(&sh), "-3 * e1 - 3 * e2");
    assert!(GrElement::one().mul(&s, &sh) == s);
    assert!(Scalar::one().is_one());
}
