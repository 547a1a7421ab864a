use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use leafcalc::affine_weyl::{AdmissibleSet, AffineWeyl, Element, Level, Sigma, SigmaClassOptions};
use leafcalc::isocrystal::slopes_monomial;
use leafcalc::rational::{q, Q};
use leafcalc::root_datum::{GroupTag, RootDatum, WeylElem};
use proptest::prelude::*;

fn group(tag: GroupTag, n: usize) -> AffineWeyl {
    AffineWeyl::new(Arc::new(RootDatum::build_classical(tag, n).unwrap())).unwrap()
}

fn gl3() -> &'static AffineWeyl {
    static G: OnceLock<AffineWeyl> = OnceLock::new();
    G.get_or_init(|| group(GroupTag::GL, 3))
}

/// Products of all subwords of a reduced expression of `y`: the Bruhat
/// interval below `y`.
fn subword_interval(g: &AffineWeyl, y: &Element) -> BTreeSet<Element> {
    let (word, tau) = g.reduced_word(y).unwrap();
    let s = g.simple_reflections();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << word.len()) {
        let mut x = g.identity();
        for (k, &i) in word.iter().enumerate() {
            if mask & (1 << k) != 0 {
                x = g.compose(&x, &s[i]).unwrap();
            }
        }
        out.insert(g.compose(&x, &tau).unwrap());
    }
    out
}

/// Lengths by breadth-first search from the length-zero elements, using only
/// the group law.
fn bfs_lengths(g: &AffineWeyl, taus: &[Element], depth: usize) -> HashMap<Element, usize> {
    let mut dist: HashMap<Element, usize> = taus.iter().map(|t| (t.clone(), 0)).collect();
    let mut frontier: Vec<Element> = taus.to_vec();
    for d in 1..=depth {
        let mut next = Vec::new();
        for x in &frontier {
            for s in g.simple_reflections() {
                let y = g.compose(s, x).unwrap();
                if !dist.contains_key(&y) {
                    dist.insert(y.clone(), d);
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    dist
}

fn omega_reps(g: &AffineWeyl) -> Vec<Element> {
    let mut taus = vec![g.identity()];
    for rep in g.default_kappa_reps().unwrap().into_iter().skip(1) {
        let t = g.omega_part(&g.translation(rep).unwrap()).unwrap();
        taus.push(g.invert(&t).unwrap());
        taus.push(t);
    }
    taus
}

#[test]
fn length_agrees_with_word_metric() {
    for (tag, n, depth) in [(GroupTag::GL, 2, 5), (GroupTag::GL, 3, 4), (GroupTag::Sp, 4, 4), (GroupTag::GSp, 4, 3)] {
        let g = group(tag, n);
        for (x, d) in bfs_lengths(&g, &omega_reps(&g), depth) {
            assert_eq!(g.length(&x), d, "{} {x:?}", g.datum().label());
        }
    }
}

#[test]
fn bruhat_matches_subword_oracle() {
    for (tag, n, cap) in [(GroupTag::GL, 2, 3), (GroupTag::GL, 3, 2), (GroupTag::Sp, 4, 2)] {
        let g = group(tag, n);
        let xs = g.elements_up_to_length(cap, &g.default_kappa_reps().unwrap(), 100_000).unwrap();
        for y in &xs {
            let below = subword_interval(&g, y);
            for x in &xs {
                assert_eq!(g.bruhat_leq(x, y).unwrap(), below.contains(x), "{x:?} <= {y:?}");
            }
        }
    }
}

fn brute_admissible(g: &AffineWeyl, mu: &[i64]) -> BTreeSet<Element> {
    let d = g.datum();
    let orbit: BTreeSet<Vec<i64>> = d.weyl().elements().map(|w| d.act_cochar(w, mu)).collect();
    orbit.into_iter().flat_map(|l| subword_interval(g, &g.translation(l).unwrap())).collect()
}

#[test]
fn admissible_counts_match_brute_force() {
    for (tag, n, mu, expect) in [(GroupTag::GL, 2, vec![1, 0], 3), (GroupTag::GL, 3, vec![1, 0, 0], 7)] {
        let g = group(tag, n);
        let AdmissibleSet::Iwahori(adm) = g.admissible_set(&mu, Level::Iwahori).unwrap() else { panic!() };
        let brute = brute_admissible(&g, &mu);
        assert_eq!(brute.len(), expect);
        assert_eq!(adm.into_iter().collect::<BTreeSet<_>>(), brute);
    }
    let g = group(GroupTag::Sp, 4);
    let AdmissibleSet::Iwahori(adm) = g.admissible_set(&[1, 0], Level::Iwahori).unwrap() else { panic!() };
    assert_eq!(adm.into_iter().collect::<BTreeSet<_>>(), brute_admissible(&g, &[1, 0]));
}

#[test]
fn admissible_monotone_and_bounded_on_gl3() {
    let g = gl3();
    let d = g.datum();
    let mus: Vec<Vec<i64>> = vec![vec![1, 0, 0], vec![1, 1, 0], vec![2, 0, 0], vec![1, 0, -1], vec![0, 0, 0], vec![2, 1, 0]];
    let sets: Vec<BTreeSet<Element>> = mus
        .iter()
        .map(|mu| match g.admissible_set(mu, Level::Iwahori).unwrap() {
            AdmissibleSet::Iwahori(v) => v.into_iter().collect(),
            AdmissibleSet::Hyperspecial(_) => unreachable!(),
        })
        .collect();
    for (mu, set) in mus.iter().zip(&sets) {
        let bound = d.pair_two_rho(&mu.iter().map(|&x| q(x)).collect::<Vec<_>>());
        assert!(set.iter().all(|x| q(g.length(x) as i64) <= bound));
    }
    for (i, a) in mus.iter().enumerate() {
        for (j, b) in mus.iter().enumerate() {
            let aq: Vec<Q> = a.iter().map(|&x| q(x)).collect();
            let bq: Vec<Q> = b.iter().map(|&x| q(x)).collect();
            if d.dominance_leq(&aq, &bq).unwrap() {
                assert!(sets[i].is_subset(&sets[j]), "{a:?} <= {b:?}");
            }
        }
    }
}

#[test]
fn hyperspecial_gl2() {
    let g = group(GroupTag::GL, 2);
    assert_eq!(g.admissible_set(&[1, 0], Level::Hyperspecial).unwrap(), AdmissibleSet::Hyperspecial(vec![vec![1, 0]]));
}

#[test]
fn sigma_class_examples_gl2() {
    let g = group(GroupTag::GL, 2);
    let sig = Sigma::trivial(g.datum());
    let part = g.enumerate_sigma_classes(&SigmaClassOptions::new(1), &sig).unwrap();
    let s = g.weyl_from_word(&[0]).unwrap();
    let b = |l: Vec<i64>, w| part.block_of(&g.element(l, w).unwrap()).unwrap();
    assert_eq!(b(vec![1, 0], WeylElem::IDENTITY), b(vec![0, 1], WeylElem::IDENTITY));
    assert_ne!(b(vec![1, 0], WeylElem::IDENTITY), b(vec![1, 0], s));
    let part2 = g.enumerate_sigma_classes(&SigmaClassOptions::new(2), &sig).unwrap();
    let b2 = |l: Vec<i64>, w| part2.block_of(&g.element(l, w).unwrap()).unwrap();
    assert_eq!(b2(vec![1, 0], s), b2(vec![0, 1], s));
    for blk in &part.blocks {
        for x in &blk.members {
            let nu = g.newton_point(x, &sig).unwrap();
            assert_eq!(nu.dominant, blk.nu_dominant);
            assert_eq!(g.kottwitz_sigma(x, &sig).unwrap(), blk.kappa);
        }
    }
}

#[test]
fn kottwitz_examples() {
    let g = group(GroupTag::GL, 2);
    let x = g.element(vec![1, 0], g.weyl_from_word(&[0]).unwrap()).unwrap();
    let lift = g.decent_representative(&x).unwrap().lift;
    let det_val: i64 = lift.exponents().iter().sum();
    assert_eq!(g.kottwitz(&x).unwrap().value, vec![det_val.into()]);
    for (tag, n) in [(GroupTag::SL, 2), (GroupTag::Sp, 4)] {
        let h = group(tag, n);
        for y in h.elements_up_to_length(2, &h.default_kappa_reps().unwrap(), 1000).unwrap() {
            assert!(h.kottwitz(&y).unwrap().value.is_empty() || h.kottwitz(&y).unwrap().value.iter().all(|v| *v == 0.into()));
        }
    }
}

#[test]
fn decency_for_small_gl() {
    for n in 2..=4 {
        let g = group(GroupTag::GL, n);
        let reps = vec![vec![0; n], {
            let mut v = vec![0; n];
            v[0] = 1;
            v
        }];
        for x in g.elements_up_to_length(3, &reps, 100_000).unwrap() {
            let lift = g.decent_representative(&x).unwrap();
            let mut slopes = slopes_monomial(&lift.lift);
            slopes.sort();
            let mut nu = lift.newton.vector.clone();
            nu.sort();
            assert_eq!(slopes, nu, "{x:?}");
        }
    }
}

fn arb_gl3_element() -> impl Strategy<Value = (Vec<i64>, usize)> {
    (prop::collection::vec(-2i64..=2, 3), 0usize..6)
}

fn gl3_el(g: &AffineWeyl, (l, w): &(Vec<i64>, usize)) -> Element {
    g.element(l.clone(), g.datum().weyl().elements().nth(*w).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sigma_conjugation_preserves_invariants(a in arb_gl3_element(), b in arb_gl3_element()) {
        let g = gl3();
        let sig = Sigma::trivial(g.datum());
        let (h, x) = (gl3_el(g, &a), gl3_el(g, &b));
        let y = g.sigma_conjugate(&h, &x, &sig).unwrap();
        prop_assert_eq!(g.newton_point(&y, &sig).unwrap().dominant, g.newton_point(&x, &sig).unwrap().dominant);
        prop_assert_eq!(g.kottwitz_sigma(&y, &sig).unwrap(), g.kottwitz_sigma(&x, &sig).unwrap());
    }

    #[test]
    fn kottwitz_is_additive(a in arb_gl3_element(), b in arb_gl3_element()) {
        let g = gl3();
        let (x, y) = (gl3_el(g, &a), gl3_el(g, &b));
        let kx = g.kottwitz(&x).unwrap().value;
        let ky = g.kottwitz(&y).unwrap().value;
        let kxy = g.kottwitz(&g.compose(&x, &y).unwrap()).unwrap().value;
        let sum: Vec<_> = kx.iter().zip(&ky).map(|(a, b)| a + b).collect();
        prop_assert_eq!(kxy, sum);
    }

    #[test]
    fn inverse_and_length(a in arb_gl3_element()) {
        let g = gl3();
        let x = gl3_el(g, &a);
        let xi = g.invert(&x).unwrap();
        prop_assert_eq!(g.compose(&x, &xi).unwrap(), g.identity());
        prop_assert_eq!(g.length(&x), g.length(&xi));
        let (word, _) = g.reduced_word(&x).unwrap();
        prop_assert_eq!(word.len(), g.length(&x));
    }
}

#[test]
fn newton_class_is_sigma_stable_gl3() {
    // σ = −w₀ on X_*, which permutes the simple coroots
    let g = gl3();
    let d = g.datum();
    let sigma = Sigma::new(d, vec![vec![0, 0, -1], vec![0, -1, 0], vec![-1, 0, 0]]).unwrap();
    for x in g.elements_up_to_length(2, &g.default_kappa_reps().unwrap(), 10_000).unwrap() {
        let nu = g.newton_point(&x, &sigma).unwrap();
        let m = sigma.matrix();
        let snu: Vec<Q> = (0..3).map(|i| (0..3).map(|j| q(m[i * 3 + j]) * &nu.vector[j]).sum()).collect();
        assert_eq!(d.dominant_rep(&snu).unwrap(), nu.dominant, "{x:?}");
    }
}
