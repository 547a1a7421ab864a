use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use leafcalc::affine_weyl::{AffineWeyl, Element, Sigma, SigmaClassOptions};
use leafcalc::newton::{cross_check_dimension, leaf_report, neutral_acceptable};
use leafcalc::rational::{q, Q};
use leafcalc::root_datum::{GroupTag, RootDatum};
use leafcalc::Exec;
use num_traits::Signed;
use proptest::prelude::*;

fn group(tag: GroupTag, n: usize) -> AffineWeyl {
    AffineWeyl::new(Arc::new(RootDatum::build_classical(tag, n).unwrap())).unwrap()
}

fn gl3() -> &'static AffineWeyl {
    static G: OnceLock<AffineWeyl> = OnceLock::new();
    G.get_or_init(|| group(GroupTag::GL, 3))
}

fn small_elements(g: &AffineWeyl, cap: usize) -> Vec<Element> {
    g.elements_up_to_length(cap, &g.default_kappa_reps().unwrap(), 100_000).unwrap()
}

#[test]
fn worked_values() {
    let sig = |g: &AffineWeyl| Sigma::trivial(g.datum());
    let gl2 = group(GroupTag::GL, 2);
    assert_eq!(leaf_report(&gl2, &gl2.translation(vec![1, 0]).unwrap(), &sig(&gl2)).unwrap().leaf_dim, 1);
    let gl3 = gl3();
    assert_eq!(leaf_report(gl3, &gl3.translation(vec![1, 0, 0]).unwrap(), &sig(gl3)).unwrap().leaf_dim, 2);
    let gsp4 = group(GroupTag::GSp, 4);
    assert_eq!(leaf_report(&gsp4, &gsp4.translation(vec![1, 1, 1]).unwrap(), &sig(&gsp4)).unwrap().leaf_dim, 3);
}

#[test]
fn gl_leaf_and_centralizer_dimensions() {
    // for GL_n: ⟨2ρ, ν⟩ = Σ_{i<j} |ν_i − ν_j| and dim J_b = Σ m², m the slope multiplicities
    for n in 2..=4 {
        let g = group(GroupTag::GL, n);
        let sig = Sigma::trivial(g.datum());
        for x in small_elements(&g, 2) {
            let r = leaf_report(&g, &x, &sig).unwrap();
            let nu = &r.nu_dominant;
            let mut pairs = Q::from_integer(0.into());
            for i in 0..n {
                for j in i + 1..n {
                    pairs += (&nu[i] - &nu[j]).abs();
                }
            }
            assert_eq!(q(r.leaf_dim as i64), pairs, "{x:?}");
            let mut mult: BTreeMap<&Q, u64> = BTreeMap::new();
            for v in nu {
                *mult.entry(v).or_default() += 1;
            }
            assert_eq!(r.jb_dim, mult.values().map(|m| m * m).sum::<u64>(), "{x:?}");
            assert_eq!(r.basic, mult.len() == 1);
        }
    }
}

#[test]
fn leaf_dimension_is_constant_on_sigma_classes() {
    for (tag, n, cap) in [(GroupTag::GL, 2, 2), (GroupTag::GL, 3, 1), (GroupTag::Sp, 4, 1), (GroupTag::GSp, 4, 1)] {
        let g = group(tag, n);
        let sig = Sigma::trivial(g.datum());
        let part = g.enumerate_sigma_classes(&SigmaClassOptions::new(cap), &sig).unwrap();
        for b in &part.blocks {
            let dims: Vec<u64> = b.members.iter().map(|x| leaf_report(&g, x, &sig).unwrap().leaf_dim).collect();
            assert!(dims.windows(2).all(|w| w[0] == w[1]), "{} {:?}", g.datum().label(), b.members);
        }
    }
}

#[test]
fn cross_check_passes_on_small_lengths() {
    for (tag, n) in [(GroupTag::GL, 2), (GroupTag::GL, 3), (GroupTag::Sp, 4), (GroupTag::GSp, 4)] {
        let g = group(tag, n);
        let xs = small_elements(&g, 2);
        let rep = cross_check_dimension(&g, &xs, &Sigma::trivial(g.datum())).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.rows.len(), xs.len());
    }
}

#[test]
fn parallel_reports_match_sequential() {
    let g = gl3();
    let sig = Sigma::trivial(g.datum());
    let xs = small_elements(g, 2);
    let a = leafcalc::newton::leaf_reports_with(Exec::Sequential, g, &xs, &sig).unwrap();
    let b = leafcalc::newton::leaf_reports_with(Exec::Parallel, g, &xs, &sig).unwrap();
    assert_eq!(a, b);
}

fn arb_gl3_element() -> impl Strategy<Value = (Vec<i64>, usize)> {
    (prop::collection::vec(-2i64..=2, 3), 0usize..6)
}

fn gl3_el(g: &AffineWeyl, (l, w): &(Vec<i64>, usize)) -> Element {
    g.element(l.clone(), g.datum().weyl().elements().nth(*w).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn acceptability_and_leaf_are_conjugation_invariant(
        a in arb_gl3_element(),
        b in arb_gl3_element(),
        mu in prop::sample::select(vec![vec![1i64, 0, 0], vec![1, 1, 0], vec![2, 0, 0], vec![1, 0, -1]]),
    ) {
        let g = gl3();
        let sig = Sigma::trivial(g.datum());
        let (h, x) = (gl3_el(g, &a), gl3_el(g, &b));
        let y = g.sigma_conjugate(&h, &x, &sig).unwrap();
        prop_assert_eq!(neutral_acceptable(g, &x, &mu, &sig).unwrap(), neutral_acceptable(g, &y, &mu, &sig).unwrap());
        prop_assert_eq!(leaf_report(g, &x, &sig).unwrap().leaf_dim, leaf_report(g, &y, &sig).unwrap().leaf_dim);
    }
}
