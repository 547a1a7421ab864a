use std::sync::Arc;

use leafcalc::affine_weyl::{AffineWeyl, Element, Sigma};
use leafcalc::isocrystal::{
    csd_rational, is_completely_slope_divisible, nonneg_slope_dim, slopes_charpoly, slopes_monomial, slopes_via_weights,
    split_by_eigenbasis, Isocrystal, MonomialIsocrystal, RationalIsocrystal, WeightedRep,
};
use leafcalc::linalg::QMatrix;
use leafcalc::rational::{p_pow, q, qf, Q};
use leafcalc::root_datum::{GroupTag, RootDatum};
use proptest::prelude::*;

fn arb_monomial(max_n: usize, max_r: u32) -> impl Strategy<Value = MonomialIsocrystal> {
    (1..=max_n, 1..=max_r).prop_flat_map(|(n, r)| {
        (Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), prop::collection::vec(-2i64..=2, n), Just(r))
            .prop_map(|(perm, exps, r)| MonomialIsocrystal::new(perm, exps, r).unwrap())
    })
}

fn sorted(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn monomial_slopes_match_charpoly(m in arb_monomial(5, 3), p in prop::sample::select(vec![2u64, 3, 5])) {
        let r = m.frobenius_power() as usize;
        let big = RationalIsocrystal::new(m.restriction_of_scalars(p), p).unwrap();
        let expect: Vec<Q> = slopes_monomial(&m).into_iter().flat_map(|s| std::iter::repeat_n(s, r)).collect();
        prop_assert_eq!(slopes_charpoly(&big).unwrap(), sorted(expect));
    }

    #[test]
    fn tensor_square_slopes_are_pairwise_sums(m in arb_monomial(3, 2)) {
        let s = slopes_monomial(&m);
        let pairs: Vec<Q> = s.iter().flat_map(|a| s.iter().map(move |b| a + b)).collect();
        prop_assert_eq!(slopes_monomial(&m.tensor_square()), sorted(pairs));
    }
}

fn random_elements(g: &AffineWeyl, count: usize, seed: u64) -> Vec<Element> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = g.datum().cochar_rank();
    let ws: Vec<_> = g.datum().weyl().elements().collect();
    (0..count)
        .map(|_| {
            let l: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            g.element(l, ws[rng.gen_range(0..ws.len())]).unwrap()
        })
        .collect()
}

#[test]
fn weight_formula_matches_decent_lift() {
    for n in 2..=4 {
        let g = AffineWeyl::new(Arc::new(RootDatum::build_classical(GroupTag::GL, n).unwrap())).unwrap();
        let d = g.datum();
        let std = WeightedRep::standard(d).unwrap();
        let sig = Sigma::trivial(d);
        for x in random_elements(&g, 500, n as u64) {
            let nu = g.newton_point(&x, &sig).unwrap();
            let lift = g.decent_representative(&x).unwrap().lift;
            assert_eq!(slopes_via_weights(d, &std, &nu).unwrap(), slopes_monomial(&lift), "{x:?}");
        }
    }
}

#[test]
fn adjoint_slopes_are_symmetric_and_count_the_leaf() {
    for (tag, n) in [(GroupTag::GL, 3), (GroupTag::Sp, 4), (GroupTag::GSp, 4)] {
        let g = AffineWeyl::new(Arc::new(RootDatum::build_classical(tag, n).unwrap())).unwrap();
        let d = g.datum();
        let adj = WeightedRep::adjoint(d);
        for x in random_elements(&g, 100, 7) {
            let nu = g.newton_point(&x, &Sigma::trivial(d)).unwrap();
            let slopes = slopes_via_weights(d, &adj, &nu).unwrap();
            let neg: Q = slopes.iter().filter(|s| **s < q(0)).map(|s| -s.clone()).sum();
            let pos: Q = slopes.iter().filter(|s| **s > q(0)).cloned().sum();
            assert_eq!(neg, pos);
            assert_eq!(q(nonneg_slope_dim(d, &nu.dominant).unwrap() as i64), pos);
        }
    }
}

#[test]
fn charpoly_examples() {
    let p = 3;
    let iso = |rows: &[&[i64]]| RationalIsocrystal::new(QMatrix::from_i64(rows), p).unwrap();
    assert_eq!(slopes_charpoly(&iso(&[&[0, 1], &[3, 0]])).unwrap(), vec![qf(1, 2), qf(1, 2)]);
    assert_eq!(slopes_charpoly(&iso(&[&[3, 0], &[0, 1]])).unwrap(), vec![q(0), q(1)]);
    assert_eq!(slopes_charpoly(&iso(&[&[3, 1], &[0, 1]])).unwrap(), vec![q(0), q(1)]);
}

fn triangular(p: u64, a: i64, b: i64, c: Q) -> (QMatrix, QMatrix) {
    let (pa, pb) = (p_pow(p, a), p_pow(p, b));
    let m = QMatrix::from_rows(vec![vec![pa.clone(), c.clone()], vec![q(0), pb.clone()]]).unwrap();
    let eig = QMatrix::from_rows(vec![vec![q(1), c], vec![q(0), pb - pa]]).unwrap();
    (m, eig)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn csd_matches_eigenbasis_oracle_2x2(
        p in prop::sample::select(vec![2u64, 3, 5]),
        a in 0i64..3,
        gap in 1i64..3,
        num in -9i64..=9,
        den_exp in 0i64..3,
        flip in any::<bool>(),
    ) {
        let (a, b) = if flip { (a + gap, a) } else { (a, a + gap) };
        let c = q(num) * p_pow(p, -den_exp);
        let (m, eig) = triangular(p, a, b, c);
        let iso = RationalIsocrystal::new(m, p).unwrap();
        let report = csd_rational(&iso).unwrap();
        prop_assert_eq!(report.holds(), split_by_eigenbasis(&eig, &[a, b], p).unwrap());
        prop_assert!(report.reverify(&iso).unwrap());
    }

    #[test]
    fn csd_matches_eigenbasis_oracle_3x3(
        p in prop::sample::select(vec![2u64, 3]),
        exps in prop::collection::vec(0i64..3, 3),
        u in prop::collection::vec(-3i64..=3, 9),
    ) {
        let rows: Vec<Vec<Q>> = u.chunks(3).map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let b = QMatrix::from_rows(rows).unwrap();
        prop_assume!(b.det() != q(0));
        let d = QMatrix::diagonal(&exps.iter().map(|&e| p_pow(p, e)).collect::<Vec<_>>());
        let m = b.mul(&d).mul(&b.inverse().unwrap());
        let iso = RationalIsocrystal::new(m, p).unwrap();
        let report = is_completely_slope_divisible(&Isocrystal::Rational(iso.clone())).unwrap();
        prop_assert_eq!(report.holds(), split_by_eigenbasis(&b, &exps, p).unwrap());
        prop_assert!(report.reverify(&iso).unwrap());
    }
}

#[test]
fn monomial_data_are_always_split() {
    let m = MonomialIsocrystal::new(vec![1, 0], vec![1, 0], 1).unwrap();
    let r = is_completely_slope_divisible(&Isocrystal::Monomial(m)).unwrap();
    assert!(r.holds());
    assert_eq!(r.period, 2);
    assert_eq!(r.slopes, vec![qf(1, 2), qf(1, 2)]);
}
