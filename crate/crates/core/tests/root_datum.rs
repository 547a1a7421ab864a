use leafcalc::rational::{q, Q};
use leafcalc::root_datum::{GroupTag, LatticeAction, RootDatum, WeylElem};
use proptest::prelude::*;
use std::sync::OnceLock;

fn data() -> &'static [RootDatum] {
    static DATA: OnceLock<Vec<RootDatum>> = OnceLock::new();
    DATA.get_or_init(|| {
    [(GroupTag::GL, 2), (GroupTag::GL, 3), (GroupTag::GL, 4), (GroupTag::SL, 3), (GroupTag::Sp, 4), (GroupTag::Sp, 6), (GroupTag::GSp, 4)]
        .into_iter()
        .map(|(t, n)| RootDatum::build_classical(t, n).unwrap())
        .collect()
    })
}

#[test]
fn weyl_orders_match_closed_forms() {
    let orders = [2, 6, 24, 6, 8, 48, 8];
    for (d, expect) in data().iter().zip(orders) {
        assert_eq!(d.weyl().order(), expect, "{}", d.label());
    }
}

#[test]
fn two_rho_is_the_positive_root_sum() {
    for d in data() {
        let mut sum = vec![0i64; d.roots()[0].len()];
        for a in d.positive_roots() {
            for (s, x) in sum.iter_mut().zip(&d.roots()[a]) {
                *s += x;
            }
        }
        assert_eq!(d.two_rho(), sum.as_slice(), "{}", d.label());
    }
}

#[test]
fn dominance_is_a_partial_order_on_gl3() {
    let d = RootDatum::build_classical(GroupTag::GL, 3).unwrap();
    let mut dom: Vec<Vec<Q>> = Vec::new();
    for a in -2..=2 {
        for b in -2..=a {
            for c in -2..=b {
                dom.push(vec![q(a), q(b), q(c)]);
            }
        }
    }
    let leq = |x: &Vec<Q>, y: &Vec<Q>| d.dominance_leq(x, y).unwrap();
    for x in &dom {
        assert!(leq(x, x));
        for y in &dom {
            if leq(x, y) && leq(y, x) {
                assert_eq!(x, y);
            }
            for z in &dom {
                if leq(x, y) && leq(y, z) {
                    assert!(leq(x, z));
                }
            }
        }
    }
}

#[test]
fn coinvariant_rank_nullity() {
    let swap = vec![vec![vec![0, 1], vec![1, 0]]];
    let d = RootDatum::build_classical(GroupTag::GL, 2).unwrap();
    let act = LatticeAction::new(&d, swap).unwrap();
    let c = d.coinvariants(&act).unwrap();
    assert_eq!(c.free_rank + c.relation_rank, 2);
    for d in data() {
        let c = d.coinvariants(&LatticeAction::trivial()).unwrap();
        assert_eq!(c.free_rank + c.relation_rank, d.rank());
    }
}

fn arb_case() -> impl Strategy<Value = (usize, Vec<usize>, Vec<(i64, i64)>)> {
    (0usize..7, prop::collection::vec(0usize..6, 0..12), prop::collection::vec((-6i64..=6, 1i64..=3), 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dominant_rep_is_weyl_invariant((which, word, raw) in arb_case()) {
        let d = &data()[which];
        let n = d.cochar_rank();
        let v: Vec<Q> = raw.iter().take(n).map(|&(a, b)| Q::new(a.into(), b.into())).collect();
        let l = d.simple_roots().len();
        let w = word.iter().fold(WeylElem::IDENTITY, |acc, &i| d.weyl().compose(acc, d.weyl().simple(i % l)));
        let wv = d.act_cochar_q(w, &v);
        let dom = d.dominant_rep(&v).unwrap();
        prop_assert_eq!(d.dominant_rep(&wv).unwrap(), dom.clone());
        prop_assert!(d.is_dominant(&dom));
        prop_assert!(d.pair_two_rho(&dom) >= q(0));
    }
}
