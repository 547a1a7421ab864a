use std::collections::{BTreeSet, HashSet};

use leafcalc::adlv::{adlv_points, adlv_points_with, enumerate_lattices, enumerate_lattices_with, relative_position, CsdStatus, LatticeModel};
use leafcalc::isocrystal::{MonomialIsocrystal, RationalIsocrystal};
use leafcalc::linalg::QMatrix;
use leafcalc::rational::{is_p_integral, min_val, q, val};
use leafcalc::{Error, Exec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Subgroup = Vec<u64>;

/// Subgroups of `(Z/p^k)^n` as bitsets over the `p^{kn}` elements, grown
/// from `{0}` by adjoining one element at a time.
fn subgroup_oracle(n: usize, p: u64, k: u32) -> HashSet<Subgroup> {
    let m = p.pow(k);
    let size = m.pow(n as u32) as usize;
    let decode = |mut x: usize| -> Vec<u64> {
        (0..n)
            .map(|_| {
                let d = x as u64 % m;
                x /= m as usize;
                d
            })
            .collect()
    };
    let encode = |v: &[u64]| v.iter().rev().fold(0usize, |acc, &d| acc * m as usize + (d % m) as usize);
    let words = size.div_ceil(64);
    let digits: Vec<Vec<u64>> = (0..size).map(decode).collect();
    let add = |a: usize, b: usize| -> usize {
        let s: Vec<u64> = digits[a].iter().zip(&digits[b]).map(|(x, y)| x + y).collect();
        encode(&s)
    };
    let members = |set: &Subgroup| -> Vec<usize> { (0..size).filter(|&i| set[i / 64] >> (i % 64) & 1 == 1).collect() };
    // S + <g> is already a subgroup
    let adjoin = |set: &Subgroup, g: usize| -> Subgroup {
        let mut multiples = vec![0usize];
        let mut h = g;
        while h != 0 {
            multiples.push(h);
            h = add(h, g);
        }
        let mut out = vec![0u64; words];
        for a in members(set) {
            for &h in &multiples {
                let i = add(a, h);
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    };
    let mut zero = vec![0u64; words];
    zero[0] = 1;
    let mut seen: HashSet<Subgroup> = HashSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(s) = frontier.pop() {
        for g in 0..size {
            if s[g / 64] >> (g % 64) & 1 == 1 {
                continue;
            }
            let t = adjoin(&s, g);
            if seen.insert(t.clone()) {
                frontier.push(t);
            }
        }
    }
    seen
}

fn subgroup_of(l: &LatticeModel) -> Subgroup {
    let (n, p, k) = (l.size(), l.prime(), 2 * l.depth());
    let m = p.pow(k);
    let size = m.pow(n as u32) as usize;
    let mut set = vec![0u64; size.div_ceil(64)];
    let cols: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| l.form()[i][j]).collect()).collect();
    // all combinations Σ c_j col_j with c_j in [0, m)
    let mut coeffs = vec![0u64; n];
    loop {
        let v: Vec<u64> = (0..n)
            .map(|i| (0..n).map(|j| coeffs[j] as i64 * cols[j][i]).sum::<i64>().rem_euclid(m as i64) as u64)
            .collect();
        let c = v.iter().rev().fold(0usize, |acc, &d| acc * m as usize + d as usize);
        set[c / 64] |= 1 << (c % 64);
        let mut i = 0;
        while i < n {
            coeffs[i] += 1;
            if coeffs[i] < m {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    set
}

#[test]
fn enumeration_matches_subgroup_oracle() {
    for (n, p, depth) in [(1, 2, 1), (1, 3, 2), (2, 2, 1), (2, 3, 1), (2, 2, 2), (3, 2, 1)] {
        let lattices = enumerate_lattices(n, p, depth).unwrap();
        let ours: HashSet<Subgroup> = lattices.iter().map(subgroup_of).collect();
        assert_eq!(ours.len(), lattices.len(), "duplicate models n={n} p={p} N={depth}");
        assert_eq!(ours, subgroup_oracle(n, p, 2 * depth), "n={n} p={p} N={depth}");
    }
}

#[test]
fn sequential_and_parallel_enumeration_agree() {
    let a = enumerate_lattices_with(Exec::Sequential, 2, 3, 2, 1 << 30).unwrap();
    let b = enumerate_lattices_with(Exec::Parallel, 2, 3, 2, 1 << 30).unwrap();
    assert_eq!(a, b);
}

#[test]
fn budget_limits() {
    assert!(matches!(enumerate_lattices(2, 5, 1), Err(Error::Budget { .. })));
    assert!(matches!(enumerate_lattices(4, 2, 1), Err(Error::Budget { .. })));
    assert!(matches!(enumerate_lattices(2, 2, 3), Err(Error::Budget { .. })));
    assert!(matches!(enumerate_lattices_with(Exec::Sequential, 3, 3, 2, 10), Err(Error::Budget { .. })));
    let b = MonomialIsocrystal::new(vec![0, 1], vec![1, 0], 2).unwrap();
    assert!(matches!(adlv_points(&b, &[1, 0], 2, 1), Err(Error::Budget { .. })));
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    let mut g: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..6 {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let c = rng.gen_range(-3..=3);
        for row in g.iter_mut() {
            row[j] += c * row[i];
        }
    }
    g
}

#[test]
fn relative_position_is_invariant_and_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, p) in [(2, 2), (2, 3), (3, 2)] {
        let ls = enumerate_lattices(n, p, 1).unwrap();
        for _ in 0..50 {
            let (a, b) = (&ls[rng.gen_range(0..ls.len())], &ls[rng.gen_range(0..ls.len())]);
            let inv = relative_position(a, b).unwrap();
            let g = random_unimodular(&mut rng, n);
            assert_eq!(relative_position(&a.transform(&g).unwrap(), &b.transform(&g).unwrap()).unwrap(), inv);
            let back: Vec<i64> = inv.iter().rev().map(|x| -x).collect();
            assert_eq!(relative_position(b, a).unwrap(), back);
            // oracle: the sum is the index, the minimum is the least entry valuation
            let t = a.basis_matrix().inverse().unwrap().mul(&b.basis_matrix());
            assert_eq!(inv.iter().sum::<i64>(), val(&t.det(), p).unwrap());
            assert_eq!(*inv.last().unwrap(), min_val(t.entries(), p).unwrap());
        }
    }
}

/// `inv(L, bL) = (1^k, 0^{n−k})` iff `b` is integral on `L`, `p b⁻¹` is
/// integral on `L` and `v(det b) = k`.
fn minuscule_oracle(l: &LatticeModel, b: &QMatrix, k: i64) -> bool {
    let p = l.prime();
    let g = l.basis_matrix();
    let m = g.inverse().unwrap().mul(b).mul(&g);
    let pm_inv = m.inverse().unwrap().scale(&q(p as i64));
    m.entries().iter().all(|x| is_p_integral(x, p))
        && pm_inv.entries().iter().all(|x| is_p_integral(x, p))
        && val(&m.det(), p) == Some(k)
}

#[test]
fn points_match_the_minuscule_oracle() {
    let cases: Vec<(Vec<usize>, Vec<i64>, Vec<i64>)> = vec![
        (vec![0, 1], vec![1, 0], vec![1, 0]),
        (vec![1, 0], vec![1, 0], vec![1, 0]),
        (vec![1, 0], vec![0, 1], vec![1, 0]),
        (vec![0, 1], vec![2, -1], vec![1, 0]),
        (vec![1, 2, 0], vec![1, 0, 0], vec![1, 0, 0]),
        (vec![1, 2, 0], vec![1, 1, 0], vec![1, 1, 0]),
        (vec![0, 2, 1], vec![1, 0, 0], vec![1, 0, 0]),
    ];
    for p in [2, 3] {
        for (perm, exps, mu) in &cases {
            let b = MonomialIsocrystal::new(perm.clone(), exps.clone(), 1).unwrap();
            let k: i64 = mu.iter().sum();
            let depths: &[u32] = if perm.len() == 3 { &[1] } else { &[1, 2] };
            for &depth in depths {
                let census = adlv_points(&b, mu, p, depth).unwrap();
                let got: BTreeSet<LatticeModel> = census.points.iter().map(|pt| pt.lattice.clone()).collect();
                let bm = b.to_matrix(p);
                let want: BTreeSet<LatticeModel> = enumerate_lattices(perm.len(), p, depth)
                    .unwrap()
                    .into_iter()
                    .filter(|l| minuscule_oracle(l, &bm, k))
                    .collect();
                assert_eq!(got, want, "b={b:?} p={p} N={depth}");
            }
        }
    }
}

#[test]
fn unacceptable_translation_has_no_points() {
    let b = MonomialIsocrystal::diagonal(vec![2, -1]);
    for p in [2, 3] {
        for depth in [1, 2] {
            assert!(adlv_points(&b, &[1, 0], p, depth).unwrap().points.is_empty());
        }
    }
}

#[test]
fn certificates_reverify() {
    for (perm, exps) in [(vec![1, 0], vec![1, 0]), (vec![0, 1], vec![1, 0]), (vec![1, 0], vec![0, 1])] {
        let b = MonomialIsocrystal::new(perm, exps, 1).unwrap();
        for p in [2, 3] {
            let census = adlv_points_with(Exec::Sequential, &b, &[1, 0], p, 2).unwrap();
            assert!(!census.points.is_empty());
            for pt in &census.points {
                let CsdStatus::Certified(report) = &pt.csd else { panic!("inconclusive at {:?}", pt.lattice) };
                let iso = RationalIsocrystal::new(pt.module.clone(), p).unwrap();
                assert!(report.reverify(&iso).unwrap());
                assert_eq!(pt.kappa, 1);
            }
        }
    }
}

#[test]
fn rank_one_restriction_of_scalars() {
    let b = MonomialIsocrystal::new(vec![0], vec![1], 2).unwrap();
    let census = adlv_points(&b, &[1], 2, 1).unwrap();
    assert_eq!(census.mu, vec![1, 1]);
    let direct = adlv_points(&MonomialIsocrystal::new(vec![1, 0], vec![0, 1], 1).unwrap(), &[1, 1], 2, 1).unwrap();
    assert_eq!(census.points.len(), direct.points.len());
}
