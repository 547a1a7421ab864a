//! Based root data for the classical groups in explicit coordinates.
//!
//! Characters and cocharacters are integer vectors in a common ambient
//! coordinate space `Z^m`; the pairing is `<chi, lambda> = chi^T P lambda`
//! for an integer matrix `P` (the identity for every classical build).
//! `SL(n)` keeps the `GL(n)` coordinates and records the coroot lattice
//! (sum-zero vectors) as its cocharacter lattice.

use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{smith_int, IMatrix, QMatrix};
use crate::rational::{q, Q};

/// Hard cap on the size of an enumerated finite Weyl group.
pub const WEYL_ELEMENT_CAP: usize = 5040;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    GL,
    SL,
    Sp,
    GSp,
    Custom,
}

impl GroupTag {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gl" => Ok(GroupTag::GL),
            "sl" => Ok(GroupTag::SL),
            "sp" => Ok(GroupTag::Sp),
            "gsp" => Ok(GroupTag::GSp),
            "custom" => Ok(GroupTag::Custom),
            other => Err(Error::Config(format!("unknown group tag {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupTag::GL => "GL",
            GroupTag::SL => "SL",
            GroupTag::Sp => "Sp",
            GroupTag::GSp => "GSp",
            GroupTag::Custom => "custom",
        }
    }
}

/// Index of an element of the finite Weyl group of a datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElem(pub u32);

impl WeylElem {
    pub const IDENTITY: WeylElem = WeylElem(0);
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The finite Weyl group, enumerated once with its multiplication table.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    /// cocharacter action, row-major `m x m`
    cochar: Vec<Vec<i64>>,
    /// character action, row-major `m x m`
    chars: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, u32>,
    table: Vec<u32>,
    inverse: Vec<u32>,
    /// root permutation: `root_perm[w][a]` is the index of `w(alpha_a)`
    root_perm: Vec<Vec<u32>>,
    simple_gens: Vec<u32>,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.cochar.len()
    }

    pub fn compose(&self, a: WeylElem, b: WeylElem) -> WeylElem {
        WeylElem(self.table[a.index() * self.order() + b.index()])
    }

    pub fn inverse(&self, a: WeylElem) -> WeylElem {
        WeylElem(self.inverse[a.index()])
    }

    pub fn simple(&self, i: usize) -> WeylElem {
        WeylElem(self.simple_gens[i])
    }

    pub fn cochar_matrix(&self, w: WeylElem) -> &[i64] {
        &self.cochar[w.index()]
    }

    pub fn char_matrix(&self, w: WeylElem) -> &[i64] {
        &self.chars[w.index()]
    }

    pub fn lookup(&self, cochar_matrix: &[i64]) -> Option<WeylElem> {
        self.index.get(cochar_matrix).map(|&i| WeylElem(i))
    }

    pub fn root_image(&self, w: WeylElem, root: usize) -> usize {
        self.root_perm[w.index()][root] as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = WeylElem> {
        (0..self.order() as u32).map(WeylElem)
    }
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    tag: GroupTag,
    n: usize,
    rank: usize,
    cochar_rank: usize,
    roots: Vec<Vec<i64>>,
    coroots: Vec<Vec<i64>>,
    pairing: Vec<Vec<i64>>,
    positive: Vec<bool>,
    simple: Vec<usize>,
    root_index: HashMap<Vec<i64>, usize>,
    lattice_basis: Option<Vec<Vec<i64>>>,
    two_rho: Vec<i64>,
    std_weights: Option<Vec<Vec<i64>>>,
    /// highest root of each irreducible component
    highest: Vec<usize>,
    weyl: WeylGroup,
    id: u64,
}

impl PartialEq for RootDatum {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.roots == other.roots
            && self.coroots == other.coroots
            && self.pairing == other.pairing
    }
}

impl Eq for RootDatum {}

fn mat_vec(m: &[i64], dim: usize, v: &[i64]) -> Vec<i64> {
    (0..dim).map(|i| (0..dim).map(|j| m[i * dim + j] * v[j]).sum()).collect()
}

fn mat_mul(a: &[i64], b: &[i64], dim: usize) -> Vec<i64> {
    let mut out = vec![0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let x = a[i * dim + k];
            if x == 0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += x * b[k * dim + j];
            }
        }
    }
    out
}

fn identity_flat(dim: usize) -> Vec<i64> {
    let mut m = vec![0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1;
    }
    m
}

fn unit(dim: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

impl RootDatum {
    /// Standard based root datum of a classical group.
    /// `n` is the matrix size: `GL(n)`, `SL(n)`, `Sp(n)`, `GSp(n)` with `n = 2g`.
    pub fn build_classical(tag: GroupTag, n: usize) -> Result<Self> {
        let mut roots = Vec::new();
        let mut coroots = Vec::new();
        let (dim, std_weights, lattice_basis) = match tag {
            GroupTag::GL | GroupTag::SL => {
                if n == 0 {
                    return Err(Error::Config(format!("{}({n}) needs n >= 1", tag.name())));
                }
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let mut r = vec![0; n];
                            r[i] = 1;
                            r[j] = -1;
                            roots.push(r.clone());
                            coroots.push(r);
                        }
                    }
                }
                let weights = (0..n).map(|i| unit(n, i)).collect();
                let basis = (tag == GroupTag::SL).then(|| {
                    (0..n - 1)
                        .map(|i| {
                            let mut v = vec![0; n];
                            v[i] = 1;
                            v[i + 1] = -1;
                            v
                        })
                        .collect()
                });
                (n, weights, basis)
            }
            GroupTag::Sp | GroupTag::GSp => {
                if n < 2 || !n.is_multiple_of(2) {
                    return Err(Error::Config(format!("{}({n}) needs an even n >= 2", tag.name())));
                }
                let g = n / 2;
                let dim = if tag == GroupTag::GSp { g + 1 } else { g };
                // similitude character f is the last coordinate for GSp
                let f = (tag == GroupTag::GSp).then_some(g);
                for i in 0..g {
                    for j in 0..g {
                        if i == j {
                            continue;
                        }
                        let mut r = vec![0; dim];
                        r[i] = 1;
                        r[j] = -1;
                        roots.push(r.clone());
                        coroots.push(r);
                    }
                    for j in i + 1..g {
                        for sign in [1, -1] {
                            let mut r = vec![0; dim];
                            r[i] = sign;
                            r[j] = sign;
                            let mut c = r.clone();
                            if let Some(f) = f {
                                r[f] = -sign;
                                c[f] = 0;
                            }
                            roots.push(r);
                            coroots.push(c);
                        }
                    }
                    for sign in [1, -1] {
                        let mut r = vec![0; dim];
                        r[i] = 2 * sign;
                        let mut c = vec![0; dim];
                        c[i] = sign;
                        if let Some(f) = f {
                            r[f] = -sign;
                        }
                        roots.push(r);
                        coroots.push(c);
                    }
                }
                let mut weights: Vec<Vec<i64>> = (0..g).map(|i| unit(dim, i)).collect();
                for i in 0..g {
                    let mut w = vec![0; dim];
                    w[i] = -1;
                    if let Some(f) = f {
                        w[f] = 1;
                    }
                    weights.push(w);
                }
                (dim, weights, None)
            }
            GroupTag::Custom => {
                return Err(Error::Config("custom data must be given explicitly".into()));
            }
        };
        let pairing = (0..dim).map(|i| unit(dim, i)).collect();
        Self::assemble(tag, n, dim, roots, coroots, pairing, lattice_basis, Some(std_weights))
    }

    /// A datum from explicit roots, coroots and an optional pairing matrix.
    pub fn custom(roots: Vec<Vec<i64>>, coroots: Vec<Vec<i64>>, pairing: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let dim = roots
            .first()
            .or(coroots.first())
            .map(Vec::len)
            .or_else(|| pairing.as_ref().map(Vec::len))
            .ok_or_else(|| Error::Config("custom datum needs roots or a pairing".into()))?;
        let pairing = pairing.unwrap_or_else(|| (0..dim).map(|i| unit(dim, i)).collect());
        Self::assemble(GroupTag::Custom, dim, dim, roots, coroots, pairing, None, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        tag: GroupTag,
        n: usize,
        dim: usize,
        roots: Vec<Vec<i64>>,
        coroots: Vec<Vec<i64>>,
        pairing: Vec<Vec<i64>>,
        lattice_basis: Option<Vec<Vec<i64>>>,
        std_weights: Option<Vec<Vec<i64>>>,
    ) -> Result<Self> {
        if roots.len() != coroots.len() {
            return Err(Error::Config("roots and coroots differ in number".into()));
        }
        if pairing.len() != dim || pairing.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("pairing must be a square matrix of the lattice dimension".into()));
        }
        if roots.iter().chain(&coroots).any(|r| r.len() != dim) {
            return Err(Error::Config("root vectors must match the lattice dimension".into()));
        }
        let pair = |chi: &[i64], lam: &[i64]| -> i64 {
            (0..dim).map(|a| (0..dim).map(|b| chi[a] * pairing[a][b] * lam[b]).sum::<i64>()).sum()
        };
        for (a, c) in roots.iter().zip(&coroots) {
            if pair(a, c) != 2 {
                return Err(Error::Config(format!("<alpha, alpha^vee> != 2 for root {a:?}")));
            }
        }
        let root_index: HashMap<Vec<i64>, usize> = roots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        if root_index.len() != roots.len() {
            return Err(Error::Config("duplicate roots".into()));
        }
        for r in &roots {
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            if !root_index.contains_key(&neg) {
                return Err(Error::Config(format!("negation of root {r:?} is not a root")));
            }
        }
        let rank = lattice_basis.as_ref().map_or(dim, Vec::len);

        // positivity from a regular functional on characters
        let regular = (1..=8)
            .map(|k: i64| {
                (0..dim).map(|i| (k.pow((dim - 1 - i) as u32)) * (dim as i64 + 1) + (i as i64 % 3)).collect::<Vec<i64>>()
            })
            .chain(std::iter::once((0..dim).map(|i| (dim - i) as i64).collect()))
            .find(|h| roots.iter().all(|r| pair(r, h) != 0))
            .ok_or_else(|| Error::Config("could not find a regular cocharacter".into()))?;
        // prefer the staircase functional when it is regular
        let staircase: Vec<i64> = (0..dim).map(|i| (dim - i) as i64).collect();
        let regular = if roots.iter().all(|r| pair(r, &staircase) != 0) { staircase } else { regular };
        let positive: Vec<bool> = roots.iter().map(|r| pair(r, &regular) > 0).collect();
        let pos_set: Vec<&Vec<i64>> = roots.iter().zip(&positive).filter(|(_, &p)| p).map(|(r, _)| r).collect();
        let mut simple: Vec<usize> = (0..roots.len())
            .filter(|&i| positive[i])
            .filter(|&i| {
                !pos_set.iter().any(|a| {
                    let diff: Vec<i64> = roots[i].iter().zip(a.iter()).map(|(x, y)| x - y).collect();
                    root_index.get(&diff).is_some_and(|&j| positive[j])
                })
            })
            .collect();
        simple.sort_by(|&a, &b| roots[b].cmp(&roots[a]));

        let mut two_rho = vec![0; dim];
        for (r, _) in roots.iter().zip(&positive).filter(|(_, &p)| p) {
            for (t, x) in two_rho.iter_mut().zip(r) {
                *t += x;
            }
        }

        let weyl = Self::enumerate_weyl(dim, &roots, &coroots, &pairing, &simple, &root_index)?;

        let mut datum = RootDatum {
            tag,
            n,
            rank,
            cochar_rank: dim,
            roots,
            coroots,
            pairing,
            positive,
            simple,
            root_index,
            lattice_basis,
            two_rho,
            std_weights,
            highest: Vec::new(),
            weyl,
            id: 0,
        };
        datum.highest = datum.compute_highest_roots();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        (tag, n, &datum.roots, &datum.coroots, &datum.pairing, &datum.lattice_basis).hash(&mut h);
        datum.id = h.finish();
        Ok(datum)
    }

    fn enumerate_weyl(
        dim: usize,
        roots: &[Vec<i64>],
        coroots: &[Vec<i64>],
        pairing: &[Vec<i64>],
        simple: &[usize],
        root_index: &HashMap<Vec<i64>, usize>,
    ) -> Result<WeylGroup> {
        // s(lambda) = lambda - <alpha, lambda> alpha^vee ; s(chi) = chi - <chi, alpha^vee> alpha
        let reflection = |a: usize| -> (Vec<i64>, Vec<i64>) {
            let alpha = &roots[a];
            let cov = &coroots[a];
            let alpha_p: Vec<i64> = (0..dim).map(|b| (0..dim).map(|c| alpha[c] * pairing[c][b]).sum()).collect();
            let p_cov: Vec<i64> = (0..dim).map(|c| (0..dim).map(|b| pairing[c][b] * cov[b]).sum()).collect();
            let mut co = identity_flat(dim);
            let mut ch = identity_flat(dim);
            for i in 0..dim {
                for j in 0..dim {
                    co[i * dim + j] -= cov[i] * alpha_p[j];
                    ch[i * dim + j] -= alpha[i] * p_cov[j];
                }
            }
            (co, ch)
        };
        let gens: Vec<(Vec<i64>, Vec<i64>)> = simple.iter().map(|&a| reflection(a)).collect();
        let mut cochar = vec![identity_flat(dim)];
        let mut chars = vec![identity_flat(dim)];
        let mut index = HashMap::new();
        index.insert(identity_flat(dim), 0u32);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (gco, gch) in &gens {
                let co = mat_mul(gco, &cochar[i], dim);
                if index.contains_key(&co) {
                    continue;
                }
                if cochar.len() >= WEYL_ELEMENT_CAP {
                    return Err(Error::Config(format!(
                        "Weyl group exceeds the enumeration cap of {WEYL_ELEMENT_CAP} elements"
                    )));
                }
                let ch = mat_mul(gch, &chars[i], dim);
                index.insert(co.clone(), cochar.len() as u32);
                cochar.push(co);
                chars.push(ch);
                queue.push_back(cochar.len() - 1);
            }
        }
        let order = cochar.len();
        let mut table = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                let prod = mat_mul(&cochar[a], &cochar[b], dim);
                table[a * order + b] = *index.get(&prod).ok_or_else(|| Error::Config("Weyl group not closed".into()))?;
            }
        }
        let inverse: Vec<u32> = (0..order)
            .map(|a| (0..order).find(|&b| table[a * order + b] == 0).unwrap() as u32)
            .collect();
        let mut root_perm = Vec::with_capacity(order);
        for ch in &chars {
            let perm: Result<Vec<u32>> = roots
                .iter()
                .map(|r| {
                    let img = mat_vec(ch, dim, r);
                    root_index
                        .get(&img)
                        .map(|&i| i as u32)
                        .ok_or_else(|| Error::Config("Weyl group does not permute the roots".into()))
                })
                .collect();
            root_perm.push(perm?);
        }
        let simple_gens = gens.iter().map(|(co, _)| index[co]).collect();
        Ok(WeylGroup { cochar, chars, index, table, inverse, root_perm, simple_gens })
    }

    fn compute_highest_roots(&self) -> Vec<usize> {
        // connected components of the Dynkin diagram
        let l = self.simple.len();
        let mut comp = vec![usize::MAX; l];
        let mut ncomp = 0;
        for s in 0..l {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = ncomp;
            while let Some(a) = stack.pop() {
                for b in 0..l {
                    if comp[b] == usize::MAX
                        && self.pair_int(&self.roots[self.simple[a]], &self.coroots[self.simple[b]]) != 0
                    {
                        comp[b] = ncomp;
                        stack.push(b);
                    }
                }
            }
            ncomp += 1;
        }
        let mut highest = Vec::new();
        for c in 0..ncomp {
            let mut best: Option<(Q, usize)> = None;
            for (i, _) in self.roots.iter().enumerate().filter(|(i, _)| self.positive[*i]) {
                let coords = self.simple_root_coords(i);
                let in_comp = coords.iter().enumerate().all(|(k, x)| x.is_zero() || comp[k] == c);
                if !in_comp {
                    continue;
                }
                let height: Q = coords.iter().cloned().sum();
                if best.as_ref().is_none_or(|(h, _)| height > *h) {
                    best = Some((height, i));
                }
            }
            if let Some((_, i)) = best {
                highest.push(i);
            }
        }
        highest
    }

    fn simple_root_coords(&self, root: usize) -> Vec<Q> {
        let cols: Vec<Vec<Q>> = self.simple.iter().map(|&s| self.roots[s].iter().map(|&x| q(x)).collect()).collect();
        let m = QMatrix::from_cols(&cols, self.cochar_rank);
        let b: Vec<Q> = self.roots[root].iter().map(|&x| q(x)).collect();
        m.solve(&b).expect("roots lie in the span of the simple roots")
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn size_param(&self) -> usize {
        self.n
    }

    /// Short name such as `GL3` or `GSp4`.
    pub fn label(&self) -> String {
        match self.tag {
            GroupTag::Custom => format!("custom{}", self.cochar_rank),
            t => format!("{}{}", t.name(), self.n),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Dimension of the maximal torus.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of ambient coordinates.
    pub fn cochar_rank(&self) -> usize {
        self.cochar_rank
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn coroots(&self) -> &[Vec<i64>] {
        &self.coroots
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    pub fn is_positive(&self, root: usize) -> bool {
        self.positive[root]
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roots.len()).filter(|&i| self.positive[i])
    }

    /// Indices (into [`roots`](Self::roots)) of the simple roots, in the
    /// order used for `s1, s2, ...`.
    pub fn simple_roots(&self) -> &[usize] {
        &self.simple
    }

    pub fn root_index(&self, chi: &[i64]) -> Option<usize> {
        self.root_index.get(chi).copied()
    }

    pub fn highest_roots(&self) -> &[usize] {
        &self.highest
    }

    pub fn two_rho(&self) -> &[i64] {
        &self.two_rho
    }

    pub fn weyl(&self) -> &WeylGroup {
        &self.weyl
    }

    /// Weights of the standard representation, when one is attached.
    pub fn standard_weights(&self) -> Option<&[Vec<i64>]> {
        self.std_weights.as_deref()
    }

    /// dim G = rank + |roots|.
    pub fn group_dim(&self) -> usize {
        self.rank + self.roots.len()
    }

    /// True when the roots span the character space rationally.
    pub fn is_semisimple(&self) -> bool {
        self.simple.len() == self.rank
    }

    pub fn pair_int(&self, chi: &[i64], lam: &[i64]) -> i64 {
        let d = self.cochar_rank;
        (0..d)
            .map(|a| if chi[a] == 0 { 0 } else { (0..d).map(|b| chi[a] * self.pairing[a][b] * lam[b]).sum() })
            .sum()
    }

    pub fn pair(&self, chi: &[i64], lam: &[Q]) -> Q {
        let d = self.cochar_rank;
        let mut acc = Q::zero();
        for a in 0..d {
            if chi[a] == 0 {
                continue;
            }
            for b in 0..d {
                let c = chi[a] * self.pairing[a][b];
                if c != 0 {
                    acc += &lam[b] * q(c);
                }
            }
        }
        acc
    }

    pub fn check_len(&self, v_len: usize) -> Result<()> {
        if v_len != self.cochar_rank {
            return Err(Error::Dimension { expected: self.cochar_rank, got: v_len });
        }
        Ok(())
    }

    /// Whether an integer vector lies in the cocharacter lattice.
    pub fn in_lattice(&self, lam: &[i64]) -> bool {
        lam.len() == self.cochar_rank && self.lattice_coords(lam).is_ok()
    }

    /// Coordinates of a cocharacter in the lattice basis.
    pub fn lattice_coords(&self, lam: &[i64]) -> Result<Vec<i64>> {
        self.check_len(lam.len())?;
        match &self.lattice_basis {
            None => Ok(lam.to_vec()),
            Some(basis) => {
                let cols: Vec<Vec<Q>> = basis.iter().map(|b| b.iter().map(|&x| q(x)).collect()).collect();
                let m = QMatrix::from_cols(&cols, self.cochar_rank);
                let rhs: Vec<Q> = lam.iter().map(|&x| q(x)).collect();
                let x = m
                    .solve(&rhs)
                    .ok_or_else(|| Error::Precondition(format!("{lam:?} is not in the cocharacter lattice")))?;
                x.iter()
                    .map(|c| {
                        if c.is_integer() {
                            Ok(c.to_integer().to_i64().unwrap())
                        } else {
                            Err(Error::Precondition(format!("{lam:?} is not in the cocharacter lattice")))
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn lattice_basis(&self) -> Vec<Vec<i64>> {
        self.lattice_basis.clone().unwrap_or_else(|| (0..self.cochar_rank).map(|i| unit(self.cochar_rank, i)).collect())
    }

    pub fn act_cochar(&self, w: WeylElem, lam: &[i64]) -> Vec<i64> {
        mat_vec(self.weyl.cochar_matrix(w), self.cochar_rank, lam)
    }

    pub fn act_cochar_q(&self, w: WeylElem, lam: &[Q]) -> Vec<Q> {
        let m = self.weyl.cochar_matrix(w);
        let d = self.cochar_rank;
        (0..d)
            .map(|i| (0..d).filter(|&j| m[i * d + j] != 0).map(|j| &lam[j] * q(m[i * d + j])).sum())
            .collect()
    }

    pub fn act_char(&self, w: WeylElem, chi: &[i64]) -> Vec<i64> {
        mat_vec(self.weyl.char_matrix(w), self.cochar_rank, chi)
    }

    /// Simple reflection `s_i` applied to a rational cocharacter.
    fn reflect_q(&self, i: usize, v: &[Q]) -> Vec<Q> {
        let a = self.simple[i];
        let c = self.pair(&self.roots[a], v);
        v.iter().zip(&self.coroots[a]).map(|(x, &y)| x - &c * q(y)).collect()
    }

    /// Dominant representative of the Weyl orbit of `v`, together with the
    /// Weyl element `w` with `w v` dominant. Ascent applies the lowest-index
    /// simple reflection with negative pairing first.
    pub fn dominant_rep_with_witness(&self, v: &[Q]) -> Result<(Vec<Q>, WeylElem)> {
        self.check_len(v.len())?;
        let mut cur = v.to_vec();
        let mut w = WeylElem::IDENTITY;
        let mut steps = 0usize;
        while let Some(i) = (0..self.simple.len()).find(|&i| self.pair(&self.roots[self.simple[i]], &cur) < Q::zero()) {
            cur = self.reflect_q(i, &cur);
            w = self.weyl.compose(self.weyl.simple(i), w);
            steps += 1;
            if steps > self.roots.len() + 1 {
                return Err(Error::Consistency("dominant ascent did not terminate".into()));
            }
        }
        Ok((cur, w))
    }

    pub fn dominant_rep(&self, v: &[Q]) -> Result<Vec<Q>> {
        self.dominant_rep_with_witness(v).map(|(d, _)| d)
    }

    pub fn dominant_rep_int(&self, v: &[i64]) -> Result<Vec<i64>> {
        let qv: Vec<Q> = v.iter().map(|&x| q(x)).collect();
        Ok(self.dominant_rep(&qv)?.iter().map(|x| x.to_integer().to_i64().unwrap()).collect())
    }

    pub fn is_dominant(&self, v: &[Q]) -> bool {
        v.len() == self.cochar_rank && self.simple.iter().all(|&a| self.pair(&self.roots[a], v) >= Q::zero())
    }

    /// `<2 rho, v>`.
    pub fn pair_two_rho(&self, v: &[Q]) -> Q {
        self.pair(&self.two_rho, v)
    }

    /// Dominance order on dominant rational cocharacters: `v2 - v1` is a
    /// nonnegative rational combination of simple coroots.
    pub fn dominance_leq(&self, v1: &[Q], v2: &[Q]) -> Result<bool> {
        self.check_len(v1.len())?;
        self.check_len(v2.len())?;
        if !self.is_dominant(v1) || !self.is_dominant(v2) {
            return Err(Error::Precondition("dominance_leq needs dominant inputs".into()));
        }
        let diff: Vec<Q> = v2.iter().zip(v1).map(|(a, b)| a - b).collect();
        if diff.iter().all(Zero::is_zero) {
            return Ok(true);
        }
        let cols: Vec<Vec<Q>> = self.simple.iter().map(|&a| self.coroots[a].iter().map(|&x| q(x)).collect()).collect();
        if cols.is_empty() {
            return Ok(false);
        }
        let m = QMatrix::from_cols(&cols, self.cochar_rank);
        Ok(m.solve(&diff).is_some_and(|c| c.iter().all(|x| !x.is_negative())))
    }

    /// Relations `x - gamma x` for every generator, in lattice coordinates.
    fn action_relations(&self, act: &LatticeAction) -> Result<Vec<Vec<i64>>> {
        let mut rels = Vec::new();
        for g in &act.generators {
            for b in self.lattice_basis() {
                let img = mat_vec(&g.concat(), self.cochar_rank, &b);
                let diff: Vec<i64> = b.iter().zip(&img).map(|(x, y)| x - y).collect();
                rels.push(self.lattice_coords(&diff)?);
            }
        }
        Ok(rels)
    }

    /// Coinvariants `X_* / span{x - gamma x}`.
    pub fn coinvariants(&self, act: &LatticeAction) -> Result<CoinvariantLattice> {
        let rels = self.action_relations(act)?;
        Ok(CoinvariantLattice::from_relations(self.rank, &rels))
    }

    /// `pi_1(G)_I = (X_* / coroot lattice)_I`, the target of the Kottwitz map.
    pub fn fundamental_group(&self, act: &LatticeAction) -> Result<CoinvariantLattice> {
        let mut rels = self.action_relations(act)?;
        for c in &self.coroots {
            rels.push(self.lattice_coords(c)?);
        }
        Ok(CoinvariantLattice::from_relations(self.rank, &rels))
    }
}

/// A finite group acting on `X_*` by integer matrices (inertia or Frobenius).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeAction {
    pub generators: Vec<Vec<Vec<i64>>>,
    pub order: usize,
}

impl LatticeAction {
    pub fn trivial() -> Self {
        LatticeAction { generators: Vec::new(), order: 1 }
    }

    /// Validates that every generator is invertible over Z, permutes the
    /// coroots, and has finite order; `order` is the lcm of generator orders.
    pub fn new(datum: &RootDatum, generators: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let d = datum.cochar_rank();
        let mut order = 1usize;
        for g in &generators {
            if g.len() != d || g.iter().any(|r| r.len() != d) {
                return Err(Error::Config("action matrix has the wrong size".into()));
            }
            let qm = QMatrix::from_rows(g.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())?;
            let det = qm.det();
            if det != Q::one() && det != -Q::one() {
                return Err(Error::Config("action matrix is not invertible over Z".into()));
            }
            let flat = g.concat();
            let coroot_set: std::collections::HashSet<&Vec<i64>> = datum.coroots().iter().collect();
            if datum.coroots().iter().any(|c| !coroot_set.contains(&mat_vec(&flat, d, c))) {
                return Err(Error::Config("action does not permute the coroots".into()));
            }
            let id = identity_flat(d);
            let mut pow = flat.clone();
            let mut k = 1;
            while pow != id {
                pow = mat_mul(&flat, &pow, d);
                k += 1;
                if k > 1000 {
                    return Err(Error::Config("action generator does not have finite order".into()));
                }
            }
            order = num_integer::lcm(order, k);
        }
        Ok(LatticeAction { generators, order })
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(|g| g.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == i64::from(i == j))))
    }
}

/// Presentation `Z^free_rank (+) (+)_i Z/torsion_i` of a quotient lattice,
/// with the projection from lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinvariantLattice {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
    /// rows: free coordinates first, then one row per torsion factor
    pub projection: Vec<Vec<BigInt>>,
    /// rank of the relation image
    pub relation_rank: usize,
}

impl CoinvariantLattice {
    fn from_relations(rank: usize, rels: &[Vec<i64>]) -> Self {
        if rels.is_empty() {
            let projection = (0..rank)
                .map(|i| (0..rank).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
                .collect();
            return CoinvariantLattice { free_rank: rank, torsion: Vec::new(), projection, relation_rank: 0 };
        }
        // columns are relations
        let a: IMatrix = (0..rank).map(|i| rels.iter().map(|r| BigInt::from(r[i])).collect()).collect();
        let s = smith_int(&a, rels.len());
        let r = s.diag.len();
        let mut projection = Vec::new();
        let mut torsion = Vec::new();
        for i in r..rank {
            projection.push(s.u[i].clone());
        }
        for (i, d) in s.diag.iter().enumerate() {
            if !d.is_one() {
                torsion.push(d.clone());
                projection.push(s.u[i].clone());
            }
        }
        CoinvariantLattice { free_rank: rank - r, torsion, projection, relation_rank: r }
    }

    /// Image of lattice coordinates in the presentation; torsion parts
    /// reduced into `[0, d)`.
    pub fn project(&self, coords: &[i64]) -> Vec<BigInt> {
        self.projection
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let v: BigInt = row.iter().zip(coords).map(|(a, &b)| a * BigInt::from(b)).sum();
                if k < self.free_rank {
                    v
                } else {
                    let d = &self.torsion[k - self.free_rank];
                    ((v % d) + d) % d
                }
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Structured description of a root datum: either a classical tag and size,
/// or explicit roots/coroots/pairing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSpec {
    pub group: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub roots: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub coroots: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub pairing: Option<Vec<Vec<i64>>>,
}

impl DatumSpec {
    /// Accepts shorthand like `GL3`, `Sp4`, `GSp4`.
    pub fn shorthand(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (tag, num) = s.split_at(split);
        let n = if num.is_empty() {
            None
        } else {
            Some(num.parse().map_err(|_| Error::Config(format!("bad group size in {s:?}")))?)
        };
        Ok(DatumSpec { group: tag.to_string(), n, roots: None, coroots: None, pairing: None })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("root datum document: {e}")))
    }

    pub fn build(&self) -> Result<RootDatum> {
        let tag = GroupTag::parse(&self.group)?;
        if tag == GroupTag::Custom || self.roots.is_some() {
            let roots = self.roots.clone().unwrap_or_default();
            let coroots = self.coroots.clone().ok_or_else(|| Error::Config("custom datum needs coroots".into()))?;
            return RootDatum::custom(roots, coroots, self.pairing.clone());
        }
        let n = self.n.ok_or_else(|| Error::Config("classical group needs n".into()))?;
        RootDatum::build_classical(tag, n)
    }
}
