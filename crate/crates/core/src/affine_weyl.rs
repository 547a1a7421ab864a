//! The extended affine Weyl group `W~ = X_* ⋊ W_0` of a split datum, with a
//! Frobenius action, Iwahori–Matsumoto length, Bruhat order, Newton and
//! Kottwitz maps, admissible sets and bounded σ-conjugacy classes.
//!
//! Elements are written `t^λ w` and act on `X_* ⊗ R` by `v ↦ λ + w v`.
//! The base alcove lies in the dominant chamber, so
//! `ℓ(t^λ w) = Σ_{α>0, w⁻¹α>0} |⟨α,λ⟩| + Σ_{α>0, w⁻¹α<0} |⟨α,λ⟩ − 1|`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::isocrystal::MonomialIsocrystal;
use crate::rational::{q, Q};
use crate::root_datum::{CoinvariantLattice, LatticeAction, RootDatum, WeylElem};

/// `t^λ w`, tagged with the identity of its root datum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    datum: u64,
    lambda: Vec<i64>,
    w: WeylElem,
}

impl Element {
    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    pub fn finite_part(&self) -> WeylElem {
        self.w
    }

    pub fn datum_id(&self) -> u64 {
        self.datum
    }
}

/// A Frobenius action on `X_*` preserving the base.
#[derive(Clone, Debug)]
pub struct Sigma {
    matrix: Vec<i64>,
    weyl_map: Vec<u32>,
    action: LatticeAction,
    dim: usize,
}

fn flat_mul(a: &[i64], b: &[i64], d: usize) -> Vec<i64> {
    let mut out = vec![0; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x != 0 {
                for j in 0..d {
                    out[i * d + j] += x * b[k * d + j];
                }
            }
        }
    }
    out
}

fn flat_vec(a: &[i64], d: usize, v: &[i64]) -> Vec<i64> {
    (0..d).map(|i| (0..d).map(|j| a[i * d + j] * v[j]).sum()).collect()
}

fn flat_identity(d: usize) -> Vec<i64> {
    let mut m = vec![0; d * d];
    for i in 0..d {
        m[i * d + i] = 1;
    }
    m
}

impl Sigma {
    pub fn trivial(datum: &RootDatum) -> Self {
        let d = datum.cochar_rank();
        Sigma {
            matrix: flat_identity(d),
            weyl_map: (0..datum.weyl().order() as u32).collect(),
            action: LatticeAction::trivial(),
            dim: d,
        }
    }

    /// Frobenius given by an integer matrix on `X_*`; it must have finite
    /// order and permute the simple coroots.
    pub fn new(datum: &RootDatum, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let action = LatticeAction::new(datum, vec![matrix.clone()])?;
        let d = datum.cochar_rank();
        let flat = matrix.concat();
        let simple: HashSet<&Vec<i64>> = datum.simple_roots().iter().map(|&i| &datum.coroots()[i]).collect();
        for c in &simple {
            if !simple.contains(&flat_vec(&flat, d, c)) {
                return Err(Error::Config("Frobenius must permute the simple coroots".into()));
            }
        }
        let mut inv = flat_identity(d);
        for _ in 1..action.order {
            inv = flat_mul(&inv, &flat, d);
        }
        let weyl = datum.weyl();
        let weyl_map = weyl
            .elements()
            .map(|w| {
                let m = flat_mul(&flat_mul(&flat, weyl.cochar_matrix(w), d), &inv, d);
                weyl.lookup(&m)
                    .map(|e| e.0)
                    .ok_or_else(|| Error::Config("Frobenius does not normalize the Weyl group".into()))
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(Sigma { matrix: flat, weyl_map, action, dim: d })
    }

    pub fn is_trivial(&self) -> bool {
        self.matrix == flat_identity(self.dim)
    }

    pub fn order(&self) -> usize {
        self.action.order
    }

    pub fn action(&self) -> &LatticeAction {
        &self.action
    }

    pub fn apply_cochar(&self, v: &[i64]) -> Vec<i64> {
        flat_vec(&self.matrix, self.dim, v)
    }

    pub fn apply_weyl(&self, w: WeylElem) -> WeylElem {
        WeylElem(self.weyl_map[w.index()])
    }

    pub fn matrix(&self) -> &[i64] {
        &self.matrix
    }
}

/// Newton point: `vector` is ν, `dominant` its dominant representative,
/// `period` the minimal `r` with `(wσ)^r = 1` on `X_*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPoint {
    pub vector: Vec<Q>,
    pub dominant: Vec<Q>,
    pub period: u32,
}

/// Kottwitz class: coordinates in the presentation of `π₁(G)`
/// (free coordinates, then torsion residues).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KottwitzClass {
    pub value: Vec<BigInt>,
}

impl fmt::Display for KottwitzClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.value.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Iwahori,
    Hyperspecial,
}

impl Level {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iwahori" => Ok(Level::Iwahori),
            "hyperspecial" => Ok(Level::Hyperspecial),
            other => Err(Error::Config(format!("unknown level {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdmissibleSet {
    Iwahori(Vec<Element>),
    /// double cosets, each represented by its dominant translation
    Hyperspecial(Vec<Vec<i64>>),
}

impl AdmissibleSet {
    pub fn len(&self) -> usize {
        match self {
            AdmissibleSet::Iwahori(v) => v.len(),
            AdmissibleSet::Hyperspecial(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Output of a monomial lift: `(ḃσ)^r = p^{rν}σ^r` holds for `lift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecentLift {
    pub period: u32,
    pub lift: MonomialIsocrystal,
    pub newton: NewtonPoint,
}

#[derive(Clone, Debug)]
pub struct SigmaClassOptions {
    pub length_cap: usize,
    /// defaults to `length_cap + 2`
    pub conjugator_cap: Option<usize>,
    /// translations whose Ω-cosets make up the domain; defaults to `0` and
    /// the first lattice basis vector with nonzero Kottwitz class
    pub kappa_reps: Option<Vec<Vec<i64>>>,
    pub max_elements: usize,
}

impl SigmaClassOptions {
    pub fn new(length_cap: usize) -> Self {
        SigmaClassOptions { length_cap, conjugator_cap: None, kappa_reps: None, max_elements: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaBlock {
    pub members: Vec<Element>,
    pub nu_dominant: Vec<Q>,
    /// Kottwitz class in the σ-coinvariants of `π₁(G)`
    pub kappa: KottwitzClass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaClassPartition {
    pub blocks: Vec<SigmaBlock>,
    pub length_cap: usize,
    pub conjugator_cap: usize,
}

impl SigmaClassPartition {
    pub fn block_of(&self, x: &Element) -> Option<usize> {
        self.blocks.iter().position(|b| b.members.binary_search(x).is_ok())
    }

    pub fn element_count(&self) -> usize {
        self.blocks.iter().map(|b| b.members.len()).sum()
    }
}

/// The extended affine Weyl group of a datum, with cached root data needed
/// for lengths.
#[derive(Clone, Debug)]
pub struct AffineWeyl {
    datum: Arc<RootDatum>,
    positive: Vec<usize>,
    /// `inv_neg[w][k]`: whether `w⁻¹ α_k < 0` for the k-th positive root
    inv_neg: Vec<Vec<bool>>,
    simple_affine: Vec<Element>,
    pi1: CoinvariantLattice,
}

impl AffineWeyl {
    pub fn new(datum: Arc<RootDatum>) -> Result<Self> {
        let positive: Vec<usize> = datum.positive_roots().collect();
        let weyl = datum.weyl();
        let inv_neg = weyl
            .elements()
            .map(|w| {
                let winv = weyl.inverse(w);
                positive.iter().map(|&a| !datum.is_positive(weyl.root_image(winv, a))).collect()
            })
            .collect();
        let id = datum.id();
        let zero = vec![0; datum.cochar_rank()];
        let mut simple_affine: Vec<Element> = (0..datum.simple_roots().len())
            .map(|i| Element { datum: id, lambda: zero.clone(), w: weyl.simple(i) })
            .collect();
        for &h in datum.highest_roots() {
            let refl = reflection_matrix(&datum, h);
            let w = weyl
                .lookup(&refl)
                .ok_or_else(|| Error::Consistency("highest-root reflection missing from W".into()))?;
            simple_affine.push(Element { datum: id, lambda: datum.coroots()[h].clone(), w });
        }
        let pi1 = datum.fundamental_group(&LatticeAction::trivial())?;
        Ok(AffineWeyl { datum, positive, inv_neg, simple_affine, pi1 })
    }

    pub fn datum(&self) -> &Arc<RootDatum> {
        &self.datum
    }

    pub fn fundamental_group(&self) -> &CoinvariantLattice {
        &self.pi1
    }

    fn check(&self, x: &Element) -> Result<()> {
        if x.datum != self.datum.id() {
            return Err(Error::MixedData);
        }
        Ok(())
    }

    pub fn element(&self, lambda: Vec<i64>, w: WeylElem) -> Result<Element> {
        self.datum.check_len(lambda.len())?;
        if !self.datum.in_lattice(&lambda) {
            return Err(Error::Precondition(format!("{lambda:?} is not in the cocharacter lattice")));
        }
        if w.index() >= self.datum.weyl().order() {
            return Err(Error::Config("Weyl element out of range".into()));
        }
        Ok(Element { datum: self.datum.id(), lambda, w })
    }

    pub fn identity(&self) -> Element {
        Element { datum: self.datum.id(), lambda: vec![0; self.datum.cochar_rank()], w: WeylElem::IDENTITY }
    }

    pub fn translation(&self, lambda: Vec<i64>) -> Result<Element> {
        self.element(lambda, WeylElem::IDENTITY)
    }

    pub fn compose(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    fn mul(&self, x: &Element, y: &Element) -> Element {
        let wl = self.datum.act_cochar(x.w, &y.lambda);
        Element {
            datum: x.datum,
            lambda: x.lambda.iter().zip(&wl).map(|(a, b)| a + b).collect(),
            w: self.datum.weyl().compose(x.w, y.w),
        }
    }

    pub fn invert(&self, x: &Element) -> Result<Element> {
        self.check(x)?;
        Ok(self.inv(x))
    }

    fn inv(&self, x: &Element) -> Element {
        let winv = self.datum.weyl().inverse(x.w);
        let l = self.datum.act_cochar(winv, &x.lambda);
        Element { datum: x.datum, lambda: l.iter().map(|a| -a).collect(), w: winv }
    }

    pub fn sigma_apply(&self, x: &Element, sigma: &Sigma) -> Result<Element> {
        self.check(x)?;
        Ok(self.sig(x, sigma))
    }

    fn sig(&self, x: &Element, sigma: &Sigma) -> Element {
        Element { datum: x.datum, lambda: sigma.apply_cochar(&x.lambda), w: sigma.apply_weyl(x.w) }
    }

    /// `g · x · σ(g)⁻¹`.
    pub fn sigma_conjugate(&self, g: &Element, x: &Element, sigma: &Sigma) -> Result<Element> {
        self.check(g)?;
        self.check(x)?;
        Ok(self.sconj(g, x, sigma))
    }

    fn sconj(&self, g: &Element, x: &Element, sigma: &Sigma) -> Element {
        self.mul(&self.mul(g, x), &self.inv(&self.sig(g, sigma)))
    }

    pub fn length(&self, x: &Element) -> usize {
        let neg = &self.inv_neg[x.w.index()];
        self.positive
            .iter()
            .zip(neg)
            .map(|(&a, &n)| {
                let v = self.datum.pair_int(&self.datum.roots()[a], &x.lambda);
                (if n { v - 1 } else { v }).unsigned_abs() as usize
            })
            .sum()
    }

    /// Simple affine reflections: `s1..sl` (finite) followed by one `s0` per
    /// irreducible component.
    pub fn simple_reflections(&self) -> &[Element] {
        &self.simple_affine
    }

    pub fn simple_reflection_name(&self, i: usize) -> String {
        let l = self.datum.simple_roots().len();
        if i < l {
            format!("s{}", i + 1)
        } else if self.simple_affine.len() - l == 1 {
            "s0".to_string()
        } else {
            format!("s0_{}", i - l + 1)
        }
    }

    /// `x = s_{i1} ⋯ s_{ik} τ` with `ℓ(τ) = 0`, choosing the lowest-index
    /// left descent at each step.
    pub fn reduced_word(&self, x: &Element) -> Result<(Vec<usize>, Element)> {
        self.check(x)?;
        let mut cur = x.clone();
        let mut len = self.length(&cur);
        let mut word = Vec::with_capacity(len);
        while len > 0 {
            let (i, next) = self
                .simple_affine
                .iter()
                .enumerate()
                .map(|(i, s)| (i, self.mul(s, &cur)))
                .find(|(_, y)| self.length(y) < len)
                .ok_or_else(|| Error::Consistency("positive length without a descent".into()))?;
            word.push(i);
            cur = next;
            len -= 1;
        }
        Ok((word, cur))
    }

    /// The length-zero element of the Ω-coset of `x`.
    pub fn omega_part(&self, x: &Element) -> Result<Element> {
        self.reduced_word(x).map(|(_, t)| t)
    }

    fn right_descent(&self, x: &Element) -> Option<(usize, Element)> {
        let len = self.length(x);
        self.simple_affine
            .iter()
            .enumerate()
            .map(|(i, s)| (i, self.mul(x, s)))
            .find(|(_, y)| self.length(y) < len)
    }

    pub fn bruhat_leq(&self, x: &Element, y: &Element) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        if self.kottwitz_raw(&x.lambda)? != self.kottwitz_raw(&y.lambda)? {
            return Ok(false);
        }
        let mut memo = HashMap::new();
        Ok(self.bruhat_rec(x, y, &mut memo))
    }

    fn bruhat_rec(&self, x: &Element, y: &Element, memo: &mut HashMap<(Element, Element), bool>) -> bool {
        let (lx, ly) = (self.length(x), self.length(y));
        if lx > ly {
            return false;
        }
        if ly == 0 || lx == ly {
            return x == y;
        }
        let key = (x.clone(), y.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let (i, ys) = self.right_descent(y).expect("positive length has a descent");
        let xs = self.mul(x, &self.simple_affine[i]);
        let res = if self.length(&xs) < lx { self.bruhat_rec(&xs, &ys, memo) } else { self.bruhat_rec(x, &ys, memo) };
        memo.insert(key, res);
        res
    }

    fn kottwitz_raw(&self, lambda: &[i64]) -> Result<Vec<BigInt>> {
        Ok(self.pi1.project(&self.datum.lattice_coords(lambda)?))
    }

    /// Image of the translation part in `π₁(G)`.
    pub fn kottwitz(&self, x: &Element) -> Result<KottwitzClass> {
        self.check(x)?;
        Ok(KottwitzClass { value: self.kottwitz_raw(&x.lambda)? })
    }

    /// Kottwitz class pushed to the σ-coinvariants of `π₁(G)`.
    pub fn kottwitz_sigma(&self, x: &Element, sigma: &Sigma) -> Result<KottwitzClass> {
        self.check(x)?;
        if sigma.is_trivial() {
            return self.kottwitz(x);
        }
        let lat = self.datum.fundamental_group(sigma.action())?;
        Ok(KottwitzClass { value: lat.project(&self.datum.lattice_coords(&x.lambda)?) })
    }

    /// Kottwitz class of a translation, used for `κ(t^μ)`.
    pub fn kottwitz_of_cochar(&self, lambda: &[i64]) -> Result<KottwitzClass> {
        Ok(KottwitzClass { value: self.kottwitz_raw(lambda)? })
    }

    pub fn newton_point(&self, x: &Element, sigma: &Sigma) -> Result<NewtonPoint> {
        self.check(x)?;
        let d = self.datum.cochar_rank();
        let wmat = self.datum.weyl().cochar_matrix(x.w);
        let step = flat_mul(wmat, sigma.matrix(), d);
        let id = flat_identity(d);
        let mut total = vec![0i64; d];
        let mut cur = x.lambda.clone();
        let mut pow = id.clone();
        let mut r = 0u32;
        loop {
            for (t, c) in total.iter_mut().zip(&cur) {
                *t += c;
            }
            cur = flat_vec(&step, d, &cur);
            pow = flat_mul(&step, &pow, d);
            r += 1;
            if pow == id {
                break;
            }
            if r > 10_000 {
                return Err(Error::Consistency("wσ does not have finite order".into()));
            }
        }
        let vector: Vec<Q> = total.iter().map(|&t| q(t) / q(i64::from(r))).collect();
        let dominant = self.datum.dominant_rep(&vector)?;
        Ok(NewtonPoint { vector, dominant, period: r })
    }

    pub fn is_basic(&self, nu: &NewtonPoint) -> bool {
        self.datum.roots().iter().all(|a| self.datum.pair(a, &nu.dominant).is_zero())
    }

    /// Monomial lift `ḃ = p^λ ẇ` in the standard representation:
    /// `ḃ v_j = p^{⟨χ_{π(j)}, λ⟩} v_{π(j)}` where `w χ_j = χ_{π(j)}`.
    pub fn decent_representative(&self, x: &Element) -> Result<DecentLift> {
        self.check(x)?;
        let weights = self
            .datum
            .standard_weights()
            .ok_or_else(|| Error::Unsupported("no faithful representation attached to this datum".into()))?;
        let index: HashMap<&Vec<i64>, usize> = weights.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let perm: Vec<usize> = weights
            .iter()
            .map(|chi| {
                index
                    .get(&self.datum.act_char(x.w, chi))
                    .copied()
                    .ok_or_else(|| Error::Consistency("Weyl group does not permute the standard weights".into()))
            })
            .collect::<Result<_>>()?;
        let exponents: Vec<i64> = perm.iter().map(|&pj| self.datum.pair_int(&weights[pj], &x.lambda)).collect();
        let lift = MonomialIsocrystal::new(perm, exponents, 1)?;
        let newton = self.newton_point(x, &Sigma::trivial(&self.datum))?;
        let r = newton.period;
        let target: Vec<Q> = weights.iter().map(|chi| self.datum.pair(chi, &newton.vector) * q(i64::from(r))).collect();
        let (pr, exps) = lift.power(r as usize);
        if pr.iter().enumerate().any(|(i, &j)| i != j) || exps.iter().zip(&target).any(|(&e, t)| q(e) != *t) {
            return Err(Error::Consistency("monomial lift fails the decency equation".into()));
        }
        Ok(DecentLift { period: r, lift, newton })
    }

    /// Elements of the Ω-coset of `tau` (which must have length zero) with
    /// length at most `cap`, sorted.
    pub fn coset_elements(&self, tau: &Element, cap: usize, max_elements: usize) -> Result<Vec<Element>> {
        self.check(tau)?;
        if self.length(tau) != 0 {
            return Err(Error::Precondition("coset base point must have length zero".into()));
        }
        let mut seen: HashSet<Element> = HashSet::from([tau.clone()]);
        let mut queue = VecDeque::from([(tau.clone(), 0usize)]);
        while let Some((x, lx)) = queue.pop_front() {
            if lx == cap {
                continue;
            }
            for s in &self.simple_affine {
                let y = self.mul(&x, s);
                if self.length(&y) == lx + 1 && seen.insert(y.clone()) {
                    if seen.len() > max_elements {
                        return Err(Error::Budget { what: "coset enumeration".into(), explored: seen.len() });
                    }
                    queue.push_back((y, lx + 1));
                }
            }
        }
        let mut out: Vec<Element> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// Default Ω-coset window: the identity coset and, when `π₁(G)` is
    /// nontrivial, the coset of the first lattice basis vector with nonzero
    /// Kottwitz class.
    pub fn default_kappa_reps(&self) -> Result<Vec<Vec<i64>>> {
        let mut reps = vec![vec![0; self.datum.cochar_rank()]];
        for b in self.datum.lattice_basis() {
            if self.kottwitz_raw(&b)?.iter().any(|c| !c.is_zero()) {
                reps.push(b);
                break;
            }
        }
        Ok(reps)
    }

    /// All elements of length `≤ cap` in the Ω-cosets of the given translations.
    pub fn elements_up_to_length(&self, cap: usize, kappa_reps: &[Vec<i64>], max_elements: usize) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        let mut taus = HashSet::new();
        for rep in kappa_reps {
            let tau = self.omega_part(&self.translation(rep.clone())?)?;
            if taus.insert(tau.clone()) {
                out.extend(self.coset_elements(&tau, cap, max_elements)?);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn admissible_set(&self, mu: &[i64], level: Level) -> Result<AdmissibleSet> {
        self.admissible_set_with(Exec::default(), mu, level)
    }

    pub fn admissible_set_with(&self, exec: Exec, mu: &[i64], level: Level) -> Result<AdmissibleSet> {
        self.datum.check_len(mu.len())?;
        let muq: Vec<Q> = mu.iter().map(|&x| q(x)).collect();
        if !self.datum.is_dominant(&muq) {
            return Err(Error::Precondition(format!("{mu:?} is not dominant")));
        }
        let t_mu = self.translation(mu.to_vec())?;
        let bound = self.length(&t_mu);
        let mut extremal: Vec<Element> = self
            .datum
            .weyl()
            .elements()
            .map(|w| Element { datum: t_mu.datum, lambda: self.datum.act_cochar(w, mu), w: WeylElem::IDENTITY })
            .collect();
        extremal.sort();
        extremal.dedup();
        let tau = self.omega_part(&t_mu)?;
        let candidates = self.coset_elements(&tau, bound, 1_000_000)?;
        let adm = exec.filter(candidates, |x| {
            let mut memo = HashMap::new();
            extremal.iter().any(|t| self.bruhat_rec(x, t, &mut memo))
        });
        match level {
            Level::Iwahori => Ok(AdmissibleSet::Iwahori(adm)),
            Level::Hyperspecial => {
                let mut doms: Vec<Vec<i64>> =
                    adm.iter().map(|x| self.datum.dominant_rep_int(&x.lambda)).collect::<Result<_>>()?;
                doms.sort();
                doms.dedup();
                Ok(AdmissibleSet::Hyperspecial(doms))
            }
        }
    }

    pub fn enumerate_sigma_classes(&self, opts: &SigmaClassOptions, sigma: &Sigma) -> Result<SigmaClassPartition> {
        self.enumerate_sigma_classes_with(Exec::default(), opts, sigma)
    }

    /// Partition of the bounded domain into classes under σ-conjugation by
    /// elements of length `≤ conjugator_cap`. Classes may merge further under
    /// longer conjugators; every block is checked to have constant Newton
    /// point and Kottwitz class.
    pub fn enumerate_sigma_classes_with(
        &self,
        exec: Exec,
        opts: &SigmaClassOptions,
        sigma: &Sigma,
    ) -> Result<SigmaClassPartition> {
        let reps = match &opts.kappa_reps {
            Some(r) => r.clone(),
            None => self.default_kappa_reps()?,
        };
        let conj_cap = opts.conjugator_cap.unwrap_or(opts.length_cap + 2);
        let domain = self.elements_up_to_length(opts.length_cap, &reps, opts.max_elements)?;
        let mut conj_reps = reps.clone();
        conj_reps.extend(reps.iter().map(|r| r.iter().map(|x| -x).collect::<Vec<i64>>()));
        let remaining = opts.max_elements.saturating_sub(domain.len());
        let conjugators = self
            .elements_up_to_length(conj_cap, &conj_reps, remaining)
            .map_err(|e| match e {
                Error::Budget { what, explored } => Error::Budget { what, explored: explored + domain.len() },
                other => other,
            })?;
        let index: HashMap<&Element, usize> = domain.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let edges: Vec<Vec<usize>> = exec.map(&domain, |x| {
            conjugators.iter().filter_map(|g| index.get(&self.sconj(g, x, sigma)).copied()).collect()
        });
        let mut parent: Vec<usize> = (0..domain.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (i, targets) in edges.iter().enumerate() {
            for &j in targets {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<Element>> = HashMap::new();
        for (i, x) in domain.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(x.clone());
        }
        let mut blocks = Vec::with_capacity(groups.len());
        for (_, mut members) in groups {
            members.sort();
            let invariants = exec.try_map(&members, |x| -> Result<(Vec<Q>, KottwitzClass)> {
                Ok((self.newton_point(x, sigma)?.dominant, self.kottwitz_sigma(x, sigma)?))
            })?;
            let (nu, kappa) = invariants[0].clone();
            if invariants.iter().any(|inv| inv.0 != nu || inv.1 != kappa) {
                return Err(Error::Consistency("σ-conjugacy block with non-constant (ν, κ)".into()));
            }
            blocks.push(SigmaBlock { members, nu_dominant: nu, kappa });
        }
        blocks.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
        Ok(SigmaClassPartition { blocks, length_cap: opts.length_cap, conjugator_cap: conj_cap })
    }

    /// Finite part as a reduced word in `s1..sl`, lowest index first.
    pub fn weyl_word(&self, w: WeylElem) -> Vec<usize> {
        let weyl = self.datum.weyl();
        let mut cur = w;
        let mut word = Vec::new();
        loop {
            let winv = weyl.inverse(cur);
            let Some(i) = self
                .datum
                .simple_roots()
                .iter()
                .position(|&a| !self.datum.is_positive(weyl.root_image(winv, a)))
            else {
                break;
            };
            word.push(i);
            cur = weyl.compose(weyl.simple(i), cur);
        }
        word
    }

    pub fn weyl_from_word(&self, word: &[usize]) -> Result<WeylElem> {
        let weyl = self.datum.weyl();
        let l = self.datum.simple_roots().len();
        word.iter().try_fold(WeylElem::IDENTITY, |acc, &i| {
            if i >= l {
                Err(Error::Parse(format!("simple reflection s{} out of range", i + 1)))
            } else {
                Ok(weyl.compose(acc, weyl.simple(i)))
            }
        })
    }
}

fn reflection_matrix(d: &RootDatum, root: usize) -> Vec<i64> {
    let n = d.cochar_rank();
    let alpha = &d.roots()[root];
    let cov = &d.coroots()[root];
    let mut m = flat_identity(n);
    for j in 0..n {
        let e: Vec<i64> = (0..n).map(|k| i64::from(k == j)).collect();
        let c = d.pair_int(alpha, &e);
        for i in 0..n {
            m[i * n + j] -= cov[i] * c;
        }
    }
    m
}
