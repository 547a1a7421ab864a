//! Coefficient rings and truncated Witt vector arithmetic.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::poly::{witt_polys, IntPoly, WittPolys};
use crate::error::{Error, Result};

/// A commutative ring in which the prime `p` is nilpotent or zero.
pub trait CoeffRing: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn prime(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn embed(&self, n: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    fn describe(&self) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// `Z/p^k`, elements stored as residues in `[0, p^k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZModPk {
    p: u64,
    k: u32,
    modulus: BigInt,
}

impl ZModPk {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::Config(format!("{p} is not a prime")));
        }
        if k == 0 {
            return Err(Error::Config("coefficient ring Z/p^0 is trivial".into()));
        }
        Ok(ZModPk { p, k, modulus: num_traits::pow(BigInt::from(p), k as usize) })
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    fn reduce(&self, x: BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

impl CoeffRing for ZModPk {
    type Elem = BigInt;

    fn prime(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        self.reduce(BigInt::one())
    }
    fn embed(&self, n: &BigInt) -> BigInt {
        self.reduce(n.clone())
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a + b)
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a * b)
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        self.reduce(-a)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigInt {
        // uniform base-p digits give a uniform residue mod p^k
        (0..self.k).fold(BigInt::zero(), |acc, _| acc * self.p + rng.gen_range(0..self.p))
    }
    fn describe(&self) -> String {
        format!("Z/{}^{}", self.p, self.k)
    }
}

/// `(Z/p^k)[t_1..t_v] / (monomials of total degree > max_degree)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPoly {
    base: ZModPk,
    nvars: usize,
    max_degree: u32,
}

pub type PolyElem = BTreeMap<Vec<u32>, BigInt>;

impl TruncatedPoly {
    pub fn new(base: ZModPk, nvars: usize, max_degree: u32) -> Self {
        TruncatedPoly { base, nvars, max_degree }
    }

    pub fn variable(&self, i: usize) -> PolyElem {
        let mut e = vec![0; self.nvars];
        e[i] = 1;
        if self.max_degree == 0 {
            return PolyElem::new();
        }
        PolyElem::from([(e, self.base.one())])
    }

    fn constant(&self, c: BigInt) -> PolyElem {
        let c = self.base.reduce(c);
        if c.is_zero() {
            PolyElem::new()
        } else {
            PolyElem::from([(vec![0; self.nvars], c)])
        }
    }
}

impl CoeffRing for TruncatedPoly {
    type Elem = PolyElem;

    fn prime(&self) -> u64 {
        self.base.p
    }
    fn zero(&self) -> PolyElem {
        PolyElem::new()
    }
    fn one(&self) -> PolyElem {
        self.constant(BigInt::one())
    }
    fn embed(&self, n: &BigInt) -> PolyElem {
        self.constant(n.clone())
    }
    fn add(&self, a: &PolyElem, b: &PolyElem) -> PolyElem {
        let mut out = a.clone();
        for (e, c) in b {
            let v = self.base.add(out.get(e).unwrap_or(&BigInt::zero()), c);
            if v.is_zero() {
                out.remove(e);
            } else {
                out.insert(e.clone(), v);
            }
        }
        out
    }
    fn mul(&self, a: &PolyElem, b: &PolyElem) -> PolyElem {
        let mut out = PolyElem::new();
        for (e1, c1) in a {
            for (e2, c2) in b {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                if e.iter().sum::<u32>() > self.max_degree {
                    continue;
                }
                let entry = out.entry(e).or_insert_with(BigInt::zero);
                *entry = self.base.add(entry, &(c1 * c2));
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
    fn neg(&self, a: &PolyElem) -> PolyElem {
        a.iter().map(|(e, c)| (e.clone(), self.base.neg(c))).collect()
    }
    fn is_zero(&self, a: &PolyElem) -> bool {
        a.is_empty()
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> PolyElem {
        let mut out = self.constant(self.base.random(rng));
        for i in 0..self.nvars {
            let t = self.mul(&self.variable(i), &self.constant(self.base.random(rng)));
            out = self.add(&out, &t);
        }
        out
    }
    fn describe(&self) -> String {
        format!("{}[t1..t{}]/deg>{}", self.base.describe(), self.nvars, self.max_degree)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<R: CoeffRing> {
    ring: R,
    comps: Vec<R::Elem>,
}

impl<R: CoeffRing> WittVector<R> {
    pub fn new(ring: R, comps: Vec<R::Elem>) -> Self {
        WittVector { ring, comps }
    }

    pub fn components(&self) -> &[R::Elem] {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| self.ring.is_zero(c))
    }

    pub fn truncate(&self, len: usize) -> Self {
        WittVector { ring: self.ring.clone(), comps: self.comps[..len.min(self.comps.len())].to_vec() }
    }
}

/// Witt arithmetic on vectors of length up to `max_len` over a ring.
#[derive(Clone, Debug)]
pub struct WittOps<R: CoeffRing> {
    ring: R,
    max_len: usize,
    polys: Arc<WittPolys>,
}

fn eval<R: CoeffRing>(ring: &R, poly: &IntPoly, vals: &[&R::Elem]) -> R::Elem {
    let mut pows: Vec<Vec<R::Elem>> = Vec::with_capacity(poly.nvars);
    for (v, x) in vals.iter().enumerate().take(poly.nvars) {
        let d = poly.max_degree_in(v) as usize;
        let mut row = vec![ring.one()];
        for k in 1..=d {
            let next = ring.mul(&row[k - 1], x);
            row.push(next);
        }
        pows.push(row);
    }
    let mut acc = ring.zero();
    for (e, c) in &poly.terms {
        let mut t = ring.embed(c);
        for (v, &k) in e.iter().enumerate() {
            if k > 0 {
                t = ring.mul(&t, &pows[v][k as usize]);
            }
        }
        acc = ring.add(&acc, &t);
    }
    acc
}

impl<R: CoeffRing> WittOps<R> {
    pub fn new(ring: R, max_len: usize) -> Result<Self> {
        let polys = witt_polys(ring.prime(), max_len)?;
        Ok(WittOps { ring, max_len, polys })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn prime(&self) -> u64 {
        self.ring.prime()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn vector(&self, comps: Vec<R::Elem>) -> Result<WittVector<R>> {
        if comps.len() > self.max_len {
            return Err(Error::Dimension { expected: self.max_len, got: comps.len() });
        }
        Ok(WittVector::new(self.ring.clone(), comps))
    }

    pub fn zero(&self, len: usize) -> WittVector<R> {
        WittVector::new(self.ring.clone(), vec![self.ring.zero(); len])
    }

    pub fn one(&self, len: usize) -> WittVector<R> {
        self.teichmuller(&self.ring.one(), len)
    }

    pub fn teichmuller(&self, x: &R::Elem, len: usize) -> WittVector<R> {
        let mut comps = vec![self.ring.zero(); len];
        if len > 0 {
            comps[0] = x.clone();
        }
        WittVector::new(self.ring.clone(), comps)
    }

    pub fn random<G: Rng + ?Sized>(&self, rng: &mut G, len: usize) -> WittVector<R> {
        WittVector::new(self.ring.clone(), (0..len).map(|_| self.ring.random(rng)).collect())
    }

    fn check(&self, a: &WittVector<R>) -> Result<()> {
        if a.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        if a.len() > self.max_len {
            return Err(Error::Dimension { expected: self.max_len, got: a.len() });
        }
        Ok(())
    }

    fn check_pair(&self, a: &WittVector<R>, b: &WittVector<R>) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a.len() != b.len() {
            return Err(Error::Dimension { expected: a.len(), got: b.len() });
        }
        Ok(())
    }

    fn binary(&self, polys: &[IntPoly], a: &WittVector<R>, b: &WittVector<R>) -> WittVector<R> {
        let m = a.len();
        let zero = self.ring.zero();
        // variables X_0..X_{M-1}, Y_0..Y_{M-1} for the cached length M
        let mm = self.max_len;
        let vals: Vec<&R::Elem> = (0..2 * mm)
            .map(|i| if i < mm { a.comps.get(i).unwrap_or(&zero) } else { b.comps.get(i - mm).unwrap_or(&zero) })
            .collect();
        let comps = polys[..m].iter().map(|p| eval(&self.ring, p, &vals)).collect();
        WittVector::new(self.ring.clone(), comps)
    }

    pub fn add(&self, a: &WittVector<R>, b: &WittVector<R>) -> Result<WittVector<R>> {
        self.check_pair(a, b)?;
        Ok(self.binary(&self.polys.add, a, b))
    }

    pub fn mul(&self, a: &WittVector<R>, b: &WittVector<R>) -> Result<WittVector<R>> {
        self.check_pair(a, b)?;
        Ok(self.binary(&self.polys.mul, a, b))
    }

    pub fn neg(&self, a: &WittVector<R>) -> Result<WittVector<R>> {
        self.check(a)?;
        let zero = self.ring.zero();
        let vals: Vec<&R::Elem> = (0..self.max_len).map(|i| a.comps.get(i).unwrap_or(&zero)).collect();
        let comps = self.polys.neg[..a.len()].iter().map(|p| eval(&self.ring, p, &vals)).collect();
        Ok(WittVector::new(self.ring.clone(), comps))
    }

    pub fn sub(&self, a: &WittVector<R>, b: &WittVector<R>) -> Result<WittVector<R>> {
        self.add(a, &self.neg(b)?)
    }

    /// Witt Frobenius `W_m → W_{m-1}`.
    pub fn frobenius(&self, a: &WittVector<R>) -> Result<WittVector<R>> {
        self.check(a)?;
        let zero = self.ring.zero();
        let vals: Vec<&R::Elem> = (0..self.max_len).map(|i| a.comps.get(i).unwrap_or(&zero)).collect();
        let out_len = a.len().saturating_sub(1);
        let comps = self.polys.frob[..out_len].iter().map(|p| eval(&self.ring, p, &vals)).collect();
        Ok(WittVector::new(self.ring.clone(), comps))
    }

    /// Verschiebung `W_m → W_{m+1}`, `(a_0, …) ↦ (0, a_0, …)`.
    pub fn verschiebung(&self, a: &WittVector<R>) -> Result<WittVector<R>> {
        self.check(a)?;
        let mut comps = vec![self.ring.zero()];
        comps.extend(a.comps.iter().cloned());
        Ok(WittVector::new(self.ring.clone(), comps))
    }

    /// `n · 1` by double-and-add.
    pub fn from_int(&self, n: u64, len: usize) -> WittVector<R> {
        let mut acc = self.zero(len);
        let mut base = self.one(len);
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.binary(&self.polys.add, &acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.binary(&self.polys.add, &base, &base);
            }
        }
        acc
    }

    pub fn scalar(&self, n: u64, a: &WittVector<R>) -> Result<WittVector<R>> {
        self.check(a)?;
        Ok(self.binary(&self.polys.mul, &self.from_int(n, a.len()), a))
    }

    /// Ghost components `w_n = Σ_{i≤n} p^i a_i^{p^{n-i}}` in the coefficient ring.
    pub fn ghost(&self, a: &WittVector<R>) -> Result<Vec<R::Elem>> {
        self.check(a)?;
        let p = self.prime();
        Ok((0..a.len())
            .map(|n| {
                let mut acc = self.ring.zero();
                for i in 0..=n {
                    let pi = self.ring.embed(&num_traits::pow(BigInt::from(p), i));
                    let t = self.ring.pow(&a.comps[i], p.pow((n - i) as u32));
                    acc = self.ring.add(&acc, &self.ring.mul(&pi, &t));
                }
                acc
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn one_plus_one_in_w2() {
        // over Z/4 the carry component is S_1(1,0,1,0) = -1 = 3
        let r4 = ZModPk::new(2, 2).unwrap();
        let w = WittOps::new(r4.clone(), 2).unwrap();
        let one = w.vector(big(&[1, 0])).unwrap();
        assert_eq!(w.add(&one, &one).unwrap().components(), big(&[2, 3]).as_slice());
        // over F_2 this is the familiar 1 + 1 = V(1)
        let f2 = ZModPk::new(2, 1).unwrap();
        let w = WittOps::new(f2, 2).unwrap();
        let one = w.vector(big(&[1, 0])).unwrap();
        assert_eq!(w.add(&one, &one).unwrap().components(), big(&[0, 1]).as_slice());
    }

    #[test]
    fn ghost_components_definition() {
        let r = ZModPk::new(3, 5).unwrap();
        let w = WittOps::new(r, 2).unwrap();
        let a = w.vector(big(&[2, 5])).unwrap();
        assert_eq!(w.ghost(&a).unwrap(), big(&[2, 8 + 15]));
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let a = WittOps::new(ZModPk::new(2, 3).unwrap(), 2).unwrap();
        let b = WittOps::new(ZModPk::new(2, 4).unwrap(), 2).unwrap();
        let x = a.one(2);
        let y = b.one(2);
        assert_eq!(a.add(&x, &y), Err(Error::RingMismatch));
    }

    #[test]
    fn truncated_poly_ring_arithmetic() {
        let r = TruncatedPoly::new(ZModPk::new(2, 3).unwrap(), 1, 2);
        let t = r.variable(0);
        let t3 = r.mul(&r.mul(&t, &t), &t);
        assert!(r.is_zero(&t3));
        let w = WittOps::new(r.clone(), 2).unwrap();
        let a = w.teichmuller(&t, 2);
        let s = w.add(&a, &a).unwrap();
        // [t] + [t] = (2t, -t^2)
        let two_t = r.mul(&r.embed(&BigInt::from(2)), &t);
        let minus_t2 = r.neg(&r.mul(&t, &t));
        assert_eq!(s.components(), &[two_t, minus_t2]);
    }
}
