//! Witt structure polynomials, derived by solving the ghost equations over
//! `Q` and checked to be integral.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{p_pow, q_big, Q};

/// Multivariate polynomial with rational coefficients, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl QPoly {
    pub fn zero(nvars: usize) -> Self {
        QPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        QPoly { nvars, terms: BTreeMap::from([(e, Q::one())]) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert_with(Q::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        QPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        QPoly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.nvars, Q::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn to_int(&self) -> Result<IntPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if !c.is_integer() {
                return Err(Error::Consistency(format!("Witt polynomial has non-integral coefficient {c}")));
            }
            terms.push((e.clone(), c.to_integer()));
        }
        Ok(IntPoly { nvars: self.nvars, terms })
    }
}

/// Integer polynomial ready for evaluation in any commutative ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, BigInt)>,
}

impl IntPoly {
    pub fn max_degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[var]).max().unwrap_or(0)
    }
}

/// Structure polynomials for Witt vectors of length `m` at the prime `p`.
/// Binary operations use variables `X_0..X_{m-1}, Y_0..Y_{m-1}`.
#[derive(Debug)]
pub struct WittPolys {
    pub p: u64,
    pub m: usize,
    pub add: Vec<IntPoly>,
    pub mul: Vec<IntPoly>,
    pub neg: Vec<IntPoly>,
    /// `F: W_m → W_{m-1}`, in variables `X_0..X_{m-1}`
    pub frob: Vec<IntPoly>,
}

fn ghost(p: u64, n: usize, vars: &[QPoly]) -> QPoly {
    let mut acc = QPoly::zero(vars[0].nvars);
    for (i, v) in vars.iter().enumerate().take(n + 1) {
        let e = p.pow((n - i) as u32);
        acc = acc.add(&v.pow(e).scale(&p_pow(p, i as i64)));
    }
    acc
}

/// Solves `Σ_{i≤n} p^i E_i^{p^{n-i}} = targets[n]` for every `n`.
fn solve_ghost(p: u64, targets: &[QPoly]) -> Result<Vec<IntPoly>> {
    let mut sols: Vec<QPoly> = Vec::with_capacity(targets.len());
    for (n, t) in targets.iter().enumerate() {
        let mut rest = t.clone();
        for (i, s) in sols.iter().enumerate() {
            let e = p.pow((n - i) as u32);
            rest = rest.sub(&s.pow(e).scale(&p_pow(p, i as i64)));
        }
        sols.push(rest.scale(&p_pow(p, -(n as i64))));
    }
    sols.iter().map(QPoly::to_int).collect()
}

impl WittPolys {
    pub fn derive(p: u64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("Witt length must be positive".into()));
        }
        let two: Vec<QPoly> = (0..2 * m).map(|i| QPoly::var(2 * m, i)).collect();
        let (xs, ys) = two.split_at(m);
        let one: Vec<QPoly> = (0..m).map(|i| QPoly::var(m, i)).collect();
        let gx: Vec<QPoly> = (0..m).map(|n| ghost(p, n, xs)).collect();
        let gy: Vec<QPoly> = (0..m).map(|n| ghost(p, n, ys)).collect();
        let g1: Vec<QPoly> = (0..m).map(|n| ghost(p, n, &one)).collect();
        let add = solve_ghost(p, &gx.iter().zip(&gy).map(|(a, b)| a.add(b)).collect::<Vec<_>>())?;
        let mul = solve_ghost(p, &gx.iter().zip(&gy).map(|(a, b)| a.mul(b)).collect::<Vec<_>>())?;
        let neg = solve_ghost(p, &g1.iter().map(|a| a.scale(&q_big(BigInt::from(-1)))).collect::<Vec<_>>())?;
        let frob = solve_ghost(p, &g1[1..])?;
        Ok(WittPolys { p, m, add, mul, neg, frob })
    }
}

type Cache = RwLock<HashMap<(u64, usize), Arc<WittPolys>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Structure polynomials for `(p, m)`, derived on first use and shared.
pub fn witt_polys(p: u64, m: usize) -> Result<Arc<WittPolys>> {
    if let Some(hit) = cache().read().expect("Witt cache poisoned").get(&(p, m)) {
        return Ok(Arc::clone(hit));
    }
    let derived = Arc::new(WittPolys::derive(p, m)?);
    let mut guard = cache().write().expect("Witt cache poisoned");
    Ok(Arc::clone(guard.entry((p, m)).or_insert(derived)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_addition_polynomial_p2() {
        let w = WittPolys::derive(2, 2).unwrap();
        // S_1 = X_1 + Y_1 - X_0 Y_0 for p = 2
        let mut terms = w.add[1].terms.clone();
        terms.sort();
        let expect = vec![
            (vec![0, 0, 0, 1], BigInt::from(1)),
            (vec![0, 1, 0, 0], BigInt::from(1)),
            (vec![1, 0, 1, 0], BigInt::from(-1)),
        ];
        let mut expect = expect;
        expect.sort();
        assert_eq!(terms, expect);
    }

    #[test]
    fn derivation_is_integral_for_small_primes() {
        for p in [2, 3, 5] {
            let w = WittPolys::derive(p, 3).unwrap();
            assert_eq!(w.add.len(), 3);
            assert_eq!(w.frob.len(), 2);
        }
    }

    #[test]
    fn cache_returns_shared_instance() {
        let a = witt_polys(3, 2).unwrap();
        let b = witt_polys(3, 2).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
