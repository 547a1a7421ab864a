//! Slopes of isocrystals given by exact matrices.
//!
//! A [`MonomialIsocrystal`] is a monomial matrix `b` with `b e_i = p^{k_i} e_{π(i)}`
//! together with a Frobenius period `r`; its slopes are read off the cycles
//! of `π`. A [`RationalIsocrystal`] is an arbitrary invertible rational
//! matrix on which Frobenius acts trivially; its slopes come from the Newton
//! polygon of the characteristic polynomial.

mod splitting;

use num_traits::{Signed, Zero};

use crate::affine_weyl::NewtonPoint;
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{p_pow, q, val, Q};
use crate::root_datum::RootDatum;

pub use splitting::{csd_rational, split_by_eigenbasis, CsdReport, CsdVerdict, ThresholdWitness};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialIsocrystal {
    perm: Vec<usize>,
    exponents: Vec<i64>,
    frobenius_power: u32,
}

impl MonomialIsocrystal {
    pub fn new(perm: Vec<usize>, exponents: Vec<i64>, frobenius_power: u32) -> Result<Self> {
        let n = perm.len();
        if exponents.len() != n {
            return Err(Error::Dimension { expected: n, got: exponents.len() });
        }
        if frobenius_power == 0 {
            return Err(Error::Config("Frobenius period must be positive".into()));
        }
        let mut seen = vec![false; n];
        for &j in &perm {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Config(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(MonomialIsocrystal { perm, exponents, frobenius_power })
    }

    pub fn diagonal(exponents: Vec<i64>) -> Self {
        let n = exponents.len();
        MonomialIsocrystal { perm: (0..n).collect(), exponents, frobenius_power: 1 }
    }

    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn frobenius_power(&self) -> u32 {
        self.frobenius_power
    }

    /// `b^k` as (permutation, exponents) in the same convention.
    pub fn power(&self, k: usize) -> (Vec<usize>, Vec<i64>) {
        let n = self.size();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut exps = vec![0i64; n];
        for _ in 0..k {
            for i in 0..n {
                exps[i] += self.exponents[perm[i]];
                perm[i] = self.perm[perm[i]];
            }
        }
        (perm, exps)
    }

    /// The matrix of `b` at a numeric prime.
    pub fn to_matrix(&self, p: u64) -> QMatrix {
        let n = self.size();
        let mut m = QMatrix::zeros(n, n);
        for (i, (&j, &e)) in self.perm.iter().zip(&self.exponents).enumerate() {
            m[(j, i)] = p_pow(p, e);
        }
        m
    }

    /// Cycles of the permutation, each starting at its smallest index.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut j = self.perm[s];
            while j != s {
                seen[j] = true;
                c.push(j);
                j = self.perm[j];
            }
            out.push(c);
        }
        out
    }

    /// Restriction of scalars from the degree-`r` unramified extension: an
    /// `nr × nr` rational matrix cycling `r` copies of `Q^n`, with `b` on the
    /// wrap-around block. Each slope appears `r` times.
    pub fn restriction_of_scalars(&self, p: u64) -> QMatrix {
        let n = self.size();
        let r = self.frobenius_power as usize;
        let b = self.to_matrix(p);
        let mut m = QMatrix::zeros(n * r, n * r);
        for k in 0..r {
            let (row0, col0) = (((k + 1) % r) * n, k * n);
            for i in 0..n {
                for j in 0..n {
                    m[(row0 + i, col0 + j)] = if k + 1 == r {
                        b[(i, j)].clone()
                    } else if i == j {
                        q(1)
                    } else {
                        Q::zero()
                    };
                }
            }
        }
        m
    }

    /// Tensor square, `(b ⊗ b)` with the same period.
    pub fn tensor_square(&self) -> Self {
        let n = self.size();
        let mut perm = vec![0; n * n];
        let mut exps = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                perm[i * n + j] = self.perm[i] * n + self.perm[j];
                exps[i * n + j] = self.exponents[i] + self.exponents[j];
            }
        }
        MonomialIsocrystal { perm, exponents: exps, frobenius_power: self.frobenius_power }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalIsocrystal {
    matrix: QMatrix,
    prime: u64,
}

impl RationalIsocrystal {
    pub fn new(matrix: QMatrix, prime: u64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension { expected: matrix.rows(), got: matrix.cols() });
        }
        if prime < 2 {
            return Err(Error::Config("p must be a prime".into()));
        }
        if matrix.det().is_zero() {
            return Err(Error::Singular("isocrystal matrix is not invertible".into()));
        }
        Ok(RationalIsocrystal { matrix, prime })
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }
}

fn sorted(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v
}

pub fn slopes_monomial(m: &MonomialIsocrystal) -> Vec<Q> {
    let r = i64::from(m.frobenius_power);
    let mut out = Vec::with_capacity(m.size());
    for c in m.cycles() {
        let s: i64 = c.iter().map(|&i| m.exponents[i]).sum();
        let slope = q(s) / q(c.len() as i64 * r);
        out.extend(std::iter::repeat_n(slope, c.len()));
    }
    sorted(out)
}

/// Valuations of the roots of a polynomial (coefficients lowest degree
/// first, nonzero constant term), from the lower convex hull of
/// `(i, v(c_i))`.
pub fn newton_polygon_slopes(coeffs: &[Q], p: u64) -> Result<Vec<Q>> {
    let pts: Vec<(i64, i64)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| val(c, p).map(|v| (i as i64, v)))
        .collect();
    if pts.first().map(|pt| pt.0) != Some(0) {
        return Err(Error::Singular("zero constant term".into()));
    }
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the segment a-pt
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = -(q(b.1 - a.1) / q(b.0 - a.0));
        out.extend(std::iter::repeat_n(slope, (b.0 - a.0) as usize));
    }
    Ok(sorted(out))
}

pub fn slopes_charpoly(m: &RationalIsocrystal) -> Result<Vec<Q>> {
    newton_polygon_slopes(&m.matrix.charpoly(), m.prime)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepName {
    Standard,
    Adjoint,
    Tensor(u32),
    Hom,
}

/// A representation recorded by its weights, repeated by multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedRep {
    pub name: RepName,
    pub weights: Vec<Vec<i64>>,
}

impl WeightedRep {
    pub fn standard(d: &RootDatum) -> Result<Self> {
        let w = d
            .standard_weights()
            .ok_or_else(|| Error::Unsupported("no standard representation for this datum".into()))?;
        Ok(WeightedRep { name: RepName::Standard, weights: w.to_vec() })
    }

    pub fn adjoint(d: &RootDatum) -> Self {
        let mut weights = vec![vec![0; d.cochar_rank()]; d.rank()];
        weights.extend(d.roots().iter().cloned());
        WeightedRep { name: RepName::Adjoint, weights }
    }

    pub fn tensor(d: &RootDatum, k: u32) -> Result<Self> {
        let std = Self::standard(d)?;
        let mut weights = vec![vec![0; d.cochar_rank()]];
        for _ in 0..k {
            weights = weights
                .iter()
                .flat_map(|a| std.weights.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect()))
                .collect();
        }
        Ok(WeightedRep { name: RepName::Tensor(k), weights })
    }

    /// `End(V) = V ⊗ V^∨` of the standard representation.
    pub fn hom(d: &RootDatum) -> Result<Self> {
        let std = Self::standard(d)?;
        let weights = std
            .weights
            .iter()
            .flat_map(|a| std.weights.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x - y).collect()))
            .collect();
        Ok(WeightedRep { name: RepName::Hom, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// `{⟨χ, ν⟩ : χ ∈ weights}`, sorted.
pub fn slopes_via_weights(d: &RootDatum, rep: &WeightedRep, nu: &NewtonPoint) -> Result<Vec<Q>> {
    d.check_len(nu.vector.len())?;
    rep.weights
        .iter()
        .map(|chi| {
            d.check_len(chi.len())?;
            Ok(d.pair(chi, &nu.vector))
        })
        .collect::<Result<Vec<Q>>>()
        .map(sorted)
}

/// Sum of the positive slopes of the adjoint representation at `ν`, which is
/// the dimension of the slope-`> 0` part of `End`; must be an integer.
pub fn nonneg_slope_dim(d: &RootDatum, nu_dom: &[Q]) -> Result<u64> {
    d.check_len(nu_dom.len())?;
    if !d.is_dominant(nu_dom) {
        return Err(Error::Precondition("Newton point must be dominant".into()));
    }
    let total: Q = d.roots().iter().map(|a| d.pair(a, nu_dom)).filter(|s| s.is_positive()).sum();
    if !total.is_integer() {
        return Err(Error::Consistency(format!("adjoint slope dimension {total} is not an integer")));
    }
    total
        .to_integer()
        .try_into()
        .map_err(|_| Error::Consistency("adjoint slope dimension out of range".into()))
}

/// Either kind of isocrystal, for the slope-divisibility test.
#[derive(Clone, Debug)]
pub enum Isocrystal {
    Monomial(MonomialIsocrystal),
    Rational(RationalIsocrystal),
}

pub fn is_completely_slope_divisible(m: &Isocrystal) -> Result<CsdReport> {
    match m {
        Isocrystal::Monomial(b) => Ok(csd_monomial(b)),
        Isocrystal::Rational(b) => csd_rational(b),
    }
}

/// Monomial data are always completely slope divisible: some power of `b` is
/// diagonal, with the standard basis vectors of each cycle spanning an
/// isoclinic summand.
pub fn csd_monomial(m: &MonomialIsocrystal) -> CsdReport {
    let period = m.cycles().iter().fold(1u64, |acc, c| num_integer::lcm(acc, c.len() as u64));
    let slopes = slopes_monomial(m);
    CsdReport {
        verdict: CsdVerdict::Split,
        period: period * u64::from(m.frobenius_power),
        slopes,
        precision: 0,
        witnesses: Vec::new(),
    }
}
