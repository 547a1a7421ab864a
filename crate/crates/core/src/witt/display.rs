//! Displays `(M, M₁, Φ, Φ₁)` over `W_m(F_p)` attached to monomial
//! isocrystals with `Φ₁ = bσ`, `Φ = pbσ` and `M₁ = (bσ)⁻¹M`, and a checker
//! for the display axioms at finite Witt length.
//!
//! Linear algebra over `W_m(F_p)` uses its chain-ring structure: every element
//! is `p^d u` with `u` a unit, `p·x = V(x)` because Frobenius is the identity
//! on `W(F_p)`, and unit inverses come from Newton iteration.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ring::{CoeffRing, WittOps, WittVector, ZModPk};
use crate::error::{Error, Result};
use crate::isocrystal::MonomialIsocrystal;

/// Row-major matrix of Witt vectors.
pub type WittMatrix = Vec<Vec<WittVector<ZModPk>>>;

/// `M = W_m(F_p)^n` with the standard basis; `M₁` is the column span of
/// `m1_columns` (which should contain `pM`); `phi` holds `Φ(e_j)` in column
/// `j` and `phi1` holds `Φ₁` of the `j`-th `M₁` generator.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplayDatum {
    pub p: u64,
    pub length: usize,
    pub rank: usize,
    pub m1_columns: WittMatrix,
    pub phi: WittMatrix,
    pub phi1: WittMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplayReport {
    pub contains_pm: bool,
    pub quotient_free: bool,
    pub phi_compatible: bool,
    pub phi1_generates: bool,
    /// first generator with `pΦ₁(c) ≠ Φ(c)`
    pub witness_column: Option<usize>,
    /// rank of the Hodge quotient `M/M₁` when it is free
    pub quotient_rank: usize,
    pub psi: WittMatrix,
    pub psi_invertible: bool,
}

impl DisplayReport {
    pub fn all_pass(&self) -> bool {
        self.contains_pm && self.quotient_free && self.phi_compatible && self.phi1_generates
    }
}

/// Arithmetic helpers on `W_m(F_p)`.
struct Chain {
    ops: WittOps<ZModPk>,
    m: usize,
}

impl Chain {
    fn new(p: u64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("Witt length must be positive".into()));
        }
        Ok(Chain { ops: WittOps::new(ZModPk::new(p, 1)?, m)?, m })
    }

    fn p(&self) -> u64 {
        self.ops.prime()
    }

    fn zero(&self) -> WittVector<ZModPk> {
        self.ops.zero(self.m)
    }

    fn one(&self) -> WittVector<ZModPk> {
        self.ops.one(self.m)
    }

    /// `p^k = V^k(1)`.
    fn p_pow(&self, k: usize) -> WittVector<ZModPk> {
        let mut comps = vec![BigInt::zero(); self.m];
        if k < self.m {
            comps[k] = BigInt::from(1);
        }
        WittVector::new(self.ops.ring().clone(), comps)
    }

    fn order(&self, x: &WittVector<ZModPk>) -> usize {
        x.components().iter().position(|c| !c.is_zero()).unwrap_or(self.m)
    }

    fn add(&self, a: &WittVector<ZModPk>, b: &WittVector<ZModPk>) -> Result<WittVector<ZModPk>> {
        self.ops.add(a, b)
    }

    fn sub(&self, a: &WittVector<ZModPk>, b: &WittVector<ZModPk>) -> Result<WittVector<ZModPk>> {
        self.ops.sub(a, b)
    }

    fn mul(&self, a: &WittVector<ZModPk>, b: &WittVector<ZModPk>) -> Result<WittVector<ZModPk>> {
        self.ops.mul(a, b)
    }

    /// Componentwise `p`-th power, the Witt Frobenius in characteristic `p`.
    fn sigma(&self, a: &WittVector<ZModPk>) -> WittVector<ZModPk> {
        let r = self.ops.ring();
        WittVector::new(r.clone(), a.components().iter().map(|c| r.pow(c, self.p())).collect())
    }

    /// `y` with `p^d y = x`, assuming `order(x) ≥ d`.
    fn div_p_pow(&self, x: &WittVector<ZModPk>, d: usize) -> WittVector<ZModPk> {
        let mut comps: Vec<BigInt> = x.components()[d..].to_vec();
        comps.resize(self.m, BigInt::zero());
        WittVector::new(self.ops.ring().clone(), comps)
    }

    fn unit_inverse(&self, u: &WittVector<ZModPk>) -> Result<WittVector<ZModPk>> {
        let r = self.ops.ring();
        let a0 = &u.components()[0];
        if a0.is_zero() {
            return Err(Error::Singular("inverting a non-unit Witt vector".into()));
        }
        let mut y = self.ops.teichmuller(&r.pow(a0, self.p() - 2), self.m);
        let two = self.ops.from_int(2, self.m);
        let mut prec = 1;
        while prec < self.m {
            let uy = self.mul(u, &y)?;
            y = self.mul(&y, &self.sub(&two, &uy)?)?;
            prec *= 2;
        }
        Ok(y)
    }

    fn mat_vec_sigma(&self, a: &WittMatrix, v: &[WittVector<ZModPk>]) -> Result<Vec<WittVector<ZModPk>>> {
        a.iter()
            .map(|row| {
                row.iter().zip(v).try_fold(self.zero(), |acc, (x, y)| self.add(&acc, &self.mul(x, &self.sigma(y))?))
            })
            .collect()
    }

    /// Smith reduction `U A V = diag(p^{d_i})`; returns `U` and the orders
    /// `d_i` (`m` for zero), one per row of `A`.
    fn smith(&self, a: &WittMatrix) -> Result<(WittMatrix, Vec<usize>)> {
        let n = a.len();
        let k = a.first().map_or(0, Vec::len);
        let mut a = a.clone();
        let mut u: WittMatrix =
            (0..n).map(|i| (0..n).map(|j| if i == j { self.one() } else { self.zero() }).collect()).collect();
        let mut orders = vec![self.m; n];
        for t in 0..n.min(k) {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in t..n {
                for j in t..k {
                    let d = self.order(&a[i][j]);
                    if d < self.m && best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, i, j));
                    }
                }
            }
            let Some((d, pi, pj)) = best else { break };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let unit_inv = self.unit_inverse(&self.div_p_pow(&a[t][t], d))?;
            for i in t + 1..n {
                let f = self.mul(&self.div_p_pow(&a[i][t], d), &unit_inv)?;
                for j in 0..k {
                    a[i][j] = self.sub(&a[i][j], &self.mul(&f, &a[t][j])?)?;
                }
                for j in 0..n {
                    u[i][j] = self.sub(&u[i][j], &self.mul(&f, &u[t][j])?)?;
                }
            }
            for j in t + 1..k {
                let f = self.mul(&self.div_p_pow(&a[t][j], d), &unit_inv)?;
                for row in a.iter_mut() {
                    row[j] = self.sub(&row[j], &self.mul(&f, &row[t])?)?;
                }
            }
            orders[t] = d;
        }
        Ok((u, orders))
    }
}

fn constant(c: &Chain, n: u64) -> WittVector<ZModPk> {
    c.ops.from_int(n, c.m)
}

/// The display of `b` over `W_m(F_p)`. Requires `b` to be defined over
/// `Q_p` (Frobenius power 1) with exponents in `{−1, 0}`, so that
/// `pM ⊆ M₁ ⊆ M`.
pub fn display_from_element(b: &MonomialIsocrystal, p: u64, m: usize) -> Result<DisplayDatum> {
    if b.frobenius_power() != 1 {
        return Err(Error::Unsupported("displays are built over W(F_p) only (Frobenius power 1)".into()));
    }
    if let Some(&e) = b.exponents().iter().find(|&&e| e > 0) {
        return Err(Error::NotPDivisible(format!("exponent {e} puts p^{{-{e}}}e_i in M₁, so M₁ is not inside M")));
    }
    if let Some(&e) = b.exponents().iter().find(|&&e| e < -1) {
        return Err(Error::NotPDivisible(format!("exponent {e} leaves pM outside M₁")));
    }
    let c = Chain::new(p, m)?;
    let n = b.size();
    let perm = b.permutation();
    let exps = b.exponents();
    let zero_mat = || -> WittMatrix { vec![vec![c.zero(); n]; n] };
    let mut m1 = zero_mat();
    let mut phi = zero_mat();
    let mut phi1 = zero_mat();
    for i in 0..n {
        let shift = (-exps[i]) as usize;
        m1[i][i] = c.p_pow(shift);
        phi[perm[i]][i] = c.p_pow(1 - shift);
        phi1[perm[i]][i] = c.one();
    }
    Ok(DisplayDatum { p, length: m, rank: n, m1_columns: m1, phi, phi1 })
}

fn check_shape(d: &DisplayDatum) -> Result<()> {
    for mat in [&d.m1_columns, &d.phi, &d.phi1] {
        if mat.len() != d.rank {
            return Err(Error::Dimension { expected: d.rank, got: mat.len() });
        }
        for row in mat {
            if row.len() != d.rank {
                return Err(Error::Dimension { expected: d.rank, got: row.len() });
            }
            for x in row {
                if x.len() != d.length {
                    return Err(Error::Dimension { expected: d.length, got: x.len() });
                }
            }
        }
    }
    Ok(())
}

pub fn display_check(d: &DisplayDatum) -> Result<DisplayReport> {
    check_shape(d)?;
    let c = Chain::new(d.p, d.length)?;
    let n = d.rank;
    let ring = c.ops.ring().clone();
    for x in d.m1_columns.iter().chain(&d.phi).chain(&d.phi1).flatten() {
        if x.ring() != &ring {
            return Err(Error::RingMismatch);
        }
    }
    // colspan(M1) = U⁻¹ diag(p^{d_i}); v lies in it iff (Uv)_i has order ≥ d_i
    let (u, orders) = c.smith(&d.m1_columns)?;
    let p1 = c.p_pow(1);
    let contains_pm = (0..n).all(|j| (0..n).all(|i| c.order(&c.mul(&p1, &u[i][j]).unwrap()) >= orders[i]));
    let quotient_free = orders.iter().all(|&o| o <= 1);
    let quotient_rank = orders.iter().filter(|&&o| o == 1).count();

    let mut witness_column = None;
    for j in 0..n {
        let col: Vec<_> = (0..n).map(|i| d.m1_columns[i][j].clone()).collect();
        let rhs = c.mat_vec_sigma(&d.phi, &col)?;
        let lhs: Vec<_> = (0..n).map(|i| c.mul(&p1, &d.phi1[i][j])).collect::<Result<_>>()?;
        if lhs != rhs {
            witness_column = Some(j);
            break;
        }
    }

    // Φ₁ is σ-linear and σ is bijective on W(F_p), so Φ₁(M₁) spans the
    // column span of the Φ₁ matrix; it generates M iff that matrix is
    // invertible, i.e. every Smith order vanishes.
    let (_, psi_orders) = c.smith(&d.phi1)?;
    let psi_invertible = psi_orders.iter().all(|&o| o == 0);
    let phi1_generates = mod_p_rank(&d.phi1, d.p) == n;
    Ok(DisplayReport {
        contains_pm,
        quotient_free,
        phi_compatible: witness_column.is_none(),
        phi1_generates,
        witness_column,
        quotient_rank,
        psi: d.phi1.clone(),
        psi_invertible,
    })
}

/// Rank over `F_p` of the reduction of a Witt matrix.
fn mod_p_rank(a: &WittMatrix, p: u64) -> usize {
    let mut rows: Vec<Vec<u64>> = a
        .iter()
        .map(|row| row.iter().map(|x| x.components().first().and_then(|c| c.to_u64()).unwrap_or(0) % p).collect())
        .collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = mod_pow(rows[rank][col], p - 2, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col] * inv % p;
                for j in 0..cols {
                    rows[i][j] = (rows[i][j] + p * p - f * rows[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

impl DisplayDatum {
    /// Witt components of every entry, for serialization.
    pub fn component_table(mat: &WittMatrix) -> Vec<Vec<Vec<String>>> {
        mat.iter().map(|row| row.iter().map(|x| x.components().iter().map(|c| c.to_string()).collect()).collect()).collect()
    }

    /// Replaces `Φ₁` by zero, for negative tests.
    pub fn with_zero_phi1(&self) -> Result<Self> {
        let c = Chain::new(self.p, self.length)?;
        let mut out = self.clone();
        out.phi1 = vec![vec![c.zero(); self.rank]; self.rank];
        Ok(out)
    }

    /// Adds `n` to the `(i, j)` entry of `Φ₁`, for negative tests.
    pub fn perturb_phi1(&self, i: usize, j: usize, n: u64) -> Result<Self> {
        let c = Chain::new(self.p, self.length)?;
        let mut out = self.clone();
        out.phi1[i][j] = c.add(&out.phi1[i][j], &constant(&c, n))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_one_p_inverse() {
        for p in [2, 3, 5] {
            let b = MonomialIsocrystal::diagonal(vec![0, -1]);
            let d = display_from_element(&b, p, 3).unwrap();
            let r = display_check(&d).unwrap();
            assert!(r.all_pass() && r.psi_invertible, "p = {p}");
            assert_eq!(r.quotient_rank, 1);
        }
    }

    #[test]
    fn positive_exponent_is_rejected() {
        let b = MonomialIsocrystal::diagonal(vec![0, 1]);
        assert!(matches!(display_from_element(&b, 2, 3), Err(Error::NotPDivisible(_))));
    }

    #[test]
    fn supersingular_window() {
        // b e1 = p⁻¹ e2, b e2 = e1
        let b = MonomialIsocrystal::new(vec![1, 0], vec![-1, 0], 1).unwrap();
        let r = display_check(&display_from_element(&b, 3, 3).unwrap()).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.quotient_rank, 1);
    }

    #[test]
    fn degenerate_data_fail_the_right_axioms() {
        let d = display_from_element(&MonomialIsocrystal::diagonal(vec![0, -1]), 2, 3).unwrap();
        let r = display_check(&d.with_zero_phi1().unwrap()).unwrap();
        assert!(!r.phi1_generates && !r.psi_invertible);
        let r = display_check(&d.perturb_phi1(0, 1, 1).unwrap()).unwrap();
        assert!(!r.phi_compatible);
        assert_eq!(r.witness_column, Some(1));
        assert!(r.contains_pm && r.quotient_free);
    }

    #[test]
    fn unit_inverse_by_newton() {
        let c = Chain::new(3, 4).unwrap();
        let u = c.add(&c.one(), &c.p_pow(1)).unwrap();
        let v = c.unit_inverse(&u).unwrap();
        assert_eq!(c.mul(&u, &v).unwrap(), c.one());
    }
}
