//! Dense exact matrices over Q and Z, with the two normal forms the rest of the
//! crate relies on: Smith form over Z (coinvariant lattices) and Smith form over
//! the local ring Z_(p) (relative positions, saturations).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, val, Q};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| fmt_q(&self[(i, j)])).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| Q::from_integer(x.into()))).collect();
        QMatrix { rows: r, cols: c, data }
    }

    pub fn diagonal(entries: &[Q]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn from_cols(cols: &[Vec<Q>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).fold(Q::zero(), |a, b| a + b))
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn pow(&self, mut e: u64) -> QMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
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

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).fold(Q::zero(), |a, b| a + b)
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> QMatrix {
        let mut out = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Kronecker product.
    pub fn kron(&self, other: &QMatrix) -> QMatrix {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * &other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Row echelon reduction; returns (rank, determinant if square).
    fn eliminate(&self) -> (usize, Q) {
        let mut m = self.clone();
        let mut rank = 0;
        let mut det = Q::one();
        for c in 0..m.cols {
            let Some(piv) = (rank..m.rows).find(|&r| !m[(r, c)].is_zero()) else {
                det = Q::zero();
                continue;
            };
            if piv != rank {
                m.swap_rows(piv, rank);
                det = -det;
            }
            let pv = m[(rank, c)].clone();
            det *= &pv;
            for r in rank + 1..m.rows {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = &m[(r, c)] / &pv;
                for k in c..m.cols {
                    let t = &f * &m[(rank, k)];
                    m[(r, k)] -= t;
                }
            }
            rank += 1;
        }
        if rank < m.rows.min(m.cols) || !m.is_square() {
            det = Q::zero();
        }
        (rank, det)
    }

    pub fn rank(&self) -> usize {
        self.eliminate().0
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square());
        if self.rows == 0 {
            return Q::one();
        }
        self.eliminate().1
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if !self.is_square() {
            return Err(Error::Singular("non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let piv = (c..n)
                .find(|&r| !a[(r, c)].is_zero())
                .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
            a.swap_rows(piv, c);
            inv.swap_rows(piv, c);
            let pv = a[(c, c)].clone();
            for k in 0..n {
                a[(c, k)] /= &pv;
                inv[(c, k)] /= &pv;
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for k in 0..n {
                    let t = &f * &a[(c, k)];
                    a[(r, k)] -= t;
                    let t = &f * &inv[(c, k)];
                    inv[(r, k)] -= t;
                }
            }
        }
        Ok(inv)
    }

    /// Solves `self * x = b` for full-column-rank `self`; `None` if inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hstack(&QMatrix::from_cols(&[b.to_vec()], self.rows));
        let mut m = aug;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(piv) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(piv, r);
            let pv = m[(r, c)].clone();
            for k in 0..m.cols {
                m[(r, k)] /= &pv;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for k in 0..m.cols {
                    let t = &f * &m[(r, k)];
                    m[(i, k)] -= t;
                }
            }
            pivots.push(c);
            r += 1;
        }
        if (r..m.rows).any(|i| !m[(i, self.cols)].is_zero()) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = m[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Coefficients `c_0..c_n` of `det(x I - self)`, lowest degree first
    /// (Faddeev–LeVerrier, exact over Q).
    pub fn charpoly(&self) -> Vec<Q> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            m = next;
            let t = self.mul(&m).trace();
            coeffs[n - k] = -t / Q::from_integer(BigInt::from(k));
        }
        coeffs
    }

    /// Minimum p-adic valuation over all entries (`None` for the zero matrix).
    pub fn min_val(&self, p: u64) -> Option<i64> {
        self.data.iter().filter_map(|x| val(x, p)).min()
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.min_val(p).is_none_or(|v| v >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

/// Smith form over the local ring Z_(p): `left * a * right = diag`, with
/// `left`, `right` in GL(Z_(p)) and diagonal valuations nondecreasing.
/// `left_inv` is the inverse of `left`; its leading columns span the saturation
/// of the image of `a`.
#[derive(Clone, Debug)]
pub struct LocalSmith {
    pub diag: Vec<Q>,
    pub left_inv: QMatrix,
    pub right: QMatrix,
}

impl LocalSmith {
    /// Valuations of the nonzero diagonal entries, in order.
    pub fn valuations(&self, p: u64) -> Vec<i64> {
        self.diag.iter().filter_map(|d| val(d, p)).collect()
    }
}

pub fn local_smith(a: &QMatrix, p: u64) -> LocalSmith {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m = a.clone();
    let mut left_inv = QMatrix::identity(rows);
    let mut right = QMatrix::identity(cols);
    let mut diag = Vec::new();
    for k in 0..rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if let Some(v) = val(&m[(i, j)], p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        m.swap_rows(pi, k);
        left_inv.swap_cols(pi, k);
        m.swap_cols(pj, k);
        right.swap_cols(pj, k);
        let pv = m[(k, k)].clone();
        for i in k + 1..rows {
            if m[(i, k)].is_zero() {
                continue;
            }
            let f = &m[(i, k)] / &pv;
            for j in k..cols {
                let t = &f * &m[(k, j)];
                m[(i, j)] -= t;
            }
            for r in 0..rows {
                let t = &f * &left_inv[(r, i)];
                left_inv[(r, k)] += t;
            }
        }
        for j in k + 1..cols {
            if m[(k, j)].is_zero() {
                continue;
            }
            let g = &m[(k, j)] / &pv;
            m[(k, j)] = Q::zero();
            for r in 0..cols {
                let t = &g * &right[(r, k)];
                right[(r, j)] -= t;
            }
        }
        diag.push(pv);
    }
    LocalSmith { diag, left_inv, right }
}

/// Elementary-divisor exponents over Z_p of a square nonsingular matrix,
/// in nondecreasing order.
pub fn p_elementary_divisors(a: &QMatrix, p: u64) -> Result<Vec<i64>> {
    let s = local_smith(a, p);
    let v = s.valuations(p);
    if v.len() < a.rows().min(a.cols()) {
        return Err(Error::Singular("matrix is singular".into()));
    }
    Ok(v)
}

/// Dense integer matrix.
pub type IMatrix = Vec<Vec<BigInt>>;

pub fn imatrix(rows: &[Vec<i64>]) -> IMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Smith form over Z: `u * a * v = d` with `u`, `v` unimodular and
/// `d[i]` dividing `d[i + 1]`.
#[derive(Clone, Debug)]
pub struct IntSmith {
    pub u: IMatrix,
    pub diag: Vec<BigInt>,
    pub v: IMatrix,
}

fn identity_int(n: usize) -> IMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn smith_int(a: &IMatrix, cols: usize) -> IntSmith {
    let rows = a.len();
    let mut m = a.clone();
    let mut u = identity_int(rows);
    let mut v = identity_int(cols);
    let mut diag = Vec::new();

    let row_op = |m: &mut IMatrix, dst: usize, src: usize, f: &BigInt| {
        for j in 0..m[0].len() {
            let t = f * &m[src][j];
            m[dst][j] -= t;
        }
    };
    let col_op = |m: &mut IMatrix, dst: usize, src: usize, f: &BigInt| {
        for row in m.iter_mut() {
            let t = f * &row[src];
            row[dst] -= t;
        }
    };

    let mut k = 0;
    while k < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(BigInt, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !m[i][j].is_zero() {
                    let a = m[i][j].abs();
                    if best.as_ref().is_none_or(|(b, _, _)| a < *b) {
                        best = Some((a, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        m.swap(pi, k);
        u.swap(pi, k);
        for row in m.iter_mut() {
            row.swap(pj, k);
        }
        for row in v.iter_mut() {
            row.swap(pj, k);
        }
        let mut clean = true;
        for i in k + 1..rows {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].div_floor(&m[k][k]);
            row_op(&mut m, i, k, &f);
            row_op(&mut u, i, k, &f);
            if !m[i][k].is_zero() {
                clean = false;
            }
        }
        for j in k + 1..cols {
            if m[k][j].is_zero() {
                continue;
            }
            let f = m[k][j].div_floor(&m[k][k]);
            col_op(&mut m, j, k, &f);
            col_op(&mut v, j, k, &f);
            if !m[k][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // enforce divisibility of the trailing block by the pivot
        let piv = m[k][k].clone();
        let bad = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| !(&m[i][j] % &piv).is_zero()));
        if let Some(i) = bad {
            let neg_one = -BigInt::one();
            row_op(&mut m, k, i, &neg_one);
            row_op(&mut u, k, i, &neg_one);
            continue;
        }
        if m[k][k].is_negative() {
            for j in 0..cols {
                m[k][j] = -m[k][j].clone();
            }
            for j in 0..rows {
                u[k][j] = -u[k][j].clone();
            }
        }
        diag.push(m[k][k].clone());
        k += 1;
    }
    IntSmith { u, diag, v }
}
