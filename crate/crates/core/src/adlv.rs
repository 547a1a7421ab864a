//! Lattice models of affine Deligne–Lusztig sets at hyperspecial level.
//!
//! A lattice `L` with `p^N Λ ⊆ L ⊆ p^{-N} Λ` is stored through `p^N L`, which
//! sits between `p^{2N} Λ` and `Λ` and is given by its column Hermite form:
//! upper triangular, diagonal `p^{a_i}`, entries right of the diagonal in
//! `[0, p^{a_i})`. Enumeration is exhaustive up to the depth `N`, so an
//! empty census is only evidence of emptiness at that depth.

use num_traits::Zero;

use crate::affine_weyl::{AffineWeyl, Element, Sigma};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::isocrystal::{is_completely_slope_divisible, CsdReport, CsdVerdict, Isocrystal, MonomialIsocrystal, RationalIsocrystal};
use crate::linalg::{local_smith, QMatrix};
use crate::newton::neutral_acceptable;
use crate::rational::{p_pow, q, val};

pub const MAX_SIZE: usize = 3;
pub const MAX_DEPTH: u32 = 2;
pub const MAX_PERIOD: u32 = 2;
pub const DEFAULT_MAX_CANDIDATES: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeModel {
    n: usize,
    p: u64,
    depth: u32,
    form: Vec<Vec<i64>>,
}

fn check_budget(n: usize, p: u64, depth: u32) -> Result<()> {
    if !matches!(p, 2 | 3) {
        return Err(Error::Budget { what: format!("lattice enumeration at p = {p} (only 2 and 3)"), explored: 0 });
    }
    if n == 0 || n > MAX_SIZE {
        return Err(Error::Budget { what: format!("lattice enumeration in rank {n} (at most {MAX_SIZE})"), explored: 0 });
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Budget { what: format!("lattice enumeration at depth {depth} (1..={MAX_DEPTH})"), explored: 0 });
    }
    Ok(())
}

fn modulus(p: u64, depth: u32) -> i64 {
    (p as i64).pow(2 * depth)
}

/// Inverse of a unit modulo `m` by extended Euclid.
fn inv_mod(a: i64, m: i64) -> i64 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    s0.rem_euclid(m)
}

fn val_i64(x: i64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while v < cap && y % p as i64 == 0 {
        y /= p as i64;
        v += 1;
    }
    v
}

impl LatticeModel {
    /// Canonical model of the `Z_p`-span of `gens` (columns of `p^N L` in
    /// `Λ` coordinates) together with `p^{2N} Λ`.
    pub fn from_generators(n: usize, p: u64, depth: u32, gens: &[Vec<i64>]) -> Result<Self> {
        let m = modulus(p, depth);
        let cap = 2 * depth;
        let mut pool: Vec<Vec<i64>> = Vec::with_capacity(gens.len() + n);
        for g in gens {
            if g.len() != n {
                return Err(Error::Dimension { expected: n, got: g.len() });
            }
            pool.push(g.iter().map(|x| x.rem_euclid(m)).collect());
        }
        let mut form = vec![vec![0i64; n]; n];
        let mut exps = vec![cap; n];
        for i in (0..n).rev() {
            let best = pool.iter().enumerate().map(|(k, v)| (val_i64(v[i], p, cap), k)).min();
            let (a, k) = best.unwrap_or((cap, usize::MAX));
            let mut pivot = vec![0i64; n];
            if a >= cap {
                // nothing left in this row: the pivot is p^{2N} e_i
                pivot[i] = m;
            } else {
                let mut h = pool.swap_remove(k);
                let unit = h[i] / (p as i64).pow(a);
                let u = inv_mod(unit, m);
                for x in h.iter_mut() {
                    *x = ((*x as i128 * u as i128).rem_euclid(m as i128)) as i64;
                }
                let pa = (p as i64).pow(a);
                for v in pool.iter_mut() {
                    let f = v[i] / pa;
                    if f != 0 {
                        for (x, y) in v.iter_mut().zip(&h) {
                            *x = (*x - f * y).rem_euclid(m);
                        }
                    }
                }
                // p^{2N-a} h has zero i-th entry and may carry information above
                let tail = (p as i64).pow(cap - a);
                pool.push(h.iter().map(|y| (y * tail).rem_euclid(m)).collect());
                pivot = h;
            }
            exps[i] = a.min(cap);
            for r in 0..n {
                form[r][i] = pivot[r];
            }
        }
        let mut model = LatticeModel { n, p, depth, form };
        model.reduce(&exps);
        Ok(model)
    }

    fn reduce(&mut self, exps: &[u32]) {
        let n = self.n;
        for j in 0..n {
            for r in (j + 1)..n {
                self.form[r][j] = 0;
            }
            self.form[j][j] = (self.p as i64).pow(exps[j]);
            for k in (0..j).rev() {
                let d = self.form[k][k];
                let f = self.form[k][j].div_euclid(d);
                if f != 0 {
                    for r in 0..=k {
                        self.form[r][j] -= f * self.form[r][k];
                    }
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Hermite form of `p^N L`, rows of the matrix whose columns span it.
    pub fn form(&self) -> &[Vec<i64>] {
        &self.form
    }

    /// Exponents `a_i` of the diagonal of the Hermite form.
    pub fn pivot_pattern(&self) -> Vec<u32> {
        (0..self.n).map(|i| val_i64(self.form[i][i], self.p, 2 * self.depth)).collect()
    }

    /// A basis of `L` itself, `p^{-N}` times the Hermite form.
    pub fn basis_matrix(&self) -> QMatrix {
        let s = p_pow(self.p, -i64::from(self.depth));
        let mut b = QMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                b[(i, j)] = q(self.form[i][j]) * &s;
            }
        }
        b
    }

    fn form_matrix(&self) -> QMatrix {
        let mut b = QMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                b[(i, j)] = q(self.form[i][j]);
            }
        }
        b
    }

    /// `gL` for `g ∈ GL_n(Z_p)` with integer entries.
    pub fn transform(&self, g: &[Vec<i64>]) -> Result<Self> {
        let n = self.n;
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, got: g.len() });
        }
        let det = QMatrix::from_rows(g.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())?.det();
        if det.is_zero() || val(&det, self.p) != Some(0) {
            return Err(Error::Precondition("change of basis is not invertible over Z_p".into()));
        }
        let m = modulus(self.p, self.depth) as i128;
        let gens: Vec<Vec<i64>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| (0..n).map(|k| g[i][k] as i128 * self.form[k][j] as i128).sum::<i128>().rem_euclid(m) as i64)
                    .collect()
            })
            .collect();
        Self::from_generators(n, self.p, self.depth, &gens)
    }
}

/// Does the upper-triangular `h` with diagonal `p^{a_i}` contain `p^{2N} Λ`?
fn contains_bottom(h: &[Vec<i64>], target: i128) -> bool {
    let n = h.len();
    for j in 0..n {
        let mut y = vec![0i128; n];
        for k in (0..n).rev() {
            let mut rhs = if k == j { target } else { 0 };
            for l in (k + 1)..n {
                rhs -= h[k][l] as i128 * y[l];
            }
            let d = h[k][k] as i128;
            if rhs % d != 0 {
                return false;
            }
            y[k] = rhs / d;
        }
    }
    true
}

fn lattices_with_pattern(n: usize, p: u64, depth: u32, pattern: &[u32]) -> Vec<LatticeModel> {
    let pi = p as i64;
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let ranges: Vec<i64> = slots.iter().map(|&(i, _)| pi.pow(pattern[i])).collect();
    let mut h = vec![vec![0i64; n]; n];
    for i in 0..n {
        h[i][i] = pi.pow(pattern[i]);
    }
    let target = modulus(p, depth) as i128;
    let mut out = Vec::new();
    let mut idx = vec![0i64; slots.len()];
    loop {
        for (s, &(i, j)) in slots.iter().enumerate() {
            h[i][j] = idx[s];
        }
        if contains_bottom(&h, target) {
            out.push(LatticeModel { n, p, depth, form: h.clone() });
        }
        let mut s = 0;
        loop {
            if s == slots.len() {
                return out;
            }
            idx[s] += 1;
            if idx[s] < ranges[s] {
                break;
            }
            idx[s] = 0;
            s += 1;
        }
    }
}

fn candidate_count(n: usize, p: u64, depth: u32) -> u64 {
    // Σ over patterns of Π_i p^{a_i (n-1-i)}
    (0..n)
        .map(|i| (0..=2 * depth).map(|a| p.pow(a * (n - 1 - i) as u32)).sum::<u64>())
        .product()
}

pub fn enumerate_lattices(n: usize, p: u64, depth: u32) -> Result<Vec<LatticeModel>> {
    enumerate_lattices_with(Exec::default(), n, p, depth, DEFAULT_MAX_CANDIDATES)
}

/// Every lattice between `p^depth Λ` and `p^{-depth} Λ`, sorted by Hermite
/// form, with the work split by pivot pattern.
pub fn enumerate_lattices_with(exec: Exec, n: usize, p: u64, depth: u32, max_candidates: u64) -> Result<Vec<LatticeModel>> {
    check_budget(n, p, depth)?;
    let total = candidate_count(n, p, depth);
    if total > max_candidates {
        return Err(Error::Budget { what: format!("{total} Hermite candidates exceed the cap {max_candidates}"), explored: 0 });
    }
    let mut patterns: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..n {
        patterns = patterns
            .into_iter()
            .flat_map(|pre| {
                (0..=2 * depth).map(move |a| {
                    let mut v = pre.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    let mut out: Vec<LatticeModel> =
        exec.map(&patterns, |pat| lattices_with_pattern(n, p, depth, pat)).into_iter().flatten().collect();
    out.sort();
    Ok(out)
}

fn invariant_of(m: &QMatrix, p: u64) -> Result<Vec<i64>> {
    let mut v = local_smith(m, p).valuations(p);
    if v.len() != m.rows() {
        return Err(Error::Singular("change-of-lattice map is not invertible".into()));
    }
    v.sort_unstable_by(|a, b| b.cmp(a));
    Ok(v)
}

/// Cartan invariant `inv(L₁, L₂)`: elementary divisor exponents of the
/// change-of-basis matrix, in decreasing order.
pub fn relative_position(l1: &LatticeModel, l2: &LatticeModel) -> Result<Vec<i64>> {
    if (l1.n, l1.p, l1.depth) != (l2.n, l2.p, l2.depth) {
        return Err(Error::Precondition("lattices live in different models".into()));
    }
    invariant_of(&l1.form_matrix().inverse()?.mul(&l2.form_matrix()), l1.p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CsdStatus {
    Certified(CsdReport),
    Inconclusive { precision: u32, reason: String },
}

impl CsdStatus {
    pub fn slope_divisible(&self) -> Option<bool> {
        match self {
            CsdStatus::Certified(r) => Some(r.verdict == CsdVerdict::Split),
            CsdStatus::Inconclusive { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdlvPoint {
    pub lattice: LatticeModel,
    pub inv: Vec<i64>,
    pub kappa: i64,
    /// the integral isocrystal `(L, bσ)` in a basis of `L`
    pub module: QMatrix,
    pub csd: CsdStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdlvCensus {
    pub p: u64,
    pub depth: u32,
    /// `μ` for the group actually enumerated (repeated for restriction of scalars)
    pub mu: Vec<i64>,
    pub lattices_scanned: usize,
    pub points: Vec<AdlvPoint>,
}

fn check_minuscule(mu: &[i64]) -> Result<()> {
    if mu.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition(format!("{mu:?} is not dominant")));
    }
    if let (Some(a), Some(b)) = (mu.first(), mu.last()) {
        if a - b > 1 {
            return Err(Error::Precondition(format!("{mu:?} is not minuscule")));
        }
    }
    Ok(())
}

/// The matrix of `bσ` on `Q_p^{n r}` and `μ` repeated `r` times.
fn expand(b: &MonomialIsocrystal, mu: &[i64], p: u64) -> Result<(QMatrix, Vec<i64>)> {
    let r = b.frobenius_power();
    if r > MAX_PERIOD {
        return Err(Error::Budget { what: format!("Frobenius period {r} (at most {MAX_PERIOD})"), explored: 0 });
    }
    let mut big_mu: Vec<i64> = mu.iter().copied().cycle().take(mu.len() * r as usize).collect();
    big_mu.sort_unstable_by(|a, b| b.cmp(a));
    let m = if r == 1 { b.to_matrix(p) } else { b.restriction_of_scalars(p) };
    Ok((m, big_mu))
}

pub fn adlv_points(b: &MonomialIsocrystal, mu: &[i64], p: u64, depth: u32) -> Result<AdlvCensus> {
    adlv_points_with(Exec::default(), b, mu, p, depth)
}

pub fn adlv_points_with(exec: Exec, b: &MonomialIsocrystal, mu: &[i64], p: u64, depth: u32) -> Result<AdlvCensus> {
    if mu.len() != b.size() {
        return Err(Error::Dimension { expected: b.size(), got: mu.len() });
    }
    check_minuscule(mu)?;
    let (bm, big_mu) = expand(b, mu, p)?;
    let n = bm.rows();
    let kappa = val(&bm.det(), p).ok_or_else(|| Error::Singular("b is not invertible".into()))?;
    let lattices = enumerate_lattices_with(exec, n, p, depth, DEFAULT_MAX_CANDIDATES)?;
    let scanned = lattices.len();
    if kappa != big_mu.iter().sum::<i64>() {
        return Ok(AdlvCensus { p, depth, mu: big_mu, lattices_scanned: scanned, points: Vec::new() });
    }
    let candidates: Vec<Option<(LatticeModel, QMatrix)>> = exec.map(&lattices, |l| {
        let g = l.form_matrix();
        let module = g.inverse().ok()?.mul(&bm).mul(&g);
        (invariant_of(&module, p).ok()? == big_mu).then(|| (l.clone(), module))
    });
    let hits: Vec<(LatticeModel, QMatrix)> = candidates.into_iter().flatten().collect();
    let points = exec.try_map(&hits, |(l, module)| -> Result<AdlvPoint> {
        let iso = RationalIsocrystal::new(module.clone(), p)?;
        let csd = match is_completely_slope_divisible(&Isocrystal::Rational(iso)) {
            Ok(r) => CsdStatus::Certified(r),
            Err(Error::Inconclusive { precision, reason }) => CsdStatus::Inconclusive { precision, reason },
            Err(e) => return Err(e),
        };
        Ok(AdlvPoint { lattice: l.clone(), inv: big_mu.clone(), kappa, module: module.clone(), csd })
    })?;
    Ok(AdlvCensus { p, depth, mu: big_mu, lattices_scanned: scanned, points })
}

/// Mazur consistency for one element: the census at depths `1..=max_depth`
/// against neutral acceptability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MazurRow {
    pub element: Element,
    pub p: u64,
    pub acceptable: bool,
    /// `(depth, number of points)` for each depth scanned
    pub counts: Vec<(u32, usize)>,
    /// every point at every depth carries a splitting certificate
    pub all_certified_split: bool,
    pub some_point_split: bool,
    /// acceptable but empty at the largest depth: needs a deeper search
    pub flagged: bool,
}

impl MazurRow {
    pub fn nonempty(&self) -> bool {
        self.counts.iter().any(|&(_, c)| c > 0)
    }

    /// Nonemptiness must imply acceptability.
    pub fn consistent(&self) -> bool {
        !self.nonempty() || self.acceptable
    }
}

pub fn mazur_row(exec: Exec, g: &AffineWeyl, x: &Element, mu: &[i64], p: u64, max_depth: u32) -> Result<MazurRow> {
    let sigma = Sigma::trivial(g.datum());
    let acceptable = neutral_acceptable(g, x, mu, &sigma)?;
    let lift = g.decent_representative(x)?.lift;
    let mut counts = Vec::new();
    let mut all_split = true;
    let mut some_split = false;
    for depth in 1..=max_depth {
        let census = adlv_points_with(exec, &lift, mu, p, depth)?;
        for pt in &census.points {
            let s = pt.csd.slope_divisible();
            all_split &= s == Some(true);
            some_split |= s == Some(true);
        }
        counts.push((depth, census.points.len()));
    }
    let empty_at_max = counts.last().is_none_or(|&(_, c)| c == 0);
    Ok(MazurRow {
        element: x.clone(),
        p,
        acceptable,
        all_certified_split: all_split,
        some_point_split: some_split,
        flagged: acceptable && empty_at_max,
        counts,
    })
}
