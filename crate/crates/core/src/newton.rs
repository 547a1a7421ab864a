//! Central-leaf dimension `⟨2ρ, ν⟩`, the dimension of `J_b`, basicness and
//! neutral acceptability, each report checked against the adjoint slope
//! count.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::affine_weyl::{AffineWeyl, Element, KottwitzClass, Sigma};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::isocrystal::{nonneg_slope_dim, slopes_via_weights, WeightedRep};
use crate::rational::{q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafReport {
    pub element: Element,
    pub nu_dominant: Vec<Q>,
    pub kappa: KottwitzClass,
    pub basic: bool,
    pub leaf_dim: u64,
    pub jb_dim: u64,
    pub adjoint_slopes: Vec<Q>,
    pub checked: bool,
}

fn to_dim(x: &Q, what: &str) -> Result<u64> {
    if !x.is_integer() || x.is_negative() {
        return Err(Error::Consistency(format!("{what} = {x} is not a nonnegative integer")));
    }
    x.to_integer().to_u64().ok_or_else(|| Error::Consistency(format!("{what} out of range")))
}

pub fn leaf_report(g: &AffineWeyl, x: &Element, sigma: &Sigma) -> Result<LeafReport> {
    let d = g.datum();
    let nu = g.newton_point(x, sigma)?;
    let leaf = to_dim(&d.pair_two_rho(&nu.dominant), "⟨2ρ, ν⟩")?;
    let oracle = nonneg_slope_dim(d, &nu.dominant)?;
    if leaf != oracle {
        return Err(Error::Consistency(format!(
            "leaf dimension {leaf} disagrees with the adjoint slope count {oracle}"
        )));
    }
    let centralizer_roots = d.roots().iter().filter(|a| d.pair(a, &nu.dominant).is_zero()).count();
    let jb_dim = (d.rank() + centralizer_roots) as u64;
    let basic = centralizer_roots == d.roots().len();
    if basic != (leaf == 0) {
        return Err(Error::Consistency("basic elements must have zero-dimensional leaves".into()));
    }
    let adjoint_slopes = slopes_via_weights(d, &WeightedRep::adjoint(d), &nu)?;
    Ok(LeafReport {
        element: x.clone(),
        nu_dominant: nu.dominant,
        kappa: g.kottwitz_sigma(x, sigma)?,
        basic,
        leaf_dim: leaf,
        jb_dim,
        adjoint_slopes,
        checked: true,
    })
}

pub fn leaf_reports_with(exec: Exec, g: &AffineWeyl, xs: &[Element], sigma: &Sigma) -> Result<Vec<LeafReport>> {
    exec.try_map(xs, |x| leaf_report(g, x, sigma))
}

/// `(1/N) Σ σ^i μ` over the σ-orbit.
pub fn sigma_average(sigma: &Sigma, mu: &[i64]) -> Vec<Q> {
    let n = sigma.order();
    let mut total = vec![0i64; mu.len()];
    let mut cur = mu.to_vec();
    for _ in 0..n {
        for (t, c) in total.iter_mut().zip(&cur) {
            *t += c;
        }
        cur = sigma.apply_cochar(&cur);
    }
    total.iter().map(|&t| q(t) / q(n as i64)).collect()
}

/// `κ(x) = κ(μ)` in the σ-coinvariants and `ν_x ≤ μ^⋄` in dominance order.
pub fn neutral_acceptable(g: &AffineWeyl, x: &Element, mu: &[i64], sigma: &Sigma) -> Result<bool> {
    let d = g.datum();
    d.check_len(mu.len())?;
    let muq: Vec<Q> = mu.iter().map(|&v| q(v)).collect();
    if !d.is_dominant(&muq) {
        return Err(Error::Precondition(format!("{mu:?} is not dominant")));
    }
    let t_mu = g.translation(mu.to_vec())?;
    if g.kottwitz_sigma(x, sigma)? != g.kottwitz_sigma(&t_mu, sigma)? {
        return Ok(false);
    }
    let nu = g.newton_point(x, sigma)?;
    let avg = d.dominant_rep(&sigma_average(sigma, mu))?;
    d.dominance_leq(&nu.dominant, &avg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheckRow {
    pub element: Element,
    pub nu_dominant: Vec<Q>,
    pub two_rho_side: Q,
    pub root_sum_side: Q,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `⟨2ρ, ν⟩` against `Σ_{α>0} ⟨α, ν⟩`, one positive root at a time.
pub fn cross_check_dimension(g: &AffineWeyl, sample: &[Element], sigma: &Sigma) -> Result<CrossCheckReport> {
    cross_check_dimension_with(Exec::default(), g, sample, sigma)
}

pub fn cross_check_dimension_with(
    exec: Exec,
    g: &AffineWeyl,
    sample: &[Element],
    sigma: &Sigma,
) -> Result<CrossCheckReport> {
    let d = g.datum();
    let rows = exec.try_map(sample, |x| -> Result<CrossCheckRow> {
        let nu = g.newton_point(x, sigma)?;
        let lhs = d.pair_two_rho(&nu.dominant);
        let rhs: Q = d.positive_roots().map(|a| d.pair(&d.roots()[a], &nu.dominant)).sum();
        Ok(CrossCheckRow { element: x.clone(), pass: lhs == rhs, nu_dominant: nu.dominant, two_rho_side: lhs, root_sum_side: rhs })
    })?;
    Ok(CrossCheckReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;
    use crate::root_datum::{GroupTag, RootDatum};
    use std::sync::Arc;

    fn group(tag: GroupTag, n: usize) -> AffineWeyl {
        AffineWeyl::new(Arc::new(RootDatum::build_classical(tag, n).unwrap())).unwrap()
    }

    #[test]
    fn gl2_reports() {
        let g = group(GroupTag::GL, 2);
        let sig = Sigma::trivial(g.datum());
        let ord = leaf_report(&g, &g.translation(vec![1, 0]).unwrap(), &sig).unwrap();
        assert_eq!((ord.leaf_dim, ord.jb_dim, ord.basic), (1, 2, false));
        let s = g.weyl_from_word(&[0]).unwrap();
        let ss = leaf_report(&g, &g.element(vec![1, 0], s).unwrap(), &sig).unwrap();
        assert_eq!((ss.leaf_dim, ss.jb_dim, ss.basic), (0, 4, true));
        assert_eq!(ss.nu_dominant, vec![qf(1, 2), qf(1, 2)]);
    }

    #[test]
    fn gsp4_ordinary_and_supersingular() {
        let g = group(GroupTag::GSp, 4);
        let sig = Sigma::trivial(g.datum());
        let t = g.translation(vec![1, 1, 1]).unwrap();
        assert_eq!(leaf_report(&g, &t, &sig).unwrap().leaf_dim, 3);
        let tau = g.omega_part(&t).unwrap();
        let ss = leaf_report(&g, &tau, &sig).unwrap();
        assert_eq!(ss.nu_dominant, vec![qf(1, 2), qf(1, 2), q(1)]);
        assert!(ss.basic);
    }

    #[test]
    fn acceptability_examples() {
        let g = group(GroupTag::GL, 2);
        let sig = Sigma::trivial(g.datum());
        let s = g.weyl_from_word(&[0]).unwrap();
        assert!(neutral_acceptable(&g, &g.element(vec![1, 0], s).unwrap(), &[1, 0], &sig).unwrap());
        assert!(!neutral_acceptable(&g, &g.translation(vec![2, -1]).unwrap(), &[1, 0], &sig).unwrap());
        assert!(neutral_acceptable(&g, &g.translation(vec![1, 0]).unwrap(), &[1, 0], &sig).unwrap());
        assert!(neutral_acceptable(&g, &g.identity(), &[0, 1], &sig).is_err());
    }

    #[test]
    fn sp4_cross_check_value() {
        let g = group(GroupTag::Sp, 4);
        let sig = Sigma::trivial(g.datum());
        let rep = cross_check_dimension(&g, &[g.translation(vec![1, 0]).unwrap(), g.identity()], &sig).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.rows[0].two_rho_side, q(4));
        assert_eq!(rep.rows[1].root_sum_side, q(0));
    }
}
