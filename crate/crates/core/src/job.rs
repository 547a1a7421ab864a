//! Job specifications and the command runner behind the CLI.
//!
//! Every budget parameter has a default, listed in [`defaults`]. Unknown keys
//! in a spec are rejected. Output rows are sorted, so identical specs give
//! byte-identical output whichever execution strategy is used.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::adlv::adlv_points_with;
use crate::affine_weyl::{AdmissibleSet, AffineWeyl, Element, Level, Sigma, SigmaClassOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::isocrystal::MonomialIsocrystal;
use crate::newton::{cross_check_dimension_with, leaf_reports_with, neutral_acceptable};
use crate::rational::fmt_q;
use crate::root_datum::{DatumSpec, RootDatum};
use crate::serial::{fmt_element, fmt_kappa, fmt_qtuple, fmt_tuple, leaf_report_row, parse_element, Table, REPORT_COLUMNS};
use crate::witt::{display_check, display_from_element, witt_polys, CoeffRing, WittOps, ZModPk};

pub mod defaults {
    pub const P: u64 = 2;
    pub const DEPTH: u32 = 1;
    /// Witt length for `witt-selfcheck`
    pub const WITT_LENGTH: usize = 3;
    /// coefficient ring `Z/p^PRECISION`
    pub const PRECISION: u32 = 5;
    pub const SAMPLES: usize = 500;
    pub const SEED: u64 = 0;
    /// length bound for `classes` and for `crosscheck` without explicit elements
    pub const LENGTH_CAP: usize = 2;
    pub const MAX_ELEMENTS: usize = 200_000;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Report,
    Classes,
    Adm,
    Adlv,
    WittSelfcheck,
    Crosscheck,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown command {s:?}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Report => "report",
            Command::Classes => "classes",
            Command::Adm => "adm",
            Command::Adlv => "adlv",
            Command::WittSelfcheck => "witt-selfcheck",
            Command::Crosscheck => "crosscheck",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    StructuredText,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "structured-text" | "json" => Ok(Format::StructuredText),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Short(String),
    Full(DatumSpec),
}

impl GroupSpec {
    pub fn build(&self) -> Result<RootDatum> {
        match self {
            GroupSpec::Short(s) => DatumSpec::shorthand(s)?.build(),
            GroupSpec::Full(d) => d.build(),
        }
    }
}

/// `b e_i = p^{exponents[i]} e_{perm[i]}` with Frobenius period `period`.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub perm: Vec<usize>,
    pub exponents: Vec<i64>,
    #[serde(default = "one")]
    pub period: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub element: Option<String>,
    #[serde(default)]
    pub elements: Vec<String>,
    #[serde(default)]
    pub monomial: Option<MonomialSpec>,
    /// Frobenius action on `X_*`; trivial when absent
    #[serde(default)]
    pub sigma: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub mu: Option<Vec<i64>>,
    #[serde(default)]
    pub level: Option<String>,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub length_cap: Option<usize>,
    #[serde(default)]
    pub conjugator_cap: Option<usize>,
    #[serde(default)]
    pub max_elements: Option<usize>,
    /// `parallel` or `sequential`
    #[serde(default)]
    pub exec: Option<String>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        JobSpec {
            command,
            group: None,
            element: None,
            elements: Vec::new(),
            monomial: None,
            sigma: None,
            mu: None,
            level: None,
            p: None,
            depth: None,
            length: None,
            precision: None,
            samples: None,
            seed: None,
            length_cap: None,
            conjugator_cap: None,
            max_elements: None,
            exec: None,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("job spec: {e}")))
    }

    fn exec_strategy(&self) -> Result<Exec> {
        match self.exec.as_deref() {
            None => Ok(Exec::default()),
            Some("parallel") => Ok(Exec::Parallel),
            Some("sequential") => Ok(Exec::Sequential),
            Some(other) => Err(Error::Config(format!("unknown exec strategy {other:?}"))),
        }
    }

    fn affine_weyl(&self) -> Result<AffineWeyl> {
        let g = self.group.as_ref().ok_or_else(|| Error::Config("this command needs a group".into()))?;
        AffineWeyl::new(Arc::new(g.build()?))
    }

    fn sigma_for(&self, g: &AffineWeyl) -> Result<Sigma> {
        match &self.sigma {
            None => Ok(Sigma::trivial(g.datum())),
            Some(rows) => Sigma::new(g.datum(), rows.clone()),
        }
    }

    fn element_list(&self, g: &AffineWeyl) -> Result<Vec<Element>> {
        self.element.iter().chain(&self.elements).map(|s| parse_element(g, s)).collect()
    }

    fn require_mu(&self) -> Result<&[i64]> {
        self.mu.as_deref().ok_or_else(|| Error::Config("this command needs mu".into()))
    }
}

/// The table produced by a job, and a failure to report after writing it.
#[derive(Debug)]
pub struct JobOutput {
    pub table: Table,
    pub format: Format,
    pub failure: Option<Error>,
}

impl JobOutput {
    pub fn render(&self) -> Result<String> {
        match self.format {
            Format::Csv => self.table.to_csv(),
            Format::StructuredText => Ok(self.table.to_structured_text()),
        }
    }
}

pub fn run(spec: &JobSpec) -> Result<JobOutput> {
    let exec = spec.exec_strategy()?;
    let (table, failure) = match spec.command {
        Command::Report => (report(spec, exec)?, None),
        Command::Classes => (classes(spec, exec)?, None),
        Command::Adm => (adm(spec, exec)?, None),
        Command::Adlv => (adlv(spec, exec)?, None),
        Command::WittSelfcheck => witt_selfcheck(spec)?,
        Command::Crosscheck => crosscheck(spec, exec)?,
    };
    Ok(JobOutput { table, format: spec.output.format, failure })
}

fn report(spec: &JobSpec, exec: Exec) -> Result<Table> {
    let g = spec.affine_weyl()?;
    let sigma = spec.sigma_for(&g)?;
    let xs = spec.element_list(&g)?;
    if xs.is_empty() {
        return Err(Error::Config("report needs at least one element".into()));
    }
    let reports = leaf_reports_with(exec, &g, &xs, &sigma)?;
    let mut t = Table::new("report", &REPORT_COLUMNS);
    for r in &reports {
        let acc = match &spec.mu {
            Some(mu) => Some(neutral_acceptable(&g, &r.element, mu, &sigma)?),
            None => None,
        };
        t.push(leaf_report_row(&g, r, acc));
    }
    Ok(t)
}

fn classes(spec: &JobSpec, exec: Exec) -> Result<Table> {
    let g = spec.affine_weyl()?;
    let sigma = spec.sigma_for(&g)?;
    let mut opts = SigmaClassOptions::new(spec.length_cap.unwrap_or(defaults::LENGTH_CAP));
    opts.conjugator_cap = spec.conjugator_cap;
    opts.max_elements = spec.max_elements.unwrap_or(defaults::MAX_ELEMENTS);
    let part = g.enumerate_sigma_classes_with(exec, &opts, &sigma)?;
    let mut t = Table::new("classes", &["block", "element", "length", "nu", "kappa"]);
    for (i, b) in part.blocks.iter().enumerate() {
        for x in &b.members {
            t.push(vec![
                i.to_string(),
                fmt_element(&g, x),
                g.length(x).to_string(),
                fmt_qtuple(&b.nu_dominant),
                fmt_kappa(&b.kappa),
            ]);
        }
    }
    Ok(t)
}

fn adm(spec: &JobSpec, exec: Exec) -> Result<Table> {
    let g = spec.affine_weyl()?;
    let mu = spec.require_mu()?;
    let level = Level::parse(spec.level.as_deref().unwrap_or("iwahori"))?;
    let set = g.admissible_set_with(exec, mu, level)?;
    let mut t = Table::new("adm", &["element", "length"]);
    let elems: Vec<Element> = match set {
        AdmissibleSet::Iwahori(v) => v,
        AdmissibleSet::Hyperspecial(v) => v.into_iter().map(|l| g.translation(l)).collect::<Result<_>>()?,
    };
    for x in &elems {
        t.push(vec![fmt_element(&g, x), g.length(x).to_string()]);
    }
    Ok(t)
}

fn adlv(spec: &JobSpec, exec: Exec) -> Result<Table> {
    let mu = spec.require_mu()?;
    let p = spec.p.unwrap_or(defaults::P);
    let depth = spec.depth.unwrap_or(defaults::DEPTH);
    let b = match (&spec.monomial, spec.element.is_some() || !spec.elements.is_empty()) {
        (Some(m), false) => MonomialIsocrystal::new(m.perm.clone(), m.exponents.clone(), m.period)?,
        (None, true) => {
            let g = spec.affine_weyl()?;
            let xs = spec.element_list(&g)?;
            if xs.len() != 1 {
                return Err(Error::Config("adlv takes exactly one element".into()));
            }
            g.decent_representative(&xs[0])?.lift
        }
        _ => return Err(Error::Config("adlv needs either one element or a monomial matrix".into())),
    };
    let census = adlv_points_with(exec, &b, mu, p, depth)?;
    let mut t = Table::new("adlv", &["depth", "lattice", "inv", "kappa", "slope_divisible"]);
    for pt in &census.points {
        let form: Vec<String> = pt.lattice.form().iter().map(|r| fmt_tuple(r)).collect();
        t.push(vec![
            depth.to_string(),
            format!("[{}]", form.join(",")),
            fmt_tuple(&pt.inv),
            pt.kappa.to_string(),
            pt.csd.slope_divisible().map_or_else(|| "inconclusive".into(), |b| b.to_string()),
        ]);
    }
    Ok(t)
}

fn crosscheck(spec: &JobSpec, exec: Exec) -> Result<(Table, Option<Error>)> {
    let g = spec.affine_weyl()?;
    let sigma = spec.sigma_for(&g)?;
    let mut xs = spec.element_list(&g)?;
    if xs.is_empty() {
        let reps = g.default_kappa_reps()?;
        xs = g.elements_up_to_length(
            spec.length_cap.unwrap_or(defaults::LENGTH_CAP),
            &reps,
            spec.max_elements.unwrap_or(defaults::MAX_ELEMENTS),
        )?;
    }
    let rep = cross_check_dimension_with(exec, &g, &xs, &sigma)?;
    let mut t = Table::new("crosscheck", &["element", "nu", "two_rho_pairing", "positive_root_sum", "pass"]);
    for r in &rep.rows {
        t.push(vec![
            fmt_element(&g, &r.element),
            fmt_qtuple(&r.nu_dominant),
            fmt_q(&r.two_rho_side),
            fmt_q(&r.root_sum_side),
            r.pass.to_string(),
        ]);
    }
    let failure = (!rep.all_pass()).then(|| Error::Consistency("⟨2ρ, ν⟩ differs from the positive-root sum".into()));
    Ok((t, failure))
}

/// Outcome of one Witt/display invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub samples: usize,
    pub pass: bool,
}

pub fn witt_selfcheck_rows(p: u64, m: usize, k: u32, samples: usize, seed: u64) -> Result<Vec<SelfCheck>> {
    if m == 0 {
        return Err(Error::Config("Witt length must be positive".into()));
    }
    let ring = ZModPk::new(p, k)?;
    let ops = WittOps::new(ring.clone(), m + 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    rows.push(SelfCheck { name: "integral_structure_polynomials", samples: 1, pass: witt_polys(p, m + 1).is_ok() });
    let (mut add_ok, mut mul_ok, mut fv_ok, mut vf_ok, mut frob_ok) = (true, true, true, true, true);
    let v1 = ops.verschiebung(&ops.one(m - 1))?;
    for _ in 0..samples {
        let a = ops.random(&mut rng, m);
        let b = ops.random(&mut rng, m);
        let (ga, gb) = (ops.ghost(&a)?, ops.ghost(&b)?);
        let gs = ops.ghost(&ops.add(&a, &b)?)?;
        let gp = ops.ghost(&ops.mul(&a, &b)?)?;
        for i in 0..m {
            add_ok &= gs[i] == ring.add(&ga[i], &gb[i]);
            mul_ok &= gp[i] == ring.mul(&ga[i], &gb[i]);
        }
        fv_ok &= ops.frobenius(&ops.verschiebung(&a)?)? == ops.scalar(p, &a)?;
        vf_ok &= ops.verschiebung(&ops.frobenius(&a)?)? == ops.mul(&a, &v1)?;
        let fa = ops.frobenius(&a)?;
        for (i, c) in fa.components().iter().enumerate() {
            let pp = ring.pow(&a.components()[i], p);
            frob_ok &= (c - pp) % p == num_bigint::BigInt::from(0);
        }
    }
    rows.push(SelfCheck { name: "ghost_additive", samples, pass: add_ok });
    rows.push(SelfCheck { name: "ghost_multiplicative", samples, pass: mul_ok });
    rows.push(SelfCheck { name: "frobenius_verschiebung_is_p", samples, pass: fv_ok });
    rows.push(SelfCheck { name: "verschiebung_frobenius_is_v1", samples, pass: vf_ok });
    rows.push(SelfCheck { name: "frobenius_mod_p_is_power", samples, pass: frob_ok });

    let ord = display_check(&display_from_element(&MonomialIsocrystal::diagonal(vec![0, -1]), p, m)?)?;
    rows.push(SelfCheck { name: "display_diag_1_pinv", samples: 1, pass: ord.all_pass() && ord.psi_invertible });
    let ss = MonomialIsocrystal::new(vec![1, 0], vec![-1, 0], 1)?;
    let ssr = display_check(&display_from_element(&ss, p, m)?)?;
    rows.push(SelfCheck { name: "display_supersingular", samples: 1, pass: ssr.all_pass() && ssr.quotient_rank == 1 });
    let rejected = matches!(
        display_from_element(&MonomialIsocrystal::diagonal(vec![0, 1]), p, m),
        Err(Error::NotPDivisible(_))
    );
    rows.push(SelfCheck { name: "display_rejects_diag_1_p", samples: 1, pass: rejected });
    Ok(rows)
}

fn witt_selfcheck(spec: &JobSpec) -> Result<(Table, Option<Error>)> {
    let p = spec.p.unwrap_or(defaults::P);
    let m = spec.length.unwrap_or(defaults::WITT_LENGTH);
    let k = spec.precision.unwrap_or(defaults::PRECISION);
    let samples = spec.samples.unwrap_or(defaults::SAMPLES);
    let rows = witt_selfcheck_rows(p, m, k, samples, spec.seed.unwrap_or(defaults::SEED))?;
    let mut t = Table::new("witt-selfcheck", &["check", "samples", "pass"]);
    for r in &rows {
        t.push(vec![r.name.to_string(), r.samples.to_string(), r.pass.to_string()]);
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    let failure = (!failed.is_empty()).then(|| Error::Consistency(format!("Witt self-check failed: {}", failed.join(", "))));
    Ok((t, failure))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(JobSpec::from_json(r#"{"command":"report","group":"GL2","colour":1}"#).is_err());
        assert!(JobSpec::from_json(r#"{"command":"dance"}"#).is_err());
    }

    #[test]
    fn report_example() {
        let spec = JobSpec::from_json(r#"{"command":"report","group":"GL2","element":"{lambda:[1,0],w:s}"}"#).unwrap();
        let out = run(&spec).unwrap();
        let row = &out.table.rows[0];
        assert_eq!(row[1], "(1/2,1/2)");
        assert_eq!(row[4], "0");
        assert_eq!(row[3], "true");
    }

    #[test]
    fn adm_example() {
        let spec = JobSpec::from_json(r#"{"command":"adm","group":"GL2","mu":[1,0],"level":"iwahori"}"#).unwrap();
        assert_eq!(run(&spec).unwrap().table.rows.len(), 3);
    }

    #[test]
    fn witt_selfcheck_passes() {
        let mut spec = JobSpec::new(Command::WittSelfcheck);
        spec.samples = Some(20);
        let out = run(&spec).unwrap();
        assert!(out.failure.is_none(), "{:?}", out.table);
    }
}
