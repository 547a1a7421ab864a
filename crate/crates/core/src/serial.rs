//! Text formats: elements `{lambda:[1,0],w:s1}`, versioned CSV tables and
//! their structured-text (JSON) counterpart.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::affine_weyl::{AffineWeyl, Element, KottwitzClass};
use crate::error::{Error, Result};
use crate::newton::LeafReport;
use crate::rational::{fmt_q, parse_q, Q};
use crate::root_datum::{GroupTag, WeylElem};

pub const SCHEMA: u32 = 1;

pub fn fmt_tuple<T: ToString>(v: &[T]) -> String {
    format!("({})", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
}

pub fn fmt_qtuple(v: &[Q]) -> String {
    format!("({})", v.iter().map(fmt_q).collect::<Vec<_>>().join(","))
}

fn strip_brackets(s: &str) -> &str {
    let s = s.trim();
    for (l, r) in [('(', ')'), ('[', ']'), ('{', '}')] {
        if let Some(inner) = s.strip_prefix(l).and_then(|t| t.strip_suffix(r)) {
            return inner.trim();
        }
    }
    s
}

fn items(s: &str) -> impl Iterator<Item = &str> {
    strip_brackets(s).split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

pub fn parse_qtuple(s: &str) -> Result<Vec<Q>> {
    items(s).map(parse_q).collect()
}

pub fn parse_ituple(s: &str) -> Result<Vec<i64>> {
    items(s).map(|t| t.parse().map_err(|_| Error::Parse(format!("not an integer: {t:?}")))).collect()
}

pub fn fmt_kappa(k: &KottwitzClass) -> String {
    fmt_tuple(&k.value)
}

pub fn parse_kappa(s: &str) -> Result<KottwitzClass> {
    let value = items(s)
        .map(|t| t.parse::<BigInt>().map_err(|_| Error::Parse(format!("not an integer: {t:?}"))))
        .collect::<Result<_>>()?;
    Ok(KottwitzClass { value })
}

pub fn fmt_weyl(g: &AffineWeyl, w: WeylElem) -> String {
    let word = g.weyl_word(w);
    if word.is_empty() {
        return "e".into();
    }
    word.iter().map(|i| format!("s{}", i + 1)).collect()
}

/// Accepts `e`, a word such as `s1s2` / `s1*s2` / `s1 s2` (`s` alone in
/// rank one), or one-line notation `[2,1]` (signed, `[-1,2]`, for Sp).
pub fn parse_weyl(g: &AffineWeyl, s: &str) -> Result<WeylElem> {
    let t = s.trim().trim_matches(|c| c == '"' || c == '\'');
    if matches!(t, "" | "e" | "1" | "id") {
        return Ok(WeylElem::IDENTITY);
    }
    if t.starts_with('[') || t.starts_with('(') {
        return parse_one_line(g, t);
    }
    let rank = g.datum().simple_roots().len();
    let mut word = Vec::new();
    let cleaned: String = t.chars().filter(|c| !matches!(c, '*' | '.' | '·' | ' ')).collect();
    let mut rest = cleaned.as_str();
    while !rest.is_empty() {
        let Some(r) = rest.strip_prefix('s') else {
            return Err(Error::Parse(format!("bad Weyl word {s:?}")));
        };
        let digits = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        if digits == 0 {
            if rank != 1 {
                return Err(Error::Parse(format!("bare `s` is ambiguous in rank {rank}")));
            }
            word.push(0);
        } else {
            let i: usize = r[..digits].parse().map_err(|_| Error::Parse(format!("bad Weyl word {s:?}")))?;
            if i == 0 {
                return Err(Error::Parse("s0 is affine; give the translation part in lambda".into()));
            }
            word.push(i - 1);
        }
        rest = &r[digits..];
    }
    g.weyl_from_word(&word)
}

fn parse_one_line(g: &AffineWeyl, s: &str) -> Result<WeylElem> {
    let d = g.datum();
    let signed = match d.tag() {
        GroupTag::GL => false,
        GroupTag::Sp => true,
        _ => return Err(Error::Parse(format!("one-line notation is only defined for GL and Sp, not {}", d.label()))),
    };
    let v = parse_ituple(s)?;
    let n = d.cochar_rank();
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    let mut m = vec![0i64; n * n];
    for (j, &x) in v.iter().enumerate() {
        let k = x.unsigned_abs() as usize;
        if k == 0 || k > n || (x < 0 && !signed) {
            return Err(Error::Parse(format!("bad one-line entry {x}")));
        }
        m[(k - 1) * n + j] = x.signum();
    }
    d.weyl().lookup(&m).ok_or_else(|| Error::Parse(format!("{s} is not in the Weyl group of {}", d.label())))
}

pub fn fmt_element(g: &AffineWeyl, x: &Element) -> String {
    format!("{{lambda:[{}],w:{}}}", x.lambda().iter().map(ToString::to_string).collect::<Vec<_>>().join(","), fmt_weyl(g, x.finite_part()))
}

/// Lenient parse of `{lambda:[1,0],w:s}`: quotes and spaces are ignored,
/// `λ`/`l`/`t` alias `lambda`, and either key may be omitted.
pub fn parse_element(g: &AffineWeyl, s: &str) -> Result<Element> {
    let body: String = s.chars().filter(|c| !matches!(c, '"' | '\'')).collect();
    let body = body.trim();
    let body = body.strip_prefix('{').and_then(|b| b.strip_suffix('}')).ok_or_else(|| Error::Parse(format!("element must be braced: {s:?}")))?;
    let mut lambda = None;
    let mut w = None;
    let mut depth = 0;
    let mut start = 0;
    let mut fields = Vec::new();
    for (i, c) in body.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                fields.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    fields.push(&body[start..]);
    for f in fields.into_iter().filter(|f| !f.trim().is_empty()) {
        let (k, v) = f.split_once(':').or_else(|| f.split_once('=')).ok_or_else(|| Error::Parse(format!("bad field {f:?}")))?;
        match k.trim() {
            "lambda" | "λ" | "l" | "t" => lambda = Some(parse_ituple(v)?),
            "w" => w = Some(parse_weyl(g, v)?),
            other => return Err(Error::Parse(format!("unknown element key {other:?}"))),
        }
    }
    let lambda = lambda.unwrap_or_else(|| vec![0; g.datum().cochar_rank()]);
    g.element(lambda, w.unwrap_or(WeylElem::IDENTITY))
}

/// A table with fixed columns; rendered as CSV with a schema comment or as a
/// JSON document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Table { kind: kind.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))?;
        let mut out = String::new();
        let _ = writeln!(out, "# schema={SCHEMA} kind={}", self.kind);
        out.push_str(&body);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let meta = header.strip_prefix("# ").ok_or_else(|| Error::Parse("missing schema comment".into()))?;
        let mut kind = String::new();
        let mut schema = None;
        for kv in meta.split_whitespace() {
            match kv.split_once('=') {
                Some(("schema", v)) => schema = v.parse::<u32>().ok(),
                Some(("kind", v)) => kind = v.to_string(),
                _ => {}
            }
        }
        if schema != Some(SCHEMA) {
            return Err(Error::Parse(format!("unsupported schema in {header:?}")));
        }
        let rest: String = lines.map(|l| format!("{l}\n")).collect();
        let mut r = csv::Reader::from_reader(rest.as_bytes());
        let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_err))
            .collect::<Result<_>>()?;
        Ok(Table { kind, columns, rows })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "kind": self.kind,
            "columns": self.columns,
            "rows": self.rows,
        })
    }

    pub fn to_structured_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("JSON rendering of strings cannot fail");
        s.push('\n');
        s
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub const REPORT_COLUMNS: [&str; 9] =
    ["element", "nu", "kappa", "basic", "dim", "jb_dim", "adjoint_slopes", "checked", "acceptable"];

pub fn leaf_report_row(g: &AffineWeyl, r: &LeafReport, acceptable: Option<bool>) -> Vec<String> {
    vec![
        fmt_element(g, &r.element),
        fmt_qtuple(&r.nu_dominant),
        fmt_kappa(&r.kappa),
        r.basic.to_string(),
        r.leaf_dim.to_string(),
        r.jb_dim.to_string(),
        fmt_qtuple(&r.adjoint_slopes),
        r.checked.to_string(),
        acceptable.map_or_else(|| "-".into(), |a| a.to_string()),
    ]
}

fn parse_bool(s: &str) -> Result<bool> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a boolean: {s:?}")))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a count: {s:?}")))
}

pub fn leaf_report_from_row(g: &AffineWeyl, row: &[String]) -> Result<LeafReport> {
    if row.len() != REPORT_COLUMNS.len() {
        return Err(Error::Dimension { expected: REPORT_COLUMNS.len(), got: row.len() });
    }
    Ok(LeafReport {
        element: parse_element(g, &row[0])?,
        nu_dominant: parse_qtuple(&row[1])?,
        kappa: parse_kappa(&row[2])?,
        basic: parse_bool(&row[3])?,
        leaf_dim: parse_u64(&row[4])?,
        jb_dim: parse_u64(&row[5])?,
        adjoint_slopes: parse_qtuple(&row[6])?,
        checked: parse_bool(&row[7])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::leaf_report;
    use crate::affine_weyl::Sigma;
    use crate::root_datum::RootDatum;
    use std::sync::Arc;

    fn group(tag: GroupTag, n: usize) -> AffineWeyl {
        AffineWeyl::new(Arc::new(RootDatum::build_classical(tag, n).unwrap())).unwrap()
    }

    #[test]
    fn element_text_forms() {
        let g = group(GroupTag::GL, 2);
        let a = parse_element(&g, "{lambda:[1,0],w:s}").unwrap();
        let b = parse_element(&g, r#"{ "lambda": [1, 0], "w": "[2,1]" }"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(fmt_element(&g, &a), "{lambda:[1,0],w:s1}");
        assert_eq!(parse_element(&g, &fmt_element(&g, &a)).unwrap(), a);
        assert!(parse_element(&g, "{lambda:[1,0],w:s2}").is_err());
        assert!(parse_element(&g, "{mu:[1,0]}").is_err());
    }

    #[test]
    fn signed_one_line_for_sp() {
        let g = group(GroupTag::Sp, 4);
        let w = parse_weyl(&g, "[-1,2]").unwrap();
        assert_eq!(g.datum().act_cochar(w, &[1, 0]), vec![-1, 0]);
        let x = g.element(vec![1, 0], w).unwrap();
        assert_eq!(parse_element(&g, &fmt_element(&g, &x)).unwrap(), x);
    }

    #[test]
    fn report_csv_round_trip() {
        let g = group(GroupTag::GL, 2);
        let x = parse_element(&g, "{lambda:[1,0],w:s}").unwrap();
        let r = leaf_report(&g, &x, &Sigma::trivial(g.datum())).unwrap();
        let mut t = Table::new("report", &REPORT_COLUMNS);
        t.push(leaf_report_row(&g, &r, None));
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("# schema=1"));
        assert!(csv.contains("\"(1/2,1/2)\""));
        let back = Table::from_csv(&csv).unwrap();
        assert_eq!(back, t);
        assert_eq!(leaf_report_from_row(&g, &back.rows[0]).unwrap(), r);
    }
}
