//! JSON parsers for algebras, structures and almost-abelian data, the report
//! documents, and a writer that prints every float with 17 significant digits.
//!
//! Basis indices in documents are 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::algebra::LieAlgebra;
use crate::almost_abelian::{AlmostAbelianData, SamplerReport, SolutionFamily};
use crate::curvatures::Geometry;
use crate::error::{Error, Result};
use crate::hermitian::AlmostHermitianStructure;
use crate::tensor::{increasing_tuples, Form, Mat, Vector};
use crate::verifier::{condition_flags, einstein_residuals, IdentityCheck};

/// Bumped whenever the layout of an emitted document changes.
pub const FORMAT_VERSION: u64 = 1;

/// Largest dimension accepted from untrusted input.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Deserialize)]
pub struct BracketDoc {
    pub i: usize,
    pub j: usize,
    #[serde(default)]
    pub out: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AlgebraDoc {
    pub dim: usize,
    #[serde(default)]
    pub brackets: Vec<BracketDoc>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct StructureDoc {
    #[serde(flatten)]
    pub algebra: AlgebraDoc,
    pub metric: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AlmostAbelianDoc {
    pub a: f64,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(rename = "A")]
    pub a_block: Vec<Vec<f64>>,
}

fn basis_index(raw: usize, dim: usize, what: &str) -> Result<usize> {
    if raw == 0 || raw > dim {
        return Err(Error::Structural(format!(
            "{what} index {raw} outside 1..={dim}"
        )));
    }
    Ok(raw - 1)
}

impl AlgebraDoc {
    pub fn build(&self) -> Result<LieAlgebra> {
        let dim = self.dim;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Structural(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        let mut brackets = Vec::with_capacity(self.brackets.len());
        for b in &self.brackets {
            let i = basis_index(b.i, dim, "bracket")?;
            let j = basis_index(b.j, dim, "bracket")?;
            let mut out = Vec::with_capacity(b.out.len());
            for (k, v) in &b.out {
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::Structural(format!("bracket output key `{k}` is not an index")))?;
                out.push((basis_index(k, dim, "bracket output")?, *v));
            }
            brackets.push((i, j, out));
        }
        LieAlgebra::from_brackets(dim, &brackets)
    }
}

impl StructureDoc {
    pub fn build(&self) -> Result<AlmostHermitianStructure> {
        let alg = self.algebra.build()?;
        let metric = matrix_from_rows(&self.metric)?;
        let j = matrix_from_rows(&self.j)?;
        AlmostHermitianStructure::new(alg, metric, j)
    }
}

impl AlmostAbelianDoc {
    pub fn build(&self) -> Result<AlmostAbelianData> {
        if self.b.len() > MAX_DIM {
            return Err(Error::Structural(format!("b longer than {MAX_DIM}")));
        }
        let a_block = if self.a_block.is_empty() {
            Mat::zeros(0, 0)
        } else {
            matrix_from_rows(&self.a_block)?
        };
        AlmostAbelianData::new(
            self.a,
            Vector::from_vec(self.b.clone()),
            Vector::from_vec(self.v.clone()),
            a_block,
        )
    }

    pub fn from_data(d: &AlmostAbelianData) -> Self {
        Self {
            a: d.a,
            b: d.b.iter().copied().collect(),
            v: d.v.iter().copied().collect(),
            a_block: rows(&d.a_block),
        }
    }
}

/// Rectangular, non-empty table of finite numbers.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let n = rows.len();
    if n == 0 || n > MAX_DIM * MAX_DIM {
        return Err(Error::structural("table must have between 1 and 256 rows"));
    }
    let m = rows[0].len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::structural("ragged or empty table"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::structural("table entries must be finite"));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn parse_algebra(text: &str) -> Result<LieAlgebra> {
    serde_json::from_str::<AlgebraDoc>(text)?.build()
}

pub fn parse_structure(text: &str) -> Result<AlmostHermitianStructure> {
    serde_json::from_str::<StructureDoc>(text)?.build()
}

pub fn parse_almost_abelian(text: &str) -> Result<AlmostAbelianData> {
    serde_json::from_str::<AlmostAbelianDoc>(text)?.build()
}

/// A matrix written as nested JSON arrays, e.g. `[[0,0,0],[0,1,0],[0,0,-1]]`.
pub fn parse_matrix(text: &str) -> Result<Mat> {
    matrix_from_rows(&serde_json::from_str::<Vec<Vec<f64>>>(text)?)
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matrix_value(m: &Mat) -> Value {
    json!(rows(m))
}

pub fn vector_value(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

/// Key of a basis form: concatenated 1-based indices (`"13"` for `e^13`),
/// comma-separated once the dimension has two-digit indices.
pub fn form_key(idx: &[usize], dim: usize) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    if dim < 10 {
        parts.concat()
    } else {
        parts.join(",")
    }
}

/// Inverse of [`form_key`]; returns 0-based indices.
pub fn parse_form_key(key: &str, dim: usize) -> Result<Vec<usize>> {
    let raw: Vec<usize> = if key.contains(',') {
        key.split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Structural(format!("bad form key `{key}`")))?
    } else {
        key.chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Structural(format!("bad form key `{key}`")))?
    };
    raw.into_iter().map(|i| basis_index(i, dim, "form")).collect()
}

/// Coefficients on every increasing index tuple.
pub fn form_value(f: &Form) -> Value {
    let mut map = Map::new();
    for (idx, c) in f.increasing_coefficients() {
        map.insert(form_key(&idx, f.dim()), json!(c));
    }
    Value::Object(map)
}

fn identity_value(c: &IdentityCheck) -> Value {
    let hyp: Map<String, Value> = c
        .hypotheses
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    json!({
        "id": c.id,
        "residual": c.residual,
        "scale": c.scale,
        "skipped": c.skipped,
        "passed": c.passed,
        "hypotheses": hyp,
    })
}

pub fn identities_value(checks: &[IdentityCheck]) -> Value {
    Value::Array(checks.iter().map(identity_value).collect())
}

/// Full report of one structure: Lee form, Ricci-type forms and tensors,
/// scalars, Nijenhuis tensor, flags, Einstein residuals, identity checks and
/// connection tables (`connections.<kind>[i]` is the matrix of `nabla_{e_i}`).
pub fn report_document(name: &str, geo: &Geometry, checks: &[IdentityCheck]) -> Value {
    let s = geo.structure();
    let m = s.dim();
    let rep = geo.report();
    let sc = rep.scalars;
    let nij = geo.nijenhuis();
    let mut nijenhuis = Map::new();
    for t in increasing_tuples(m, 2) {
        nijenhuis.insert(form_key(&t, m), vector_value(&nij.at(t[0], t[1])));
    }
    let connections = |c: &crate::connections::Connection| {
        Value::Array(c.matrices().iter().map(matrix_value).collect())
    };
    json!({
        "format_version": FORMAT_VERSION,
        "name": name,
        "dim": m,
        "theta": vector_value(geo.theta()),
        "forms": {
            "F": form_value(s.fundamental_form()),
            "dF": form_value(&geo.d(s.fundamental_form())),
            "d_theta": form_value(&geo.d_theta()),
            "rho_chern": form_value(&rep.rho_chern),
            "r": form_value(&rep.r_second_chern),
            "ric_bismut": form_value(&rep.ric_bismut),
            "rwf": form_value(&rep.rwf),
            "n_theta": form_value(&geo.n_theta()),
            "nijenhuis_factor": form_value(&rep.nijenhuis_factor),
        },
        "tensors": {
            "ric_riemann": matrix_value(&rep.ric_riemann),
            "ric_weyl": matrix_value(&rep.ric_weyl),
            "ric_weyl_tilde": matrix_value(&rep.ric_weyl_tilde),
            "rho_star": matrix_value(&rep.rho_star),
            "dg_theta": matrix_value(&geo.dg_theta()),
            "lee_sym_j_minus": matrix_value(&geo.lee_sym_j_minus()),
        },
        "scalars": {
            "s_h": sc.s_h,
            "s_g": sc.s_g,
            "s_w": sc.s_w,
            "s_w_trace": sc.s_w_trace,
            "s_star": sc.s_star,
            "theta_norm_sq": geo.theta_norm_sq(),
            "delta_theta": geo.delta_theta(),
            "nijenhuis_norm_sq": nij.norm_sq(),
        },
        "nijenhuis": nijenhuis,
        "flags": serde_json::to_value(condition_flags(geo)).expect("plain data"),
        "einstein": serde_json::to_value(einstein_residuals(geo)).expect("plain data"),
        "identities": identities_value(checks),
        "chern_guard": {
            "metric": geo.chern_guard().metric,
            "complex": geo.chern_guard().complex,
            "torsion_type": geo.chern_guard().torsion_type,
            "tolerance": geo.chern_guard().tolerance,
            "passed": geo.chern_guard().passed(),
        },
        "connections": {
            "levi_civita": connections(geo.levi_civita()),
            "chern": connections(geo.chern()),
            "weyl": connections(geo.weyl()),
        },
    })
}

/// One verified subject in a verdict document.
#[derive(Debug, Clone)]
pub struct VerdictEntry {
    pub name: String,
    pub checks: Vec<IdentityCheck>,
}

pub fn verdict_document(entries: &[VerdictEntry], tolerance: f64) -> Value {
    let mut total = 0usize;
    let mut failed = 0usize;
    let mut skipped = 0usize;
    let subjects: Vec<Value> = entries
        .iter()
        .map(|e| {
            total += e.checks.len();
            failed += e.checks.iter().filter(|c| !c.passed).count();
            skipped += e.checks.iter().filter(|c| c.skipped).count();
            let failures: Vec<&str> = e
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.id.as_str())
                .collect();
            json!({
                "name": e.name,
                "passed": failures.is_empty(),
                "failures": failures,
                "identities": identities_value(&e.checks),
            })
        })
        .collect();
    json!({
        "format_version": FORMAT_VERSION,
        "tolerance": tolerance,
        "passed": failed == 0,
        "summary": {"checks": total, "failed": failed, "skipped": skipped},
        "subjects": subjects,
    })
}

pub fn almost_abelian_value(d: &AlmostAbelianData) -> Value {
    json!({
        "a": d.a,
        "b": vector_value(&d.b),
        "v": vector_value(&d.v),
        "A": matrix_value(&d.a_block),
    })
}

pub fn solve_document(problem: &str, families: &[SolutionFamily], sampler: Option<&SamplerReport>) -> Value {
    let labels: std::collections::BTreeSet<&str> =
        families.iter().map(|f| f.class_label.as_str()).collect();
    let fams: Vec<Value> = families
        .iter()
        .map(|f| {
            json!({
                "description": f.description,
                "constraints": f.constraints,
                "witness": almost_abelian_value(&f.witness),
                "class_label": f.class_label.as_str(),
                "flags": serde_json::to_value(f.flags).expect("plain data"),
                "residual": f.residual,
            })
        })
        .collect();
    let mut doc = json!({
        "format_version": FORMAT_VERSION,
        "problem": problem,
        "labels": labels,
        "families": fams,
    });
    if let Some(rep) = sampler {
        doc["sampler"] = serde_json::to_value(rep).expect("plain data");
    }
    doc
}

/// `{"error": {"kind", "message"}}`.
pub fn error_document(err: &Error) -> Value {
    json!({"error": {"kind": err.kind(), "message": err.to_string()}})
}

/// 17 significant digits in scientific notation; exact zero prints as `0.0`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format_f64(x)),
                    _ => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        _ => unreachable!(),
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_scalar(out, x);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("string"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
        _ => write_scalar(out, v),
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Pretty-printed document with a trailing newline. Keys come out sorted, so
/// parsing the output and writing it again reproduces it byte for byte.
pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}
