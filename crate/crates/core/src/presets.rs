//! Catalog of worked examples: four non-Kähler structures on four-dimensional
//! solvable algebras and the flat abelian one, with stored expected values.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::curvatures::Geometry;
use crate::error::{Error, Result};
use crate::hermitian::AlmostHermitianStructure;
use crate::json::{parse_form_key, StructureDoc};
use crate::tensor::{Form, Mat, Vector};
use crate::verifier::{condition_flags, einstein_residuals};
use crate::EPS_ABS;

const SOURCES: &[(&str, &str)] = &[
    ("a36_a1", include_str!("../presets/a36_a1.json")),
    ("a41", include_str!("../presets/a41.json")),
    ("a48", include_str!("../presets/a48.json")),
    ("a410", include_str!("../presets/a410.json")),
    ("abelian_flat", include_str!("../presets/abelian_flat.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a stored preset.
pub fn preset_source(name: &str) -> Result<&'static str> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Stated with the example.
    Published,
    /// Computed by hand from published values.
    Derived,
    /// Forced by the structure being flat or abelian.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ExpectedValue {
    Flag(bool),
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    /// Coefficients on basis forms; absent keys are zero.
    Form(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Deserialize)]
pub struct Expectation {
    pub quantity: String,
    pub value: ExpectedValue,
    pub source: Source,
    #[serde(default)]
    pub comment: Option<String>,
}

/// A constant stored as a decimal expansion next to its defining expression.
#[derive(Debug, Clone, Deserialize)]
pub struct Constant {
    pub symbol: String,
    pub value: f64,
    pub expression: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PresetDoc {
    pub name: String,
    pub algebra: String,
    #[serde(flatten)]
    pub structure: StructureDoc,
    #[serde(default)]
    pub constants: Vec<Constant>,
    #[serde(default)]
    pub expected: Vec<Expectation>,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub algebra_label: String,
    pub structure: AlmostHermitianStructure,
    pub constants: Vec<Constant>,
    pub expected: Vec<Expectation>,
}

#[derive(Debug, Clone)]
pub struct ExpectationCheck {
    pub quantity: String,
    pub source: Source,
    /// Largest absolute deviation; 0 or 1 for flags.
    pub residual: f64,
    pub passed: bool,
}

pub fn parse_preset(text: &str) -> Result<Preset> {
    let doc: PresetDoc = serde_json::from_str(text)?;
    Ok(Preset {
        structure: doc.structure.build()?,
        name: doc.name,
        algebra_label: doc.algebra,
        constants: doc.constants,
        expected: doc.expected,
    })
}

pub fn preset(name: &str) -> Result<Preset> {
    parse_preset(preset_source(name)?)
}

pub fn catalog() -> Vec<Preset> {
    SOURCES
        .iter()
        .map(|(_, s)| parse_preset(s).expect("stored presets are valid"))
        .collect()
}

fn form_deviation(actual: &Form, expected: &BTreeMap<String, f64>) -> Result<f64> {
    let mut target = Form::zero(actual.dim(), actual.degree());
    for (key, c) in expected {
        let idx = parse_form_key(key, actual.dim())?;
        if idx.len() != actual.degree() {
            return Err(Error::Structural(format!(
                "form key `{key}` has degree {}, expected {}",
                idx.len(),
                actual.degree()
            )));
        }
        target = target.add(&Form::basis(actual.dim(), &idx, *c));
    }
    Ok(actual.sub(&target).max_abs())
}

fn vector_deviation(actual: &Vector, expected: &[f64]) -> Result<f64> {
    if actual.len() != expected.len() {
        return Err(Error::structural("expected vector has the wrong length"));
    }
    Ok(actual
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - e).abs())
        .fold(0.0, f64::max))
}

fn matrix_deviation(actual: &Mat, expected: &[Vec<f64>]) -> Result<f64> {
    let e = crate::json::matrix_from_rows(expected)?;
    if e.shape() != actual.shape() {
        return Err(Error::structural("expected matrix has the wrong shape"));
    }
    Ok((actual - e).amax())
}

impl Preset {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.structure.clone())
    }

    pub fn expectation(&self, quantity: &str) -> Option<&Expectation> {
        self.expected.iter().find(|e| e.quantity == quantity)
    }

    /// Recomputes every stored expectation; values pass within `EPS_ABS`.
    pub fn check(&self) -> Result<Vec<ExpectationCheck>> {
        let geo = self.geometry()?;
        self.expected
            .iter()
            .map(|e| {
                let residual = deviation(&geo, e)?;
                Ok(ExpectationCheck {
                    quantity: e.quantity.clone(),
                    source: e.source,
                    residual,
                    passed: residual <= EPS_ABS,
                })
            })
            .collect()
    }
}

fn flag_value(geo: &Geometry, name: &str) -> Result<bool> {
    if name == "second_chern_einstein" {
        return Ok(einstein_residuals(geo).second_chern_einstein);
    }
    let flags = serde_json::to_value(condition_flags(geo)).expect("plain data");
    flags
        .get(name)
        .and_then(|f| f.get("value"))
        .and_then(|v| v.as_bool())
        .ok_or_else(|| Error::Structural(format!("unknown flag `{name}`")))
}

fn deviation(geo: &Geometry, e: &Expectation) -> Result<f64> {
    let q = e.quantity.as_str();
    let s = geo.structure();
    let mismatch = || Error::Structural(format!("value of `{q}` has the wrong kind"));
    if let Some(name) = q.strip_prefix("flag:") {
        let ExpectedValue::Flag(want) = e.value else {
            return Err(mismatch());
        };
        return Ok(if flag_value(geo, name)? == want { 0.0 } else { 1.0 });
    }
    if let Some(pair) = q.strip_prefix("nijenhuis_") {
        let idx = parse_form_key(pair, s.dim())?;
        let (ExpectedValue::Vector(want), [i, j]) = (&e.value, idx.as_slice()) else {
            return Err(mismatch());
        };
        return vector_deviation(&geo.nijenhuis().at(*i, *j), want);
    }
    match (q, &e.value) {
        ("theta", ExpectedValue::Vector(v)) => vector_deviation(geo.theta(), v),
        ("s_h", ExpectedValue::Scalar(x)) => Ok((geo.scalars().s_h - x).abs()),
        ("s_g", ExpectedValue::Scalar(x)) => Ok((geo.scalars().s_g - x).abs()),
        ("theta_norm_sq", ExpectedValue::Scalar(x)) => Ok((geo.theta_norm_sq() - x).abs()),
        ("nijenhuis_norm_sq", ExpectedValue::Scalar(x)) => Ok((geo.nijenhuis().norm_sq() - x).abs()),
        ("r", ExpectedValue::Form(f)) => form_deviation(&geo.second_chern_ricci(), f),
        ("rho_chern", ExpectedValue::Form(f)) => form_deviation(&geo.rho_chern(), f),
        ("ric_bismut", ExpectedValue::Form(f)) => form_deviation(&geo.bismut_ricci(), f),
        ("d_theta", ExpectedValue::Form(f)) => form_deviation(&geo.d_theta(), f),
        ("n_theta", ExpectedValue::Form(f)) => form_deviation(&geo.n_theta(), f),
        ("dF", ExpectedValue::Form(f)) => form_deviation(&geo.d(s.fundamental_form()), f),
        ("lee_sym_j_minus", ExpectedValue::Matrix(m)) => matrix_deviation(&geo.lee_sym_j_minus(), m),
        ("lee_sym_j_minus", ExpectedValue::Vector(v)) if v.is_empty() => {
            Ok(geo.lee_sym_j_minus().amax())
        }
        (
            "theta" | "s_h" | "s_g" | "theta_norm_sq" | "nijenhuis_norm_sq" | "r" | "rho_chern"
            | "ric_bismut" | "d_theta" | "n_theta" | "dF" | "lee_sym_j_minus",
            _,
        ) => Err(mismatch()),
        _ => Err(Error::Structural(format!("unknown quantity `{q}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_stored_preset_parses() {
        assert_eq!(catalog().len(), 5);
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn stored_constants_match_their_expressions() {
        let exact: BTreeMap<&str, f64> = [
            ("s", 5f64.sqrt() - 1.0),
            ("q", (1.0 + 17f64.sqrt()) / 8.0),
        ]
        .into_iter()
        .collect();
        for p in catalog() {
            for c in &p.constants {
                let want = exact[c.symbol.as_str()];
                assert!((c.value - want).abs() < 1e-16, "{} in {}", c.symbol, p.name);
            }
        }
    }

    #[test]
    fn unknown_quantity_is_an_error() {
        let mut p = preset("a48").unwrap();
        p.expected = vec![Expectation {
            quantity: "torsion".into(),
            value: ExpectedValue::Scalar(0.0),
            source: Source::Derived,
            comment: None,
        }];
        assert!(p.check().is_err());
    }
}
