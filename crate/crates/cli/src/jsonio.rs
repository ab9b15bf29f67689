//! JSON schema of the command line interface.
//!
//! Rationals travel as strings `"p/q"` (bare integers are accepted on
//! input), indices are 1-based, and every emitted union is canonicalized
//! and sorted so repeated runs produce identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use cpwl_core::cones::{
    canonical_generated, ConeProduct, ConeUnion, GeneratedCone, GeneratedUnion, HalfspaceCone,
};
use cpwl_core::cpwl::{ActivityPattern, ConvexPolyhedronV, CpwlFunction, SubgradientWitness};
use cpwl_core::exactla::{format_rational, parse_rational, QVector, Rational};
use cpwl_core::oracle::VerifyReport;

use crate::CliError;

/// A rational literal: `"p/q"`, `"p"`, or a bare JSON integer.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RatLit {
    Int(i64),
    Str(String),
}

impl RatLit {
    pub fn parse(&self) -> Result<Rational, CliError> {
        match self {
            RatLit::Int(n) => Ok(Rational::from_integer((*n).into())),
            RatLit::Str(s) => {
                parse_rational(s).map_err(|e| CliError::Input(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct PieceJson {
    pub a: Vec<RatLit>,
    pub alpha: RatLit,
}

#[derive(Debug, Deserialize)]
pub struct ConstraintJson {
    pub d: Vec<RatLit>,
    pub beta: RatLit,
}

#[derive(Debug, Deserialize)]
pub struct FunctionJson {
    pub dim: usize,
    pub pieces: Vec<PieceJson>,
    #[serde(default)]
    pub constraints: Vec<ConstraintJson>,
}

/// Optional query payload; which fields are required depends on the
/// subcommand.
#[derive(Debug, Default, Deserialize)]
pub struct QueryJson {
    pub kind: Option<String>,
    pub x: Option<Vec<RatLit>>,
    pub v: Option<Vec<RatLit>>,
    pub u: Option<Vec<RatLit>>,
    pub w: Option<Vec<RatLit>>,
    pub seed: Option<u64>,
    pub probes: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct ProblemFileJson {
    pub function: FunctionJson,
    #[serde(default)]
    pub query: Option<QueryJson>,
}

pub fn parse_vector(lits: &[RatLit]) -> Result<QVector, CliError> {
    let mut entries = Vec::with_capacity(lits.len());
    for l in lits {
        entries.push(l.parse()?);
    }
    Ok(QVector::new(entries))
}

pub fn build_function(json: &FunctionJson) -> Result<CpwlFunction, CliError> {
    let mut pieces = Vec::with_capacity(json.pieces.len());
    for p in &json.pieces {
        pieces.push((parse_vector(&p.a)?, p.alpha.parse()?));
    }
    let mut constraints = Vec::with_capacity(json.constraints.len());
    for c in &json.constraints {
        constraints.push((parse_vector(&c.d)?, c.beta.parse()?));
    }
    CpwlFunction::new(pieces, constraints, json.dim).map_err(CliError::from)
}

pub fn vector_json(v: &QVector) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn vectors_json(vs: &[QVector]) -> Vec<Vec<String>> {
    vs.iter().map(vector_json).collect()
}

#[derive(Debug, Serialize)]
pub struct GeneratedConeJson {
    pub span: Vec<Vec<String>>,
    pub rays: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct HalfspaceConeJson {
    pub eq: Vec<Vec<String>>,
    pub ineq: Vec<Vec<String>>,
}

pub fn generated_json(c: &GeneratedCone) -> Result<GeneratedConeJson, CliError> {
    let canon = canonical_generated(c)?;
    Ok(GeneratedConeJson {
        span: vectors_json(&canon.span_gens),
        rays: vectors_json(&canon.ray_gens),
    })
}

fn canonical_rows(rows: &[QVector]) -> Vec<QVector> {
    let mut out: Vec<QVector> = Vec::new();
    for r in rows {
        let scaled = match r.iter().find(|e| !num_traits::Zero::is_zero(*e)) {
            None => continue,
            Some(first) => {
                let inv = first.clone().recip();
                let inv = if num_traits::Signed::is_negative(&inv) {
                    -inv
                } else {
                    inv
                };
                r.scale(&inv)
            }
        };
        if !out.contains(&scaled) {
            out.push(scaled);
        }
    }
    out.sort();
    out
}

pub fn halfspace_json(c: &HalfspaceCone) -> HalfspaceConeJson {
    HalfspaceConeJson {
        eq: vectors_json(&canonical_rows(&c.eq_normals)),
        ineq: vectors_json(&canonical_rows(&c.ineq_normals)),
    }
}

#[derive(Debug, Serialize)]
pub struct ConeProductJson {
    pub f: GeneratedConeJson,
    pub g: HalfspaceConeJson,
}

fn product_json(p: &ConeProduct) -> Result<ConeProductJson, CliError> {
    Ok(ConeProductJson {
        f: generated_json(&p.first)?,
        g: halfspace_json(&p.second),
    })
}

#[derive(Debug, Serialize)]
pub struct ConeUnionJson {
    pub members: Vec<ConeProductJson>,
}

pub fn cone_union_json(u: &ConeUnion) -> Result<ConeUnionJson, CliError> {
    let mut members = Vec::new();
    for m in &u.members {
        members.push(product_json(m)?);
    }
    members.sort_by_key(|m| serde_json::to_string(m).unwrap_or_default());
    members.dedup_by_key(|m| serde_json::to_string(m).unwrap_or_default());
    Ok(ConeUnionJson { members })
}

#[derive(Debug, Serialize)]
pub struct GeneratedUnionJson {
    pub members: Vec<GeneratedConeJson>,
}

pub fn generated_union_json(u: &GeneratedUnion) -> Result<GeneratedUnionJson, CliError> {
    let mut members = Vec::new();
    for m in &u.members {
        members.push(generated_json(m)?);
    }
    members.sort_by_key(|m| serde_json::to_string(m).unwrap_or_default());
    members.dedup_by_key(|m| serde_json::to_string(m).unwrap_or_default());
    Ok(GeneratedUnionJson { members })
}

fn one_based(set: &cpwl_core::cpwl::IndexSet) -> Vec<usize> {
    set.iter().map(|&i| i + 1).collect()
}

#[derive(Debug, Serialize)]
pub struct ActivityJson {
    pub k: Vec<usize>,
    pub i: Vec<usize>,
}

pub fn activity_json(p: &ActivityPattern) -> ActivityJson {
    ActivityJson {
        k: one_based(&p.k),
        i: one_based(&p.i),
    }
}

#[derive(Debug, Serialize)]
pub struct SubdiffJson {
    pub hull: Vec<Vec<String>>,
    pub rays: Vec<Vec<String>>,
}

pub fn subdiff_json(p: &ConvexPolyhedronV) -> SubdiffJson {
    SubdiffJson {
        hull: vectors_json(&p.hull_points),
        rays: vectors_json(&p.ray_gens),
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub v1: Vec<String>,
    pub v2: Vec<String>,
    pub lambda: BTreeMap<usize, String>,
    pub mu: BTreeMap<usize, String>,
    pub j1: Vec<usize>,
    pub j2: Vec<usize>,
}

pub fn witness_json(w: &SubgradientWitness) -> WitnessJson {
    WitnessJson {
        v1: vector_json(&w.v1),
        v2: vector_json(&w.v2),
        lambda: w
            .lambda
            .iter()
            .map(|(&i, l)| (i + 1, format_rational(l)))
            .collect(),
        mu: w
            .mu
            .iter()
            .map(|(&t, m)| (t + 1, format_rational(m)))
            .collect(),
        j1: one_based(&w.j1),
        j2: one_based(&w.j2),
    }
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub checks: Vec<CheckJson>,
    pub all_passed: bool,
}

pub fn verify_json(r: &VerifyReport) -> VerifyJson {
    VerifyJson {
        checks: r
            .checks
            .iter()
            .map(|c| CheckJson {
                name: c.name.clone(),
                passed: c.passed,
                details: c.details.clone(),
            })
            .collect(),
        all_passed: r.all_passed,
    }
}
