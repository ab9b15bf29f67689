//! Geometry at a point of the subdifferential graph: normal and tangent
//! cones to the subgradient set, the prenormal cone to the graph, and the
//! precoderivative, all built from one subgradient decomposition.
//!
//! The decomposition is pivot-order dependent, so invariance of the derived
//! cones under the choice of witness is enforced as a check, never assumed.

use num_traits::One;
use rand::Rng;

use crate::cones::{
    generated_eq, halfspace_eq, member_halfspace, ConeProduct, GeneratedCone, HalfspaceCone,
};
use crate::cpwl::{ActivityPattern, CpwlFunction, IndexSet, SubgradientWitness};
use crate::exactla::{QVector, Rational};
use crate::{Error, Result};

/// A validated point `(x, v)` of `gph d(phi)` with its decomposition and
/// activity pattern.
#[derive(Clone, Debug)]
pub struct GraphPoint {
    pub x: QVector,
    pub v: QVector,
    pub witness: SubgradientWitness,
    pub pattern: ActivityPattern,
}

impl GraphPoint {
    pub fn new(f: &CpwlFunction, x: QVector, v: QVector) -> Result<Self> {
        let witness = f.decompose_subgradient(&x, &v)?;
        let pattern = f.activity(&x)?;
        Ok(GraphPoint {
            x,
            v,
            witness,
            pattern,
        })
    }
}

fn check_nested(
    f: &CpwlFunction,
    inner: &IndexSet,
    outer: &IndexSet,
    universe: usize,
    what: &'static str,
) -> Result<()> {
    for &i in outer {
        if i >= universe {
            return Err(Error::IndexOutOfRange { index: i, what });
        }
    }
    if !inner.is_subset(outer) {
        return Err(Error::InclusionViolation("P must be contained in Q"));
    }
    let _ = f;
    Ok(())
}

/// The generated cone attached to nested index pairs:
/// `span{a_i - a_j : i,j in P1} + cone{a_i - a_j : (i,j) in (Q1\P1) x P1}
///  + span{d_i : i in P2} + cone{d_i : i in Q2\P2}`.
pub fn build_f(
    f: &CpwlFunction,
    p1: &IndexSet,
    q1: &IndexSet,
    p2: &IndexSet,
    q2: &IndexSet,
) -> Result<GeneratedCone> {
    check_nested(f, p1, q1, f.pieces().len(), "piece")?;
    check_nested(f, p2, q2, f.constraints().len(), "constraint")?;
    let mut span = Vec::new();
    let mut rays = Vec::new();
    let p1v: Vec<usize> = p1.iter().copied().collect();
    for (s, &i) in p1v.iter().enumerate() {
        for &j in &p1v[s + 1..] {
            span.push(f.piece(i).0.sub(&f.piece(j).0));
        }
    }
    for &i in q1.difference(p1) {
        for &j in p1 {
            rays.push(f.piece(i).0.sub(&f.piece(j).0));
        }
    }
    for &i in p2 {
        span.push(f.constraint(i).0.clone());
    }
    for &i in q2.difference(p2) {
        rays.push(f.constraint(i).0.clone());
    }
    Ok(GeneratedCone::new(span, rays, f.dim()))
}

/// The halfspace cone polar to `build_f` by the Farkas identity: the same
/// families act as equality and inequality normals.
pub fn build_g(
    f: &CpwlFunction,
    p1: &IndexSet,
    q1: &IndexSet,
    p2: &IndexSet,
    q2: &IndexSet,
) -> Result<HalfspaceCone> {
    let gen = build_f(f, p1, q1, p2, q2)?;
    Ok(HalfspaceCone::new(gen.span_gens, gen.ray_gens, f.dim()))
}

/// `N(v; d(phi)(x))` at a graph point: the halfspace cone on the reference
/// index sets `(J1, K, J2, I)`.
pub fn normal_cone_at_subgradient(f: &CpwlFunction, g: &GraphPoint) -> Result<HalfspaceCone> {
    build_g(f, &g.witness.j1, &g.pattern.k, &g.witness.j2, &g.pattern.i)
}

/// `T(v; d(phi)(x))`, the polar partner of the normal cone above.
pub fn tangent_cone_at_subgradient(f: &CpwlFunction, g: &GraphPoint) -> Result<GeneratedCone> {
    build_f(f, &g.witness.j1, &g.pattern.k, &g.witness.j2, &g.pattern.i)
}

/// The prenormal cone to the subdifferential graph as the product
/// `T(v; d(phi)(x)) x N(v; d(phi)(x))`.
pub fn prenormal_cone_graph(f: &CpwlFunction, g: &GraphPoint) -> Result<ConeProduct> {
    Ok(ConeProduct::new(
        tangent_cone_at_subgradient(f, g)?,
        normal_cone_at_subgradient(f, g)?,
    ))
}

/// Precoderivative value at direction `u`: the tangent factor when
/// `-u` lies in the normal factor (the domain is the negated normal cone),
/// `None` otherwise.
pub fn precoderivative(
    f: &CpwlFunction,
    g: &GraphPoint,
    u: &QVector,
) -> Result<Option<GeneratedCone>> {
    if u.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: u.dim(),
        });
    }
    let normal = normal_cone_at_subgradient(f, g)?;
    if member_halfspace(&u.neg(), &normal)? {
        Ok(Some(tangent_cone_at_subgradient(f, g)?))
    } else {
        Ok(None)
    }
}

/// Computes several decompositions of the same graph point under randomized
/// LP objectives and checks that every derived cone pair agrees as sets.
pub fn invariance_check<R: Rng>(
    f: &CpwlFunction,
    g: &GraphPoint,
    trials: usize,
    rng: &mut R,
) -> Result<bool> {
    if trials < 2 {
        return Err(Error::Precondition(
            "invariance check needs at least two trials".into(),
        ));
    }
    let base_f = tangent_cone_at_subgradient(f, g)?;
    let base_g = normal_cone_at_subgradient(f, g)?;
    let nvars = g.pattern.k.len() + g.pattern.i.len();
    for _ in 1..trials {
        let objective = QVector::new(
            (0..nvars)
                .map(|_| Rational::new(rng.random_range(-6i64..7).into(), One::one()))
                .collect(),
        );
        let w = f.decompose_subgradient_with_objective(&g.x, &g.v, Some(&objective))?;
        if w.j1 == g.witness.j1 && w.j2 == g.witness.j2 {
            continue;
        }
        let trial_f = build_f(f, &w.j1, &g.pattern.k, &w.j2, &g.pattern.i)?;
        let trial_g = build_g(f, &w.j1, &g.pattern.k, &w.j2, &g.pattern.i)?;
        if !generated_eq(&trial_f, &base_f)? || !halfspace_eq(&trial_g, &base_g)? {
            return Ok(false);
        }
    }
    Ok(true)
}
