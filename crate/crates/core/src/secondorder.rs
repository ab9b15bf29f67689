//! Second-order subdifferential machinery: the index quadruple family, the
//! limiting normal cone to the subdifferential graph, the domain and values
//! of the second-order subdifferential, the affine independence
//! qualification, the exact value formula and the nonsmooth sum rule.
//!
//! Candidate quadruples factor through two gates: representability of the
//! base subgradient over `(P1, P2)` and nonemptiness of the activity stratum
//! of `(Q1, Q2)`.  Both gates are evaluated once per index pair and joined
//! combinatorially, which is equivalent to gating each quadruple separately
//! but far cheaper; stratum results are memoized by construction.

use rayon::prelude::*;

use num_traits::{Signed, Zero};

use crate::cones::{
    contains_generated, double_description, generated_eq, member_generated, member_halfspace,
    minkowski_sum, ConeProduct, ConeUnion, GeneratedCone, GeneratedUnion, HalfspaceCone,
};
use crate::cpwl::{ConvexPolyhedronV, CpwlFunction, IndexSet};
use crate::exactla::{QMatrix, QVector, Rational};
use crate::graphgeo::{build_f, build_g, GraphPoint};
use crate::lp::{self, LinearSystem};
use crate::{Error, Result};

/// Nested index quadruple `(P1, Q1, P2, Q2)` from the enumeration family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexQuadruple {
    pub p1: IndexSet,
    pub q1: IndexSet,
    pub p2: IndexSet,
    pub q2: IndexSet,
}

/// Feature index sets: active indices whose functionals vanish identically
/// on the reference halfspace cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSets {
    pub gamma1: IndexSet,
    pub gamma2: IndexSet,
}

/// Sign partition of the active indices against a direction `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionActivity {
    pub i01: IndexSet,
    pub igt1: IndexSet,
    pub i02: IndexSet,
    pub igt2: IndexSet,
}

/// `v in co{a_i : i in P1} + cone{d_i : i in P2}`.
pub fn d_member(f: &CpwlFunction, v: &QVector, p1: &IndexSet, p2: &IndexSet) -> Result<bool> {
    for &i in p1 {
        if i >= f.pieces().len() {
            return Err(Error::IndexOutOfRange { index: i, what: "piece" });
        }
    }
    for &t in p2 {
        if t >= f.constraints().len() {
            return Err(Error::IndexOutOfRange { index: t, what: "constraint" });
        }
    }
    let poly = ConvexPolyhedronV {
        hull_points: p1.iter().map(|&i| f.piece(i).0.clone()).collect(),
        ray_gens: p2.iter().map(|&t| f.constraint(t).0.clone()).collect(),
        dim: f.dim(),
    };
    poly.contains(v)
}

/// A witness of the stratum `{x : K(x) = Q1, I(x) = Q2}`, or `None` when it
/// is empty.  Equal-value rows bind within `Q1`, strict domination excludes
/// the remaining pieces, equality rows bind `Q2`, strict rows keep the other
/// constraints inactive.
pub fn h_nonempty(f: &CpwlFunction, q1: &IndexSet, q2: &IndexSet) -> Result<Option<QVector>> {
    for &i in q1 {
        if i >= f.pieces().len() {
            return Err(Error::IndexOutOfRange { index: i, what: "piece" });
        }
    }
    for &t in q2 {
        if t >= f.constraints().len() {
            return Err(Error::IndexOutOfRange { index: t, what: "constraint" });
        }
    }
    let Some(&pivot) = q1.iter().next() else {
        return Ok(None); // every domain point has a nonempty argmax set
    };
    let mut sys = LinearSystem::new(f.dim());
    let (a_pivot, alpha_pivot) = f.piece(pivot);
    for &i in q1 {
        if i == pivot {
            continue;
        }
        let (a, alpha) = f.piece(i);
        sys.push_eq(a.sub(a_pivot), alpha - alpha_pivot);
    }
    for t in 0..f.pieces().len() {
        if q1.contains(&t) {
            continue;
        }
        let (a, alpha) = f.piece(t);
        sys.push_lt(a.sub(a_pivot), alpha - alpha_pivot);
    }
    for t in 0..f.constraints().len() {
        let (d, beta) = f.constraint(t);
        if q2.contains(&t) {
            sys.push_eq(d.clone(), beta.clone());
        } else {
            sys.push_lt(d.clone(), beta.clone());
        }
    }
    lp::strictly_feasible(&sys)
}

fn mask_to_set(mask: usize, universe: &[usize]) -> IndexSet {
    universe
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &i)| i)
        .collect()
}

/// All quadruples `(P1, Q1, P2, Q2)` with `P1 c Q1 c K`, `P2 c Q2 c I`,
/// the subgradient representable over `(P1, P2)`, and the `(Q1, Q2)` stratum
/// nonempty; sorted lexicographically over subset bitmasks.
#[allow(clippy::needless_range_loop)]
pub fn enumerate_a(f: &CpwlFunction, g: &GraphPoint) -> Result<Vec<IndexQuadruple>> {
    let k: Vec<usize> = g.pattern.k.iter().copied().collect();
    let i: Vec<usize> = g.pattern.i.iter().copied().collect();
    let nk = k.len();
    let ni = i.len();

    // Representability gate, with its upward monotonicity exploited: once a
    // pair admits the subgradient, every superset pair does.
    let mut d_ok = vec![vec![false; 1 << ni]; 1 << nk];
    for m1 in 0..1usize << nk {
        for m2 in 0..1usize << ni {
            let inherited = (0..nk).any(|b| m1 >> b & 1 == 1 && d_ok[m1 & !(1 << b)][m2])
                || (0..ni).any(|b| m2 >> b & 1 == 1 && d_ok[m1][m2 & !(1 << b)]);
            d_ok[m1][m2] = inherited
                || d_member(f, &g.v, &mask_to_set(m1, &k), &mask_to_set(m2, &i))?;
        }
    }

    // Stratum gate, one strict LP per (Q1, Q2) pair.
    let pairs: Vec<(usize, usize)> = (0..1usize << nk)
        .flat_map(|m1| (0..1usize << ni).map(move |m2| (m1, m2)))
        .collect();
    let h_flags: Vec<Result<bool>> = pairs
        .par_iter()
        .map(|&(m1, m2)| {
            Ok(h_nonempty(f, &mask_to_set(m1, &k), &mask_to_set(m2, &i))?.is_some())
        })
        .collect();
    let mut h_ok = vec![vec![false; 1 << ni]; 1 << nk];
    for (&(m1, m2), flag) in pairs.iter().zip(h_flags) {
        h_ok[m1][m2] = flag?;
    }

    let mut out = Vec::new();
    for p1 in 0..1usize << nk {
        for q1 in p1..1usize << nk {
            if q1 & p1 != p1 {
                continue;
            }
            for p2 in 0..1usize << ni {
                if !d_ok[p1][p2] {
                    continue;
                }
                for q2 in 0..1usize << ni {
                    if q2 & p2 != p2 || !h_ok[q1][q2] {
                        continue;
                    }
                    out.push(IndexQuadruple {
                        p1: mask_to_set(p1, &k),
                        q1: mask_to_set(q1, &k),
                        p2: mask_to_set(p2, &i),
                        q2: mask_to_set(q2, &i),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The limiting normal cone to the subdifferential graph as the union of
/// cone products over the quadruple family.
pub fn limiting_normal_cone(f: &CpwlFunction, g: &GraphPoint) -> Result<ConeUnion> {
    let mut members = Vec::new();
    for quad in enumerate_a(f, g)? {
        members.push(ConeProduct::new(
            build_f(f, &quad.p1, &quad.q1, &quad.p2, &quad.q2)?,
            build_g(f, &quad.p1, &quad.q1, &quad.p2, &quad.q2)?,
        ));
    }
    Ok(ConeUnion { members })
}

/// Second-order subdifferential value at `u`: the union of the generated
/// cones of the quadruples whose halfspace cone contains `-u`.  An empty
/// union means `u` is outside the second-order domain.
pub fn second_order_value(f: &CpwlFunction, g: &GraphPoint, u: &QVector) -> Result<GeneratedUnion> {
    if u.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: u.dim(),
        });
    }
    let neg = u.neg();
    let mut members = Vec::new();
    for quad in enumerate_a(f, g)? {
        let cone_g = build_g(f, &quad.p1, &quad.q1, &quad.p2, &quad.q2)?;
        if member_halfspace(&neg, &cone_g)? {
            members.push(build_f(f, &quad.p1, &quad.q1, &quad.p2, &quad.q2)?);
        }
    }
    Ok(GeneratedUnion { members })
}

/// Feature sets: a functional vanishes identically on the reference
/// halfspace cone iff both it and its negation lie in the polar, which by
/// the Farkas identity is the reference generated cone.
pub fn feature_sets(f: &CpwlFunction, g: &GraphPoint) -> Result<FeatureSets> {
    let reference = build_f(f, &g.witness.j1, &g.pattern.k, &g.witness.j2, &g.pattern.i)?;
    let vanishes = |c: &QVector| -> Result<bool> {
        Ok(member_generated(c, &reference)? && member_generated(&c.neg(), &reference)?)
    };
    let mut gamma1 = IndexSet::new();
    'outer: for &i in &g.pattern.k {
        for &j in &g.witness.j1 {
            if !vanishes(&f.piece(i).0.sub(&f.piece(j).0))? {
                continue 'outer;
            }
        }
        gamma1.insert(i);
    }
    let mut gamma2 = IndexSet::new();
    for &t in &g.pattern.i {
        if vanishes(&f.constraint(t).0)? {
            gamma2.insert(t);
        }
    }
    Ok(FeatureSets { gamma1, gamma2 })
}

/// The second-order subdifferential domain: the subspace where every
/// feature-pair difference and every feature constraint normal vanishes.
pub fn second_order_domain(f: &CpwlFunction, g: &GraphPoint) -> Result<HalfspaceCone> {
    let features = feature_sets(f, g)?;
    let mut eq = Vec::new();
    let gamma1: Vec<usize> = features.gamma1.iter().copied().collect();
    for (s, &i) in gamma1.iter().enumerate() {
        for &j in &gamma1[s + 1..] {
            eq.push(f.piece(i).0.sub(&f.piece(j).0));
        }
    }
    for &t in &features.gamma2 {
        eq.push(f.constraint(t).0.clone());
    }
    Ok(HalfspaceCone::new(eq, Vec::new(), f.dim()))
}

/// A basis of the domain subspace, for spanning-set tests and reports.
pub fn second_order_domain_basis(f: &CpwlFunction, g: &GraphPoint) -> Result<Vec<QVector>> {
    let domain = second_order_domain(f, g)?;
    if domain.eq_normals.is_empty() {
        return Ok((0..f.dim()).map(|i| QVector::unit(f.dim(), i)).collect());
    }
    Ok(QMatrix::new(domain.eq_normals, f.dim()).kernel_basis())
}

/// Sign partition of active indices along an admissible direction.
/// Indices with a negative pairing belong to neither set and contribute
/// nothing downstream.
pub fn direction_activity(
    f: &CpwlFunction,
    g: &GraphPoint,
    u: &QVector,
) -> Result<DirectionActivity> {
    let domain = second_order_domain(f, g)?;
    if !member_halfspace(u, &domain)? {
        return Err(Error::OutsideSecondOrderDomain);
    }
    let &j_ref = g
        .witness
        .j1
        .iter()
        .next()
        .expect("a subgradient decomposition always carries a positive lambda");
    let a_ref = &f.piece(j_ref).0;
    let mut i01 = IndexSet::new();
    let mut igt1 = IndexSet::new();
    for &i in &g.pattern.k {
        let pairing = f.piece(i).0.sub(a_ref).dot(u);
        if pairing.is_zero() {
            i01.insert(i);
        } else if pairing.is_positive() {
            igt1.insert(i);
        }
    }
    let mut i02 = IndexSet::new();
    let mut igt2 = IndexSet::new();
    for &t in &g.pattern.i {
        let pairing = f.constraint(t).0.dot(u);
        if pairing.is_zero() {
            i02.insert(t);
        } else if pairing.is_positive() {
            igt2.insert(t);
        }
    }
    Ok(DirectionActivity {
        i01,
        igt1,
        i02,
        igt2,
    })
}

/// Upper estimate of the second-order value along `u`, from the sign
/// partition of the active indices.
pub fn value_upper_estimate(
    f: &CpwlFunction,
    g: &GraphPoint,
    u: &QVector,
) -> Result<GeneratedCone> {
    let act = direction_activity(f, g, u)?;
    cone_from_activity(f, &act)
}

fn cone_from_activity(f: &CpwlFunction, act: &DirectionActivity) -> Result<GeneratedCone> {
    let mut span = Vec::new();
    let mut rays = Vec::new();
    let i01: Vec<usize> = act.i01.iter().copied().collect();
    for (s, &i) in i01.iter().enumerate() {
        for &j in &i01[s + 1..] {
            span.push(f.piece(i).0.sub(&f.piece(j).0));
        }
    }
    for &i in &act.igt1 {
        for &j in &act.i01 {
            rays.push(f.piece(i).0.sub(&f.piece(j).0));
        }
    }
    for &t in &act.i02 {
        span.push(f.constraint(t).0.clone());
    }
    for &t in &act.igt2 {
        rays.push(f.constraint(t).0.clone());
    }
    Ok(GeneratedCone::new(span, rays, f.dim()))
}

/// Affine independence qualification: `{(a_i, 1) : i in K(x)}` together with
/// `{(d_t, 0) : t in I(x)}` are linearly independent.
pub fn aiqc(f: &CpwlFunction, x: &QVector) -> Result<bool> {
    let pattern = f.activity(x)?;
    let mut rows = Vec::new();
    for &i in &pattern.k {
        let mut row = f.piece(i).0.clone();
        row.push(Rational::from_integer(1.into()));
        rows.push(row);
    }
    for &t in &pattern.i {
        let mut row = f.constraint(t).0.clone();
        row.push(Rational::zero());
        rows.push(row);
    }
    let count = rows.len();
    Ok(QMatrix::new(rows, f.dim() + 1).rank() == count)
}

/// Exact second-order value under the qualification condition: the upper
/// estimate holds with equality.
pub fn value_exact(f: &CpwlFunction, g: &GraphPoint, u: &QVector) -> Result<GeneratedCone> {
    if !aiqc(f, &g.x)? {
        return Err(Error::QualificationFailed);
    }
    value_upper_estimate(f, g, u)
}

/// The quadruple realizing the exact value inside the enumeration family:
/// `(I01, I01 u Igt1, I02, I02 u Igt2)`.
pub fn witness_quadruple(f: &CpwlFunction, g: &GraphPoint, u: &QVector) -> Result<IndexQuadruple> {
    let act = direction_activity(f, g, u)?;
    Ok(IndexQuadruple {
        p1: act.i01.clone(),
        q1: act.i01.union(&act.igt1).copied().collect(),
        p2: act.i02.clone(),
        q2: act.i02.union(&act.igt2).copied().collect(),
    })
}

/// Exact second-order sum rule: the value of the function splits as the
/// Minkowski sum of the values of its max part at `(x, v1)` and its domain
/// indicator part at `(x, v2)`.
pub fn sum_rule_check(f: &CpwlFunction, g: &GraphPoint, u: &QVector) -> Result<bool> {
    let whole = value_exact(f, g, u)?;
    let max_part = f.max_part();
    let g1 = GraphPoint::new(&max_part, g.x.clone(), g.witness.v1.clone())?;
    let lhs1 = value_exact(&max_part, &g1, u)?;
    let indicator = f.indicator_part();
    let g2 = GraphPoint::new(&indicator, g.x.clone(), g.witness.v2.clone())?;
    let lhs2 = value_exact(&indicator, &g2, u)?;
    generated_eq(&whole, &minkowski_sum(&lhs1, &lhs2)?)
}

/// The difference identity behind the second-order domain formula: the
/// feature-level halfspace cone equals the set difference `G - G` of the
/// reference cone.
pub fn difference_identity_check(f: &CpwlFunction, g: &GraphPoint) -> Result<bool> {
    let features = feature_sets(f, g)?;
    let lhs = build_g(f, &g.witness.j1, &features.gamma1, &g.witness.j2, &features.gamma2)?;
    let reference = build_g(f, &g.witness.j1, &g.pattern.k, &g.witness.j2, &g.pattern.i)?;
    let v = double_description(&reference)?;
    let negated = GeneratedCone::new(
        v.span_gens.clone(),
        v.ray_gens.iter().map(|r| r.neg()).collect(),
        v.dim,
    );
    let difference = minkowski_sum(&v, &negated)?;

    for gen in difference.closure_generators() {
        if !member_halfspace(&gen, &lhs)? {
            return Ok(false);
        }
    }
    let lhs_v = double_description(&lhs)?;
    contains_generated(&difference, &lhs_v)
}
