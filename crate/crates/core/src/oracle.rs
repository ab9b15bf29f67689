//! Independent brute-force verification.
//!
//! The subdifferential graph of a CPWL function is a finite union of
//! products: the closure of each activity stratum in x-space times the
//! subgradient polyhedron of that stratum in v-space.  Prenormal cones are
//! computed from these products by the classical polyhedral formulas
//! (active-row conic hulls, intersections over members at a common point),
//! and the limiting normal cone by enumerating the activity sign patterns
//! realizable arbitrarily close to the point, with one exact witness
//! direction per pattern.  Everything stays independent of the closed
//! formulas it is used to validate.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cones::{
    double_description, generated_eq, member_halfspace, probe_points, ConeProduct, ConeUnion,
    GeneratedCone, HalfspaceCone,
};
use crate::cpwl::{CpwlFunction, IndexSet};
use crate::exactla::{format_rational, QVector, Rational};
use crate::graphgeo::{self, GraphPoint};
use crate::lp::{self, LinearSystem};
use crate::secondorder;
use crate::{Error, Result};

/// One product piece of the subdifferential graph: the closure of the
/// stratum with activity `(q1, q2)` times the H-represented subgradient
/// polyhedron shared by its points.
#[derive(Clone, Debug)]
pub struct GraphStratum {
    pub q1: IndexSet,
    pub q2: IndexSet,
    pub witness_x: QVector,
    pub x_block: LinearSystem,
    pub v_block: LinearSystem,
}

impl GraphStratum {
    pub fn contains(&self, x: &QVector, v: &QVector) -> bool {
        self.x_block.is_satisfied_by(x) && self.v_block.is_satisfied_by(v)
    }
}

/// Exact H-representation of `co(hull) + cone(rays)` by lifted dualization:
/// homogenize, take the polar cone, convert it with double description, and
/// read facet rows off the generators.
pub fn polyhedron_hrep_from_vrep(
    hull: &[QVector],
    rays: &[QVector],
    dim: usize,
) -> Result<LinearSystem> {
    let mut lifted = Vec::new();
    for p in hull {
        let mut z = p.clone();
        z.push(Rational::one());
        lifted.push(z);
    }
    for r in rays {
        let mut z = r.clone();
        z.push(Rational::zero());
        lifted.push(z);
    }
    let cone = GeneratedCone::new(Vec::new(), lifted, dim + 1);
    let polar_gens = double_description(&crate::cones::polar_of_generated(&cone))?;
    let mut sys = LinearSystem::new(dim);
    let split = |z: &QVector| -> (QVector, Rational) {
        (
            QVector::new(z.entries()[..dim].to_vec()),
            -&z[dim],
        )
    };
    for s in &polar_gens.span_gens {
        let (row, rhs) = split(s);
        sys.push_eq(row, rhs);
    }
    for r in &polar_gens.ray_gens {
        let (row, rhs) = split(r);
        sys.push_le(row, rhs);
    }
    Ok(sys)
}

/// H-representation of the subgradient set at `x` (dimension capped: the
/// lifted double description runs one dimension higher).
pub fn subgradient_polyhedron_hrep(f: &CpwlFunction, x: &QVector) -> Result<LinearSystem> {
    if f.dim() > 4 {
        return Err(Error::DimensionBound {
            dim: f.dim(),
            bound: 4,
        });
    }
    let sd = f.subdifferential(x)?;
    polyhedron_hrep_from_vrep(&sd.hull_points, &sd.ray_gens, f.dim())
}

/// Normal cone to an H-represented polyhedron at one of its points: span of
/// the equality normals plus the conic hull of the active inequality rows.
pub fn normal_cone_from_hrep(sys: &LinearSystem, point: &QVector) -> Result<GeneratedCone> {
    if !sys.is_satisfied_by(point) {
        return Err(Error::Precondition(
            "normal cone requested at a point outside the polyhedron".into(),
        ));
    }
    let span: Vec<QVector> = sys.eq_rows.iter().map(|(r, _)| r.clone()).collect();
    let rays: Vec<QVector> = sys
        .le_rows
        .iter()
        .filter(|(r, b)| &r.dot(point) == b)
        .map(|(r, _)| r.clone())
        .collect();
    Ok(GeneratedCone::new(span, rays, sys.dim))
}

/// Tangent cone to an H-represented polyhedron at one of its points.
pub fn tangent_cone_from_hrep(sys: &LinearSystem, point: &QVector) -> Result<HalfspaceCone> {
    let normal = normal_cone_from_hrep(sys, point)?;
    Ok(HalfspaceCone::new(normal.span_gens, normal.ray_gens, sys.dim))
}

fn stratum_closure_system(f: &CpwlFunction, q1: &IndexSet, q2: &IndexSet) -> LinearSystem {
    let mut sys = LinearSystem::new(f.dim());
    let &pivot = q1.iter().next().expect("stratum needs an argmax piece");
    let (a_pivot, alpha_pivot) = f.piece(pivot);
    for &i in q1 {
        if i != pivot {
            let (a, alpha) = f.piece(i);
            sys.push_eq(a.sub(a_pivot), alpha - alpha_pivot);
        }
    }
    for t in 0..f.pieces().len() {
        if !q1.contains(&t) {
            let (a, alpha) = f.piece(t);
            sys.push_le(a.sub(a_pivot), alpha - alpha_pivot);
        }
    }
    for t in 0..f.constraints().len() {
        let (d, beta) = f.constraint(t);
        if q2.contains(&t) {
            sys.push_eq(d.clone(), beta.clone());
        } else {
            sys.push_le(d.clone(), beta.clone());
        }
    }
    sys
}

/// All nonempty activity strata, as closed product pieces of the graph.
pub fn graph_strata(f: &CpwlFunction) -> Result<Vec<GraphStratum>> {
    let l = f.pieces().len();
    let m = f.constraints().len();
    let masks: Vec<(usize, usize)> = (1..1usize << l)
        .flat_map(|m1| (0..1usize << m).map(move |m2| (m1, m2)))
        .collect();
    let built: Vec<Result<Option<GraphStratum>>> = masks
        .par_iter()
        .map(|&(m1, m2)| {
            let q1: IndexSet = (0..l).filter(|b| m1 >> b & 1 == 1).collect();
            let q2: IndexSet = (0..m).filter(|b| m2 >> b & 1 == 1).collect();
            let Some(witness_x) = secondorder::h_nonempty(f, &q1, &q2)? else {
                return Ok(None);
            };
            let hull: Vec<QVector> = q1.iter().map(|&i| f.piece(i).0.clone()).collect();
            let rays: Vec<QVector> = q2.iter().map(|&t| f.constraint(t).0.clone()).collect();
            let v_block = polyhedron_hrep_from_vrep(&hull, &rays, f.dim())?;
            let x_block = stratum_closure_system(f, &q1, &q2);
            Ok(Some(GraphStratum {
                q1,
                q2,
                witness_x,
                x_block,
                v_block,
            }))
        })
        .collect();
    let mut out = Vec::new();
    for s in built {
        if let Some(s) = s? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Membership in the graph through the stratum decomposition.
pub fn graph_member(f: &CpwlFunction, x: &QVector, v: &QVector) -> Result<bool> {
    Ok(graph_member_with(&graph_strata(f)?, x, v))
}

pub fn graph_member_with(strata: &[GraphStratum], x: &QVector, v: &QVector) -> bool {
    strata.iter().any(|s| s.contains(x, v))
}

fn generated_to_halfspace(c: &GeneratedCone) -> Result<HalfspaceCone> {
    let polar_gens = double_description(&crate::cones::polar_of_generated(c))?;
    Ok(HalfspaceCone::new(
        polar_gens.span_gens,
        polar_gens.ray_gens,
        c.dim,
    ))
}

fn check_oracle_dim(f: &CpwlFunction) -> Result<()> {
    if f.dim() > 2 {
        return Err(Error::DimensionBound {
            dim: f.dim(),
            bound: 2,
        });
    }
    Ok(())
}

/// Prenormal cone to the graph at `(x, v)` computed from the stratum
/// products alone: the intersection over the products containing the point
/// of their (product) normal cones, emitted in H-form over the doubled
/// space.
pub fn prenormal_oracle(f: &CpwlFunction, x: &QVector, v: &QVector) -> Result<HalfspaceCone> {
    check_oracle_dim(f)?;
    prenormal_oracle_with(&graph_strata(f)?, f.dim(), x, v)
}

pub fn prenormal_oracle_with(
    strata: &[GraphStratum],
    dim: usize,
    x: &QVector,
    v: &QVector,
) -> Result<HalfspaceCone> {
    let containing: Vec<&GraphStratum> = strata.iter().filter(|s| s.contains(x, v)).collect();
    if containing.is_empty() {
        return Err(Error::Precondition(
            "point does not lie on the subdifferential graph".into(),
        ));
    }
    let zero = QVector::zero(dim);
    let mut eq = Vec::new();
    let mut ineq = Vec::new();
    for s in containing {
        let hx = generated_to_halfspace(&normal_cone_from_hrep(&s.x_block, x)?)?;
        let hv = generated_to_halfspace(&normal_cone_from_hrep(&s.v_block, v)?)?;
        eq.extend(hx.eq_normals.iter().map(|e| e.concat(&zero)));
        ineq.extend(hx.ineq_normals.iter().map(|e| e.concat(&zero)));
        eq.extend(hv.eq_normals.iter().map(|e| zero.concat(e)));
        ineq.extend(hv.ineq_normals.iter().map(|e| zero.concat(e)));
    }
    Ok(HalfspaceCone::new(eq, ineq, 2 * dim))
}

/// One registered row hyperplane: which canonical hyperplane it lies on and
/// whether its functional is the negated canonical one.
#[derive(Clone, Copy)]
struct OrientedRow {
    hyperplane: usize,
    flipped: bool,
}

/// Per-stratum registry of the rows active at the reference point, with the
/// original block-space normals kept for normal-cone assembly.
struct StratumRegistry {
    x_eq: Vec<OrientedRow>,
    v_eq: Vec<OrientedRow>,
    x_le: Vec<(OrientedRow, QVector)>,
    v_le: Vec<(OrientedRow, QVector)>,
    x_eq_normals: Vec<QVector>,
    v_eq_normals: Vec<QVector>,
}

fn effective_sign(sigma: u8, flipped: bool) -> u8 {
    if flipped {
        match sigma {
            1 => 2,
            2 => 1,
            z => z,
        }
    } else {
        sigma
    }
}

/// Limiting normal cone at `(x, v)` by sign-pattern enumeration over the
/// hyperplanes active at the point: each realizable pattern picks an exact
/// witness direction, the products containing the displaced point are
/// intersected, and the prenormal cones obtained this way are united.
pub fn limiting_oracle(f: &CpwlFunction, x: &QVector, v: &QVector) -> Result<ConeUnion> {
    check_oracle_dim(f)?;
    limiting_oracle_with(&graph_strata(f)?, f.dim(), x, v)
}

pub fn limiting_oracle_with(
    strata: &[GraphStratum],
    dim: usize,
    x: &QVector,
    v: &QVector,
) -> Result<ConeUnion> {
    let containing: Vec<&GraphStratum> = strata.iter().filter(|s| s.contains(x, v)).collect();
    if containing.is_empty() {
        return Err(Error::Precondition(
            "point does not lie on the subdifferential graph".into(),
        ));
    }
    let zero = QVector::zero(dim);

    // Distinct hyperplanes through the point in the doubled direction
    // space; signs `0/1/2` mean zero/negative/positive pairing.
    let mut hyperplanes: Vec<QVector> = Vec::new();
    let register = |functional: QVector, hyperplanes: &mut Vec<QVector>| -> Option<OrientedRow> {
        let first = functional.iter().find(|e| !e.is_zero())?.clone();
        let canon = functional.scale(&first.recip());
        let flipped = first.is_negative();
        let hyperplane = match hyperplanes.iter().position(|h| h == &canon) {
            Some(i) => i,
            None => {
                hyperplanes.push(canon);
                hyperplanes.len() - 1
            }
        };
        Some(OrientedRow {
            hyperplane,
            flipped,
        })
    };

    let mut registries: Vec<StratumRegistry> = Vec::new();
    for s in &containing {
        let mut reg = StratumRegistry {
            x_eq: Vec::new(),
            v_eq: Vec::new(),
            x_le: Vec::new(),
            v_le: Vec::new(),
            x_eq_normals: Vec::new(),
            v_eq_normals: Vec::new(),
        };
        for (r, _) in &s.x_block.eq_rows {
            reg.x_eq_normals.push(r.clone());
            if let Some(row) = register(r.concat(&zero), &mut hyperplanes) {
                reg.x_eq.push(row);
            }
        }
        for (r, b) in &s.x_block.le_rows {
            if &r.dot(x) == b {
                if let Some(row) = register(r.concat(&zero), &mut hyperplanes) {
                    reg.x_le.push((row, r.clone()));
                }
            }
        }
        for (r, _) in &s.v_block.eq_rows {
            reg.v_eq_normals.push(r.clone());
            if let Some(row) = register(zero.concat(r), &mut hyperplanes) {
                reg.v_eq.push(row);
            }
        }
        for (r, b) in &s.v_block.le_rows {
            if &r.dot(v) == b {
                if let Some(row) = register(zero.concat(r), &mut hyperplanes) {
                    reg.v_le.push((row, r.clone()));
                }
            }
        }
        registries.push(reg);
    }

    let k = hyperplanes.len();
    type MemberKey = Vec<(usize, Vec<bool>, Vec<bool>)>;
    let mut members: Vec<ConeProduct> = Vec::new();
    let mut realized: Vec<MemberKey> = Vec::new();
    let mut side_cache: HashMap<(usize, bool, Vec<bool>), HalfspaceCone> = HashMap::new();

    let mut pattern = vec![0u8; k];
    loop {
        // Which strata contain the displaced point, and the mask of their
        // inequality rows remaining active there.
        let mut key: MemberKey = Vec::new();
        for (si, reg) in registries.iter().enumerate() {
            let eq_ok = reg
                .x_eq
                .iter()
                .chain(reg.v_eq.iter())
                .all(|row| effective_sign(pattern[row.hyperplane], row.flipped) == 0);
            if !eq_ok {
                continue;
            }
            let le_signs_x: Vec<u8> = reg
                .x_le
                .iter()
                .map(|(row, _)| effective_sign(pattern[row.hyperplane], row.flipped))
                .collect();
            let le_signs_v: Vec<u8> = reg
                .v_le
                .iter()
                .map(|(row, _)| effective_sign(pattern[row.hyperplane], row.flipped))
                .collect();
            if le_signs_x.iter().chain(le_signs_v.iter()).any(|&e| e == 2) {
                continue;
            }
            key.push((
                si,
                le_signs_x.iter().map(|&e| e == 0).collect(),
                le_signs_v.iter().map(|&e| e == 0).collect(),
            ));
        }

        if !key.is_empty() && !realized.contains(&key) {
            // Exact witness direction with the chosen signs.
            let mut sys = LinearSystem::new(2 * dim);
            for (h, hyper) in hyperplanes.iter().enumerate() {
                match pattern[h] {
                    0 => sys.push_eq(hyper.clone(), Rational::zero()),
                    1 => sys.push_lt(hyper.clone(), Rational::zero()),
                    _ => sys.push_lt(hyper.neg(), Rational::zero()),
                }
            }
            if lp::strictly_feasible(&sys)?.is_some() {
                let mut eq_x = Vec::new();
                let mut ineq_x = Vec::new();
                let mut eq_v = Vec::new();
                let mut ineq_v = Vec::new();
                for (si, xa, va) in &key {
                    let reg = &registries[*si];
                    for (side_is_x, mask) in [(true, xa), (false, va)] {
                        let cache_key = (*si, side_is_x, mask.to_vec());
                        if !side_cache.contains_key(&cache_key) {
                            let (eq_normals, le_rows) = if side_is_x {
                                (&reg.x_eq_normals, &reg.x_le)
                            } else {
                                (&reg.v_eq_normals, &reg.v_le)
                            };
                            let rays: Vec<QVector> = le_rows
                                .iter()
                                .zip(mask.iter())
                                .filter(|(_, &keep)| keep)
                                .map(|((_, normal), _)| normal.clone())
                                .collect();
                            let cone = GeneratedCone::new(eq_normals.clone(), rays, dim);
                            side_cache.insert(cache_key.clone(), generated_to_halfspace(&cone)?);
                        }
                        let h = &side_cache[&cache_key];
                        if side_is_x {
                            eq_x.extend(h.eq_normals.iter().cloned());
                            ineq_x.extend(h.ineq_normals.iter().cloned());
                        } else {
                            eq_v.extend(h.eq_normals.iter().cloned());
                            ineq_v.extend(h.ineq_normals.iter().cloned());
                        }
                    }
                }
                let x_cone = double_description(&HalfspaceCone::new(eq_x, ineq_x, dim))?;
                let v_cone = HalfspaceCone::new(eq_v, ineq_v, dim);
                members.push(ConeProduct::new(x_cone, v_cone));
                realized.push(key);
            }
        }

        // next sign pattern, lexicographic
        let mut pos = 0;
        while pos < k {
            pattern[pos] += 1;
            if pattern[pos] < 3 {
                break;
            }
            pattern[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }

    // Deduplicate members equal as sets, keeping first-seen order.
    let mut unique: Vec<ConeProduct> = Vec::new();
    'outer: for m in members {
        for u in &unique {
            if generated_eq(&m.first, &u.first)?
                && crate::cones::halfspace_eq(&m.second, &u.second)?
            {
                continue 'outer;
            }
        }
        unique.push(m);
    }
    Ok(ConeUnion { members: unique })
}

/// Deterministic graph point samples: each stratum contributes its witness
/// together with subgradients read off the stratum polyhedron (vertices of
/// the hull part, the barycenter, and ray offsets).
pub fn sample_graph_points(f: &CpwlFunction) -> Result<Vec<(QVector, QVector)>> {
    let strata = graph_strata(f)?;
    let mut points: Vec<(QVector, QVector)> = Vec::new();
    let push = |x: &QVector, v: QVector, points: &mut Vec<(QVector, QVector)>| {
        let pair = (x.clone(), v);
        if !points.contains(&pair) {
            points.push(pair);
        }
    };
    for s in &strata {
        let x = &s.witness_x;
        let hull: Vec<QVector> = s.q1.iter().map(|&i| f.piece(i).0.clone()).collect();
        let rays: Vec<QVector> = s.q2.iter().map(|&t| f.constraint(t).0.clone()).collect();
        let mut bary = QVector::zero(f.dim());
        for h in &hull {
            bary = bary.add(h);
        }
        let count = Rational::from_integer((hull.len() as i64).into());
        bary = bary.scale(&count.recip());
        for h in &hull {
            push(x, h.clone(), &mut points);
        }
        push(x, bary.clone(), &mut points);
        let mut total = bary.clone();
        for r in &rays {
            push(x, bary.add(r), &mut points);
            total = total.add(r);
        }
        if rays.len() > 1 {
            push(x, total, &mut points);
        }
    }
    Ok(points)
}

/// One named check of the verification report.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

/// Outcome of the formula-vs-oracle comparison suite on one function.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
    pub all_passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub random_probes: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0xC0FFEE,
            random_probes: 50,
        }
    }
}

fn fmt_point(x: &QVector, v: &QVector) -> String {
    let fx: Vec<String> = x.iter().map(format_rational).collect();
    let fv: Vec<String> = v.iter().map(format_rational).collect();
    format!("x=({}) v=({})", fx.join(","), fv.join(","))
}

/// Set equality of two product unions: every member's generators of each
/// side belong to the other side, and probe points classify identically.
pub fn union_eq_probed<R: Rng>(
    a: &ConeUnion,
    b: &ConeUnion,
    dim2: usize,
    rng: &mut R,
    random_probes: usize,
) -> Result<bool> {
    for m in &a.members {
        let member_gens = m.to_generated()?.closure_generators();
        for p in probe_points(&member_gens, dim2, rng, 4) {
            if !b.contains_doubled(&p)? {
                return Ok(false);
            }
        }
    }
    for m in &b.members {
        let member_gens = m.to_generated()?.closure_generators();
        for p in probe_points(&member_gens, dim2, rng, 4) {
            if !a.contains_doubled(&p)? {
                return Ok(false);
            }
        }
    }
    for _ in 0..random_probes {
        let p = QVector::new(
            (0..dim2)
                .map(|_| {
                    Rational::new(
                        rng.random_range(-6i64..7).into(),
                        rng.random_range(1i64..4).into(),
                    )
                })
                .collect(),
        );
        if a.contains_doubled(&p)? != b.contains_doubled(&p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs every formula-vs-oracle comparison on one instance and reports one
/// line per check and sampled point.
pub fn run_verification(f: &CpwlFunction, options: VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checks: Vec<CheckReport> = Vec::new();
    let oracle_ready = f.dim() <= 2;
    let strata = if oracle_ready { graph_strata(f)? } else { Vec::new() };
    let points = sample_graph_points(f)?;

    for (x, v) in &points {
        let tag = fmt_point(x, v);
        let g = GraphPoint::new(f, x.clone(), v.clone())?;

        if oracle_ready {
            let product = graphgeo::prenormal_cone_graph(f, &g)?;
            let oracle_h = prenormal_oracle_with(&strata, f.dim(), x, v)?;
            let ok = generated_eq(&product.to_generated()?, &double_description(&oracle_h)?)?;
            checks.push(CheckReport {
                name: format!("prenormal-oracle {tag}"),
                passed: ok,
                details: "product formula vs stratum intersection".into(),
            });

            let formula_union = secondorder::limiting_normal_cone(f, &g)?;
            let oracle_union = limiting_oracle_with(&strata, f.dim(), x, v)?;
            let ok = union_eq_probed(
                &formula_union,
                &oracle_union,
                2 * f.dim(),
                &mut rng,
                options.random_probes,
            )?;
            checks.push(CheckReport {
                name: format!("limiting-oracle {tag}"),
                passed: ok,
                details: format!(
                    "{} formula members vs {} oracle members",
                    formula_union.members.len(),
                    oracle_union.members.len()
                ),
            });
        }

        if f.dim() <= 4 {
            let hrep = subgradient_polyhedron_hrep(f, x)?;
            let oracle_normal = normal_cone_from_hrep(&hrep, v)?;
            let formula_normal = graphgeo::normal_cone_at_subgradient(f, &g)?;
            let normals_match =
                generated_eq(&oracle_normal, &double_description(&formula_normal)?)?;
            let oracle_tangent = crate::cones::polar_of_generated(&oracle_normal);
            let formula_tangent = graphgeo::tangent_cone_at_subgradient(f, &g)?;
            let tangents_match =
                generated_eq(&formula_tangent, &double_description(&oracle_tangent)?)?;
            checks.push(CheckReport {
                name: format!("subgradient-set-cones {tag}"),
                passed: normals_match && tangents_match,
                details: "active-row normal cone and its polar".into(),
            });
        }

        let domain = secondorder::second_order_domain(f, &g)?;
        let basis = secondorder::second_order_domain_basis(f, &g)?;
        let mut domain_ok = true;
        for b in &basis {
            if secondorder::second_order_value(f, &g, b)?.is_empty_union()
                || secondorder::second_order_value(f, &g, &b.neg())?.is_empty_union()
            {
                domain_ok = false;
            }
        }
        for quad in secondorder::enumerate_a(f, &g)? {
            let cone_g = graphgeo::build_g(f, &quad.p1, &quad.q1, &quad.p2, &quad.q2)?;
            let v_form = double_description(&cone_g)?;
            for gen in v_form.closure_generators() {
                if !member_halfspace(&gen.neg(), &domain)? {
                    domain_ok = false;
                }
            }
        }
        checks.push(CheckReport {
            name: format!("second-order-domain {tag}"),
            passed: domain_ok,
            details: "basis directions attain values; quadruple cones stay in the subspace".into(),
        });

        let mut estimate_ok = true;
        for b in &basis {
            for u in [b.clone(), b.neg()] {
                let union = secondorder::second_order_value(f, &g, &u)?;
                let bound = secondorder::value_upper_estimate(f, &g, &u)?;
                if !union.subset_of_generated(&bound)? {
                    estimate_ok = false;
                }
            }
        }
        checks.push(CheckReport {
            name: format!("upper-estimate {tag}"),
            passed: estimate_ok,
            details: "every union member inside the estimate".into(),
        });

        if secondorder::aiqc(f, x)? {
            let mut exact_ok = true;
            for b in &basis {
                for u in [b.clone(), b.neg()] {
                    let exact = secondorder::value_exact(f, &g, &u)?;
                    let union = secondorder::second_order_value(f, &g, &u)?;
                    if !union.subset_of_generated(&exact)? {
                        exact_ok = false;
                    }
                    let w = secondorder::witness_quadruple(f, &g, &u)?;
                    let family = secondorder::enumerate_a(f, &g)?;
                    let rebuilt = graphgeo::build_f(f, &w.p1, &w.q1, &w.p2, &w.q2)?;
                    if !family.contains(&w) || !generated_eq(&rebuilt, &exact)? {
                        exact_ok = false;
                    }
                    if !secondorder::sum_rule_check(f, &g, &u)? {
                        exact_ok = false;
                    }
                }
            }
            checks.push(CheckReport {
                name: format!("exact-value-sum-rule {tag}"),
                passed: exact_ok,
                details: "qualification holds: exact formula and sum rule".into(),
            });
        }

        checks.push(CheckReport {
            name: format!("difference-identity {tag}"),
            passed: secondorder::difference_identity_check(f, &g)?,
            details: "feature cone equals G - G".into(),
        });

        let mut local_ok = true;
        let radius = f.safe_radius(x)?;
        if oracle_ready {
            for s in strata.iter().filter(|s| s.contains(x, v)) {
                let sd_outer = f.subdifferential(x)?;
                let hull: Vec<QVector> = s.q1.iter().map(|&i| f.piece(i).0.clone()).collect();
                for target_v in hull.iter().chain(std::iter::once(v)) {
                    let dx = s.witness_x.sub(x);
                    let dv = target_v.sub(v);
                    let gap = Rational::one() + dx.norm1() + dv.norm1();
                    let t = &radius / (Rational::from_integer(2.into()) * gap);
                    let x_near = x.add(&dx.scale(&t));
                    let v_near = v.add(&dv.scale(&t));
                    if !graph_member_with(&strata, &x_near, &v_near) {
                        continue;
                    }
                    let sd_inner = f.subdifferential(&x_near)?;
                    if !sd_inner.subset_of(&sd_outer)? {
                        local_ok = false;
                    }
                    for &i in &g.witness.j1 {
                        if !f.in_cell(i, &x_near)? {
                            local_ok = false;
                        }
                    }
                }
            }
            checks.push(CheckReport {
                name: format!("local-structure {tag}"),
                passed: local_ok,
                details: "nearby graph points keep the subdifferential and cells".into(),
            });
        }
    }

    if oracle_ready {
        let mut agree = true;
        for (x, v) in &points {
            if !graph_member_with(&strata, x, v) || !f.is_subgradient(x, v)? {
                agree = false;
            }
            let off = v.add(&QVector::new(vec![Rational::one(); f.dim()]).scale(&Rational::from_integer(100.into())));
            if graph_member_with(&strata, x, &off) != f.is_subgradient(x, &off)? {
                agree = false;
            }
        }
        checks.push(CheckReport {
            name: "graph-membership-agreement".into(),
            passed: agree,
            details: "stratum membership matches direct subgradient tests".into(),
        });
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, all_passed })
}
