//! Polyhedral cone algebra.
//!
//! Two representations are used throughout: generated cones
//! `span{s_1,...} + cone{r_1,...}` and halfspace cones
//! `{u : <e,u> = 0, <g,u> <= 0}`.  Conversion between them is a desk-scale
//! double description run that handles non-pointed cones by shrinking the
//! span part in place.  All comparisons are semantic (membership based), so
//! no representation is required to be minimal.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::exactla::{QMatrix, QVector, Rational};
use crate::lp::{self, LinearSystem};
use crate::{Error, Result};

/// Dimension cap for double description conversions.
pub const DD_DIM_BOUND: usize = 8;

/// `span(span_gens) + cone(ray_gens)`; empty generator lists give `{0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedCone {
    pub span_gens: Vec<QVector>,
    pub ray_gens: Vec<QVector>,
    pub dim: usize,
}

/// `{u : <e,u> = 0 for e in eq_normals, <g,u> <= 0 for g in ineq_normals}`;
/// empty normal lists give the whole space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspaceCone {
    pub eq_normals: Vec<QVector>,
    pub ineq_normals: Vec<QVector>,
    pub dim: usize,
}

impl GeneratedCone {
    pub fn origin(dim: usize) -> Self {
        GeneratedCone {
            span_gens: Vec::new(),
            ray_gens: Vec::new(),
            dim,
        }
    }

    pub fn new(span_gens: Vec<QVector>, ray_gens: Vec<QVector>, dim: usize) -> Self {
        for g in span_gens.iter().chain(ray_gens.iter()) {
            assert_eq!(g.dim(), dim, "generator dimension mismatch");
        }
        GeneratedCone {
            span_gens,
            ray_gens,
            dim,
        }
    }

    /// All generators with the span part in both orientations; conic
    /// combinations of these exhaust the cone.
    pub fn closure_generators(&self) -> Vec<QVector> {
        let mut gens = Vec::new();
        for s in &self.span_gens {
            gens.push(s.clone());
            gens.push(s.neg());
        }
        gens.extend(self.ray_gens.iter().cloned());
        gens
    }
}

impl HalfspaceCone {
    pub fn whole_space(dim: usize) -> Self {
        HalfspaceCone {
            eq_normals: Vec::new(),
            ineq_normals: Vec::new(),
            dim,
        }
    }

    pub fn new(eq_normals: Vec<QVector>, ineq_normals: Vec<QVector>, dim: usize) -> Self {
        for g in eq_normals.iter().chain(ineq_normals.iter()) {
            assert_eq!(g.dim(), dim, "normal dimension mismatch");
        }
        HalfspaceCone {
            eq_normals,
            ineq_normals,
            dim,
        }
    }
}

/// Membership `w in span(S) + cone(R)`, decided by LP feasibility over the
/// combination multipliers (span multipliers free, ray multipliers >= 0).
pub fn member_generated(w: &QVector, c: &GeneratedCone) -> Result<bool> {
    if w.dim() != c.dim {
        return Err(Error::DimensionMismatch {
            expected: c.dim,
            got: w.dim(),
        });
    }
    let ns = c.span_gens.len();
    let nr = c.ray_gens.len();
    let mut sys = LinearSystem::new(ns + nr);
    for k in 0..c.dim {
        let mut row = Vec::with_capacity(ns + nr);
        for s in &c.span_gens {
            row.push(s[k].clone());
        }
        for r in &c.ray_gens {
            row.push(r[k].clone());
        }
        sys.push_eq(QVector::new(row), w[k].clone());
    }
    for j in 0..nr {
        let mut row = vec![Rational::zero(); ns + nr];
        row[ns + j] = -Rational::one();
        sys.push_le(QVector::new(row), Rational::zero());
    }
    Ok(lp::feasible(&sys)?.is_feasible())
}

/// Membership in a halfspace cone by direct substitution.
pub fn member_halfspace(u: &QVector, c: &HalfspaceCone) -> Result<bool> {
    if u.dim() != c.dim {
        return Err(Error::DimensionMismatch {
            expected: c.dim,
            got: u.dim(),
        });
    }
    Ok(c.eq_normals.iter().all(|e| e.dot(u).is_zero())
        && c.ineq_normals.iter().all(|g| !g.dot(u).is_positive()))
}

/// Polar of a generated cone: each span generator forces an equality, each
/// ray an inequality.
pub fn polar_of_generated(c: &GeneratedCone) -> HalfspaceCone {
    HalfspaceCone {
        eq_normals: c.span_gens.clone(),
        ineq_normals: c.ray_gens.clone(),
        dim: c.dim,
    }
}

fn canon_positive_scale(v: &QVector) -> QVector {
    match v.iter().find(|e| !e.is_zero()) {
        None => v.clone(),
        Some(first) => {
            let scale = first.abs().recip();
            v.scale(&scale)
        }
    }
}

fn dedup_rays(rays: Vec<QVector>) -> Vec<QVector> {
    let mut seen: Vec<QVector> = Vec::new();
    let mut out = Vec::new();
    for r in rays {
        if r.is_zero() {
            continue;
        }
        let canon = canon_positive_scale(&r);
        if !seen.contains(&canon) {
            seen.push(canon);
            out.push(r);
        }
    }
    out
}

/// Reduces the span list to a row-echelon basis of the same subspace.
fn span_basis(span: &[QVector], dim: usize) -> Vec<QVector> {
    if span.is_empty() {
        return Vec::new();
    }
    echelon_rows(span, dim)
}

#[allow(clippy::needless_range_loop)]
fn echelon_rows(rows: &[QVector], dim: usize) -> Vec<QVector> {
    let mut m: Vec<Vec<Rational>> = rows.iter().map(|r| r.entries().to_vec()).collect();
    let mut out = Vec::new();
    let mut row = 0;
    for col in 0..dim {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for e in m[row].iter_mut() {
            *e *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..dim {
                    let delta = &m[row][c] * &factor;
                    m[r][c] -= delta;
                }
            }
        }
        row += 1;
        if row == m.len() {
            break;
        }
    }
    for r in m.into_iter().take(row) {
        out.push(QVector::new(r));
    }
    out
}

/// Drops rays already representable by the span and the remaining rays.
fn prune_rays(span: &[QVector], rays: Vec<QVector>, dim: usize) -> Result<Vec<QVector>> {
    let mut kept = rays;
    let mut i = 0;
    while i < kept.len() {
        let candidate = kept[i].clone();
        let rest_rays: Vec<QVector> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        let rest = GeneratedCone::new(span.to_vec(), rest_rays, dim);
        if member_generated(&candidate, &rest)? {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(kept)
}

/// Double description: converts a halfspace cone to a generated cone with
/// the same point set.  Constraints are folded in one at a time, shrinking
/// the span part whenever a constraint cuts it, so non-pointed cones need no
/// special casing.
pub fn double_description(c: &HalfspaceCone) -> Result<GeneratedCone> {
    double_description_bounded(c, DD_DIM_BOUND)
}

pub fn double_description_bounded(c: &HalfspaceCone, bound: usize) -> Result<GeneratedCone> {
    if c.dim > bound {
        return Err(Error::DimensionBound {
            dim: c.dim,
            bound,
        });
    }
    let mut span: Vec<QVector> = (0..c.dim).map(|i| QVector::unit(c.dim, i)).collect();
    let mut rays: Vec<QVector> = Vec::new();

    for normal in &c.eq_normals {
        intersect_hyperplane(&mut span, &mut rays, normal);
        rays = dedup_rays(rays);
    }
    for normal in &c.ineq_normals {
        intersect_halfspace(&mut span, &mut rays, normal);
        rays = dedup_rays(rays);
        if rays.len() > 40 {
            rays = prune_rays(&span, rays, c.dim)?;
        }
    }

    let span = span_basis(&span, c.dim);
    let rays = prune_rays(&span, dedup_rays(rays), c.dim)?;
    let out = GeneratedCone::new(span, rays, c.dim);
    debug_assert!(out
        .closure_generators()
        .iter()
        .all(|g| member_halfspace(g, c).unwrap()));
    Ok(out)
}

fn intersect_hyperplane(span: &mut Vec<QVector>, rays: &mut Vec<QVector>, c: &QVector) {
    if let Some(idx) = span.iter().position(|s| !c.dot(s).is_zero()) {
        let s0 = span.remove(idx);
        let v0 = c.dot(&s0);
        let project = |g: &QVector| -> QVector {
            let t = c.dot(g) / &v0;
            g.sub(&s0.scale(&t))
        };
        for s in span.iter_mut() {
            *s = project(s);
        }
        for r in rays.iter_mut() {
            *r = project(r);
        }
        return;
    }
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rays.drain(..) {
        let v = c.dot(&r);
        if v.is_zero() {
            zero.push(r);
        } else if v.is_positive() {
            pos.push((r, v));
        } else {
            neg.push((r, v));
        }
    }
    for (p, vp) in &pos {
        for (m, vm) in &neg {
            // positive combination lying on the hyperplane
            zero.push(m.scale(vp).sub(&p.scale(vm)));
        }
    }
    *rays = zero;
}

fn intersect_halfspace(span: &mut Vec<QVector>, rays: &mut Vec<QVector>, c: &QVector) {
    if let Some(idx) = span.iter().position(|s| !c.dot(s).is_zero()) {
        let s0 = span.remove(idx);
        let v0 = c.dot(&s0);
        let t = if v0.is_positive() { s0 } else { s0.neg() };
        let vt = c.dot(&t);
        let project = |g: &QVector| -> QVector {
            let f = c.dot(g) / &vt;
            g.sub(&t.scale(&f))
        };
        for s in span.iter_mut() {
            *s = project(s);
        }
        for r in rays.iter_mut() {
            *r = project(r);
        }
        rays.push(t.neg());
        return;
    }
    let mut keep = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rays.drain(..) {
        let v = c.dot(&r);
        if v.is_positive() {
            pos.push((r, v));
        } else {
            if v.is_negative() {
                neg.push((r.clone(), v));
            }
            keep.push(r);
        }
    }
    for (p, vp) in &pos {
        for (m, vm) in &neg {
            keep.push(m.scale(vp).sub(&p.scale(vm)));
        }
    }
    *rays = keep;
}

/// `inner subset of outer`, valid because generated cones are convex and
/// closed: it suffices that every span generator, its negation, and every
/// ray generator of `inner` belongs to `outer`.
pub fn contains_generated(outer: &GeneratedCone, inner: &GeneratedCone) -> Result<bool> {
    if outer.dim != inner.dim {
        return Err(Error::DimensionMismatch {
            expected: outer.dim,
            got: inner.dim,
        });
    }
    for g in inner.closure_generators() {
        if !member_generated(&g, outer)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn generated_eq(a: &GeneratedCone, b: &GeneratedCone) -> Result<bool> {
    Ok(contains_generated(a, b)? && contains_generated(b, a)?)
}

/// Set equality of halfspace cones, via double description on both sides.
pub fn halfspace_eq(a: &HalfspaceCone, b: &HalfspaceCone) -> Result<bool> {
    let av = double_description(a)?;
    let bv = double_description(b)?;
    generated_eq(&av, &bv)
}

/// Minkowski sum of generated cones: concatenated generator lists.
pub fn minkowski_sum(a: &GeneratedCone, b: &GeneratedCone) -> Result<GeneratedCone> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let mut span = a.span_gens.clone();
    span.extend(b.span_gens.iter().cloned());
    let mut rays = a.ray_gens.clone();
    rays.extend(b.ray_gens.iter().cloned());
    Ok(GeneratedCone::new(span, rays, a.dim))
}

/// A canonical, deterministic form: echelon basis for the span, rays pruned
/// against the span, positively scaled, sorted and deduplicated.
pub fn canonical_generated(c: &GeneratedCone) -> Result<GeneratedCone> {
    let span = span_basis(&c.span_gens, c.dim);
    let mut rays = Vec::new();
    let span_m = QMatrix::new(span.clone(), c.dim);
    for r in &c.ray_gens {
        // drop rays inside the span
        if !span.is_empty() && span_m.transpose().solve(r)?.is_some() {
            continue;
        }
        rays.push(r.clone());
    }
    let mut rays = prune_rays(&span, dedup_rays(rays), c.dim)?;
    let mut rays_canon: Vec<QVector> = rays.drain(..).map(|r| canon_positive_scale(&r)).collect();
    rays_canon.sort();
    Ok(GeneratedCone::new(span, rays_canon, c.dim))
}

/// The Farkas polarity identity on one index configuration: the polar of
/// the halfspace cone, computed independently through double description,
/// equals the generated cone built from the same families.
pub fn farkas_polarity_check(
    f: &crate::cpwl::CpwlFunction,
    p1: &crate::cpwl::IndexSet,
    q1: &crate::cpwl::IndexSet,
    p2: &crate::cpwl::IndexSet,
    q2: &crate::cpwl::IndexSet,
) -> Result<bool> {
    let generated = crate::graphgeo::build_f(f, p1, q1, p2, q2)?;
    let halfspace = crate::graphgeo::build_g(f, p1, q1, p2, q2)?;
    let h_gens = double_description(&halfspace)?;
    let polar_v = double_description(&polar_of_generated(&h_gens))?;
    generated_eq(&polar_v, &generated)
}

/// Product cone `first x second` inside the doubled space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeProduct {
    pub first: GeneratedCone,
    pub second: HalfspaceCone,
}

impl ConeProduct {
    pub fn new(first: GeneratedCone, second: HalfspaceCone) -> Self {
        assert_eq!(first.dim, second.dim, "product factor dimension mismatch");
        ConeProduct { first, second }
    }

    pub fn dim(&self) -> usize {
        self.first.dim
    }

    pub fn contains_pair(&self, w: &QVector, u: &QVector) -> Result<bool> {
        Ok(member_generated(w, &self.first)? && member_halfspace(u, &self.second)?)
    }

    /// The product as one generated cone over the doubled space; the second
    /// factor is converted by double description.
    pub fn to_generated(&self) -> Result<GeneratedCone> {
        let n = self.dim();
        let second = double_description(&self.second)?;
        let zero = QVector::zero(n);
        let mut span = Vec::new();
        let mut rays = Vec::new();
        for s in &self.first.span_gens {
            span.push(s.concat(&zero));
        }
        for s in &second.span_gens {
            span.push(zero.concat(s));
        }
        for r in &self.first.ray_gens {
            rays.push(r.concat(&zero));
        }
        for r in &second.ray_gens {
            rays.push(zero.concat(r));
        }
        Ok(GeneratedCone::new(span, rays, 2 * n))
    }
}

/// Union of product cones (possibly empty).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConeUnion {
    pub members: Vec<ConeProduct>,
}

impl ConeUnion {
    pub fn contains_pair(&self, w: &QVector, u: &QVector) -> Result<bool> {
        for m in &self.members {
            if m.contains_pair(w, u)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Membership of a doubled-space vector, split into the two halves.
    pub fn contains_doubled(&self, z: &QVector) -> Result<bool> {
        let n = match self.members.first() {
            Some(m) => m.dim(),
            None => return Ok(false),
        };
        let w = QVector::new(z.entries()[..n].to_vec());
        let u = QVector::new(z.entries()[n..].to_vec());
        self.contains_pair(&w, &u)
    }
}

/// Union of generated cones (second-order values).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneratedUnion {
    pub members: Vec<GeneratedCone>,
}

impl GeneratedUnion {
    pub fn is_empty_union(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &QVector) -> Result<bool> {
        for m in &self.members {
            if member_generated(w, m)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Exact check that every member lies inside a convex cone.
    pub fn subset_of_generated(&self, outer: &GeneratedCone) -> Result<bool> {
        for m in &self.members {
            if !contains_generated(outer, m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Probe points for union comparisons: every generator, pairwise sums, the
/// total sum, and seeded random conic combinations.  Unions are not convex,
/// so generator membership alone cannot certify containment of a convex
/// cone in a union; probes supply the evidence.
pub fn probe_points<R: Rng>(gens: &[QVector], dim: usize, rng: &mut R, extra: usize) -> Vec<QVector> {
    let mut probes: Vec<QVector> = Vec::new();
    probes.push(QVector::zero(dim));
    probes.extend(gens.iter().cloned());
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            probes.push(gens[i].add(&gens[j]));
        }
    }
    if !gens.is_empty() {
        let mut total = QVector::zero(dim);
        for g in gens {
            total = total.add(g);
        }
        probes.push(total);
    }
    for _ in 0..extra {
        let mut p = QVector::zero(dim);
        for g in gens {
            let num = rng.random_range(0..4i64);
            let den = rng.random_range(1..4i64);
            p = p.add(&g.scale(&Rational::new(num.into(), den.into())));
        }
        probes.push(p);
    }
    probes
}

/// Containment of a convex generated cone in a union, checked on probes.
pub fn cone_probed_subset_of_union<R: Rng>(
    c: &GeneratedCone,
    union: &GeneratedUnion,
    rng: &mut R,
    extra: usize,
) -> Result<bool> {
    let gens = c.closure_generators();
    for p in probe_points(&gens, c.dim, rng, extra) {
        if !union.contains(&p)? {
            return Ok(false);
        }
    }
    Ok(true)
}
