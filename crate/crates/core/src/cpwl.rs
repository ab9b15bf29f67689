//! Convex piecewise linear functions and their first-order calculus.
//!
//! A function is the max of affine pieces `<a_i, x> - alpha_i` over a
//! polyhedral domain `{x : <d_i, x> <= beta_i}`.  An empty constraint list
//! encodes a full domain.  The representation is taken as given: no
//! minimality or irredundancy is required or computed.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::cones::{GeneratedCone, HalfspaceCone};
use crate::exactla::{QVector, Rational};
use crate::lp::{self, LinearSystem};
use crate::{Error, Result};

/// Index set over pieces or constraints (0-based internally; 1-based only
/// at the JSON boundary).
pub type IndexSet = BTreeSet<usize>;

pub fn index_set(indices: &[usize]) -> IndexSet {
    indices.iter().copied().collect()
}

/// `max_i (<a_i, x> - alpha_i)` on `{x : <d_i, x> <= beta_i}`, `+inf` outside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpwlFunction {
    pieces: Vec<(QVector, Rational)>,
    constraints: Vec<(QVector, Rational)>,
    dim: usize,
}

/// Value of a CPWL function: finite or the `+inf` marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Finite(Rational),
    PlusInfinity,
}

impl Value {
    pub fn finite(self) -> Option<Rational> {
        match self {
            Value::Finite(r) => Some(r),
            Value::PlusInfinity => None,
        }
    }
}

/// Active piece indices `K(x)` and active constraint indices `I(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityPattern {
    pub k: IndexSet,
    pub i: IndexSet,
}

/// `co(hull_points) + cone(ray_gens)`, the shape of a subgradient set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPolyhedronV {
    pub hull_points: Vec<QVector>,
    pub ray_gens: Vec<QVector>,
    pub dim: usize,
}

impl ConvexPolyhedronV {
    /// Membership by LP feasibility over hull and ray multipliers.
    pub fn contains(&self, p: &QVector) -> Result<bool> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        Ok(combination_witness(&self.hull_points, &self.ray_gens, p, None)?.is_some())
    }

    pub fn recession_cone(&self) -> GeneratedCone {
        GeneratedCone::new(Vec::new(), self.ray_gens.clone(), self.dim)
    }

    /// Containment of V-polyhedra: hull points inside the outer set, rays
    /// inside the outer recession cone.
    pub fn subset_of(&self, outer: &ConvexPolyhedronV) -> Result<bool> {
        for h in &self.hull_points {
            if !outer.contains(h)? {
                return Ok(false);
            }
        }
        let rec = outer.recession_cone();
        for r in &self.ray_gens {
            if !crate::cones::member_generated(r, &rec)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Decomposition `v = v1 + v2` with `v1` a convex combination of active
/// piece gradients and `v2` in the domain normal cone, together with the
/// positive-multiplier index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgradientWitness {
    pub v1: QVector,
    pub v2: QVector,
    pub lambda: BTreeMap<usize, Rational>,
    pub mu: BTreeMap<usize, Rational>,
    pub j1: IndexSet,
    pub j2: IndexSet,
}

impl CpwlFunction {
    /// Validates the shape and checks the domain is nonempty.
    pub fn new(
        pieces: Vec<(QVector, Rational)>,
        constraints: Vec<(QVector, Rational)>,
        dim: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if pieces.is_empty() {
            return Err(Error::NoPieces);
        }
        for (a, _) in &pieces {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                });
            }
        }
        for (d, _) in &constraints {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: d.dim(),
                });
            }
        }
        let f = CpwlFunction {
            pieces,
            constraints,
            dim,
        };
        if !lp::feasible(&f.domain_system())?.is_feasible() {
            return Err(Error::EmptyDomain);
        }
        Ok(f)
    }

    /// The support function of the given points: pieces `(p, 0)`, full domain.
    pub fn from_support_function(vertices: Vec<QVector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::NoPieces);
        }
        let dim = vertices[0].dim();
        Self::new(
            vertices.into_iter().map(|p| (p, Rational::zero())).collect(),
            Vec::new(),
            dim,
        )
    }

    /// `max{x_1, ..., x_n}`.
    pub fn component_max(n: usize) -> Self {
        Self::from_support_function((0..n).map(|i| QVector::unit(n, i)).collect()).unwrap()
    }

    /// `max_i |x_i|`, as the 2n-piece max over `{e_i, -e_i}`.
    pub fn inf_norm(n: usize) -> Self {
        let mut v: Vec<QVector> = (0..n).map(|i| QVector::unit(n, i)).collect();
        v.extend((0..n).map(|i| QVector::unit(n, i).neg()));
        Self::from_support_function(v).unwrap()
    }

    /// Indicator of the unit box `{|x_i| <= 1}`: one zero piece plus the
    /// face constraints.
    pub fn box_indicator(n: usize) -> Self {
        let mut constraints = Vec::new();
        for i in 0..n {
            constraints.push((QVector::unit(n, i), Rational::one()));
            constraints.push((QVector::unit(n, i).neg(), Rational::one()));
        }
        Self::new(vec![(QVector::zero(n), Rational::zero())], constraints, n).unwrap()
    }

    /// `sum_i |x_i|`, as the max over all sign-vector pieces.
    pub fn one_norm(n: usize) -> Self {
        let mut vertices = Vec::new();
        for mask in 0..(1usize << n) {
            let entries = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        -Rational::one()
                    } else {
                        Rational::one()
                    }
                })
                .collect();
            vertices.push(QVector::new(entries));
        }
        Self::from_support_function(vertices).unwrap()
    }

    /// Keeps the pieces only: the plain max function with full domain.
    pub fn max_part(&self) -> Self {
        CpwlFunction {
            pieces: self.pieces.clone(),
            constraints: Vec::new(),
            dim: self.dim,
        }
    }

    /// Keeps the constraints only: the indicator of the domain, encoded with
    /// a single zero piece.
    pub fn indicator_part(&self) -> Self {
        CpwlFunction {
            pieces: vec![(QVector::zero(self.dim), Rational::zero())],
            constraints: self.constraints.clone(),
            dim: self.dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(QVector, Rational)] {
        &self.pieces
    }

    pub fn constraints(&self) -> &[(QVector, Rational)] {
        &self.constraints
    }

    pub fn piece(&self, i: usize) -> &(QVector, Rational) {
        &self.pieces[i]
    }

    pub fn constraint(&self, i: usize) -> &(QVector, Rational) {
        &self.constraints[i]
    }

    pub fn domain_system(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.dim);
        for (d, b) in &self.constraints {
            sys.push_le(d.clone(), b.clone());
        }
        sys
    }

    fn check_dim(&self, x: &QVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub fn in_domain(&self, x: &QVector) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.constraints.iter().all(|(d, b)| &d.dot(x) <= b))
    }

    fn piece_value(&self, i: usize, x: &QVector) -> Rational {
        let (a, alpha) = &self.pieces[i];
        a.dot(x) - alpha
    }

    /// Max over pieces inside the domain, `+inf` outside.
    pub fn evaluate(&self, x: &QVector) -> Result<Value> {
        if !self.in_domain(x)? {
            return Ok(Value::PlusInfinity);
        }
        let mut best = self.piece_value(0, x);
        for i in 1..self.pieces.len() {
            let v = self.piece_value(i, x);
            if v > best {
                best = v;
            }
        }
        Ok(Value::Finite(best))
    }

    /// `K(x)` (argmax pieces) and `I(x)` (active constraints).
    pub fn activity(&self, x: &QVector) -> Result<ActivityPattern> {
        let Value::Finite(max) = self.evaluate(x)? else {
            return Err(Error::OutsideDomain);
        };
        let k = (0..self.pieces.len())
            .filter(|&i| self.piece_value(i, x) == max)
            .collect();
        let i = (0..self.constraints.len())
            .filter(|&t| {
                let (d, b) = &self.constraints[t];
                &d.dot(x) == b
            })
            .collect();
        Ok(ActivityPattern { k, i })
    }

    /// Whether `x` lies in the cell where piece `i` attains the max.
    pub fn in_cell(&self, i: usize, x: &QVector) -> Result<bool> {
        if i >= self.pieces.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                what: "piece",
            });
        }
        match self.evaluate(x)? {
            Value::PlusInfinity => Ok(false),
            Value::Finite(max) => Ok(self.piece_value(i, x) == max),
        }
    }

    /// `co{a_i : i in K(x)} + cone{d_i : i in I(x)}`.
    pub fn subdifferential(&self, x: &QVector) -> Result<ConvexPolyhedronV> {
        let pattern = self.activity(x)?;
        Ok(ConvexPolyhedronV {
            hull_points: pattern.k.iter().map(|&i| self.pieces[i].0.clone()).collect(),
            ray_gens: pattern.i.iter().map(|&t| self.constraints[t].0.clone()).collect(),
            dim: self.dim,
        })
    }

    /// `{w : <d_i, w> <= 0, i in I(x)}`.
    pub fn tangent_cone_domain(&self, x: &QVector) -> Result<HalfspaceCone> {
        let pattern = self.activity(x)?;
        Ok(HalfspaceCone::new(
            Vec::new(),
            pattern.i.iter().map(|&t| self.constraints[t].0.clone()).collect(),
            self.dim,
        ))
    }

    /// `cone{d_i : i in I(x)}`.
    pub fn normal_cone_domain(&self, x: &QVector) -> Result<GeneratedCone> {
        let pattern = self.activity(x)?;
        Ok(GeneratedCone::new(
            Vec::new(),
            pattern.i.iter().map(|&t| self.constraints[t].0.clone()).collect(),
            self.dim,
        ))
    }

    pub fn is_subgradient(&self, x: &QVector, v: &QVector) -> Result<bool> {
        self.check_dim(v)?;
        self.subdifferential(x)?.contains(v)
    }

    /// Any exact decomposition `v = v1 + v2` with multipliers; LP vertex
    /// witnesses are acceptable, downstream results do not depend on the
    /// choice (tested, not assumed).
    pub fn decompose_subgradient(&self, x: &QVector, v: &QVector) -> Result<SubgradientWitness> {
        self.decompose_subgradient_with_objective(x, v, None)
    }

    /// Same, steering the LP with an objective over the `(lambda, mu)`
    /// multiplier variables to obtain different vertex witnesses.
    pub fn decompose_subgradient_with_objective(
        &self,
        x: &QVector,
        v: &QVector,
        objective: Option<&QVector>,
    ) -> Result<SubgradientWitness> {
        self.check_dim(v)?;
        let pattern = self.activity(x)?;
        let hull: Vec<QVector> = pattern.k.iter().map(|&i| self.pieces[i].0.clone()).collect();
        let rays: Vec<QVector> = pattern
            .i
            .iter()
            .map(|&t| self.constraints[t].0.clone())
            .collect();
        let Some(w) = combination_witness(&hull, &rays, v, objective)? else {
            return Err(Error::NotASubgradient);
        };

        let mut lambda = BTreeMap::new();
        let mut v1 = QVector::zero(self.dim);
        for (slot, &i) in pattern.k.iter().enumerate() {
            let li = w[slot].clone();
            v1 = v1.add(&self.pieces[i].0.scale(&li));
            lambda.insert(i, li);
        }
        let mut mu = BTreeMap::new();
        let mut v2 = QVector::zero(self.dim);
        for (slot, &t) in pattern.i.iter().enumerate() {
            let mt = w[hull.len() + slot].clone();
            v2 = v2.add(&self.constraints[t].0.scale(&mt));
            mu.insert(t, mt);
        }
        let j1 = lambda
            .iter()
            .filter(|(_, l)| l.is_positive())
            .map(|(&i, _)| i)
            .collect();
        let j2 = mu
            .iter()
            .filter(|(_, m)| m.is_positive())
            .map(|(&t, _)| t)
            .collect();
        debug_assert_eq!(v1.add(&v2), *v);
        Ok(SubgradientWitness {
            v1,
            v2,
            lambda,
            mu,
            j1,
            j2,
        })
    }

    /// Radius such that every `x` with `|x - center| < radius` keeps
    /// `K(x) subset K(center)` and `I(x) subset I(center)`: the minimum
    /// positive slack over inactive pieces and constraints, divided by one
    /// plus the largest 1-norm among the involved functionals.
    pub fn safe_radius(&self, center: &QVector) -> Result<Rational> {
        let Value::Finite(max) = self.evaluate(center)? else {
            return Err(Error::OutsideDomain);
        };
        let mut min_slack: Option<Rational> = None;
        let mut consider = |slack: Rational| {
            if slack.is_positive() && min_slack.as_ref().is_none_or(|m| &slack < m) {
                min_slack = Some(slack);
            }
        };
        for i in 0..self.pieces.len() {
            consider(&max - self.piece_value(i, center));
        }
        for (d, b) in &self.constraints {
            consider(b - d.dot(center));
        }
        let Some(slack) = min_slack else {
            return Ok(Rational::one());
        };
        let mut norm = Rational::zero();
        for (a, _) in &self.pieces {
            for (a2, _) in &self.pieces {
                let n = a.sub(a2).norm1();
                if n > norm {
                    norm = n;
                }
            }
        }
        for (d, _) in &self.constraints {
            let n = d.norm1();
            if n > norm {
                norm = n;
            }
        }
        Ok(slack / (Rational::one() + norm))
    }
}

/// Witness of `p in co(hull) + cone(rays)` as the stacked multiplier vector
/// `(lambda..., mu...)`, optionally optimizing a caller-supplied objective.
fn combination_witness(
    hull: &[QVector],
    rays: &[QVector],
    p: &QVector,
    objective: Option<&QVector>,
) -> Result<Option<QVector>> {
    let nh = hull.len();
    let nr = rays.len();
    let dim = p.dim();
    let mut sys = LinearSystem::new(nh + nr);
    for k in 0..dim {
        let mut row = Vec::with_capacity(nh + nr);
        for h in hull {
            row.push(h[k].clone());
        }
        for r in rays {
            row.push(r[k].clone());
        }
        sys.push_eq(QVector::new(row), p[k].clone());
    }
    let mut ones = vec![Rational::zero(); nh + nr];
    for e in ones.iter_mut().take(nh) {
        *e = Rational::one();
    }
    sys.push_eq(QVector::new(ones), Rational::one());
    for j in 0..nh + nr {
        let mut row = vec![Rational::zero(); nh + nr];
        row[j] = -Rational::one();
        sys.push_le(QVector::new(row), Rational::zero());
    }
    let outcome = match objective {
        None => lp::feasible(&sys)?,
        Some(obj) => lp::maximize(obj, &sys)?,
    };
    Ok(outcome.witness)
}
