//! Closed-form second-order formulas for four standard families: the
//! component maximum, the sup-norm at the origin, the indicator of the unit
//! box, and the 1-norm (through conjugacy with the box indicator).
//!
//! These serve both as user-facing fast paths and as independent oracles for
//! the general pipeline; the cross-validation suite instantiates each family
//! as a max-affine function and compares exactly.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::cones::{GeneratedCone, HalfspaceCone};
use crate::cpwl::IndexSet;
use crate::exactla::{QVector, Rational};
use crate::{Error, Result};

/// Entrywise sign of a vector, over `{-1, 0, +1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector {
    pub entries: Vec<i8>,
}

impl SignVector {
    pub fn of(v: &QVector) -> Self {
        SignVector {
            entries: v
                .iter()
                .map(|e| {
                    if e.is_positive() {
                        1
                    } else if e.is_negative() {
                        -1
                    } else {
                        0
                    }
                })
                .collect(),
        }
    }
}

/// Index data for the sup-norm formulas at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfNormIndexData {
    pub j_inf: IndexSet,
    pub j_inf_c: IndexSet,
    pub gamma: Rational,
    pub l1: IndexSet,
    pub l2: IndexSet,
    pub nu: BTreeMap<usize, i8>,
    pub mu: BTreeMap<usize, i8>,
}

/// Index data for the box-indicator formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxIndexData {
    pub i_inf: IndexSet,
    pub h_v: IndexSet,
    pub e1: IndexSet,
    pub e2: IndexSet,
}

/// Index data for the 1-norm formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneNormIndexData {
    pub h_v: IndexSet,
    pub i_inf: IndexSet,
    pub c1: IndexSet,
    pub c2: IndexSet,
}

fn check_same_dim(a: &QVector, b: &QVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Second-order value of `max{x_1,...,x_n}` at `(x, v)` along `u`:
/// `{w : sum w_i = 0, w_i >= 0 on the strictly-above set, w_i = 0 off the
/// active set and on the strictly-below set}`.
pub fn component_max_value(x: &QVector, v: &QVector, u: &QVector) -> Result<HalfspaceCone> {
    check_same_dim(x, v)?;
    check_same_dim(x, u)?;
    let n = x.dim();
    let max = (0..n).map(|i| x[i].clone()).max().expect("nonempty");
    let active: IndexSet = (0..n).filter(|&i| x[i] == max).collect();
    let mut total = Rational::zero();
    for i in 0..n {
        if v[i].is_negative() || (!active.contains(&i) && !v[i].is_zero()) {
            return Err(Error::NotASubgradient);
        }
        total += &v[i];
    }
    if !total.is_one() {
        return Err(Error::NotASubgradient);
    }
    let j1: IndexSet = (0..n).filter(|&i| v[i].is_positive()).collect();
    let mut gammas = j1.iter().map(|&i| u[i].clone());
    let gamma = gammas.next().expect("positive weights sum to one");
    if gammas.any(|g| g != gamma) {
        return Err(Error::OutsideSecondOrderDomain);
    }

    let mut eq = vec![QVector::new(vec![Rational::one(); n])];
    let mut ineq = Vec::new();
    for i in 0..n {
        if !active.contains(&i) || u[i] < gamma {
            eq.push(QVector::unit(n, i));
        } else if u[i] > gamma {
            ineq.push(QVector::unit(n, i).neg());
        }
    }
    Ok(HalfspaceCone::new(eq, ineq, n))
}

fn boundary_sup_norm_subgradient(v: &QVector) -> Result<IndexSet> {
    let mut norm1 = Rational::zero();
    for i in 0..v.dim() {
        norm1 += v[i].abs();
    }
    if !norm1.is_one() {
        return Err(Error::Precondition(
            "sup-norm closed form needs a boundary subgradient (unit 1-norm)".into(),
        ));
    }
    Ok((0..v.dim()).filter(|&i| !v[i].is_zero()).collect())
}

/// Second-order domain of the sup-norm at the origin for a boundary
/// subgradient: directions whose signed coordinates equalize over the
/// support of `v`.
pub fn inf_norm_domain(v: &QVector) -> Result<HalfspaceCone> {
    let n = v.dim();
    let j_inf = boundary_sup_norm_subgradient(v)?;
    let signed: Vec<QVector> = j_inf
        .iter()
        .map(|&i| {
            let e = QVector::unit(n, i);
            if v[i].is_negative() {
                e.neg()
            } else {
                e
            }
        })
        .collect();
    let eq = signed
        .windows(2)
        .map(|pair| pair[0].sub(&pair[1]))
        .collect();
    Ok(HalfspaceCone::new(eq, Vec::new(), n))
}

/// The index data of the sup-norm value formula at direction `u`.
pub fn inf_norm_index_data(v: &QVector, u: &QVector) -> Result<InfNormIndexData> {
    check_same_dim(v, u)?;
    let n = v.dim();
    let j_inf = boundary_sup_norm_subgradient(v)?;
    let j_inf_c: IndexSet = (0..n).filter(|i| !j_inf.contains(i)).collect();
    let mut levels = j_inf.iter().map(|&i| {
        if v[i].is_negative() {
            -&u[i]
        } else {
            u[i].clone()
        }
    });
    let gamma = levels.next().expect("boundary subgradients have support");
    if levels.any(|g| g != gamma) {
        return Err(Error::OutsideSecondOrderDomain);
    }
    let mut l1 = IndexSet::new();
    let mut l2 = IndexSet::new();
    let mut nu = BTreeMap::new();
    let mut mu = BTreeMap::new();
    for &i in &j_inf_c {
        let up = &u[i];
        let down = -&u[i];
        if *up == gamma || down == gamma {
            l1.insert(i);
            nu.insert(i, if *up == gamma { 1 } else { -1 });
        }
        if *up > gamma || down > gamma {
            l2.insert(i);
            mu.insert(i, if *up > gamma { 1 } else { -1 });
        }
    }
    for &i in &j_inf {
        nu.insert(i, if v[i].is_negative() { -1 } else { 1 });
    }
    Ok(InfNormIndexData {
        j_inf,
        j_inf_c,
        gamma,
        l1,
        l2,
        nu,
        mu,
    })
}

/// Upper bound for the sup-norm second-order value at the origin, plus the
/// flag marking directions where the bound is certified exact (`u = 0` or a
/// strictly positive equalization level everywhere).
///
/// The bound is assembled from the signed basis vectors sitting exactly at
/// the equalization level and strictly above it.  When the level is zero a
/// coordinate can sit at the level with both signs and both copies enter the
/// span; collapsing them to one sign would lose generators.
pub fn inf_norm_value_bound(v: &QVector, u: &QVector) -> Result<(GeneratedCone, bool)> {
    let data = inf_norm_index_data(v, u)?;
    let n = v.dim();
    let mut at_level: Vec<QVector> = Vec::new();
    let mut above_level: Vec<QVector> = Vec::new();
    for i in 0..n {
        for sign in [1i64, -1] {
            let level = if sign == 1 { u[i].clone() } else { -&u[i] };
            let basis = if sign == 1 {
                QVector::unit(n, i)
            } else {
                QVector::unit(n, i).neg()
            };
            if level == data.gamma {
                at_level.push(basis);
            } else if level > data.gamma {
                above_level.push(basis);
            }
        }
    }
    let mut span = Vec::new();
    for (s, z) in at_level.iter().enumerate() {
        for z2 in &at_level[s + 1..] {
            span.push(z.sub(z2));
        }
    }
    let mut rays = Vec::new();
    for p in &above_level {
        for z in &at_level {
            rays.push(p.sub(z));
        }
    }
    let exact = u.is_zero()
        || (0..n).all(|i| {
            let down = -u[i].abs();
            down < data.gamma
        });
    Ok((GeneratedCone::new(span, rays, n), exact))
}

fn check_box_graph_point(v: &QVector, x: &QVector) -> Result<BoxIndexData> {
    check_same_dim(v, x)?;
    let n = v.dim();
    let one = Rational::one();
    let mut h_v = IndexSet::new();
    for i in 0..n {
        let a = v[i].abs();
        if a > one {
            return Err(Error::Precondition(
                "box indicator base point must lie in the unit box".into(),
            ));
        }
        if a == one {
            h_v.insert(i);
        }
    }
    if h_v.is_empty() {
        return Err(Error::Precondition(
            "box indicator closed form needs a boundary base point".into(),
        ));
    }
    let mut i_inf = IndexSet::new();
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        if !h_v.contains(&i) || (&x[i] * &v[i]).is_negative() {
            return Err(Error::NotASubgradient);
        }
        i_inf.insert(i);
    }
    Ok(BoxIndexData {
        i_inf,
        h_v,
        e1: IndexSet::new(),
        e2: IndexSet::new(),
    })
}

/// Second-order domain and value of the unit-box indicator at a boundary
/// point `v` with normal `x`, along `u`: the domain pins the coordinates
/// carrying the normal, the value is spanned by the zero-direction faces
/// plus the rays of the strictly engaged ones.
pub fn box_indicator_domain_and_value(
    v: &QVector,
    x: &QVector,
    u: &QVector,
) -> Result<(HalfspaceCone, GeneratedCone, BoxIndexData)> {
    check_same_dim(v, u)?;
    let mut data = check_box_graph_point(v, x)?;
    let n = v.dim();
    let domain = HalfspaceCone::new(
        data.i_inf.iter().map(|&i| QVector::unit(n, i)).collect(),
        Vec::new(),
        n,
    );
    for &i in &data.i_inf {
        if !u[i].is_zero() {
            return Err(Error::OutsideSecondOrderDomain);
        }
    }
    for &i in &data.h_v {
        if u[i].is_zero() {
            data.e1.insert(i);
        } else if (&v[i] * &u[i]).is_positive() {
            data.e2.insert(i);
        }
    }
    let span = data.e1.iter().map(|&i| QVector::unit(n, i)).collect();
    let rays = data
        .e2
        .iter()
        .map(|&i| QVector::unit(n, i).scale(&v[i]))
        .collect();
    Ok((domain, GeneratedCone::new(span, rays, n), data))
}

/// Second-order domain and value of the 1-norm at `(x, v)` along `w`,
/// obtained by the conjugacy flip against the box indicator.
pub fn one_norm_domain_and_value(
    x: &QVector,
    v: &QVector,
    w: &QVector,
) -> Result<(HalfspaceCone, HalfspaceCone, OneNormIndexData)> {
    check_same_dim(x, v)?;
    check_same_dim(x, w)?;
    let n = x.dim();
    let one = Rational::one();
    let mut h_v = IndexSet::new();
    let mut i_inf = IndexSet::new();
    for i in 0..n {
        if v[i].abs() > one {
            return Err(Error::NotASubgradient);
        }
        if v[i].abs() == one {
            h_v.insert(i);
        }
        if !x[i].is_zero() {
            i_inf.insert(i);
            let sign_match = (x[i].is_positive() && v[i].is_one())
                || (x[i].is_negative() && v[i] == -&one);
            if !sign_match {
                return Err(Error::NotASubgradient);
            }
        }
    }
    let domain = HalfspaceCone::new(
        (0..n)
            .filter(|i| !h_v.contains(i))
            .map(|i| QVector::unit(n, i))
            .collect(),
        Vec::new(),
        n,
    );
    for i in 0..n {
        if !h_v.contains(&i) && !w[i].is_zero() {
            return Err(Error::OutsideSecondOrderDomain);
        }
    }
    let mut c1 = IndexSet::new();
    let mut c2 = IndexSet::new();
    for &i in &h_v {
        if w[i].is_zero() {
            continue;
        }
        c1.insert(i);
        if (&v[i] * &w[i]).is_positive() {
            c2.insert(i);
        }
    }
    let mut eq = Vec::new();
    for &i in c2.union(&i_inf) {
        eq.push(QVector::unit(n, i));
    }
    let mut ineq = Vec::new();
    for &i in c1.difference(&c2) {
        ineq.push(QVector::unit(n, i).scale(&v[i]));
    }
    let value = HalfspaceCone::new(eq, ineq, n);
    Ok((
        domain,
        value,
        OneNormIndexData {
            h_v,
            i_inf,
            c1,
            c2,
        },
    ))
}

/// The conjugacy-flip membership query: `u` belongs to the 1-norm value at
/// `(x, v)` along `w` iff `-w` belongs to the box-indicator value at
/// `(v, x)` along `-u`.  When `v` is interior to the unit box the flipped
/// value is `{0}` for every direction, so only `w = 0` passes.
pub fn one_norm_member_via_box(
    x: &QVector,
    v: &QVector,
    w: &QVector,
    u: &QVector,
) -> Result<bool> {
    check_same_dim(v, x)?;
    let one = Rational::one();
    if (0..v.dim()).all(|i| v[i].abs() < one) {
        if !x.is_zero() {
            return Err(Error::NotASubgradient);
        }
        return Ok(w.is_zero());
    }
    match box_indicator_domain_and_value(v, x, &u.neg()) {
        Ok((_, value, _)) => crate::cones::member_generated(&w.neg(), &value),
        Err(Error::OutsideSecondOrderDomain) => Ok(false),
        Err(e) => Err(e),
    }
}
