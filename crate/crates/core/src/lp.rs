//! Exact rational linear programming.
//!
//! A dense two-phase simplex over arbitrary-precision rationals with Bland's
//! pivot rule.  Degenerate polyhedra are the common case for the systems
//! built by the cone and stratum machinery (many coincident active
//! constraints), so an anti-cycling rule is required, not optional.
//!
//! Strict inequalities never enter the simplex directly; `strictly_feasible`
//! reformulates them with a gap variable.

use num_traits::{One, Signed, Zero};

use crate::exactla::{QVector, Rational};
use crate::{Error, Result};

/// A system of linear equalities and (strict) inequalities over `Q^dim`.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub dim: usize,
    /// `<row, x> = rhs`
    pub eq_rows: Vec<(QVector, Rational)>,
    /// `<row, x> <= rhs`
    pub le_rows: Vec<(QVector, Rational)>,
    /// `<row, x> < rhs`
    pub lt_rows: Vec<(QVector, Rational)>,
}

impl LinearSystem {
    pub fn new(dim: usize) -> Self {
        LinearSystem {
            dim,
            eq_rows: Vec::new(),
            le_rows: Vec::new(),
            lt_rows: Vec::new(),
        }
    }

    pub fn push_eq(&mut self, row: QVector, rhs: Rational) {
        assert_eq!(row.dim(), self.dim);
        self.eq_rows.push((row, rhs));
    }

    pub fn push_le(&mut self, row: QVector, rhs: Rational) {
        assert_eq!(row.dim(), self.dim);
        self.le_rows.push((row, rhs));
    }

    pub fn push_lt(&mut self, row: QVector, rhs: Rational) {
        assert_eq!(row.dim(), self.dim);
        self.lt_rows.push((row, rhs));
    }

    /// Exact satisfaction check, strict rows strictly.
    pub fn is_satisfied_by(&self, x: &QVector) -> bool {
        self.eq_rows.iter().all(|(r, b)| &r.dot(x) == b)
            && self.le_rows.iter().all(|(r, b)| &r.dot(x) <= b)
            && self.lt_rows.iter().all(|(r, b)| &r.dot(x) < b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

/// Result of a feasibility or optimization run.  `witness` is present iff
/// the status is `Feasible` and then satisfies every constraint exactly.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub witness: Option<QVector>,
    pub optimum: Option<Rational>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        LpOutcome {
            status: LpStatus::Infeasible,
            witness: None,
            optimum: None,
        }
    }

    fn unbounded() -> Self {
        LpOutcome {
            status: LpStatus::Unbounded,
            witness: None,
            optimum: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == LpStatus::Feasible
    }
}

/// Decides feasibility of a strict-free system and returns an exact witness.
pub fn feasible(sys: &LinearSystem) -> Result<LpOutcome> {
    if !sys.lt_rows.is_empty() {
        return Err(Error::StrictRowsPresent);
    }
    let mut t = Tableau::from_system(sys, None);
    if !t.phase1() {
        return Ok(LpOutcome::infeasible());
    }
    Ok(LpOutcome {
        status: LpStatus::Feasible,
        witness: Some(t.extract(sys.dim)),
        optimum: None,
    })
}

/// Maximizes `<objective, x>` over a strict-free system.
pub fn maximize(objective: &QVector, sys: &LinearSystem) -> Result<LpOutcome> {
    if !sys.lt_rows.is_empty() {
        return Err(Error::StrictRowsPresent);
    }
    if objective.dim() != sys.dim {
        return Err(Error::DimensionMismatch {
            expected: sys.dim,
            got: objective.dim(),
        });
    }
    let mut t = Tableau::from_system(sys, Some(objective));
    if !t.phase1() {
        return Ok(LpOutcome::infeasible());
    }
    if !t.phase2() {
        return Ok(LpOutcome::unbounded());
    }
    let optimum = t.objective_value();
    Ok(LpOutcome {
        status: LpStatus::Feasible,
        witness: Some(t.extract(sys.dim)),
        optimum: Some(optimum),
    })
}

/// A point satisfying every equality exactly, every `<=` row, and every `<`
/// row strictly; `None` if no such point exists.
///
/// Reformulation: maximize a gap variable `t` subject to
/// `<row, x> + t <= rhs` for each strict row and `t <= 1`; the system is
/// strictly feasible iff the optimum is positive.
pub fn strictly_feasible(sys: &LinearSystem) -> Result<Option<QVector>> {
    let n = sys.dim;
    let mut lifted = LinearSystem::new(n + 1);
    let lift = |row: &QVector, t_coeff: i64| -> QVector {
        let mut v = row.clone();
        v.push(Rational::from_integer(t_coeff.into()));
        v
    };
    for (r, b) in &sys.eq_rows {
        lifted.push_eq(lift(r, 0), b.clone());
    }
    for (r, b) in &sys.le_rows {
        lifted.push_le(lift(r, 0), b.clone());
    }
    for (r, b) in &sys.lt_rows {
        lifted.push_le(lift(r, 1), b.clone());
    }
    lifted.push_le(lift(&QVector::zero(n), 1), Rational::one());

    let mut objective = QVector::zero(n);
    objective.push(Rational::one());
    let outcome = maximize(&objective, &lifted)?;
    match outcome.status {
        LpStatus::Feasible if outcome.optimum.as_ref().unwrap().is_positive() => {
            let w = outcome.witness.unwrap();
            let x = QVector::new(w.entries()[..n].to_vec());
            debug_assert!(sys.is_satisfied_by(&x));
            Ok(Some(x))
        }
        _ => Ok(None),
    }
}

/// Dense simplex tableau in standard form: free variables are split as
/// `x = x+ - x-`, each `<=` row gets a slack, phase 1 adds artificials.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// reduced-cost row for the current basis
    obj: Vec<Rational>,
    obj_val: Rational,
    nvars: usize,
    /// columns banned from entering (artificials after phase 1)
    banned_from: usize,
    /// original objective over structural variables, kept for phase 2
    phase2_obj: Option<Vec<Rational>>,
}

impl Tableau {
    fn from_system(sys: &LinearSystem, objective: Option<&QVector>) -> Tableau {
        let n = sys.dim;
        let n_slack = sys.le_rows.len();
        let n_struct = 2 * n + n_slack;
        let m = sys.eq_rows.len() + sys.le_rows.len();
        let n_total = n_struct + m;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut fill = |coeffs: &QVector, slack: Option<usize>, b: &Rational| {
            let mut row = vec![Rational::zero(); n_total];
            for j in 0..n {
                row[j] = coeffs[j].clone();
                row[n + j] = -&coeffs[j];
            }
            if let Some(s) = slack {
                row[2 * n + s] = Rational::one();
            }
            rows.push(row);
            rhs.push(b.clone());
        };
        for (r, b) in &sys.eq_rows {
            fill(r, None, b);
        }
        for (s, (r, b)) in sys.le_rows.iter().enumerate() {
            fill(r, Some(s), b);
        }

        // Phase-1 setup: nonnegative rhs, one artificial per row.
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            if rhs[i].is_negative() {
                for e in rows[i].iter_mut() {
                    *e = -&*e;
                }
                rhs[i] = -&rhs[i];
            }
            rows[i][n_struct + i] = Rational::one();
            basis.push(n_struct + i);
        }

        // Phase-1 reduced costs for "maximize -sum(artificials)".
        let mut obj = vec![Rational::zero(); n_total];
        let mut obj_val = Rational::zero();
        for i in 0..m {
            for j in 0..n_struct {
                obj[j] += &rows[i][j];
            }
            obj_val -= &rhs[i];
        }

        let phase2_obj = objective.map(|c| {
            let mut v = vec![Rational::zero(); n_total];
            for j in 0..n {
                v[j] = c[j].clone();
                v[n + j] = -&c[j];
            }
            v
        });

        Tableau {
            rows,
            rhs,
            basis,
            obj,
            obj_val,
            nvars: n_total,
            banned_from: n_struct,
            phase2_obj,
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = self.rows[r][j].recip();
        for e in self.rows[r].iter_mut() {
            *e *= &inv;
        }
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut self.rows[i][j], Rational::zero());
            for (e, p) in self.rows[i].iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *e -= &factor * p;
                }
            }
            self.rows[i][j] = Rational::zero();
            let delta = &factor * &pivot_rhs;
            self.rhs[i] -= delta;
        }
        let factor = std::mem::replace(&mut self.obj[j], Rational::zero());
        if !factor.is_zero() {
            for (e, p) in self.obj.iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *e -= &factor * p;
                }
            }
            self.obj[j] = Rational::zero();
            self.obj_val += &factor * &pivot_rhs;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Bland's rule: lowest-index improving column enters; among minimal
    /// ratios the row whose basic variable has the lowest index leaves.
    fn simplex_loop(&mut self) -> bool {
        loop {
            let Some(jcol) = (0..self.banned_from).find(|&j| self.obj[j].is_positive()) else {
                return true; // optimal
            };
            let mut leave: Option<usize> = None;
            let mut best: Option<Rational> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][jcol].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][jcol];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b
                            || (ratio == *b && self.basis[i] < self.basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return false; // unbounded
            };
            self.pivot(r, jcol);
        }
    }

    /// Runs phase 1; true iff the system is feasible.  Drives artificials
    /// out of the basis (or drops redundant rows) so phase 2 starts clean.
    fn phase1(&mut self) -> bool {
        let optimal = self.simplex_loop();
        debug_assert!(optimal, "phase 1 objective is bounded by zero");
        if !self.obj_val.is_zero() {
            return false;
        }
        let n_struct = self.banned_from;
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= n_struct {
                debug_assert!(self.rhs[i].is_zero());
                if let Some(j) = (0..n_struct).find(|&j| !self.rows[i][j].is_zero()) {
                    self.pivot(i, j);
                } else {
                    // Redundant constraint: the row is zero on every
                    // structural column.
                    self.rows.swap_remove(i);
                    self.rhs.swap_remove(i);
                    self.basis.swap_remove(i);
                    continue;
                }
            }
            i += 1;
        }
        true
    }

    /// Runs phase 2 from a feasible basis; true iff bounded.
    fn phase2(&mut self) -> bool {
        let c = self.phase2_obj.take().expect("phase 2 needs an objective");
        self.obj_val = Rational::zero();
        for i in 0..self.rows.len() {
            self.obj_val += &c[self.basis[i]] * &self.rhs[i];
        }
        for j in 0..self.nvars {
            let mut red = c[j].clone();
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_zero() {
                    red -= &c[self.basis[i]] * &self.rows[i][j];
                }
            }
            self.obj[j] = red;
        }
        self.simplex_loop()
    }

    fn objective_value(&self) -> Rational {
        self.obj_val.clone()
    }

    /// Current vertex mapped back to the free variables `x = x+ - x-`.
    fn extract(&self, n: usize) -> QVector {
        let mut values = vec![Rational::zero(); self.nvars];
        for (i, &b) in self.basis.iter().enumerate() {
            values[b] = self.rhs[i].clone();
        }
        QVector::new(
            (0..n)
                .map(|j| &values[j] - &values[n + j])
                .collect(),
        )
    }
}
