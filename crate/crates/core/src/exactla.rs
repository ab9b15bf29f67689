//! Exact rational scalars, vectors and matrices.
//!
//! All arithmetic is over arbitrary-precision rationals: quadruple
//! enumeration composes many pivots, and fixed-width overflow would silently
//! corrupt cone tests.  Values are canonical by construction (reduced
//! fraction, positive denominator), so equality is structural.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::Index;

use crate::{Error, Result};

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// `p/q` from machine integers. Panics on a zero denominator; meant for
/// literals in code and tests.
pub fn rat(p: i64, q: i64) -> Rational {
    assert!(q != 0, "zero denominator");
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer `p` as `p/1`.
pub fn rat_int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"` or a bare integer `"p"`. Rejects a zero denominator.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|_| Error::BadRational(s.to_string()))?;
    let den: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| Error::BadRational(s.to_string()))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"p"` when the denominator is 1, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dense exact vector in `Q^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVector {
    entries: Vec<Rational>,
}

impl QVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        QVector { entries }
    }

    pub fn zero(dim: usize) -> Self {
        QVector {
            entries: vec![Rational::zero(); dim],
        }
    }

    /// Standard basis vector `e_i` (0-based).
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut v = Self::zero(dim);
        v.entries[i] = Rational::one();
        v
    }

    /// Convenience constructor from machine integers.
    pub fn from_ints(entries: &[i64]) -> Self {
        QVector {
            entries: entries.iter().map(|&p| rat_int(p)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn dot(&self, other: &QVector) -> Rational {
        assert_eq!(self.dim(), other.dim(), "dot of mismatched dimensions");
        let mut acc = Rational::zero();
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            acc += a * b;
        }
        acc
    }

    pub fn add(&self, other: &QVector) -> QVector {
        assert_eq!(self.dim(), other.dim());
        QVector {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        assert_eq!(self.dim(), other.dim());
        QVector {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> QVector {
        QVector {
            entries: self.entries.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> QVector {
        QVector {
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    /// Sum of absolute entries; exact and norm enough for slack bounds.
    pub fn norm1(&self) -> Rational {
        let mut acc = Rational::zero();
        for e in &self.entries {
            acc += e.abs();
        }
        acc
    }

    /// Concatenation, used to lift into product spaces.
    pub fn concat(&self, other: &QVector) -> QVector {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        QVector { entries }
    }

    pub fn push(&mut self, value: Rational) {
        self.entries.push(value);
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.entries[i]
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(e))?;
        }
        write!(f, ")")
    }
}

/// Dense exact matrix stored as rows of equal dimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: Vec<QVector>,
    cols: usize,
}

impl QMatrix {
    /// A matrix with `cols` columns; rows may be empty.
    pub fn new(rows: Vec<QVector>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.dim(), cols, "ragged matrix");
        }
        QMatrix { rows, cols }
    }

    pub fn from_rows(rows: Vec<QVector>) -> Self {
        let cols = rows.first().map_or(0, |r| r.dim());
        Self::new(rows, cols)
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| QVector::unit(n, i)).collect(), n)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[QVector] {
        &self.rows
    }

    pub fn transpose(&self) -> QMatrix {
        let mut rows = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            rows.push(QVector::new(
                self.rows.iter().map(|r| r[j].clone()).collect(),
            ));
        }
        QMatrix::new(rows, self.row_count())
    }

    /// Row echelon form via fraction-exact Gaussian elimination.
    /// Returns the echelon rows and the pivot column of each.
    #[allow(clippy::needless_range_loop)]
    fn echelon(&self) -> (Vec<Vec<Rational>>, Vec<usize>) {
        let mut m: Vec<Vec<Rational>> = self.rows.iter().map(|r| r.entries.clone()).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
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
                    for c in col..self.cols {
                        let delta = &m[row][c] * &factor;
                        m[r][c] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.len() {
                break;
            }
        }
        m.truncate(row);
        (m, pivots)
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    /// Some exact solution of `self * x = b`, or `None` when inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &QVector) -> Result<Option<QVector>> {
        if b.dim() != self.row_count() {
            return Err(Error::DimensionMismatch {
                expected: self.row_count(),
                got: b.dim(),
            });
        }
        // Eliminate on the augmented matrix [A | b].
        let augmented = QMatrix::new(
            self.rows
                .iter()
                .zip(b.iter())
                .map(|(r, bi)| {
                    let mut row = r.clone();
                    row.push(bi.clone());
                    row
                })
                .collect(),
            self.cols + 1,
        );
        let (ech, pivots) = augmented.echelon();
        let mut x = vec![Rational::zero(); self.cols];
        for (r, &p) in ech.iter().zip(pivots.iter()) {
            if p == self.cols {
                return Ok(None); // pivot in the rhs column: inconsistent
            }
            x[p] = r[self.cols].clone();
        }
        Ok(Some(QVector::new(x)))
    }

    /// Basis of the kernel `{x : self * x = 0}`.
    pub fn kernel_basis(&self) -> Vec<QVector> {
        let (ech, pivots) = self.echelon();
        let mut basis = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (r, &p) in ech.iter().zip(pivots.iter()) {
                v[p] = -&r[free];
            }
            basis.push(QVector::new(v));
        }
        basis
    }

    pub fn mul_vec(&self, x: &QVector) -> QVector {
        QVector::new(self.rows.iter().map(|r| r.dot(x)).collect())
    }
}
