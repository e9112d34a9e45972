//! Exact integer linear algebra on exponent vectors and unimodular frames.
//!
//! A monomial (possibly Laurent) in the ambient variables is an
//! [`ExponentVector`]. The regular system of parameters of the stage-n ring is
//! a [`Frame`]: a unimodular integer matrix whose columns are the exponent
//! vectors of the parameters. Every exponent vector therefore has unique
//! integer coordinates in every frame, and a monomial lies in the stage ring
//! (up to units) exactly when those coordinates are nonnegative.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("{0} does not lie in the stage cone")]
    NotInCone(ExponentVector),
}

/// Exponents of a Laurent monomial, one entry per ambient variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<BigInt>);

impl ExponentVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        Self(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![BigInt::zero(); dim])
    }

    /// The exponent vector of the `i`-th ambient variable.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|e| !e.is_negative())
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.min(b).clone())
                .collect(),
        )
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.max(b).clone())
                .collect(),
        )
    }

    pub fn scaled(&self, k: &BigInt) -> Self {
        Self(self.0.iter().map(|e| e * k).collect())
    }

    pub fn check_dim(&self, dim: usize) -> Result<(), LatticeError> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(LatticeError::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            })
        }
    }
}

impl Add for &ExponentVector {
    type Output = ExponentVector;
    fn add(self, rhs: Self) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ExponentVector {
    type Output = ExponentVector;
    fn sub(self, rhs: Self) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &ExponentVector {
    type Output = ExponentVector;
    fn neg(self) -> ExponentVector {
        ExponentVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for ExponentVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::serde_big::serialize_ints(&self.0, s)
    }
}

/// Coordinates of an exponent vector with respect to the frame of stage `stage`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coordinates {
    #[serde(serialize_with = "crate::serde_big::serialize_ints")]
    pub entries: Vec<BigInt>,
    pub stage: usize,
}

impl Coordinates {
    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| !e.is_negative())
    }
}

/// Unimodular frame: the parameters of one stage ring as exponent-vector columns.
///
/// The inverse matrix is kept alongside the columns so that coordinates are a
/// single matrix-vector product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    stage: usize,
    columns: Vec<ExponentVector>,
    // rows of the inverse matrix
    inverse: Vec<Vec<BigInt>>,
}

impl Frame {
    pub fn identity(dim: usize) -> Self {
        let columns = (0..dim).map(|i| ExponentVector::unit(dim, i)).collect();
        let inverse = (0..dim)
            .map(|i| ExponentVector::unit(dim, i).into_entries())
            .collect();
        Self {
            stage: 0,
            columns,
            inverse,
        }
    }

    /// Builds a frame from columns, checking unimodularity and computing the
    /// inverse by exact rational elimination.
    pub fn from_columns(stage: usize, columns: Vec<ExponentVector>) -> Result<Self, LatticeError> {
        let dim = columns.len();
        for c in &columns {
            c.check_dim(dim)?;
        }
        let det = determinant(&columns_to_rows(&columns));
        if det.abs() != BigInt::one() {
            return Err(LatticeError::NotUnimodular(det));
        }
        let inverse = invert_unimodular(&columns_to_rows(&columns));
        Ok(Self {
            stage,
            columns,
            inverse,
        })
    }

    /// Assembles a frame from columns and a known inverse without re-deriving it.
    pub(crate) fn from_parts(stage: usize, columns: Vec<ExponentVector>, inverse: Vec<Vec<BigInt>>) -> Self {
        Self {
            stage,
            columns,
            inverse,
        }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ExponentVector] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &ExponentVector {
        &self.columns[j]
    }

    pub fn inverse_rows(&self) -> &[Vec<BigInt>] {
        &self.inverse
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&columns_to_rows(&self.columns))
    }

    /// `frame · c`
    pub fn combine(&self, coords: &[BigInt]) -> ExponentVector {
        let dim = self.dim();
        let mut out = vec![BigInt::zero(); dim];
        for (col, c) in self.columns.iter().zip(coords) {
            if c.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(col.entries()) {
                *o += e * c;
            }
        }
        ExponentVector(out)
    }

    pub(crate) fn coords_raw(&self, w: &ExponentVector) -> Vec<BigInt> {
        self.inverse
            .iter()
            .map(|row| {
                row.iter()
                    .zip(w.entries())
                    .fold(BigInt::zero(), |acc, (r, e)| acc + r * e)
            })
            .collect()
    }
}

fn columns_to_rows(columns: &[ExponentVector]) -> Vec<Vec<BigInt>> {
    let dim = columns.len();
    (0..dim)
        .map(|i| columns.iter().map(|c| c.entries()[i].clone()).collect())
        .collect()
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

// Gauss-Jordan over the rationals; the result is integral because det = ±1.
fn invert_unimodular(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> = r.iter().map(|e| BigRational::from(e.clone())).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("unimodular matrix has full rank");
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for e in a[col].iter_mut() {
            *e /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..2 * n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    a.into_iter()
        .map(|row| {
            row.into_iter()
                .skip(n)
                .map(|q| {
                    debug_assert!(q.is_integer());
                    q.to_integer()
                })
                .collect()
        })
        .collect()
}

/// The unique integer coordinates of `w` in `frame`.
pub fn coords(frame: &Frame, w: &ExponentVector) -> Result<Coordinates, LatticeError> {
    w.check_dim(frame.dim())?;
    Ok(Coordinates {
        entries: frame.coords_raw(w),
        stage: frame.stage(),
    })
}

/// Whether `w` lies in the stage ring of `frame`, up to units.
pub fn in_cone(frame: &Frame, w: &ExponentVector) -> Result<bool, LatticeError> {
    Ok(coords(frame, w)?.is_nonnegative())
}

fn cone_coords(frame: &Frame, w: &ExponentVector) -> Result<Vec<BigInt>, LatticeError> {
    let c = coords(frame, w)?;
    if c.is_nonnegative() {
        Ok(c.entries)
    } else {
        Err(LatticeError::NotInCone(w.clone()))
    }
}

/// Greatest common divisor of two cone monomials in the stage ring.
pub fn stage_gcd(frame: &Frame, a: &ExponentVector, b: &ExponentVector) -> Result<ExponentVector, LatticeError> {
    let ca = cone_coords(frame, a)?;
    let cb = cone_coords(frame, b)?;
    let m: Vec<BigInt> = ca.iter().zip(&cb).map(|(x, y)| x.min(y).clone()).collect();
    Ok(frame.combine(&m))
}

/// Least common multiple of two cone monomials in the stage ring.
pub fn stage_lcm(frame: &Frame, a: &ExponentVector, b: &ExponentVector) -> Result<ExponentVector, LatticeError> {
    let ca = cone_coords(frame, a)?;
    let cb = cone_coords(frame, b)?;
    let m: Vec<BigInt> = ca.iter().zip(&cb).map(|(x, y)| x.max(y).clone()).collect();
    Ok(frame.combine(&m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::from_i64s(v)
    }

    // parameters x, y/(xz), z
    fn stage_two_frame() -> Frame {
        Frame::from_columns(2, vec![ev(&[1, 0, 0]), ev(&[-1, 1, -1]), ev(&[0, 0, 1])]).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&e| BigInt::from(e)).collect()
    }

    #[test]
    fn identity_coords() {
        let f = Frame::identity(3);
        assert_eq!(coords(&f, &ev(&[2, 0, 1])).unwrap().entries, big(&[2, 0, 1]));
    }

    #[test]
    fn stage_two_coords() {
        let f = stage_two_frame();
        assert_eq!(coords(&f, &ev(&[0, 1, 0])).unwrap().entries, big(&[1, 1, 1]));
        assert_eq!(coords(&f, &ev(&[1, 0, -1])).unwrap().entries, big(&[1, 0, -1]));
        assert_eq!(coords(&f, &ev(&[0, 1, 0])).unwrap().stage, 2);
    }

    #[test]
    fn cone_membership() {
        let f = stage_two_frame();
        assert!(in_cone(&Frame::identity(3), &ev(&[0, 0, 0])).unwrap());
        assert!(in_cone(&f, &ev(&[0, 1, 0])).unwrap());
        assert!(!in_cone(&f, &ev(&[1, 0, -1])).unwrap());
    }

    #[test]
    fn gcd_and_lcm() {
        let id = Frame::identity(3);
        let a = ev(&[2, 1, 0]);
        let b = ev(&[1, 3, 0]);
        assert_eq!(stage_gcd(&id, &a, &a).unwrap(), a);
        assert_eq!(stage_lcm(&id, &a, &a).unwrap(), a);
        assert_eq!(stage_gcd(&id, &a, &b).unwrap(), ev(&[1, 1, 0]));
        assert_eq!(stage_lcm(&id, &a, &b).unwrap(), ev(&[2, 3, 0]));

        let f = stage_two_frame();
        let x = ev(&[1, 0, 0]);
        let z = ev(&[0, 0, 1]);
        assert_eq!(stage_gcd(&f, &x, &z).unwrap(), ev(&[0, 0, 0]));
        assert_eq!(stage_lcm(&f, &x, &z).unwrap(), ev(&[1, 0, 1]));
    }

    #[test]
    fn errors() {
        let f = stage_two_frame();
        assert_eq!(
            coords(&f, &ev(&[1, 0])),
            Err(LatticeError::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(matches!(
            stage_gcd(&f, &ev(&[1, 0, -1]), &ev(&[1, 0, 0])),
            Err(LatticeError::NotInCone(_))
        ));
        assert!(matches!(
            Frame::from_columns(0, vec![ev(&[2, 0]), ev(&[0, 1])]),
            Err(LatticeError::NotUnimodular(_))
        ));
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let rows = vec![big(&[2, -1, 3]), big(&[0, 4, 1]), big(&[5, 2, -2])];
        // 2(4*-2 - 1*2) - (-1)(0*-2 - 1*5) + 3(0*2 - 4*5) = -20 - 5 - 60
        assert_eq!(determinant(&rows), BigInt::from(-85));
        let swapped = vec![big(&[0, 1]), big(&[1, 0])];
        assert_eq!(determinant(&swapped), BigInt::from(-1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        // unimodular frames built from random elementary column operations
        fn frame_strategy() -> impl Strategy<Value = Frame> {
            (2usize..=4)
                .prop_flat_map(|d| {
                    (
                        Just(d),
                        prop::collection::vec((0..d, 0..d, -3i64..=3), 0..12),
                    )
                })
                .prop_map(|(d, ops)| {
                    let mut cols: Vec<ExponentVector> = (0..d).map(|i| ExponentVector::unit(d, i)).collect();
                    for (i, j, k) in ops {
                        if i != j {
                            cols[i] = &cols[i] + &cols[j].scaled(&BigInt::from(k));
                        }
                    }
                    Frame::from_columns(0, cols).unwrap()
                })
        }

        fn vector(d: usize) -> impl Strategy<Value = ExponentVector> {
            prop::collection::vec(-20i64..=20, d).prop_map(|v| ExponentVector::from_i64s(&v))
        }

        proptest! {
            #[test]
            fn round_trip((f, w) in frame_strategy().prop_flat_map(|f| { let d = f.dim(); (Just(f), vector(d)) })) {
                let c = coords(&f, &w).unwrap();
                prop_assert_eq!(f.combine(&c.entries), w);
                prop_assert_eq!(f.determinant().abs(), BigInt::one());
            }

            #[test]
            fn gcd_times_lcm((f, a, b) in frame_strategy().prop_flat_map(|f| {
                let d = f.dim();
                (Just(f), prop::collection::vec(0i64..=9, d), prop::collection::vec(0i64..=9, d))
            })) {
                let a = f.combine(&a.iter().map(|&e| BigInt::from(e)).collect::<Vec<_>>());
                let b = f.combine(&b.iter().map(|&e| BigInt::from(e)).collect::<Vec<_>>());
                let g = stage_gcd(&f, &a, &b).unwrap();
                let l = stage_lcm(&f, &a, &b).unwrap();
                prop_assert_eq!(&g + &l, &a + &b);
            }

            #[test]
            fn cone_is_monotone((f, w, c) in frame_strategy().prop_flat_map(|f| {
                let d = f.dim();
                (Just(f), vector(d), prop::collection::vec(0i64..=5, d))
            })) {
                if in_cone(&f, &w).unwrap() {
                    let shift = f.combine(&c.iter().map(|&e| BigInt::from(e)).collect::<Vec<_>>());
                    prop_assert!(in_cone(&f, &(&w + &shift)).unwrap());
                }
            }
        }
    }
}
