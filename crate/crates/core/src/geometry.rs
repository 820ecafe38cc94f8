//! Dense vectors, balls and halfspaces.
//!
//! Everything here works in `f64`. Balls are closed unless a caller asks for
//! the open variant explicitly through [`Ball::contains`].

use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `R^n` with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput(
                "vector must have at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "vector coordinates must be finite".into(),
            ));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Vector(vec![0.0; n])
    }

    /// Wraps raw coordinates produced by arithmetic on valid vectors.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn sq_norm(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Result<Vector> {
        check_dims(self.dim(), other.dim())?;
        Ok(Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Vector) -> Result<Vector> {
        check_dims(self.dim(), other.dim())?;
        Ok(self - other)
    }

    pub fn checked_add(&self, other: &Vector) -> Result<Vector> {
        check_dims(self.dim(), other.dim())?;
        Ok(self + other)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Sub for &Vector {
    type Output = Vector;

    /// Panics on dimension mismatch; use [`Vector::checked_sub`] for untrusted input.
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sq_dist_raw(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance `‖a − b‖`.
pub fn dist(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(sq_dist_raw(&a.0, &b.0).sqrt())
}

pub fn sq_dist(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(sq_dist_raw(&a.0, &b.0))
}

/// `aᵀa`.
pub fn sq_norm(a: &Vector) -> f64 {
    a.sq_norm()
}

/// Closed ball `{x : ‖x − center‖ ≤ radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Membership test; `closed` selects `≤` over `<` on squared distances.
    pub fn contains(&self, x: &Vector, closed: bool) -> Result<bool> {
        let d2 = sq_dist(x, &self.center)?;
        let r2 = self.radius * self.radius;
        Ok(if closed { d2 <= r2 } else { d2 < r2 })
    }

    /// `‖x − center‖² − radius²`, non-positive exactly on the closed ball.
    pub fn excess(&self, x: &Vector) -> Result<f64> {
        Ok(sq_dist(x, &self.center)? - self.radius * self.radius)
    }

    pub(crate) fn project_raw(&self, x: &[f64], out: &mut [f64]) {
        let d = sq_dist_raw(x, self.center.as_slice()).sqrt();
        if d <= self.radius {
            out.copy_from_slice(x);
        } else {
            let s = self.radius / d;
            for ((o, xi), ci) in out.iter_mut().zip(x).zip(self.center.as_slice()) {
                *o = ci + s * (xi - ci);
            }
        }
    }

    /// Euclidean projection onto the closed ball.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dims(self.dim(), x.dim())?;
        let mut out = vec![0.0; x.dim()];
        self.project_raw(x.as_slice(), &mut out);
        Ok(Vector(out))
    }
}

/// Halfspace `{x : aᵀx ≤ b}` with `a ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vector,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vector, b: f64) -> Result<Self> {
        if a.sq_norm() == 0.0 {
            return Err(Error::InvalidInput(
                "halfspace normal must be nonzero".into(),
            ));
        }
        if !b.is_finite() {
            return Err(Error::InvalidInput(
                "halfspace offset must be finite".into(),
            ));
        }
        Ok(Halfspace { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `aᵀx − b`.
    pub fn excess(&self, x: &Vector) -> Result<f64> {
        Ok(self.a.dot(x)? - self.b)
    }

    pub(crate) fn project_raw(&self, x: &[f64], out: &mut [f64]) {
        let a = self.a.as_slice();
        let viol = dot(a, x) - self.b;
        out.copy_from_slice(x);
        if viol > 0.0 {
            let s = viol / dot(a, a);
            for (o, ai) in out.iter_mut().zip(a) {
                *o -= s * ai;
            }
        }
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dims(self.dim(), x.dim())?;
        let mut out = vec![0.0; x.dim()];
        self.project_raw(x.as_slice(), &mut out);
        Ok(Vector(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(dist(&v(&[1.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(dist(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn dist_rejects_mismatched_dimensions() {
        let err = dist(&v(&[0.0, 0.0]), &v(&[1.0])).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn sq_norm_examples() {
        assert_eq!(sq_norm(&v(&[3.0, 4.0])), 25.0);
        assert_eq!(sq_norm(&v(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(sq_norm(&v(&[1.0, 1.0, 1.0, 1.0])), 4.0);
    }

    #[test]
    fn ball_membership_open_and_closed() {
        let b = Ball::new(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(b.contains(&v(&[1.0, 0.0]), true).unwrap());
        assert!(!b.contains(&v(&[1.0, 0.0]), false).unwrap());
        assert!(b.contains(&v(&[0.5, 0.0]), false).unwrap());
        assert!(b.contains(&v(&[0.5, 0.0, 0.0]), true).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![f64::NAN]).is_err());
        assert!(Ball::new(v(&[0.0]), 0.0).is_err());
        assert!(Ball::new(v(&[0.0]), -1.0).is_err());
        assert!(Halfspace::new(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }

    #[test]
    fn projections() {
        let b = Ball::new(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(b.project(&v(&[5.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(b.project(&v(&[0.2, 0.1])).unwrap(), v(&[0.2, 0.1]));
        let h = Halfspace::new(v(&[1.0, 0.0]), -0.5).unwrap();
        assert_eq!(h.project(&v(&[3.0, 2.0])).unwrap(), v(&[-0.5, 2.0]));
        assert_eq!(h.project(&v(&[-3.0, 2.0])).unwrap(), v(&[-3.0, 2.0]));
    }

    fn triple(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let c = || proptest::collection::vec(-100.0..100.0f64, n);
        (c(), c(), c())
    }

    proptest! {
        #[test]
        fn triangle_inequality((a, b, c) in (1usize..6).prop_flat_map(triple)) {
            let (a, b, c) = (v(&a), v(&b), v(&c));
            let ac = dist(&a, &c).unwrap();
            let bound = dist(&a, &b).unwrap() + dist(&b, &c).unwrap();
            prop_assert!(ac <= bound * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn squared_distance_matches_norm((a, b, _c) in (1usize..6).prop_flat_map(triple)) {
            let (a, b) = (v(&a), v(&b));
            let d = dist(&a, &b).unwrap();
            let s = sq_norm(&(&a - &b));
            prop_assert!((d * d - s).abs() <= 1e-12 * s.max(1e-300));
        }
    }
}
