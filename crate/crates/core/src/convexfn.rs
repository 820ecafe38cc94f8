//! Convex expression trees with exact values and one subgradient per point.
//!
//! Every node kind preserves convexity: affine maps, shifted squared
//! distances, positive parts, sums and pointwise maxima. Evaluation is
//! side-effect free; the achieving index of a top-level `Max` is returned in
//! the [`Evaluation`] rather than stored.

use crate::error::{Error, Result};
use crate::geometry::{check_dims, dot, sq_dist_raw, Ball, Halfspace, Vector};

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexFn {
    /// `aᵀx + b`
    Affine {
        a: Vector,
        b: f64,
    },
    /// `‖x − center‖² + offset`
    BallQuad {
        center: Vector,
        offset: f64,
    },
    /// `max(inner(x), 0)`
    PositivePart(Box<ConvexFn>),
    Sum(Vec<ConvexFn>),
    Max(Vec<ConvexFn>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub subgradient: Vector,
    /// Lowest index attaining the maximum when the root is a `Max` node.
    pub achieving: Option<usize>,
}

impl ConvexFn {
    pub fn affine(a: Vector, b: f64) -> Self {
        ConvexFn::Affine { a, b }
    }

    pub fn ball_quad(center: Vector, offset: f64) -> Self {
        ConvexFn::BallQuad { center, offset }
    }

    /// `‖x − c‖² − r²`, whose zero sub-level set is the closed ball.
    pub fn ball(ball: &Ball) -> Self {
        ConvexFn::BallQuad {
            center: ball.center.clone(),
            offset: -ball.radius * ball.radius,
        }
    }

    /// `aᵀx − b`, non-positive on the halfspace.
    pub fn halfspace(h: &Halfspace) -> Self {
        ConvexFn::Affine {
            a: h.a.clone(),
            b: -h.b,
        }
    }

    pub fn positive_part(inner: ConvexFn) -> Self {
        ConvexFn::PositivePart(Box::new(inner))
    }

    pub fn sum(terms: Vec<ConvexFn>) -> Result<Self> {
        check_terms(&terms)?;
        Ok(ConvexFn::Sum(terms))
    }

    pub fn max(terms: Vec<ConvexFn>) -> Result<Self> {
        check_terms(&terms)?;
        Ok(ConvexFn::Max(terms))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFn::Affine { a, .. } => a.dim(),
            ConvexFn::BallQuad { center, .. } => center.dim(),
            ConvexFn::PositivePart(inner) => inner.dim(),
            ConvexFn::Sum(terms) | ConvexFn::Max(terms) => terms[0].dim(),
        }
    }

    /// Value at `x`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_dims(self.dim(), x.dim())?;
        Ok(self.value_raw(x.as_slice()))
    }

    pub fn eval(&self, x: &Vector) -> Result<Evaluation> {
        check_dims(self.dim(), x.dim())?;
        let mut g = vec![0.0; x.dim()];
        let (value, achieving) = self.eval_raw(x.as_slice(), &mut g);
        Ok(Evaluation {
            value,
            subgradient: Vector::from_raw(g),
            achieving,
        })
    }

    /// Evaluates at `x`, overwriting `grad` with a subgradient.
    pub(crate) fn eval_raw(&self, x: &[f64], grad: &mut [f64]) -> (f64, Option<usize>) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        match self {
            ConvexFn::Max(terms) => {
                let (k, value) = argmax(terms, x);
                terms[k].add_subgradient(x, grad);
                (value, Some(k))
            }
            _ => {
                let value = self.value_raw(x);
                self.add_subgradient(x, grad);
                (value, None)
            }
        }
    }

    pub(crate) fn value_raw(&self, x: &[f64]) -> f64 {
        match self {
            ConvexFn::Affine { a, b } => dot(a.as_slice(), x) + b,
            ConvexFn::BallQuad { center, offset } => sq_dist_raw(x, center.as_slice()) + offset,
            ConvexFn::PositivePart(inner) => inner.value_raw(x).max(0.0),
            ConvexFn::Sum(terms) => terms.iter().map(|t| t.value_raw(x)).sum(),
            ConvexFn::Max(terms) => argmax(terms, x).1,
        }
    }

    fn add_subgradient(&self, x: &[f64], grad: &mut [f64]) {
        match self {
            ConvexFn::Affine { a, .. } => {
                for (g, ai) in grad.iter_mut().zip(a.as_slice()) {
                    *g += ai;
                }
            }
            ConvexFn::BallQuad { center, .. } => {
                for ((g, xi), ci) in grad.iter_mut().zip(x).zip(center.as_slice()) {
                    *g += 2.0 * (xi - ci);
                }
            }
            // zero at the kink: 0 lies in [0, 1]·∂inner
            ConvexFn::PositivePart(inner) => {
                if inner.value_raw(x) > 0.0 {
                    inner.add_subgradient(x, grad);
                }
            }
            ConvexFn::Sum(terms) => {
                for t in terms {
                    t.add_subgradient(x, grad);
                }
            }
            ConvexFn::Max(terms) => {
                let (k, _) = argmax(terms, x);
                terms[k].add_subgradient(x, grad);
            }
        }
    }
}

/// Lowest index attaining the maximum.
fn argmax(terms: &[ConvexFn], x: &[f64]) -> (usize, f64) {
    let mut best = (0, terms[0].value_raw(x));
    for (k, t) in terms.iter().enumerate().skip(1) {
        let v = t.value_raw(x);
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

fn check_terms(terms: &[ConvexFn]) -> Result<()> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("sum and max nodes need at least one term".into()))?;
    for t in &terms[1..] {
        check_dims(first.dim(), t.dim())?;
    }
    Ok(())
}
