//! Polynomials on matrix spaces and the group acting on them.
//!
//! A polynomial lives on `M_{k x (N+1)}`; the diagonal torus of `SL(N+1)` acts
//! on columns, so the torus character of a monomial is its column-degree vector.
//! The group action is right substitution on columns, `(σ·P)(A) = P(A σ)`.

mod blackbox;
pub mod builtins;
mod group;
mod sparse;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgeom::LatticePoint;

pub use blackbox::BlackBoxPolynomial;
pub use group::{GroupElement, OnePSG};
pub use sparse::{tensor_support, Exponent, PolynomialJson, SparsePolynomial, TermJson};

pub(crate) use sparse::log_sum_exp;

pub type CMatrix = nalgebra::DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixShape {
    pub rows: usize,
    pub cols: usize,
}

impl MatrixShape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix shape must be positive"));
        }
        Ok(MatrixShape { rows, cols })
    }

    /// Number of entries, the complex dimension of the variable space.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }
}

/// Column-degree vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusCharacter {
    raw: Vec<u32>,
}

impl TorusCharacter {
    pub fn new(raw: Vec<u32>) -> Self {
        TorusCharacter { raw }
    }

    pub fn raw(&self) -> &[u32] {
        &self.raw
    }

    pub fn total(&self) -> u32 {
        self.raw.iter().sum()
    }

    pub fn projected(&self) -> LatticePoint {
        sparse::project(&self.raw)
    }

    pub fn add(&self, other: &TorusCharacter) -> TorusCharacter {
        TorusCharacter::new(self.raw.iter().zip(&other.raw).map(|(a, b)| a + b).collect())
    }

    pub fn pair(&self, lambda: &[i64]) -> i64 {
        self.raw.iter().zip(lambda).map(|(&a, &l)| a as i64 * l).sum()
    }
}

/// A polynomial known either by its terms or only through evaluation.
#[derive(Clone, Debug)]
pub enum Poly {
    Sparse(SparsePolynomial),
    BlackBox(BlackBoxPolynomial),
}

impl Poly {
    pub fn shape(&self) -> MatrixShape {
        match self {
            Poly::Sparse(p) => p.shape(),
            Poly::BlackBox(p) => p.shape(),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            Poly::Sparse(p) => p.degree(),
            Poly::BlackBox(p) => p.degree(),
        }
    }

    pub fn evaluate(&self, a: &CMatrix) -> Result<Complex64> {
        match self {
            Poly::Sparse(p) => p.evaluate(a),
            Poly::BlackBox(p) => p.evaluate(a),
        }
    }

    pub fn evaluate_unchecked(&self, a: &CMatrix) -> Complex64 {
        match self {
            Poly::Sparse(p) => p.evaluate_unchecked(a),
            Poly::BlackBox(p) => p.evaluate_unchecked(a),
        }
    }

    pub fn as_sparse(&self) -> Option<&SparsePolynomial> {
        match self {
            Poly::Sparse(p) => Some(p),
            Poly::BlackBox(_) => None,
        }
    }

    /// Exact action for sparse polynomials; black boxes are wrapped.
    pub fn act(&self, sigma: &GroupElement) -> Result<Poly> {
        match self {
            Poly::Sparse(p) => Ok(Poly::Sparse(p.act(sigma)?)),
            Poly::BlackBox(p) => Ok(Poly::BlackBox(p.act(sigma)?)),
        }
    }

    /// Action by evaluation only: `A -> P(A σ)`, never expanding terms.
    pub fn act_lazy(&self, sigma: &GroupElement) -> Result<Poly> {
        let bb = match self {
            Poly::Sparse(p) => BlackBoxPolynomial::from_sparse(p.clone()),
            Poly::BlackBox(p) => p.clone(),
        };
        Ok(Poly::BlackBox(bb.act(sigma)?))
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        match self {
            Poly::Sparse(p) => Poly::Sparse(p.scale(c)),
            Poly::BlackBox(p) => Poly::BlackBox(p.scale(c)),
        }
    }

    /// Torus support; unavailable for black boxes.
    pub fn projected_support(&self) -> Result<Vec<LatticePoint>> {
        match self {
            Poly::Sparse(p) => p.projected_support(),
            Poly::BlackBox(p) => Err(Error::PolytopeUnavailable(format!(
                "{} is evaluation-only; its support is not expanded",
                p.label()
            ))),
        }
    }
}

impl From<SparsePolynomial> for Poly {
    fn from(p: SparsePolynomial) -> Self {
        Poly::Sparse(p)
    }
}

impl From<BlackBoxPolynomial> for Poly {
    fn from(p: BlackBoxPolynomial) -> Self {
        Poly::BlackBox(p)
    }
}

/// `base^{⊗ exponent}`, never materialized. Weights, polytopes, log-norms and
/// heights all scale linearly in the exponent.
#[derive(Clone, Debug)]
pub struct FormalPower {
    base: Poly,
    exponent: u32,
}

impl FormalPower {
    pub fn new(base: impl Into<Poly>, exponent: u32) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::invalid("formal power exponent must be >= 1"));
        }
        Ok(FormalPower {
            base: base.into(),
            exponent,
        })
    }

    pub fn base(&self) -> &Poly {
        &self.base
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Total degree of the tensor power.
    pub fn degree(&self) -> u32 {
        self.base.degree() * self.exponent
    }

    pub fn shape(&self) -> MatrixShape {
        self.base.shape()
    }

    pub fn act(&self, sigma: &GroupElement) -> Result<Self> {
        Ok(FormalPower {
            base: self.base.act(sigma)?,
            exponent: self.exponent,
        })
    }

    /// The base as a sparse polynomial, or an error naming what is missing.
    pub fn sparse_base(&self) -> Result<&SparsePolynomial> {
        match &self.base {
            Poly::Sparse(p) => Ok(p),
            Poly::BlackBox(p) => Err(Error::PolytopeUnavailable(format!(
                "{} is evaluation-only; its support is not expanded",
                p.label()
            ))),
        }
    }
}

impl From<Poly> for FormalPower {
    fn from(p: Poly) -> Self {
        FormalPower { base: p, exponent: 1 }
    }
}

impl From<SparsePolynomial> for FormalPower {
    fn from(p: SparsePolynomial) -> Self {
        Poly::Sparse(p).into()
    }
}

impl From<BlackBoxPolynomial> for FormalPower {
    fn from(p: BlackBoxPolynomial) -> Self {
        Poly::BlackBox(p).into()
    }
}

/// An i.i.d. standard complex Gaussian matrix: `E|z|² = 1`, density `e^{-|z|²}/π`.
pub fn gaussian_sample<R: Rng + ?Sized>(shape: MatrixShape, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(shape.rows, shape.cols, |_, _| {
        Complex64::new(
            s * rng.sample::<f64, _>(StandardNormal),
            s * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Fills `out` with an i.i.d. standard complex Gaussian matrix.
pub fn gaussian_fill<R: Rng + ?Sized>(out: &mut CMatrix, rng: &mut R) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for z in out.iter_mut() {
        *z = Complex64::new(
            s * rng.sample::<f64, _>(StandardNormal),
            s * rng.sample::<f64, _>(StandardNormal),
        );
    }
}

pub(crate) type Evaluator = Arc<dyn Fn(&CMatrix) -> Complex64 + Send + Sync>;

#[cfg(test)]
mod tests;
