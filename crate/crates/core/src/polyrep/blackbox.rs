use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{gaussian_sample, CMatrix, Evaluator, GroupElement, MatrixShape, SparsePolynomial};
use crate::error::{Error, Result};

const HOMOGENEITY_SAMPLES: usize = 20;

/// A homogeneous polynomial available only through evaluation.
#[derive(Clone)]
pub struct BlackBoxPolynomial {
    shape: MatrixShape,
    degree: u32,
    label: String,
    evaluator: Evaluator,
}

impl fmt::Debug for BlackBoxPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxPolynomial")
            .field("shape", &self.shape)
            .field("degree", &self.degree)
            .field("label", &self.label)
            .finish()
    }
}

impl BlackBoxPolynomial {
    /// Wraps `evaluator` after a randomized check that `f(tA) = t^d f(A)`.
    pub fn new<F>(shape: MatrixShape, degree: u32, label: impl Into<String>, evaluator: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> Complex64 + Send + Sync + 'static,
    {
        let bb = BlackBoxPolynomial {
            shape,
            degree,
            label: label.into(),
            evaluator: Arc::new(evaluator),
        };
        bb.check_homogeneity(HOMOGENEITY_SAMPLES, 0x5eed)?;
        Ok(bb)
    }

    pub(crate) fn trusted(shape: MatrixShape, degree: u32, label: String, evaluator: Evaluator) -> Self {
        BlackBoxPolynomial {
            shape,
            degree,
            label,
            evaluator,
        }
    }

    pub fn from_sparse(p: SparsePolynomial) -> Self {
        let label = format!("sparse[{} terms]", p.num_terms());
        let shape = p.shape();
        let degree = p.degree();
        BlackBoxPolynomial::trusted(shape, degree, label, Arc::new(move |a| p.evaluate_unchecked(a)))
    }

    pub fn check_homogeneity(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let a = gaussian_sample(self.shape, &mut rng);
            let t = Complex64::new(0.7, 0.4);
            let lhs = (self.evaluator)(&(&a * t));
            let rhs = (self.evaluator)(&a) * t.powu(self.degree);
            let scale = lhs.norm().max(rhs.norm()).max(1e-300);
            if (lhs - rhs).norm() > 1e-8 * scale {
                return Err(Error::NotHomogeneous { degree: self.degree });
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> MatrixShape {
        self.shape
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn evaluate(&self, a: &CMatrix) -> Result<Complex64> {
        if (a.nrows(), a.ncols()) != (self.shape.rows, self.shape.cols) {
            return Err(Error::ShapeMismatch {
                expected: (self.shape.rows, self.shape.cols),
                found: (a.nrows(), a.ncols()),
            });
        }
        if a.iter().any(|z| !z.is_finite()) {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(self.evaluate_unchecked(a))
    }

    pub fn evaluate_unchecked(&self, a: &CMatrix) -> Complex64 {
        (self.evaluator)(a)
    }

    /// `A -> P(A σ)`.
    pub fn act(&self, sigma: &GroupElement) -> Result<Self> {
        if sigma.size() != self.shape.cols {
            return Err(Error::DimensionMismatch {
                expected: self.shape.cols,
                found: sigma.size(),
            });
        }
        let inner = self.evaluator.clone();
        let m = sigma.matrix().clone();
        Ok(BlackBoxPolynomial::trusted(
            self.shape,
            self.degree,
            format!("{}∘σ", self.label),
            Arc::new(move |a| inner(&(a * &m))),
        ))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let inner = self.evaluator.clone();
        BlackBoxPolynomial::trusted(
            self.shape,
            self.degree,
            format!("{c}·{}", self.label),
            Arc::new(move |a| inner(a) * c),
        )
    }
}
