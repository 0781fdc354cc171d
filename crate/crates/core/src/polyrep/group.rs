use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CMatrix;
use crate::error::{Error, Result};

/// An invertible `(N+1) x (N+1)` complex matrix with its determinant cached.
#[derive(Clone, Debug)]
pub struct GroupElement {
    matrix: CMatrix,
    det: Complex64,
}

impl GroupElement {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("group element must be square"));
        }
        let det = matrix.clone().determinant();
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(Error::SingularGroupElement);
        }
        Ok(GroupElement { matrix, det })
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            matrix: CMatrix::identity(n, n),
            det: Complex64::new(1.0, 0.0),
        }
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        GroupElement::new(CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
    }

    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        GroupElement::new(DMatrix::from_row_iterator(
            n,
            n,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Permutation matrix sending basis vector `i` to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            if p >= n {
                return Err(Error::invalid("permutation index out of range"));
            }
            m[(i, p)] = Complex64::new(1.0, 0.0);
        }
        GroupElement::new(m)
    }

    /// A random element of `SL(n, Z)`: a product of elementary matrices with
    /// small integer entries. Entries stay exact in `f64`.
    pub fn random_sl_integer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = CMatrix::identity(n, n);
        if n < 2 {
            return GroupElement::identity(n);
        }
        for _ in 0..(2 * n) {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let c = rng.random_range(1..=2) as f64 * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            // Row operation: row_i += c row_j.
            let row_j = m.row(j).clone_owned();
            let mut row_i = m.row_mut(i);
            row_i += row_j * Complex64::new(c, 0.0);
        }
        GroupElement {
            matrix: m,
            det: Complex64::new(1.0, 0.0),
        }
    }

    /// Haar-random unitary via QR of a complex Ginibre matrix.
    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        let qr = g.qr();
        let (q, r) = qr.unpack();
        // Fix the phases so the distribution is Haar.
        let mut u = q;
        for k in 0..n {
            let d = r[(k, k)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let mut col = u.column_mut(k);
            col *= phase;
        }
        let det = u.clone().determinant();
        GroupElement { matrix: u, det }
    }

    /// Random element of `SL(n, C)` with entries of moderate size.
    pub fn random_sl_complex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let g = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                )
            });
            let det = g.clone().determinant();
            if det.norm() < 1e-3 {
                continue;
            }
            let root = det.powf(1.0 / n as f64);
            let m = g / root;
            if let Ok(el) = GroupElement::new(m) {
                return el;
            }
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn determinant(&self) -> Complex64 {
        self.det
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            det: self.det * other.det,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .expect("group elements are invertible");
        GroupElement {
            matrix: inv,
            det: Complex64::new(1.0, 0.0) / self.det,
        }
    }

    /// `g * self * g^{-1}`.
    pub fn conjugate_by(&self, g: &GroupElement) -> GroupElement {
        g.mul(self).mul(&g.inverse())
    }

    /// `Trace(σ σ*)`.
    pub fn trace_norm_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == Complex64::new(0.0, 0.0)))
    }
}

/// One-parameter subgroup `t -> diag(t^{λ_0}, ..., t^{λ_N})` of the diagonal torus of SL.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OnePSG {
    exponents: Vec<i64>,
}

impl OnePSG {
    pub fn new(exponents: Vec<i64>) -> Result<Self> {
        let s: i64 = exponents.iter().sum();
        if s != 0 {
            return Err(Error::NotSumZero(s.to_string()));
        }
        Ok(OnePSG { exponents })
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn at(&self, t: Complex64) -> GroupElement {
        let entries: Vec<Complex64> = self.exponents.iter().map(|&e| t.powi(e as i32)).collect();
        GroupElement::diagonal(&entries).expect("t must be nonzero")
    }

    pub fn to_functional(&self) -> crate::exactgeom::LinearFunctional {
        crate::exactgeom::LinearFunctional::new(self.exponents.clone()).expect("sum-zero by construction")
    }
}
