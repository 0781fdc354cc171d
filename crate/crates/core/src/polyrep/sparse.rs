use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::group::GroupElement;
use super::{CMatrix, MatrixShape, TorusCharacter};
use crate::error::{Error, Result};
use crate::exactgeom::LatticePoint;
use crate::igusa::gamma::ln_factorial;

/// Exponent matrix of a monomial, stored row-major.
pub type Exponent = Vec<u32>;

/// Homogeneous polynomial in the entries of a `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    shape: MatrixShape,
    degree: u32,
    terms: BTreeMap<Exponent, Complex64>,
}

/// Relative size below which a coefficient produced by substitution is
/// treated as round-off of an exact cancellation.
const CANCELLATION_TOL: f64 = 1e-11;

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl SparsePolynomial {
    pub fn new<I>(shape: MatrixShape, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut map: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != shape.len() {
                return Err(Error::ShapeMismatch {
                    expected: (shape.rows, shape.cols),
                    found: (1, e.len()),
                });
            }
            if e.iter().sum::<u32>() != degree {
                return Err(Error::NotHomogeneous { degree });
            }
            if !c.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
            *map.entry(e).or_default() += c;
        }
        map.retain(|_, c| c.norm() != 0.0);
        Ok(SparsePolynomial {
            shape,
            degree,
            terms: map,
        })
    }

    pub fn zero(shape: MatrixShape, degree: u32) -> Self {
        SparsePolynomial {
            shape,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(shape: MatrixShape, c: Complex64) -> Self {
        SparsePolynomial::new(shape, 0, [(vec![0; shape.len()], c)]).expect("valid constant")
    }

    pub fn monomial(shape: MatrixShape, exps: Exponent, c: Complex64) -> Result<Self> {
        let d = exps.iter().sum();
        SparsePolynomial::new(shape, d, [(exps, c)])
    }

    /// The matrix entry `x_{ij}`.
    pub fn variable(shape: MatrixShape, i: usize, j: usize) -> Self {
        let mut e = vec![0; shape.len()];
        e[shape.index(i, j)] = 1;
        SparsePolynomial::new(shape, 1, [(e, Complex64::new(1.0, 0.0))]).expect("valid variable")
    }

    pub fn shape(&self) -> MatrixShape {
        self.shape
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.terms.retain(|_, v| v.norm() != 0.0);
        out
    }

    pub fn add(&self, other: &SparsePolynomial) -> Result<Self> {
        self.check_shape(other.shape)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != other.degree {
            return Err(Error::NotHomogeneous { degree: self.degree });
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_default() += c;
        }
        out.terms.retain(|_, v| v.norm() != 0.0);
        Ok(out)
    }

    pub fn sub(&self, other: &SparsePolynomial) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &SparsePolynomial) -> Result<Self> {
        self.check_shape(other.shape)?;
        let mut terms: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_default() += ca * cb;
            }
        }
        terms.retain(|_, v| v.norm() != 0.0);
        Ok(SparsePolynomial {
            shape: self.shape,
            degree: self.degree + other.degree,
            terms,
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = SparsePolynomial::constant(self.shape, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self).expect("same shape");
        }
        out
    }

    fn check_shape(&self, other: MatrixShape) -> Result<()> {
        if self.shape != other {
            return Err(Error::ShapeMismatch {
                expected: (self.shape.rows, self.shape.cols),
                found: (other.rows, other.cols),
            });
        }
        Ok(())
    }

    /// Column-degree vector of an exponent matrix.
    pub fn column_degrees(&self, e: &[u32]) -> Vec<u32> {
        let cols = self.shape.cols;
        (0..cols)
            .map(|j| (0..self.shape.rows).map(|i| e[i * cols + j]).sum())
            .collect()
    }

    /// Torus support: column-degree vectors of monomials with nonzero coefficient.
    pub fn support(&self) -> Result<BTreeSet<TorusCharacter>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self
            .terms
            .keys()
            .map(|e| TorusCharacter::new(self.column_degrees(e)))
            .collect())
    }

    /// Projected (sum-zero) support points.
    pub fn projected_support(&self) -> Result<Vec<LatticePoint>> {
        Ok(self.support()?.iter().map(TorusCharacter::projected).collect())
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

    /// Direct term sum with Neumaier-compensated accumulation.
    pub fn evaluate_unchecked(&self, a: &CMatrix) -> Complex64 {
        let cols = self.shape.cols;
        let maxe = self.degree as usize;
        let nvars = self.shape.len();
        let mut powers = vec![Complex64::new(1.0, 0.0); nvars * (maxe + 1)];
        for v in 0..nvars {
            let z = a[(v / cols, v % cols)];
            for e in 1..=maxe {
                powers[v * (maxe + 1) + e] = powers[v * (maxe + 1) + e - 1] * z;
            }
        }
        let (mut re, mut re_c, mut im, mut im_c) = (0.0, 0.0, 0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= powers[v * (maxe + 1) + k as usize];
                }
            }
            neumaier_add(&mut re, &mut re_c, t.re);
            neumaier_add(&mut im, &mut im_c, t.im);
        }
        Complex64::new(re + re_c, im + im_c)
    }

    /// `(σ·P)(A) := P(A σ)`.
    ///
    /// Under this convention `act(σ1, act(σ2, P)) = act(σ1 σ2, P)`.
    pub fn act(&self, sigma: &GroupElement) -> Result<Self> {
        if sigma.size() != self.shape.cols {
            return Err(Error::DimensionMismatch {
                expected: self.shape.cols,
                found: sigma.size(),
            });
        }
        if sigma.is_diagonal() {
            let diag: Vec<Complex64> = (0..sigma.size()).map(|i| sigma.matrix()[(i, i)]).collect();
            return Ok(self.act_diagonal(&diag));
        }
        let rows = self.shape.rows;
        let cols = self.shape.cols;
        let m = sigma.matrix();
        let mut cache: HashMap<Vec<u32>, Vec<ExpandedTerm>> = HashMap::new();
        let mut acc: BTreeMap<Exponent, (Complex64, f64)> = BTreeMap::new();

        for (e, c) in &self.terms {
            let mut partial: Vec<ExpandedTerm> = vec![(Vec::with_capacity(self.shape.len()), *c, c.norm())];
            for i in 0..rows {
                let row_exp = e[i * cols..(i + 1) * cols].to_vec();
                let factor = cache
                    .entry(row_exp.clone())
                    .or_insert_with(|| expand_row_factor(&row_exp, m))
                    .clone();
                let mut next = Vec::with_capacity(partial.len() * factor.len());
                for (pe, pc, pm) in &partial {
                    for (fe, fc, fm) in &factor {
                        let mut ne = pe.clone();
                        ne.extend_from_slice(fe);
                        next.push((ne, pc * fc, pm * fm));
                    }
                }
                partial = next;
            }
            for (ne, nc, nm) in partial {
                let slot = acc.entry(ne).or_insert((Complex64::new(0.0, 0.0), 0.0));
                slot.0 += nc;
                slot.1 += nm;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, (c, mag))| c.norm() > CANCELLATION_TOL * mag)
            .map(|(e, (c, _))| (e, c))
            .collect();
        Ok(SparsePolynomial {
            shape: self.shape,
            degree: self.degree,
            terms,
        })
    }

    /// Action of a diagonal matrix: each monomial is rescaled by its character.
    pub fn act_diagonal(&self, diag: &[Complex64]) -> Self {
        let mut out = self.clone();
        let cols = self.shape.cols;
        for (e, c) in out.terms.iter_mut() {
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    *c *= diag[v % cols].powu(k);
                }
            }
        }
        out.terms.retain(|_, v| v.norm() != 0.0);
        out
    }

    /// `log ||σ·P||²` for diagonal σ given `log|σ_jj|`, computed in log space.
    pub fn log_norm_sq_diagonal(&self, log_abs_diag: &[f64]) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let logs: Vec<f64> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let chi = self.column_degrees(e);
                let shift: f64 = chi.iter().zip(log_abs_diag).map(|(&a, &l)| a as f64 * l).sum();
                2.0 * c.norm().ln() + log_multi_factorial(e) + 2.0 * shift
            })
            .collect();
        Ok(log_sum_exp(&logs))
    }

    /// Gaussian (Bombieri-type) inner product: monomials are orthogonal with
    /// `||x^α||² = ∏ α!`.
    pub fn gaussian_inner(&self, other: &SparsePolynomial) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            if let Some(d) = other.terms.get(e) {
                s += c * d.conj() * log_multi_factorial(e).exp();
            }
        }
        s
    }

    pub fn log_gaussian_norm_sq(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let logs: Vec<f64> = self
            .terms
            .iter()
            .map(|(e, c)| 2.0 * c.norm().ln() + log_multi_factorial(e))
            .collect();
        Ok(log_sum_exp(&logs))
    }

    pub fn to_json(&self) -> PolynomialJson {
        let cols = self.shape.cols;
        PolynomialJson {
            shape: [self.shape.rows, self.shape.cols],
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exps: e.chunks(cols).map(<[u32]>::to_vec).collect(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        let shape = MatrixShape::new(j.shape[0], j.shape[1])?;
        let mut terms = Vec::with_capacity(j.terms.len());
        for (k, t) in j.terms.iter().enumerate() {
            if t.exps.len() != shape.rows || t.exps.iter().any(|r| r.len() != shape.cols) {
                return Err(Error::parse(
                    format!("terms[{k}].exps"),
                    format!("expected a {}x{} exponent matrix", shape.rows, shape.cols),
                ));
            }
            let e: Exponent = t.exps.iter().flatten().copied().collect();
            if e.iter().sum::<u32>() != j.degree {
                return Err(Error::parse(
                    format!("terms[{k}].exps"),
                    format!("total degree differs from declared degree {}", j.degree),
                ));
            }
            terms.push((e, Complex64::new(t.re, t.im)));
        }
        SparsePolynomial::new(shape, j.degree, terms)
    }

    /// Polynomial whose coefficients are rounded to the nearest Gaussian integer
    /// when within `tol` of it.
    pub fn snap_integers(&self, tol: f64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            let r = Complex64::new(c.re.round(), c.im.round());
            if (r - *c).norm() <= tol {
                *c = r;
            }
        }
        out.terms.retain(|_, v| v.norm() != 0.0);
        out
    }
}

/// Exponent, coefficient and the sum of term magnitudes that produced it.
type ExpandedTerm = (Vec<u32>, Complex64, f64);

fn expand_row_factor(row_exp: &[u32], m: &CMatrix) -> Vec<ExpandedTerm> {
    let n = row_exp.len();
    let mut cur: BTreeMap<Vec<u32>, (Complex64, f64)> = BTreeMap::new();
    cur.insert(vec![0; n], (Complex64::new(1.0, 0.0), 1.0));
    for (j, &k) in row_exp.iter().enumerate() {
        for _ in 0..k {
            let mut next: BTreeMap<Vec<u32>, (Complex64, f64)> = BTreeMap::new();
            for (e, (c, mag)) in &cur {
                for r in 0..n {
                    let s = m[(r, j)];
                    if s.norm() == 0.0 {
                        continue;
                    }
                    let mut ne = e.clone();
                    ne[r] += 1;
                    let slot = next.entry(ne).or_insert((Complex64::new(0.0, 0.0), 0.0));
                    slot.0 += c * s;
                    slot.1 += mag * s.norm();
                }
            }
            cur = next;
        }
    }
    cur.into_iter().map(|(e, (c, m))| (e, c, m)).collect()
}

pub(crate) fn log_multi_factorial(e: &[u32]) -> f64 {
    e.iter().filter(|&&k| k > 1).map(|&k| ln_factorial(k)).sum()
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (v, &p) in e.iter().enumerate() {
                if p > 0 {
                    let (i, j) = (v / self.shape.cols, v % self.shape.cols);
                    write!(f, "*x{i}{j}")?;
                    if p > 1 {
                        write!(f, "^{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Wire format: `{"shape":[k,m],"degree":d,"terms":[{"exps":[[...],...],"re":x,"im":y},...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub shape: [usize; 2],
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<Vec<u32>>,
    pub re: f64,
    pub im: f64,
}

/// Pairwise sums of the characters of `v` and `w`: the support of `v ⊗ w`.
pub fn tensor_support(v: &SparsePolynomial, w: &SparsePolynomial) -> Result<BTreeSet<TorusCharacter>> {
    if v.shape().cols != w.shape().cols {
        return Err(Error::DimensionMismatch {
            expected: v.shape().cols,
            found: w.shape().cols,
        });
    }
    let sv = v.support()?;
    let sw = w.support()?;
    Ok(sv.iter().flat_map(|a| sw.iter().map(move |b| a.add(b))).collect())
}

/// `(raw character) - (total/(N+1)) (1,...,1)`.
pub(crate) fn project(raw: &[u32]) -> LatticePoint {
    let n = raw.len() as i64;
    let total: i64 = raw.iter().map(|&x| x as i64).sum();
    LatticePoint::new(
        raw.iter()
            .map(|&x| BigRational::new((x as i64 * n - total).into(), n.into()))
            .collect(),
    )
}
