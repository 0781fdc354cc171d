//! Resultants and hyperdiscriminants of rational normal curves, the
//! normalized pair `(R_X^{⊗deg Δ}, Δ_X^{⊗deg R})`, and height discrepancies.
//!
//! A row `(a_0, …, a_d)` is the binary form `f_a = Σ a_i s^{d−i} t^i`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::igusa::{height, loglog_exponent, DetConvention, HeightReport};
use crate::polyrep::{BlackBoxPolynomial, CMatrix, FormalPower, GroupElement, MatrixShape, Poly, SparsePolynomial};
use crate::stats::derive_seed;

/// Largest `d` with a symbolic resultant.
pub const SYMBOLIC_RESULTANT_MAX: u32 = 4;
/// Largest `d` with a symbolic hyperdiscriminant.
pub const SYMBOLIC_DISCRIMINANT_MAX: u32 = 5;

/// A linear form `Σ c · x_{var}` in the matrix entries.
type LinearForm = Vec<(usize, f64)>;

/// Sylvester matrix of two binary forms of degree `m` given as coefficient
/// vectors of linear forms (coefficient of `s^{m−i} t^i` at index `i`).
fn sylvester(f: &[LinearForm], g: &[LinearForm]) -> Vec<Vec<LinearForm>> {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![Vec::new(); size];
        for (i, c) in f.iter().enumerate() {
            row[r + i] = c.clone();
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![Vec::new(); size];
        for (i, c) in g.iter().enumerate() {
            row[r + i] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Determinant of a matrix of linear forms, by Laplace expansion along rows
/// memoized on the set of used columns.
fn symbolic_determinant(m: &[Vec<LinearForm>], shape: MatrixShape) -> Result<SparsePolynomial> {
    let n = m.len();
    if n > 20 {
        return Err(Error::invalid("symbolic determinant limited to 20 rows"));
    }
    let entry = |r: usize, c: usize| -> Option<SparsePolynomial> {
        let form = &m[r][c];
        if form.is_empty() {
            return None;
        }
        let mut p = SparsePolynomial::zero(shape, 1);
        for &(var, coeff) in form {
            let x = SparsePolynomial::variable(shape, var / shape.cols, var % shape.cols);
            p = p
                .add(&x.scale(Complex64::new(coeff, 0.0)))
                .expect("same shape and degree");
        }
        (!p.is_zero()).then_some(p)
    };
    let entries: Vec<Vec<Option<SparsePolynomial>>> = (0..n).map(|r| (0..n).map(|c| entry(r, c)).collect()).collect();
    let mut memo: HashMap<u32, SparsePolynomial> = HashMap::new();
    fn minor(
        used: u32,
        n: usize,
        shape: MatrixShape,
        entries: &[Vec<Option<SparsePolynomial>>],
        memo: &mut HashMap<u32, SparsePolynomial>,
    ) -> SparsePolynomial {
        let row = used.count_ones() as usize;
        if row == n {
            return SparsePolynomial::constant(shape, Complex64::new(1.0, 0.0));
        }
        if let Some(p) = memo.get(&used) {
            return p.clone();
        }
        let mut acc = SparsePolynomial::zero(shape, (n - row) as u32);
        let mut free_before = 0;
        for c in 0..n {
            if used & (1 << c) != 0 {
                continue;
            }
            if let Some(e) = &entries[row][c] {
                let sub = minor(used | (1 << c), n, shape, entries, memo);
                if !sub.is_zero() {
                    let mut term = e.mul(&sub).expect("same shape");
                    if free_before % 2 == 1 {
                        term = term.scale(Complex64::new(-1.0, 0.0));
                    }
                    acc = acc.add(&term).expect("same degree");
                }
            }
            free_before += 1;
        }
        memo.insert(used, acc.clone());
        acc
    }
    Ok(minor(0, n, shape, &entries, &mut memo))
}

/// Numeric Sylvester determinant of two coefficient vectors.
fn sylvester_det(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut s = CMatrix::zeros(size, size);
    for r in 0..n {
        for (i, &c) in f.iter().enumerate() {
            s[(r, r + i)] = c;
        }
    }
    for r in 0..m {
        for (i, &c) in g.iter().enumerate() {
            s[(n + r, r + i)] = c;
        }
    }
    s.determinant()
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("rational normal curve needs d >= 2 (got {d})")));
    }
    Ok(())
}

/// `Res(f_a, f_b)` for the rows `a`, `b` of a `2 x (d+1)` matrix; degree `2d`.
pub fn rnc_resultant(d: u32) -> Result<Poly> {
    check_degree(d)?;
    let cols = d as usize + 1;
    let shape = MatrixShape::new(2, cols)?;
    if d <= SYMBOLIC_RESULTANT_MAX {
        let f: Vec<LinearForm> = (0..cols).map(|i| vec![(i, 1.0)]).collect();
        let g: Vec<LinearForm> = (0..cols).map(|i| vec![(cols + i, 1.0)]).collect();
        return Ok(symbolic_determinant(&sylvester(&f, &g), shape)?.into());
    }
    let eval = Arc::new(move |a: &CMatrix| {
        let f: Vec<Complex64> = (0..cols).map(|i| a[(0, i)]).collect();
        let g: Vec<Complex64> = (0..cols).map(|i| a[(1, i)]).collect();
        sylvester_det(&f, &g)
    });
    Ok(BlackBoxPolynomial::trusted(shape, 2 * d, format!("sylvester-resultant(d={d})"), eval).into())
}

/// Coefficients of `∂f/∂s` and `∂f/∂t` as linear forms in `a_0..a_d`.
fn partials(d: usize) -> (Vec<LinearForm>, Vec<LinearForm>) {
    let fs = (0..d).map(|i| vec![(i, (d - i) as f64)]).collect();
    let ft = (1..=d).map(|i| vec![(i, i as f64)]).collect();
    (fs, ft)
}

/// `(−1)^{d(d−1)/2} d^{d−2}`: the factor between `Res(∂_s f, ∂_t f)` and the discriminant.
pub fn discriminant_constant(d: u32) -> f64 {
    let sign = if (d * (d - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * f64::from(d).powi(d as i32 - 2)
}

/// Discriminant of the binary `d`-form on `1 x (d+1)`; degree `2d − 2`.
///
/// The symbolic form is scaled so its lexicographically first monomial has
/// coefficient `+1`; the evaluated form divides `Res(∂_s f, ∂_t f)` by
/// [`discriminant_constant`].
pub fn rnc_hyperdiscriminant(d: u32) -> Result<Poly> {
    check_degree(d)?;
    let cols = d as usize + 1;
    let shape = MatrixShape::new(1, cols)?;
    if d <= SYMBOLIC_DISCRIMINANT_MAX {
        let (fs, ft) = partials(d as usize);
        let p = symbolic_determinant(&sylvester(&fs, &ft), shape)?;
        let (_, lead) = p.terms().next().ok_or(Error::ZeroPolynomial)?;
        return Ok(p.scale(lead.inv()).into());
    }
    let constant = discriminant_constant(d);
    let eval = Arc::new(move |a: &CMatrix| {
        let dd = cols - 1;
        let fs: Vec<Complex64> = (0..dd).map(|i| a[(0, i)] * (dd - i) as f64).collect();
        let ft: Vec<Complex64> = (1..=dd).map(|i| a[(0, i)] * i as f64).collect();
        sylvester_det(&fs, &ft) / constant
    });
    Ok(BlackBoxPolynomial::trusted(shape, 2 * d - 2, format!("binary-discriminant(d={d})"), eval).into())
}

/// Evaluates `Res(∂_s f, ∂_t f) / constant` directly, bypassing the symbolic path.
pub fn discriminant_by_sylvester(a: &[Complex64]) -> Complex64 {
    let d = a.len() - 1;
    let fs: Vec<Complex64> = (0..d).map(|i| a[i] * (d - i) as f64).collect();
    let ft: Vec<Complex64> = (1..=d).map(|i| a[i] * i as f64).collect();
    sylvester_det(&fs, &ft) / discriminant_constant(d as u32)
}

/// Evaluates `Res(f, g)` by a numeric Sylvester determinant.
pub fn resultant_by_sylvester(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    sylvester_det(f, g)
}

#[derive(Clone, Debug)]
pub struct VarietyExample {
    pub family: String,
    /// Dimension of `X`.
    pub n: u32,
    /// Ambient projective dimension.
    pub n_proj: u32,
    pub d: u32,
    pub resultant: Poly,
    pub hyperdiscriminant: Poly,
    pub deg_r: u32,
    pub deg_delta: u32,
}

impl VarietyExample {
    /// The rational normal curve of degree `d` in `ℙ^d` (the plane conic at `d = 2`).
    pub fn rational_normal_curve(d: u32) -> Result<Self> {
        let resultant = rnc_resultant(d)?;
        let hyperdiscriminant = rnc_hyperdiscriminant(d)?;
        Ok(VarietyExample {
            family: "rnc".into(),
            n: 1,
            n_proj: d,
            d,
            deg_r: resultant.degree(),
            deg_delta: hyperdiscriminant.degree(),
            resultant,
            hyperdiscriminant,
        })
    }

    /// `d(n+1)`, the expected degree of the resultant.
    pub fn expected_deg_r(&self) -> u32 {
        self.d * (self.n + 1)
    }

    /// `μ` solved from `deg Δ_X = n(n+1)d − dμ` with the measured degree; an inference only.
    pub fn inferred_mu(&self) -> f64 {
        let n = f64::from(self.n);
        let d = f64::from(self.d);
        (n * (n + 1.0) * d - f64::from(self.deg_delta)) / d
    }

    pub fn normalized_pair(&self) -> Result<NormalizedPair> {
        Ok(NormalizedPair {
            r: FormalPower::new(self.resultant.clone(), self.deg_delta)?,
            delta: FormalPower::new(self.hyperdiscriminant.clone(), self.deg_r)?,
        })
    }
}

/// `R = R_X^{⊗deg Δ_X}`, `Δ = Δ_X^{⊗deg R_X}`: both of total degree `deg R·deg Δ`.
#[derive(Clone, Debug)]
pub struct NormalizedPair {
    pub r: FormalPower,
    pub delta: FormalPower,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarietyHeights {
    pub hf: HeightReport,
    pub hdelta: HeightReport,
}

/// `h_F = h(R_X)` and `h_Δ = h(Δ_X)`, with seeds derived from `seed`.
pub fn variety_heights(ex: &VarietyExample, samples: u64, seed: u64, conv: DetConvention) -> Result<VarietyHeights> {
    heights_of(&ex.resultant, &ex.hyperdiscriminant, samples, seed, conv)
}

fn heights_of(r: &Poly, delta: &Poly, samples: u64, seed: u64, conv: DetConvention) -> Result<VarietyHeights> {
    Ok(VarietyHeights {
        hf: height(r, samples, derive_seed(seed, 0), conv)?,
        hdelta: height(delta, samples, derive_seed(seed, 1), conv)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyRow {
    pub d: u32,
    pub deg_r: u32,
    pub deg_delta: u32,
    pub hf: HeightReport,
    pub hdelta: HeightReport,
    /// `|deg Δ·h_F − deg R·h_Δ|`.
    pub delta: f64,
    pub delta_stderr: f64,
    pub delta_over_d2: f64,
}

fn assemble_row(d: u32, deg_r: u32, deg_delta: u32, h: VarietyHeights) -> DiscrepancyRow {
    let a = f64::from(deg_delta);
    let b = f64::from(deg_r);
    let delta = (a * h.hf.h - b * h.hdelta.h).abs();
    let delta_stderr = (a * h.hf.stderr).hypot(b * h.hdelta.stderr);
    DiscrepancyRow {
        d,
        deg_r,
        deg_delta,
        hf: h.hf,
        hdelta: h.hdelta,
        delta,
        delta_stderr,
        delta_over_d2: delta / f64::from(d * d),
    }
}

pub fn discrepancy_row(ex: &VarietyExample, samples: u64, seed: u64, conv: DetConvention) -> Result<DiscrepancyRow> {
    let h = variety_heights(ex, samples, seed, conv)?;
    Ok(assemble_row(ex.d, ex.deg_r, ex.deg_delta, h))
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyTable {
    pub rows: Vec<DiscrepancyRow>,
    /// Least-squares exponent of `delta ~ d^p` with its stderr; needs 3 rows.
    pub exponent: Option<(f64, f64)>,
}

/// Rows for the rational normal curves; row `d` uses seed `derive_seed(seed, d)`.
pub fn discrepancy_table(ds: &[u32], samples: u64, seed: u64, conv: DetConvention) -> Result<DiscrepancyTable> {
    if ds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<DiscrepancyRow> = ds
        .par_iter()
        .map(|&d| {
            let ex = VarietyExample::rational_normal_curve(d)?;
            discrepancy_row(&ex, samples, derive_seed(seed, u64::from(d)), conv)
        })
        .collect::<Result<_>>()?;
    let exponent = if rows.len() >= 3 && rows.iter().all(|r| r.delta > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| f64::from(r.d)).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.delta).collect();
        Some(loglog_exponent(&x, &y)?)
    } else {
        None
    };
    Ok(DiscrepancyTable { rows, exponent })
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalConstantProbe {
    /// Max over the supplied elements: a lower bound for the optimal constant.
    pub lower_bound: f64,
    pub per_sigma: Vec<f64>,
}

/// `max_σ |deg Δ·h(σ·R_X) − deg R·h(σ·Δ_X)|` over `sigmas`. The forms are
/// acted on, not the variety; every σ uses the same seed.
pub fn optimal_constant_probe(
    ex: &VarietyExample,
    sigmas: &[GroupElement],
    samples: u64,
    seed: u64,
    conv: DetConvention,
) -> Result<OptimalConstantProbe> {
    if sigmas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let per_sigma: Vec<f64> = sigmas
        .par_iter()
        .map(|s| {
            let r = ex.resultant.act(s)?;
            let delta = ex.hyperdiscriminant.act(s)?;
            let h = heights_of(&r, &delta, samples, seed, conv)?;
            Ok(assemble_row(ex.d, ex.deg_r, ex.deg_delta, h).delta)
        })
        .collect::<Result<_>>()?;
    let lower_bound = per_sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(OptimalConstantProbe { lower_bound, per_sigma })
}
