//! Small named polynomials used throughout: determinants and coordinate powers.

use num_complex::Complex64;

use super::{MatrixShape, SparsePolynomial};
use crate::error::{Error, Result};

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, i8)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// `det` of an `n x n` matrix of variables.
pub fn determinant(n: usize) -> Result<SparsePolynomial> {
    if n == 0 || n > 8 {
        return Err(Error::invalid("determinant size must be in 1..=8"));
    }
    let shape = MatrixShape::new(n, n)?;
    let terms = permutations(n).into_iter().map(|(p, sign)| {
        let mut e = vec![0u32; n * n];
        for (i, &j) in p.iter().enumerate() {
            e[shape.index(i, j)] = 1;
        }
        (e, Complex64::new(f64::from(sign), 0.0))
    });
    SparsePolynomial::new(shape, n as u32, terms)
}

/// `z_0^d` on `ℂ^{cols}` (shape `1 x cols`).
pub fn coordinate_power(cols: usize, d: u32) -> Result<SparsePolynomial> {
    let shape = MatrixShape::new(1, cols)?;
    let mut e = vec![0u32; cols];
    e[0] = d;
    SparsePolynomial::monomial(shape, e, Complex64::new(1.0, 0.0))
}

/// True if `p` is a nonzero multiple of the `n x n` determinant.
pub fn determinant_multiple(p: &SparsePolynomial) -> Option<(usize, Complex64)> {
    let s = p.shape();
    if s.rows != s.cols || p.degree() as usize != s.rows || s.rows > 8 {
        return None;
    }
    let det = determinant(s.rows).ok()?;
    if det.num_terms() != p.num_terms() {
        return None;
    }
    let (e0, c0) = det.terms().next()?;
    let scale = p.coefficient(e0) / c0;
    if scale.norm() == 0.0 {
        return None;
    }
    for (e, c) in det.terms() {
        if (p.coefficient(e) - c * scale).norm() > 1e-12 * scale.norm() {
            return None;
        }
    }
    Some((s.rows, scale))
}
