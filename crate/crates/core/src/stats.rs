//! Seed derivation, streaming moments and least-squares fits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Independent sub-seed for stream `index` of a run seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = (self.n + o.n) as f64;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n;
        self.n += o.n;
    }

    /// Sample variance (n − 1 denominator).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Running means, variances and covariance of a pair.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bivariate {
    pub n: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    m2x: f64,
    m2y: f64,
    cxy: f64,
}

impl Bivariate {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.m2x += dx * (x - self.mean_x);
        self.m2y += dy * (y - self.mean_y);
        self.cxy += dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, o: &Bivariate) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let dx = o.mean_x - self.mean_x;
        let dy = o.mean_y - self.mean_y;
        self.mean_x += dx * nb / n;
        self.mean_y += dy * nb / n;
        self.m2x += o.m2x + dx * dx * na * nb / n;
        self.m2y += o.m2y + dy * dy * na * nb / n;
        self.cxy += o.cxy + dx * dy * na * nb / n;
        self.n += o.n;
    }

    fn denom(&self) -> f64 {
        (self.n.max(2) - 1) as f64
    }

    pub fn var_x(&self) -> f64 {
        self.m2x / self.denom()
    }

    pub fn var_y(&self) -> f64 {
        self.m2y / self.denom()
    }

    pub fn cov(&self) -> f64 {
        self.cxy / self.denom()
    }

    /// Standard error of `a·mean_x + b·mean_y`.
    pub fn stderr_linear(&self, a: f64, b: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let v = a * a * self.var_x() + b * b * self.var_y() + 2.0 * a * b * self.cov();
        (v.max(0.0) / self.n as f64).sqrt()
    }

    pub fn x(&self) -> Welford {
        Welford {
            n: self.n,
            mean: self.mean_x,
            m2: self.m2x,
        }
    }

    pub fn y(&self) -> Welford {
        Welford {
            n: self.n,
            mean: self.mean_y,
            m2: self.m2y,
        }
    }
}

/// Ordinary least squares `y ≈ X β` with coefficient standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub residual_sd: f64,
}

pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let n = y.len();
    let p = design.first().map_or(0, Vec::len);
    if n == 0 || p == 0 || design.len() != n {
        return Err(Error::invalid("least squares needs matching nonempty data"));
    }
    if n < p {
        return Err(Error::invalid("least squares is underdetermined"));
    }
    let x = DMatrix::from_fn(n, p, |i, j| design[i][j]);
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::invalid("least squares design is singular"))?;
    let beta = &inv * x.transpose() * &yv;
    let resid = &yv - &x * &beta;
    let dof = n.saturating_sub(p);
    let s2 = if dof > 0 {
        resid.norm_squared() / dof as f64
    } else {
        0.0
    };
    Ok(LinearFit {
        coefficients: beta.iter().copied().collect(),
        stderrs: (0..p).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt()).collect(),
        residual_sd: s2.sqrt(),
    })
}

/// `y ≈ intercept + slope·x`; returns `(slope, intercept, slope stderr)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let design: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    let fit = least_squares(&design, y)?;
    Ok((fit.coefficients[1], fit.coefficients[0], fit.stderrs[1]))
}
