//! Heights `h(P) = −log Z(P;1) + Z′(P;0)` and their determinant limits.

use serde::Serialize;

use super::gamma::{digamma, harmonic, ln_gamma, EULER_GAMMA};
use super::mc::joint_moments;
use super::zeta::{
    det_log_moment, det_log_moment_derivative_zero, log_gamma_prefactor, log_zeta_det, zeta_prime_det, DetConvention,
};
use crate::error::{Error, Result};
use crate::polyrep::builtins::determinant_multiple;
use crate::polyrep::{FormalPower, Poly, SparsePolynomial};
use crate::stats::line_fit;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeightMethod {
    ClosedForm,
    MonteCarlo,
    /// `Z(P;1)` exact from the Gaussian norm, `Z′(P;0)` sampled.
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightReport {
    pub h: f64,
    pub log_z1: f64,
    pub zprime0: f64,
    pub stderr: f64,
    pub ci_halfwidth: f64,
    pub method: HeightMethod,
    pub samples: u64,
    pub seed: u64,
    pub zero_resamples: u64,
    /// For determinants, the height under the other moment convention.
    pub alternate_convention: Option<(DetConvention, f64)>,
}

impl HeightReport {
    fn assemble(log_z1: f64, zprime0: f64, stderr: f64, method: HeightMethod) -> Self {
        HeightReport {
            h: -log_z1 + zprime0,
            log_z1,
            zprime0,
            stderr,
            ci_halfwidth: Z95 * stderr,
            method,
            samples: 0,
            seed: 0,
            zero_resamples: 0,
            alternate_convention: None,
        }
    }

    /// `h(P^{⊗k}) = k·h(P)`.
    pub fn scaled(&self, k: u32) -> HeightReport {
        let k = f64::from(k);
        HeightReport {
            h: k * self.h,
            log_z1: k * self.log_z1,
            zprime0: k * self.zprime0,
            stderr: k * self.stderr,
            ci_halfwidth: k * self.ci_halfwidth,
            alternate_convention: self.alternate_convention.map(|(c, h)| (c, k * h)),
            ..self.clone()
        }
    }
}

/// Closed form for `c·z^α` on a space of `dim` entries.
pub fn height_monomial_closed(alpha: &[u32], log_abs_c_sq: f64) -> HeightReport {
    let dim = alpha.len();
    let d: u32 = alpha.iter().sum();
    let df = f64::from(d);
    let log_moment: f64 = alpha.iter().map(|&a| ln_gamma(f64::from(a) + 1.0)).sum();
    let log_z1 = log_gamma_prefactor(dim, d, 1.0) + log_moment + log_abs_c_sq;
    let zprime0 = if d == 0 {
        log_abs_c_sq
    } else {
        -EULER_GAMMA * df - df * digamma(dim as f64) + log_abs_c_sq
    };
    HeightReport::assemble(log_z1, zprime0, 0.0, HeightMethod::ClosedForm)
}

/// Closed form for `c·det_n` on `n x n` matrices.
pub fn height_det_closed(n: u32, log_abs_c_sq: f64, conv: DetConvention) -> HeightReport {
    let dim = (n * n) as usize;
    let log_z1 = log_gamma_prefactor(dim, n, 1.0) + det_log_moment(n, 1.0, conv) + log_abs_c_sq;
    let zprime0 = -f64::from(n) * digamma(dim as f64) + det_log_moment_derivative_zero(n, conv) + log_abs_c_sq;
    HeightReport::assemble(log_z1, zprime0, 0.0, HeightMethod::ClosedForm)
}

fn height_sparse(p: &SparsePolynomial, samples: u64, seed: u64, conv: DetConvention) -> Result<HeightReport> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some((n, c)) = determinant_multiple(p) {
        let n = n as u32;
        let mut r = height_det_closed(n, c.norm_sqr().ln(), conv);
        let other = match conv {
            DetConvention::Standard => DetConvention::Paper,
            DetConvention::Paper => DetConvention::Standard,
        };
        r.alternate_convention = Some((other, height_det_closed(n, c.norm_sqr().ln(), other).h));
        return Ok(r);
    }
    if p.num_terms() == 1 {
        let (e, c) = p.terms().next().expect("one term");
        return Ok(height_monomial_closed(e, c.norm_sqr().ln()));
    }
    let log_z1 = log_gamma_prefactor(p.shape().len(), p.degree(), 1.0) + p.log_gaussian_norm_sq()?;
    let j = joint_moments(&Poly::Sparse(p.clone()), samples, seed)?;
    let zprime0 = j.moments.mean_y - f64::from(p.degree()) * digamma(p.shape().len() as f64);
    let mut r = HeightReport::assemble(log_z1, zprime0, j.moments.y().stderr(), HeightMethod::Mixed);
    r.samples = j.moments.n;
    r.seed = seed;
    r.zero_resamples = j.zero_resamples;
    Ok(r)
}

fn height_sampled(p: &Poly, samples: u64, seed: u64) -> Result<HeightReport> {
    let j = joint_moments(p, samples, seed)?;
    let m = j.moments;
    let log_z1 = log_gamma_prefactor(p.shape().len(), p.degree(), 1.0) + m.mean_x.ln();
    let zprime0 = m.mean_y - f64::from(p.degree()) * digamma(p.shape().len() as f64);
    // Delta method on −ln(mean_x) + mean_y.
    let stderr = m.stderr_linear(-1.0 / m.mean_x, 1.0);
    let mut r = HeightReport::assemble(log_z1, zprime0, stderr, HeightMethod::MonteCarlo);
    r.samples = m.n;
    r.seed = seed;
    r.zero_resamples = j.zero_resamples;
    Ok(r)
}

/// Height by the cheapest available route: closed form for monomials and
/// determinants, exact norm plus sampling for other sparse polynomials,
/// sampling for black boxes.
pub fn height(p: &Poly, samples: u64, seed: u64, conv: DetConvention) -> Result<HeightReport> {
    match p {
        Poly::Sparse(s) => height_sparse(s, samples, seed, conv),
        Poly::BlackBox(_) => height_sampled(p, samples, seed),
    }
}

/// Height through the pure Monte Carlo route regardless of structure.
pub fn height_monte_carlo(p: &Poly, samples: u64, seed: u64) -> Result<HeightReport> {
    height_sampled(p, samples, seed)
}

/// `h(P^{⊗k}) = k·h(P)`.
pub fn height_formal(p: &FormalPower, samples: u64, seed: u64, conv: DetConvention) -> Result<HeightReport> {
    Ok(height(p.base(), samples, seed, conv)?.scaled(p.exponent()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsAudit {
    pub report: HeightReport,
    pub n_proj: usize,
    pub degree: u32,
    /// `−d·Σ_{j=1}^{N−1} 1/j` (empty sum at `N = 1`).
    pub lower_printed: f64,
    /// `−d·Σ_{j=1}^{N} 1/j`.
    pub lower_full: f64,
    pub upper: f64,
    pub within_printed: bool,
    pub within_full: bool,
    pub below_upper: bool,
}

/// Compares `h(P)` for `P` on `ℂ^{N+1}` with the stated two-sided bounds.
/// Violations are reported, never raised.
pub fn height_bounds_audit(p: &Poly, samples: u64, seed: u64) -> Result<BoundsAudit> {
    let shape = p.shape();
    if shape.rows != 1 || shape.cols < 2 {
        return Err(Error::invalid("bounds audit needs a polynomial on C^{N+1}, N >= 1"));
    }
    let report = height(p, samples, seed, DetConvention::Standard)?;
    let n = shape.cols - 1;
    let d = f64::from(p.degree());
    let lower_printed = -d * harmonic(n as u64 - 1);
    let lower_full = -d * harmonic(n as u64);
    let tol = 3.0 * report.stderr + 1e-12;
    Ok(BoundsAudit {
        n_proj: n,
        degree: p.degree(),
        lower_printed,
        lower_full,
        upper: 0.0,
        within_printed: report.h >= lower_printed - tol && report.h <= tol,
        within_full: report.h >= lower_full - tol && report.h <= tol,
        below_upper: report.h <= tol,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DegenerationLimits {
    pub n: u32,
    pub n_proj: u64,
    pub d: u64,
    pub deg_r: u64,
    pub deg_delta: u64,
    pub convention: DetConvention,
    pub hf: f64,
    pub hdelta: f64,
    pub delta: f64,
    pub log_z_f: f64,
    pub log_z_delta: f64,
    pub hf_leading: f64,
    pub hf_remainder: f64,
    pub hdelta_leading: f64,
    pub hdelta_remainder: f64,
}

/// Limits of the two heights along a generic degeneration, from determinant
/// zeta functions: `h_F → (deg_R/(n+1)) Z′(det_{n+1};0) − log Z(det_{n+1};d)`
/// and `h_Δ → (deg_Δ/n) Z′(det_n;0) − log Z(det_n; deg_Δ/n)`.
pub fn degeneration_limit_heights(
    n: u32,
    n_proj: u64,
    d: u64,
    deg_r: u64,
    deg_delta: u64,
    conv: DetConvention,
) -> Result<DegenerationLimits> {
    if n == 0 || n_proj == 0 || d == 0 || deg_r == 0 || deg_delta == 0 {
        return Err(Error::invalid("degeneration parameters must be positive"));
    }
    let cols = n_proj + 1;
    let log_z_f = log_zeta_det(n + 1, cols, d as f64, conv);
    let hf = deg_r as f64 / f64::from(n + 1) * zeta_prime_det(n + 1, cols, conv) - log_z_f;
    let s_delta = deg_delta as f64 / f64::from(n);
    let log_z_delta = log_zeta_det(n, cols, s_delta, conv);
    let hdelta = deg_delta as f64 / f64::from(n) * zeta_prime_det(n, cols, conv) - log_z_delta;
    let delta = (deg_delta as f64 * hf - deg_r as f64 * hdelta).abs();
    let ld = (d as f64).ln();
    let hf_leading = -2.0 * deg_r as f64 * ld;
    let hdelta_leading = -2.0 * deg_delta as f64 * ld;
    if !(hf.is_finite() && hdelta.is_finite()) {
        return Err(Error::invalid("degeneration limit overflowed"));
    }
    Ok(DegenerationLimits {
        n,
        n_proj,
        d,
        deg_r,
        deg_delta,
        convention: conv,
        hf,
        hdelta,
        delta,
        log_z_f,
        log_z_delta,
        hf_leading,
        hf_remainder: hf - hf_leading,
        hdelta_leading,
        hdelta_remainder: hdelta - hdelta_leading,
    })
}

/// Degeneration limits for rational normal curves (`n = 1`, `N = d`,
/// `deg R = 2d`, `deg Δ = 2d − 2`).
pub fn rnc_degeneration(d: u64, conv: DetConvention) -> Result<DegenerationLimits> {
    if d < 2 {
        return Err(Error::invalid("rational normal curves need d >= 2"));
    }
    degeneration_limit_heights(1, d, d, 2 * d, 2 * d - 2, conv)
}

/// Fitted coefficients `c` in `y ≈ c·deg_R·log d + a·d + b` over a range of `d`.
#[derive(Clone, Debug, Serialize)]
pub struct LeadingFit {
    pub convention: DetConvention,
    pub d_min: u64,
    pub d_max: u64,
    pub log_z_coefficient: f64,
    pub hf_coefficient: f64,
    pub hdelta_coefficient: f64,
}

pub fn rnc_leading_fit(d_min: u64, d_max: u64, conv: DetConvention) -> Result<LeadingFit> {
    if d_min < 2 || d_max < d_min + 3 {
        return Err(Error::invalid("need at least four values of d >= 2"));
    }
    let rows: Vec<DegenerationLimits> = (d_min..=d_max)
        .map(|d| rnc_degeneration(d, conv))
        .collect::<Result<_>>()?;
    let fit = |deg: &dyn Fn(&DegenerationLimits) -> f64, y: &dyn Fn(&DegenerationLimits) -> f64| -> Result<f64> {
        let design: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![deg(r) * (r.d as f64).ln(), r.d as f64, 1.0])
            .collect();
        let ys: Vec<f64> = rows.iter().map(y).collect();
        Ok(crate::stats::least_squares(&design, &ys)?.coefficients[0])
    };
    Ok(LeadingFit {
        convention: conv,
        d_min,
        d_max,
        log_z_coefficient: fit(&|r| r.deg_r as f64, &|r| r.log_z_f)?,
        hf_coefficient: fit(&|r| r.deg_r as f64, &|r| r.hf)?,
        hdelta_coefficient: fit(&|r| r.deg_delta as f64, &|r| r.hdelta)?,
    })
}

/// Max/min of `delta/d²` over a range of `d`, with the values.
pub fn rnc_delta_ratio(d_min: u64, d_max: u64, conv: DetConvention) -> Result<(f64, Vec<(u64, f64)>)> {
    let vals: Vec<(u64, f64)> = (d_min..=d_max)
        .map(|d| Ok((d, rnc_degeneration(d, conv)?.delta / (d * d) as f64)))
        .collect::<Result<_>>()?;
    let max = vals.iter().map(|v| v.1).fold(f64::MIN, f64::max);
    let min = vals.iter().map(|v| v.1).fold(f64::MAX, f64::min);
    Ok((max / min, vals))
}

/// Least-squares exponent of `y ~ x^p` on log–log axes, with its stderr.
pub fn loglog_exponent(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, _, se) = line_fit(&lx, &ly)?;
    Ok((slope, se))
}
