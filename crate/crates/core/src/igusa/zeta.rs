//! Gaussian local zeta functions `Z(P;s) = Γ(D)/Γ(D+ds) · E|P(Z)|^{2s}`.

use serde::{Deserialize, Serialize};

use super::gamma::{digamma, ln_gamma};
use super::mc::{joint_moments, mc_moment};
use crate::error::{Error, Result};
use crate::polyrep::Poly;

#[derive(Clone, Debug, Serialize)]
pub struct ZetaEstimate {
    pub s: f64,
    pub value: f64,
    pub log_value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub tail_warning: Option<String>,
}

/// `ln Γ(D) − ln Γ(D + d s)` with `D` the number of matrix entries.
pub fn log_gamma_prefactor(dim: usize, degree: u32, s: f64) -> f64 {
    let d = dim as f64;
    ln_gamma(d) - ln_gamma(d + f64::from(degree) * s)
}

pub fn zeta(p: &Poly, s: f64, samples: u64, seed: u64) -> Result<ZetaEstimate> {
    let m = mc_moment(p, s, samples, seed)?;
    if s == 0.0 {
        return Ok(ZetaEstimate {
            s,
            value: 1.0,
            log_value: 0.0,
            stderr: 0.0,
            samples: 0,
            seed,
            tail_warning: None,
        });
    }
    let f = log_gamma_prefactor(p.shape().len(), p.degree(), s).exp();
    let value = f * m.mean;
    Ok(ZetaEstimate {
        s,
        value,
        log_value: value.ln(),
        stderr: f * m.stderr,
        samples: m.samples,
        seed,
        tail_warning: m.tail_warning,
    })
}

/// Which closed form to use for Gaussian moments of determinants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetConvention {
    /// `E|det_n|^{2s} = ∏_{k=1}^n Γ(s+k)/Γ(k)`, the standard complex Gaussian.
    #[default]
    Standard,
    /// `(2π)^{−ns} ∏_{k=1}^n Γ(2s+k)/Γ(k)`.
    Paper,
}

impl std::str::FromStr for DetConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(DetConvention::Standard),
            "paper" => Ok(DetConvention::Paper),
            other => Err(Error::invalid(format!(
                "unknown convention '{other}' (expected standard or paper)"
            ))),
        }
    }
}

impl std::fmt::Display for DetConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetConvention::Standard => "standard",
            DetConvention::Paper => "paper",
        })
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_483_560_659_472_811;

/// `ln E|det_n|^{2s}` in the given convention.
pub fn det_log_moment(n: u32, s: f64, conv: DetConvention) -> f64 {
    let nf = f64::from(n);
    (1..=n)
        .map(|k| {
            let k = f64::from(k);
            match conv {
                DetConvention::Standard => ln_gamma(s + k) - ln_gamma(k),
                DetConvention::Paper => ln_gamma(2.0 * s + k) - ln_gamma(k),
            }
        })
        .sum::<f64>()
        - match conv {
            DetConvention::Standard => 0.0,
            DetConvention::Paper => nf * s * LN_2PI,
        }
}

/// `E|det_n|^{2s}`.
pub fn zeta_det_closed(n: u32, s: f64, conv: DetConvention) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s must be a finite real >= 0"));
    }
    Ok(det_log_moment(n, s, conv).exp())
}

/// `d/ds ln E|det_n|^{2s}` at `s = 0`, i.e. `E log|det_n|²` in the convention.
pub fn det_log_moment_derivative_zero(n: u32, conv: DetConvention) -> f64 {
    let psi: f64 = (1..=n).map(|k| digamma(f64::from(k))).sum();
    match conv {
        DetConvention::Standard => psi,
        DetConvention::Paper => 2.0 * psi - f64::from(n) * LN_2PI,
    }
}

/// `ln Z(det_n; s)` for `det_n` viewed on `n x cols` matrices (`D = n·cols`).
pub fn log_zeta_det(n: u32, cols: u64, s: f64, conv: DetConvention) -> f64 {
    let alpha = f64::from(n) * cols as f64;
    ln_gamma(alpha) - ln_gamma(alpha + f64::from(n) * s) + det_log_moment(n, s, conv)
}

/// `Z′(det_n; 0)` on `n x cols` matrices.
pub fn zeta_prime_det(n: u32, cols: u64, conv: DetConvention) -> f64 {
    let alpha = f64::from(n) * cols as f64;
    -f64::from(n) * digamma(alpha) + det_log_moment_derivative_zero(n, conv)
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaPrime {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub zero_resamples: u64,
}

/// `Z′(P;0) = E log|P(Z)|² − d·ψ(D)`; only the sampling term carries error.
pub fn zeta_prime_zero(p: &Poly, samples: u64, seed: u64) -> Result<ZetaPrime> {
    if p.degree() == 0 {
        let c = p.evaluate_unchecked(&crate::polyrep::CMatrix::zeros(p.shape().rows, p.shape().cols));
        if c.norm() == 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        return Ok(ZetaPrime {
            value: c.norm_sqr().ln(),
            stderr: 0.0,
            samples: 0,
            zero_resamples: 0,
        });
    }
    let j = joint_moments(p, samples, seed)?;
    let dpsi = f64::from(p.degree()) * digamma(p.shape().len() as f64);
    Ok(ZetaPrime {
        value: j.moments.mean_y - dpsi,
        stderr: j.moments.y().stderr(),
        samples: j.moments.n,
        zero_resamples: j.zero_resamples,
    })
}
