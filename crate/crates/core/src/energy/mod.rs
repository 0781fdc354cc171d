//! Finite-dimensional Mabuchi and Aubin functionals of a pair.
//!
//! `ν(σ) = log ||σ·w||²/||w||² − log ||σ·v||²/||v||²` and
//! `J_v(σ) = deg·log(||σ||²/(N+1)) − log ||σ·v||²/||v||²`, with the Gaussian
//! norm `||x^α||² = ∏ α!` and `||σ||² = Tr(σσ*)`. Everything is computed in
//! log space; formal exponents multiply log-ratios.

mod orbit;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::igusa::mc_moment;
use crate::pairstab::{module_degree, PairSpec, Weighted};
use crate::polyrep::{log_sum_exp, CMatrix, FormalPower, GroupElement, OnePSG, Poly, SparsePolynomial};
use crate::stats::{derive_seed, line_fit};

pub use orbit::{fs_distance, nu_infimum_sl2, orbit_distance, NuInfimum, OrbitBudget, OrbitDistance, Sl2Grid};

#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// `E|P(Z)|²`: exact for sparse polynomials, sampled for black boxes.
pub fn gaussian_norm_sq(p: &Poly, samples: u64, seed: u64) -> Result<NormEstimate> {
    match p {
        Poly::Sparse(s) => Ok(NormEstimate {
            value: s.log_gaussian_norm_sq()?.exp(),
            stderr: 0.0,
            exact: true,
        }),
        Poly::BlackBox(_) => {
            let m = mc_moment(p, 1.0, samples, seed)?;
            Ok(NormEstimate {
                value: m.mean,
                stderr: m.stderr,
                exact: false,
            })
        }
    }
}

/// A polynomial (or formal power) with its Gaussian log-norm cached.
#[derive(Clone, Debug)]
pub struct NormedVector {
    poly: FormalPower,
    base_log_norm_sq: f64,
}

impl NormedVector {
    pub fn new(p: impl Into<FormalPower>) -> Result<Self> {
        let poly = p.into();
        let base_log_norm_sq = poly.sparse_base()?.log_gaussian_norm_sq()?;
        Ok(NormedVector { poly, base_log_norm_sq })
    }

    pub fn poly(&self) -> &FormalPower {
        &self.poly
    }

    fn k(&self) -> f64 {
        f64::from(self.poly.exponent())
    }

    pub fn log_norm_sq(&self) -> f64 {
        self.k() * self.base_log_norm_sq
    }

    fn base(&self) -> &SparsePolynomial {
        self.poly.sparse_base().expect("checked at construction")
    }

    /// `log ||σ·x||²/||x||²`.
    pub fn log_ratio(&self, sigma: &GroupElement) -> Result<f64> {
        if sigma.is_diagonal() {
            let logs: Vec<f64> = (0..sigma.size()).map(|i| sigma.matrix()[(i, i)].norm().ln()).collect();
            return self.log_ratio_diagonal(&logs);
        }
        let acted = self.base().act(sigma)?;
        Ok(self.k() * (log_norm_or_neg_inf(&acted) - self.base_log_norm_sq))
    }

    /// `log ||σ·x||²/||x||²` for `σ = diag(e^{l_0}, …)`.
    pub fn log_ratio_diagonal(&self, log_abs_diag: &[f64]) -> Result<f64> {
        let l = self.base().log_norm_sq_diagonal(log_abs_diag)?;
        Ok(self.k() * (l - self.base_log_norm_sq))
    }

    /// `log ||σ(t)·x||²/||x||²` along the ray `σ(t) = g λ(t) g⁻¹`, `t = e^{log_t}`.
    pub fn log_ratio_ray(&self, ray: &Ray, log_t: f64) -> Result<f64> {
        let Some(g) = &ray.g else {
            let logs: Vec<f64> = ray.lambda.exponents().iter().map(|&e| e as f64 * log_t).collect();
            return self.log_ratio_diagonal(&logs);
        };
        let q = self.base().act(&ray.g_inv)?;
        if q.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        // Rescale λ(t) so the largest character factor is 1, act by g, undo.
        let lam = ray.lambda.exponents();
        let shift = q
            .support()?
            .iter()
            .map(|a| a.pair(lam) as f64 * log_t)
            .fold(f64::NEG_INFINITY, f64::max);
        let deg = f64::from(q.degree());
        let per_col = if deg > 0.0 { shift / deg } else { 0.0 };
        let diag: Vec<Complex64> = lam
            .iter()
            .map(|&e| Complex64::new((e as f64 * log_t - per_col).exp(), 0.0))
            .collect();
        let scaled = q.act_diagonal(&diag).act(g)?;
        Ok(self.k() * (log_norm_or_neg_inf(&scaled) + 2.0 * shift - self.base_log_norm_sq))
    }
}

fn log_norm_or_neg_inf(p: &SparsePolynomial) -> f64 {
    p.log_gaussian_norm_sq().unwrap_or(f64::NEG_INFINITY)
}

/// `t -> g·λ(t)·g⁻¹` for real `t > 0`; `g = None` is the diagonal torus.
#[derive(Clone, Debug)]
pub struct Ray {
    pub lambda: OnePSG,
    pub g: Option<GroupElement>,
    g_inv: GroupElement,
}

impl Ray {
    pub fn diagonal(lambda: OnePSG) -> Self {
        let n = lambda.dim();
        Ray {
            lambda,
            g: None,
            g_inv: GroupElement::identity(n),
        }
    }

    pub fn conjugated(lambda: OnePSG, g: GroupElement) -> Result<Self> {
        if g.size() != lambda.dim() {
            return Err(Error::DimensionMismatch {
                expected: lambda.dim(),
                found: g.size(),
            });
        }
        let g_inv = g.inverse();
        Ok(Ray {
            lambda,
            g: Some(g),
            g_inv,
        })
    }

    /// The group element at `t = e^{log_t}`.
    pub fn at(&self, log_t: f64) -> GroupElement {
        let d = self.lambda.at(Complex64::new(log_t.exp(), 0.0));
        match &self.g {
            None => d,
            Some(g) => g.mul(&d).mul(&self.g_inv),
        }
    }

    /// `log Tr(σσ*)` at `t = e^{log_t}`, stable for extreme `t`.
    pub fn log_trace_norm_sq(&self, log_t: f64) -> f64 {
        let lam = self.lambda.exponents();
        let logs: Vec<f64> = lam.iter().map(|&e| 2.0 * e as f64 * log_t).collect();
        match &self.g {
            None => log_sum_exp(&logs),
            Some(g) => {
                let s = lam.iter().map(|&e| e as f64 * log_t).fold(f64::NEG_INFINITY, f64::max);
                let n = lam.len();
                let d = CMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        Complex64::new((lam[i] as f64 * log_t - s).exp(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                let m = g.matrix() * d * self.g_inv.matrix();
                m.norm_squared().ln() + 2.0 * s
            }
        }
    }
}

/// `ν_{(v,w)}(σ)`.
pub fn nu_pair(pair: &PairSpec, sigma: &GroupElement) -> Result<f64> {
    Ok(energy(pair, sigma)?.nu)
}

/// `J_v(σ)`; `degree` defaults to the module degree of `v`.
pub fn j_aubin(v: &NormedVector, sigma: &GroupElement, degree: Option<u32>) -> Result<f64> {
    let deg = f64::from(degree.unwrap_or_else(|| module_degree(v.poly())));
    let n = sigma.size() as f64;
    Ok(deg * (sigma.trace_norm_sq() / n).ln() - v.log_ratio(sigma)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    #[serde(skip)]
    pub sigma: GroupElement,
    pub nu: f64,
    pub j: f64,
    /// `log ||σ·w||²/||w||²`.
    pub w_component: f64,
    /// `log ||σ·v||²/||v||²`.
    pub v_component: f64,
    /// `log(||σ||²/(N+1))`.
    pub log_trace: f64,
}

impl EnergyReport {
    fn assemble(sigma: GroupElement, w_component: f64, v_component: f64, log_trace: f64, deg_v: u32) -> Self {
        EnergyReport {
            sigma,
            nu: w_component - v_component,
            j: f64::from(deg_v) * log_trace - v_component,
            w_component,
            v_component,
            log_trace,
        }
    }
}

pub fn energy(pair: &PairSpec, sigma: &GroupElement) -> Result<EnergyReport> {
    let v = NormedVector::new(pair.v().clone())?;
    let w = NormedVector::new(pair.w().clone())?;
    let n = sigma.size() as f64;
    Ok(EnergyReport::assemble(
        sigma.clone(),
        w.log_ratio(sigma)?,
        v.log_ratio(sigma)?,
        (sigma.trace_norm_sq() / n).ln(),
        pair.degree_v(),
    ))
}

/// Energies along a ray at `t = e^{log_t}`, without forming `σ(t)` explicitly.
pub fn energy_on_ray(pair: &PairSpec, ray: &Ray, log_t: f64) -> Result<EnergyReport> {
    let v = NormedVector::new(pair.v().clone())?;
    let w = NormedVector::new(pair.w().clone())?;
    energy_on_ray_cached(&v, &w, pair.degree_v(), ray, log_t)
}

fn energy_on_ray_cached(v: &NormedVector, w: &NormedVector, deg_v: u32, ray: &Ray, log_t: f64) -> Result<EnergyReport> {
    let n = ray.lambda.dim() as f64;
    Ok(EnergyReport::assemble(
        ray.at(log_t),
        w.log_ratio_ray(ray, log_t)?,
        v.log_ratio_ray(ray, log_t)?,
        ray.log_trace_norm_sq(log_t) - n.ln(),
        deg_v,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    /// Fitted `dν/dx` with `x = −log|t|²`.
    pub slope: f64,
    pub slope_stderr: f64,
    /// `w_λ(v) − w_λ(w)`.
    pub predicted: f64,
    pub relative_error: f64,
    pub xs: Vec<f64>,
    pub nus: Vec<f64>,
}

/// Fits `ν(λ(t))` against `x = −log|t|²` on the diagonal torus over `xs`.
pub fn slope_fit(pair: &PairSpec, lambda: &OnePSG, xs: &[f64]) -> Result<SlopeFit> {
    let ray = Ray::diagonal(lambda.clone());
    let v = NormedVector::new(pair.v().clone())?;
    let w = NormedVector::new(pair.w().clone())?;
    let nus: Vec<f64> = xs
        .iter()
        .map(|&x| Ok(energy_on_ray_cached(&v, &w, pair.degree_v(), &ray, -x / 2.0)?.nu))
        .collect::<Result<_>>()?;
    let (slope, _, slope_stderr) = line_fit(xs, &nus)?;
    let predicted = (pair.v().ops_weight(lambda)? - pair.w().ops_weight(lambda)?)
        .to_f64()
        .expect("weights are small rationals");
    let relative_error = if predicted == 0.0 {
        slope.abs()
    } else {
        ((slope - predicted) / predicted).abs()
    };
    Ok(SlopeFit {
        slope,
        slope_stderr,
        predicted,
        relative_error,
        xs: xs.to_vec(),
        nus,
    })
}

/// Default abscissae for slope fits: `x = −log|t|²` from 20 to 200.
pub fn default_slope_xs() -> Vec<f64> {
    (1..=10).map(|k| 20.0 * k as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RaySample {
    pub ray: usize,
    pub conjugated: bool,
    pub lambda: Vec<i64>,
    pub log_t: f64,
    pub nu: f64,
    pub j: f64,
}

#[derive(Clone, Debug)]
pub struct PropernessEstimate {
    pub epsilon: f64,
    pub b: f64,
    pub samples: usize,
    /// Smallest `ν − (εJ + b)` seen.
    pub min_margin: f64,
    pub violation: Option<RaySample>,
    pub violated_at: Option<GroupElement>,
}

#[derive(Clone, Debug)]
pub struct PropernessConfig {
    pub rays: usize,
    pub conjugate_rays: usize,
    /// Decades of `|t|` swept on diagonal rays; conjugate rays use at most 4.
    pub decades: u32,
    pub steps_per_decade: u32,
    pub seed: u64,
}

impl Default for PropernessConfig {
    fn default() -> Self {
        PropernessConfig {
            rays: 32,
            conjugate_rays: 16,
            decades: 12,
            steps_per_decade: 4,
            seed: 0,
        }
    }
}

/// A random nonzero sum-zero integer vector with entries in `[-3, 3]`.
pub fn random_psg<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OnePSG {
    loop {
        let mut v: Vec<i64> = (0..n - 1).map(|_| rng.random_range(-3..=3)).collect();
        let s: i64 = v.iter().sum();
        v.push(-s);
        if v.iter().any(|&x| x != 0) && v.last().is_some_and(|x| x.abs() <= 6) {
            return OnePSG::new(v).expect("sum-zero by construction");
        }
    }
}

/// Samples of `(ν, J)` along random diagonal and conjugated rays, in a fixed order.
pub fn ray_scan(pair: &PairSpec, cfg: &PropernessConfig) -> Result<Vec<RaySample>> {
    let n = pair.ambient();
    let v = NormedVector::new(pair.v().clone())?;
    let w = NormedVector::new(pair.w().clone())?;
    let deg_v = pair.degree_v();
    let per = cfg.steps_per_decade.max(1);
    let per_ray: Vec<Result<Vec<RaySample>>> = (0..cfg.rays + cfg.conjugate_rays)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
            let lambda = random_psg(n, &mut rng);
            let conjugated = r >= cfg.rays;
            let (ray, decades) = if conjugated {
                let g = GroupElement::random_sl_integer(n, &mut rng);
                (Ray::conjugated(lambda.clone(), g)?, cfg.decades.min(4))
            } else {
                (Ray::diagonal(lambda.clone()), cfg.decades)
            };
            (1..=decades * per)
                .map(|k| {
                    let log_t = -(f64::from(k) / f64::from(per)) * std::f64::consts::LN_10;
                    let e = energy_on_ray_cached(&v, &w, deg_v, &ray, log_t)?;
                    Ok(RaySample {
                        ray: r,
                        conjugated,
                        lambda: lambda.exponents().to_vec(),
                        log_t,
                        nu: e.nu,
                        j: e.j,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_ray {
        out.extend(r?);
    }
    Ok(out)
}

/// Looks for `σ` with `ν(σ) < ε·J_v(σ) + b` along sampled rays.
pub fn properness_probe(pair: &PairSpec, epsilon: f64, b: f64, cfg: &PropernessConfig) -> Result<PropernessEstimate> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be > 0"));
    }
    let samples = ray_scan(pair, cfg)?;
    let mut min_margin = f64::INFINITY;
    let mut violation = None;
    for s in &samples {
        let margin = s.nu - (epsilon * s.j + b);
        min_margin = min_margin.min(margin);
        if margin < 0.0 && violation.is_none() {
            violation = Some(s.clone());
        }
    }
    let violated_at = match &violation {
        None => None,
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, s.ray as u64));
            let lambda = random_psg(pair.ambient(), &mut rng);
            let ray = if s.conjugated {
                Ray::conjugated(lambda, GroupElement::random_sl_integer(pair.ambient(), &mut rng))?
            } else {
                Ray::diagonal(lambda)
            };
            Some(ray.at(s.log_t))
        }
    };
    Ok(PropernessEstimate {
        epsilon,
        b,
        samples: samples.len(),
        min_margin,
        violation,
        violated_at,
    })
}
