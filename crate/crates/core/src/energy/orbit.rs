//! Fubini–Study distance between `G·[(v,w)]` and `G·[(v,0)]`, and a dense
//! SL(2) estimate of `inf ν` to compare it against.
//!
//! Formal powers are treated as vectors in tensor powers: `⟨a^{⊗k}, c^{⊗k}⟩ = ⟨a,c⟩^k`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::NormedVector;
use crate::error::{Error, Result};
use crate::pairstab::PairSpec;
use crate::polyrep::{log_sum_exp, CMatrix, GroupElement, SparsePolynomial};
use crate::stats::derive_seed;

/// Below this value of `log tan²` the orbits are treated as touching.
const COLLAPSE_LOG_TAN_SQ: f64 = -80.0;

struct Side<'a> {
    v: &'a SparsePolynomial,
    kv: f64,
    w: &'a SparsePolynomial,
    kw: f64,
}

impl<'a> Side<'a> {
    fn from_pair(pair: &'a PairSpec) -> Result<Self> {
        Ok(Side {
            v: pair.v().sparse_base()?,
            kv: f64::from(pair.v().exponent()),
            w: pair.w().sparse_base()?,
            kw: f64::from(pair.w().exponent()),
        })
    }

    /// `log tan²` of the distance between `[σ1·v : σ1·w]` and `[σ2·v : 0]`.
    fn log_tan_sq(&self, s1: &GroupElement, s2: &GroupElement) -> Result<f64> {
        let a = self.v.act(s1)?;
        let b = self.w.act(s1)?;
        let c = self.v.act(s2)?;
        let lb = b.log_gaussian_norm_sq()?;
        let lc = c.log_gaussian_norm_sq()?;
        let ip = a.gaussian_inner(&c);
        if ip.norm() == 0.0 {
            return Ok(f64::INFINITY);
        }
        let ly = 2.0 * ip.norm().ln();
        // Gram term |a|²|c|² − |⟨a,c⟩|² = |a⊥|²|c|², computed without cancellation.
        let a_perp = a.sub(&c.scale(ip / lc.exp()))?;
        let r = if a_perp.is_zero() {
            0.0
        } else {
            (a_perp.log_gaussian_norm_sq()? + lc - ly).exp()
        };
        let t1 = self.kw * lb + self.kv * lc - self.kv * ly;
        let t2 = (self.kv * r.ln_1p()).exp_m1();
        Ok(if t2 > 0.0 { log_sum_exp(&[t1, t2.ln()]) } else { t1 })
    }
}

/// FS distance between `[σ1·v : σ1·w]` and `[σ2·v : 0]` with the given norms.
pub fn fs_distance(pair: &PairSpec, s1: &GroupElement, s2: &GroupElement) -> Result<f64> {
    let lt = Side::from_pair(pair)?.log_tan_sq(s1, s2)?;
    Ok((0.5 * lt).exp().atan())
}

fn unit(p: &SparsePolynomial) -> Result<SparsePolynomial> {
    let l = p.log_gaussian_norm_sq()?;
    Ok(p.scale(Complex64::new((-0.5 * l).exp(), 0.0)))
}

#[derive(Clone, Debug)]
pub struct OrbitBudget {
    pub restarts: usize,
    pub sweeps: usize,
    pub initial_step: f64,
    /// Coordinate step below which descent counts as stabilized.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OrbitBudget {
    fn default() -> Self {
        OrbitBudget {
            restarts: 8,
            sweeps: 400,
            initial_step: 0.5,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitDistance {
    pub distance: f64,
    pub log_tan_sq: f64,
    pub best_restart: usize,
    pub evaluations: u64,
    /// Every restart's step size fell below the tolerance within budget.
    pub stabilized: bool,
    pub warning: Option<String>,
    pub sigma1: GroupElement,
    pub sigma2: GroupElement,
}

fn param_count(n: usize) -> usize {
    2 * (n * n - 1)
}

/// `exp(X)` for the traceless `X` with real coordinates `p`.
fn exp_traceless(n: usize, p: &[f64]) -> Result<GroupElement> {
    let mut x = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                x[(i, j)] = Complex64::new(p[k], p[k + 1]);
                k += 2;
            }
        }
    }
    for h in 0..n - 1 {
        let z = Complex64::new(p[k], p[k + 1]);
        x[(h, h)] += z;
        x[(h + 1, h + 1)] -= z;
        k += 2;
    }
    GroupElement::new(x.exp())
}

struct Descent {
    best: f64,
    params: Vec<f64>,
    evaluations: u64,
    stabilized: bool,
}

/// Greedy coordinate descent with step halving. Failed evaluations count as `+∞`.
fn coordinate_descent<F>(mut params: Vec<f64>, f: F, step0: f64, tol: f64, sweeps: usize, floor: f64) -> Descent
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = f(&params);
    let mut evaluations = 1;
    let mut step = step0;
    let mut stabilized = false;
    for _ in 0..sweeps {
        if best < floor {
            stabilized = true;
            break;
        }
        let mut improved = false;
        for i in 0..params.len() {
            for sign in [1.0, -1.0] {
                let old = params[i];
                params[i] = old + sign * step;
                let val = f(&params);
                evaluations += 1;
                if val < best - 1e-13 * (1.0 + best.abs()) {
                    best = val;
                    improved = true;
                    break;
                }
                params[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
            if step < tol {
                stabilized = true;
                break;
            }
        }
    }
    Descent {
        best,
        params,
        evaluations,
        stabilized,
    }
}

/// Estimates `inf dist(σ1·[(v,w)], σ2·[(v,0)])` over `SL(N+1)`, with `v`, `w`
/// rescaled to unit norm. An estimate only; restarts run in parallel and the
/// minimum is taken with ties broken by restart index.
pub fn orbit_distance(pair: &PairSpec, budget: &OrbitBudget) -> Result<OrbitDistance> {
    let n = pair.ambient();
    if !(2..=4).contains(&n) {
        return Err(Error::invalid("orbit_distance supports N+1 in 2..=4"));
    }
    if budget.restarts == 0 || budget.sweeps == 0 {
        return Err(Error::invalid("orbit budget must allow at least one restart and sweep"));
    }
    let v = unit(pair.v().sparse_base()?)?;
    let w = unit(pair.w().sparse_base()?)?;
    let side = Side {
        v: &v,
        kv: f64::from(pair.v().exponent()),
        w: &w,
        kw: f64::from(pair.w().exponent()),
    };
    let m = param_count(n);
    let objective = |p: &[f64]| -> f64 {
        let eval = || -> Result<f64> {
            let s1 = exp_traceless(n, &p[..m])?;
            let s2 = exp_traceless(n, &p[m..])?;
            side.log_tan_sq(&s1, &s2)
        };
        match eval() {
            Ok(x) if !x.is_nan() => x,
            _ => f64::INFINITY,
        }
    };
    let runs: Vec<Descent> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut start = vec![0.0; 2 * m];
            if r > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, r as u64));
                for i in 0..m {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    start[i] = 0.4 * x;
                    let y: f64 = StandardNormal.sample(&mut rng);
                    start[m + i] = start[i] + 0.1 * y;
                }
            }
            coordinate_descent(
                start,
                objective,
                budget.initial_step,
                budget.tolerance,
                budget.sweeps,
                COLLAPSE_LOG_TAN_SQ,
            )
        })
        .collect();
    let evaluations = runs.iter().map(|d| d.evaluations).sum();
    let stabilized = runs.iter().all(|d| d.stabilized);
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.best.total_cmp(&b.best).then(i.cmp(j)))
        .expect("at least one restart");
    let log_tan_sq = best.best;
    let distance = (0.5 * log_tan_sq).exp().atan();
    let warning = (!stabilized).then(|| "budget exhausted before every restart stabilized".to_string());
    Ok(OrbitDistance {
        distance,
        log_tan_sq,
        best_restart,
        evaluations,
        stabilized,
        warning,
        sigma1: exp_traceless(n, &best.params[..m])?,
        sigma2: exp_traceless(n, &best.params[m..])?,
    })
}

#[derive(Clone, Debug)]
pub struct Sl2Grid {
    pub r_max: f64,
    pub r_steps: usize,
    pub z_max: f64,
    pub z_steps: usize,
}

impl Default for Sl2Grid {
    fn default() -> Self {
        Sl2Grid {
            r_max: 3.0,
            r_steps: 31,
            z_max: 3.0,
            z_steps: 31,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NuInfimum {
    pub value: f64,
    pub r: f64,
    pub z: Complex64,
    pub sigma: GroupElement,
    pub evaluations: u64,
}

/// `[[e^r, e^r z], [0, e^{−r}]]`; with `K` dropped this covers SL(2) up to unitaries.
fn iwasawa(r: f64, z: Complex64) -> GroupElement {
    let e = r.exp();
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(e, 0.0),
            z * e,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0 / e, 0.0),
        ],
    );
    GroupElement::new(m).expect("determinant one")
}

/// `inf ν` over SL(2) by a dense grid in Iwasawa coordinates followed by
/// coordinate refinement from the best grid point. `ν` is unitarily invariant
/// so the compact factor is dropped.
pub fn nu_infimum_sl2(pair: &PairSpec, grid: &Sl2Grid) -> Result<NuInfimum> {
    if pair.ambient() != 2 {
        return Err(Error::invalid("nu_infimum_sl2 needs binary forms (N+1 = 2)"));
    }
    if grid.r_steps < 2 || grid.z_steps < 2 {
        return Err(Error::invalid("grid needs at least 2 steps per axis"));
    }
    let v = NormedVector::new(pair.v().clone())?;
    let w = NormedVector::new(pair.w().clone())?;
    let nu = |r: f64, z: Complex64| -> f64 {
        let s = iwasawa(r, z);
        match (w.log_ratio(&s), v.log_ratio(&s)) {
            (Ok(a), Ok(b)) if (a - b).is_finite() => a - b,
            _ => f64::INFINITY,
        }
    };
    let coord = |k: usize, steps: usize, max: f64| -max + 2.0 * max * k as f64 / (steps - 1) as f64;
    let points: Vec<(f64, f64, f64)> = (0..grid.r_steps)
        .flat_map(|i| (0..grid.z_steps).flat_map(move |j| (0..grid.z_steps).map(move |k| (i, j, k))))
        .map(|(i, j, k)| {
            (
                coord(i, grid.r_steps, grid.r_max),
                coord(j, grid.z_steps, grid.z_max),
                coord(k, grid.z_steps, grid.z_max),
            )
        })
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(r, x, y)| nu(r, Complex64::new(x, y)))
        .collect();
    let (best_i, _) = values
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.total_cmp(b).then(i.cmp(j)))
        .expect("nonempty grid");
    let (r0, x0, y0) = points[best_i];
    let spacing = (2.0 * grid.r_max / (grid.r_steps - 1) as f64).max(2.0 * grid.z_max / (grid.z_steps - 1) as f64);
    let refined = coordinate_descent(
        vec![r0, x0, y0],
        |p: &[f64]| nu(p[0], Complex64::new(p[1], p[2])),
        spacing,
        1e-9,
        10_000,
        f64::NEG_INFINITY,
    );
    let p = &refined.params;
    let z = Complex64::new(p[1], p[2]);
    Ok(NuInfimum {
        value: refined.best,
        r: p[0],
        z,
        sigma: iwasawa(p[0], z),
        evaluations: values.len() as u64 + refined.evaluations,
    })
}
