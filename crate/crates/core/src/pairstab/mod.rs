//! Semistability and stability of pairs through weight polytopes.
//!
//! For a pair `(v, w)` and a one-parameter subgroup `λ` of the diagonal torus,
//! `w_λ(e) = min_{a ∈ 𝒩(e)} ⟨a, λ⟩`. Then `𝒩(v) ⊆ 𝒩(w)` holds exactly when
//! `w_λ(v) ≥ w_λ(w)` for every `λ`, and a destabilizing witness is a `λ` with
//! `w_λ(v) < w_λ(w)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactgeom::linalg::primitive_integer;
use crate::exactgeom::{contains, convex_hull, dilate, minkowski_sum, LatticePoint, LatticePolytope};
use crate::polyrep::{FormalPower, GroupElement, OnePSG, Poly, SparsePolynomial};
use crate::stats::derive_seed;

/// Anything with a torus weight decomposition.
pub trait Weighted {
    fn weight_polytope(&self) -> Result<LatticePolytope>;
    /// `w_λ`, the minimum of `⟨a, λ⟩` over the support.
    fn ops_weight(&self, lambda: &OnePSG) -> Result<BigRational>;
    fn ambient(&self) -> usize;
    /// Total degree, counting formal exponents.
    fn total_degree(&self) -> u32;
}

impl Weighted for SparsePolynomial {
    fn weight_polytope(&self) -> Result<LatticePolytope> {
        convex_hull(&self.projected_support()?)
    }

    fn ops_weight(&self, lambda: &OnePSG) -> Result<BigRational> {
        check_lambda(self.shape().cols, lambda)?;
        let m = self
            .support()?
            .iter()
            .map(|a| a.pair(lambda.exponents()))
            .min()
            .expect("support is nonempty");
        Ok(BigRational::from_integer(m.into()))
    }

    fn ambient(&self) -> usize {
        self.shape().cols
    }

    fn total_degree(&self) -> u32 {
        self.degree()
    }
}

impl Weighted for Poly {
    fn weight_polytope(&self) -> Result<LatticePolytope> {
        convex_hull(&self.projected_support()?)
    }

    fn ops_weight(&self, lambda: &OnePSG) -> Result<BigRational> {
        match self {
            Poly::Sparse(p) => p.ops_weight(lambda),
            Poly::BlackBox(_) => Err(self.projected_support().unwrap_err()),
        }
    }

    fn ambient(&self) -> usize {
        self.shape().cols
    }

    fn total_degree(&self) -> u32 {
        self.degree()
    }
}

impl Weighted for FormalPower {
    fn weight_polytope(&self) -> Result<LatticePolytope> {
        let base = self.sparse_base()?.weight_polytope()?;
        dilate(&base, &BigRational::from_integer(self.exponent().into()))
    }

    fn ops_weight(&self, lambda: &OnePSG) -> Result<BigRational> {
        let w = self.sparse_base()?.ops_weight(lambda)?;
        Ok(w * BigRational::from_integer(self.exponent().into()))
    }

    fn ambient(&self) -> usize {
        self.shape().cols
    }

    fn total_degree(&self) -> u32 {
        self.degree()
    }
}

fn check_lambda(ambient: usize, lambda: &OnePSG) -> Result<()> {
    if lambda.dim() != ambient {
        return Err(Error::DimensionMismatch {
            expected: ambient,
            found: lambda.dim(),
        });
    }
    Ok(())
}

pub fn weight_polytope<P: Weighted + ?Sized>(p: &P) -> Result<LatticePolytope> {
    p.weight_polytope()
}

pub fn ops_weight<P: Weighted + ?Sized>(p: &P, lambda: &OnePSG) -> Result<BigRational> {
    p.ops_weight(lambda)
}

/// `Q_N`, the weight polytope of the identity: the simplex with vertices
/// `e_i − (1/(N+1))·1`.
#[derive(Clone, Debug)]
pub struct SimplexQN {
    ambient: usize,
    polytope: LatticePolytope,
}

impl SimplexQN {
    pub fn new(ambient: usize) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        let pts: Vec<LatticePoint> = (0..ambient)
            .map(|i| LatticePoint::from_ints((0..ambient).map(|j| i64::from(i == j))).project_sum_zero())
            .collect();
        Ok(SimplexQN {
            ambient,
            polytope: convex_hull(&pts)?,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    pub fn dilated(&self, k: u64) -> LatticePolytope {
        dilate(&self.polytope, &BigRational::from_integer(k.into())).expect("k >= 0")
    }
}

/// A pair `(v, w)` of polynomials on matrix spaces with the same column count.
#[derive(Clone, Debug)]
pub struct PairSpec {
    v: FormalPower,
    w: FormalPower,
}

impl PairSpec {
    pub fn new(v: impl Into<FormalPower>, w: impl Into<FormalPower>) -> Result<Self> {
        let v = v.into();
        let w = w.into();
        if v.shape().cols != w.shape().cols {
            return Err(Error::DimensionMismatch {
                expected: v.shape().cols,
                found: w.shape().cols,
            });
        }
        for p in [&v, &w] {
            if let Poly::Sparse(s) = p.base() {
                if s.is_zero() {
                    return Err(Error::ZeroPolynomial);
                }
            }
        }
        Ok(PairSpec { v, w })
    }

    pub fn v(&self) -> &FormalPower {
        &self.v
    }

    pub fn w(&self) -> &FormalPower {
        &self.w
    }

    /// `N + 1`.
    pub fn ambient(&self) -> usize {
        self.v.shape().cols
    }

    pub fn degree_v(&self) -> u32 {
        module_degree(&self.v)
    }

    pub fn degree_w(&self) -> u32 {
        module_degree(&self.w)
    }

    pub fn act(&self, g: &GroupElement) -> Result<PairSpec> {
        Ok(PairSpec {
            v: self.v.act(g)?,
            w: self.w.act(g)?,
        })
    }
}

/// `𝒩(v) ⊆ 𝒩(w)` on the diagonal torus.
pub fn semistable_diagonal(pair: &PairSpec) -> Result<bool> {
    contains(&pair.w.weight_polytope()?, &pair.v.weight_polytope()?)
}

/// Rescales a rational functional on the sum-zero hyperplane to a primitive
/// integer one-parameter subgroup. Values on sum-zero points keep their order.
pub fn functional_to_psg(f: &[BigRational]) -> Option<OnePSG> {
    let n = BigRational::from_integer(BigInt::from(f.len()));
    let mean = f.iter().fold(BigRational::zero(), |a, b| a + b) / n;
    let centered: Vec<BigRational> = f.iter().map(|x| x - &mean).collect();
    if centered.iter().all(Zero::is_zero) {
        return None;
    }
    let ints = primitive_integer(&centered);
    let ex: Vec<i64> = ints.iter().map(|x| i64::try_from(x).ok()).collect::<Option<Vec<_>>>()?;
    OnePSG::new(ex).ok()
}

/// Inner and equality normals of `𝒩(p)`, as one-parameter subgroups.
pub fn facet_psgs(p: &LatticePolytope) -> Vec<OnePSG> {
    let rep = p.halfspaces();
    let mut out = Vec::new();
    for h in &rep.inequalities {
        out.extend(functional_to_psg(&h.normal));
    }
    for h in &rep.equalities {
        let neg: Vec<BigRational> = h.normal.iter().map(|x| -x).collect();
        out.extend(functional_to_psg(&h.normal));
        out.extend(functional_to_psg(&neg));
    }
    out.sort_by(|a, b| a.exponents().cmp(b.exponents()));
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "m")]
pub enum StabilityStatus {
    SemistableCertifiedOnDiagonalTorus,
    Destabilized,
    StableWithExponent(u32),
}

/// `λ` destabilizes `g·(v, w)`: `w_λ(g·v) < w_λ(g·w)`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub g: GroupElement,
    pub lambda: OnePSG,
    pub weight_v: BigRational,
    pub weight_w: BigRational,
    pub trial: usize,
}

impl Witness {
    /// Recomputes both weights from scratch and checks the strict inequality.
    pub fn reverify(&self, pair: &PairSpec) -> Result<bool> {
        let acted = pair.act(&self.g)?;
        let wv = acted.v.ops_weight(&self.lambda)?;
        let ww = acted.w.ops_weight(&self.lambda)?;
        Ok(wv == self.weight_v && ww == self.weight_w && wv < ww)
    }
}

impl Witness {
    /// As [`Witness::reverify`], for a witness of the twisted pair `(𝕀^q ⊗ v^{ev}, w^{ew})`.
    pub fn reverify_twisted(&self, pair: &PairSpec, q: u64, ev: u32, ew: u32) -> Result<bool> {
        let acted = pair.act(&self.g)?;
        let (wv, ww) = twisted_weights(&acted, &self.lambda, q, ev, ew)?;
        Ok(wv == self.weight_v && ww == self.weight_w && wv < ww)
    }
}

#[derive(Clone, Debug)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    pub witness: Option<Witness>,
    pub trials: usize,
    pub verification_hash: String,
}

impl StabilityVerdict {
    fn new(status: StabilityStatus, witness: Option<Witness>, trials: usize) -> Self {
        let mut h = Sha256::new();
        h.update(serde_json::to_string(&status).expect("status serializes"));
        h.update(trials.to_le_bytes());
        if let Some(wt) = &witness {
            for z in wt.g.matrix().iter() {
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
            for e in wt.lambda.exponents() {
                h.update(e.to_le_bytes());
            }
            h.update(wt.weight_v.to_string());
            h.update(wt.weight_w.to_string());
        }
        let verification_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        StabilityVerdict {
            status,
            witness,
            trials,
            verification_hash,
        }
    }

    pub fn is_destabilized(&self) -> bool {
        self.status == StabilityStatus::Destabilized
    }
}

fn destabilizer(pair: &PairSpec, g: &GroupElement, trial: usize) -> Result<Option<Witness>> {
    let pv = pair.v.weight_polytope()?;
    let pw = pair.w.weight_polytope()?;
    let Some(sep) = pw.separate(&pv)? else {
        return Ok(None);
    };
    let lambda = functional_to_psg(&sep.functional)
        .ok_or_else(|| Error::invalid("separating functional does not fit a 1-PS"))?;
    let weight_v = pair.v.ops_weight(&lambda)?;
    let weight_w = pair.w.ops_weight(&lambda)?;
    debug_assert!(weight_v < weight_w);
    Ok(Some(Witness {
        g: g.clone(),
        lambda,
        weight_v,
        weight_w,
        trial,
    }))
}

/// Element used for trial `i`: the identity at `i = 0`, else a random
/// `SL(N+1, ℤ)` element seeded from `(seed, i)`.
pub fn trial_element(ambient: usize, seed: u64, i: usize) -> GroupElement {
    if i == 0 {
        GroupElement::identity(ambient)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        GroupElement::random_sl_integer(ambient, &mut rng)
    }
}

/// Diagonal-torus containment for `g·(v, w)` over `trials` elements `g`.
/// The first destabilizing trial by index wins.
pub fn semistable_probe(pair: &PairSpec, trials: usize, seed: u64) -> Result<StabilityVerdict> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let n = pair.ambient();
    let results: Vec<Result<Option<Witness>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = trial_element(n, seed, i);
            let acted = if i == 0 { pair.clone() } else { pair.act(&g)? };
            destabilizer(&acted, &g, i)
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        if let Some(w) = r? {
            return Ok(StabilityVerdict::new(StabilityStatus::Destabilized, Some(w), i + 1));
        }
    }
    Ok(StabilityVerdict::new(
        StabilityStatus::SemistableCertifiedOnDiagonalTorus,
        None,
        trials,
    ))
}

/// Degree of the module of all homogeneous polynomials of `p`'s degree:
/// the least `k` with `𝒩(x) ⊆ k·Q_N` for every `x` in it. Equals the total degree.
pub fn module_degree<P: Weighted + ?Sized>(p: &P) -> u32 {
    let closed = p.total_degree();
    debug_assert_eq!(Some(closed), module_degree_generic(p.ambient(), closed).ok());
    closed
}

/// The same quantity computed from polytopes: the module's characters have
/// hull `conv{D·e_i}`; search the least `k` with that hull inside `k·Q_N`.
pub fn module_degree_generic(ambient: usize, degree: u32) -> Result<u32> {
    let q = SimplexQN::new(ambient)?;
    let pts: Vec<LatticePoint> = (0..ambient)
        .map(|i| {
            LatticePoint::from_ints((0..ambient).map(|j| if i == j { i64::from(degree) } else { 0 })).project_sum_zero()
        })
        .collect();
    let hull = convex_hull(&pts)?;
    for k in 0..=degree {
        if contains(&q.dilated(u64::from(k)), &hull)? {
            return Ok(k);
        }
    }
    Err(Error::invalid("module degree search exceeded the total degree"))
}

/// Least `k` with `𝒩(p) ⊆ k·Q_N` for this particular polynomial.
pub fn polytope_degree<P: Weighted + ?Sized>(p: &P) -> Result<u32> {
    let q = SimplexQN::new(p.ambient())?;
    let np = p.weight_polytope()?;
    for k in 0..=p.total_degree() {
        if contains(&q.dilated(u64::from(k)), &np)? {
            return Ok(k);
        }
    }
    Err(Error::invalid("polytope degree exceeds the total degree"))
}

/// Exponent convention of the stability criterion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StableVariant {
    /// `(𝕀^q ⊗ v^m, w^{m+1})`.
    #[default]
    Pair,
    /// `(𝕀^q ⊗ v^{m−1}, w^m)`.
    Variety,
}

impl StableVariant {
    /// Exponents `(of v, of w)` at step `m ≥ 1`.
    pub fn exponents(self, m: u32) -> (u32, u32) {
        match self {
            StableVariant::Pair => (m, m + 1),
            StableVariant::Variety => (m - 1, m),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StableSearch {
    pub m: Option<u32>,
    pub variant: StableVariant,
    pub q: u64,
    pub m_checked: u32,
    /// Conjugate probing of the twisted pair at the found `m`.
    pub cross_check: Option<StabilityVerdict>,
}

fn twisted_polytopes(
    pv: &LatticePolytope,
    pw: &LatticePolytope,
    qq: &LatticePolytope,
    ev: u32,
    ew: u32,
) -> Result<(LatticePolytope, LatticePolytope)> {
    let lhs = minkowski_sum(qq, &dilate(pv, &BigRational::from_integer(ev.into()))?)?;
    let rhs = dilate(pw, &BigRational::from_integer(ew.into()))?;
    Ok((lhs, rhs))
}

/// Weights of the twisted pair `(𝕀^q ⊗ v^{ev}, w^{ew})` at `λ`; `w_λ(𝕀) = min λ_i`.
pub fn twisted_weights(
    pair: &PairSpec,
    lambda: &OnePSG,
    q: u64,
    ev: u32,
    ew: u32,
) -> Result<(BigRational, BigRational)> {
    let min_l = *lambda.exponents().iter().min().expect("nonempty 1-PS");
    let int = |x: i64| BigRational::from_integer(x.into());
    let wv = int(min_l) * int(q as i64) + pair.v.ops_weight(lambda)? * int(i64::from(ev));
    let ww = pair.w.ops_weight(lambda)? * int(i64::from(ew));
    Ok((wv, ww))
}

fn twisted_destabilizer(
    acted: &PairSpec,
    qq: &LatticePolytope,
    q: u64,
    ev: u32,
    ew: u32,
    g: &GroupElement,
    trial: usize,
) -> Result<Option<Witness>> {
    let (lhs, rhs) = twisted_polytopes(&acted.v.weight_polytope()?, &acted.w.weight_polytope()?, qq, ev, ew)?;
    let Some(sep) = rhs.separate(&lhs)? else {
        return Ok(None);
    };
    let lambda = functional_to_psg(&sep.functional)
        .ok_or_else(|| Error::invalid("separating functional does not fit a 1-PS"))?;
    let (weight_v, weight_w) = twisted_weights(acted, &lambda, q, ev, ew)?;
    Ok(Some(Witness {
        g: g.clone(),
        lambda,
        weight_v,
        weight_w,
        trial,
    }))
}

fn twisted_contains(
    pv: &LatticePolytope,
    pw: &LatticePolytope,
    qq: &LatticePolytope,
    ev: u32,
    ew: u32,
) -> Result<bool> {
    let (lhs, rhs) = twisted_polytopes(pv, pw, qq, ev, ew)?;
    contains(&rhs, &lhs)
}

/// Least `m ≤ m_max` making the twisted pair semistable on the diagonal torus,
/// then cross-checked on `trials` random conjugates.
pub fn stable_search(
    pair: &PairSpec,
    q: u64,
    m_max: u32,
    variant: StableVariant,
    trials: usize,
    seed: u64,
) -> Result<StableSearch> {
    if q == 0 {
        return Err(Error::invalid("q must be >= 1"));
    }
    if m_max == 0 {
        return Err(Error::invalid("m_max must be >= 1"));
    }
    let qq = SimplexQN::new(pair.ambient())?.dilated(q);
    let pv = pair.v.weight_polytope()?;
    let pw = pair.w.weight_polytope()?;
    let mut found = None;
    for m in 1..=m_max {
        let (ev, ew) = variant.exponents(m);
        if twisted_contains(&pv, &pw, &qq, ev, ew)? {
            found = Some(m);
            break;
        }
    }
    let cross_check = match found {
        Some(m) if trials > 0 => Some(twisted_probe(pair, q, m, variant, trials, seed)?),
        _ => None,
    };
    Ok(StableSearch {
        m: found,
        variant,
        q,
        m_checked: found.unwrap_or(m_max),
        cross_check,
    })
}

fn twisted_probe(
    pair: &PairSpec,
    q: u64,
    m: u32,
    variant: StableVariant,
    trials: usize,
    seed: u64,
) -> Result<StabilityVerdict> {
    let n = pair.ambient();
    let qq = SimplexQN::new(n)?.dilated(q);
    let (ev, ew) = variant.exponents(m);
    let results: Vec<Result<Option<Witness>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = trial_element(n, seed, i);
            let acted = pair.act(&g)?;
            twisted_destabilizer(&acted, &qq, q, ev, ew, &g, i)
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        if let Some(w) = r? {
            return Ok(StabilityVerdict::new(StabilityStatus::Destabilized, Some(w), i + 1));
        }
    }
    Ok(StabilityVerdict::new(
        StabilityStatus::StableWithExponent(m),
        None,
        trials,
    ))
}

#[cfg(test)]
mod tests;
