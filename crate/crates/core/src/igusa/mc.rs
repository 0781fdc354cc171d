//! Sharded Monte Carlo over the standard complex Gaussian.
//!
//! Samples are split into fixed-size shards; shard `k` draws from its own
//! ChaCha stream seeded by `derive_seed(seed, k)`, and shard summaries are
//! merged in shard order. Results therefore do not depend on the thread count.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyrep::{gaussian_fill, CMatrix, MatrixShape, Poly};
use crate::stats::{derive_seed, Bivariate, Welford};

pub const SHARD_SIZE: u64 = 1 << 14;

/// Resamples allowed per shard when `P` vanishes at a draw.
const MAX_ZERO_RESAMPLES: u64 = 1_000;

fn shard_count(samples: u64) -> u64 {
    samples.div_ceil(SHARD_SIZE)
}

fn shard_len(samples: u64, k: u64) -> u64 {
    SHARD_SIZE.min(samples - k * SHARD_SIZE)
}

/// Total ordering wrapper for the top-k heap.
#[derive(Clone, Copy)]
struct Ord64(f64);

impl PartialEq for Ord64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Ord64 {}

impl PartialOrd for Ord64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ord64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Keeps the `k` largest values seen.
#[derive(Clone, Default)]
struct TopK {
    k: usize,
    heap: BinaryHeap<Reverse<Ord64>>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn push(&mut self, x: f64) {
        if self.k == 0 {
            return;
        }
        if self.heap.len() < self.k {
            self.heap.push(Reverse(Ord64(x)));
        } else if let Some(Reverse(min)) = self.heap.peek() {
            if x > min.0 {
                self.heap.pop();
                self.heap.push(Reverse(Ord64(x)));
            }
        }
    }

    fn merge(&mut self, other: TopK) {
        for Reverse(x) in other.heap {
            self.push(x.0);
        }
    }

    fn sum(&self) -> f64 {
        self.heap.iter().map(|r| r.0 .0).sum()
    }
}

/// Mean of `|P(Z)|^{2s}` with its standard error.
#[derive(Clone, Debug, Serialize)]
pub struct MomentEstimate {
    pub s: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    /// Share of the sum carried by the largest 0.1% of samples.
    pub top_share: f64,
    pub tail_warning: Option<String>,
}

/// Fraction of the total mass above which the tail warning fires.
pub const TAIL_SHARE_LIMIT: f64 = 0.2;

/// `E|P(Z)|^{2s}` for a standard complex Gaussian matrix `Z`.
pub fn mc_moment(p: &Poly, s: f64, samples: u64, seed: u64) -> Result<MomentEstimate> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s must be a finite real >= 0"));
    }
    if s == 0.0 {
        return Ok(MomentEstimate {
            s,
            mean: 1.0,
            stderr: 0.0,
            samples: 0,
            seed,
            top_share: 0.0,
            tail_warning: None,
        });
    }
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let shape = p.shape();
    let total_top = (samples as f64 * 1e-3).ceil() as usize;
    let shards: Vec<Result<(Welford, TopK)>> = (0..shard_count(samples))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k));
            let mut z = CMatrix::zeros(shape.rows, shape.cols);
            let mut acc = Welford::default();
            let mut top = TopK::new(total_top);
            for i in 0..shard_len(samples, k) {
                gaussian_fill(&mut z, &mut rng);
                let val = p.evaluate_unchecked(&z);
                let x = val.norm_sqr().powf(s);
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        index: k * SHARD_SIZE + i,
                    });
                }
                acc.push(x);
                top.push(x);
            }
            Ok((acc, top))
        })
        .collect();
    let mut acc = Welford::default();
    let mut top = TopK::new(total_top);
    for sh in shards {
        let (a, t) = sh?;
        acc.merge(&a);
        top.merge(t);
    }
    let total = acc.mean * acc.n as f64;
    let top_share = if total > 0.0 { top.sum() / total } else { 0.0 };
    let tail_warning = (top_share > TAIL_SHARE_LIMIT).then(|| {
        format!(
            "heavy tail: the top 0.1% of samples carry {:.1}% of the sum; the standard error is unreliable",
            100.0 * top_share
        )
    });
    Ok(MomentEstimate {
        s,
        mean: acc.mean,
        stderr: acc.stderr(),
        samples: acc.n,
        seed,
        top_share,
        tail_warning,
    })
}

/// Joint moments of `(|P|², log|P|²)` from one sample stream.
#[derive(Clone, Debug)]
pub struct JointMoments {
    pub moments: Bivariate,
    pub zero_resamples: u64,
}

/// Draws until `P(Z) ≠ 0`, counting redraws.
fn draw_nonzero(p: &Poly, z: &mut CMatrix, rng: &mut ChaCha8Rng, index: u64, zeros: &mut u64) -> Result<f64> {
    let mut local = 0;
    loop {
        gaussian_fill(z, rng);
        let a = p.evaluate_unchecked(z).norm_sqr();
        if !a.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if a > 0.0 {
            return Ok(a);
        }
        local += 1;
        *zeros += 1;
        if local > MAX_ZERO_RESAMPLES {
            return Err(Error::invalid(format!(
                "polynomial vanished at {MAX_ZERO_RESAMPLES} consecutive draws near sample {index}"
            )));
        }
    }
}

/// Samples `(|P(Z)|², log|P(Z)|²)`.
pub fn joint_moments(p: &Poly, samples: u64, seed: u64) -> Result<JointMoments> {
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let shape: MatrixShape = p.shape();
    let shards: Vec<Result<(Bivariate, u64)>> = (0..shard_count(samples))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k));
            let mut z = CMatrix::zeros(shape.rows, shape.cols);
            let mut acc = Bivariate::default();
            let mut zeros = 0;
            for i in 0..shard_len(samples, k) {
                let a = draw_nonzero(p, &mut z, &mut rng, k * SHARD_SIZE + i, &mut zeros)?;
                acc.push(a, a.ln());
            }
            Ok((acc, zeros))
        })
        .collect();
    let mut moments = Bivariate::default();
    let mut zero_resamples = 0;
    for sh in shards {
        let (a, z) = sh?;
        moments.merge(&a);
        zero_resamples += z;
    }
    Ok(JointMoments {
        moments,
        zero_resamples,
    })
}
