//! Log-gamma, digamma and harmonic numbers on the positive reals.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// `ln Γ(x)` for `x > 0`; NaN otherwise.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut shift = 0.0;
    let mut z = x;
    if z < 15.0 {
        let mut prod = 1.0;
        while z < 15.0 {
            prod *= z;
            z += 1.0;
        }
        shift = prod.ln();
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Stirling series with Bernoulli coefficients B_{2k} / (2k (2k-1)).
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series - shift
}

/// `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`; NaN otherwise.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut acc = 0.0;
    let mut z = x;
    while z < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    acc + z.ln() - 0.5 * inv - series
}

const FACTORIAL_TABLE: usize = 1024;

/// `ln k!`, tabulated for small `k`.
pub fn ln_factorial(k: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (0..FACTORIAL_TABLE).map(|k| ln_gamma(k as f64 + 1.0)).collect());
    table
        .get(k as usize)
        .copied()
        .unwrap_or_else(|| ln_gamma(k as f64 + 1.0))
}

/// `H_k = Σ_{j=1}^k 1/j`.
pub fn harmonic(k: u64) -> f64 {
    if k <= 10_000 {
        // Smallest terms first.
        (1..=k).rev().map(|j| 1.0 / j as f64).sum()
    } else {
        digamma(k as f64 + 1.0) + EULER_GAMMA
    }
}

pub fn harmonic_exact(k: u64) -> BigRational {
    (1..=k).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(j))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, ln Γ(x), ψ(x)) at 22 significant digits.
    #[allow(clippy::excessive_precision)]
    const FIXTURES: &[(f64, f64, f64)] = &[
        (0.001, 6.907178885383853682512, -1000.575571931810300471),
        (0.1, 2.25271265173420595987, -10.42375494041107679517),
        (0.5, 0.5723649429247000870717, -1.963510026021423479441),
        (1.0, 0.0, -0.5772156649015328606065),
        (1.5, -0.1207822376352452223455, 0.03648997397857652055902),
        (2.0, 0.0, 0.4227843350984671393935),
        (2.5, 0.2846828704729191596325, 0.7031566406452431872257),
        (3.7, 1.428072326665387921872, 1.167153539361511385874),
        (7.0, 6.57925121201010099506, 1.872784335098467139393),
        (10.25, 13.36802367147604629543, 2.277704790686723969301),
        (15.5, 26.53691449111561362395, 2.708235242590365432569),
        (33.0, 81.5579594561150371785, 3.481279530534987242153),
        (100.75, 362.5871462932338678308, 4.607671212025689047125),
        (1000.0, 5905.220423209181211826, 6.90725519564881205205),
        (12345.5, 103958.2429651232291316, 9.421006402052684951323),
        (1e6, 12815504.56914761165998, 13.81551005796419077077),
    ];

    #[test]
    fn ln_gamma_matches_reference() {
        for &(x, lg, _) in FIXTURES {
            let err = (ln_gamma(x) - lg).abs() / lg.abs().max(1.0);
            assert!(err < 1e-12, "ln_gamma({x}): err {err}");
        }
    }

    #[test]
    fn digamma_matches_reference() {
        for &(x, _, psi) in FIXTURES {
            let err = (digamma(x) - psi).abs() / psi.abs().max(1.0);
            assert!(err < 1e-12, "digamma({x}): err {err}");
        }
    }

    #[test]
    fn harmonic_agrees_with_digamma() {
        for k in [1u64, 2, 3, 10, 100, 999, 10_000] {
            assert!((harmonic(k) - (digamma(k as f64 + 1.0) + EULER_GAMMA)).abs() < 1e-12);
        }
        assert_eq!(harmonic_exact(3), BigRational::new(11.into(), 6.into()));
    }

    #[test]
    fn domain() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(digamma(-1.0).is_nan());
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-13);
        assert!((ln_factorial(2000) - ln_gamma(2001.0)).abs() < 1e-9);
    }
}
