use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gamma::{digamma, harmonic, ln_gamma, EULER_GAMMA};
use super::zeta::{log_zeta_det, zeta_prime_det};
use super::*;
use crate::polyrep::builtins::{coordinate_power, determinant};
use crate::polyrep::{GroupElement, MatrixShape, Poly, SparsePolynomial};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn disc2() -> SparsePolynomial {
    let s = MatrixShape::new(1, 3).unwrap();
    SparsePolynomial::new(s, 2, [(vec![0, 2, 0], c(1.0)), (vec![1, 0, 1], c(-4.0))]).unwrap()
}

fn within(est: f64, target: f64, se: f64) -> bool {
    (est - target).abs() <= 3.0 * se
}

#[test]
fn zeta_at_zero_is_one() {
    for p in [Poly::from(disc2()), determinant(3).unwrap().into()] {
        let z = zeta(&p, 0.0, 10, 1).unwrap();
        assert_eq!((z.value, z.log_value, z.stderr), (1.0, 0.0, 0.0));
    }
}

#[test]
fn zeta_examples() {
    let z0 = Poly::from(coordinate_power(2, 1).unwrap());
    let z = zeta(&z0, 1.0, 400_000, 11).unwrap();
    assert!(within(z.value, 0.5, z.stderr), "{z:?}");
    let det2 = Poly::from(determinant(2).unwrap());
    let z = zeta(&det2, 1.0, 400_000, 12).unwrap();
    assert!(within(z.value, 0.1, z.stderr), "{z:?}");
    assert!((z.log_value - z.value.ln()).abs() < 1e-15);
}

#[test]
fn determinant_closed_forms() {
    let pi = std::f64::consts::PI;
    assert!((zeta_det_closed(1, 1.0, DetConvention::Paper).unwrap() - 1.0 / pi).abs() < 1e-14);
    assert!((zeta_det_closed(1, 1.0, DetConvention::Standard).unwrap() - 1.0).abs() < 1e-14);
    assert!((zeta_det_closed(2, 1.0, DetConvention::Standard).unwrap() - 2.0).abs() < 1e-13);
    // ∏_{k=1}^3 Γ(1+k)/Γ(k) = 1·2·3.
    assert!((zeta_det_closed(3, 1.0, DetConvention::Standard).unwrap() - 6.0).abs() < 1e-12);
    assert!(zeta_det_closed(0, 1.0, DetConvention::Standard).is_err());
    assert_eq!("paper".parse::<DetConvention>().unwrap(), DetConvention::Paper);
    assert!("other".parse::<DetConvention>().is_err());
}

#[test]
fn determinant_moments_match_sampling() {
    for n in 1..=3u32 {
        for s in [1.0, 2.0] {
            let p = Poly::from(determinant(n as usize).unwrap());
            let m = mc_moment(&p, s, 1_000_000, 100 + u64::from(n)).unwrap();
            let exact = zeta_det_closed(n, s, DetConvention::Standard).unwrap();
            assert!(
                within(m.mean, exact, m.stderr),
                "n={n} s={s}: {} vs {exact} ± {}",
                m.mean,
                m.stderr
            );
        }
    }
}

#[test]
fn zeta_prime_examples() {
    let s = MatrixShape::new(1, 2).unwrap();
    let k = Poly::from(SparsePolynomial::constant(s, c(3.0)));
    assert!((zeta_prime_zero(&k, 10, 0).unwrap().value - 9f64.ln()).abs() < 1e-15);
    let z0 = Poly::from(coordinate_power(2, 1).unwrap());
    let zp = zeta_prime_zero(&z0, 400_000, 5).unwrap();
    assert!(within(zp.value, -1.0, zp.stderr), "{zp:?}");
    let z02 = Poly::from(coordinate_power(2, 2).unwrap());
    let zp = zeta_prime_zero(&z02, 400_000, 6).unwrap();
    assert!(within(zp.value, -2.0, zp.stderr), "{zp:?}");
}

#[test]
fn height_examples() {
    let s = MatrixShape::new(1, 2).unwrap();
    let k = Poly::from(SparsePolynomial::constant(s, c(5.0)));
    let h = height(&k, 10, 0, DetConvention::Standard).unwrap();
    assert!(h.h.abs() < 1e-14);
    let z0 = Poly::from(coordinate_power(2, 1).unwrap());
    let h = height(&z0, 10, 0, DetConvention::Standard).unwrap();
    assert_eq!(h.method, HeightMethod::ClosedForm);
    assert!((h.h - (2f64.ln() - 1.0)).abs() < 1e-14);
    assert_eq!(h.h, -h.log_z1 + h.zprime0);
    let mc = height_monte_carlo(&z0, 400_000, 3).unwrap();
    assert!(within(mc.h, h.h, mc.stderr), "{mc:?}");
}

#[test]
fn monomial_heights_match_formula() {
    // h(z_0^d) = log C(N+d, d) − d·H_N.
    for (n, d) in [(1usize, 1u32), (1, 2), (2, 2), (3, 4)] {
        let h = height(
            &Poly::from(coordinate_power(n + 1, d).unwrap()),
            0,
            0,
            DetConvention::Standard,
        )
        .unwrap();
        let binom = ln_gamma((n as u32 + d + 1) as f64) - ln_gamma(f64::from(d) + 1.0) - ln_gamma(n as f64 + 1.0);
        assert!((h.h - (binom - f64::from(d) * harmonic(n as u64))).abs() < 1e-12);
    }
}

#[test]
fn random_monomials_closed_vs_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for t in 0..10 {
        let cols = rng.random_range(2..=4usize);
        let d = rng.random_range(1..=4u32);
        let mut e = vec![0u32; cols];
        for _ in 0..d {
            e[rng.random_range(0..cols)] += 1;
        }
        let p = SparsePolynomial::monomial(MatrixShape::new(1, cols).unwrap(), e, c(2.0)).unwrap();
        let closed = height(&Poly::from(p.clone()), 0, 0, DetConvention::Standard).unwrap();
        let mc = height_monte_carlo(&Poly::from(p), 200_000, 1000 + t).unwrap();
        assert!(within(mc.h, closed.h, mc.stderr), "trial {t}: {} vs {}", mc.h, closed.h);
    }
}

#[test]
fn determinant_heights_closed_vs_sampled() {
    for n in 1..=3usize {
        let p = Poly::from(determinant(n).unwrap());
        let closed = height(&p, 0, 0, DetConvention::Standard).unwrap();
        assert_eq!(closed.method, HeightMethod::ClosedForm);
        assert!(closed.alternate_convention.is_some());
        let mc = height_monte_carlo(&p, 300_000, 40 + n as u64).unwrap();
        assert!(within(mc.h, closed.h, mc.stderr), "n={n}: {} vs {}", mc.h, closed.h);
        assert!(closed.h <= 0.0);
    }
}

#[test]
fn disc_height_scale_and_unitary_invariance() {
    let p = disc2();
    let a = height(&Poly::from(p.clone()), 300_000, 1, DetConvention::Standard).unwrap();
    assert_eq!(a.method, HeightMethod::Mixed);
    let b = height(&Poly::from(p.scale(c(10.0))), 300_000, 2, DetConvention::Standard).unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.h - b.h).abs() < 3.0 * se, "{} vs {}", a.h, b.h);
    let u = GroupElement::random_unitary(3, &mut ChaCha8Rng::seed_from_u64(8));
    let pu = p.act(&u).unwrap();
    let cu = height(&Poly::from(pu), 300_000, 3, DetConvention::Standard).unwrap();
    let se = (a.stderr.powi(2) + cu.stderr.powi(2)).sqrt();
    assert!((a.h - cu.h).abs() < 3.0 * se, "{} vs {}", a.h, cu.h);
    // Exact norm path and pure sampling agree.
    let mc = height_monte_carlo(&Poly::from(p), 300_000, 4).unwrap();
    let se = (a.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
    assert!((a.h - mc.h).abs() < 3.0 * se);
    assert!(a.h < 0.0);
}

#[test]
fn two_height_forms_agree() {
    let p = Poly::from(disc2());
    let r = height(&p, 50_000, 9, DetConvention::Standard).unwrap();
    let j = joint_moments(&p, 50_000, 9).unwrap();
    let d = 2.0;
    let dim = 3.0;
    let direct = j.moments.mean_y
        - d * digamma(dim)
        - (ln_gamma(dim) - ln_gamma(dim + d) + disc2().log_gaussian_norm_sq().unwrap());
    assert_eq!(r.h, direct);
}

#[test]
fn formal_power_heights_scale() {
    let f = crate::polyrep::FormalPower::new(coordinate_power(2, 1).unwrap(), 4).unwrap();
    let h = height_formal(&f, 0, 0, DetConvention::Standard).unwrap();
    assert!((h.h - 4.0 * (2f64.ln() - 1.0)).abs() < 1e-13);
}

#[test]
fn bounds_audit_examples() {
    let z = Poly::from(coordinate_power(3, 2).unwrap());
    let a = height_bounds_audit(&z, 0, 0).unwrap();
    assert!((a.lower_full - (-2.0 * 1.5)).abs() < 1e-14);
    assert!(a.within_full && a.within_printed && a.below_upper);
    // On ℙ¹ the printed sum is empty, yet h(z0) = log 2 − 1 < 0.
    let a = height_bounds_audit(&Poly::from(coordinate_power(2, 1).unwrap()), 0, 0).unwrap();
    assert_eq!(a.lower_printed, 0.0);
    assert!(!a.within_printed && a.within_full);
    let k = Poly::from(SparsePolynomial::constant(MatrixShape::new(1, 2).unwrap(), c(1.0)));
    let a = height_bounds_audit(&k, 0, 0).unwrap();
    assert!(a.report.h.abs() < 1e-14 && a.within_printed);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let terms: Vec<(Vec<u32>, Complex64)> = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]]
        .iter()
        .map(|e| {
            (
                e.to_vec(),
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let q = SparsePolynomial::new(MatrixShape::new(1, 3).unwrap(), 2, terms).unwrap();
    let a = height_bounds_audit(&Poly::from(q), 200_000, 6).unwrap();
    assert!(a.within_printed && a.within_full, "{:?}", a.report);
    assert!(height_bounds_audit(&Poly::from(determinant(2).unwrap()), 10, 0).is_err());
}

#[test]
fn degeneration_examples() {
    for d in 2..=6 {
        let r = rnc_degeneration(d, DetConvention::Standard).unwrap();
        assert!(r.hf.is_finite() && r.hf < 0.0, "d={d}: {}", r.hf);
        assert!(r.delta >= 0.0);
        assert!((r.hf - (r.hf_leading + r.hf_remainder)).abs() < 1e-9);
    }
    let (ratio, _) = rnc_delta_ratio(10, 200, DetConvention::Standard).unwrap();
    assert!(ratio < 3.0, "{ratio}");
    let fit = rnc_leading_fit(20, 200, DetConvention::Paper).unwrap();
    assert!((fit.log_z_coefficient - 1.0).abs() < 0.1, "{fit:?}");
    assert!((fit.hf_coefficient + 2.0).abs() < 0.2, "{fit:?}");
    assert!(rnc_degeneration(1, DetConvention::Standard).is_err());
}

#[test]
fn degeneration_matches_direct_gamma_evaluation() {
    // n = 1, N = d: det_2 on 2 x (d+1) and det_1 on 1 x (d+1).
    let d = 7u64;
    let r = rnc_degeneration(d, DetConvention::Standard).unwrap();
    let cols = (d + 1) as f64;
    let a2 = 2.0 * cols;
    let log_z2 = ln_gamma(a2) - ln_gamma(a2 + 2.0 * d as f64)
        + (ln_gamma(d as f64 + 1.0) - ln_gamma(1.0))
        + (ln_gamma(d as f64 + 2.0) - ln_gamma(2.0));
    let zp2 = -2.0 * digamma(a2) + digamma(1.0) + digamma(2.0);
    let hf = (2 * d) as f64 / 2.0 * zp2 - log_z2;
    assert!((r.hf - hf).abs() < 1e-9 * hf.abs());
    let s = (2 * d - 2) as f64;
    let log_z1 = ln_gamma(cols) - ln_gamma(cols + s) + ln_gamma(s + 1.0);
    let zp1 = -digamma(cols) - EULER_GAMMA;
    let hd = s * zp1 - log_z1;
    assert!((r.hdelta - hd).abs() < 1e-9 * hd.abs());
    assert!((log_zeta_det(1, 3, 0.0, DetConvention::Paper)).abs() < 1e-14);
    assert!(zeta_prime_det(1, 1, DetConvention::Standard).is_finite());
}
