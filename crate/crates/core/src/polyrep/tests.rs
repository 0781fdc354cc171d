use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exactgeom::{convex_hull, minkowski_sum};
use crate::igusa::gamma::EULER_GAMMA;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn disc2() -> SparsePolynomial {
    let s = MatrixShape::new(1, 3).unwrap();
    SparsePolynomial::new(s, 2, [(vec![0, 2, 0], c(1.0)), (vec![1, 0, 1], c(-4.0))]).unwrap()
}

fn chars(v: &[&[u32]]) -> BTreeSet<TorusCharacter> {
    v.iter().map(|x| TorusCharacter::new(x.to_vec())).collect()
}

#[test]
fn support_examples() {
    let s = MatrixShape::new(2, 3).unwrap();
    let p = SparsePolynomial::variable(s, 0, 0);
    assert_eq!(p.support().unwrap(), chars(&[&[1, 0, 0]]));
    assert_eq!(disc2().support().unwrap(), chars(&[&[0, 2, 0], &[1, 0, 1]]));
    assert!(matches!(
        SparsePolynomial::zero(s, 2).support(),
        Err(Error::ZeroPolynomial)
    ));
}

#[test]
fn identity_and_torus_action() {
    let p = disc2();
    assert_eq!(p.act(&GroupElement::identity(3)).unwrap(), p);
    let t = [c(2.0), c(3.0), c(0.5)];
    let acted = p.act(&GroupElement::diagonal(&t).unwrap()).unwrap();
    // (0,2,0) scales by 3^2, (1,0,1) by 2*0.5.
    assert_eq!(acted.coefficient(&[0, 2, 0]), c(9.0));
    assert_eq!(acted.coefficient(&[1, 0, 1]), c(-4.0));
}

#[test]
fn reversal_swaps_outer_coefficients() {
    let s = MatrixShape::new(1, 3).unwrap();
    // A generic quadratic form with distinct a0, a2 weights to see the swap.
    let p = SparsePolynomial::new(
        s,
        2,
        [
            (vec![2, 0, 0], c(5.0)),
            (vec![0, 1, 1], c(7.0)),
            (vec![1, 0, 1], c(-4.0)),
        ],
    )
    .unwrap();
    let rev = GroupElement::permutation(&[2, 1, 0]).unwrap();
    let acted = p.act(&rev).unwrap();
    let expected = SparsePolynomial::new(
        s,
        2,
        [
            (vec![0, 0, 2], c(5.0)),
            (vec![1, 1, 0], c(7.0)),
            (vec![1, 0, 1], c(-4.0)),
        ],
    )
    .unwrap();
    assert_eq!(acted, expected);
    assert_eq!(disc2().act(&rev).unwrap(), disc2());
}

#[test]
fn evaluate_examples() {
    let s = MatrixShape::new(1, 3).unwrap();
    let k = SparsePolynomial::constant(s, c(2.5));
    let a = CMatrix::from_row_slice(1, 3, &[c(1.0), c(0.0), c(-1.0)]);
    assert_eq!(k.evaluate(&a).unwrap(), c(2.5));
    assert_eq!(disc2().evaluate(&a).unwrap(), c(4.0));
    let wrong = CMatrix::zeros(2, 3);
    assert!(matches!(disc2().evaluate(&wrong), Err(Error::ShapeMismatch { .. })));
    let nan = CMatrix::from_row_slice(1, 3, &[c(f64::NAN), c(0.0), c(0.0)]);
    assert!(disc2().evaluate(&nan).is_err());
}

#[test]
fn tensor_support_examples() {
    let s = MatrixShape::new(1, 3).unwrap();
    let k = SparsePolynomial::constant(s, c(1.0));
    assert_eq!(tensor_support(&disc2(), &k).unwrap(), disc2().support().unwrap());
    let a = SparsePolynomial::monomial(s, vec![1, 0, 2], c(1.0)).unwrap();
    let b = SparsePolynomial::monomial(s, vec![0, 3, 0], c(1.0)).unwrap();
    assert_eq!(tensor_support(&a, &b).unwrap(), chars(&[&[1, 3, 2]]));
    let sq = tensor_support(&disc2(), &disc2()).unwrap();
    let hull_sq = convex_hull(&sq.iter().map(TorusCharacter::projected).collect::<Vec<_>>()).unwrap();
    let hull = convex_hull(&disc2().projected_support().unwrap()).unwrap();
    assert_eq!(
        hull_sq,
        crate::exactgeom::dilate(&hull, &BigRational::from_integer(2.into())).unwrap()
    );
}

#[test]
fn json_round_trip() {
    let p = disc2();
    let text = serde_json::to_string(&p.to_json()).unwrap();
    assert!(text.starts_with("{\"shape\":[1,3],\"degree\":2,\"terms\":["));
    let back = SparsePolynomial::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, p);
    let bad = r#"{"shape":[1,3],"degree":2,"terms":[{"exps":[[1,1]],"re":1.0,"im":0.0}]}"#;
    let err = SparsePolynomial::from_json(&serde_json::from_str(bad).unwrap()).unwrap_err();
    assert!(err.to_string().contains("terms[0].exps"));
}

#[test]
fn black_box_homogeneity_check() {
    let s = MatrixShape::new(1, 2).unwrap();
    let ok = BlackBoxPolynomial::new(s, 2, "z0*z1", |a: &CMatrix| a[(0, 0)] * a[(0, 1)]);
    assert!(ok.is_ok());
    let bad = BlackBoxPolynomial::new(s, 2, "z0^2+z1", |a: &CMatrix| a[(0, 0)] * a[(0, 0)] + a[(0, 1)]);
    assert!(matches!(bad, Err(Error::NotHomogeneous { degree: 2 })));
}

#[test]
fn gaussian_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = MatrixShape::new(1, 1).unwrap();
    let n = 1_000_000;
    let (mut m2, mut m2sq, mut re, mut re2, mut lg, mut lg2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let z = gaussian_sample(s, &mut rng)[(0, 0)];
        let a = z.norm_sqr();
        m2 += a;
        m2sq += a * a;
        re += z.re;
        re2 += z.re * z.re;
        lg += a.ln();
        lg2 += a.ln() * a.ln();
    }
    let nf = n as f64;
    let check = |sum: f64, sumsq: f64, target: f64| {
        let mean = sum / nf;
        let se = ((sumsq / nf - mean * mean) / nf).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "mean {mean} target {target} se {se}");
    };
    check(m2, m2sq, 1.0);
    check(re, re2, 0.0);
    check(lg, lg2, -EULER_GAMMA);
}

fn arb_poly(rows: usize, cols: usize, degree: u32) -> impl Strategy<Value = SparsePolynomial> {
    let nv = rows * cols;
    prop::collection::vec(
        (prop::collection::vec(0..nv, degree as usize), -3i32..=3, -3i32..=3),
        1..5,
    )
    .prop_map(move |terms| {
        let shape = MatrixShape::new(rows, cols).unwrap();
        let t = terms.into_iter().map(|(vars, re, im)| {
            let mut e = vec![0u32; nv];
            for v in vars {
                e[v] += 1;
            }
            (e, Complex64::new(re as f64, im as f64))
        });
        SparsePolynomial::new(shape, degree, t).unwrap()
    })
    .prop_filter("nonzero", |p| !p.is_zero())
}

fn arb_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_sample(MatrixShape::new(n, n).unwrap(), &mut rng) * c(0.6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(p in arb_poly(2, 3, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian_sample(p.shape(), &mut rng);
        let t = Complex64::new(0.9, -0.7);
        let lhs = p.evaluate(&(&a * t)).unwrap();
        let rhs = p.evaluate(&a).unwrap() * t.powu(3);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(rhs.norm()).max(1e-12));
    }

    #[test]
    fn composition_law(p in arb_poly(2, 3, 3), s1 in any::<u64>(), s2 in any::<u64>()) {
        let g1 = GroupElement::new(arb_matrix(3, s1)).unwrap();
        let g2 = GroupElement::new(arb_matrix(3, s2)).unwrap();
        let lhs = p.act(&g2).unwrap().act(&g1).unwrap();
        let rhs = p.act(&g1.mul(&g2)).unwrap();
        let scale = lhs.terms().map(|(_, c)| c.norm()).fold(1e-12, f64::max);
        for (e, _) in lhs.terms().chain(rhs.terms()) {
            prop_assert!((lhs.coefficient(e) - rhs.coefficient(e)).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn permutation_covariance(p in arb_poly(2, 3, 2), k in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let perm = perms[k];
        let g = GroupElement::permutation(&perm).unwrap();
        let acted = p.act(&g).unwrap().support().unwrap();
        // (Aσ)_{r,j} = A_{r,perm⁻¹(j)}, so column i inherits the degree of column perm[i].
        let expected: BTreeSet<TorusCharacter> = p.support().unwrap().iter().map(|ch| {
            let mut out = vec![0; 3];
            for j in 0..3 {
                out[j] = ch.raw()[perm[j]];
            }
            TorusCharacter::new(out)
        }).collect();
        prop_assert_eq!(acted, expected);
    }

    #[test]
    fn tensor_hull_is_minkowski_sum(v in arb_poly(1, 4, 2), w in arb_poly(1, 4, 3)) {
        let ts = tensor_support(&v, &w).unwrap();
        let lhs = convex_hull(&ts.iter().map(TorusCharacter::projected).collect::<Vec<_>>()).unwrap();
        let hv = convex_hull(&v.projected_support().unwrap()).unwrap();
        let hw = convex_hull(&w.projected_support().unwrap()).unwrap();
        prop_assert_eq!(lhs, minkowski_sum(&hv, &hw).unwrap());
    }
}
