use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use super::*;
use crate::exactgeom::{contains, convex_hull, dilate, LatticePoint};
use crate::polyrep::{tensor_support, MatrixShape, SparsePolynomial};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn disc2() -> SparsePolynomial {
    let s = MatrixShape::new(1, 3).unwrap();
    SparsePolynomial::new(s, 2, [(vec![0, 2, 0], c(1.0)), (vec![1, 0, 1], c(-4.0))]).unwrap()
}

fn from_exps(cols: usize, exps: &[Vec<u32>]) -> SparsePolynomial {
    let s = MatrixShape::new(1, cols).unwrap();
    let d = exps[0].iter().sum();
    SparsePolynomial::new(
        s,
        d,
        exps.iter().enumerate().map(|(i, e)| (e.clone(), c(1.0 + i as f64))),
    )
    .unwrap()
}

fn psg(v: &[i64]) -> OnePSG {
    OnePSG::new(v.to_vec()).unwrap()
}

#[test]
fn weight_polytope_examples() {
    let m = from_exps(3, &[vec![2, 1, 0]]);
    assert_eq!(weight_polytope(&m).unwrap().vertices().len(), 1);
    let seg = weight_polytope(&disc2()).unwrap();
    let expected = convex_hull(&[
        LatticePoint::new(vec![r(-2, 3), r(4, 3), r(-2, 3)]),
        LatticePoint::new(vec![r(1, 3), r(-2, 3), r(1, 3)]),
    ])
    .unwrap();
    assert_eq!(seg, expected);
    let q1 = SimplexQN::new(2).unwrap();
    let expected = convex_hull(&[
        LatticePoint::new(vec![r(1, 2), r(-1, 2)]),
        LatticePoint::new(vec![r(-1, 2), r(1, 2)]),
    ])
    .unwrap();
    assert_eq!(q1.polytope(), &expected);
    // The origin is interior to Q_N: a small multiple of every direction fits.
    let q3 = SimplexQN::new(4).unwrap();
    assert!(q3.polytope().contains_point(&LatticePoint::origin(4)));
    assert_eq!(q3.polytope().affine_dim(), 3);
}

#[test]
fn ops_weight_examples() {
    let m = from_exps(3, &[vec![2, 1, 0]]);
    assert_eq!(ops_weight(&m, &psg(&[1, 1, -2])).unwrap(), r(3, 1));
    assert_eq!(ops_weight(&disc2(), &psg(&[1, 0, -1])).unwrap(), r(0, 1));
    assert_eq!(ops_weight(&disc2(), &psg(&[2, -1, -1])).unwrap(), r(-2, 1));
    assert!(OnePSG::new(vec![1, 1, 0]).is_err());
    assert!(ops_weight(&disc2(), &psg(&[1, -1])).is_err());
    let lam = psg(&[2, -1, -1]);
    let by_polytope = crate::exactgeom::support_min(&weight_polytope(&disc2()).unwrap(), &lam.to_functional()).unwrap();
    assert_eq!(by_polytope, r(-2, 1));
}

#[test]
fn semistable_diagonal_examples() {
    let w = disc2();
    assert!(semistable_diagonal(&PairSpec::new(w.clone(), w.clone()).unwrap()).unwrap());
    let vertex = from_exps(3, &[vec![0, 2, 0]]);
    assert!(semistable_diagonal(&PairSpec::new(vertex, w.clone()).unwrap()).unwrap());
    let full = from_exps(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    let mono = from_exps(3, &[vec![0, 1, 0]]);
    assert!(!semistable_diagonal(&PairSpec::new(full, mono).unwrap()).unwrap());
}

#[test]
fn probe_identical_pair_is_certified() {
    let v = from_exps(3, &[vec![2, 0, 0], vec![0, 1, 1], vec![1, 1, 0]]);
    let verdict = semistable_probe(&PairSpec::new(v.clone(), v).unwrap(), 20, 3).unwrap();
    assert_eq!(verdict.status, StabilityStatus::SemistableCertifiedOnDiagonalTorus);
    assert_eq!(verdict.trials, 20);
    assert!(verdict.witness.is_none());
    assert_eq!(verdict.verification_hash.len(), 64);
}

#[test]
fn mumford_reduction() {
    let s = MatrixShape::new(1, 3).unwrap();
    let one = SparsePolynomial::constant(s, c(1.0));
    // 0 ∉ 𝒩(w): every monomial puts weight on column 0 first.
    let w = from_exps(3, &[vec![2, 0, 0], vec![1, 1, 0]]);
    let pair = PairSpec::new(one.clone(), w).unwrap();
    let verdict = semistable_probe(&pair, 10, 5).unwrap();
    assert!(verdict.is_destabilized());
    assert_eq!(verdict.trials, 1);
    let wit = verdict.witness.as_ref().unwrap();
    assert_eq!(wit.trial, 0);
    assert!(wit.weight_v < wit.weight_w);
    assert!(wit.reverify(&pair).unwrap());
    // 0 in the interior of 𝒩(w): the torus cannot destabilize.
    let w = from_exps(3, &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    let pair = PairSpec::new(one, w).unwrap();
    assert!(semistable_diagonal(&pair).unwrap());
}

/// `0 ∈ conv(S)` for points of a plane in ℚ³, by Carathéodory over triples.
fn origin_in_hull_brute(points: &[LatticePoint]) -> bool {
    let zero = LatticePoint::origin(3);
    if points.contains(&zero) {
        return true;
    }
    let n = points.len();
    let in_seg = |a: &LatticePoint, b: &LatticePoint| {
        // 0 = a + t (b − a) with 0 ≤ t ≤ 1.
        let d: Vec<BigRational> = (0..3).map(|k| &b.0[k] - &a.0[k]).collect();
        let k = (0..3).find(|&k| !d[k].is_zero());
        let Some(k) = k else { return false };
        let t = -&a.0[k] / &d[k];
        t >= BigRational::zero()
            && t <= BigRational::from_integer(1.into())
            && (0..3).all(|j| (&a.0[j] + &t * &d[j]).is_zero())
    };
    for i in 0..n {
        for j in i + 1..n {
            if in_seg(&points[i], &points[j]) {
                return true;
            }
            for k in j + 1..n {
                let (a, b, cc) = (&points[i], &points[j], &points[k]);
                // Solve 0 = α a + β b + γ c, α+β+γ = 1 on two coordinates plus the sum row.
                let m = [
                    [a.0[0].clone(), b.0[0].clone(), cc.0[0].clone()],
                    [a.0[1].clone(), b.0[1].clone(), cc.0[1].clone()],
                    [
                        BigRational::from_integer(1.into()),
                        BigRational::from_integer(1.into()),
                        BigRational::from_integer(1.into()),
                    ],
                ];
                let det3 = |m: &[[BigRational; 3]; 3]| {
                    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
                };
                let det = det3(&m);
                if det.is_zero() {
                    continue;
                }
                let rhs = [
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::from_integer(1.into()),
                ];
                let mut coeffs = Vec::new();
                for col in 0..3 {
                    let mut mc = m.clone();
                    for row in 0..3 {
                        mc[row][col] = rhs[row].clone();
                    }
                    coeffs.push(det3(&mc) / &det);
                }
                if coeffs.iter().all(|x| *x >= BigRational::zero()) {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn disc_against_formal_square_matches_brute_force() {
    // 𝒩(v) ⊆ 2𝒩(v) exactly when 0 ∈ 𝒩(v).
    let v = disc2();
    let pair = PairSpec::new(v.clone(), FormalPower::new(v.clone(), 2).unwrap()).unwrap();
    for i in 0..50 {
        let g = trial_element(3, 17, i);
        let acted = v.act(&g).unwrap();
        let oracle = origin_in_hull_brute(&acted.projected_support().unwrap());
        let ours = semistable_diagonal(&pair.act(&g).unwrap()).unwrap();
        assert_eq!(ours, oracle, "trial {i}");
    }
    let verdict = semistable_probe(&pair, 50, 17).unwrap();
    assert_eq!(verdict.status, StabilityStatus::SemistableCertifiedOnDiagonalTorus);
}

#[test]
fn module_degree_examples() {
    assert_eq!(module_degree(&from_exps(3, &[vec![1, 1, 1]])), 3);
    assert_eq!(module_degree(&disc2()), 2);
    assert_eq!(polytope_degree(&disc2()).unwrap(), 2);
    let q2 = SimplexQN::new(3).unwrap();
    assert!(!contains(q2.polytope(), &weight_polytope(&disc2()).unwrap()).unwrap());
    for n in 2..=5 {
        for d in 1..=6 {
            assert_eq!(module_degree_generic(n, d).unwrap(), d);
        }
    }
    // A monomial at the barycenter has polytope degree 0 but module degree d.
    let m = from_exps(3, &[vec![1, 1, 1]]);
    assert_eq!(polytope_degree(&m).unwrap(), 0);
    let f = FormalPower::new(disc2(), 3).unwrap();
    assert_eq!(module_degree(&f), 6);
}

#[test]
fn stable_search_interior_and_obstructed() {
    // 𝒩(w) = 2Q_2 for w = Σ c_i x_i² (c_i > 0) and every real g, since the
    // coefficient of x_j² in g·w is Σ c_i g_ij² > 0; v = 1 sits at the origin.
    let w = from_exps(3, &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    let v = SparsePolynomial::constant(MatrixShape::new(1, 3).unwrap(), c(1.0));
    let pair = PairSpec::new(v, w.clone()).unwrap();
    // (m+1)·2Q ⊇ qQ + {0} ⟺ 2(m+1) ≥ q.
    let res = stable_search(&pair, 7, 50, StableVariant::Pair, 5, 1).unwrap();
    assert_eq!(res.m, Some(3));
    assert_eq!(res.cross_check.unwrap().status, StabilityStatus::StableWithExponent(3));
    let res = stable_search(&pair, 7, 50, StableVariant::Variety, 0, 1).unwrap();
    assert_eq!(res.m, Some(4));
    assert!(res.cross_check.is_none());
    // Not contained: no m helps.
    let big = from_exps(3, &[vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3]]);
    let pair = PairSpec::new(big, from_exps(3, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]])).unwrap();
    assert!(!semistable_diagonal(&pair).unwrap());
    assert_eq!(stable_search(&pair, 1, 50, StableVariant::Pair, 0, 0).unwrap().m, None);
    assert!(stable_search(&pair, 0, 50, StableVariant::Pair, 0, 0).is_err());
    // The barycentric monomial x0·x1·x2 also sits at the origin on the diagonal
    // torus, but its conjugates spread to 3Q_2 and the cross-check catches it.
    let pair = PairSpec::new(from_exps(3, &[vec![1, 1, 1]]), w).unwrap();
    let res = stable_search(&pair, 7, 50, StableVariant::Pair, 5, 1).unwrap();
    assert_eq!(res.m, Some(3));
    let cc = res.cross_check.unwrap();
    assert!(cc.is_destabilized());
    assert!(cc.witness.unwrap().reverify_twisted(&pair, 7, 3, 4).unwrap());
}

#[test]
fn stable_search_identical_pair_is_m_independent() {
    let w = from_exps(3, &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    let pair = PairSpec::new(w.clone(), w.clone()).unwrap();
    let pw = weight_polytope(&w).unwrap();
    for q in 1..=4u64 {
        let fits = contains(&pw, &SimplexQN::new(3).unwrap().dilated(q)).unwrap();
        let res = stable_search(&pair, q, 20, StableVariant::Pair, 0, 0).unwrap();
        assert_eq!(res.m.is_some(), fits, "q = {q}");
        if fits {
            assert_eq!(res.m, Some(1));
        }
    }
}

#[test]
fn twisted_witness_reverifies() {
    let w = from_exps(3, &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    let v = from_exps(3, &[vec![1, 1, 1]]);
    let pair = PairSpec::new(v, w).unwrap();
    // m = 1 with q = 7 fails at the identity.
    let verdict = super::twisted_probe(&pair, 7, 1, StableVariant::Pair, 3, 9).unwrap();
    assert!(verdict.is_destabilized());
    let wit = verdict.witness.unwrap();
    assert!(wit.reverify_twisted(&pair, 7, 1, 2).unwrap());
}

fn arb_support(cols: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    (1u32..=3).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(0..cols, d as usize), 1..6).prop_map(move |sets| {
            sets.into_iter()
                .map(|vars| {
                    let mut e = vec![0u32; cols];
                    for v in vars {
                        e[v] += 1;
                    }
                    e
                })
                .collect()
        })
    })
}

fn arb_lambda(cols: usize) -> impl Strategy<Value = OnePSG> {
    prop::collection::vec(-5i64..=5, cols - 1).prop_map(|mut v| {
        let s: i64 = v.iter().sum();
        v.push(-s);
        OnePSG::new(v).unwrap()
    })
}

fn arb_case() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<Vec<u32>>, Vec<OnePSG>)> {
    (2usize..=4).prop_flat_map(|cols| {
        (
            arb_support(cols),
            arb_support(cols),
            prop::collection::vec(arb_lambda(cols), 20),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn containment_iff_weight_inequalities((sv, sw, lambdas) in arb_case()) {
        let cols = sv[0].len();
        let v = from_exps(cols, &sv);
        let w = from_exps(cols, &sw);
        let nv = weight_polytope(&v).unwrap();
        let nw = weight_polytope(&w).unwrap();
        let contained = contains(&nw, &nv).unwrap();
        let mut all = facet_psgs(&nw);
        all.extend(lambdas);
        let by_weights = all.iter().all(|l| ops_weight(&v, l).unwrap() >= ops_weight(&w, l).unwrap());
        prop_assert_eq!(contained, by_weights);
    }

    #[test]
    fn tensor_additivity((sv, sw, lambdas) in arb_case()) {
        let cols = sv[0].len();
        let v = from_exps(cols, &sv);
        let w = from_exps(cols, &sw);
        let ts = tensor_support(&v, &w).unwrap();
        for l in &lambdas {
            let direct = ts.iter().map(|a| a.pair(l.exponents())).min().unwrap();
            let sum = ops_weight(&v, l).unwrap() + ops_weight(&w, l).unwrap();
            prop_assert_eq!(BigRational::from_integer(direct.into()), sum);
        }
    }

    #[test]
    fn formal_power_linearity((sv, _sw, lambdas) in arb_case(), k in 1u32..=5) {
        let cols = sv[0].len();
        let v = from_exps(cols, &sv);
        let f = FormalPower::new(v.clone(), k).unwrap();
        let kq = BigRational::from_integer(k.into());
        prop_assert_eq!(
            weight_polytope(&f).unwrap(),
            dilate(&weight_polytope(&v).unwrap(), &kq).unwrap()
        );
        for l in &lambdas {
            prop_assert_eq!(ops_weight(&f, l).unwrap(), ops_weight(&v, l).unwrap() * &kq);
        }
    }

    #[test]
    fn projected_and_raw_weights_agree((sv, _sw, lambdas) in arb_case()) {
        let cols = sv[0].len();
        let v = from_exps(cols, &sv);
        let nv = weight_polytope(&v).unwrap();
        for l in &lambdas {
            let projected = crate::exactgeom::support_min(&nv, &l.to_functional()).unwrap();
            prop_assert_eq!(projected, ops_weight(&v, l).unwrap());
        }
    }

    #[test]
    fn witnesses_reverify((sv, sw, _l) in arb_case(), seed in any::<u64>()) {
        let cols = sv[0].len();
        let pair = PairSpec::new(from_exps(cols, &sv), from_exps(cols, &sw)).unwrap();
        let verdict = semistable_probe(&pair, 4, seed).unwrap();
        if let Some(w) = &verdict.witness {
            prop_assert!(w.reverify(&pair).unwrap());
        } else {
            prop_assert!(semistable_diagonal(&pair).unwrap());
        }
    }
}
