//! Exact rational lattice-polytope kernel.
//!
//! Polytopes are stored by their irredundant vertex set; the halfspace
//! description (affine-hull equalities plus facet inequalities) is derived on
//! first use and cached. Lower-dimensional polytopes are handled directly: the
//! facet computation runs in coordinates of the affine hull.

mod dd;
pub(crate) mod linalg;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use linalg::{dot, normalize_gcd, nullspace, rank, rref};

/// A point of the character space `M_Q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<BigRational>);

impl LatticePoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        LatticePoint(coords)
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(coords: I) -> Self {
        LatticePoint(
            coords
                .into_iter()
                .map(|c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![BigRational::zero(); dim])
    }

    pub fn scaled(&self, k: &BigRational) -> Self {
        LatticePoint(self.0.iter().map(|x| x * k).collect())
    }

    pub fn add(&self, other: &LatticePoint) -> Self {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Subtract the coordinate mean, landing in the sum-zero hyperplane.
    pub fn project_sum_zero(&self) -> Self {
        let n = BigRational::from_integer(BigInt::from(self.0.len()));
        let mean = self.0.iter().fold(BigRational::zero(), |a, b| a + b) / n;
        LatticePoint(self.0.iter().map(|x| x - &mean).collect())
    }
}

/// Integral linear functional on the character space with coefficients summing
/// to zero, i.e. a one-parameter subgroup of the diagonal torus of SL.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearFunctional(Vec<i64>);

impl LinearFunctional {
    pub fn new(coefficients: Vec<i64>) -> Result<Self> {
        let s: i64 = coefficients.iter().sum();
        if s != 0 {
            return Err(Error::NotSumZero(s.to_string()));
        }
        Ok(LinearFunctional(coefficients))
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, p: &LatticePoint) -> BigRational {
        self.0.iter().zip(p.coords()).fold(BigRational::zero(), |acc, (c, x)| {
            acc + x * BigRational::from_integer((*c).into())
        })
    }

    pub(crate) fn as_rational(&self) -> Vec<BigRational> {
        self.0.iter().map(|c| BigRational::from_integer((*c).into())).collect()
    }
}

/// `normal . x + offset >= 0` (or `== 0` for equalities).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    pub normal: Vec<BigRational>,
    pub offset: BigRational,
}

impl Halfspace {
    pub fn value(&self, x: &LatticePoint) -> BigRational {
        dot(&self.normal, x.coords()) + &self.offset
    }
}

#[derive(Clone, Debug, Default)]
pub struct HalfspaceRep {
    pub equalities: Vec<Halfspace>,
    pub inequalities: Vec<Halfspace>,
}

/// A vertex of `inner` lying outside `outer`, with a functional whose minimum
/// over `outer` strictly exceeds its value at that vertex.
#[derive(Clone, Debug)]
pub struct Separation {
    pub vertex: LatticePoint,
    pub functional: Vec<BigRational>,
    pub outer_min: BigRational,
}

#[derive(Debug)]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<LatticePoint>,
    halfspaces: OnceLock<HalfspaceRep>,
}

impl Clone for LatticePolytope {
    fn clone(&self) -> Self {
        LatticePolytope {
            dim: self.dim,
            vertices: self.vertices.clone(),
            halfspaces: self.halfspaces.clone(),
        }
    }
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for LatticePolytope {}

struct HullData {
    vertices: Vec<LatticePoint>,
    rep: HalfspaceRep,
}

fn check_dims(points: &[LatticePoint]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    Ok(dim)
}

fn integer_scale(v: Vec<BigRational>) -> Vec<BigRational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    normalize_gcd(ints).into_iter().map(BigRational::from_integer).collect()
}

fn hull_data(points: &[LatticePoint]) -> HullData {
    let unique: Vec<LatticePoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let dim = unique[0].dim();
    let p0 = unique[0].clone();
    let diffs: Vec<Vec<BigRational>> = unique[1..]
        .iter()
        .map(|p| p.coords().iter().zip(p0.coords()).map(|(a, b)| a - b).collect())
        .collect();
    let (span, pivots) = if diffs.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        rref(diffs)
    };

    let equalities: Vec<Halfspace> = nullspace(&span, &pivots, dim)
        .into_iter()
        .map(|n| {
            let n = integer_scale(n);
            let offset = -dot(&n, p0.coords());
            Halfspace { normal: n, offset }
        })
        .collect();

    let r = pivots.len();
    if r == 0 {
        return HullData {
            vertices: unique,
            rep: HalfspaceRep {
                equalities,
                inequalities: Vec::new(),
            },
        };
    }

    // Local coordinates: the pivot columns are injective on the affine hull.
    let local: Vec<Vec<BigRational>> = unique
        .iter()
        .map(|p| pivots.iter().map(|&c| p.coords()[c].clone()).collect())
        .collect();
    let lcm = local.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = BigRational::from_integer(lcm.clone());
    let rows: Vec<Vec<BigInt>> = local
        .iter()
        .map(|q| {
            let mut row = vec![BigInt::one()];
            row.extend(q.iter().map(|x| (x * &scale).to_integer()));
            row
        })
        .collect();

    let rays = dd::facet_rays(&rows);

    let inequalities: Vec<Halfspace> = rays
        .iter()
        .map(|y| {
            let mut normal = vec![BigRational::zero(); dim];
            for (k, &c) in pivots.iter().enumerate() {
                normal[c] = BigRational::from_integer(&y[k + 1] * &lcm);
            }
            Halfspace {
                normal,
                offset: BigRational::from_integer(y[0].clone()),
            }
        })
        .collect();

    // A point is a vertex iff its tight facets have rank r in the cone space.
    let vertices: Vec<LatticePoint> = unique
        .iter()
        .zip(&rows)
        .filter(|(_, row)| {
            let tight: Vec<Vec<BigRational>> = rays
                .iter()
                .filter(|y| linalg::dot_int(row, y).is_zero())
                .map(|y| y.iter().cloned().map(BigRational::from_integer).collect())
                .collect();
            tight.len() >= r && rank(tight) == r
        })
        .map(|(p, _)| p.clone())
        .collect();

    HullData {
        vertices,
        rep: HalfspaceRep {
            equalities,
            inequalities,
        },
    }
}

/// Convex hull of a nonempty point set, as an irredundant vertex set.
pub fn convex_hull(points: &[LatticePoint]) -> Result<LatticePolytope> {
    let dim = check_dims(points)?;
    let data = hull_data(points);
    let halfspaces = OnceLock::new();
    let _ = halfspaces.set(data.rep);
    Ok(LatticePolytope {
        dim,
        vertices: data.vertices,
        halfspaces,
    })
}

/// Closed containment `inner ⊆ outer`.
pub fn contains(outer: &LatticePolytope, inner: &LatticePolytope) -> Result<bool> {
    Ok(outer.separate(inner)?.is_none())
}

pub fn minkowski_sum(p: &LatticePolytope, q: &LatticePolytope) -> Result<LatticePolytope> {
    p.check_same_dim(q.dim)?;
    let sums: Vec<LatticePoint> = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| a.add(b)))
        .collect();
    convex_hull(&sums)
}

pub fn dilate(p: &LatticePolytope, k: &BigRational) -> Result<LatticePolytope> {
    if k.is_negative() {
        return Err(Error::NegativeScale);
    }
    if k.is_zero() {
        return LatticePolytope::point(LatticePoint::origin(p.dim));
    }
    // Positive scaling maps extreme points to extreme points.
    let vertices = p.vertices.iter().map(|v| v.scaled(k)).collect();
    Ok(LatticePolytope {
        dim: p.dim,
        vertices,
        halfspaces: OnceLock::new(),
    })
}

pub fn support_min(p: &LatticePolytope, lambda: &LinearFunctional) -> Result<BigRational> {
    p.check_same_dim(lambda.dim())?;
    Ok(p.min_of(&lambda.as_rational()))
}

impl LatticePolytope {
    pub fn point(p: LatticePoint) -> Result<Self> {
        convex_hull(&[p])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        self.dim - self.halfspaces().equalities.len()
    }

    pub fn halfspaces(&self) -> &HalfspaceRep {
        self.halfspaces.get_or_init(|| hull_data(&self.vertices).rep)
    }

    fn check_same_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }

    pub fn min_of(&self, f: &[BigRational]) -> BigRational {
        self.vertices
            .iter()
            .map(|v| dot(f, v.coords()))
            .min()
            .expect("polytope has at least one vertex")
    }

    pub fn contains_point(&self, x: &LatticePoint) -> bool {
        let rep = self.halfspaces();
        rep.equalities.iter().all(|h| h.value(x).is_zero())
            && rep.inequalities.iter().all(|h| !h.value(x).is_negative())
    }

    /// First vertex of `inner` outside `self`, with a separating functional.
    pub fn separate(&self, inner: &LatticePolytope) -> Result<Option<Separation>> {
        self.check_same_dim(inner.dim)?;
        let rep = self.halfspaces();
        for v in &inner.vertices {
            for h in &rep.equalities {
                let val = h.value(v);
                if !val.is_zero() {
                    // On `self` the value is 0; flip so that the vertex is below.
                    let functional = if val.is_negative() {
                        h.normal.clone()
                    } else {
                        h.normal.iter().map(|x| -x).collect()
                    };
                    let outer_min = self.min_of(&functional);
                    return Ok(Some(Separation {
                        vertex: v.clone(),
                        functional,
                        outer_min,
                    }));
                }
            }
            for h in &rep.inequalities {
                if h.value(v).is_negative() {
                    let outer_min = self.min_of(&h.normal);
                    return Ok(Some(Separation {
                        vertex: v.clone(),
                        functional: h.normal.clone(),
                        outer_min,
                    }));
                }
            }
        }
        Ok(None)
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.coords().iter().map(|x| x.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &PolytopeJson) -> Result<Self> {
        let points = j
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.iter()
                    .enumerate()
                    .map(|(k, s)| {
                        BigRational::from_str(s).map_err(|e| Error::parse(format!("vertices[{i}][{k}]"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(LatticePoint)
            })
            .collect::<Result<Vec<_>>>()?;
        let hull = convex_hull(&points)?;
        if hull.dim != j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                found: hull.dim,
            });
        }
        Ok(hull)
    }
}

impl fmt::Display for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (k, x) in v.coords().iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

/// Wire format: `{"dim": k, "vertices": [["p/q", ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub vertices: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pts(v: &[&[i64]]) -> Vec<LatticePoint> {
        v.iter().map(|p| LatticePoint::from_ints(p.iter().copied())).collect()
    }

    fn vset(p: &LatticePolytope) -> BTreeSet<LatticePoint> {
        p.vertices().iter().cloned().collect()
    }

    #[test]
    fn singleton_hull() {
        let p = convex_hull(&pts(&[&[0, 0]])).unwrap();
        assert_eq!(p.vertices(), &pts(&[&[0, 0]])[..]);
        assert_eq!(p.affine_dim(), 0);
    }

    #[test]
    fn interior_point_is_dropped() {
        let mut points = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        points.push(LatticePoint(vec![q(1, 3), q(1, 3)]));
        let p = convex_hull(&points).unwrap();
        assert_eq!(vset(&p), pts(&[&[0, 0], &[1, 0], &[0, 1]]).into_iter().collect());
    }

    #[test]
    fn discriminant_support_is_a_segment() {
        let p = convex_hull(&pts(&[&[0, 2, 0], &[1, 0, 1]])).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.affine_dim(), 1);
        let lam = LinearFunctional::new(vec![1, 0, -1]).unwrap();
        assert_eq!(support_min(&p, &lam).unwrap(), q(0, 1));
    }

    #[test]
    fn collinear_points_keep_endpoints() {
        let p = convex_hull(&pts(&[&[0, 0, 0], &[1, 1, 1], &[2, 2, 2], &[3, 3, 3]])).unwrap();
        assert_eq!(vset(&p), pts(&[&[0, 0, 0], &[3, 3, 3]]).into_iter().collect());
    }

    #[test]
    fn square_with_edge_midpoints() {
        let p = convex_hull(&pts(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2], &[1, 0], &[2, 1], &[1, 1]])).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.halfspaces().inequalities.len(), 4);
    }

    #[test]
    fn empty_and_mixed_dims() {
        assert!(matches!(convex_hull(&[]), Err(Error::EmptyInput)));
        let bad = vec![LatticePoint::from_ints([0, 0]), LatticePoint::from_ints([0, 0, 0])];
        assert!(matches!(convex_hull(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn containment_examples() {
        let seg = convex_hull(&pts(&[&[-1, 1], &[1, -1]])).unwrap();
        let origin = LatticePolytope::point(LatticePoint::origin(2)).unwrap();
        assert!(contains(&seg, &seg).unwrap());
        assert!(contains(&seg, &origin).unwrap());
        assert!(!contains(&origin, &seg).unwrap());
        let three = LatticePolytope::point(LatticePoint::origin(3)).unwrap();
        assert!(contains(&seg, &three).is_err());
    }

    #[test]
    fn separation_has_strict_gap() {
        let tri = convex_hull(&pts(&[&[0, 0], &[4, 0], &[0, 4]])).unwrap();
        let out = convex_hull(&pts(&[&[1, 1], &[5, 5]])).unwrap();
        let sep = tri.separate(&out).unwrap().unwrap();
        assert!(dot(&sep.functional, sep.vertex.coords()) < sep.outer_min);
        // Lower-dimensional outer: violation of an affine-hull equality.
        let seg = convex_hull(&pts(&[&[0, 0], &[2, 2]])).unwrap();
        let off = LatticePolytope::point(LatticePoint::from_ints([1, 0])).unwrap();
        let sep = seg.separate(&off).unwrap().unwrap();
        assert!(dot(&sep.functional, sep.vertex.coords()) < sep.outer_min);
    }

    #[test]
    fn minkowski_examples() {
        let e1 = convex_hull(&pts(&[&[0, 0], &[1, 0]])).unwrap();
        let e2 = convex_hull(&pts(&[&[0, 0], &[0, 1]])).unwrap();
        let sq = minkowski_sum(&e1, &e2).unwrap();
        assert_eq!(
            vset(&sq),
            pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).into_iter().collect()
        );
        let origin = LatticePolytope::point(LatticePoint::origin(2)).unwrap();
        assert_eq!(minkowski_sum(&sq, &origin).unwrap(), sq);
    }

    #[test]
    fn dilate_examples() {
        let tri = convex_hull(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        assert_eq!(dilate(&tri, &q(1, 1)).unwrap(), tri);
        assert_eq!(
            dilate(&tri, &q(0, 1)).unwrap(),
            LatticePolytope::point(LatticePoint::origin(2)).unwrap()
        );
        assert!(matches!(dilate(&tri, &q(-1, 2)), Err(Error::NegativeScale)));
        let twice = dilate(&tri, &q(2, 1)).unwrap();
        assert_eq!(vset(&twice), pts(&[&[0, 0], &[2, 0], &[0, 2]]).into_iter().collect());
        assert!(twice.halfspaces().inequalities.len() == 3);
    }

    #[test]
    fn support_min_on_segment() {
        let seg = convex_hull(&pts(&[&[1, -1], &[-1, 1]])).unwrap();
        let lam = LinearFunctional::new(vec![1, -1]).unwrap();
        assert_eq!(support_min(&seg, &lam).unwrap(), q(-2, 1));
        assert!(LinearFunctional::new(vec![1, 1]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut points = pts(&[&[0, 0], &[1, 0]]);
        points.push(LatticePoint(vec![q(1, 3), q(2, 3)]));
        let p = convex_hull(&points).unwrap();
        let j = p.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"1/3\""));
        let back = LatticePolytope::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn cube_in_three_dimensions() {
        let mut corners = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    corners.push(LatticePoint::from_ints([a, b, c]));
                }
            }
        }
        corners.push(LatticePoint(vec![q(1, 2), q(1, 2), q(1, 2)]));
        let cube = convex_hull(&corners).unwrap();
        assert_eq!(cube.vertices().len(), 8);
        assert_eq!(cube.halfspaces().inequalities.len(), 6);
    }
}
