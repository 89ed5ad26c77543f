//! Rational polyhedral cones given by generators: facet description,
//! pointedness, extreme rays, and exact volumes of truncations.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, WeightVector};
use crate::linalg;

/// Largest dimension for which the facet description is computed.
pub const MAX_CONE_DIM: usize = 4;

/// A cone `Cone(gens)` with its H-representation: `n . x >= 0` for every
/// facet normal `n` and `e . x = 0` for every equation `e`.
///
/// Facet normals are primitive, point into the cone, and are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCone {
    dim: usize,
    generators: Vec<LatticePoint>,
    facets: Vec<Vec<BigInt>>,
    equations: Vec<Vec<BigInt>>,
}

impl RationalCone {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[LatticePoint] {
        &self.generators
    }

    pub fn facets(&self) -> &[Vec<BigInt>] {
        &self.facets
    }

    pub fn equations(&self) -> &[Vec<BigInt>] {
        &self.equations
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn contains(&self, u: &LatticePoint) -> bool {
        let dot = |n: &[BigInt]| -> BigInt { n.iter().zip(u.coords()).map(|(a, b)| a * b).sum() };
        u.dim() == self.dim
            && self.facets.iter().all(|n| !dot(n).is_negative())
            && self.equations.iter().all(|e| dot(e).is_zero())
    }

    pub fn contains_rational(&self, x: &[BigRational]) -> bool {
        let dot = |n: &[BigInt]| -> BigRational {
            n.iter()
                .zip(x)
                .map(|(a, b)| b * a)
                .fold(BigRational::zero(), |acc, t| acc + t)
        };
        x.len() == self.dim
            && self.facets.iter().all(|n| !dot(n).is_negative())
            && self.equations.iter().all(|e| dot(e).is_zero())
    }

    /// Facet normals as machine integers, for the counting kernels.
    pub fn facets_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.facets
            .iter()
            .map(|n| n.iter().map(|c| c.to_i64().ok_or(Error::Overflow)).collect())
            .collect()
    }

    /// The lineality space is trivial.
    pub fn is_pointed(&self) -> bool {
        let mut rows = self.facets.clone();
        rows.extend(self.equations.iter().cloned());
        linalg::rank(&rows) == self.dim
    }

    /// One generator per extreme ray, the one of least coordinate sum on
    /// that ray. Empty for a cone that is not pointed.
    pub fn extreme_rays(&self) -> Vec<LatticePoint> {
        if !self.is_pointed() {
            return Vec::new();
        }
        let mut seen: Vec<Vec<BigInt>> = Vec::new();
        let mut rays: Vec<LatticePoint> = Vec::new();
        for g in self.generators.iter().filter(|g| !g.is_zero()) {
            let mut tight: Vec<Vec<BigInt>> = self
                .facets
                .iter()
                .filter(|n| dot_int(n, g.coords()).is_zero())
                .cloned()
                .collect();
            tight.extend(self.equations.iter().cloned());
            if linalg::rank(&tight) + 1 != self.dim {
                continue;
            }
            let dir = linalg::primitive(g.coords());
            match seen.iter().position(|s| *s == dir) {
                Some(i) => {
                    if g.coord_sum().abs() < rays[i].coord_sum().abs() {
                        rays[i] = g.clone();
                    }
                }
                None => {
                    seen.push(dir);
                    rays.push(g.clone());
                }
            }
        }
        rays
    }
}

fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Facets of a full-dimensional cone: every hyperplane through `d - 1`
/// independent generators that has all generators on one side.
fn full_dimensional_facets(gens: &[Vec<BigInt>], d: usize) -> Vec<Vec<BigInt>> {
    let mut found: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for subset in combinations(gens.len(), d - 1) {
        let vs: Vec<Vec<BigInt>> = subset.iter().map(|&i| gens[i].clone()).collect();
        let n = linalg::normal_vector(&vs, d);
        if n.iter().all(Zero::is_zero) {
            continue;
        }
        let (mut pos, mut neg) = (false, false);
        for g in gens {
            let s = dot_int(&n, g);
            pos |= s.is_positive();
            neg |= s.is_negative();
        }
        let oriented = match (pos, neg) {
            (true, true) => continue,
            (_, false) => n,
            (false, true) => n.into_iter().map(|x| -x).collect(),
        };
        found.insert(linalg::primitive(&oriented));
    }
    found.into_iter().collect()
}

/// The non-negative orthant of R^d, for any supported lattice dimension.
pub(crate) fn orthant(d: usize) -> RationalCone {
    let gens: Vec<LatticePoint> = (0..d).map(|i| LatticePoint::unit(d, i)).collect();
    let mut facets: Vec<Vec<BigInt>> = gens.iter().map(|g| g.coords().to_vec()).collect();
    facets.sort();
    RationalCone {
        dim: d,
        generators: gens,
        facets,
        equations: Vec::new(),
    }
}

/// Computes the facet description of the cone spanned by `gens`.
pub fn cone_from_generators(gens: &[LatticePoint]) -> Result<RationalCone> {
    let first = gens.first().ok_or(Error::EmptyGenerators)?;
    let d = first.dim();
    if d == 0 || d > MAX_CONE_DIM {
        return Err(Error::UnsupportedDimension {
            found: d,
            max: MAX_CONE_DIM,
        });
    }
    if let Some(bad) = gens.iter().find(|g| g.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    let rows: Vec<Vec<BigInt>> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.coords().to_vec())
        .collect();
    let r = linalg::rank(&rows);
    let (facets, equations) = if r == d {
        (full_dimensional_facets(&rows, d), Vec::new())
    } else {
        // Facets of C + V^perp, where V is the span of C, restricted to V.
        let equations = linalg::orthogonal_complement(&rows, d);
        let mut widened = rows.clone();
        for e in &equations {
            widened.push(e.clone());
            widened.push(e.iter().map(|x| -x).collect());
        }
        (full_dimensional_facets(&widened, d), equations)
    };
    Ok(RationalCone {
        dim: d,
        generators: gens.to_vec(),
        facets,
        equations,
    })
}

/// A weight vector strictly positive on `cone \ {0}`, if the cone is pointed.
pub fn is_pointed_with_witness(cone: &RationalCone) -> Option<WeightVector> {
    if !cone.is_pointed() {
        return None;
    }
    let d = cone.dim();
    let mut sum = vec![BigInt::zero(); d];
    for n in cone.facets() {
        for (s, x) in sum.iter_mut().zip(n) {
            *s += x;
        }
    }
    if sum.iter().all(Zero::is_zero) {
        // Only the zero cone has no facets and is pointed.
        sum = vec![BigInt::one(); d];
    }
    WeightVector::from_integers(&linalg::primitive(&sum)).ok()
}

/// True when `(a, g) > 0` for every nonzero generator, which makes `{(a,x) < alpha}`
/// cut a bounded piece out of a pointed cone.
pub fn is_positive_on(cone: &RationalCone, a: &WeightVector) -> bool {
    a.dim() == cone.dim()
        && cone
            .generators()
            .iter()
            .filter(|g| !g.is_zero())
            .all(|g| a.dot(g).map(|v| v.is_positive()).unwrap_or(false))
}

/// The open halfspace `{x : (a, x) < alpha}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatingHalfspace {
    a: WeightVector,
    alpha: BigRational,
}

impl TruncatingHalfspace {
    pub fn new(a: WeightVector, alpha: BigRational) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "halfspace bound must be positive, got {alpha}"
            )));
        }
        Ok(TruncatingHalfspace { a, alpha })
    }

    pub fn a(&self) -> &WeightVector {
        &self.a
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn contains(&self, u: &LatticePoint) -> Result<bool> {
        Ok(self.a.dot(u)? < self.alpha)
    }

    pub fn contains_rational(&self, x: &[BigRational]) -> Result<bool> {
        Ok(self.a.dot_rational(x)? < self.alpha)
    }

    /// `qH = {(a, x) < q alpha}`.
    pub fn scaled(&self, q: &BigRational) -> TruncatingHalfspace {
        TruncatingHalfspace {
            a: self.a.clone(),
            alpha: &self.alpha * q,
        }
    }

    pub fn is_truncating_for(&self, cone: &RationalCone) -> bool {
        cone.is_pointed() && is_positive_on(cone, &self.a)
    }
}

/// Pulling triangulation of a pointed full-dimensional cone into simplicial
/// cones, each returned as indices into `rays`.
pub fn triangulate(cone: &RationalCone, rays: &[LatticePoint]) -> Vec<Vec<usize>> {
    let d = cone.dim();
    let tight: Vec<Vec<usize>> = cone
        .facets()
        .iter()
        .map(|n| {
            (0..rays.len())
                .filter(|&i| dot_int(n, rays[i].coords()).is_zero())
                .collect()
        })
        .collect();
    let rank_of = |idx: &[usize]| -> usize {
        let rows: Vec<Vec<BigInt>> = idx.iter().map(|&i| rays[i].coords().to_vec()).collect();
        linalg::rank(&rows)
    };
    fn rec(
        face: Vec<usize>,
        k: usize,
        tight: &[Vec<usize>],
        rank_of: &dyn Fn(&[usize]) -> usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if face.len() == k {
            out.push(face);
            return;
        }
        let apex = face[0];
        let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for t in tight {
            let sub: Vec<usize> = face.iter().copied().filter(|i| t.contains(i)).collect();
            if !sub.contains(&apex) && sub.len() >= k - 1 && rank_of(&sub) == k - 1 {
                subfaces.insert(sub);
            }
        }
        for sub in subfaces {
            let mut pieces = Vec::new();
            rec(sub, k - 1, tight, rank_of, &mut pieces);
            for mut s in pieces {
                s.push(apex);
                out.push(s);
            }
        }
    }
    let mut out = Vec::new();
    rec((0..rays.len()).collect(), d, &tight, &rank_of, &mut out);
    out
}

/// Exact volume of `C ∩ {(a, x) < alpha}` for a pointed full-dimensional cone.
///
/// Each simplicial piece with rays `r_1..r_d` contributes
/// `alpha^d |det R| / (d! prod (a, r_i))`.
pub fn truncated_cone_volume(cone: &RationalCone, h: &TruncatingHalfspace) -> Result<BigRational> {
    if !cone.is_pointed() {
        return Err(Error::NotPointed);
    }
    if !cone.is_full_dimensional() {
        return Ok(BigRational::zero());
    }
    if !is_positive_on(cone, h.a()) {
        return Err(Error::NotTruncating);
    }
    let d = cone.dim();
    let rays = cone.extreme_rays();
    let mut total = BigRational::zero();
    for simplex in triangulate(cone, &rays) {
        let rows: Vec<Vec<BigInt>> = simplex.iter().map(|&i| rays[i].coords().to_vec()).collect();
        let det = linalg::determinant(&rows).abs();
        let mut denom = BigRational::one();
        for &i in &simplex {
            denom *= h.a().dot(&rays[i])?;
        }
        total += BigRational::from_integer(det) / denom;
    }
    let factorial: BigInt = (1..=d).map(BigInt::from).product();
    let alpha_pow = num_traits::pow(h.alpha().clone(), d);
    Ok(total * alpha_pow / BigRational::from_integer(factorial))
}

/// Axis-aligned bounding box `[lo, hi]` of `C ∩ {(a, x) <= alpha}`.
pub fn truncation_bounding_box(
    cone: &RationalCone,
    h: &TruncatingHalfspace,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    if !h.is_truncating_for(cone) {
        return Err(Error::NotTruncating);
    }
    let d = cone.dim();
    let mut lo = vec![BigRational::zero(); d];
    let mut hi = vec![BigRational::zero(); d];
    for r in cone.extreme_rays() {
        let t = h.alpha() / h.a().dot(&r)?;
        for (i, c) in r.coords().iter().enumerate() {
            let v = &t * c;
            if v < lo[i] {
                lo[i] = v.clone();
            }
            if v > hi[i] {
                hi[i] = v;
            }
        }
    }
    Ok((lo, hi))
}
