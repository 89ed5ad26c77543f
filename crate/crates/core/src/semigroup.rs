//! Standard affine semigroups and their ideals.

use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::cone::{self, RationalCone};
use crate::error::{Error, NotStandardReason, Result};
use crate::lattice::{LatticePoint, WeightVector, MAX_LATTICE_DIM};
use crate::linalg;

/// Fundamental parallelepipeds larger than this are not scanned for the
/// saturation test; such semigroups fall back to the general membership path.
const SATURATION_SCAN_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemigroupKind {
    /// `N^d`, generated by the unit vectors.
    Orthant,
    /// Every lattice point of the cone is in `S`.
    Saturated,
    General,
}

/// A finitely generated `S ⊆ Z^d` with `S - S = Z^d` and a pointed,
/// full-dimensional cone.
pub struct StandardSemigroup {
    dim: usize,
    generators: Vec<LatticePoint>,
    gens_i64: Vec<Vec<i64>>,
    cone: RationalCone,
    facets_i64: Vec<Vec<i64>>,
    witness: WeightVector,
    kind: SemigroupKind,
    memo: DashMap<Vec<i64>, bool>,
}

impl fmt::Debug for StandardSemigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StandardSemigroup")
            .field("generators", &self.generators)
            .field("kind", &self.kind)
            .field("witness", &self.witness)
            .finish()
    }
}

impl PartialEq for StandardSemigroup {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators && self.witness == other.witness
    }
}

impl StandardSemigroup {
    /// `N^d`.
    pub fn regular(d: usize) -> Result<StandardSemigroup> {
        let gens: Vec<LatticePoint> = (0..d).map(|i| LatticePoint::unit(d, i)).collect();
        make_standard_semigroup(&gens, None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero generators without repetition, in input order.
    pub fn generators(&self) -> &[LatticePoint] {
        &self.generators
    }

    pub fn generators_i64(&self) -> &[Vec<i64>] {
        &self.gens_i64
    }

    pub fn cone(&self) -> &RationalCone {
        &self.cone
    }

    pub fn facets_i64(&self) -> &[Vec<i64>] {
        &self.facets_i64
    }

    pub fn witness(&self) -> &WeightVector {
        &self.witness
    }

    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn is_regular(&self) -> bool {
        self.kind == SemigroupKind::Orthant
    }

    pub fn in_cone_i64(&self, u: &[i64]) -> bool {
        match self.kind {
            SemigroupKind::Orthant => u.iter().all(|&x| x >= 0),
            _ => self
                .facets_i64
                .iter()
                .all(|n| n.iter().zip(u).map(|(a, b)| (*a as i128) * (*b as i128)).sum::<i128>() >= 0),
        }
    }

    pub fn contains(&self, u: &LatticePoint) -> bool {
        if u.dim() != self.dim {
            return false;
        }
        match u.to_i64() {
            Ok(v) => self.contains_i64(&v),
            // Far outside any box the kernels handle; decide by the cone and
            // the general search only when it is cheap to do so.
            Err(_) => self.cone.contains(u) && self.kind != SemigroupKind::General,
        }
    }

    pub fn contains_i64(&self, u: &[i64]) -> bool {
        if !self.in_cone_i64(u) {
            return false;
        }
        match self.kind {
            SemigroupKind::Orthant | SemigroupKind::Saturated => true,
            SemigroupKind::General => self.search(u),
        }
    }

    /// Memoised search for a decomposition into generators. Each step lowers
    /// the witness value, so the search terminates.
    fn search(&self, u: &[i64]) -> bool {
        if u.iter().all(|&x| x == 0) {
            return true;
        }
        if let Some(hit) = self.memo.get(u) {
            return *hit;
        }
        let mut stack: Vec<(Vec<i64>, usize)> = vec![(u.to_vec(), 0)];
        while let Some((pt, idx)) = stack.last_mut() {
            if *idx == self.gens_i64.len() {
                let (pt, _) = stack.pop().expect("nonempty stack");
                self.memo.insert(pt, false);
                continue;
            }
            let g = &self.gens_i64[*idx];
            *idx += 1;
            let w: Vec<i64> = pt.iter().zip(g).map(|(a, b)| a - b).collect();
            let found = if w.iter().all(|&x| x == 0) {
                true
            } else if !self.in_cone_i64(&w) {
                continue;
            } else {
                match self.memo.get(&w).map(|r| *r) {
                    Some(r) => r,
                    None => {
                        stack.push((w, 0));
                        continue;
                    }
                }
            };
            if found {
                for (p, _) in stack {
                    self.memo.insert(p, true);
                }
                return true;
            }
        }
        false
    }

    /// Every lattice point of every simplicial piece's half-open fundamental
    /// parallelepiped lies in `S`, hence `S = C ∩ Z^d`.
    fn scan_saturation(&self) -> bool {
        let rays = self.cone.extreme_rays();
        let d = self.dim;
        for simplex in cone::triangulate(&self.cone, &rays) {
            let r: Vec<&LatticePoint> = simplex.iter().map(|&i| &rays[i]).collect();
            let cols: Vec<Vec<BigInt>> = (0..d)
                .map(|i| r.iter().map(|ray| ray.coords()[i].clone()).collect())
                .collect();
            let det = linalg::determinant(&cols).abs();
            if det > BigInt::from(SATURATION_SCAN_LIMIT) {
                return false;
            }
            let mut lo = vec![0i64; d];
            let mut hi = vec![0i64; d];
            for ray in &r {
                for (i, c) in ray.coords().iter().enumerate() {
                    let c = c.to_i64().unwrap_or(0);
                    if c < 0 {
                        lo[i] += c;
                    } else {
                        hi[i] += c;
                    }
                }
            }
            let lo_pt = LatticePoint::from_i64(&lo);
            let hi_pt = LatticePoint::from_i64(&hi.iter().map(|x| x + 1).collect::<Vec<_>>());
            let Ok(points) = crate::lattice::enumerate_box(&lo_pt, &hi_pt) else {
                return false;
            };
            for x in points {
                let Some(lambda) = linalg::solve(&cols, x.coords()) else {
                    return false;
                };
                let one = BigRational::from_integer(1.into());
                if lambda.iter().all(|l| !l.is_negative() && *l < one) {
                    let xi = x.to_i64().unwrap_or_default();
                    if !self.search(&xi) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Builds a standard semigroup, checking that the cone is full-dimensional
/// and pointed and that the generators span `Z^d` as a group. A supplied
/// weight vector must be positive on every generator.
pub fn make_standard_semigroup(
    gens: &[LatticePoint],
    a: Option<WeightVector>,
) -> Result<StandardSemigroup> {
    let first = gens.first().ok_or(Error::EmptyGenerators)?;
    let d = first.dim();
    if d > MAX_LATTICE_DIM {
        return Err(Error::UnsupportedDimension {
            found: d,
            max: MAX_LATTICE_DIM,
        });
    }
    if let Some(bad) = gens.iter().find(|g| g.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    let mut generators: Vec<LatticePoint> = Vec::new();
    for g in gens {
        if !g.is_zero() && !generators.contains(g) {
            generators.push(g.clone());
        }
    }
    if generators.is_empty() {
        return Err(Error::NotStandard(NotStandardReason::NotFullDimensional));
    }
    let is_orthant = generators.len() == d
        && (0..d).all(|i| generators.contains(&LatticePoint::unit(d, i)));
    let cone = if is_orthant {
        cone::orthant(d)
    } else {
        cone::cone_from_generators(&generators)?
    };
    if !cone.is_full_dimensional() {
        return Err(Error::NotStandard(NotStandardReason::NotFullDimensional));
    }
    if !cone.is_pointed() {
        return Err(Error::NotStandard(NotStandardReason::NotPointed));
    }
    let rows: Vec<Vec<BigInt>> = generators.iter().map(|g| g.coords().to_vec()).collect();
    if !linalg::spans_full_lattice(&rows, d) {
        return Err(Error::NotStandard(NotStandardReason::DifferencesDoNotGenerate));
    }
    let witness = match a {
        Some(a) => {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.dim(),
                });
            }
            if !cone::is_positive_on(&cone, &a) {
                return Err(Error::InvalidWeights(format!(
                    "{a} is not positive on every generator"
                )));
            }
            a
        }
        None => cone::is_pointed_with_witness(&cone)
            .ok_or(Error::NotStandard(NotStandardReason::NotPointed))?,
    };
    let gens_i64 = generators
        .iter()
        .map(LatticePoint::to_i64)
        .collect::<Result<Vec<_>>>()?;
    let facets_i64 = cone.facets_i64()?;
    let mut s = StandardSemigroup {
        dim: d,
        generators,
        gens_i64,
        cone,
        facets_i64,
        witness,
        kind: if is_orthant {
            SemigroupKind::Orthant
        } else {
            SemigroupKind::General
        },
        memo: DashMap::new(),
    };
    if !is_orthant && s.scan_saturation() {
        s.kind = SemigroupKind::Saturated;
    }
    Ok(s)
}

pub fn semigroup_membership(s: &StandardSemigroup, u: &LatticePoint) -> bool {
    s.contains(u)
}

/// Drops every generator lying in another's translate `t + S`. The result
/// is sorted in decreasing lexicographic order.
pub fn minimalize(s: &StandardSemigroup, gens: &[LatticePoint]) -> Result<Vec<LatticePoint>> {
    for g in gens {
        if g.dim() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                found: g.dim(),
            });
        }
        if !s.contains(g) {
            return Err(Error::NotInSemigroup(g.clone()));
        }
    }
    let pts = gens
        .iter()
        .map(LatticePoint::to_i64)
        .collect::<Result<Vec<_>>>()?;
    Ok(minimalize_i64(s, pts)
        .into_iter()
        .map(|v| LatticePoint::from_i64(&v))
        .collect())
}

/// [`minimalize`] on machine vectors already known to lie in `S`.
pub(crate) fn minimalize_i64(s: &StandardSemigroup, mut pts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    pts.sort();
    pts.dedup();
    let mut kept: Vec<Vec<i64>> = if s.is_regular() && s.dim() == 2 {
        // Sweep by first coordinate; a point survives when its second
        // coordinate undercuts everything to its left.
        let mut out: Vec<Vec<i64>> = Vec::new();
        for p in pts {
            if out.last().is_none_or(|last: &Vec<i64>| p[1] < last[1]) {
                out.push(p);
            }
        }
        out
    } else if s.is_regular() {
        pts.sort_by_key(|p| (p.iter().sum::<i64>(), p.clone()));
        let mut out: Vec<Vec<i64>> = Vec::new();
        for p in pts {
            if !out.iter().any(|k| k.iter().zip(&p).all(|(a, b)| a <= b)) {
                out.push(p);
            }
        }
        out
    } else {
        let keep: Vec<bool> = pts
            .iter()
            .map(|p| {
                !pts.iter().any(|h| {
                    h != p && s.contains_i64(&p.iter().zip(h).map(|(a, b)| a - b).collect::<Vec<_>>())
                })
            })
            .collect();
        pts.into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect()
    };
    kept.sort_by(|a, b| b.cmp(a));
    kept
}

/// `T = ⋃ (t_i + S)` for a finite minimal generator list.
#[derive(Clone)]
pub struct SemigroupIdeal {
    parent: Arc<StandardSemigroup>,
    generators: Vec<LatticePoint>,
    gens_i64: Vec<Vec<i64>>,
}

impl fmt::Debug for SemigroupIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.generators).finish()
    }
}

impl PartialEq for SemigroupIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators && *self.parent == *other.parent
    }
}

impl SemigroupIdeal {
    pub fn new(parent: Arc<StandardSemigroup>, gens: &[LatticePoint]) -> Result<SemigroupIdeal> {
        if gens.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        let generators = minimalize(&parent, gens)?;
        let gens_i64 = generators
            .iter()
            .map(LatticePoint::to_i64)
            .collect::<Result<Vec<_>>>()?;
        Ok(SemigroupIdeal {
            parent,
            generators,
            gens_i64,
        })
    }

    /// Builds from machine vectors known to lie in `S`.
    pub(crate) fn from_i64_unchecked(parent: Arc<StandardSemigroup>, pts: Vec<Vec<i64>>) -> SemigroupIdeal {
        let gens_i64 = minimalize_i64(&parent, pts);
        let generators = gens_i64.iter().map(|v| LatticePoint::from_i64(v)).collect();
        SemigroupIdeal {
            parent,
            generators,
            gens_i64,
        }
    }

    /// The whole semigroup, `0 + S`.
    pub fn unit(parent: Arc<StandardSemigroup>) -> SemigroupIdeal {
        let d = parent.dim();
        SemigroupIdeal {
            parent,
            generators: vec![LatticePoint::zero(d)],
            gens_i64: vec![vec![0; d]],
        }
    }

    pub fn parent(&self) -> &Arc<StandardSemigroup> {
        &self.parent
    }

    pub fn generators(&self) -> &[LatticePoint] {
        &self.generators
    }

    pub fn generators_i64(&self) -> &[Vec<i64>] {
        &self.gens_i64
    }

    pub fn contains(&self, u: &LatticePoint) -> bool {
        match u.to_i64() {
            Ok(v) if v.len() == self.parent.dim() => self.contains_i64(&v),
            _ => false,
        }
    }

    pub fn contains_i64(&self, u: &[i64]) -> bool {
        let s = &self.parent;
        if s.is_regular() {
            return self
                .gens_i64
                .iter()
                .any(|t| t.iter().zip(u).all(|(a, b)| a <= b));
        }
        let mut diff = vec![0i64; u.len()];
        self.gens_i64.iter().any(|t| {
            for (slot, (x, y)) in diff.iter_mut().zip(u.iter().zip(t)) {
                *slot = x - y;
            }
            s.contains_i64(&diff)
        })
    }

    /// `k T = {k t}` as an ideal generated by the scaled generators.
    pub fn scaled(&self, k: i64) -> Result<SemigroupIdeal> {
        let pts = self
            .gens_i64
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&x| x.checked_mul(k).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SemigroupIdeal::from_i64_unchecked(self.parent.clone(), pts))
    }

    /// The ideal is cofinite in `S` iff it has a generator on every extreme
    /// ray of the cone.
    pub fn is_cofinite(&self) -> bool {
        let rays = self.parent.cone().extreme_rays();
        rays.iter().all(|r| {
            let dir = linalg::primitive(r.coords());
            self.generators.iter().any(|t| {
                !t.is_zero() && linalg::primitive(t.coords()) == dir
            }) || self.generators.iter().any(LatticePoint::is_zero)
        })
    }
}

pub fn ideal_membership(t: &SemigroupIdeal, u: &LatticePoint) -> bool {
    t.contains(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[i64]) -> LatticePoint {
        LatticePoint::from_i64(c)
    }

    fn pts(v: &[&[i64]]) -> Vec<LatticePoint> {
        v.iter().map(|c| pt(c)).collect()
    }

    fn a1() -> Arc<StandardSemigroup> {
        Arc::new(make_standard_semigroup(&pts(&[&[1, 0], &[1, 1], &[1, 2]]), None).unwrap())
    }

    fn n2() -> Arc<StandardSemigroup> {
        Arc::new(StandardSemigroup::regular(2).unwrap())
    }

    #[test]
    fn standardness() {
        assert!(n2().is_regular());
        let s = make_standard_semigroup(&pts(&[&[2], &[3]]), None).unwrap();
        assert_eq!(s.kind(), SemigroupKind::General);
        assert_eq!(
            make_standard_semigroup(&pts(&[&[2]]), None).unwrap_err(),
            Error::NotStandard(NotStandardReason::DifferencesDoNotGenerate)
        );
        assert_eq!(
            make_standard_semigroup(&pts(&[&[1, 0], &[-1, 0], &[0, 1]]), None).unwrap_err(),
            Error::NotStandard(NotStandardReason::NotPointed)
        );
        assert_eq!(
            make_standard_semigroup(&pts(&[&[1, 1], &[2, 2]]), None).unwrap_err(),
            Error::NotStandard(NotStandardReason::NotFullDimensional)
        );
        assert_eq!(a1().kind(), SemigroupKind::Saturated);
        let w = WeightVector::from_i64(&[1, 0]).unwrap();
        assert!(make_standard_semigroup(&pts(&[&[1, 0], &[1, 1], &[1, 2]]), Some(w)).is_ok());
        let bad = WeightVector::from_i64(&[0, 1]).unwrap();
        assert!(matches!(
            make_standard_semigroup(&pts(&[&[1, 0], &[1, 1], &[1, 2]]), Some(bad)),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn membership_examples() {
        assert!(n2().contains(&pt(&[3, 5])));
        assert!(!a1().contains(&pt(&[1, 3])));
        let s = make_standard_semigroup(&pts(&[&[2], &[3]]), None).unwrap();
        assert!(!s.contains(&pt(&[1])));
        assert!(s.contains(&pt(&[5])));
        assert!(s.contains(&pt(&[0])));
        assert!(!s.contains(&pt(&[-1])));
        assert!((2..40).all(|n| s.contains(&pt(&[n]))));
    }

    #[test]
    fn non_saturated_plane_semigroup() {
        // Generators of the cone (1,0),(1,2) minus the interior point (1,1).
        let s = make_standard_semigroup(&pts(&[&[1, 0], &[1, 2], &[2, 1]]), None).unwrap();
        assert_eq!(s.kind(), SemigroupKind::General);
        assert!(!s.contains(&pt(&[1, 1])));
        assert!(s.contains(&pt(&[2, 1])));
        assert!(s.contains(&pt(&[3, 3])));
    }

    #[test]
    fn ideal_examples() {
        let t = SemigroupIdeal::new(n2(), &pts(&[&[1, 1]])).unwrap();
        assert!(t.contains(&pt(&[2, 3])));
        assert!(!t.contains(&pt(&[0, 5])));
        let t = SemigroupIdeal::new(a1(), &pts(&[&[1, 0]])).unwrap();
        assert!(!t.contains(&pt(&[2, 4])));
    }

    #[test]
    fn minimalize_examples() {
        assert_eq!(minimalize(&n2(), &pts(&[&[2, 0], &[2, 1]])).unwrap(), pts(&[&[2, 0]]));
        assert_eq!(
            minimalize(&n2(), &pts(&[&[1, 0], &[0, 1], &[1, 1]])).unwrap(),
            pts(&[&[1, 0], &[0, 1]])
        );
        assert_eq!(
            minimalize(&a1(), &pts(&[&[1, 0], &[2, 4]])).unwrap(),
            pts(&[&[2, 4], &[1, 0]])
        );
        assert_eq!(
            minimalize(&a1(), &pts(&[&[1, 3]])).unwrap_err(),
            Error::NotInSemigroup(pt(&[1, 3]))
        );
    }

    #[test]
    fn cofiniteness() {
        assert!(SemigroupIdeal::new(n2(), &pts(&[&[2, 0], &[0, 3]])).unwrap().is_cofinite());
        assert!(!SemigroupIdeal::new(n2(), &pts(&[&[2, 0], &[1, 1]])).unwrap().is_cofinite());
        assert!(SemigroupIdeal::new(a1(), &pts(&[&[2, 0], &[2, 4]])).unwrap().is_cofinite());
        assert!(!SemigroupIdeal::new(a1(), &pts(&[&[2, 0], &[2, 2]])).unwrap().is_cofinite());
    }

    /// Brute-force check of `S - S = Z^d`: every point of a small ball is a
    /// difference of two elements from a generous box of `S`.
    fn brute_standard(gens: &[Vec<i64>]) -> bool {
        let mut elems = std::collections::HashSet::new();
        elems.insert(vec![0i64, 0]);
        let mut frontier = vec![vec![0i64, 0]];
        while let Some(p) = frontier.pop() {
            for g in gens {
                let q = vec![p[0] + g[0], p[1] + g[1]];
                if q[0].abs() <= 24 && q[1].abs() <= 24 && elems.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        let all = (-2..=2).flat_map(|x| (-2..=2).map(move |y| vec![x, y]));
        let diffs = |target: &Vec<i64>| {
            elems.iter().any(|e| {
                let f = vec![e[0] + target[0], e[1] + target[1]];
                elems.contains(&f)
            })
        };
        all.collect::<Vec<_>>().iter().all(diffs)
    }

    proptest! {
        #[test]
        fn standard_matches_brute_force(
            gens in prop::collection::vec(prop::collection::vec(0i64..=3, 2), 1..=3)
        ) {
            let p = pts(&gens.iter().map(|g| g.as_slice()).collect::<Vec<_>>());
            let nonzero: Vec<Vec<i64>> = gens.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
            let accepted = make_standard_semigroup(&p, None).is_ok();
            // Nonnegative generators always give a pointed cone; only the group
            // condition and full dimension can fail.
            let full = nonzero.len() >= 2
                && nonzero.iter().any(|g| g[0] * nonzero[0][1] != g[1] * nonzero[0][0]);
            prop_assert_eq!(accepted, full && brute_standard(&nonzero));
        }

        #[test]
        fn minimalize_is_idempotent_and_preserves_membership(
            d in 2usize..=3,
            raw in prop::collection::vec(prop::collection::vec(0i64..=6, 3), 1..=6),
            general in any::<bool>(),
        ) {
            let s = if general && d == 2 {
                Arc::new(make_standard_semigroup(&pts(&[&[1, 0], &[1, 2], &[2, 1]]), None).unwrap())
            } else {
                Arc::new(StandardSemigroup::regular(d).unwrap())
            };
            let gens: Vec<LatticePoint> = raw
                .iter()
                .map(|g| pt(&g[..d]))
                .filter(|g| s.contains(g))
                .collect();
            prop_assume!(!gens.is_empty());
            let once = minimalize(&s, &gens).unwrap();
            prop_assert_eq!(minimalize(&s, &once).unwrap(), once.clone());
            let contains = |g: &[LatticePoint], u: &[i64]| {
                g.iter().any(|t| {
                    let diff: Vec<i64> = u.iter().zip(t.to_i64().unwrap()).map(|(a, b)| a - b).collect();
                    s.contains_i64(&diff)
                })
            };
            let lo = LatticePoint::zero(d);
            let hi = LatticePoint::from_i64(&vec![9; d]);
            for u in crate::lattice::enumerate_box(&lo, &hi).unwrap() {
                let u = u.to_i64().unwrap();
                prop_assert_eq!(contains(&gens, &u), contains(&once, &u));
            }
            let ideal = SemigroupIdeal::new(s.clone(), &gens).unwrap();
            for t in ideal.generators() {
                for g in s.generators() {
                    let moved = t + g;
                    prop_assert!(ideal.contains(&moved));
                }
            }
        }
    }
}
