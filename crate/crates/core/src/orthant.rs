//! Exact kernels for ideals of `N^d`: staircase lookups, colengths, lattice
//! counts under a halfspace, and volumes of unions of translated orthants.
//!
//! Two independent volume routes are provided. Inclusion-exclusion over
//! componentwise maxima ("joins") is used for small generator sets; a slab
//! sweep over the grid cut out by generator coordinates handles the rest.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Inclusion-exclusion is used up to this many generators (2^20 terms).
pub const INCLUSION_EXCLUSION_CAP: usize = 20;

/// Minimal generators of an ideal of `N^d`, indexed for the query
/// "least last coordinate among generators below a prefix".
#[derive(Clone, Debug)]
pub struct StaircaseIndex {
    d: usize,
    gens: Vec<Vec<i64>>,
}

impl StaircaseIndex {
    /// `gens` must be minimal (no generator dominates another).
    pub fn new(d: usize, gens: &[Vec<i64>]) -> StaircaseIndex {
        let mut gens = gens.to_vec();
        // For d = 2 this is x ascending with y strictly descending.
        gens.sort();
        StaircaseIndex { d, gens }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    /// `min { g_d : g_i <= prefix_i for i < d }`.
    pub fn min_last(&self, prefix: &[i64]) -> Option<i64> {
        match self.d {
            1 => self.gens.iter().map(|g| g[0]).min(),
            2 => {
                let k = self.gens.partition_point(|g| g[0] <= prefix[0]);
                (k > 0).then(|| self.gens[k - 1][1])
            }
            _ => self
                .gens
                .iter()
                .filter(|g| g[..self.d - 1].iter().zip(prefix).all(|(a, b)| a <= b))
                .map(|g| g[self.d - 1])
                .min(),
        }
    }

    /// Per-axis bound `B_i` from pure powers `B_i e_i`; `None` when some axis
    /// has no pure power, i.e. the complement is infinite.
    pub fn pure_power_bounds(&self) -> Option<Vec<i64>> {
        (0..self.d)
            .map(|i| {
                self.gens
                    .iter()
                    .filter(|g| g.iter().enumerate().all(|(j, &x)| j == i || x == 0))
                    .map(|g| g[i])
                    .min()
            })
            .collect()
    }
}

fn prefixes(bounds: &[i64]) -> impl Iterator<Item = Vec<i64>> + '_ {
    let total: u64 = bounds.iter().map(|&b| b.max(0) as u64).product();
    (0..total).map(move |mut k| {
        let mut v = vec![0i64; bounds.len()];
        for i in (0..bounds.len()).rev() {
            let b = bounds[i] as u64;
            v[i] = (k % b) as i64;
            k /= b;
        }
        v
    })
}

/// Number of points of `N^d` outside the ideal.
pub fn colength(index: &StaircaseIndex) -> Result<BigInt> {
    let d = index.dim();
    if index.generators().iter().any(|g| g.iter().all(|&x| x == 0)) {
        return Ok(BigInt::zero());
    }
    let bounds = index
        .pure_power_bounds()
        .ok_or_else(|| Error::NotMPrimary("some coordinate axis has no pure power".into()))?;
    if d == 1 {
        return Ok(BigInt::from(bounds[0]));
    }
    let head = &bounds[..d - 1];
    let first = head[0];
    let rest = &head[1..];
    let total: u128 = (0..first)
        .into_par_iter()
        .map(|x0| {
            let mut sum = 0u128;
            let mut prefix = vec![x0; d - 1];
            if rest.is_empty() {
                return index.min_last(&prefix).unwrap_or(0) as u128;
            }
            for tail in prefixes(rest) {
                prefix[1..].copy_from_slice(&tail);
                sum += index.min_last(&prefix).unwrap_or(0) as u128;
            }
            sum
        })
        .sum();
    Ok(BigInt::from(total))
}

/// A point outside the ideal with the largest coordinate sum, together with
/// that sum; `None` for the unit ideal. Ties go to the lexicographically
/// least point.
pub fn max_gap_degree(index: &StaircaseIndex) -> Result<Option<(Vec<i64>, i64)>> {
    let d = index.dim();
    if index.generators().iter().any(|g| g.iter().all(|&x| x == 0)) {
        return Ok(None);
    }
    let bounds = index
        .pure_power_bounds()
        .ok_or_else(|| Error::NotMPrimary("some coordinate axis has no pure power".into()))?;
    if d == 1 {
        return Ok(Some((vec![bounds[0] - 1], bounds[0] - 1)));
    }
    let better = |a: Option<(Vec<i64>, i64)>, b: Option<(Vec<i64>, i64)>| match (a, b) {
        (Some(x), Some(y)) => Some(if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    };
    let head = &bounds[..d - 1];
    let best = (0..head[0])
        .into_par_iter()
        .map(|x0| {
            let mut best = None;
            let mut prefix = vec![x0; d - 1];
            let tails: Box<dyn Iterator<Item = Vec<i64>>> = if d == 2 {
                Box::new(std::iter::once(Vec::new()))
            } else {
                Box::new(prefixes(&head[1..]))
            };
            for tail in tails {
                prefix[1..].copy_from_slice(&tail);
                let top = index.min_last(&prefix).unwrap_or(0) - 1;
                if top >= 0 {
                    let mut pt = prefix.clone();
                    pt.push(top);
                    let deg = pt.iter().sum();
                    best = better(best, Some((pt, deg)));
                }
            }
            best
        })
        .reduce(|| None, better);
    Ok(best)
}

/// Volume of `[0, B) \ ⋃ (g + R^d_{>=0})` by inclusion-exclusion over joins:
/// `Σ_J (-1)^{|J|} Π_i (B_i - max_{g in J} g_i)_+`.
pub fn complement_volume_ie(gens: &[Vec<i64>], bounds: &[i64]) -> BigInt {
    fn rec(gens: &[Vec<i64>], start: usize, join: &mut Vec<i64>, sign: i32, bounds: &[i64], acc: &mut BigInt) {
        let term: BigInt = join
            .iter()
            .zip(bounds)
            .map(|(j, b)| BigInt::from((b - j).max(0)))
            .product();
        if term.is_zero() {
            return;
        }
        if sign > 0 {
            *acc += term;
        } else {
            *acc -= term;
        }
        for i in start..gens.len() {
            let saved = join.clone();
            for (j, g) in join.iter_mut().zip(&gens[i]) {
                *j = (*j).max(*g);
            }
            rec(gens, i + 1, join, -sign, bounds, acc);
            *join = saved;
        }
    }
    let mut acc = BigInt::zero();
    let mut join = vec![0i64; bounds.len()];
    rec(gens, 0, &mut join, 1, bounds, &mut acc);
    acc
}

/// Sorted distinct values of axis `i` among the generators, plus `extra`.
fn grid(gens: &[Vec<i64>], i: usize, extra: &[i64]) -> Vec<i64> {
    let mut v: Vec<i64> = gens.iter().map(|g| g[i]).chain(extra.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Same volume as [`complement_volume_ie`], by summing over grid cells of
/// the first `d - 1` axes the cell area times the staircase height there.
pub fn complement_volume_slab(index: &StaircaseIndex, bounds: &[i64]) -> BigInt {
    let d = index.dim();
    if d == 1 {
        return BigInt::from(index.min_last(&[]).unwrap_or(0).min(bounds[0]).max(0));
    }
    let axes: Vec<Vec<i64>> = (0..d - 1)
        .map(|i| {
            grid(index.generators(), i, &[0, bounds[i]])
                .into_iter()
                .filter(|&x| x >= 0 && x <= bounds[i])
                .collect()
        })
        .collect();
    let counts: Vec<i64> = axes.iter().map(|a| a.len() as i64 - 1).collect();
    if counts.iter().any(|&c| c <= 0) {
        return BigInt::zero();
    }
    let mut total = BigInt::zero();
    let mut corner = vec![0i64; d - 1];
    for cell in prefixes(&counts) {
        let mut area = BigInt::one();
        for i in 0..d - 1 {
            corner[i] = axes[i][cell[i] as usize];
            area *= axes[i][cell[i] as usize + 1] - corner[i];
        }
        let height = index
            .min_last(&corner)
            .unwrap_or(bounds[d - 1])
            .min(bounds[d - 1]);
        total += area * BigInt::from(height);
    }
    total
}

/// Volume of the complement of the staircase inside its pure-power box.
pub fn complement_volume(index: &StaircaseIndex) -> Result<BigInt> {
    if index.generators().iter().any(|g| g.iter().all(|&x| x == 0)) {
        return Ok(BigInt::zero());
    }
    let bounds = index
        .pure_power_bounds()
        .ok_or_else(|| Error::NotMPrimary("some coordinate axis has no pure power".into()))?;
    if index.generators().len() <= INCLUSION_EXCLUSION_CAP {
        Ok(complement_volume_ie(index.generators(), &bounds))
    } else {
        Ok(complement_volume_slab(index, &bounds))
    }
}

fn factorial(d: usize) -> BigInt {
    (1..=d).map(BigInt::from).product()
}

/// `{x : c . x < r}` with `c > 0`, as integer coefficients and a rational bound.
#[derive(Clone, Debug)]
pub struct PositiveHalfspace {
    pub c: Vec<BigInt>,
    pub r: BigRational,
}

impl PositiveHalfspace {
    pub fn new(c: Vec<BigInt>, r: BigRational) -> Result<PositiveHalfspace> {
        if c.iter().any(|x| !x.is_positive()) {
            return Err(Error::NotTruncating);
        }
        Ok(PositiveHalfspace { c, r })
    }

    fn corner_simplex(&self, v: &[BigRational]) -> BigRational {
        let mut slack = self.r.clone();
        for (ci, vi) in self.c.iter().zip(v) {
            slack -= vi * ci;
        }
        if slack.is_positive() {
            num_traits::pow(slack, self.c.len())
        } else {
            BigRational::zero()
        }
    }

    fn normaliser(&self) -> BigRational {
        let prod: BigInt = self.c.iter().product();
        BigRational::from_integer(prod * factorial(self.c.len()))
    }
}

/// Volume of `{x : lo <= x < hi, c . x < r}`; `None` upper bounds are infinite.
pub fn box_halfspace_volume(
    lo: &[BigRational],
    hi: &[Option<BigRational>],
    h: &PositiveHalfspace,
) -> BigRational {
    let d = lo.len();
    let finite: Vec<usize> = (0..d).filter(|&i| hi[i].is_some()).collect();
    let mut total = BigRational::zero();
    let mut v = lo.to_vec();
    for mask in 0u32..(1u32 << finite.len()) {
        for (k, &i) in finite.iter().enumerate() {
            v[i] = if mask >> k & 1 == 1 {
                hi[i].clone().expect("finite axis")
            } else {
                lo[i].clone()
            };
        }
        let term = h.corner_simplex(&v);
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total / h.normaliser()
}

/// Volume of `⋃ (g / den + R^d_{>=0}) ∩ {c . x < r}` by inclusion-exclusion.
pub fn union_volume_ie(gens: &[Vec<i64>], den: i64, h: &PositiveHalfspace) -> BigRational {
    let den_r = BigRational::from_integer(den.into());
    fn rec(
        gens: &[Vec<i64>],
        start: usize,
        join: &mut Vec<i64>,
        depth: usize,
        den: &BigRational,
        h: &PositiveHalfspace,
        acc: &mut BigRational,
    ) {
        for i in start..gens.len() {
            let saved = join.clone();
            for (j, g) in join.iter_mut().zip(&gens[i]) {
                *j = if depth == 0 { *g } else { (*j).max(*g) };
            }
            let corner: Vec<BigRational> = join
                .iter()
                .map(|&x| BigRational::from_integer(x.into()) / den)
                .collect();
            let term = h.corner_simplex(&corner);
            if !term.is_zero() {
                if depth.is_multiple_of(2) {
                    *acc += term;
                } else {
                    *acc -= term;
                }
                rec(gens, i + 1, join, depth + 1, den, h, acc);
            }
            *join = saved;
        }
    }
    let mut acc = BigRational::zero();
    let mut join = vec![0i64; h.c.len()];
    rec(gens, 0, &mut join, 0, &den_r, h, &mut acc);
    acc / h.normaliser()
}

/// Same volume as [`union_volume_ie`], as a sum over disjoint slabs.
pub fn union_volume_slab(index: &StaircaseIndex, den: i64, h: &PositiveHalfspace) -> BigRational {
    let d = index.dim();
    let den_r = BigRational::from_integer(den.into());
    let scale = |x: i64| BigRational::from_integer(x.into()) / &den_r;
    if index.generators().is_empty() {
        return BigRational::zero();
    }
    if d == 1 {
        let m = index.min_last(&[]).expect("nonempty");
        return box_halfspace_volume(&[scale(m)], &[None], h);
    }
    let axes: Vec<Vec<i64>> = (0..d - 1).map(|i| grid(index.generators(), i, &[])).collect();
    let counts: Vec<i64> = axes.iter().map(|a| a.len() as i64).collect();
    let cells: Vec<Vec<i64>> = prefixes(&counts).collect();
    cells
        .par_iter()
        .map(|cell| {
            let corner: Vec<i64> = (0..d - 1).map(|i| axes[i][cell[i] as usize]).collect();
            let Some(m) = index.min_last(&corner) else {
                return BigRational::zero();
            };
            let mut lo: Vec<BigRational> = corner.iter().map(|&x| scale(x)).collect();
            lo.push(scale(m));
            if h.corner_simplex(&lo).is_zero() {
                return BigRational::zero();
            }
            let mut hi: Vec<Option<BigRational>> = (0..d - 1)
                .map(|i| axes[i].get(cell[i] as usize + 1).map(|&x| scale(x)))
                .collect();
            hi.push(None);
            box_halfspace_volume(&lo, &hi, h)
        })
        .reduce(BigRational::zero, |a, b| a + b)
}

/// Volume of the union of translated orthants under the halfspace, choosing
/// inclusion-exclusion when it is cheap.
pub fn union_volume(index: &StaircaseIndex, den: i64, h: &PositiveHalfspace) -> BigRational {
    if index.generators().len() <= INCLUSION_EXCLUSION_CAP {
        union_volume_ie(index.generators(), den, h)
    } else {
        union_volume_slab(index, den, h)
    }
}

/// Lattice points `u` in the ideal with `c . u <= m`, for integer `c > 0`.
pub fn count_below(index: &StaircaseIndex, c: &[i64], m: i64) -> BigInt {
    let d = index.dim();
    if m < 0 {
        return BigInt::zero();
    }
    let last = c[d - 1];
    let column = |prefix: &[i64], used: i64| -> u128 {
        let Some(lo) = index.min_last(prefix) else {
            return 0;
        };
        let top = Integer::div_floor(&(m - used), &last);
        if top < lo.max(0) {
            0
        } else {
            (top - lo.max(0) + 1) as u128
        }
    };
    if d == 1 {
        return BigInt::from(column(&[], 0));
    }
    fn walk(
        prefix: &mut Vec<i64>,
        axis: usize,
        used: i64,
        c: &[i64],
        m: i64,
        column: &dyn Fn(&[i64], i64) -> u128,
    ) -> u128 {
        if axis == prefix.len() {
            return column(prefix, used);
        }
        let mut sum = 0;
        let mut x = 0;
        while used + c[axis] * x <= m {
            prefix[axis] = x;
            sum += walk(prefix, axis + 1, used + c[axis] * x, c, m, column);
            x += 1;
        }
        prefix[axis] = 0;
        sum
    }
    let top0 = m / c[0];
    let total: u128 = (0..=top0)
        .into_par_iter()
        .map(|x0| {
            let mut prefix = vec![0i64; d - 1];
            prefix[0] = x0;
            walk(&mut prefix, 1, c[0] * x0, c, m, &column)
        })
        .sum();
    BigInt::from(total)
}
