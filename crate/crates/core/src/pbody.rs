//! p-bodies `Δ = ⋃ Δ_q` with `Δ_q = (1/q) T_q + C`, their truncated volumes,
//! scaled lattice counts, the counting limit check and the Fujita-type
//! approximation table.

use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{truncated_cone_volume, truncation_bounding_box, TruncatingHalfspace};
use crate::error::{Error, Result};
use crate::orthant::{self, PositiveHalfspace, StaircaseIndex};
use crate::psystem::{validate_p_system, PSystem};
use crate::report::{rational_string, CompareOn, ConvergenceReport, SequencePoint};
use crate::sampling::{stratified_volume, McOptions};
use crate::semigroup::{SemigroupIdeal, StandardSemigroup};

#[derive(Clone, Debug)]
pub struct PBody {
    system: Arc<PSystem>,
}

impl PBody {
    pub fn new(system: Arc<PSystem>) -> PBody {
        PBody { system }
    }

    pub fn system(&self) -> &Arc<PSystem> {
        &self.system
    }

    pub fn semigroup(&self) -> &Arc<StandardSemigroup> {
        self.system.parent()
    }
}

/// An exact volume, or a sampled one with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    #[serde(with = "rational_string")]
    pub value: BigRational,
    pub std_err: Option<f64>,
}

impl VolumeEstimate {
    pub fn exact(value: BigRational) -> VolumeEstimate {
        VolumeEstimate {
            value,
            std_err: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_err.is_none()
    }
}

fn check_truncating(s: &StandardSemigroup, h: &TruncatingHalfspace) -> Result<()> {
    if h.a().dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: h.a().dim(),
        });
    }
    if !h.is_truncating_for(s.cone()) {
        return Err(Error::NotTruncating);
    }
    Ok(())
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow)
}

/// `x ∈ Δ_q`, i.e. `q x ∈ t + C` for some generator `t` of `T_q`.
pub fn delta_q_membership(body: &PBody, e: u32, x: &[BigRational]) -> Result<bool> {
    let s = body.semigroup();
    if x.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x.len(),
        });
    }
    let q = BigRational::from_integer(body.system.q(e)?.into());
    let t = body.system.level(e)?;
    Ok(t.generators().iter().any(|g| {
        let shifted: Vec<BigRational> = x
            .iter()
            .zip(g.coords())
            .map(|(xi, gi)| xi * &q - BigRational::from_integer(gi.clone()))
            .collect();
        s.cone().contains_rational(&shifted)
    }))
}

/// `(A, M)` with `(a, u) < q alpha  <=>  A . u <= M` on integer points.
fn integer_threshold(h: &TruncatingHalfspace, q: u64) -> Result<(Vec<i64>, i64)> {
    let (nums, den) = h.a().integer_form();
    let bound = h.alpha() * BigRational::from_integer(den * BigInt::from(q));
    let m = bound.ceil().to_integer() - 1;
    Ok((nums.iter().map(to_i64).collect::<Result<_>>()?, to_i64(&m)?))
}

/// `#(T ∩ qH)`, the number of lattice points `u ∈ T` with `(a, u) < q alpha`.
pub fn count_scaled(t: &SemigroupIdeal, q: u64, h: &TruncatingHalfspace) -> Result<BigInt> {
    let s = t.parent();
    check_truncating(s, h)?;
    let (a, m) = integer_threshold(h, q)?;
    if s.is_regular() {
        let index = StaircaseIndex::new(s.dim(), t.generators_i64());
        return Ok(orthant::count_below(&index, &a, m));
    }
    let qh = h.scaled(&BigRational::from_integer(q.into()));
    let (lo, hi) = truncation_bounding_box(s.cone(), &qh)?;
    let lo: Vec<i64> = lo.iter().map(|x| to_i64(&x.floor().to_integer())).collect::<Result<_>>()?;
    let hi: Vec<i64> = hi.iter().map(|x| to_i64(&x.floor().to_integer())).collect::<Result<_>>()?;
    let d = s.dim();
    let total: u64 = (lo[0]..=hi[0])
        .into_par_iter()
        .map(|x0| {
            let mut u = lo.clone();
            u[0] = x0;
            let mut count = 0u64;
            loop {
                let inside = a.iter().zip(&u).map(|(c, x)| c * x).sum::<i64>() <= m;
                if inside && t.contains_i64(&u) {
                    count += 1;
                }
                // Odometer over axes 1..d.
                let mut axis = d;
                loop {
                    if axis == 1 {
                        return count;
                    }
                    axis -= 1;
                    if u[axis] < hi[axis] {
                        u[axis] += 1;
                        break;
                    }
                    u[axis] = lo[axis];
                }
            }
        })
        .sum();
    Ok(BigInt::from(total))
}

/// `Vol((C \ Δ_q) ∩ H)` at `q = p^e`. Exact on `N^d`; otherwise sampled.
pub fn pbody_complement_volume(
    body: &PBody,
    h: &TruncatingHalfspace,
    e: u32,
    mc: &McOptions,
) -> Result<VolumeEstimate> {
    let s = body.semigroup();
    check_truncating(s, h)?;
    let q = body.system.q(e)?;
    let t = body.system.level(e)?;
    let cone_volume = truncated_cone_volume(s.cone(), h)?;
    if s.is_regular() {
        let (nums, den) = h.a().integer_form();
        let ph = PositiveHalfspace::new(nums, h.alpha() * BigRational::from_integer(den))?;
        let index = StaircaseIndex::new(s.dim(), t.generators_i64());
        let qi = i64::try_from(q).map_err(|_| Error::Overflow)?;
        return Ok(VolumeEstimate::exact(cone_volume - orthant::union_volume(&index, qi, &ph)));
    }
    let (lo, hi) = truncation_bounding_box(s.cone(), h)?;
    let facets: Vec<Vec<i128>> = s
        .facets_i64()
        .iter()
        .map(|n| n.iter().map(|&x| x as i128).collect())
        .collect();
    let gens: Vec<Vec<i128>> = t
        .generators_i64()
        .iter()
        .map(|g| g.iter().map(|&x| x as i128).collect())
        .collect();
    let (nums, den) = h.a().integer_form();
    let a: Vec<i128> = nums.iter().map(|x| x.to_i128().ok_or(Error::Overflow)).collect::<Result<_>>()?;
    // (a, x) < alpha  <=>  A . z * alpha_den < alpha_num * den * D.
    let scaled_alpha = h.alpha() * BigRational::from_integer(den);
    let an = scaled_alpha.numer().to_i128().ok_or(Error::Overflow)?;
    let ad = scaled_alpha.denom().to_i128().ok_or(Error::Overflow)?;
    let q = q as i128;
    let dot = |n: &[i128], z: &[i128]| -> i128 { n.iter().zip(z).map(|(a, b)| a * b).sum() };
    let est = stratified_volume(&lo, &hi, mc, |z, big_d| {
        if dot(&a, z) * ad >= an * big_d {
            return false;
        }
        if facets.iter().any(|n| dot(n, z) < 0) {
            return false;
        }
        // Outside every t + C after scaling by q.
        !gens.iter().any(|g| {
            facets
                .iter()
                .all(|n| q * dot(n, z) - big_d * dot(n, g) >= 0)
        })
    })?;
    Ok(VolumeEstimate {
        value: est.value,
        std_err: Some(est.std_err),
    })
}

/// `Vol(Δ_{p^e} ∩ H)`. Non-decreasing in `e`.
pub fn pbody_truncated_volume(
    body: &PBody,
    h: &TruncatingHalfspace,
    e_cap: u32,
    mc: &McOptions,
) -> Result<VolumeEstimate> {
    let cone_volume = truncated_cone_volume(body.semigroup().cone(), h)?;
    let comp = pbody_complement_volume(body, h, e_cap, mc)?;
    Ok(VolumeEstimate {
        value: cone_volume - comp.value,
        std_err: comp.std_err,
    })
}

fn q_power_d(q: u64, d: usize) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(q), d))
}

/// Tabulates `#(T_q ∩ qH) / q^d` and compares the last value with the
/// p-body volume at the largest level.
pub fn limit_check_3_17(
    system: &Arc<PSystem>,
    h: &TruncatingHalfspace,
    e_range: RangeInclusive<u32>,
    tolerance: BigRational,
    mc: &McOptions,
) -> Result<ConvergenceReport> {
    let (e_min, e_max) = (*e_range.start(), *e_range.end());
    if e_min > e_max {
        return Err(Error::InvalidParameter("empty level range".into()));
    }
    if e_max >= 1 {
        validate_p_system(system, e_max)?.into_result()?;
    }
    let d = system.parent().dim();
    let sequence = e_range
        .map(|e| {
            let q = system.q(e)?;
            let count = count_scaled(&*system.level(e)?, q, h)?;
            Ok(SequencePoint {
                e,
                q,
                value: BigRational::from_integer(count) / q_power_d(q, d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = PBody::new(system.clone());
    let target = pbody_truncated_volume(&body, h, e_max, mc)?;
    Ok(ConvergenceReport::new("count/q^d", sequence).with_target(
        target.value,
        target.std_err,
        tolerance,
        CompareOn::LastValue,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FujitaRow {
    pub e: u32,
    pub q: u64,
    /// `Vol(((1/q) T_q + C) ∩ H)`, the limit of the auxiliary system `p^e T_q + S`.
    pub inner: VolumeEstimate,
    pub meets: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FujitaResult {
    /// Least tested `q` from which every tested level meets the threshold.
    pub q0: Option<u64>,
    #[serde(with = "rational_string")]
    pub target: BigRational,
    #[serde(with = "rational_string")]
    pub threshold: BigRational,
    pub rows: Vec<FujitaRow>,
}

/// For `q' = p^0, ..., p^{e_inner}` evaluates the inner limit and finds the
/// least `q0` after which all of them reach `Vol(Δ ∩ H) - epsilon`. Without an
/// explicit target, `Vol(Δ ∩ H)` is taken at level `e_inner`.
pub fn fujita_check(
    system: &Arc<PSystem>,
    h: &TruncatingHalfspace,
    epsilon: &BigRational,
    e_inner: u32,
    target: Option<BigRational>,
    mc: &McOptions,
) -> Result<FujitaResult> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let body = PBody::new(system.clone());
    let inner: Vec<VolumeEstimate> = (0..=e_inner)
        .map(|e| pbody_truncated_volume(&body, h, e, mc))
        .collect::<Result<_>>()?;
    let target = target.unwrap_or_else(|| inner.last().expect("nonempty").value.clone());
    let threshold = &target - epsilon;
    let rows: Vec<FujitaRow> = inner
        .into_iter()
        .enumerate()
        .map(|(e, v)| {
            let e = e as u32;
            Ok(FujitaRow {
                e,
                q: system.q(e)?,
                meets: v.value >= threshold,
                inner: v,
            })
        })
        .collect::<Result<_>>()?;
    let first_good = rows
        .iter()
        .rposition(|r| !r.meets)
        .map_or(0, |i| i + 1);
    let q0 = rows.get(first_good).map(|r| r.q);
    Ok(FujitaResult {
        q0,
        target,
        threshold,
        rows,
    })
}

/// `⌈n / k⌉` for the generator templates used by examples and tests.
pub fn ceil_div(n: u64, k: u64) -> u64 {
    Integer::div_ceil(&n, &k)
}

/// The volume `(α^d / d!) / Π a_i` of the truncated orthant, for reference.
pub fn orthant_simplex_volume(h: &TruncatingHalfspace) -> BigRational {
    let d = h.a().dim();
    let fact: BigInt = (1..=d).map(BigInt::from).product();
    let prod = h
        .a()
        .weights()
        .iter()
        .fold(BigRational::one(), |acc, w| acc * w);
    num_traits::pow(h.alpha().clone(), d) / (prod * BigRational::from_integer(fact))
}
