//! Experiment drivers: length and Hilbert-Kunz sequences of a p-family, the
//! three-way volume check against the p-body decomposition, growth bounds and
//! the counting identity behind it.

use std::ops::RangeInclusive;
use std::sync::Arc;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cone::{truncated_cone_volume, TruncatingHalfspace};
use crate::error::{Error, Result};
use crate::family::{find_c, CCertificate, PFamily};
use crate::lattice::WeightVector;
use crate::pbody::{count_scaled, pbody_complement_volume, PBody};
use crate::psystem::prime_power;
use crate::report::{rational_string, CompareOn, ConvergenceReport, SequencePoint, Verdict};
use crate::sampling::McOptions;
use crate::semigroup::SemigroupIdeal;
use crate::toric::{MonomialIdeal, ToricRing};

/// Bumped whenever cached colength values could change meaning.
pub const CACHE_SCHEMA: &str = "plab-colength-v1";

/// Storage for `(ring, ideal, q) -> ℓ(R / I^{[q]})`.
pub trait ColengthCache: Send + Sync {
    fn get(&self, key: &str) -> Option<BigInt>;
    fn put(&self, key: &str, value: &BigInt);
}

#[derive(Default)]
pub struct MemoryCache(DashMap<String, BigInt>);

impl MemoryCache {
    pub fn new() -> MemoryCache {
        MemoryCache::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl ColengthCache for MemoryCache {
    fn get(&self, key: &str) -> Option<BigInt> {
        self.0.get(key).map(|v| v.clone())
    }

    fn put(&self, key: &str, value: &BigInt) {
        self.0.insert(key.to_string(), value.clone());
    }
}

/// Content hash of the semigroup generators, the ideal generators and `q`.
pub fn colength_key(ideal: &MonomialIdeal, q: u64) -> String {
    let mut h = Sha256::new();
    h.update(CACHE_SCHEMA.as_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    let mut feed = |label: &str, pts: &[Vec<i64>]| {
        h.update(label.as_bytes());
        for p in pts {
            for x in p {
                h.update(x.to_le_bytes());
            }
            h.update(b";");
        }
    };
    feed("S", ideal.ring().semigroup().generators_i64());
    feed("I", ideal.staircase().generators_i64());
    h.update(b"q");
    h.update(q.to_le_bytes());
    hex::encode(h.finalize())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HkPath {
    /// Exact area on regular rings, nested counting elsewhere.
    Auto,
    Exact,
    Counting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabOptions {
    pub mc: McOptions,
    /// Largest inner exponent for the nested Hilbert-Kunz limit.
    pub hk_inner_cap: u32,
}

impl Default for LabOptions {
    fn default() -> Self {
        LabOptions {
            mc: McOptions::default(),
            hk_inner_cap: 3,
        }
    }
}

/// Default tolerance: `1/1000` on exact paths, `1/100` where sampling enters.
pub fn default_tolerance(ring: &ToricRing) -> BigRational {
    if ring.is_regular() {
        BigRational::new(1.into(), 1000.into())
    } else {
        BigRational::new(1.into(), 100.into())
    }
}

#[derive(Clone)]
pub struct Lab {
    pub opts: LabOptions,
    cache: Option<Arc<dyn ColengthCache>>,
}

impl Default for Lab {
    fn default() -> Self {
        Lab::new(LabOptions::default())
    }
}

fn over_q_d(value: BigInt, q: u64, d: usize) -> BigRational {
    BigRational::new(value, num_traits::pow(BigInt::from(q), d))
}

/// The halfspace `{(a, u) < c (a, v)}` where `v` is a semigroup generator of
/// largest weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedHalfspace {
    #[serde(serialize_with = "weights_as_strings")]
    pub a: WeightVector,
    pub v: crate::lattice::LatticePoint,
    pub certificate: CCertificate,
    #[serde(with = "rational_string")]
    pub beta: BigRational,
}

fn weights_as_strings<S: serde::Serializer>(a: &WeightVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(a.weights().iter().map(rational_string::encode))
}

impl DerivedHalfspace {
    pub fn halfspace(&self) -> TruncatingHalfspace {
        TruncatingHalfspace::new(self.a.clone(), self.beta.clone()).expect("beta is positive")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimates {
    #[serde(with = "rational_string")]
    pub length: BigRational,
    #[serde(with = "rational_string")]
    pub hk: BigRational,
    #[serde(with = "rational_string")]
    pub pbody: BigRational,
    pub pbody_std_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolMultReport {
    pub family: String,
    pub halfspace: DerivedHalfspace,
    pub length: ConvergenceReport,
    pub hk: ConvergenceReport,
    pub pbody: ConvergenceReport,
    pub estimates: Estimates,
    #[serde(with = "rational_string")]
    pub spread: BigRational,
    #[serde(with = "rational_string")]
    pub tolerance: BigRational,
    pub verdict: Verdict,
}

impl VolMultReport {
    pub fn reports(&self) -> [&ConvergenceReport; 3] {
        [&self.length, &self.hk, &self.pbody]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub e: u32,
    pub q: u64,
    pub length: String,
    #[serde(with = "rational_string")]
    pub ratio: BigRational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    #[serde(with = "rational_string")]
    pub alpha: BigRational,
    pub rows: Vec<GrowthRow>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReconcileRow {
    pub e: u32,
    pub q: u64,
    pub colength: String,
    pub semigroup_count: String,
    pub ideal_count: String,
    pub holds: bool,
}

impl Lab {
    pub fn new(opts: LabOptions) -> Lab {
        Lab { opts, cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<dyn ColengthCache>) -> Lab {
        self.cache = Some(cache);
        self
    }

    /// `ℓ(R / I^{[q]})`, through the cache when one is attached.
    pub fn colength(&self, ideal: &MonomialIdeal, q: u64) -> Result<BigInt> {
        let key = self.cache.as_ref().map(|_| colength_key(ideal, q));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(v) = cache.get(key) {
                return Ok(v);
            }
        }
        let value = if q == 1 {
            ideal.colength()?
        } else {
            ideal.frobenius_power(q)?.colength()?
        };
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            cache.put(key, &value);
        }
        Ok(value)
    }

    /// `ℓ(R / I_q) / q^d` over the range.
    pub fn length_sequence(&self, family: &PFamily, e_range: RangeInclusive<u32>) -> Result<ConvergenceReport> {
        let d = family.ring().dim();
        let sequence = e_range
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|e| {
                let q = family.q(e)?;
                let len = self.colength(&*family.level(e)?, 1)?;
                Ok(SequencePoint {
                    e,
                    q,
                    value: over_q_d(len, q, d),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceReport::new("length", sequence))
    }

    /// `e_HK(I)` by nested counting: `ℓ(R / I^{[q']}) / q'^d` until two
    /// consecutive values agree or the inner cap is reached; in the latter
    /// case the affine extrapolation of the inner sequence is returned.
    pub fn e_hk_nested(&self, ideal: &MonomialIdeal) -> Result<BigRational> {
        let p = ideal.ring().p();
        let d = ideal.ring().dim();
        let mut inner = Vec::new();
        for e in 0..=self.opts.hk_inner_cap {
            let q = prime_power(p, e)?;
            let value = over_q_d(self.colength(ideal, q)?, q, d);
            if inner.last().is_some_and(|prev: &SequencePoint| prev.value == value) {
                return Ok(value);
            }
            inner.push(SequencePoint { e, q, value });
        }
        Ok(ConvergenceReport::new("inner", inner).extrapolated_limit)
    }

    /// `e_HK(I_q) / q^d` over the range.
    pub fn hk_sequence(
        &self,
        family: &PFamily,
        e_range: RangeInclusive<u32>,
        path: HkPath,
    ) -> Result<ConvergenceReport> {
        let ring = family.ring();
        let exact = match path {
            HkPath::Auto => ring.is_regular(),
            HkPath::Exact => {
                if !ring.is_regular() {
                    return Err(Error::RequiresRegular("exact Hilbert-Kunz path"));
                }
                true
            }
            HkPath::Counting => false,
        };
        let d = ring.dim();
        let sequence = e_range
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|e| {
                let q = family.q(e)?;
                let level = family.level(e)?;
                let hk = if exact {
                    level.e_hk_exact()?
                } else {
                    self.e_hk_nested(&level)?
                };
                Ok(SequencePoint {
                    e,
                    q,
                    value: hk / BigRational::from_integer(num_traits::pow(BigInt::from(q), d)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceReport::new("hk", sequence))
    }

    /// `H = {(a, u) < c (a, v)}` with `c` from [`find_c`] over `e <= e_max`.
    pub fn derived_halfspace(&self, family: &PFamily, e_max: u32) -> Result<DerivedHalfspace> {
        let ring = family.ring();
        let a = ring.a().clone();
        let certificate = find_c(family, e_max)?;
        let mut best: Option<(BigRational, &Vec<i64>)> = None;
        for g in ring.semigroup().generators_i64() {
            let w = a.dot(&crate::lattice::LatticePoint::from_i64(g))?;
            if best.as_ref().is_none_or(|(b, _)| w > *b) {
                best = Some((w, g));
            }
        }
        let (weight, v) = best.ok_or(Error::EmptyGenerators)?;
        let beta = weight * BigRational::from_integer(certificate.c.into());
        Ok(DerivedHalfspace {
            a,
            v: crate::lattice::LatticePoint::from_i64(v),
            certificate,
            beta,
        })
    }

    /// `Vol(C ∩ H) - Vol(Δ_q ∩ H)` per level: exact on `N^d`, sampled elsewhere.
    /// Returns the report and the largest standard error met.
    pub fn pbody_sequence(
        &self,
        family: &Arc<PFamily>,
        e_range: RangeInclusive<u32>,
        h: &TruncatingHalfspace,
    ) -> Result<(ConvergenceReport, Option<f64>)> {
        let body = PBody::new(Arc::new(family.to_system()?));
        let rows = e_range
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|e| {
                let v = pbody_complement_volume(&body, h, e, &self.opts.mc)?;
                Ok((
                    SequencePoint {
                        e,
                        q: family.q(e)?,
                        value: v.value,
                    },
                    v.std_err,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let std_err = rows
            .iter()
            .filter_map(|r| r.1)
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))));
        let sequence = rows.into_iter().map(|r| r.0).collect();
        Ok((ConvergenceReport::new("pbody", sequence), std_err))
    }

    /// Length limit, Hilbert-Kunz limit and p-body volume difference, which
    /// should coincide. Lengths and multiplicities are compared through their
    /// extrapolations, the p-body side through its value at `e_max`.
    pub fn vol_mult_check(&self, family: &Arc<PFamily>, e_max: u32, tol: BigRational) -> Result<VolMultReport> {
        if e_max >= 1 {
            family.validate(e_max)?.into_result()?;
        }
        let halfspace = self.derived_halfspace(family, e_max)?;
        let h = halfspace.halfspace();
        let length = self.length_sequence(family, 0..=e_max)?;
        let hk = self.hk_sequence(family, 0..=e_max, HkPath::Auto)?;
        let (pbody, std_err) = self.pbody_sequence(family, 0..=e_max, &h)?;
        let estimates = Estimates {
            length: length.extrapolated_limit.clone(),
            hk: hk.extrapolated_limit.clone(),
            pbody: pbody.last_value().cloned().unwrap_or_else(BigRational::zero),
            pbody_std_err: std_err,
        };
        let values = [&estimates.length, &estimates.hk, &estimates.pbody];
        let hi = values.iter().copied().max().expect("three values").clone();
        let lo = values.iter().copied().min().expect("three values").clone();
        let spread = hi - lo;
        let verdict = if spread <= tol {
            Verdict::Pass
        } else {
            let slack = std_err.map_or(0.0, |s| 3.0 * s);
            let gap = spread.to_f64().unwrap_or(f64::INFINITY);
            if slack > 0.0 && gap <= tol.to_f64().unwrap_or(0.0) + slack {
                Verdict::Inconclusive
            } else {
                Verdict::Fail
            }
        };
        let p_value = estimates.pbody.clone();
        let length = length.with_target(p_value.clone(), std_err, tol.clone(), CompareOn::Either);
        let hk = hk.with_target(p_value, std_err, tol.clone(), CompareOn::Either);
        let pbody = pbody.with_target(estimates.length.clone(), std_err, tol.clone(), CompareOn::LastValue);
        Ok(VolMultReport {
            family: family.label().to_string(),
            halfspace,
            length,
            hk,
            pbody,
            estimates,
            spread,
            tolerance: tol,
            verdict,
        })
    }

    /// `ℓ(R / I^{[q]}) <= α q^d`, with `α = colength(I)` on regular rings and
    /// the larger of that and the ratio at `e = 1` elsewhere.
    pub fn growth_bound_check(&self, ideal: &MonomialIdeal, e_range: RangeInclusive<u32>) -> Result<GrowthReport> {
        let ring = ideal.ring();
        let d = ring.dim();
        let p = ring.p();
        let base = BigRational::from_integer(self.colength(ideal, 1)?);
        let alpha = if ring.is_regular() {
            base
        } else {
            let q = prime_power(p, 1)?;
            base.max(over_q_d(self.colength(ideal, q)?, q, d))
        };
        let rows = e_range
            .map(|e| {
                let q = prime_power(p, e)?;
                let len = self.colength(ideal, q)?;
                let ratio = over_q_d(len.clone(), q, d);
                Ok(GrowthRow {
                    e,
                    q,
                    length: len.to_string(),
                    holds: ratio <= alpha,
                    ratio,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let passed = rows.iter().all(|r| r.holds);
        Ok(GrowthReport { alpha, rows, passed })
    }

    /// `ℓ(R / I_q) = #(S ∩ qH) - #(ϑ(I_q) ∩ qH)` per level.
    pub fn reconcile_lengths(
        &self,
        family: &PFamily,
        h: &TruncatingHalfspace,
        e_range: RangeInclusive<u32>,
    ) -> Result<Vec<ReconcileRow>> {
        let unit = SemigroupIdeal::unit(family.ring().semigroup().clone());
        e_range
            .map(|e| {
                let q = family.q(e)?;
                let level = family.level(e)?;
                let colength = self.colength(&level, 1)?;
                let all = count_scaled(&unit, q, h)?;
                let inside = count_scaled(level.staircase(), q, h)?;
                Ok(ReconcileRow {
                    e,
                    q,
                    holds: colength == &all - &inside,
                    colength: colength.to_string(),
                    semigroup_count: all.to_string(),
                    ideal_count: inside.to_string(),
                })
            })
            .collect()
    }

    /// `Vol(C ∩ H)`, exposed for reports.
    pub fn cone_volume(&self, family: &PFamily, h: &TruncatingHalfspace) -> Result<BigRational> {
        truncated_cone_volume(family.ring().semigroup().cone(), h)
    }
}

/// `|x - y| <= tol`.
pub fn within(x: &BigRational, y: &BigRational, tol: &BigRational) -> bool {
    (x - y).abs() <= *tol
}
