//! p-families `I_q` of monomial ideals with `I_q^{[p]} ⊆ I_{pq}`, and the
//! constant `c` with `m^{cq} ⊆ I_q`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::psystem::{exponent_of, prime_power, AxiomViolation, PSystem, ValidationReport};
use crate::toric::{max_gap_order, MonomialIdeal, ToricRing};

pub type FamilyRule = dyn Fn(u64) -> Result<MonomialIdeal> + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Frobenius,
    Power,
    Cartier,
    Custom,
}

#[derive(Clone)]
pub enum FamilyConstructor {
    /// `I_q = I^{[q]}`.
    Frobenius(MonomialIdeal),
    /// `I_q = I^{⌈t q⌉}` for a positive rational `t`.
    Power(MonomialIdeal, BigRational),
    /// `I_q = {b : ⌊b/q⌋ ∈ ϑ(I)}`, regular rings only.
    Cartier(MonomialIdeal),
    Custom {
        label: String,
        ring: Arc<ToricRing>,
        rule: Arc<FamilyRule>,
    },
}

impl fmt::Debug for FamilyConstructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyConstructor::Frobenius(i) => write!(f, "Frobenius({i:?})"),
            FamilyConstructor::Power(i, t) => write!(f, "Power({i:?}, {t})"),
            FamilyConstructor::Cartier(i) => write!(f, "Cartier({i:?})"),
            FamilyConstructor::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

pub struct PFamily {
    ring: Arc<ToricRing>,
    kind: FamilyKind,
    label: String,
    rule: Arc<FamilyRule>,
    cache: RwLock<HashMap<u32, Arc<MonomialIdeal>>>,
}

impl fmt::Debug for PFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PFamily")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .finish()
    }
}

/// `⌈t q⌉` as a machine integer.
fn ceil_times(t: &BigRational, q: u64) -> Result<u64> {
    (t * BigRational::from_integer(BigInt::from(q)))
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or(Error::Overflow)
}

impl PFamily {
    /// Builds the family without validating the axiom.
    pub fn from_constructor(ctor: FamilyConstructor) -> Result<PFamily> {
        let (ring, kind, label, rule): (Arc<ToricRing>, FamilyKind, String, Arc<FamilyRule>) = match ctor {
            FamilyConstructor::Frobenius(base) => {
                let label = format!("frobenius{:?}", base.generators());
                let ring = base.ring().clone();
                (ring, FamilyKind::Frobenius, label, Arc::new(move |q| base.frobenius_power(q)))
            }
            FamilyConstructor::Power(base, t) => {
                if !t.is_positive() {
                    return Err(Error::InvalidParameter(format!("power exponent t = {t} must be positive")));
                }
                let label = format!("power{:?}^{t}", base.generators());
                let ring = base.ring().clone();
                let rule = move |q| base.ordinary_power(ceil_times(&t, q)?);
                (ring, FamilyKind::Power, label, Arc::new(rule))
            }
            FamilyConstructor::Cartier(base) => {
                if !base.ring().is_regular() {
                    return Err(Error::RequiresRegular("cartier family"));
                }
                let label = format!("cartier{:?}", base.generators());
                let ring = base.ring().clone();
                (ring, FamilyKind::Cartier, label, Arc::new(move |q| base.cartier_contraction(q)))
            }
            FamilyConstructor::Custom { label, ring, rule } => (ring, FamilyKind::Custom, label, rule),
        };
        Ok(PFamily {
            ring,
            kind,
            label,
            rule,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> PFamily {
        self.label = label.into();
        self
    }

    pub fn ring(&self) -> &Arc<ToricRing> {
        &self.ring
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn q(&self, e: u32) -> Result<u64> {
        prime_power(self.ring.p(), e)
    }

    /// `I_{p^e}`, computed once and cached.
    pub fn level(&self, e: u32) -> Result<Arc<MonomialIdeal>> {
        if let Some(i) = self.cache.read().expect("cache lock").get(&e) {
            return Ok(i.clone());
        }
        let i = (self.rule)(self.q(e)?)?;
        if **i.staircase().parent() != **self.ring.semigroup() {
            return Err(Error::InvalidParameter(format!(
                "level {e} of {} lives over a different ring",
                self.label
            )));
        }
        let i = Arc::new(i);
        self.cache
            .write()
            .expect("cache lock")
            .entry(e)
            .or_insert_with(|| i.clone());
        Ok(i)
    }

    /// Checks `I_q^{[p]} ⊆ I_{pq}` generator by generator for `q < p^{e_max}`.
    pub fn validate(&self, e_max: u32) -> Result<ValidationReport> {
        if e_max < 1 {
            return Err(Error::InvalidParameter("e_max must be at least 1".into()));
        }
        let p = self.p();
        for e in 0..e_max {
            let here = self.level(e)?;
            let next = self.level(e + 1)?;
            let scale = BigInt::from(p);
            for t in here.staircase().generators() {
                let pt = t.scale(&scale);
                if !next.staircase().contains(&pt) {
                    return Ok(ValidationReport {
                        p,
                        checked_levels: e_max,
                        violation: Some(AxiomViolation {
                            e,
                            generator: t.clone(),
                            witness: pt,
                        }),
                    });
                }
            }
        }
        Ok(ValidationReport {
            p,
            checked_levels: e_max,
            violation: None,
        })
    }

    /// The semigroup system `q -> ϑ(I_q)`.
    pub fn to_system(self: &Arc<Self>) -> Result<PSystem> {
        let fam = self.clone();
        let p = self.p();
        PSystem::new(
            self.ring.semigroup().clone(),
            p,
            self.label.clone(),
            Arc::new(move |q| Ok(fam.level(exponent_of(p, q)?)?.staircase().clone())),
        )
    }
}

/// Builds a family and validates the axiom up to `validate_to` (skipped when 0).
pub fn make_family(ctor: FamilyConstructor, validate_to: u32) -> Result<Arc<PFamily>> {
    let fam = PFamily::from_constructor(ctor)?;
    if validate_to >= 1 {
        fam.validate(validate_to)?.into_result()?;
    }
    Ok(Arc::new(fam))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapWitness {
    pub e: u32,
    pub q: u64,
    /// A point outside `I_q` whose m-adic order is at least `(c - 1) q`.
    pub point: LatticePoint,
    pub order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CCertificate {
    pub c: u64,
    /// Shows that `c - 1` fails; absent when every tested level is the unit ideal.
    pub witness: Option<GapWitness>,
}

/// The least `c >= 1` with `m^{cq} ⊆ I_q` for all `q = p^e`, `e <= e_max`.
/// On `N^d`, `m^n` is the set of points of coordinate sum at least `n`.
pub fn find_c(family: &PFamily, e_max: u32) -> Result<CCertificate> {
    let mut best = CCertificate {
        c: 1,
        witness: None,
    };
    for e in 0..=e_max {
        let q = family.q(e)?;
        let level = family.level(e)?;
        if !level.is_m_primary() {
            return Err(Error::NotMPrimary(format!("level e = {e} of {}", family.label())));
        }
        if let Some((u, order)) = max_gap_order(level.staircase())? {
            let c = order / q + 1;
            if c > best.c || best.witness.is_none() {
                best = CCertificate {
                    c: c.max(best.c),
                    witness: Some(GapWitness {
                        e,
                        q,
                        point: LatticePoint::from_i64(&u),
                        order,
                    }),
                };
            }
        }
    }
    Ok(best)
}
