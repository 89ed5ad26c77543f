//! p-systems: rules `e -> T_{p^e}` of semigroup ideals with `p T_q ⊆ T_{pq}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::semigroup::{SemigroupIdeal, StandardSemigroup};

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let p = p as u64;
    (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// `p^e`, failing when it leaves `u64`.
pub fn prime_power(p: u32, e: u32) -> Result<u64> {
    (p as u64).checked_pow(e).ok_or(Error::Overflow)
}

/// The exponent `e` with `q = p^e`.
pub fn exponent_of(p: u32, q: u64) -> Result<u32> {
    let (mut e, mut r) = (0u32, q);
    if p < 2 || q == 0 {
        return Err(Error::NotPowerOfP { q, p });
    }
    while r % p as u64 == 0 {
        r /= p as u64;
        e += 1;
    }
    if r == 1 {
        Ok(e)
    } else {
        Err(Error::NotPowerOfP { q, p })
    }
}

pub type SystemRule = dyn Fn(u64) -> Result<SemigroupIdeal> + Send + Sync;

/// A rule `q -> T_q` over a fixed standard semigroup, with lazily cached levels.
pub struct PSystem {
    parent: Arc<StandardSemigroup>,
    p: u32,
    label: String,
    rule: Arc<SystemRule>,
    cache: RwLock<HashMap<u32, Arc<SemigroupIdeal>>>,
}

impl fmt::Debug for PSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PSystem")
            .field("label", &self.label)
            .field("p", &self.p)
            .finish()
    }
}

impl PSystem {
    pub fn new(
        parent: Arc<StandardSemigroup>,
        p: u32,
        label: impl Into<String>,
        rule: Arc<SystemRule>,
    ) -> Result<PSystem> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        Ok(PSystem {
            parent,
            p,
            label: label.into(),
            rule,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// `T_q = q T_1 + S`.
    pub fn frobenius_induced(t1: SemigroupIdeal, p: u32) -> Result<PSystem> {
        let parent = t1.parent().clone();
        let label = format!("frobenius{:?}", t1.generators());
        PSystem::new(
            parent,
            p,
            label,
            Arc::new(move |q| t1.scaled(i64::try_from(q).map_err(|_| Error::Overflow)?)),
        )
    }

    /// `T_q = T` for every `q`.
    pub fn constant(t: SemigroupIdeal, p: u32) -> Result<PSystem> {
        let parent = t.parent().clone();
        let label = format!("constant{:?}", t.generators());
        PSystem::new(parent, p, label, Arc::new(move |_| Ok(t.clone())))
    }

    pub fn parent(&self) -> &Arc<StandardSemigroup> {
        &self.parent
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn q(&self, e: u32) -> Result<u64> {
        prime_power(self.p, e)
    }

    /// `T_{p^e}`, computed once and cached.
    pub fn level(&self, e: u32) -> Result<Arc<SemigroupIdeal>> {
        if let Some(t) = self.cache.read().expect("cache lock").get(&e) {
            return Ok(t.clone());
        }
        let t = (self.rule)(self.q(e)?)?;
        if **t.parent() != *self.parent {
            return Err(Error::InvalidParameter(format!(
                "level {e} of {} lives over a different semigroup",
                self.label
            )));
        }
        let t = Arc::new(t);
        self.cache
            .write()
            .expect("cache lock")
            .entry(e)
            .or_insert_with(|| t.clone());
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub e: u32,
    /// A generator `t` of `T_{p^e}`.
    pub generator: LatticePoint,
    /// `p t`, which is missing from `T_{p^{e+1}}`.
    pub witness: LatticePoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub p: u32,
    pub checked_levels: u32,
    pub violation: Option<AxiomViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violation {
            None => Ok(()),
            Some(v) => Err(Error::AxiomViolation {
                e: v.e,
                witness: v.witness,
            }),
        }
    }
}

/// Checks `p t ∈ T_{p^{e+1}}` for every generator `t` of `T_{p^e}`, `e < e_max`,
/// and reports the first failure.
pub fn validate_p_system(system: &PSystem, e_max: u32) -> Result<ValidationReport> {
    if e_max < 1 {
        return Err(Error::InvalidParameter("e_max must be at least 1".into()));
    }
    let p = i64::from(system.p());
    for e in 0..e_max {
        let here = system.level(e)?;
        let next = system.level(e + 1)?;
        for (t, ti) in here.generators().iter().zip(here.generators_i64()) {
            let pt = ti
                .iter()
                .map(|&x| x.checked_mul(p).ok_or(Error::Overflow))
                .collect::<Result<Vec<_>>>()?;
            if !next.contains_i64(&pt) {
                return Ok(ValidationReport {
                    p: system.p(),
                    checked_levels: e_max,
                    violation: Some(AxiomViolation {
                        e,
                        generator: t.clone(),
                        witness: LatticePoint::from_i64(&pt),
                    }),
                });
            }
        }
    }
    Ok(ValidationReport {
        p: system.p(),
        checked_levels: e_max,
        violation: None,
    })
}

/// `{u in N^d : u_1 + ... + u_d >= n}` as an ideal of `N^d`.
pub fn degree_at_least(parent: Arc<StandardSemigroup>, n: u64) -> Result<SemigroupIdeal> {
    if !parent.is_regular() {
        return Err(Error::RequiresRegular("degree_at_least"));
    }
    let d = parent.dim();
    let n = i64::try_from(n).map_err(|_| Error::Overflow)?;
    let mut gens = Vec::new();
    let mut cur = vec![0i64; d];
    compositions(n, 0, &mut cur, &mut gens);
    Ok(SemigroupIdeal::from_i64_unchecked(parent, gens))
}

fn compositions(rest: i64, axis: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if axis + 1 == cur.len() {
        cur[axis] = rest;
        out.push(cur.clone());
        return;
    }
    for k in 0..=rest {
        cur[axis] = k;
        compositions(rest - k, axis + 1, cur, out);
    }
}
