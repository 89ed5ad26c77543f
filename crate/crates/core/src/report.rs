//! Convergence reports: exact sequences, an affine-in-1/q extrapolation, and
//! a verdict against a comparison target.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Number of trailing points used by the affine fit.
pub const FIT_POINTS: usize = 3;

/// Rationals travel as `"num/den"` strings so that JSON stays exact.
pub mod rational_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn encode(x: &BigRational) -> String {
        format!("{}/{}", x.numer(), x.denom())
    }

    pub fn decode(s: &str) -> Option<BigRational> {
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        (!d.is_zero()).then(|| BigRational::new(n, d))
    }

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_some(&encode(x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
            let s = Option::<String>::deserialize(d)?;
            s.map(|s| decode(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))))
                .transpose()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencePoint {
    pub e: u32,
    pub q: u64,
    #[serde(with = "rational_string")]
    pub value: BigRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareOn {
    LastValue,
    Extrapolated,
    /// Pass when either the last value or the extrapolation is within tolerance.
    Either,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub sequence: Vec<SequencePoint>,
    #[serde(with = "rational_string")]
    pub extrapolated_limit: BigRational,
    #[serde(with = "rational_string")]
    pub fit_residual: BigRational,
    #[serde(with = "rational_string::option")]
    pub comparison_target: Option<BigRational>,
    /// Standard error of a sampled target, if any.
    pub target_std_err: Option<f64>,
    #[serde(with = "rational_string")]
    pub tolerance: BigRational,
    pub compare_on: CompareOn,
    pub verdict: Verdict,
    /// `(e, value)` pairs in floating point, for plotting only.
    pub plot: Vec<(u32, f64)>,
}

/// Least-squares fit of `y = L + c x`; returns `(L, c, sum of squared residuals)`.
pub fn affine_fit(points: &[(BigRational, BigRational)]) -> (BigRational, BigRational, BigRational) {
    let n = BigRational::from_integer(points.len().into());
    if points.len() < 2 {
        let y = points.first().map(|p| p.1.clone()).unwrap_or_else(BigRational::zero);
        return (y, BigRational::zero(), BigRational::zero());
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    );
    for (x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = &n * &sxx - &sx * &sx;
    let c = if denom.is_zero() {
        BigRational::zero()
    } else {
        (&n * &sxy - &sx * &sy) / denom
    };
    let l = (&sy - &c * &sx) / &n;
    let residual = points.iter().fold(BigRational::zero(), |acc, (x, y)| {
        let r = y - &l - &c * x;
        acc + &r * &r
    });
    (l, c, residual)
}

impl ConvergenceReport {
    /// A report without a target; the verdict is inconclusive until one is set.
    pub fn new(label: impl Into<String>, sequence: Vec<SequencePoint>) -> ConvergenceReport {
        let tail: Vec<(BigRational, BigRational)> = sequence
            .iter()
            .skip(sequence.len().saturating_sub(FIT_POINTS))
            .map(|p| (BigRational::new(1.into(), p.q.into()), p.value.clone()))
            .collect();
        let (limit, _, residual) = affine_fit(&tail);
        let plot = sequence
            .iter()
            .map(|p| (p.e, p.value.to_f64().unwrap_or(f64::NAN)))
            .collect();
        ConvergenceReport {
            label: label.into(),
            sequence,
            extrapolated_limit: limit,
            fit_residual: residual,
            comparison_target: None,
            target_std_err: None,
            tolerance: BigRational::zero(),
            compare_on: CompareOn::LastValue,
            verdict: Verdict::Inconclusive,
            plot,
        }
    }

    pub fn last_value(&self) -> Option<&BigRational> {
        self.sequence.last().map(|p| &p.value)
    }

    /// Sets the target and recomputes the verdict. A sampled target that is
    /// only within three standard errors beyond the tolerance is inconclusive.
    pub fn with_target(
        mut self,
        target: BigRational,
        std_err: Option<f64>,
        tolerance: BigRational,
        compare_on: CompareOn,
    ) -> ConvergenceReport {
        let dist = |x: &BigRational| (x - &target).abs();
        let last = self.last_value().map(dist);
        let extra = dist(&self.extrapolated_limit);
        let gap = match compare_on {
            CompareOn::LastValue => last,
            CompareOn::Extrapolated => Some(extra),
            CompareOn::Either => Some(match last {
                Some(l) if l < extra => l,
                _ => extra,
            }),
        };
        self.verdict = match gap {
            None => Verdict::Inconclusive,
            Some(g) if g <= tolerance => Verdict::Pass,
            Some(g) => {
                let slack = std_err.map(|s| 3.0 * s).unwrap_or(0.0);
                let g = g.to_f64().unwrap_or(f64::INFINITY);
                if slack > 0.0 && g <= tolerance.to_f64().unwrap_or(0.0) + slack {
                    Verdict::Inconclusive
                } else {
                    Verdict::Fail
                }
            }
        };
        self.comparison_target = Some(target);
        self.target_std_err = std_err;
        self.tolerance = tolerance;
        self.compare_on = compare_on;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn seq(values: &[(u32, BigRational)]) -> Vec<SequencePoint> {
        values
            .iter()
            .map(|(e, v)| SequencePoint {
                e: *e,
                q: 1 << e,
                value: v.clone(),
            })
            .collect()
    }

    #[test]
    fn exact_affine_sequences_extrapolate_exactly() {
        let s: Vec<(u32, BigRational)> = (0..8).map(|e| (e, rat(3, 2) + rat(1, 2 << e))).collect();
        let r = ConvergenceReport::new("sum", seq(&s));
        assert_eq!(r.extrapolated_limit, rat(3, 2));
        assert_eq!(r.fit_residual, rat(0, 1));
        let r = r.with_target(rat(3, 2), None, rat(1, 1000), CompareOn::LastValue);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = r.with_target(rat(3, 2), None, rat(1, 100), CompareOn::LastValue);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn constant_and_single_point() {
        let r = ConvergenceReport::new("c", seq(&[(0, rat(6, 1))]));
        assert_eq!(r.extrapolated_limit, rat(6, 1));
        let r = r.with_target(rat(6, 1), None, rat(0, 1), CompareOn::Extrapolated);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn sampled_targets_can_be_inconclusive() {
        let r = ConvergenceReport::new("c", seq(&[(0, rat(1, 1)), (1, rat(1, 1))]))
            .with_target(rat(102, 100), Some(0.01), rat(1, 100), CompareOn::LastValue);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn json_round_trip() {
        let r = ConvergenceReport::new("x", seq(&[(0, rat(2, 1)), (1, rat(7, 4)), (2, rat(13, 8))]))
            .with_target(rat(3, 2), Some(0.25), rat(1, 8), CompareOn::Either);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"7/4\""));
        let back: ConvergenceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
