//! Seeded stratified Monte Carlo volume estimates over a rational box.
//!
//! The box is cut into `K^d` equal strata with the same number of samples in
//! each. Every stratum draws from its own ChaCha stream, so the estimate does
//! not depend on how strata are scheduled across threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sub-cell resolution along each axis of a stratum.
const FINE_STEPS: i64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 100_000,
            seed: 0x5eed_0001,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub value: BigRational,
    pub std_err: f64,
    pub samples: u64,
}

/// Sample points are `z / den` with integer numerators; the indicator sees
/// the numerators and the shared denominator.
pub fn stratified_volume<F>(
    lo: &[BigRational],
    hi: &[BigRational],
    opts: &McOptions,
    indicator: F,
) -> Result<McEstimate>
where
    F: Fn(&[i128], i128) -> bool + Sync,
{
    let d = lo.len();
    if d == 0 || hi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: hi.len(),
        });
    }
    if opts.samples < 4 {
        return Err(Error::InvalidParameter("at least 4 samples are required".into()));
    }
    let volume: BigRational = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| h - l)
        .fold(BigRational::one(), |acc, w| acc * w);
    if volume <= BigRational::zero() {
        return Ok(McEstimate {
            value: BigRational::zero(),
            std_err: 0.0,
            samples: 0,
        });
    }
    let k = ((opts.samples as f64 / 4.0).powf(1.0 / d as f64).floor() as u64).max(1);
    let strata = k.pow(d as u32);
    let per = opts.samples / strata;

    // Grid: sample j along an axis sits at the midpoint (2j + 1) / (2 D).
    let den_lcm = lo
        .iter()
        .chain(hi)
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let den = den_lcm * BigInt::from(k) * BigInt::from(FINE_STEPS);
    let to_int = |x: &BigRational| -> Result<i128> {
        (x * BigRational::from_integer(den.clone()))
            .to_integer()
            .to_i128()
            .ok_or(Error::Overflow)
    };
    let zlo: Vec<i128> = lo.iter().map(to_int).collect::<Result<_>>()?;
    let zhi: Vec<i128> = hi.iter().map(to_int).collect::<Result<_>>()?;
    let den_i = den.to_i128().ok_or(Error::Overflow)?;
    let k_i = k as i128;

    let hits: Vec<u64> = (0..strata)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s);
            let mut cell = vec![0i128; d];
            let mut rest = s as i128;
            for c in cell.iter_mut().rev() {
                *c = rest % k_i;
                rest /= k_i;
            }
            let mut z = vec![0i128; d];
            let mut count = 0u64;
            for _ in 0..per {
                for i in 0..d {
                    let width = (zhi[i] - zlo[i]) / k_i;
                    let start = zlo[i] + width * cell[i];
                    let j = rng.gen_range(0..width);
                    z[i] = 2 * (start + j) + 1;
                }
                if indicator(&z, 2 * den_i) {
                    count += 1;
                }
            }
            count
        })
        .collect();

    let total_hits: u64 = hits.iter().sum();
    let n = strata * per;
    let value = &volume * BigRational::new(total_hits.into(), n.into());
    let vol_f = volume.to_f64().unwrap_or(f64::INFINITY);
    let cell = vol_f / strata as f64;
    let mut var = 0.0;
    if per > 1 {
        for &h in &hits {
            let p = h as f64 / per as f64;
            let s2 = p * (1.0 - p) * per as f64 / (per as f64 - 1.0);
            var += cell * cell * s2 / per as f64;
        }
    }
    Ok(McEstimate {
        value,
        std_err: var.sqrt(),
        samples: n,
    })
}
