//! Ergodic averages along exact orbits of random dyadic rationals.
//!
//! The starting point `(x, 0)` is far from typical (its past is empty), so
//! each orbit first runs `burn_in` steps before points are recorded.
//!
//! Orbit `i` draws its starting point from a ChaCha stream selected by `i`,
//! so estimates depend only on `(seed, n_samples, n_orbit)` and not on how
//! the orbits are spread over threads.

use num_bigint::{BigInt, RandBigInt, Sign};
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_thresholds, dist_h, DigitRange, Event, FrequencyError, Method, RegionMeasure};
use crate::cf::{n_safe_for_bits, DEFAULT_SAMPLE_BITS};
use crate::natural_extension::ExactOrbit;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_samples: usize,
    pub n_orbit: usize,
    pub seed: u64,
    pub bits: u64,
    /// Steps discarded at the start of each orbit.
    pub burn_in: usize,
}

pub const DEFAULT_BURN_IN: usize = 10;

impl MonteCarloConfig {
    pub fn new(n_samples: usize, n_orbit: usize, seed: u64) -> Self {
        MonteCarloConfig {
            n_samples,
            n_orbit,
            seed,
            bits: DEFAULT_SAMPLE_BITS,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    fn validate(&self) -> Result<(), FrequencyError> {
        if self.n_samples == 0 || self.n_orbit == 0 {
            return Err(FrequencyError::Domain("n_samples and n_orbit must be positive".into()));
        }
        // index burn_in + n_orbit + 2 is the deepest digit read
        let n_safe = n_safe_for_bits(self.bits);
        if self.burn_in + self.n_orbit + 2 > n_safe {
            return Err(FrequencyError::Domain(format!(
                "burn_in + n_orbit = {} exceeds the certified depth {} of {}-bit samples",
                self.burn_in + self.n_orbit,
                n_safe.saturating_sub(2),
                self.bits
            )));
        }
        Ok(())
    }
}

/// Floating view of one orbit point with its two digits.
#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    v: f64,
    a: f64,
    b: f64,
}

impl Sample {
    fn d_before(&self) -> f64 {
        (self.a + self.t) * self.v / (1.0 - self.a * self.v)
    }
    fn d_middle(&self) -> f64 {
        1.0 / (self.t * self.v)
    }
    fn d_after(&self) -> f64 {
        (self.b + self.v) * self.t / (1.0 - self.b * self.t)
    }
}

fn big_to_f64(n: &num_bigint::BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// The `index`-th random start `k / 2^bits` for a seed. Each index has its
/// own ChaCha stream.
pub fn sample_start(seed: u64, index: usize, bits: u64) -> Rational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let k = rng.gen_biguint(bits);
    Rational::new(BigInt::from_biguint(Sign::Plus, k), BigInt::one() << bits)
}

/// Points `n = burn_in + 1, ..., burn_in + len` of the orbit of the
/// `index`-th random start.
fn orbit(cfg: &MonteCarloConfig, index: usize, len: usize) -> Vec<Sample> {
    let x = sample_start(cfg.seed, index, cfg.bits);
    let mut out = Vec::with_capacity(len);
    for step in ExactOrbit::new(x).expect("x in [0,1)").skip(1 + cfg.burn_in).take(len) {
        // n_safe leaves ample room, so the orbit never terminates early
        let Some(b) = step.next_digit() else { break };
        let a = step.a_n.as_ref().expect("n >= 1");
        let p = step.point.to_float();
        out.push(Sample {
            t: p.t,
            v: p.v,
            a: big_to_f64(a),
            b: big_to_f64(&b),
        });
    }
    out
}

fn batch_estimate(means: &[f64], method: Method) -> RegionMeasure {
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let mut m = RegionMeasure::from_value(mean, method);
    if means.len() > 1 {
        let var = means.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
        m.stderr = Some((var / n).sqrt());
    }
    m
}

/// Fraction of `n_orbit` consecutive indices (from `burn_in + 2` on) at
/// which the event holds, averaged over `n_samples` orbits. The standard error is computed from the
/// per-orbit means, which absorbs the correlation along each orbit.
pub fn monte_carlo_frequency(
    r: f64,
    big_r: f64,
    event: Event,
    cfg: MonteCarloConfig,
) -> Result<RegionMeasure, FrequencyError> {
    check_thresholds(r, big_r)?;
    cfg.validate()?;
    let means: Vec<f64> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let pts = orbit(&cfg, i, cfg.n_orbit + 1);
            let hits = pts
                .iter()
                .skip(1)
                .filter(|s| event.holds(s.d_before(), s.d_after(), r, big_r))
                .count();
            hits as f64 / cfg.n_orbit as f64
        })
        .collect();
    Ok(batch_estimate(&means, Method::MonteCarlo))
}

/// Like [`monte_carlo_frequency`], but splits the hits by the group of
/// rectangles `(a-range, b-range)` holding `(a_n, a_{n+1})`. Groups should be
/// disjoint; points outside every group are dropped.
pub fn monte_carlo_cells(
    r: f64,
    big_r: f64,
    event: Event,
    cfg: MonteCarloConfig,
    groups: &[(DigitRange, DigitRange)],
) -> Result<Vec<RegionMeasure>, FrequencyError> {
    check_thresholds(r, big_r)?;
    cfg.validate()?;
    let contains = |range: &DigitRange, d: f64| d >= range.lo as f64 && range.hi.is_none_or(|hi| d <= hi as f64);
    let per_orbit: Vec<Vec<f64>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![0usize; groups.len()];
            for s in orbit(&cfg, i, cfg.n_orbit + 1).iter().skip(1) {
                if !event.holds(s.d_before(), s.d_after(), r, big_r) {
                    continue;
                }
                if let Some(j) = groups.iter().position(|(ga, gb)| contains(ga, s.a) && contains(gb, s.b)) {
                    counts[j] += 1;
                }
            }
            counts.iter().map(|&c| c as f64 / cfg.n_orbit as f64).collect()
        })
        .collect();
    Ok((0..groups.len())
        .map(|j| {
            let means: Vec<f64> = per_orbit.iter().map(|row| row[j]).collect();
            batch_estimate(&means, Method::MonteCarlo)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub empirical: RegionMeasure,
    pub dist_h: f64,
}

/// Empirical `P(D ≤ R)` over `n_orbit` consecutive `D_{n-1}` (from
/// `n = burn_in + 1` on), next to the
/// limiting distribution.
pub fn monte_carlo_cdf(thresholds: &[f64], cfg: MonteCarloConfig) -> Result<Vec<CdfPoint>, FrequencyError> {
    cfg.validate()?;
    for &x in thresholds {
        dist_h(x)?;
    }
    let per_orbit: Vec<Vec<f64>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let ds: Vec<f64> = orbit(&cfg, i, cfg.n_orbit).iter().map(Sample::d_middle).collect();
            thresholds
                .iter()
                .map(|&x| ds.iter().filter(|&&d| d <= x).count() as f64 / cfg.n_orbit as f64)
                .collect()
        })
        .collect();
    thresholds
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let means: Vec<f64> = per_orbit.iter().map(|row| row[j]).collect();
            Ok(CdfPoint {
                big_r: x,
                empirical: batch_estimate(&means, Method::MonteCarlo),
                dist_h: dist_h(x)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let cfg = MonteCarloConfig::new(40, 30, 11);
        let a = monte_carlo_frequency(2.9, 3.6, Event::BothGreater, cfg).unwrap();
        let b = monte_carlo_frequency(2.9, 3.6, Event::BothGreater, cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool
            .install(|| monte_carlo_frequency(2.9, 3.6, Event::BothGreater, cfg))
            .unwrap();
        assert_eq!(a, c);
        let d = monte_carlo_frequency(2.9, 3.6, Event::BothGreater, MonteCarloConfig::new(40, 30, 12)).unwrap();
        assert_ne!(a.value, d.value);
    }

    #[test]
    fn orbit_too_long_is_rejected() {
        let cfg = MonteCarloConfig::new(1, 700, 1);
        assert!(monte_carlo_frequency(2.9, 3.6, Event::BothGreater, cfg).is_err());
    }

    #[test]
    fn events_partition_each_orbit() {
        let cfg = MonteCarloConfig::new(20, 40, 5);
        let sum: f64 = Event::ALL
            .iter()
            .map(|&ev| monte_carlo_frequency(2.9, 3.6, ev, cfg).unwrap().value)
            .sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cells_split_the_total() {
        let cfg = MonteCarloConfig::new(30, 40, 9);
        let groups = [
            (DigitRange::from(1), DigitRange::single(1)),
            (DigitRange::from(1), DigitRange::from(2)),
        ];
        let total = monte_carlo_frequency(2.9, 3.6, Event::BothGreater, cfg).unwrap();
        let cells = monte_carlo_cells(2.9, 3.6, Event::BothGreater, cfg, &groups).unwrap();
        let sum: f64 = cells.iter().map(|m| m.value).sum();
        assert!((sum - total.value).abs() < 1e-12);
    }
}
