//! Exact orbit simulation of Birkhoff sums and comparison of their law with
//! the standard normal.
//!
//! Orbit points are dyadic rationals `N/2^B`; applying `T_a` is
//! `N ← a·N mod 2^B`, so the orbit carries no rounding at all. Only the
//! leading 53 bits are read out when the observable is evaluated.

mod dyadic;
mod ks;

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dyadic::{DyadicPoint, EVAL_BITS};
pub use ks::{ks_statistic, normal_cdf};

use crate::analysis::variance_covariance;
use crate::sequence::SequenceSpec;
use crate::sum::CompensatedSum;
use crate::trigpoly::TrigPoly;

pub const DEFAULT_GUARD_BITS: u64 = 64;
pub const HISTOGRAM_BINS: usize = 41;
pub const HISTOGRAM_RANGE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("numerator does not fit in {bits} bits")]
    NumeratorOutOfRange { bits: u64 },
    #[error("orbit needs at least {needed} bits, point has {have}")]
    InsufficientBits { needed: u64, have: u64 },
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Standardization {
    /// `(S − mean)/√var_hat` with the sample moments.
    #[default]
    Empirical,
    /// `S/√Var(S_n)` with the exact variance.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub samples: usize,
    pub seed: u64,
    pub standardization: Standardization,
    pub guard_bits: u64,
    /// Worker cap; `None` uses the global rayon pool. Never affects results.
    pub threads: Option<usize>,
}

impl SampleConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            standardization: Standardization::Empirical,
            guard_bits: DEFAULT_GUARD_BITS,
            threads: None,
        }
    }

    pub fn standardization(mut self, s: Standardization) -> Self {
        self.standardization = s;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCReport {
    pub n: u64,
    pub m: usize,
    pub seed: u64,
    pub mean: f64,
    pub var_hat: f64,
    pub ks: f64,
    pub histogram: Vec<u64>,
    pub standardization: Standardization,
    /// Raw `S_n` values in sample-index order.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl MCReport {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, s| acc.max(s.abs()))
    }

    /// One `S_n` value per line.
    pub fn samples_csv(&self) -> String {
        self.samples
            .iter()
            .map(|&s| crate::report::format_real(s) + "\n")
            .collect()
    }
}

/// `⌈Σ log₂ a_k⌉ + guard`.
pub fn required_bits(spec: &SequenceSpec, n: u64, guard: u64) -> u64 {
    // the sum is an integer for pure powers of two; don't let rounding bump it
    let log = spec.log2_multiplier(n);
    let rounded = log.round();
    let whole = if (log - rounded).abs() <= 1e-9 * log.max(1.0) {
        rounded
    } else {
        log.ceil()
    };
    whole as u64 + guard
}

fn birkhoff_sum(f: &TrigPoly, maps: &[u64], mut x: DyadicPoint) -> f64 {
    let mut acc = CompensatedSum::new();
    for &a in maps {
        x.step(a);
        acc.add(f.evaluate(x.to_f64()));
    }
    acc.value()
}

/// `S_n(x0) = Σ_{k=1}^n f(T_{a_k}∘…∘T_{a_1} x0)`; the first summand is
/// already one map in.
pub fn orbit_birkhoff(
    f: &TrigPoly,
    spec: &SequenceSpec,
    n: u64,
    x0: &DyadicPoint,
) -> Result<f64, MonteCarloError> {
    let needed = required_bits(spec, n, 0) + EVAL_BITS;
    if x0.bits() < needed {
        return Err(MonteCarloError::InsufficientBits {
            needed,
            have: x0.bits(),
        });
    }
    Ok(birkhoff_sum(f, &spec.maps(n), x0.clone()))
}

/// Uniform `bits`-bit initial point for sample `index`, from a ChaCha stream
/// keyed by `seed` and selected by `index`.
pub fn initial_point(seed: u64, index: u64, bits: u64) -> DyadicPoint {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let words = bits.div_ceil(32) as usize;
    let digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
    let mut numerator = BigUint::new(digits);
    for bit in bits..numerator.bits() {
        numerator.set_bit(bit, false);
    }
    DyadicPoint::new(numerator, bits).expect("masked to range")
}

fn histogram(standardized: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    let width = 2.0 * HISTOGRAM_RANGE / HISTOGRAM_BINS as f64;
    for &z in standardized {
        if (-HISTOGRAM_RANGE..=HISTOGRAM_RANGE).contains(&z) {
            let bin = (((z + HISTOGRAM_RANGE) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
    }
    counts
}

/// Samples `S_n` at `m` independent uniform initial points and summarizes the
/// standardized law.
pub fn sample_birkhoff(
    f: &TrigPoly,
    spec: &SequenceSpec,
    n: u64,
    config: &SampleConfig,
) -> Result<MCReport, MonteCarloError> {
    let m = config.samples;
    if m < 2 {
        return Err(MonteCarloError::TooFewSamples(m));
    }
    let bits = required_bits(spec, n, config.guard_bits.max(EVAL_BITS));
    let maps = spec.maps(n);
    let run = || -> Vec<f64> {
        (0..m as u64)
            .into_par_iter()
            .map(|i| birkhoff_sum(f, &maps, initial_point(config.seed, i, bits)))
            .collect()
    };
    let samples = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| MonteCarloError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mean = samples.iter().copied().collect::<CompensatedSum>().value() / m as f64;
    let var_hat = samples
        .iter()
        .map(|s| (s - mean) * (s - mean))
        .collect::<CompensatedSum>()
        .value()
        / (m - 1) as f64;
    let (center, scale) = match config.standardization {
        Standardization::Empirical => (mean, var_hat.sqrt()),
        Standardization::Exact => (0.0, variance_covariance(f, spec, n).sqrt()),
    };
    let standardized: Vec<f64> = if scale > 0.0 {
        samples.iter().map(|s| (s - center) / scale).collect()
    } else {
        vec![0.0; m]
    };

    Ok(MCReport {
        n,
        m,
        seed: config.seed,
        mean,
        var_hat,
        ks: ks_statistic(&standardized),
        histogram: histogram(&standardized),
        standardization: config.standardization,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1() -> TrigPoly {
        TrigPoly::cos(2).sub(&TrigPoly::cos(1))
    }

    fn constant(b: u64) -> SequenceSpec {
        SequenceSpec::constant(b).unwrap()
    }

    #[test]
    fn required_bits_examples() {
        assert_eq!(required_bits(&constant(2), 1000, 64), 1064);
        assert_eq!(required_bits(&constant(3), 100, 64), 223);
        assert_eq!(required_bits(&SequenceSpec::blocks(4.0).unwrap(), 5, 64), 70);
    }

    #[test]
    fn orbit_examples() {
        let x0 = DyadicPoint::from_dyadic(1, 2, 120).unwrap();
        let c = TrigPoly::cos(1);
        assert_eq!(orbit_birkhoff(&c, &constant(2), 1, &x0), Ok(-1.0));
        assert_eq!(orbit_birkhoff(&c, &constant(2), 2, &x0), Ok(0.0));
        assert_eq!(
            orbit_birkhoff(&c, &constant(2), 100, &x0),
            Err(MonteCarloError::InsufficientBits { needed: 153, have: 120 })
        );
    }

    #[test]
    fn telescoping_orbit() {
        // S_n = v(2^{n+1} x) − v(2x) for v = cos 2πx
        let v = TrigPoly::cos(1);
        for i in 0..20 {
            let n = 5 + 13 * i;
            let bits = required_bits(&constant(2), n + 1, 64);
            let x0 = initial_point(7, i, bits);
            let s = orbit_birkhoff(&f1(), &constant(2), n, &x0).unwrap();
            let mut end = x0.clone();
            for _ in 0..=n {
                end.step(2);
            }
            let mut start = x0.clone();
            start.step(2);
            let expected = v.evaluate(end.to_f64()) - v.evaluate(start.to_f64());
            assert!((s - expected).abs() < 1e-9, "{s} vs {expected}");
            assert!(s.abs() <= 2.0);
        }
    }

    #[test]
    fn guard_bits_do_not_leak() {
        let f = TrigPoly::cos(1).add(&TrigPoly::sin(3).scale(0.5));
        let spec = SequenceSpec::periodic(vec![2, 3]).unwrap();
        let n = 200;
        for i in 0..10 {
            let wide = initial_point(3, i, required_bits(&spec, n, 128));
            // the same point truncated to 64 guard bits
            let narrow_bits = required_bits(&spec, n, 64);
            let narrow = DyadicPoint::new(
                wide.numerator() >> (wide.bits() - narrow_bits),
                narrow_bits,
            )
            .unwrap();
            let a = orbit_birkhoff(&f, &spec, n, &wide).unwrap();
            let b = orbit_birkhoff(&f, &spec, n, &narrow).unwrap();
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn initial_points_are_order_independent() {
        let a = initial_point(11, 5, 300);
        let _ = initial_point(11, 4, 300);
        assert_eq!(a, initial_point(11, 5, 300));
        assert_ne!(a, initial_point(11, 6, 300));
        assert_ne!(a, initial_point(12, 5, 300));
        assert!(a.numerator().bits() <= 300);
    }

    #[test]
    fn smoke_two_samples() {
        let rep = sample_birkhoff(&TrigPoly::cos(1), &constant(2), 16, &SampleConfig::new(2, 1)).unwrap();
        assert_eq!(rep.m, 2);
        assert!((0.0..=1.0).contains(&rep.ks));
        assert!(rep.var_hat >= 0.0);
        assert!(rep.histogram.iter().sum::<u64>() <= 2);
        assert_eq!(
            sample_birkhoff(&TrigPoly::cos(1), &constant(2), 16, &SampleConfig::new(1, 1)),
            Err(MonteCarloError::TooFewSamples(1))
        );
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[-5.0, 5.0, 0.0, 7.0, -5.1]);
        assert_eq!(h.len(), HISTOGRAM_BINS);
        assert_eq!(h[0], 1);
        assert_eq!(h[HISTOGRAM_BINS - 1], 1);
        assert_eq!(h[20], 1);
        assert_eq!(h.iter().sum::<u64>(), 3);
    }
}
