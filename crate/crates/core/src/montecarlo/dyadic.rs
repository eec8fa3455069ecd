use num_bigint::BigUint;
use num_traits::Zero;

use super::MonteCarloError;

/// Bits of the orbit point read out for evaluation (an f64 mantissa).
pub const EVAL_BITS: u64 = 53;

/// `x = numerator / 2^bits` with `numerator < 2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicPoint {
    bits: u64,
    numerator: BigUint,
}

impl DyadicPoint {
    pub fn new(numerator: BigUint, bits: u64) -> Result<Self, MonteCarloError> {
        if bits == 0 || numerator.bits() > bits {
            return Err(MonteCarloError::NumeratorOutOfRange { bits });
        }
        Ok(Self { bits, numerator })
    }

    /// `p / 2^q` embedded at `bits` of precision.
    pub fn from_dyadic(p: u64, q: u64, bits: u64) -> Result<Self, MonteCarloError> {
        if q > bits {
            return Err(MonteCarloError::NumeratorOutOfRange { bits });
        }
        Self::new(BigUint::from(p) << (bits - q), bits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    /// `x ↦ a·x mod 1`, exactly.
    pub fn step(&mut self, a: u64) {
        self.numerator *= a;
        for bit in self.bits..self.numerator.bits() {
            self.numerator.set_bit(bit, false);
        }
    }

    /// The leading [`EVAL_BITS`] bits of `x` as an f64 in `[0, 1)`.
    ///
    /// Panics when `bits < EVAL_BITS`.
    pub fn to_f64(&self) -> f64 {
        assert!(self.bits >= EVAL_BITS);
        if self.numerator.is_zero() {
            return 0.0;
        }
        let lo = self.bits - EVAL_BITS;
        let (word, shift) = ((lo / 64) as usize, (lo % 64) as u32);
        let mut digits = self.numerator.iter_u64_digits().skip(word);
        let d0 = digits.next().unwrap_or(0);
        let d1 = digits.next().unwrap_or(0);
        let mut top = d0 >> shift;
        if shift > 0 {
            top |= d1 << (64 - shift);
        }
        top &= (1u64 << EVAL_BITS) - 1;
        top as f64 / (1u64 << EVAL_BITS) as f64
    }
}
