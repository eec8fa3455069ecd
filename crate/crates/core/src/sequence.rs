//! Random-access generators for the map sequence `a_1, a_2, …`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Values of `d_l` beyond this are not checked for block overlap; the growth
/// condition is monotone long before that.
const BLOCK_CHECK_LIMIT: f64 = 9.0e15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("map multiplier {0} is below 2")]
    MultiplierTooSmall(u64),
    #[error("periodic sequence needs at least one value")]
    EmptyPeriod,
    #[error("spike value {spike} must exceed background {background}")]
    SpikeNotAboveBackground { background: u64, spike: u64 },
    #[error("spike positions need first >= 1 and ratio >= 2 (got first={first}, ratio={ratio})")]
    BadSpikeRule { first: u64, ratio: u64 },
    #[error("spikes overlap: first*(ratio-1) = {0} < 3")]
    OverlappingSpikes(u64),
    #[error("block base must be a finite real > 1, got {0}")]
    BadBlockBase(f64),
    #[error("block {0} overlaps the next block")]
    OverlappingBlocks(u64),
    #[error("operation needs a blocks sequence")]
    NotBlocks,
    #[error("n = {n} precedes the first block start d_1 = {first}")]
    BeforeFirstBlock { n: u64, first: u64 },
}

/// Rule producing `a_k` for every `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawSpec")]
pub enum SequenceSpec {
    Constant {
        b: u64,
    },
    Periodic {
        values: Vec<u64>,
    },
    /// The listed values, then `tail` re-indexed from 1.
    Explicit {
        values: Vec<u64>,
        tail: Box<SequenceSpec>,
    },
    /// `background` everywhere except `a_p = a_{p+1} = a_{p+2} = spike` at
    /// each `p = first·ratio^l`, `l = 0, 1, …`.
    Triples {
        background: u64,
        spike: u64,
        first: u64,
        ratio: u64,
    },
    /// 2 everywhere except 3 on `d_l <= k < d_l + l`, with `d_l = ⌈base^l⌉`,
    /// `l = 1, 2, …`.
    Blocks {
        base: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawSpec {
    Constant {
        b: u64,
    },
    Periodic {
        values: Vec<u64>,
    },
    Explicit {
        values: Vec<u64>,
        tail: Box<SequenceSpec>,
    },
    Triples {
        background: u64,
        spike: u64,
        first: u64,
        ratio: u64,
    },
    Blocks {
        base: f64,
    },
}

impl TryFrom<RawSpec> for SequenceSpec {
    type Error = SequenceError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        match raw {
            RawSpec::Constant { b } => Self::constant(b),
            RawSpec::Periodic { values } => Self::periodic(values),
            RawSpec::Explicit { values, tail } => Self::explicit(values, *tail),
            RawSpec::Triples {
                background,
                spike,
                first,
                ratio,
            } => Self::triples(background, spike, first, ratio),
            RawSpec::Blocks { base } => Self::blocks(base),
        }
    }
}

fn check_multiplier(b: u64) -> Result<(), SequenceError> {
    if b < 2 {
        Err(SequenceError::MultiplierTooSmall(b))
    } else {
        Ok(())
    }
}

impl SequenceSpec {
    pub fn constant(b: u64) -> Result<Self, SequenceError> {
        check_multiplier(b)?;
        Ok(Self::Constant { b })
    }

    pub fn periodic(values: Vec<u64>) -> Result<Self, SequenceError> {
        if values.is_empty() {
            return Err(SequenceError::EmptyPeriod);
        }
        values.iter().try_for_each(|&b| check_multiplier(b))?;
        Ok(Self::Periodic { values })
    }

    pub fn explicit(values: Vec<u64>, tail: SequenceSpec) -> Result<Self, SequenceError> {
        values.iter().try_for_each(|&b| check_multiplier(b))?;
        Ok(Self::Explicit {
            values,
            tail: Box::new(tail),
        })
    }

    pub fn triples(
        background: u64,
        spike: u64,
        first: u64,
        ratio: u64,
    ) -> Result<Self, SequenceError> {
        check_multiplier(background)?;
        if spike <= background {
            return Err(SequenceError::SpikeNotAboveBackground { background, spike });
        }
        if first < 1 || ratio < 2 {
            return Err(SequenceError::BadSpikeRule { first, ratio });
        }
        // gaps p_{l+1} - p_l = first·(ratio-1)·ratio^l are smallest at l = 0
        let gap = first.saturating_mul(ratio - 1);
        if gap < 3 {
            return Err(SequenceError::OverlappingSpikes(gap));
        }
        Ok(Self::Triples {
            background,
            spike,
            first,
            ratio,
        })
    }

    pub fn blocks(base: f64) -> Result<Self, SequenceError> {
        if !(base.is_finite() && base > 1.0) {
            return Err(SequenceError::BadBlockBase(base));
        }
        let spec = Self::Blocks { base };
        let mut l = 1u64;
        while block_start_f64(base, l + 1) <= BLOCK_CHECK_LIMIT {
            let (d, next) = (spec.block_start(l), spec.block_start(l + 1));
            if d + l > next {
                return Err(SequenceError::OverlappingBlocks(l));
            }
            l += 1;
        }
        Ok(spec)
    }

    /// `a_k` for `k >= 1`.
    pub fn generate(&self, k: u64) -> u64 {
        assert!(k >= 1, "sequence indices start at 1");
        match self {
            Self::Constant { b } => *b,
            Self::Periodic { values } => values[((k - 1) % values.len() as u64) as usize],
            Self::Explicit { values, tail } => {
                let len = values.len() as u64;
                if k <= len {
                    values[(k - 1) as usize]
                } else {
                    tail.generate(k - len)
                }
            }
            Self::Triples {
                background,
                spike,
                first,
                ratio,
            } => {
                let mut p = *first;
                while p <= k {
                    if k <= p + 2 {
                        return *spike;
                    }
                    match p.checked_mul(*ratio) {
                        Some(next) => p = next,
                        None => break,
                    }
                }
                *background
            }
            Self::Blocks { .. } => {
                let mut l = 1;
                loop {
                    let d = self.block_start(l);
                    if d > k {
                        return 2;
                    }
                    if k < d + l {
                        return 3;
                    }
                    l += 1;
                }
            }
        }
    }

    /// `a_1, …, a_n` as a vector (index 0 holds `a_1`).
    pub fn maps(&self, n: u64) -> Vec<u64> {
        (1..=n).map(|k| self.generate(k)).collect()
    }

    /// `d_l = ⌈base^l⌉` for a blocks sequence.
    ///
    /// Panics for other kinds.
    pub fn block_start(&self, l: u64) -> u64 {
        match self {
            Self::Blocks { base } => {
                let d = block_start_f64(*base, l);
                if d >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    d as u64
                }
            }
            _ => panic!("block_start on a non-blocks sequence"),
        }
    }

    /// `l_n = max{l : d_l <= n}`.
    pub fn block_index(&self, n: u64) -> Result<u64, SequenceError> {
        if !matches!(self, Self::Blocks { .. }) {
            return Err(SequenceError::NotBlocks);
        }
        let first = self.block_start(1);
        if n < first {
            return Err(SequenceError::BeforeFirstBlock { n, first });
        }
        let mut l = 1;
        while self.block_start(l + 1) <= n {
            l += 1;
        }
        Ok(l)
    }

    /// Spike start positions `p_l <= n` of a triples sequence; empty for
    /// other kinds.
    pub fn spike_positions(&self, n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if let Self::Triples { first, ratio, .. } = self {
            let mut p = *first;
            while p <= n {
                out.push(p);
                match p.checked_mul(*ratio) {
                    Some(next) => p = next,
                    None => break,
                }
            }
        }
        out
    }

    /// `Σ_{k=1}^n log₂ a_k`.
    pub fn log2_multiplier(&self, n: u64) -> f64 {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for k in 1..=n {
            *counts.entry(self.generate(k)).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(a, c)| c as f64 * (a as f64).log2())
            .sum()
    }
}

fn block_start_f64(base: f64, l: u64) -> f64 {
    base.powf(l as f64).ceil()
}
