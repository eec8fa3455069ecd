//! Exact operator quantities along a map sequence: the `u_k` recursion,
//! transversality angles, and `Var(S_n)` computed two independent ways.
//!
//! `S_n(x) = Σ_{k=1}^n f(T_{a_k}∘…∘T_{a_1} x)`. Its martingale terms are
//! `Z_k = T̂_{[k]} u_k`, and since the Koopman composition is an L² isometry
//! every `Z_k` statistic is a `u_k` statistic, so `Z_k` is never built.

mod decay;
mod threshold;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use decay::{block_shadowing_check, neumann_sum, verify_decay, DecayReport, DecayStep};
pub use threshold::{example1_threshold, separation_bound_check, SeparationCheck, ThresholdCert};

use crate::sequence::SequenceSpec;
use crate::sum::CompensatedSum;
use crate::trigpoly::TrigPoly;

/// Relative tolerance for the two variance routes to agree.
pub const VARIANCE_AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("profile has {len} records but {needed} are required")]
    ProfileTooShort { needed: usize, len: usize },
    #[error("the observable is identically zero")]
    ZeroFunction,
    #[error("index {k} must be at least {min}")]
    IndexTooSmall { k: u64, min: u64 },
    #[error("a_{index} = {found} breaks the constant run of {expected}")]
    RunBroken {
        index: u64,
        expected: u64,
        found: u64,
    },
    #[error("min(a_k, a_(k+1)) = {found} does not exceed L = {threshold}")]
    MapsTooSmall { found: u64, threshold: u64 },
    #[error("no separating arcs found")]
    NoSeparation,
}

/// Transversality data at step `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleRecord {
    pub k: u64,
    pub u_norm_sq: f64,
    pub proj_norm_sq: f64,
    pub cos_sq: f64,
    pub sin_sq: f64,
}

impl AngleRecord {
    fn new(k: u64, u: &TrigPoly, next_map: u64) -> Self {
        let u_norm_sq = u.norm_sq();
        let proj_norm_sq = u.project_measurable(next_map).norm_sq();
        // u_k = 0 leaves the angle undefined; count it as fully measurable.
        let cos_sq = if u_norm_sq > 0.0 {
            proj_norm_sq / u_norm_sq
        } else {
            1.0
        };
        Self {
            k,
            u_norm_sq,
            proj_norm_sq,
            cos_sq,
            sin_sq: 1.0 - cos_sq,
        }
    }

    /// `‖u_k‖² − ‖P u_k‖²`, the variance produced at this step.
    pub fn martingale_increment(&self) -> f64 {
        self.u_norm_sq - self.proj_norm_sq
    }
}

/// One CSV row of a [`VarianceReport`]; the prefix columns are the values at
/// horizon `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub k: u64,
    pub u_norm_sq: f64,
    pub cos_sq: f64,
    pub sin_sq: f64,
    pub min_pair_sin_sq: f64,
    pub acc_transversality: f64,
    pub var_cov_prefix: f64,
    pub var_mart_prefix: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub n: u64,
    pub var_cov: f64,
    pub var_mart: f64,
    pub acc_transversality: f64,
    pub per_step: Vec<AngleRecord>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceSummary {
    pub n: u64,
    pub var_cov: f64,
    pub var_mart: f64,
    pub acc_transversality: f64,
}

pub const CSV_COLUMNS: [&str; 8] = [
    "k",
    "u_norm_sq",
    "cos_sq",
    "sin_sq",
    "min_pair_sin_sq",
    "acc_transversality",
    "var_cov_prefix",
    "var_mart_prefix",
];

impl VarianceReport {
    pub fn summary(&self) -> VarianceSummary {
        VarianceSummary {
            n: self.n,
            var_cov: self.var_cov,
            var_mart: self.var_mart,
            acc_transversality: self.acc_transversality,
        }
    }

    /// Whether the covariance and martingale routes agree.
    pub fn consistent(&self) -> bool {
        variances_agree(self.var_cov, self.var_mart)
    }

    pub fn to_csv(&self) -> String {
        use crate::report::format_real as r;
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.k,
                r(row.u_norm_sq),
                r(row.cos_sq),
                r(row.sin_sq),
                r(row.min_pair_sin_sq),
                r(row.acc_transversality),
                r(row.var_cov_prefix),
                r(row.var_mart_prefix),
            ));
        }
        out
    }
}

pub fn variances_agree(var_cov: f64, var_mart: f64) -> bool {
    (var_cov - var_mart).abs() <= VARIANCE_AGREEMENT * var_cov.abs().max(1.0)
}

/// Runs `u_k = f + T̂*_{a_k} u_{k-1}` from `u_{start-1} = 0` through `end`.
fn run_recursion_with<M>(f: &TrigPoly, map_at: M, start: u64, end: u64) -> Vec<TrigPoly>
where
    M: Fn(u64) -> u64,
{
    let mut out = Vec::with_capacity((end + 1 - start) as usize);
    let mut u = TrigPoly::zero();
    for k in start..=end {
        u = f.add(&u.transfer(map_at(k)));
        out.push(u.clone());
    }
    out
}

/// As [`run_recursion_with`], with `maps[i]` holding `a_{i+1}`.
fn run_recursion(f: &TrigPoly, maps: &[u64], start: u64, end: u64) -> Vec<TrigPoly> {
    run_recursion_with(f, |k| maps[(k - 1) as usize], start, end)
}

/// `u_1, …, u_n` (index 0 holds `u_1`).
pub fn u_sequence(f: &TrigPoly, spec: &SequenceSpec, n: u64) -> Vec<TrigPoly> {
    assert!(n >= 1);
    run_recursion(f, &spec.maps(n), 1, n)
}

/// `u_j` for `from <= j <= to` without walking the sequence from 1.
///
/// Terms `T̂*_{[i+1..k]} f` vanish once `a_{i+1}⋯a_k > degree(f)`, so the
/// recursion may start at the first index `s` with `a_s⋯a_from > degree(f)`.
pub fn u_range(f: &TrigPoly, spec: &SequenceSpec, from: u64, to: u64) -> Vec<TrigPoly> {
    assert!(1 <= from && from <= to);
    let degree = f.degree();
    let mut start = from + 1;
    let mut product: u64 = 1;
    while start > 1 {
        start -= 1;
        product = product.saturating_mul(spec.generate(start));
        if product > degree {
            break;
        }
    }
    let mut us = run_recursion_with(f, |k| spec.generate(k), start, to);
    us.drain(..(from - start) as usize);
    us
}

fn profile_from(us: &[TrigPoly], maps: &[u64]) -> Vec<AngleRecord> {
    us.iter()
        .enumerate()
        .map(|(i, u)| AngleRecord::new(i as u64 + 1, u, maps[i + 1]))
        .collect()
}

/// Angle records `1..=n`; record `k` projects `u_k` with `a_{k+1}`.
pub fn angle_profile(f: &TrigPoly, spec: &SequenceSpec, n: u64) -> Vec<AngleRecord> {
    assert!(n >= 1);
    let maps = spec.maps(n + 1);
    let us = run_recursion(f, &maps, 1, n);
    profile_from(&us, &maps)
}

/// `Σ_{k=1}^N min(sin²χ_k, sin²χ_{k+1})`.
pub fn accumulated_transversality(
    profile: &[AngleRecord],
    big_n: usize,
) -> Result<f64, AnalysisError> {
    if big_n == 0 {
        return Ok(0.0);
    }
    if profile.len() < big_n + 1 {
        return Err(AnalysisError::ProfileTooShort {
            needed: big_n + 1,
            len: profile.len(),
        });
    }
    Ok(profile
        .windows(2)
        .take(big_n)
        .map(|w| w[0].sin_sq.min(w[1].sin_sq))
        .collect::<CompensatedSum>()
        .value())
}

/// `Var(S_k)` for `k = 1..=n` from pair covariances
/// `cov(j,k) = ⟨T̂*_{a_k}⋯T̂*_{a_{j+1}} f, f⟩`.
fn covariance_prefixes(f: &TrigPoly, maps: &[u64], n: u64) -> Vec<f64> {
    // pairs (k, cov(j,k)) for each j, stopping once the iterated transfer dies
    let per_j: Vec<Vec<(u64, f64)>> = (1..=n)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            let mut g = f.clone();
            for k in j + 1..=n {
                g = g.transfer(maps[(k - 1) as usize]);
                if g.is_zero() {
                    break;
                }
                out.push((k, g.l2_inner(f)));
            }
            out
        })
        .collect();

    let mut cross = vec![CompensatedSum::new(); n as usize + 1];
    for pairs in &per_j {
        for &(k, c) in pairs {
            cross[k as usize].add(c);
        }
    }
    let f_sq = f.norm_sq();
    let mut var = CompensatedSum::new();
    (1..=n as usize)
        .map(|k| {
            var.add(f_sq);
            var.add(2.0 * cross[k].value());
            var.value()
        })
        .collect()
}

/// Exact `Var(S_n) = n‖f‖² + 2Σ_{j<k} cov(j,k)`.
pub fn variance_covariance(f: &TrigPoly, spec: &SequenceSpec, n: u64) -> f64 {
    assert!(n >= 1);
    *covariance_prefixes(f, &spec.maps(n), n)
        .last()
        .expect("n >= 1")
}

/// `Var(S_n) = Σ_{k<n} (‖u_k‖² − ‖P_{a_{k+1}} u_k‖²) + ‖u_n‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleVariance {
    pub value: f64,
    /// `‖u_k‖² − ‖P_{a_{k+1}} u_k‖²` for `k = 1..n-1`.
    pub increments: Vec<f64>,
    /// `‖u_n‖²`.
    pub last: f64,
}

pub fn variance_martingale(f: &TrigPoly, spec: &SequenceSpec, n: u64) -> MartingaleVariance {
    assert!(n >= 1);
    let maps = spec.maps(n);
    let us = run_recursion(f, &maps, 1, n);
    let increments: Vec<f64> = us[..us.len() - 1]
        .iter()
        .enumerate()
        .map(|(i, u)| u.norm_sq() - u.project_measurable(maps[i + 1]).norm_sq())
        .collect();
    let last = us.last().expect("n >= 1").norm_sq();
    let mut acc: CompensatedSum = increments.iter().copied().collect();
    acc.add(last);
    MartingaleVariance {
        value: acc.value(),
        increments,
        last,
    }
}

/// Full per-step report up to horizon `n`, both variance routes included.
pub fn variance_report(f: &TrigPoly, spec: &SequenceSpec, n: u64) -> VarianceReport {
    assert!(n >= 1);
    // one extra record so row n has its min over {n, n+1}
    let maps = spec.maps(n + 2);
    let us = run_recursion(f, &maps, 1, n + 1);
    let profile = profile_from(&us, &maps);
    let var_cov = covariance_prefixes(f, &maps, n);

    let mut rows = Vec::with_capacity(n as usize);
    let mut acc = CompensatedSum::new();
    let mut mart = CompensatedSum::new();
    for i in 0..n as usize {
        let rec = profile[i];
        let min_pair_sin_sq = rec.sin_sq.min(profile[i + 1].sin_sq);
        rows.push(ReportRow {
            k: rec.k,
            u_norm_sq: rec.u_norm_sq,
            cos_sq: rec.cos_sq,
            sin_sq: rec.sin_sq,
            min_pair_sin_sq,
            acc_transversality: acc.value(),
            var_cov_prefix: var_cov[i],
            var_mart_prefix: mart.value() + rec.u_norm_sq,
        });
        acc.add(min_pair_sin_sq);
        mart.add(rec.martingale_increment());
    }
    let last = *rows.last().expect("n >= 1");
    let mut per_step = profile;
    per_step.truncate(n as usize);
    VarianceReport {
        n,
        var_cov: last.var_cov_prefix,
        var_mart: last.var_mart_prefix,
        acc_transversality: last.acc_transversality,
        per_step,
        rows,
    }
}
