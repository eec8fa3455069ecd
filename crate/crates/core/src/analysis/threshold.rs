use std::collections::VecDeque;

use serde::Serialize;

use super::{u_range, AnalysisError};
use crate::sequence::SequenceSpec;
use crate::trigpoly::TrigPoly;

/// Base grid for the arc search; refined for high-degree observables.
const ARC_GRID: u64 = 1 << 12;
/// Arc lengths tried are `2^-1, …, 2^-ARC_DEPTH`.
const ARC_DEPTH: u32 = 10;

/// Separated arcs `[x, x+ε]` and `[y, y+ε]` with
/// `min_{[x,x+ε]} f > δ + max_{[y,y+ε]} f`, and the resulting map threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCert {
    pub x: f64,
    pub y: f64,
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "L")]
    pub threshold: u64,
    /// Certified `‖f‖` used for `threshold`.
    pub f_norm: f64,
}

impl ThresholdCert {
    /// `δ²ε/64`.
    pub fn separation_floor(&self) -> f64 {
        self.delta * self.delta * self.eps / 64.0
    }
}

/// Sliding min and max of `values` over the circular windows
/// `values[i..=i+width]`.
fn circular_window_extrema(values: &[f64], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let at = |i: usize| values[i % n];
    let mut mins = vec![0.0; n];
    let mut maxs = vec![0.0; n];
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut hi: VecDeque<usize> = VecDeque::new();
    for end in 0..n + width {
        while lo.back().is_some_and(|&i| at(i) >= at(end)) {
            lo.pop_back();
        }
        lo.push_back(end);
        while hi.back().is_some_and(|&i| at(i) <= at(end)) {
            hi.pop_back();
        }
        hi.push_back(end);
        if end >= width {
            let start = end - width;
            while lo.front().is_some_and(|&i| i < start) {
                lo.pop_front();
            }
            while hi.front().is_some_and(|&i| i < start) {
                hi.pop_front();
            }
            mins[start] = at(lo[0]);
            maxs[start] = at(hi[0]);
        }
    }
    (mins, maxs)
}

/// Searches arc pairs on a dyadic grid and returns the certificate with the
/// smallest threshold `L = 1 + ⌊max(16‖f‖/δ, 2/ε)⌋`.
///
/// Every point of a grid-aligned arc lies within half a grid step of a grid
/// node inside the arc, so the grid extrema are corrected by
/// `h/2 · Σ 4πn|c_n|` on each side.
pub fn example1_threshold(f: &TrigPoly) -> Result<ThresholdCert, AnalysisError> {
    if f.is_zero() {
        return Err(AnalysisError::ZeroFunction);
    }
    let grid = ARC_GRID.max((64 * f.degree()).next_power_of_two());
    let h = 1.0 / grid as f64;
    let values: Vec<f64> = (0..grid).map(|i| f.evaluate(i as f64 * h)).collect();
    let lipschitz: f64 = f
        .terms()
        .map(|(n, c)| 4.0 * std::f64::consts::PI * n as f64 * c.norm())
        .sum();
    let f_norm = f.c1_norm().bound;

    let mut best: Option<ThresholdCert> = None;
    for depth in 1..=ARC_DEPTH {
        let eps = 0.5f64.powi(depth as i32);
        let width = (grid >> depth) as usize;
        let (mins, maxs) = circular_window_extrema(&values, width);
        let (xi, low) = mins
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let (yi, high) = maxs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        // shave a relative 2^-20 so the inequality is strict
        let delta = (low - high - h * lipschitz) * (1.0 - 1.0 / (1u64 << 20) as f64);
        if delta <= 0.0 {
            continue;
        }
        let threshold = 1 + (16.0 * f_norm / delta).max(2.0 / eps).floor() as u64;
        if best.is_none_or(|b| threshold < b.threshold) {
            best = Some(ThresholdCert {
                x: xi as f64 * h,
                y: yi as f64 * h,
                eps,
                delta,
                threshold,
                f_norm,
            });
        }
    }
    best.ok_or(AnalysisError::NoSeparation)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCheck {
    pub k: u64,
    /// `‖u_k‖₂²(1 − cos²χ_k)`.
    pub value: f64,
    /// `δ²ε/64`.
    pub floor: f64,
    pub holds: bool,
}

/// Checks `‖u_k‖₂²(1 − cos²χ_k) >= δ²ε/64`, which must hold whenever
/// `min(a_k, a_{k+1}) > L`.
pub fn separation_bound_check(
    f: &TrigPoly,
    spec: &SequenceSpec,
    cert: &ThresholdCert,
    k: u64,
) -> Result<SeparationCheck, AnalysisError> {
    assert!(k >= 1);
    let next = spec.generate(k + 1);
    let found = spec.generate(k).min(next);
    if found <= cert.threshold {
        return Err(AnalysisError::MapsTooSmall {
            found,
            threshold: cert.threshold,
        });
    }
    let u = &u_range(f, spec, k, k)[0];
    let value = u.norm_sq() - u.project_measurable(next).norm_sq();
    let floor = cert.separation_floor();
    Ok(SeparationCheck {
        k,
        value,
        floor,
        holds: value >= floor,
    })
}
