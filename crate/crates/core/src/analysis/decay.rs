use serde::Serialize;

use super::{u_range, AnalysisError};
use crate::sequence::SequenceSpec;
use crate::trigpoly::{C1Norm, TrigPoly, C1_OVERSAMPLE};

/// Finer grids tried, in order, before a decay step is reported as failing.
const RECHECK_OVERSAMPLE: [u64; 2] = [4 * C1_OVERSAMPLE, 32 * C1_OVERSAMPLE];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayStep {
    pub j: usize,
    pub map: u64,
    pub norm: C1Norm,
    /// `2·2^{-j}·‖f‖` with the grid estimate of `‖f‖`.
    pub bound: f64,
    /// Certified norm over bound.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub f_norm: C1Norm,
    pub steps: Vec<DecayStep>,
    pub passed: bool,
    pub worst_ratio: f64,
}

/// C¹ norms of `T̂*_{b_1}⋯T̂*_{b_j} f` for every prefix `j` of `maps`, checked
/// against `2·2^{-j}‖f‖`.
pub fn verify_decay(f: &TrigPoly, maps: &[u64]) -> Result<DecayReport, AnalysisError> {
    if f.is_zero() {
        return Err(AnalysisError::ZeroFunction);
    }
    let f_norm = f.c1_norm();
    let mut steps = Vec::with_capacity(maps.len());
    let mut g = f.clone();
    for (i, &b) in maps.iter().enumerate() {
        let j = i + 1;
        // ×b transfers commute, so applying b_j to the previous prefix gives
        // T̂*_{b_1}⋯T̂*_{b_j} f.
        g = g.transfer(b);
        let bound = 2.0 * 0.5f64.powi(j as i32) * f_norm.estimate;
        let mut norm = g.c1_norm();
        for oversample in RECHECK_OVERSAMPLE {
            if norm.bound <= bound {
                break;
            }
            norm = g.c1_norm_with_oversample(oversample);
        }
        steps.push(DecayStep {
            j,
            map: b,
            norm,
            bound,
            ratio: norm.bound / bound,
        });
    }
    let worst_ratio = steps.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(DecayReport {
        f_norm,
        passed: steps.iter().all(|s| s.ratio <= 1.0),
        worst_ratio,
        steps,
    })
}

/// `Σ_{i>=0} (T̂*_b)^i f`, which is a finite sum for trigonometric polynomials.
pub fn neumann_sum(f: &TrigPoly, b: u64) -> TrigPoly {
    let mut terms = Vec::new();
    let mut g = f.clone();
    while !g.is_zero() {
        let next = g.transfer(b);
        terms.push(g);
        g = next;
    }
    TrigPoly::linear_combine(terms.iter().map(|t| (1.0, t)))
}

/// `max_{j ∈ {k, k+1}} ‖u_j − Σ_i (T̂*_b)^i f‖` where `a_{k-K} = … = a_{k+2} = b`.
pub fn block_shadowing_check(
    f: &TrigPoly,
    spec: &SequenceSpec,
    run: u64,
    k: u64,
) -> Result<f64, AnalysisError> {
    if k <= run {
        return Err(AnalysisError::IndexTooSmall { k, min: run + 1 });
    }
    let b = spec.generate(k);
    for index in k - run..=k + 2 {
        let found = spec.generate(index);
        if found != b {
            return Err(AnalysisError::RunBroken {
                index,
                expected: b,
                found,
            });
        }
    }
    let g = neumann_sum(f, b);
    Ok(u_range(f, spec, k, k + 1)
        .iter()
        .map(|u| u.sub(&g).c1_norm().bound)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn f1() -> TrigPoly {
        TrigPoly::cos(2).sub(&TrigPoly::cos(1))
    }

    #[test]
    fn decay_single_step() {
        let f = TrigPoly::cos(1).add(&TrigPoly::cos(3));
        let rep = verify_decay(&f, &[3]).unwrap();
        assert!(rep.passed);
        let exact = 1.0 + 2.0 * PI;
        let step = &rep.steps[0];
        assert!(step.norm.bound >= exact && step.norm.bound <= exact * 1.001);
        // dense-grid oracle for ‖f‖; the derivative peaks of the two cosines
        // do not coincide, so it is below 2 + 8π
        let points = 200_000;
        let (mut sup, mut dsup) = (0.0f64, 0.0f64);
        for i in 0..points {
            let x = i as f64 / points as f64;
            sup = sup.max(((2.0 * PI * x).cos() + (6.0 * PI * x).cos()).abs());
            dsup = dsup.max((2.0 * PI * (2.0 * PI * x).sin() + 6.0 * PI * (6.0 * PI * x).sin()).abs());
        }
        let oracle = sup + dsup;
        assert!(oracle < 2.0 + 8.0 * PI);
        assert!((rep.f_norm.estimate - oracle).abs() < 1e-3 * oracle);
        assert!(step.norm.bound <= step.bound);
    }

    #[test]
    fn decay_collapse() {
        let rep = verify_decay(&TrigPoly::cos(1), &[2]).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.steps[0].norm.bound, 0.0);

        let cosines: Vec<TrigPoly> = (1..=15).map(TrigPoly::cos).collect();
        let f = TrigPoly::linear_combine(
            cosines.iter().enumerate().map(|(i, g)| (1.0 / (i + 1) as f64, g)),
        );
        assert_eq!(f.degree(), 15);
        let rep = verify_decay(&f, &[2, 2, 2, 2]).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.steps[3].norm.bound, 0.0);
        assert!(rep.steps[2].norm.bound > 0.0);
        assert_eq!(verify_decay(&TrigPoly::zero(), &[2]), Err(AnalysisError::ZeroFunction));
    }

    #[test]
    fn neumann_examples() {
        assert_eq!(neumann_sum(&f1(), 2), TrigPoly::cos(2));
        assert_eq!(neumann_sum(&f1(), 3), f1());
        assert!(neumann_sum(&TrigPoly::zero(), 5).is_zero());
    }

    #[test]
    fn shadowing_examples() {
        let three = SequenceSpec::constant(3).unwrap();
        assert_eq!(block_shadowing_check(&f1(), &three, 10, 12), Ok(0.0));

        let blocks = SequenceSpec::blocks(4.0).unwrap();
        let d20 = blocks.block_start(20);
        let k = d20 + 17;
        let v = block_shadowing_check(&f1(), &blocks, 15, k).unwrap();
        assert!(v <= 1e-3, "{v}");

        assert_eq!(
            block_shadowing_check(&f1(), &blocks, 3, 5),
            Err(AnalysisError::RunBroken { index: 4, expected: 2, found: 3 })
        );
        assert_eq!(
            block_shadowing_check(&f1(), &three, 10, 10),
            Err(AnalysisError::IndexTooSmall { k: 10, min: 11 })
        );
    }

    #[test]
    fn shadowing_decays_with_run_length() {
        // a mixed-degree observable whose u_j genuinely depends on history
        let f = TrigPoly::linear_combine([
            (1.0, &TrigPoly::cos(1)),
            (0.5, &TrigPoly::sin(6)),
            (0.25, &TrigPoly::cos(27)),
            (0.125, &TrigPoly::sin(54)),
        ]);
        let mut values = vec![2u64; 40];
        values.extend(std::iter::repeat_n(3, 30));
        let spec = SequenceSpec::explicit(values, SequenceSpec::constant(2).unwrap()).unwrap();
        let norm = f.c1_norm().estimate;
        for run in [1u64, 2, 3, 4, 6, 10] {
            let k = 40 + run + 1;
            let v = block_shadowing_check(&f, &spec, run, k).unwrap();
            assert!(v <= 8.0 * norm * 0.5f64.powi(run as i32), "run {run}: {v}");
        }
    }
}
