//! Exact Fourier-domain laboratory for Birkhoff sums of sequential expanding
//! circle maps `T_a(x) = ax mod 1`.
//!
//! * [`trigpoly`]: trigonometric polynomials with exact Koopman, transfer and
//!   conditional-expectation operators.
//! * [`sequence`]: random-access map sequences, including spike triples and
//!   sparse blocks of 3's in a background of 2's.
//! * [`analysis`]: the `u_k` recursion, transversality angles, `Var(S_n)` by
//!   covariances and by martingale increments, and decay/threshold checks.
//! * [`coboundary`]: solvability of `f = T̂_b u − u`.
//! * [`montecarlo`]: exact dyadic orbit sampling and KS distance to N(0,1).

pub mod analysis;
pub mod coboundary;
pub mod montecarlo;
pub mod report;
pub mod sequence;
pub mod sum;
pub mod trigpoly;

pub use analysis::{AngleRecord, VarianceReport};
pub use coboundary::CoboundaryResult;
pub use montecarlo::{DyadicPoint, MCReport, SampleConfig, Standardization};
pub use sequence::SequenceSpec;
pub use trigpoly::{C1Norm, Frequency, TrigPoly};
