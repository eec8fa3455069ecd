//! Real trigonometric polynomials on the circle and the Fourier-domain action
//! of the ×a Koopman and transfer operators.
//!
//! A [`TrigPoly`] stores only positive frequencies; the represented function is
//! `g(x) = Σ_n 2·Re(c_n e^{2πinx})`. The negative half of the spectrum is the
//! complex conjugate, so every stored value is a real, mean-zero function.
//!
//! Under `T_a(x) = ax mod 1` these operators act on coefficients exactly:
//!
//! * Koopman `g ↦ g∘T_a` moves `c_n` to frequency `a·n`.
//! * Transfer (the L² adjoint) reads the coefficient at `a·n` into slot `n`
//!   and drops every frequency not divisible by `a`.
//! * Their product `koopman(a, transfer(a, ·))` is the orthogonal projection
//!   onto `T_a^{-1}`-measurable functions, i.e. frequencies divisible by `a`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Grid points per unit of degree used by [`TrigPoly::c1_norm`].
pub const C1_OVERSAMPLE: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrigPolyError {
    #[error("frequency 0 is not allowed: stored functions have zero mean")]
    ZeroFrequency,
    #[error("frequency {0} appears more than once")]
    DuplicateFrequency(u64),
    #[error("coefficient at frequency {0} is not finite")]
    NonFinite(u64),
}

/// A strictly positive Fourier index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Frequency(u64);

impl Frequency {
    pub fn new(n: u64) -> Result<Self, TrigPolyError> {
        if n == 0 {
            Err(TrigPolyError::ZeroFrequency)
        } else {
            Ok(Self(n))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sup-norm plus sup-norm of the derivative.
///
/// `estimate` is the maximum over the sampling grid and never exceeds the
/// true norm. `bound` adds the second-order interpolation error and is an
/// upper bound on the true norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C1Norm {
    pub estimate: f64,
    pub bound: f64,
    pub sup: f64,
    pub sup_derivative: f64,
    pub grid: u64,
}

impl C1Norm {
    fn zero() -> Self {
        Self {
            estimate: 0.0,
            bound: 0.0,
            sup: 0.0,
            sup_derivative: 0.0,
            grid: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPoly {
    coeffs: BTreeMap<u64, Complex64>,
}

impl TrigPoly {
    /// Builds a polynomial from `(frequency, coefficient)` pairs. Exact zero
    /// coefficients are dropped; frequency 0 and duplicates are rejected.
    pub fn new<I>(entries: I) -> Result<Self, TrigPolyError>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (n, c) in entries {
            if n == 0 {
                return Err(TrigPolyError::ZeroFrequency);
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(TrigPolyError::NonFinite(n));
            }
            if coeffs.insert(n, c).is_some() {
                return Err(TrigPolyError::DuplicateFrequency(n));
            }
        }
        Ok(Self::from_map(coeffs))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `cos(2πnx)`.
    pub fn cos(n: u64) -> Self {
        assert!(n >= 1, "cos(2π·0·x) is not mean-zero");
        Self::from_map([(n, Complex64::new(0.5, 0.0))].into())
    }

    /// `sin(2πnx)`.
    pub fn sin(n: u64) -> Self {
        assert!(n >= 1, "sin(2π·0·x) is identically zero");
        Self::from_map([(n, Complex64::new(0.0, -0.5))].into())
    }

    fn from_map(mut coeffs: BTreeMap<u64, Complex64>) -> Self {
        coeffs.retain(|_, c| !is_exact_zero(*c));
        coeffs.values_mut().for_each(|c| *c = positive_zeros(*c));
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest stored frequency, 0 for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: u64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    /// Stored terms in increasing frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// `Σ |c_n|` over stored frequencies.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms()
            .map(|(n, c)| {
                let theta = 2.0 * PI * (n as f64 * x).fract();
                let (s, co) = theta.sin_cos();
                2.0 * (c.re * co - c.im * s)
            })
            .sum()
    }

    pub fn evaluate_derivative(&self, x: f64) -> f64 {
        self.terms()
            .map(|(n, c)| {
                let theta = 2.0 * PI * (n as f64 * x).fract();
                let (s, co) = theta.sin_cos();
                // d/dx 2Re(c e^{iθ}) = 2Re(2πin·c e^{iθ})
                -4.0 * PI * n as f64 * (c.re * s + c.im * co)
            })
            .sum()
    }

    /// `g ↦ g∘T_a`.
    pub fn koopman(&self, a: u64) -> Self {
        assert!(a >= 2, "map multiplier must be at least 2, got {a}");
        let coeffs = self
            .terms()
            .map(|(n, c)| {
                let m = n.checked_mul(a).expect("frequency overflow in koopman");
                (m, c)
            })
            .collect();
        Self { coeffs }
    }

    /// Transfer (Perron-Frobenius) operator of `T_a`.
    pub fn transfer(&self, a: u64) -> Self {
        assert!(a >= 2, "map multiplier must be at least 2, got {a}");
        let coeffs = self
            .terms()
            .filter(|(n, _)| n % a == 0)
            .map(|(n, c)| (n / a, c))
            .collect();
        Self { coeffs }
    }

    /// Conditional expectation onto `T_a^{-1}`-measurable functions.
    pub fn project_measurable(&self, a: u64) -> Self {
        assert!(a >= 2, "map multiplier must be at least 2, got {a}");
        let coeffs = self.terms().filter(|(n, _)| n % a == 0).collect();
        Self { coeffs }
    }

    /// `∫ g·h dx`.
    pub fn l2_inner(&self, other: &TrigPoly) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .terms()
            .filter_map(|(n, c)| large.coeffs.get(&n).map(|d| 2.0 * (c * d.conj()).re))
            .sum()
    }

    /// `‖g‖₂²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| 2.0 * c.norm_sqr()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_map(self.terms().map(|(n, c)| (n, c * s)).collect())
    }

    /// Coefficientwise `Σ s_i·g_i`, re-canonicalized.
    pub fn linear_combine<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a TrigPoly)>,
    {
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (s, g) in terms {
            for (n, c) in g.terms() {
                *acc.entry(n).or_default() += c * s;
            }
        }
        Self::from_map(acc)
    }

    pub fn add(&self, other: &TrigPoly) -> Self {
        Self::linear_combine([(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &TrigPoly) -> Self {
        Self::linear_combine([(1.0, self), (-1.0, other)])
    }

    /// Certified `sup|g| + sup|g′|` on the default grid.
    pub fn c1_norm(&self) -> C1Norm {
        self.c1_norm_with_oversample(C1_OVERSAMPLE)
    }

    /// Grid maximum over `G = oversample·max(degree, 1)` equispaced points.
    ///
    /// Extrema of `|g|` and `|g′|` on the circle sit at critical points, so the
    /// distance to the nearest grid node (at most `1/(2G)`) costs at most
    /// `h²/2 · sup|g″|` (resp. `sup|g‴|`).
    pub fn c1_norm_with_oversample(&self, oversample: u64) -> C1Norm {
        if self.is_zero() {
            return C1Norm::zero();
        }
        assert!(oversample >= 1);
        let grid = oversample * self.degree().max(1);
        let mut sup = 0.0f64;
        let mut sup_derivative = 0.0f64;
        for i in 0..grid {
            let mut value = 0.0;
            let mut slope = 0.0;
            for (n, c) in self.terms() {
                // exact argument reduction: n·i mod G
                let r = ((n as u128 * i as u128) % grid as u128) as f64;
                let theta = 2.0 * PI * r / grid as f64;
                let (s, co) = theta.sin_cos();
                value += 2.0 * (c.re * co - c.im * s);
                slope -= 4.0 * PI * n as f64 * (c.re * s + c.im * co);
            }
            sup = sup.max(value.abs());
            sup_derivative = sup_derivative.max(slope.abs());
        }

        let mut m = [0.0f64; 4];
        for (n, c) in self.terms() {
            let w = 2.0 * PI * n as f64;
            let amp = 2.0 * c.norm();
            m[0] += amp;
            m[1] += amp * w;
            m[2] += amp * w * w;
            m[3] += amp * w * w * w;
        }
        let h = 0.5 / grid as f64;
        let interp = 0.5 * h * h;
        let rounding = 64.0 * f64::EPSILON * (m[0] + m[1]);
        let estimate = sup + sup_derivative;
        C1Norm {
            estimate,
            bound: estimate + interp * (m[2] + m[3]) + rounding,
            sup,
            sup_derivative,
            grid,
        }
    }

    /// True when every stored coefficient is nonzero and finite, and no
    /// frequency 0 is present.
    pub fn is_canonical(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(&n, &c)| n >= 1 && !is_exact_zero(c) && c.re.is_finite() && c.im.is_finite())
    }
}

/// Maps `-0.0` parts to `+0.0` so serialized output is sign-stable.
fn positive_zeros(c: Complex64) -> Complex64 {
    Complex64::new(c.re + 0.0, c.im + 0.0)
}

fn is_exact_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

#[derive(Serialize, Deserialize)]
struct Term {
    freq: u64,
    re: f64,
    im: f64,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<Term> = self
            .terms()
            .map(|(freq, c)| Term {
                freq,
                re: c.re,
                im: c.im,
            })
            .collect();
        terms.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(deserializer)?;
        TrigPoly::new(
            terms
                .into_iter()
                .map(|t| (t.freq, Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn f1() -> TrigPoly {
        TrigPoly::cos(2).sub(&TrigPoly::cos(1))
    }

    #[test]
    fn construction() {
        assert_eq!(TrigPoly::new([(1, c(0.5))]).unwrap(), TrigPoly::cos(1));
        assert!(TrigPoly::new([]).unwrap().is_zero());
        assert_eq!(
            TrigPoly::new([(0, c(1.0))]),
            Err(TrigPolyError::ZeroFrequency)
        );
        assert_eq!(
            TrigPoly::new([(3, c(1.0)), (3, c(2.0))]),
            Err(TrigPolyError::DuplicateFrequency(3))
        );
        let g = TrigPoly::new([(1, c(0.0)), (2, c(1.0))]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.degree(), 2);
        assert_eq!(TrigPoly::zero().degree(), 0);
    }

    #[test]
    fn evaluation() {
        let g = TrigPoly::cos(1);
        assert!(g.evaluate(0.25).abs() < 1e-15);
        assert!((g.evaluate(0.5) + 1.0).abs() < 1e-15);
        assert!(f1().evaluate(0.0).abs() < 1e-15);
        let s = TrigPoly::sin(3);
        let x = 0.1234;
        assert!((s.evaluate(x) - (6.0 * PI * x).sin()).abs() < 1e-14);
        assert!((s.evaluate_derivative(x) - 6.0 * PI * (6.0 * PI * x).cos()).abs() < 1e-12);
    }

    #[test]
    fn koopman_moves_frequencies() {
        assert_eq!(TrigPoly::cos(1).koopman(2), TrigPoly::cos(2));
        let g = TrigPoly::cos(1).add(&TrigPoly::cos(2));
        assert_eq!(g.koopman(3), TrigPoly::cos(3).add(&TrigPoly::cos(6)));
        assert!(TrigPoly::zero().koopman(5).is_zero());
    }

    #[test]
    fn transfer_decimates() {
        assert!(TrigPoly::cos(1).transfer(2).is_zero());
        assert_eq!(
            TrigPoly::cos(1).add(&TrigPoly::cos(3)).transfer(3),
            TrigPoly::cos(1)
        );
        assert_eq!(f1().transfer(2), TrigPoly::cos(1));
        assert_eq!(TrigPoly::cos(15).transfer(2).degree(), 0);
        assert_eq!(TrigPoly::cos(14).transfer(3).degree(), 0);
        assert_eq!(TrigPoly::cos(15).transfer(3).degree(), 5);
    }

    #[test]
    fn projection() {
        let g = TrigPoly::cos(1).add(&TrigPoly::cos(2));
        assert_eq!(g.project_measurable(2), TrigPoly::cos(2));
        assert!(TrigPoly::cos(2).project_measurable(3).is_zero());
        assert_eq!(TrigPoly::cos(2).project_measurable(2), TrigPoly::cos(2));
    }

    #[test]
    fn inner_products() {
        assert_eq!(TrigPoly::cos(1).l2_inner(&TrigPoly::cos(1)), 0.5);
        assert_eq!(TrigPoly::cos(1).l2_inner(&TrigPoly::cos(2)), 0.0);
        assert_eq!(f1().l2_inner(&f1()), 1.0);
        assert_eq!(TrigPoly::sin(1).l2_inner(&TrigPoly::cos(1)), 0.0);
        assert_eq!(TrigPoly::sin(4).norm_sq(), 0.5);
    }

    #[test]
    fn linear_combination() {
        let g = TrigPoly::cos(1);
        assert!(TrigPoly::linear_combine([(1.0, &g), (-1.0, &g)]).is_zero());
        let h = TrigPoly::cos(2);
        assert_eq!(TrigPoly::linear_combine([(1.0, &h), (-1.0, &g)]), f1());
        assert!(TrigPoly::zero().scale(2.0).is_zero());
    }

    #[test]
    fn c1_norm_of_cosine() {
        let exact = 1.0 + 2.0 * PI;
        let norm = TrigPoly::cos(1).c1_norm();
        assert!(norm.bound >= exact, "{norm:?}");
        assert!(norm.bound <= exact * (1.0 + 1e-3), "{norm:?}");
        assert!(norm.estimate <= norm.bound);
        assert_eq!(TrigPoly::zero().c1_norm().bound, 0.0);
    }

    #[test]
    fn c1_norm_matches_dense_grid() {
        // dense-grid oracle at 10⁶ points
        let g = f1();
        let points = 1_000_000;
        let (mut sup, mut dsup) = (0.0f64, 0.0f64);
        for i in 0..points {
            let x = i as f64 / points as f64;
            let v = (4.0 * PI * x).cos() - (2.0 * PI * x).cos();
            let d = -4.0 * PI * (4.0 * PI * x).sin() + 2.0 * PI * (2.0 * PI * x).sin();
            sup = sup.max(v.abs());
            dsup = dsup.max(d.abs());
        }
        let oracle = sup + dsup;
        let norm = g.c1_norm();
        assert!(norm.bound >= oracle - 1e-9);
        assert!((norm.bound - oracle).abs() <= 2e-3 * oracle, "{norm:?} vs {oracle}");
    }

    #[test]
    fn serde_shape() {
        let g = TrigPoly::new([(2, Complex64::new(0.5, -0.25)), (1, c(1.0))]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(
            text,
            r#"[{"freq":1,"re":1.0,"im":0.0},{"freq":2,"re":0.5,"im":-0.25}]"#
        );
        let back: TrigPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<TrigPoly>(r#"[{"freq":0,"re":1,"im":0}]"#).is_err());
        assert!(serde_json::from_str::<TrigPoly>(
            r#"[{"freq":1,"re":1,"im":0},{"freq":1,"re":2,"im":0}]"#
        )
        .is_err());
    }
}
