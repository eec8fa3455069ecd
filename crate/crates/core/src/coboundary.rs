//! Solvability of the cohomological equation `f = T̂_b u − u`.
//!
//! In Fourier coordinates the equation reads `f̂(m) = û(m/b)·[b | m] − û(m)`,
//! which couples only frequencies on a chain `{r, rb, rb², …}` with `b ∤ r`.
//! Walking a chain upward gives `û(b^j r) = −Σ_{i<=j} f̂(b^i r)`; past the top
//! of `f`'s support every coefficient equals minus the chain total, so an L²
//! solution exists iff every chain total vanishes, and it is then itself a
//! trigonometric polynomial.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::trigpoly::{Frequency, TrigPoly};

/// Relative tolerance (against `Σ|f̂|`) for a chain total to count as zero.
pub const CHAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CoboundaryResult {
    Solution(TrigPoly),
    /// Chain rooted at `root` has nonzero total `residual`.
    Obstruction {
        root: Frequency,
        residual: Complex64,
    },
}

impl CoboundaryResult {
    pub fn is_solution(&self) -> bool {
        matches!(self, Self::Solution(_))
    }
}

#[derive(Serialize)]
struct Residual {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct Wire<'a> {
    status: &'static str,
    u: Option<&'a TrigPoly>,
    root: Option<u64>,
    residual: Option<Residual>,
}

impl Serialize for CoboundaryResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            Self::Solution(u) => Wire {
                status: "solution",
                u: Some(u),
                root: None,
                residual: None,
            },
            Self::Obstruction { root, residual } => Wire {
                status: "obstruction",
                u: None,
                root: Some(root.get()),
                residual: Some(Residual {
                    re: residual.re,
                    im: residual.im,
                }),
            },
        };
        wire.serialize(serializer)
    }
}

fn tolerance(f: &TrigPoly) -> f64 {
    CHAIN_TOLERANCE * f.abs_sum()
}

fn chain_root(mut n: u64, b: u64) -> u64 {
    while n.is_multiple_of(b) {
        n /= b;
    }
    n
}

/// Solves `f = T̂_b u − u` or reports the smallest chain root whose total is
/// nonzero.
pub fn solve(f: &TrigPoly, b: u64) -> CoboundaryResult {
    assert!(b >= 2, "map multiplier must be at least 2, got {b}");
    let tol = tolerance(f);

    let mut chains: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
    for (n, c) in f.terms() {
        chains.entry(chain_root(n, b)).or_default().push((n, c));
    }

    let mut solution = Vec::new();
    for (root, members) in chains {
        // members are in increasing frequency order, i.e. increasing power of b
        let top = members.last().expect("chains are nonempty").0;
        let mut cumulative = Complex64::new(0.0, 0.0);
        let mut m = root;
        let mut partials = Vec::new();
        loop {
            cumulative += f.coeff(m);
            if m == top {
                break;
            }
            partials.push((m, -cumulative));
            m *= b;
        }
        if cumulative.norm() > tol {
            return CoboundaryResult::Obstruction {
                root: Frequency::new(root).expect("roots are positive"),
                residual: cumulative,
            };
        }
        // û(top) = −total, which is zero within tolerance
        solution.extend(partials);
    }
    CoboundaryResult::Solution(TrigPoly::new(solution).expect("chain frequencies are distinct"))
}

/// Independent check of a [`solve`] result.
///
/// A solution must reproduce `f` coefficientwise. An obstruction must name a
/// root not divisible by `b` whose chain sum, recomputed by brute force, is
/// nonzero and equals the reported residual; any candidate `u` would then
/// carry coefficients of modulus `|residual|` at every `b^j·root` beyond
/// `degree(f)`, which is not square-summable.
pub fn verify(f: &TrigPoly, b: u64, result: &CoboundaryResult) -> bool {
    let tol = tolerance(f).max(CHAIN_TOLERANCE);
    match result {
        CoboundaryResult::Solution(u) => {
            let residual = u.koopman(b).sub(u).sub(f);
            let ok = residual.terms().all(|(_, c)| c.norm() <= tol);
            ok
        }
        CoboundaryResult::Obstruction { root, residual } => {
            let root = root.get();
            if root % b == 0 {
                return false;
            }
            let degree = f.degree();
            let mut sum = Complex64::new(0.0, 0.0);
            let mut i = 0u32;
            while let Some(m) = b.checked_pow(i).and_then(|p| p.checked_mul(root)) {
                if m > degree {
                    break;
                }
                sum += f.coeff(m);
                i += 1;
            }
            sum.norm() > tol && (sum - residual).norm() <= tol
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f1() -> TrigPoly {
        TrigPoly::cos(2).sub(&TrigPoly::cos(1))
    }

    #[test]
    fn solvable_for_two() {
        let r = solve(&f1(), 2);
        assert_eq!(r, CoboundaryResult::Solution(TrigPoly::cos(1)));
        assert!(verify(&f1(), 2, &r));
        assert_eq!(TrigPoly::cos(1).koopman(2).sub(&TrigPoly::cos(1)), f1());
    }

    #[test]
    fn obstructed_for_three() {
        let r = solve(&f1(), 3);
        assert_eq!(
            r,
            CoboundaryResult::Obstruction {
                root: Frequency::new(1).unwrap(),
                residual: Complex64::new(-0.5, 0.0),
            }
        );
        assert!(verify(&f1(), 3, &r));
    }

    #[test]
    fn zero_and_wrong_answers() {
        assert_eq!(solve(&TrigPoly::zero(), 5), CoboundaryResult::Solution(TrigPoly::zero()));
        assert!(!verify(&f1(), 2, &CoboundaryResult::Solution(TrigPoly::cos(2))));
        let bogus = CoboundaryResult::Obstruction {
            root: Frequency::new(1).unwrap(),
            residual: Complex64::new(0.25, 0.0),
        };
        assert!(!verify(&f1(), 3, &bogus));
        let divisible = CoboundaryResult::Obstruction {
            root: Frequency::new(3).unwrap(),
            residual: Complex64::new(-0.5, 0.0),
        };
        assert!(!verify(&f1(), 3, &divisible));
    }

    #[test]
    fn smallest_root_reported() {
        // chains 1 and 2 both violate for b = 3
        let f = TrigPoly::cos(2).add(&TrigPoly::cos(1));
        match solve(&f, 3) {
            CoboundaryResult::Obstruction { root, .. } => assert_eq!(root.get(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wire_format() {
        let s = serde_json::to_string(&solve(&f1(), 2)).unwrap();
        assert_eq!(
            s,
            r#"{"status":"solution","u":[{"freq":1,"re":0.5,"im":0.0}],"root":null,"residual":null}"#
        );
        let s = serde_json::to_string(&solve(&f1(), 3)).unwrap();
        assert_eq!(
            s,
            r#"{"status":"obstruction","u":null,"root":1,"residual":{"re":-0.5,"im":0.0}}"#
        );
    }

    fn arb_poly(max_degree: u64, dyadic: bool) -> impl Strategy<Value = TrigPoly> {
        proptest::collection::btree_map(1..=max_degree, (-1.0f64..1.0, -1.0f64..1.0), 0..12)
            .prop_map(move |m| {
                TrigPoly::new(m.into_iter().map(|(n, (re, im))| {
                    let c = if dyadic {
                        Complex64::new((re * 1024.0).round() / 1024.0, (im * 1024.0).round() / 1024.0)
                    } else {
                        Complex64::new(re, im)
                    };
                    (n, c)
                }))
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn solve_is_sound(f in arb_poly(64, false), b in 2u64..=7) {
            let r = solve(&f, b);
            prop_assert!(verify(&f, b, &r), "{:?}", r);
        }

        #[test]
        fn coboundaries_recover_u_exactly(u in arb_poly(32, true), b in 2u64..=7) {
            let f = u.koopman(b).sub(&u);
            prop_assert_eq!(solve(&f, b), CoboundaryResult::Solution(u));
        }

        #[test]
        fn coboundaries_recover_u(u in arb_poly(32, false), b in 2u64..=7) {
            let f = u.koopman(b).sub(&u);
            match solve(&f, b) {
                CoboundaryResult::Solution(v) => {
                    prop_assert!(v.sub(&u).terms().all(|(_, c)| c.norm() <= 1e-12));
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
