//! Closed-form right-hand sides of the concentration inequalities.
//!
//! Throughout, `S_n = a_1 ε_1 + ... + a_n ε_n` with `|a_i| <= 1`, `x > 0` and
//! `k = ⌈x⌉`. The sharp bounds are all probabilities of the simple walk
//! evaluated at a length that depends on the parity of `n + k`:
//!
//! | bound | `n + k` even | `n + k` odd |
//! |---|---|---|
//! | [`tail_bound`] on `P{S_n >= x}` | `P{W_n >= x}` | `P{W_{n-1} >= x}` |
//! | [`point_bound_bn`] (nonzero weights) | `P{W_n = k}` | `P{W_{n-1} = k}` |
//! | [`point_bound_lem1`] (nonzero weights) | `P{W_n = k}` | `P{W_n = k+1}` |
//! | [`point_bound_thm2`] on `P{S_n = x}` | `P{W_m = k}`, `m = min(n, k²)` | `m = min(n-1, k²)` |
//!
//! The set-family bounds ([`katona_bound`], [`milner_bound`],
//! [`kleitman_bound`]) are the same quantities multiplied by `2^n`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{binom, binomial_row, ceil_i64, BigCount, DyadicProb};
use crate::walk::{walk_interval, walk_point, walk_tail};

/// Parity of `⌈x⌉ + n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityCase {
    Even,
    Odd,
}

impl ParityCase {
    pub fn of(sum: i64) -> Self {
        if sum.rem_euclid(2) == 0 {
            ParityCase::Even
        } else {
            ParityCase::Odd
        }
    }
}

impl fmt::Display for ParityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityCase::Even => "even",
            ParityCase::Odd => "odd",
        })
    }
}

/// The inequality a bound comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    /// Tail bound for symmetric bounded sums.
    Thm1,
    /// Point bound with walk length `min(n, k²)`.
    Thm2,
    /// Point bound `B_n(x)` for nonzero weights.
    LemmaApelsinas,
    /// Sharper point bound for strictly positive weights.
    LemmaLem1,
    LittlewoodOfford,
    Katona,
    Milner,
    Kleitman,
}

/// The parity indicator `I(x, n)`: true iff `⌈x⌉ + n` is even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityIndicator {
    pub x: BigRational,
    pub n: u32,
    pub value: bool,
}

impl ParityIndicator {
    pub fn new(x: &BigRational, n: u32) -> Result<Self> {
        let k = positive_ceil(x)?;
        Ok(ParityIndicator {
            x: x.clone(),
            n,
            value: ParityCase::of(k + i64::from(n)) == ParityCase::Even,
        })
    }
}

/// A bound together with the case of its formula that fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub bound: DyadicProb,
    /// Length of the simple walk whose probability is the bound.
    pub effective_walk_length: u32,
    pub parity_case: ParityCase,
    pub theorem_tag: TheoremTag,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}) [{} case, W_{}]",
            self.bound,
            self.bound.to_decimal_auto(12),
            self.parity_case,
            self.effective_walk_length
        )
    }
}

fn positive_ceil(x: &BigRational) -> Result<i64> {
    if !x.is_positive() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    ceil_i64(x)
}

fn require_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(())
}

fn require_k_le_n(n: u32, k: u32) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= k <= n, got n={n} k={k}")));
    }
    Ok(())
}

/// Sharp bound on `P{S_n >= x}`: `P{W_n >= x}` if `⌈x⌉ + n` is even, else
/// `P{W_{n-1} >= x}`.
pub fn tail_bound(n: u32, x: &BigRational) -> Result<BoundReport> {
    require_n(n)?;
    let k = positive_ceil(x)?;
    let parity_case = ParityCase::of(k + i64::from(n));
    let m = match parity_case {
        ParityCase::Even => n,
        ParityCase::Odd => n - 1,
    };
    Ok(BoundReport {
        bound: walk_tail(m, x),
        effective_walk_length: m,
        parity_case,
        theorem_tag: TheoremTag::Thm1,
    })
}

/// `B_n(x)`: `P{W_n = k}` if `n + k` is even, else `P{W_{n-1} = k}`.
///
/// For `n = 0` the odd case would need `W_{-1}`; the value is 0 there, which
/// is also `P{S_0 = x}` for every `x > 0`.
pub fn point_bound_bn(n: u32, x: &BigRational) -> Result<DyadicProb> {
    let k = positive_ceil(x)?;
    Ok(match ParityCase::of(k + i64::from(n)) {
        ParityCase::Even => walk_point(n, k),
        ParityCase::Odd if n == 0 => DyadicProb::zero(),
        ParityCase::Odd => walk_point(n - 1, k),
    })
}

/// Sharp bound on `P{S_n = x}`: `P{W_m = k}` with `m = min(n, k²)` when
/// `n + k` is even and `m = min(n - 1, k²)` when odd.
pub fn point_bound_thm2(n: u32, x: &BigRational) -> Result<BoundReport> {
    require_n(n)?;
    let k = positive_ceil(x)?;
    let parity_case = ParityCase::of(k + i64::from(n));
    let base = match parity_case {
        ParityCase::Even => n,
        ParityCase::Odd => n - 1,
    };
    let k_sq = k.checked_mul(k).unwrap_or(i64::MAX);
    let m = k_sq.min(i64::from(base)) as u32;
    Ok(BoundReport {
        bound: walk_point(m, k),
        effective_walk_length: m,
        parity_case,
        theorem_tag: TheoremTag::Thm2,
    })
}

/// Point bound for strictly positive weights: `P{W_n = k}` if `n + k` is
/// even, else `P{W_n = k + 1}`.
pub fn point_bound_lem1(n: u32, x: &BigRational) -> Result<DyadicProb> {
    require_n(n)?;
    let k = positive_ceil(x)?;
    Ok(match ParityCase::of(k + i64::from(n)) {
        ParityCase::Even => walk_point(n, k),
        ParityCase::Odd => walk_point(n, k + 1),
    })
}

/// Littlewood–Offord bound `P{W_n ∈ (-k, k]}` for weights with `|a_i| >= 1`.
pub fn lo_bound(n: u32, k: u32) -> Result<DyadicProb> {
    require_n(n)?;
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    Ok(walk_interval(n, k))
}

/// Largest size of a `k`-intersecting family of subsets of `[n]`.
pub fn katona_bound(n: u32, k: u32) -> Result<BigCount> {
    require_k_le_n(n, k)?;
    let n64 = u64::from(n);
    let row = binomial_row(n64);
    let sum_from = |t: u32| -> BigCount { row[t as usize..].iter().sum() };
    if (n + k).is_multiple_of(2) {
        Ok(sum_from((n + k) / 2))
    } else {
        let t = (n + k).div_ceil(2);
        Ok(sum_from(t) + binom(n64 - 1, i64::from(t) - 1))
    }
}

/// Largest size of a `k`-intersecting antichain in `[n]`: `C(n, ⌈(n+k)/2⌉)`.
pub fn milner_bound(n: u32, k: u32) -> Result<BigCount> {
    require_k_le_n(n, k)?;
    Ok(binom(u64::from(n), i64::from((n + k).div_ceil(2))))
}

/// Largest size of a family in `[n]` with diameter at most `n - k`.
///
/// Numerically identical to [`katona_bound`]; kept separate because it
/// bounds a different (larger) class of families.
pub fn kleitman_bound(n: u32, k: u32) -> Result<BigCount> {
    katona_bound(n, k)
}

/// Hoeffding's bound `exp(-x²/(2n))`, in floating point.
pub fn hoeffding_bound(n: u32, x: f64) -> f64 {
    (-x * x / (2.0 * f64::from(n))).exp()
}

/// Kwapień's right-hand side at Rademacher summands: `min(1, 2 P{W_n >= x})`.
pub fn kwapien_rhs(n: u32, x: &BigRational) -> Result<DyadicProb> {
    require_n(n)?;
    if !x.is_positive() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    Ok(walk_tail(n, x).double_saturating())
}

/// A set-family bound expressed both as a count and as a probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyBound {
    pub count: BigCount,
    pub prob: DyadicProb,
    pub theorem_tag: TheoremTag,
}

/// Evaluates one of the three family bounds by tag.
pub fn family_bound(tag: TheoremTag, n: u32, k: u32) -> Result<FamilyBound> {
    let count = match tag {
        TheoremTag::Katona => katona_bound(n, k)?,
        TheoremTag::Milner => milner_bound(n, k)?,
        TheoremTag::Kleitman => kleitman_bound(n, k)?,
        other => return Err(Error::domain(format!("{other:?} is not a family bound"))),
    };
    let prob = DyadicProb::from_count(&count, n)?;
    Ok(FamilyBound {
        count,
        prob,
        theorem_tag: tag,
    })
}

/// `x` as an `f64`, for the floating-point comparisons.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    fn p(num: u64, e: u32) -> DyadicProb {
        DyadicProb::new(num, e).unwrap()
    }

    /// Enumeration oracle for `P{W_n >= k}` and `P{W_n = k}` as counts.
    fn brute_walk(n: u32, pred: impl Fn(i64) -> bool) -> DyadicProb {
        let hits = (0u64..1 << n)
            .filter(|m| pred(2 * i64::from(m.count_ones()) - i64::from(n)))
            .count() as u64;
        p(hits, n)
    }

    #[test]
    fn tail_bound_examples() {
        let r = tail_bound(4, &ratio(6, 5)).unwrap();
        assert_eq!(r.bound, brute_walk(4, |s| s >= 2));
        assert_eq!(r.bound, p(5, 4));
        assert_eq!(r.effective_walk_length, 4);
        assert_eq!(r.parity_case, ParityCase::Even);

        let r = tail_bound(3, &ratio(2, 1)).unwrap();
        assert_eq!(r.bound, brute_walk(2, |s| s >= 2));
        assert_eq!(r.bound, p(1, 2));
        assert_eq!(r.effective_walk_length, 2);
        assert_eq!(r.to_string(), "1/4 (0.25) [odd case, W_2]");

        assert_eq!(tail_bound(7, &ratio(1, 2)).unwrap().bound, p(1, 1));
    }

    #[test]
    fn tail_bound_small_x_both_parities() {
        // x in (0, 1]: k = 1. Odd n gives P{W_n >= 1} = 1/2; even n falls to
        // the odd walk W_{n-1}, again 1/2.
        for n in 1..=12u32 {
            for x in [ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
                let r = tail_bound(n, &x).unwrap();
                assert_eq!(r.bound, p(1, 1), "n={n} x={x}");
                let expected_case = if n % 2 == 1 { ParityCase::Even } else { ParityCase::Odd };
                assert_eq!(r.parity_case, expected_case);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(tail_bound(3, &ratio(0, 1)).is_err());
        assert!(tail_bound(3, &ratio(-1, 2)).is_err());
        assert!(tail_bound(0, &ratio(1, 2)).is_err());
        assert!(point_bound_bn(3, &ratio(0, 1)).is_err());
        assert!(point_bound_thm2(3, &ratio(-2, 1)).is_err());
        assert!(point_bound_lem1(3, &ratio(0, 1)).is_err());
        assert!(katona_bound(3, 4).is_err());
        assert!(milner_bound(3, 0).is_err());
        assert!(kleitman_bound(2, 3).is_err());
        assert!(kwapien_rhs(2, &ratio(0, 1)).is_err());
        assert!(lo_bound(3, 0).is_err());
    }

    #[test]
    fn point_bound_examples() {
        assert_eq!(point_bound_bn(4, &ratio(2, 1)).unwrap(), p(4, 4));
        assert_eq!(point_bound_bn(5, &ratio(2, 1)).unwrap(), p(4, 4));
        assert_eq!(point_bound_bn(3, &ratio(1, 2)).unwrap(), p(3, 3));

        let r = point_bound_thm2(4, &ratio(3, 2)).unwrap();
        assert_eq!((r.bound.clone(), r.effective_walk_length), (p(4, 4), 4));
        let r = point_bound_thm2(9, &ratio(2, 1)).unwrap();
        assert_eq!((r.bound.clone(), r.effective_walk_length), (p(4, 4), 4));
        assert_eq!(r.parity_case, ParityCase::Odd);
        let r = point_bound_thm2(1, &ratio(1, 1)).unwrap();
        assert_eq!((r.bound.clone(), r.effective_walk_length), (p(1, 1), 1));

        assert_eq!(point_bound_lem1(4, &ratio(3, 2)).unwrap(), p(4, 4));
        // four plus signs out of five: C(5,4) = 5 patterns
        assert_eq!(point_bound_lem1(5, &ratio(3, 2)).unwrap(), brute_walk(5, |s| s == 3));
        assert_eq!(point_bound_lem1(5, &ratio(3, 2)).unwrap(), p(5, 5));
        assert_eq!(point_bound_lem1(3, &ratio(1, 2)).unwrap(), p(3, 3));
    }

    #[test]
    fn family_bound_examples() {
        let c = |v: u64| BigCount::from(v);
        assert_eq!(katona_bound(3, 1).unwrap(), c(4));
        assert_eq!(katona_bound(4, 1).unwrap(), c(8));
        assert_eq!(katona_bound(4, 2).unwrap(), c(5));
        assert_eq!(milner_bound(4, 2).unwrap(), c(4));
        assert_eq!(milner_bound(4, 1).unwrap(), c(4));
        assert_eq!(milner_bound(3, 3).unwrap(), c(1));
        for (n, k) in [(3, 1), (4, 2), (4, 1)] {
            assert_eq!(kleitman_bound(n, k).unwrap(), katona_bound(n, k).unwrap());
        }
        assert_eq!(lo_bound(3, 1).unwrap(), p(3, 3));
        assert_eq!(lo_bound(4, 2).unwrap(), p(10, 4));
        assert_eq!(lo_bound(1, 1).unwrap(), p(1, 1));
    }

    #[test]
    fn comparison_examples() {
        assert!((hoeffding_bound(2, 2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((hoeffding_bound(8, 4.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((hoeffding_bound(5, 1e-9) - 1.0).abs() < 1e-15);
        assert_eq!(kwapien_rhs(2, &ratio(2, 1)).unwrap(), p(1, 1));
        assert_eq!(kwapien_rhs(4, &ratio(2, 1)).unwrap(), p(10, 4));
        assert_eq!(kwapien_rhs(3, &ratio(1, 2)).unwrap(), DyadicProb::one());
    }

    #[test]
    fn parity_indicator() {
        assert!(ParityIndicator::new(&ratio(6, 5), 4).unwrap().value);
        assert!(!ParityIndicator::new(&ratio(2, 1), 3).unwrap().value);
        assert!(ParityIndicator::new(&ratio(0, 1), 3).is_err());
    }

    fn x_grid(n: u32, denom: i64) -> impl Iterator<Item = BigRational> {
        (1..=i64::from(n) * denom).map(move |i| ratio(i, denom))
    }

    #[test]
    fn bn_properties() {
        for n in 1..=16u32 {
            // non-increasing in x
            let values: Vec<_> = x_grid(n, 4).map(|x| point_bound_bn(n, &x).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[0] >= w[1]), "n={n}");
            for k in 1..=i64::from(n) {
                // constant on (k-1, k]
                let at_k = point_bound_bn(n, &ratio(k, 1)).unwrap();
                for x in [ratio(4 * k - 3, 4), ratio(2 * k - 1, 2), ratio(100 * k - 1, 100)] {
                    assert_eq!(point_bound_bn(n, &x).unwrap(), at_k, "n={n} x={x}");
                }
                // B_n(k) = (B_{n-1}(k-1) + B_{n-1}(k+1)) / 2 for k >= 2
                if k >= 2 {
                    let lhs = point_bound_bn(n, &ratio(k, 1)).unwrap();
                    let rhs = point_bound_bn(n - 1, &ratio(k - 1, 1))
                        .unwrap()
                        .halve()
                        .checked_add(&point_bound_bn(n - 1, &ratio(k + 1, 1)).unwrap().halve())
                        .unwrap();
                    assert_eq!(lhs, rhs, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn family_bounds_match_walk_identities() {
        for n in 1..=30u32 {
            for k in 1..=n {
                let scale = |d: DyadicProb| d.numerator_at(n);
                let kat = katona_bound(n, k).unwrap();
                let walk_len = if (n + k) % 2 == 0 { n } else { n - 1 };
                let tail = walk_tail(walk_len, &ratio(i64::from(k), 1));
                assert_eq!(kat.value(), &scale(tail), "katona n={n} k={k}");

                let mil = milner_bound(n, k).unwrap();
                let layer_k = if (n + k) % 2 == 0 { k } else { k + 1 };
                let point = walk_point(n, i64::from(layer_k));
                assert_eq!(mil.value(), &scale(point), "milner n={n} k={k}");
            }
        }
    }

    #[test]
    fn comparison_claims() {
        let slack = 2f64.powi(-60);
        for n in 1..=30u32 {
            for x in x_grid(n, 2) {
                let tb = tail_bound(n, &x).unwrap().bound;
                let h = hoeffding_bound(n, rational_to_f64(&x));
                assert!(tb.to_f64() <= h + slack, "hoeffding n={n} x={x}");
                assert!(tb <= kwapien_rhs(n, &x).unwrap(), "kwapien n={n} x={x}");
            }
        }
    }

    #[test]
    fn lem1_improves_bn() {
        for n in 1..=20u32 {
            for x in x_grid(n, 4) {
                assert!(
                    point_bound_lem1(n, &x).unwrap() <= point_bound_bn(n, &x).unwrap(),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn thm2_is_max_of_bn_over_lengths() {
        // the bound equals max_{k <= j <= n} B_j(k)
        for n in 1..=24u32 {
            for k in 1..=i64::from(n) {
                let x = ratio(k, 1);
                let best = (k as u32..=n)
                    .map(|j| point_bound_bn(j, &x).unwrap())
                    .max()
                    .unwrap();
                assert_eq!(point_bound_thm2(n, &x).unwrap().bound, best, "n={n} k={k}");
            }
        }
    }
}
