//! Odd 1-Lipschitz functions on the vertices of the cube `[-1, 1]^n`.
//!
//! Vertex `A ⊆ [n]` is the point with coordinate `+1` on `A` and `-1`
//! elsewhere, so the ℓ¹ distance between vertices `A` and `B` is
//! `2|A △ B|`. A table is odd when `f_{A^c} = -f_A` and 1-Lipschitz when
//! `|f_A - f_B| <= 2|A △ B|`.
//!
//! Values are kept as integer numerators over one common denominator. The
//! Lipschitz condition is checked on cube edges only: the ℓ¹ distance is a
//! path metric on the cube graph, so the edge inequalities sum along a
//! shortest path to every pair.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{tail_bound, BoundReport};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, BigCount, DyadicProb};
use crate::families::{bitstring_to_mask, mask_to_bitstring};

/// Largest dimension for tables.
pub const MAX_TABLE_N: u32 = 16;

/// Largest dimension for [`random_odd_lipschitz`].
pub const MAX_RANDOM_N: u32 = 12;

/// Raw values are drawn on a grid of this step.
const RAW_GRID: i64 = 8;

/// Result of [`LipschitzTable::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Validity {
    Valid,
    /// Smallest vertex `A` with `f_{A^c} != -f_A`.
    NotOdd(u32),
    /// First edge `(A, B)`, `A < B`, with `|f_A - f_B| > 2`.
    NotLipschitz(u32, u32),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Valid => write!(f, "valid"),
            Validity::NotOdd(a) => write!(f, "not odd at vertex {a:#b}"),
            Validity::NotLipschitz(a, b) => write!(f, "Lipschitz fails on edge {a:#b}-{b:#b}"),
        }
    }
}

/// Values `f_A` for every vertex mask `A` of the `n`-cube.
#[derive(Clone, Debug)]
pub struct LipschitzTable {
    n: u32,
    numerators: Vec<i64>,
    denominator: i64,
    validity: OnceLock<Validity>,
}

impl PartialEq for LipschitzTable {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.numerators == other.numerators
            && self.denominator == other.denominator
    }
}

impl Eq for LipschitzTable {}

fn check_dimension(n: u32, limit: u32) -> Result<()> {
    if n > limit {
        return Err(Error::resource(format!("table of dimension {n}"), u64::from(limit)));
    }
    Ok(())
}

impl LipschitzTable {
    /// `values[A] = numerators[A] / denominator`.
    pub fn from_scaled(n: u32, numerators: Vec<i64>, denominator: i64) -> Result<Self> {
        check_dimension(n, MAX_TABLE_N)?;
        if numerators.len() != 1usize << n {
            return Err(Error::domain(format!(
                "a table over {n} coordinates needs {} values, got {}",
                1usize << n,
                numerators.len()
            )));
        }
        if denominator <= 0 {
            return Err(Error::domain("table denominator must be positive"));
        }
        let g = numerators.iter().fold(denominator, |g, &v| g.gcd(&v));
        Ok(LipschitzTable {
            n,
            numerators: numerators.into_iter().map(|v| v / g).collect(),
            denominator: denominator / g,
            validity: OnceLock::new(),
        })
    }

    /// Values indexed by vertex mask.
    pub fn from_values(n: u32, values: &[BigRational]) -> Result<Self> {
        check_dimension(n, MAX_TABLE_N)?;
        if values.len() != 1usize << n {
            return Err(Error::domain(format!(
                "a table over {n} coordinates needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        let lcm = values.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        let overflow = || Error::resource("bits in scaled table values", 63);
        let denominator = lcm.to_i64().ok_or_else(overflow)?;
        let numerators = values
            .iter()
            .map(|v| (v.numer() * (&lcm / v.denom())).to_i64().ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        Self::from_scaled(n, numerators, denominator)
    }

    /// `f(y) = y_1 + ... + y_n`, i.e. `f_A = 2|A| - n`.
    pub fn coordinate_sum(n: u32) -> Result<Self> {
        check_dimension(n, MAX_TABLE_N)?;
        let values = (0..1u32 << n)
            .map(|a| 2 * i64::from(a.count_ones()) - i64::from(n))
            .collect();
        Self::from_scaled(n, values, 1)
    }

    /// `f(y) = Σ a_i y_i`, i.e. `f_A = Σ_{i∈A} a_i - Σ_{i∉A} a_i`.
    pub fn weighted_sum(weights: &[BigRational]) -> Result<Self> {
        let n = u32::try_from(weights.len()).unwrap_or(u32::MAX);
        check_dimension(n, MAX_TABLE_N)?;
        let total: BigRational = weights.iter().sum();
        let values: Vec<BigRational> = (0..1u32 << n)
            .map(|a| {
                let plus: BigRational = (0..n)
                    .filter(|i| a >> i & 1 == 1)
                    .map(|i| &weights[i as usize])
                    .sum();
                &plus + &plus - &total
            })
            .collect();
        Self::from_values(n, &values)
    }

    /// Vertex masks and values from text lines `bitstring value`, bit
    /// strings written most significant coordinate first. Blank lines and
    /// `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut n = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(bits), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(format!(
                    "line {}: expected \"bitmask value\", got {line:?}",
                    lineno + 1
                )));
            };
            let width = u32::try_from(bits.len()).unwrap_or(u32::MAX);
            if *n.get_or_insert(width) != width {
                return Err(Error::parse(format!("line {}: bitmask width changes", lineno + 1)));
            }
            check_dimension(width, MAX_TABLE_N)?;
            entries.push((bitstring_to_mask(bits, width)?, parse_rational(value)?));
        }
        let n = n.ok_or_else(|| Error::parse("empty table"))?;
        let mut values: Vec<Option<BigRational>> = vec![None; 1usize << n];
        for (mask, value) in entries {
            if values[mask as usize].replace(value).is_some() {
                return Err(Error::parse(format!(
                    "vertex {} listed twice",
                    mask_to_bitstring(mask, n)
                )));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(a, v)| {
                v.ok_or_else(|| {
                    Error::domain(format!("missing vertex {}", mask_to_bitstring(a as u32, n)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(n, &values)
    }

    /// One `bitstring value` line per vertex, in mask order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in 0..1u32 << self.n {
            out.push_str(&mask_to_bitstring(a, self.n));
            out.push(' ');
            out.push_str(&format_rational(&self.value(a)));
            out.push('\n');
        }
        out
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn value(&self, mask: u32) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerators[mask as usize]),
            BigInt::from(self.denominator),
        )
    }

    pub fn values(&self) -> Vec<BigRational> {
        (0..1u32 << self.n).map(|a| self.value(a)).collect()
    }

    /// Table of `c · f`.
    pub fn scaled_by(&self, c: &BigRational) -> Result<Self> {
        let values: Vec<BigRational> = self.values().iter().map(|v| v * c).collect();
        Self::from_values(self.n, &values)
    }

    fn full_mask(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    pub fn is_odd(&self) -> Option<u32> {
        let full = self.full_mask();
        (0..1u32 << self.n).find(|&a| self.numerators[(!a & full) as usize] != -self.numerators[a as usize])
    }

    /// First edge violating the Lipschitz inequality, scanning vertices in
    /// mask order and flipping bits upward.
    pub fn lipschitz_violation(&self) -> Option<(u32, u32)> {
        let limit = 2 * i128::from(self.denominator);
        for a in 0..1u32 << self.n {
            for i in 0..self.n {
                let b = a | 1 << i;
                if b == a {
                    continue;
                }
                let gap = i128::from(self.numerators[a as usize]) - i128::from(self.numerators[b as usize]);
                if gap.abs() > limit {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Oddness and the Lipschitz inequality on every pair; cached.
    pub fn validate(&self) -> Validity {
        *self.validity.get_or_init(|| {
            if let Some(a) = self.is_odd() {
                Validity::NotOdd(a)
            } else if let Some((a, b)) = self.lipschitz_violation() {
                Validity::NotLipschitz(a, b)
            } else {
                Validity::Valid
            }
        })
    }

    /// `|{A : f_A >= x}|`, valid or not.
    pub fn count_at_least(&self, x: &BigRational) -> BigCount {
        // f_A >= x  iff  num_A >= ceil(x * den)
        let threshold = (x * BigRational::from_integer(BigInt::from(self.denominator))).ceil();
        let count = match threshold.to_integer().to_i64() {
            Some(t) => self.numerators.iter().filter(|&&v| v >= t).count() as u64,
            None if threshold.is_negative() => 1u64 << self.n,
            None => 0,
        };
        BigCount::from(count)
    }

    fn require_valid(&self) -> Result<()> {
        match self.validate() {
            Validity::Valid => Ok(()),
            bad => Err(Error::domain(format!("invalid Lipschitz table: {bad}"))),
        }
    }
}

/// `P{f(ε_1, ..., ε_n) >= x}` for a valid table.
pub fn lipschitz_tail(t: &LipschitzTable, x: &BigRational) -> Result<DyadicProb> {
    t.require_valid()?;
    tail_unchecked(t, x)
}

fn tail_unchecked(t: &LipschitzTable, x: &BigRational) -> Result<DyadicProb> {
    if !x.is_positive() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    DyadicProb::from_count(&t.count_at_least(x), t.n)
}

/// Comparison of a Lipschitz tail with the walk tail bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzBoundReport {
    pub n: u32,
    pub x: BigRational,
    pub lhs: DyadicProb,
    pub rhs: BoundReport,
    /// `rhs - lhs`; negative on failure.
    pub slack: BigRational,
    pub passed: bool,
    pub tight: bool,
    /// Whether the table was odd; only odd tables are covered by the bound.
    pub odd: bool,
}

impl fmt::Display for LipschitzBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.tight {
            "="
        } else if self.passed {
            "<="
        } else {
            ">"
        };
        write!(f, "{} {} {}", self.lhs, rel, self.rhs)?;
        if self.tight {
            write!(f, " (tight)")?;
        }
        if !self.passed {
            write!(f, " VIOLATED")?;
        }
        Ok(())
    }
}

fn compare(t: &LipschitzTable, x: &BigRational, odd: bool) -> Result<LipschitzBoundReport> {
    let lhs = tail_unchecked(t, x)?;
    let rhs = tail_bound(t.n, x)?;
    let slack = rhs.bound.to_rational() - lhs.to_rational();
    Ok(LipschitzBoundReport {
        n: t.n,
        x: x.clone(),
        passed: !slack.is_negative(),
        tight: slack.is_zero(),
        lhs,
        rhs,
        slack,
        odd,
    })
}

/// Checks `P{f >= x} <= tail_bound(n, x)` for a valid table.
pub fn check_lipschitz_bound(t: &LipschitzTable, x: &BigRational) -> Result<LipschitzBoundReport> {
    t.require_valid()?;
    compare(t, x, true)
}

/// The same comparison for a table that is 1-Lipschitz but possibly not
/// odd. The bound is not claimed there; this only reports what happens.
pub fn diagnose_non_odd(t: &LipschitzTable, x: &BigRational) -> Result<LipschitzBoundReport> {
    if let Some((a, b)) = t.lipschitz_violation() {
        return Err(Error::domain(format!(
            "invalid Lipschitz table: {}",
            Validity::NotLipschitz(a, b)
        )));
    }
    compare(t, x, t.is_odd().is_none())
}

/// Largest 1-Lipschitz minorant of `raw` (units of `1/RAW_GRID`):
/// `h_A = min_B (g_B + 2|A △ B|)`, computed one coordinate at a time.
fn mcshane_minorant(n: u32, raw: &mut [i64]) {
    let step = 2 * RAW_GRID;
    for i in 0..n {
        let bit = 1usize << i;
        for a in 0..raw.len() {
            if a & bit != 0 {
                let (lo, hi) = (raw[a ^ bit], raw[a]);
                raw[a] = hi.min(lo + step);
                raw[a ^ bit] = lo.min(hi + step);
            }
        }
    }
}

fn raw_values(n: u32, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = RAW_GRID * i64::from(n);
    (0..1usize << n).map(|_| rng.gen_range(-r..=r)).collect()
}

/// A random 1-Lipschitz table, generally not odd.
pub fn random_lipschitz(n: u32, seed: u64) -> Result<LipschitzTable> {
    check_dimension(n, MAX_RANDOM_N)?;
    let mut h = raw_values(n, seed);
    mcshane_minorant(n, &mut h);
    LipschitzTable::from_scaled(n, h, RAW_GRID)
}

/// A random odd 1-Lipschitz table, deterministic in `seed`.
///
/// Raw values on `[-n, n]` with step `1/8` are replaced by their largest
/// 1-Lipschitz minorant `h`, then `f_A = (h_A - h_{A^c}) / 2`.
pub fn random_odd_lipschitz(n: u32, seed: u64) -> Result<LipschitzTable> {
    check_dimension(n, MAX_RANDOM_N)?;
    let mut h = raw_values(n, seed);
    mcshane_minorant(n, &mut h);
    let full = (1usize << n) - 1;
    let f = (0..=full).map(|a| h[a] - h[!a & full]).collect();
    LipschitzTable::from_scaled(n, f, 2 * RAW_GRID)
}
