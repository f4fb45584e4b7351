//! Exact distribution of the weighted Rademacher sum
//! `S_n = a_1 ε_1 + ... + a_n ε_n`.
//!
//! Weights are exact rationals. Every engine first multiplies them by the
//! least common multiple of their denominators, so the distribution is
//! computed over integers and mapped back to rationals only on output.
//!
//! Three engines produce identical results:
//!
//! * [`Engine::Enumerate`] walks all `2^n` sign patterns in Gray-code order.
//! * [`Engine::Convolve`] convolves one `±a_i` step at a time; the number of
//!   distinct partial sums is capped by a budget.
//! * [`Engine::MeetInMiddle`] builds the law of each half of the weights and
//!   combines them.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, BigCount, DyadicProb};

/// Largest `n` for the enumeration and meet-in-the-middle engines.
pub const MAX_ENUMERATE_N: usize = 40;
/// Default cap on distinct support points for the convolution engine.
pub const DEFAULT_SUPPORT_BUDGET: usize = 1 << 22;
/// Cap on `|support(left half)| * |support(right half)|` when the
/// meet-in-the-middle engine materializes a full distribution.
pub const MITM_PAIR_BUDGET: u64 = 1 << 26;
/// Counts are kept in `u128`, so at most this many weights.
pub const MAX_N: usize = 126;

const MAX_SCALED_MAGNITUDE: u128 = 1 << 100;

/// Weights `a_1, ..., a_n` of a weighted Rademacher sum.
///
/// Stored as absolute values sorted ascending: flipping the sign of a weight
/// does not change the law of `S_n` because each `ε_i` is symmetric.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector {
    weights: Vec<BigRational>,
}

impl WeightVector {
    /// Weights with `|a_i| <= 1`.
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        let one = BigRational::one();
        if let Some(bad) = weights.iter().find(|a| a.abs() > one) {
            return Err(Error::domain(format!("weight {bad} has |a| > 1")));
        }
        Ok(Self::new_unbounded(weights))
    }

    /// Weights of any magnitude, as used by the Littlewood–Offord setting
    /// (`|a_i| >= 1`) and by rescaled sums.
    pub fn new_unbounded(weights: Vec<BigRational>) -> Self {
        let mut weights: Vec<BigRational> = weights.into_iter().map(|a| a.abs()).collect();
        weights.sort();
        WeightVector { weights }
    }

    /// `n` copies of `value`.
    pub fn uniform(n: usize, value: BigRational) -> Self {
        Self::new_unbounded(vec![value; n])
    }

    pub fn ones(n: usize) -> Self {
        Self::uniform(n, BigRational::one())
    }

    /// Parses a comma- or whitespace-separated list such as `1,1,0.5`.
    pub fn parse_list(s: &str) -> Result<Vec<BigRational>> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_rational)
            .collect()
    }

    /// Parses one rational per line; blank lines and `#` comments skipped.
    pub fn parse_text(text: &str) -> Result<Vec<BigRational>> {
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(parse_rational)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// All `|a_i| <= 1`.
    pub fn is_bounded(&self) -> bool {
        self.weights.last().is_none_or(|a| a <= &BigRational::one())
    }

    pub fn all_nonzero(&self) -> bool {
        self.weights.first().is_none_or(|a| !a.is_zero())
    }

    /// All `|a_i| >= 1`, the Littlewood–Offord hypothesis.
    pub fn all_at_least_one(&self) -> bool {
        self.weights.first().is_none_or(|a| a >= &BigRational::one())
    }

    /// Multiplies every weight by `c`.
    pub fn scaled_by(&self, c: &BigRational) -> WeightVector {
        Self::new_unbounded(self.weights.iter().map(|a| a * c).collect())
    }

    /// Canonical text form, e.g. `1/2,1,1`.
    pub fn digest(&self) -> String {
        self.weights
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Weights multiplied by the common denominator, as machine integers.
    pub fn to_scaled(&self) -> Result<ScaledWeights> {
        let mut lcm = BigInt::one();
        for a in &self.weights {
            lcm = lcm.lcm(a.denom());
        }
        let scale = lcm
            .to_i128()
            .ok_or_else(|| Error::resource("common denominator of the weights", u64::MAX))?;
        let mut ints = Vec::with_capacity(self.weights.len());
        let mut total: u128 = 0;
        for a in &self.weights {
            let v = (a.numer() * (&lcm / a.denom()))
                .to_i128()
                .filter(|v| v.unsigned_abs() <= MAX_SCALED_MAGNITUDE)
                .ok_or_else(|| Error::resource("bits in a scaled weight", 100))?;
            total += v.unsigned_abs();
            if total > MAX_SCALED_MAGNITUDE {
                return Err(Error::resource("bits in the scaled weight total", 100));
            }
            ints.push(v);
        }
        Ok(ScaledWeights { ints, scale })
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.digest())
    }
}

/// Integer weights `a_i * scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledWeights {
    pub ints: Vec<i128>,
    pub scale: i128,
}

/// Distribution engine selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Enumerate,
    Convolve,
    MeetInMiddle,
    /// Convolution within budget, else meet-in-the-middle for `n <= 40`.
    Auto,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Engine::Enumerate),
            "convolve" => Ok(Engine::Convolve),
            "meet_in_middle" | "meet-in-middle" | "mitm" => Ok(Engine::MeetInMiddle),
            "auto" => Ok(Engine::Auto),
            other => Err(Error::parse(format!("unknown engine {other:?}"))),
        }
    }
}

/// Exact law of `S_n`: each support value with its number of sign patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkDistribution {
    n: u32,
    scale: i128,
    /// `(value * scale, count)`, strictly increasing in value.
    support: Vec<(i128, u128)>,
}

impl WalkDistribution {
    /// `n`; the counts sum to `2^n`.
    pub fn denominator_exponent(&self) -> u32 {
        self.n
    }

    /// Common denominator of the support values.
    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Support as `(value * scale, count)` pairs.
    pub fn scaled_support(&self) -> &[(i128, u128)] {
        &self.support
    }

    pub fn value_at(&self, index: usize) -> BigRational {
        BigRational::new(BigInt::from(self.support[index].0), BigInt::from(self.scale))
    }

    pub fn support(&self) -> Vec<(BigRational, BigCount)> {
        (0..self.support.len())
            .map(|i| (self.value_at(i), BigCount::from(self.support[i].1)))
            .collect()
    }

    pub fn total_count(&self) -> BigCount {
        BigCount::from(self.support.iter().map(|&(_, c)| c).sum::<u128>())
    }

    /// Checks the structural invariants: counts sum to `2^n`, values strictly
    /// increase, counts are positive, and the law is symmetric about zero.
    pub fn check_invariants(&self) -> Result<()> {
        if self.total_count() != BigCount::pow2(self.n) {
            return Err(Error::domain("counts do not sum to 2^n"));
        }
        if self.support.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain("support values not strictly increasing"));
        }
        if self.support.iter().any(|&(_, c)| c == 0) {
            return Err(Error::domain("zero count in support"));
        }
        let mirrored = self.support.iter().rev().map(|&(v, c)| (-v, c));
        if !self.support.iter().copied().eq(mirrored) {
            return Err(Error::domain("distribution is not symmetric"));
        }
        Ok(())
    }

    /// Number of sign patterns with `S_n >= x`.
    pub fn tail_count(&self, x: &BigRational) -> u128 {
        let t = scaled_ceil(x, self.scale);
        let start = self.support.partition_point(|&(v, _)| v < t);
        self.support[start..].iter().map(|&(_, c)| c).sum()
    }

    /// Number of sign patterns with `S_n = x`.
    pub fn point_count(&self, x: &BigRational) -> u128 {
        match scaled_exact(x, self.scale) {
            Some(t) => self
                .support
                .binary_search_by(|&(v, _)| v.cmp(&t))
                .map(|i| self.support[i].1)
                .unwrap_or(0),
            None => 0,
        }
    }

    pub fn tail_prob(&self, x: &BigRational) -> DyadicProb {
        self.prob(self.tail_count(x))
    }

    pub fn point_prob(&self, x: &BigRational) -> DyadicProb {
        self.prob(self.point_count(x))
    }

    fn prob(&self, count: u128) -> DyadicProb {
        DyadicProb::from_count(&BigCount::from(count), self.n).expect("count <= 2^n")
    }

    /// Maximum mass of a half-open window `(x - k, x + k]`.
    ///
    /// Some maximizing window has its closed right end on an atom, so it is
    /// enough to slide the right end over the sorted support. Returns the
    /// smallest maximizing `x` together with the window's pattern count.
    pub fn best_window(&self, k: u32) -> (BigRational, u128) {
        let width = 2 * i128::from(k) * self.scale;
        let mut left = 0usize;
        let mut mass: u128 = 0;
        let mut best: Option<(i128, u128)> = None;
        for (right, &(v, c)) in self.support.iter().enumerate() {
            mass += c;
            while self.support[left].0 <= v - width {
                mass -= self.support[left].1;
                left += 1;
            }
            if best.is_none_or(|(_, m)| mass > m) {
                best = Some((v, mass));
            }
            debug_assert!(left <= right);
        }
        let (right_end, mass) = best.expect("support is never empty");
        let x_star = BigRational::new(
            BigInt::from(right_end - i128::from(k) * self.scale),
            BigInt::from(self.scale),
        );
        (x_star, mass)
    }
}

/// `⌈x * scale⌉`, saturated to the `i128` range.
fn scaled_ceil(x: &BigRational, scale: i128) -> i128 {
    let v = (x * BigInt::from(scale)).ceil().to_integer();
    v.to_i128().unwrap_or(if v.is_negative() { i128::MIN } else { i128::MAX })
}

/// `x * scale` if it is an integer in range.
fn scaled_exact(x: &BigRational, scale: i128) -> Option<i128> {
    let v = x * BigInt::from(scale);
    if v.is_integer() {
        v.to_integer().to_i128()
    } else {
        None
    }
}

fn check_n(n: usize, limit: usize, engine: &str) -> Result<()> {
    if n > limit {
        return Err(Error::resource(
            format!("{engine} engine with n = {n} weights"),
            limit as u64,
        ));
    }
    Ok(())
}

/// Computes the law of `S_n` with the requested engine and the default
/// support budget.
pub fn distribution(w: &WeightVector, engine: Engine) -> Result<WalkDistribution> {
    distribution_with_budget(w, engine, DEFAULT_SUPPORT_BUDGET)
}

pub fn distribution_with_budget(
    w: &WeightVector,
    engine: Engine,
    budget: usize,
) -> Result<WalkDistribution> {
    check_n(w.len(), MAX_N, "distribution")?;
    let scaled = w.to_scaled()?;
    let support = match engine {
        Engine::Enumerate => {
            check_n(w.len(), MAX_ENUMERATE_N, "enumeration")?;
            enumerate(&scaled.ints)
        }
        Engine::Convolve => convolve(&scaled.ints, budget)?,
        Engine::MeetInMiddle => {
            check_n(w.len(), MAX_ENUMERATE_N, "meet-in-the-middle")?;
            meet_in_middle(&scaled.ints)?
        }
        Engine::Auto => match convolve(&scaled.ints, budget) {
            Ok(s) => s,
            Err(Error::Resource { .. }) if w.len() <= MAX_ENUMERATE_N => {
                meet_in_middle(&scaled.ints)?
            }
            Err(e) => return Err(e),
        },
    };
    Ok(WalkDistribution {
        n: w.len() as u32,
        scale: scaled.scale,
        support,
    })
}

/// Sorted `(sum, count)` list from an unsorted tally.
fn sorted_tally(map: HashMap<i128, u128>) -> Vec<(i128, u128)> {
    let mut v: Vec<(i128, u128)> = map.into_iter().collect();
    v.sort_unstable_by_key(|&(s, _)| s);
    v
}

/// Enumerates all sign patterns; parallel over blocks of high-order bits.
fn enumerate(ints: &[i128]) -> Vec<(i128, u128)> {
    let n = ints.len();
    let high_bits = n.saturating_sub(14).min(10);
    let low_bits = n - high_bits;
    let (low, high) = ints.split_at(low_bits);
    let base: i128 = -ints.iter().sum::<i128>();

    let tally_block = |prefix: u64| -> HashMap<i128, u128> {
        let mut sum = base;
        for (i, &a) in high.iter().enumerate() {
            if prefix >> i & 1 == 1 {
                sum += 2 * a;
            }
        }
        let mut map = HashMap::new();
        *map.entry(sum).or_insert(0) += 1;
        // Gray code: step t flips bit trailing_zeros(t).
        let mut gray: u64 = 0;
        for t in 1u64..(1u64 << low_bits) {
            let bit = t.trailing_zeros() as usize;
            gray ^= 1 << bit;
            if gray >> bit & 1 == 1 {
                sum += 2 * low[bit];
            } else {
                sum -= 2 * low[bit];
            }
            *map.entry(sum).or_insert(0) += 1;
        }
        map
    };

    let merged = (0u64..(1u64 << high_bits))
        .into_par_iter()
        .map(tally_block)
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    sorted_tally(merged)
}

/// One `±a` step applied to a sorted law.
fn convolve_step(dist: &[(i128, u128)], a: i128) -> Vec<(i128, u128)> {
    if a == 0 {
        return dist.iter().map(|&(v, c)| (v, 2 * c)).collect();
    }
    let mut out = Vec::with_capacity(dist.len() * 2);
    let (mut i, mut j) = (0, 0);
    while i < dist.len() || j < dist.len() {
        let lo = dist.get(i).map(|&(v, c)| (v - a, c));
        let hi = dist.get(j).map(|&(v, c)| (v + a, c));
        let next = match (lo, hi) {
            (Some(l), Some(h)) => match l.0.cmp(&h.0) {
                Ordering::Less => {
                    i += 1;
                    l
                }
                Ordering::Greater => {
                    j += 1;
                    h
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (l.0, l.1 + h.1)
                }
            },
            (Some(l), None) => {
                i += 1;
                l
            }
            (None, Some(h)) => {
                j += 1;
                h
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

fn convolve(ints: &[i128], budget: usize) -> Result<Vec<(i128, u128)>> {
    let mut dist = vec![(0i128, 1u128)];
    for &a in ints {
        dist = convolve_step(&dist, a);
        if dist.len() > budget {
            return Err(Error::resource(
                "distinct support points in convolution",
                budget as u64,
            ));
        }
    }
    Ok(dist)
}

/// Laws of the two halves of the weights.
struct Halves {
    left: Vec<(i128, u128)>,
    right: Vec<(i128, u128)>,
}

impl Halves {
    fn new(ints: &[i128]) -> Self {
        let (l, r) = ints.split_at(ints.len() / 2);
        let half = |part: &[i128]| convolve(part, usize::MAX).expect("unbounded budget");
        let (left, right) = rayon::join(|| half(l), || half(r));
        Halves { left, right }
    }

    fn tail_count(&self, t: i128) -> u128 {
        // suffix[i] = patterns of the right half with value index >= i
        let mut suffix = vec![0u128; self.right.len() + 1];
        for i in (0..self.right.len()).rev() {
            suffix[i] = suffix[i + 1] + self.right[i].1;
        }
        // left ascending => t - l descending => the cut index only moves left
        let mut cut = self.right.len();
        let mut total = 0u128;
        for &(l, c) in &self.left {
            let need = t.saturating_sub(l);
            while cut > 0 && self.right[cut - 1].0 >= need {
                cut -= 1;
            }
            total += c * suffix[cut];
        }
        total
    }

    fn point_count(&self, t: i128) -> u128 {
        self.left
            .iter()
            .filter_map(|&(l, c)| {
                let need = t.checked_sub(l)?;
                let i = self.right.binary_search_by(|&(v, _)| v.cmp(&need)).ok()?;
                Some(c * self.right[i].1)
            })
            .sum()
    }
}

fn meet_in_middle(ints: &[i128]) -> Result<Vec<(i128, u128)>> {
    let halves = Halves::new(ints);
    let pairs = halves.left.len() as u64 * halves.right.len() as u64;
    if pairs > MITM_PAIR_BUDGET {
        return Err(Error::resource(
            "meet-in-the-middle pair combinations",
            MITM_PAIR_BUDGET,
        ));
    }
    let merged = halves
        .left
        .par_iter()
        .fold(HashMap::new, |mut acc, &(l, cl)| {
            for &(r, cr) in &halves.right {
                *acc.entry(l + r).or_insert(0u128) += cl * cr;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(sorted_tally(merged))
}

/// Pattern count for `S_n >= x` (tail) or `S_n = x` (point) without
/// necessarily materializing the whole law.
fn query_count(w: &WeightVector, x: &BigRational, tail: bool) -> Result<u128> {
    check_n(w.len(), MAX_N, "distribution")?;
    let scaled = w.to_scaled()?;
    match convolve(&scaled.ints, DEFAULT_SUPPORT_BUDGET) {
        Ok(support) => {
            let d = WalkDistribution {
                n: w.len() as u32,
                scale: scaled.scale,
                support,
            };
            Ok(if tail { d.tail_count(x) } else { d.point_count(x) })
        }
        Err(Error::Resource { .. }) if w.len() <= MAX_ENUMERATE_N => {
            let halves = Halves::new(&scaled.ints);
            Ok(if tail {
                halves.tail_count(scaled_ceil(x, scaled.scale))
            } else {
                scaled_exact(x, scaled.scale)
                    .map(|t| halves.point_count(t))
                    .unwrap_or(0)
            })
        }
        Err(e) => Err(e),
    }
}

/// `P{S_n >= x}`.
pub fn tail_prob(w: &WeightVector, x: &BigRational) -> Result<DyadicProb> {
    let c = query_count(w, x, true)?;
    DyadicProb::from_count(&BigCount::from(c), w.len() as u32)
}

/// `P{S_n = x}`.
pub fn point_prob(w: &WeightVector, x: &BigRational) -> Result<DyadicProb> {
    let c = query_count(w, x, false)?;
    DyadicProb::from_count(&BigCount::from(c), w.len() as u32)
}

/// Result of maximizing `P{S_n ∈ (x - k, x + k]}` over `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalReport {
    pub x_star: BigRational,
    pub prob: DyadicProb,
    /// Whether every `|a_i| >= 1`, so that the Littlewood–Offord bound
    /// applies.
    pub hypothesis_satisfied: bool,
}

impl fmt::Display for IntervalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at x*={}", self.prob, format_rational(&self.x_star))?;
        if !self.hypothesis_satisfied {
            write!(f, " (hypothesis not satisfied: some |a_i| < 1)")?;
        }
        Ok(())
    }
}

/// `max_x P{S_n ∈ (x - k, x + k]}` with the smallest maximizing `x`.
pub fn best_interval_prob(w: &WeightVector, k: u32) -> Result<IntervalReport> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let d = distribution(w, Engine::Auto)?;
    let (x_star, mass) = d.best_window(k);
    Ok(IntervalReport {
        x_star,
        prob: d.prob(mass),
        hypothesis_satisfied: w.all_at_least_one(),
    })
}
