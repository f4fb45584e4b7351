//! Exact integer and dyadic-rational arithmetic.
//!
//! Every probability that arises from `n` fair sign choices has the form
//! `m / 2^n`. [`DyadicProb`] stores such values in lowest terms, so two
//! probabilities are equal exactly when their fields are equal. [`BigCount`]
//! holds the binomial coefficients and family cardinalities that feed them.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A non-negative arbitrary-precision count.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn new(value: BigUint) -> Self {
        BigCount(value)
    }

    pub fn zero() -> Self {
        BigCount(BigUint::zero())
    }

    /// `2^n`, the number of sign patterns of length `n`.
    pub fn pow2(n: u32) -> Self {
        BigCount(BigUint::one() << n)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        BigCount(v)
    }
}

impl Add for BigCount {
    type Output = BigCount;
    fn add(self, rhs: BigCount) -> BigCount {
        BigCount(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a BigCount> for BigCount {
    type Output = BigCount;
    fn add(self, rhs: &'a BigCount) -> BigCount {
        BigCount(self.0 + &rhs.0)
    }
}

impl AddAssign<&BigCount> for BigCount {
    fn add_assign(&mut self, rhs: &BigCount) {
        self.0 += &rhs.0;
    }
}

impl Sum for BigCount {
    fn sum<I: Iterator<Item = BigCount>>(iter: I) -> Self {
        iter.fold(BigCount::zero(), |acc, c| acc + c)
    }
}

impl<'a> Sum<&'a BigCount> for BigCount {
    fn sum<I: Iterator<Item = &'a BigCount>>(iter: I) -> Self {
        iter.fold(BigCount::zero(), |acc, c| acc + c)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binomial coefficient `C(n, j)`, zero when `j` is outside `0..=n`.
///
/// Uses the multiplicative formula; every intermediate quotient is exact
/// because after step `i` the accumulator equals `C(n - j + i, i)`.
pub fn binom(n: u64, j: i64) -> BigCount {
    if j < 0 || j as u64 > n {
        return BigCount::zero();
    }
    let j = j as u64;
    let j = j.min(n - j);
    let mut acc = BigUint::one();
    for i in 1..=j {
        acc *= n - j + i;
        acc /= i;
    }
    BigCount(acc)
}

/// Row `n` of Pascal's triangle, `[C(n,0), ..., C(n,n)]`.
pub fn binomial_row(n: u64) -> Vec<BigCount> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(BigCount(c.clone()));
    for j in 0..n {
        c *= n - j;
        c /= j + 1;
        row.push(BigCount(c.clone()));
    }
    row
}

/// An exact probability `numerator / 2^exponent` in lowest terms.
///
/// The numerator is odd unless the value is zero, in which case the exponent
/// is zero as well.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicProb {
    numerator: BigUint,
    exponent: u32,
}

impl DyadicProb {
    /// Builds `numerator / 2^exponent`, reducing to canonical form.
    pub fn new(numerator: impl Into<BigUint>, exponent: u32) -> Result<Self> {
        let (numerator, exponent) = canonicalize(numerator.into(), exponent);
        if numerator.bits() > u64::from(exponent) + 1
            || (numerator.bits() == u64::from(exponent) + 1 && !numerator.is_one())
        {
            return Err(Error::domain(format!(
                "{numerator}/2^{exponent} exceeds 1"
            )));
        }
        Ok(DyadicProb {
            numerator,
            exponent,
        })
    }

    /// `count / 2^n`, the probability of an event covering `count` of the
    /// `2^n` equally likely sign patterns.
    pub fn from_count(count: &BigCount, n: u32) -> Result<Self> {
        DyadicProb::new(count.value().clone(), n)
    }

    pub fn zero() -> Self {
        DyadicProb {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        DyadicProb {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }

    pub fn half() -> Self {
        DyadicProb {
            numerator: BigUint::one(),
            exponent: 1,
        }
    }

    /// Converts a finite `f64` in `[0, 1]` exactly; every such float is dyadic.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("{v} is not a probability")));
        }
        if v == 0.0 {
            return Ok(DyadicProb::zero());
        }
        let bits = v.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp2) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        // v = mantissa * 2^exp2 with exp2 <= 0 for v <= 1 (mantissa < 2^53).
        if exp2 >= 0 {
            return DyadicProb::new(BigUint::from(mantissa) << exp2 as u32, 0);
        }
        DyadicProb::new(mantissa, (-exp2) as u32)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Numerator when the value is written over `2^exponent`.
    ///
    /// # Panics
    /// If `exponent` is smaller than the canonical exponent.
    pub fn numerator_at(&self, exponent: u32) -> BigUint {
        assert!(exponent >= self.exponent, "exponent below canonical form");
        &self.numerator << (exponent - self.exponent)
    }

    /// Exact sum; fails if the result exceeds 1.
    pub fn checked_add(&self, other: &DyadicProb) -> Result<DyadicProb> {
        let e = self.exponent.max(other.exponent);
        DyadicProb::new(self.numerator_at(e) + other.numerator_at(e), e)
    }

    /// Exact difference; fails if `other > self`.
    pub fn checked_sub(&self, other: &DyadicProb) -> Result<DyadicProb> {
        if other > self {
            return Err(Error::domain(format!(
                "subtraction below zero: {self} - {other}"
            )));
        }
        let e = self.exponent.max(other.exponent);
        DyadicProb::new(self.numerator_at(e) - other.numerator_at(e), e)
    }

    pub fn halve(&self) -> DyadicProb {
        if self.is_zero() {
            return DyadicProb::zero();
        }
        DyadicProb {
            numerator: self.numerator.clone(),
            exponent: self.exponent + 1,
        }
    }

    /// `min(1, 2 * self)`.
    pub fn double_saturating(&self) -> DyadicProb {
        if self.exponent == 0 {
            // zero stays zero; one saturates
            return self.clone();
        }
        DyadicProb::new(self.numerator.clone(), self.exponent - 1)
            .unwrap_or_else(|_| DyadicProb::one())
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from_biguint(Sign::Plus, self.numerator.clone()),
            BigInt::from_biguint(Sign::Plus, self.denominator()),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with exactly `digits` fractional digits, rounded to
    /// nearest with ties to even.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        let ten_pow = num_traits::pow(BigUint::from(10u32), digits);
        let scaled = &self.numerator * &ten_pow;
        let den = self.denominator();
        let (mut q, r) = scaled.div_rem(&den);
        let twice_r = r << 1u32;
        match twice_r.cmp(&den) {
            Ordering::Greater => q += 1u32,
            Ordering::Equal if q.is_odd() => q += 1u32,
            _ => {}
        }
        let (int_part, frac_part) = q.div_rem(&ten_pow);
        format!("{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }

    /// Exact decimal when the expansion has at most `max_digits` fractional
    /// digits (a dyadic `m/2^e` has exactly `e`), otherwise rounded.
    pub fn to_decimal_auto(&self, max_digits: usize) -> String {
        match self.exponent as usize {
            0 => self.numerator.to_string(),
            e if e <= max_digits => self.to_decimal(e),
            _ => self.to_decimal(max_digits),
        }
    }

    /// The `p/2^e` rendering used in machine-readable output.
    pub fn to_power_form(&self) -> String {
        format!("{}/2^{}", self.numerator, self.exponent)
    }
}

fn canonicalize(numerator: BigUint, exponent: u32) -> (BigUint, u32) {
    if numerator.is_zero() {
        return (numerator, 0);
    }
    let tz = numerator.trailing_zeros().unwrap_or(0);
    let shift = tz.min(u64::from(exponent)) as u32;
    (numerator >> shift, exponent - shift)
}

impl Ord for DyadicProb {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.numerator_at(e).cmp(&other.numerator_at(e))
    }
}

impl PartialOrd for DyadicProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

impl FromStr for DyadicProb {
    type Err = Error;

    /// Accepts `p/2^e`, `p/q` with `q` a power of two, or a decimal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, e)) = s.split_once("/2^") {
            let p: BigUint = p
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad exponent in {s:?}")))?;
            return DyadicProb::new(p, e);
        }
        let r = parse_rational(s)?;
        DyadicProb::try_from(&r)
    }
}

impl TryFrom<&BigRational> for DyadicProb {
    type Error = Error;

    fn try_from(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::domain(format!("{r} is negative")));
        }
        let den = r.denom().magnitude();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz) != BigUint::one() {
            return Err(Error::domain(format!("{r} is not dyadic")));
        }
        DyadicProb::new(r.numer().magnitude().clone(), tz as u32)
    }
}

/// Parses `p/q`, an integer, or a plain decimal such as `-0.125` into an
/// exact rational. Decimals are read in base ten, so `0.3` is `3/10`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty rational"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty())
        || !all_digits(int_part)
        || !all_digits(frac_part)
    {
        return Err(Error::parse(format!("not a rational number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
    if negative {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(BigRational::new(numer, denom))
}

/// Renders a rational as `p/q`, or `p` when integral.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `⌈r⌉` as an `i64`.
pub fn ceil_i64(r: &BigRational) -> Result<i64> {
    r.ceil()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::domain(format!("ceiling of {r} does not fit in 64 bits")))
}

pub fn rational_from_i64(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `p/q` as a rational; panics on a zero denominator.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
