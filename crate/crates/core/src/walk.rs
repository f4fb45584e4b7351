//! The simple random walk `W_n = ε_1 + ... + ε_n`.
//!
//! `W_n` takes the values `-n, -n+2, ..., n`, and `W_n = k` happens for
//! `C(n, (n+k)/2)` of the `2^n` sign patterns. Point, tail and interval
//! probabilities below are exact.

use num_rational::BigRational;

use crate::exactnum::{binom, binomial_row, ceil_i64, BigCount, DyadicProb};

/// A simple random walk with `n` steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimpleWalk {
    n: u32,
}

impl SimpleWalk {
    pub fn new(n: u32) -> Self {
        SimpleWalk { n }
    }

    pub fn steps(&self) -> u32 {
        self.n
    }

    /// Number of sign patterns with `W_n = k`.
    pub fn point_count(&self, k: i64) -> BigCount {
        let n = i64::from(self.n);
        if k.abs() > n || (n + k).rem_euclid(2) != 0 {
            return BigCount::zero();
        }
        binom(u64::from(self.n), (n + k) / 2)
    }

    /// Number of sign patterns with `W_n >= k`.
    pub fn tail_count(&self, k: i64) -> BigCount {
        let n = i64::from(self.n);
        if k <= -n {
            return BigCount::pow2(self.n);
        }
        if k > n {
            return BigCount::zero();
        }
        // W_n = 2j - n, so W_n >= k iff j >= ceil((n + k) / 2).
        let j0 = (n + k + 1).div_euclid(2);
        let row = binomial_row(u64::from(self.n));
        row[j0 as usize..].iter().sum()
    }

    /// Number of sign patterns with `W_n` in the half-open interval `(-k, k]`.
    pub fn interval_count(&self, k: u32) -> BigCount {
        let n = i64::from(self.n);
        let k = i64::from(k);
        let lo = (-k + 1).max(-n);
        let hi = k.min(n);
        (lo..=hi).map(|v| self.point_count(v)).sum()
    }

    pub fn point(&self, k: i64) -> DyadicProb {
        self.prob(&self.point_count(k))
    }

    pub fn tail_int(&self, k: i64) -> DyadicProb {
        self.prob(&self.tail_count(k))
    }

    /// `P{W_n >= x}` for real `x`; `W_n` is integer-valued so only `⌈x⌉`
    /// matters.
    pub fn tail(&self, x: &BigRational) -> DyadicProb {
        match ceil_i64(x) {
            Ok(k) => self.tail_int(k),
            Err(_) if x.numer().sign() == num_bigint::Sign::Minus => DyadicProb::one(),
            Err(_) => DyadicProb::zero(),
        }
    }

    pub fn interval(&self, k: u32) -> DyadicProb {
        self.prob(&self.interval_count(k))
    }

    fn prob(&self, count: &BigCount) -> DyadicProb {
        DyadicProb::from_count(count, self.n).expect("walk counts never exceed 2^n")
    }
}

/// `P{W_n = k}`.
pub fn walk_point(n: u32, k: i64) -> DyadicProb {
    SimpleWalk::new(n).point(k)
}

/// `P{W_n >= x}`.
pub fn walk_tail(n: u32, x: &BigRational) -> DyadicProb {
    SimpleWalk::new(n).tail(x)
}

/// `P{W_n ∈ (-k, k]}`, which is `2^-n` times the sum of the `k` largest
/// binomial coefficients in row `n`.
pub fn walk_interval(n: u32, k: u32) -> DyadicProb {
    SimpleWalk::new(n).interval(k)
}

/// Sum of the `k` largest entries of row `n` of Pascal's triangle.
pub fn largest_binomials_sum(n: u32, k: u32) -> BigCount {
    let mut row = binomial_row(u64::from(n));
    row.sort_unstable_by(|a, b| b.cmp(a));
    row.iter().take(k as usize).sum()
}
