//! Set families of sign patterns.
//!
//! A sign pattern is identified with the set `A ⊆ [n]` of coordinates that
//! get `+1`, stored as an `n`-bit mask (bit `i` is weight `i` of the sorted
//! [`WeightVector`]). For weights `a` the pattern `A` gives
//! `s_A = Σ_{i∈A} a_i − Σ_{i∉A} a_i`, and
//!
//! * `F_{≥x} = {A : s_A >= x}` has `|F_{≥x}| = 2^n P{S_n >= x}`,
//! * `F_x = {A : s_A = x}` has `|F_x| = 2^n P{S_n = x}`.
//!
//! With `k = ⌈x⌉`, `F_{≥x}` is `k`-intersecting and has diameter at most
//! `n - k`; for nonzero weights `F_x` is also an antichain. The structure
//! checks here run in `O(n 2^n)` via transforms over the hypercube, with
//! direct pair scans for small families.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde_json::json;

use crate::bounds::{katona_bound, kleitman_bound, milner_bound};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_i64, format_rational, BigCount};
use crate::wsum::{point_prob, tail_prob, WeightVector};

/// Largest ground set for materialized families.
pub const MAX_FAMILY_N: u32 = 24;

/// Families at most this large are checked pair by pair.
const PAIR_SCAN_LIMIT: usize = 2048;

/// Outcome of a pairwise structural check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairCheck {
    Holds,
    /// The lexicographically first violating pair `(A, B)`, `A <= B`.
    Violated(u32, u32),
}

impl PairCheck {
    pub fn holds(&self) -> bool {
        matches!(self, PairCheck::Holds)
    }

    pub fn witness(&self) -> Option<(u32, u32)> {
        match *self {
            PairCheck::Holds => None,
            PairCheck::Violated(a, b) => Some((a, b)),
        }
    }
}

/// Cached structure of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureFlags {
    /// Largest `k` for which the family is `k`-intersecting (the minimum of
    /// `|A ∩ B|` over all pairs, `A = B` included); `None` when empty.
    pub k_intersecting_for: Option<u32>,
    pub is_antichain: bool,
    pub diameter: Option<u32>,
}

/// A family of distinct subsets of `[n]`, `n <= 24`, as sorted bitmasks.
#[derive(Clone, Debug)]
pub struct SetFamily {
    n: u32,
    members: Vec<u32>,
    structure: OnceLock<StructureFlags>,
}

impl PartialEq for SetFamily {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.members == other.members
    }
}

impl Eq for SetFamily {}

fn check_ground_set(n: u32) -> Result<()> {
    if n > MAX_FAMILY_N {
        return Err(Error::resource(
            format!("set family over [{n}]"),
            u64::from(MAX_FAMILY_N),
        ));
    }
    Ok(())
}

impl SetFamily {
    pub fn new(n: u32, mut members: Vec<u32>) -> Result<Self> {
        check_ground_set(n)?;
        if let Some(&bad) = members.iter().find(|&&m| u64::from(m) >> n != 0) {
            return Err(Error::domain(format!("mask {bad:#b} is not a subset of [{n}]")));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("duplicate member in set family"));
        }
        Ok(Self::from_sorted(n, members))
    }

    fn from_sorted(n: u32, members: Vec<u32>) -> Self {
        SetFamily {
            n,
            members,
            structure: OnceLock::new(),
        }
    }

    pub fn ground_set_size(&self) -> u32 {
        self.n
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    /// Every pair (including `A` with itself) meets in at least `k` elements.
    pub fn check_k_intersecting(&self, k: u32) -> PairCheck {
        if self.members.len() <= PAIR_SCAN_LIMIT {
            return pair_scan(&self.members, |a, b| (a & b).count_ones() >= k);
        }
        let profile = self.intersection_profile();
        let first = self
            .members
            .iter()
            .copied()
            .find(|&a| u32::from(profile[self.complement(a) as usize]) < k);
        match first {
            None => PairCheck::Holds,
            Some(a) => {
                let b = self
                    .members
                    .iter()
                    .copied()
                    .find(|&b| (a & b).count_ones() < k)
                    .expect("transform found a partner");
                PairCheck::Violated(a.min(b), a.max(b))
            }
        }
    }

    /// No member is a proper subset of another.
    pub fn check_antichain(&self) -> PairCheck {
        if self.members.len() <= PAIR_SCAN_LIMIT {
            return pair_scan(&self.members, |a, b| a == b || (a & b != a && a & b != b));
        }
        let supersets = self.superset_counts();
        match self.members.iter().copied().find(|&a| supersets[a as usize] >= 2) {
            None => PairCheck::Holds,
            Some(a) => {
                let b = self
                    .members
                    .iter()
                    .copied()
                    .find(|&b| b != a && a & b == a)
                    .expect("transform found a superset");
                PairCheck::Violated(a, b)
            }
        }
    }

    /// `max |A △ B|` over pairs of members.
    pub fn diameter(&self) -> Result<u32> {
        if self.members.is_empty() {
            return Err(Error::domain("diameter of an empty family"));
        }
        if self.members.len() <= PAIR_SCAN_LIMIT {
            return Ok(pair_max(&self.members, |a, b| (a ^ b).count_ones()));
        }
        let dist = self.hamming_distance_field();
        Ok(self
            .members
            .iter()
            .map(|&b| self.n - u32::from(dist[self.complement(b) as usize]))
            .max()
            .unwrap_or(0))
    }

    /// Smallest `|A ∩ B|` over all pairs.
    pub fn min_intersection(&self) -> Option<u32> {
        if self.members.is_empty() {
            return None;
        }
        if self.members.len() <= PAIR_SCAN_LIMIT {
            return Some(pair_min(&self.members, |a, b| (a & b).count_ones()));
        }
        let profile = self.intersection_profile();
        self.members
            .iter()
            .map(|&b| u32::from(profile[self.complement(b) as usize]))
            .min()
    }

    pub fn structure(&self) -> &StructureFlags {
        self.structure.get_or_init(|| StructureFlags {
            k_intersecting_for: self.min_intersection(),
            is_antichain: self.check_antichain().holds(),
            diameter: self.diameter().ok(),
        })
    }

    fn complement(&self, a: u32) -> u32 {
        !a & self.full_mask()
    }

    fn full_mask(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    fn indicator(&self, member: u8, other: u8) -> Vec<u8> {
        let mut field = vec![other; 1usize << self.n];
        for &m in &self.members {
            field[m as usize] = member;
        }
        field
    }

    /// `h[X] = min_{A ∈ F} |A \ X|`; then `min_A |A ∩ B| = h[B^c]`.
    fn intersection_profile(&self) -> Vec<u8> {
        let mut h = self.indicator(0, u8::MAX);
        for bit in 0..self.n {
            let step = 1usize << bit;
            for x in 0..h.len() {
                if x & step == 0 {
                    let (out, inn) = (h[x], h[x | step]);
                    h[x] = out.min(inn.saturating_add(1));
                    h[x | step] = out.min(inn);
                }
            }
        }
        h
    }

    /// `d[Y] = min_{A ∈ F} |A △ Y|`; then `max_A |A △ B| = n - d[B^c]`.
    fn hamming_distance_field(&self) -> Vec<u8> {
        let mut d = self.indicator(0, u8::MAX);
        for bit in 0..self.n {
            let step = 1usize << bit;
            for x in 0..d.len() {
                if x & step == 0 {
                    let (lo, hi) = (d[x], d[x | step]);
                    d[x] = lo.min(hi.saturating_add(1));
                    d[x | step] = hi.min(lo.saturating_add(1));
                }
            }
        }
        d
    }

    /// Number of members containing `X`, saturated at 2.
    fn superset_counts(&self) -> Vec<u8> {
        let mut s = self.indicator(1, 0);
        for bit in 0..self.n {
            let step = 1usize << bit;
            for x in 0..s.len() {
                if x & step == 0 {
                    s[x] = s[x].saturating_add(s[x | step]).min(2);
                }
            }
        }
        s
    }

    /// One member per line as an `n`-character bitstring, most significant
    /// bit (element `n`) first.
    pub fn to_bitstrings(&self) -> String {
        self.members
            .iter()
            .map(|&m| format!("{}\n", mask_to_bitstring(m, self.n)))
            .collect()
    }

    /// Parses the [`to_bitstrings`](Self::to_bitstrings) format; `n` is the
    /// line length (0 for an empty family unless given).
    pub fn from_bitstrings(text: &str, n: Option<u32>) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = match (n, lines.first()) {
            (Some(n), _) => n,
            (None, Some(l)) => l.len() as u32,
            (None, None) => 0,
        };
        let members = lines
            .iter()
            .map(|l| bitstring_to_mask(l, n))
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(n, members)
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .members
            .iter()
            .map(|&m| mask_to_bitstring(m, self.n))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

pub fn mask_to_bitstring(mask: u32, n: u32) -> String {
    (0..n)
        .rev()
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn bitstring_to_mask(s: &str, n: u32) -> Result<u32> {
    if s.len() != n as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::parse(format!("{s:?} is not a {n}-bit string")));
    }
    check_ground_set(n)?;
    Ok(s.bytes().fold(0u32, |m, b| (m << 1) | u32::from(b - b'0')))
}

/// First pair `(a, b)`, `a <= b`, in lexicographic order failing `ok`.
fn pair_scan(members: &[u32], ok: impl Fn(u32, u32) -> bool) -> PairCheck {
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i..] {
            if !ok(a, b) {
                return PairCheck::Violated(a, b);
            }
        }
    }
    PairCheck::Holds
}

fn pair_max(members: &[u32], f: impl Fn(u32, u32) -> u32) -> u32 {
    let mut best = 0;
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i..] {
            best = best.max(f(a, b));
        }
    }
    best
}

fn pair_min(members: &[u32], f: impl Fn(u32, u32) -> u32) -> u32 {
    let mut best = u32::MAX;
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i..] {
            best = best.min(f(a, b));
        }
    }
    best
}

/// A pattern `A` and its signed sum `s_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSubsetSum {
    pub mask: u32,
    pub s_value: BigRational,
}

/// `s_A` for a single mask.
pub fn signed_subset_sum(w: &WeightVector, mask: u32) -> SignedSubsetSum {
    let s_value = w
        .weights()
        .iter()
        .enumerate()
        .map(|(i, a)| if mask >> i & 1 == 1 { a.clone() } else { -a.clone() })
        .sum();
    SignedSubsetSum { mask, s_value }
}

/// Masks whose scaled signed sum satisfies `keep`, in increasing order.
fn collect_masks(w: &WeightVector, keep: impl Fn(i128) -> bool + Sync) -> Result<(u32, Vec<u32>)> {
    let n = u32::try_from(w.len()).unwrap_or(u32::MAX);
    check_ground_set(n)?;
    let scaled = w.to_scaled()?;
    let total: i128 = scaled.ints.iter().sum();
    let low_bits = n.min(12);
    let table = |part: &[i128]| -> Vec<i128> {
        let mut t = vec![0i128; 1 << part.len()];
        for m in 1..t.len() {
            let low = m.trailing_zeros() as usize;
            t[m] = t[m & (m - 1)] + part[low];
        }
        t
    };
    let (lo, hi) = scaled.ints.split_at(low_bits as usize);
    let lo_sums = table(lo);
    let hi_sums = table(hi);
    let members: Vec<u32> = (0..hi_sums.len())
        .into_par_iter()
        .flat_map_iter(|h| {
            let base = 2 * hi_sums[h] - total;
            let lo_sums = &lo_sums;
            let keep = &keep;
            (0..lo_sums.len()).filter_map(move |l| {
                keep(base + 2 * lo_sums[l]).then_some(((h << low_bits) | l) as u32)
            })
        })
        .collect();
    Ok((n, members))
}

fn scale_of(w: &WeightVector) -> Result<i128> {
    Ok(w.to_scaled()?.scale)
}

/// `F_{≥x} = {A : s_A >= x}`.
pub fn build_family_geq(w: &WeightVector, x: &BigRational) -> Result<SetFamily> {
    let scale = scale_of(w)?;
    let scaled_x = (x * BigInt::from(scale)).ceil().to_integer();
    let threshold = scaled_x
        .to_i128()
        .unwrap_or(if scaled_x.is_negative() { i128::MIN } else { i128::MAX });
    let (n, members) = collect_masks(w, |s| s >= threshold)?;
    Ok(SetFamily::from_sorted(n, members))
}

/// `F_x = {A : s_A = x}`.
pub fn build_family_eq(w: &WeightVector, x: &BigRational) -> Result<SetFamily> {
    let scale = scale_of(w)?;
    let scaled_x = x * BigInt::from(scale);
    let target = if scaled_x.is_integer() {
        scaled_x.to_integer().to_i128()
    } else {
        None
    };
    match target {
        Some(t) => {
            let (n, members) = collect_masks(w, |s| s == t)?;
            Ok(SetFamily::from_sorted(n, members))
        }
        None => {
            let n = u32::try_from(w.len()).unwrap_or(u32::MAX);
            check_ground_set(n)?;
            Ok(SetFamily::from_sorted(n, Vec::new()))
        }
    }
}

/// Whether a check applies and, if so, its outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applicable<T> {
    Yes(T),
    /// Hypothesis of the underlying theorem not met.
    NotApplicable,
}

/// Structural and cardinality audit of `F_{≥x}` and `F_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyAuditReport {
    pub n: u32,
    pub x: BigRational,
    pub k: u32,
    pub weights_digest: String,
    pub geq_size: u64,
    pub eq_size: u64,
    /// `F_{≥x}` is `k`-intersecting.
    pub geq_k_intersecting: PairCheck,
    /// `None` when `F_{≥x}` is empty.
    pub geq_diameter: Option<u32>,
    /// `diameter(F_{≥x}) <= n - k`, vacuous for an empty family.
    pub diameter_ok: bool,
    /// `F_x` is an antichain; applicable only when every weight is nonzero.
    pub eq_antichain: Applicable<PairCheck>,
    pub eq_k_intersecting: PairCheck,
    /// Bounds are `None` when `k > n` (both families are then empty).
    pub katona: Option<BigCount>,
    pub kleitman: Option<BigCount>,
    pub milner: Option<BigCount>,
    /// `|F_{≥x}| = 2^n P{S_n >= x}`.
    pub bridge_tail_ok: bool,
    /// `|F_x| = 2^n P{S_n = x}`.
    pub bridge_point_ok: bool,
}

impl FamilyAuditReport {
    pub fn katona_ok(&self) -> bool {
        within(self.geq_size, self.katona.as_ref())
    }

    pub fn kleitman_ok(&self) -> bool {
        within(self.geq_size, self.kleitman.as_ref())
    }

    /// `|F_x| <= milner`; not applicable with zero weights.
    pub fn milner_ok(&self) -> Applicable<bool> {
        match self.eq_antichain {
            Applicable::NotApplicable => Applicable::NotApplicable,
            Applicable::Yes(_) => Applicable::Yes(within(self.eq_size, self.milner.as_ref())),
        }
    }

    /// Every applicable statement holds.
    pub fn all_hold(&self) -> bool {
        self.geq_k_intersecting.holds()
            && self.diameter_ok
            && self.bridge_tail_ok
            && self.bridge_point_ok
            && self.katona_ok()
            && self.kleitman_ok()
            && match self.eq_antichain {
                Applicable::Yes(c) => c.holds() && self.eq_k_intersecting.holds(),
                Applicable::NotApplicable => true,
            }
            && self.milner_ok() != Applicable::Yes(false)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pair = |c: &PairCheck| match c.witness() {
            None => json!({"holds": true}),
            Some((a, b)) => json!({
                "holds": false,
                "witness": [mask_to_bitstring(a, self.n), mask_to_bitstring(b, self.n)],
            }),
        };
        let count = |c: &Option<BigCount>| c.as_ref().map(|v| v.to_string());
        json!({
            "n": self.n,
            "x": format_rational(&self.x),
            "k": self.k,
            "weights": self.weights_digest,
            "geq_size": self.geq_size,
            "eq_size": self.eq_size,
            "geq_k_intersecting": pair(&self.geq_k_intersecting),
            "geq_diameter": self.geq_diameter,
            "diameter_limit": self.n.checked_sub(self.k),
            "diameter_ok": self.diameter_ok,
            "eq_antichain": match &self.eq_antichain {
                Applicable::Yes(c) => pair(c),
                Applicable::NotApplicable => json!("not applicable"),
            },
            "eq_k_intersecting": pair(&self.eq_k_intersecting),
            "katona_bound": count(&self.katona),
            "kleitman_bound": count(&self.kleitman),
            "milner_bound": count(&self.milner),
            "katona_ok": self.katona_ok(),
            "kleitman_ok": self.kleitman_ok(),
            "milner_ok": match self.milner_ok() {
                Applicable::Yes(b) => json!(b),
                Applicable::NotApplicable => json!("not applicable"),
            },
            "bridge_tail_ok": self.bridge_tail_ok,
            "bridge_point_ok": self.bridge_point_ok,
            "all_hold": self.all_hold(),
        })
    }
}

fn within(size: u64, bound: Option<&BigCount>) -> bool {
    match bound {
        Some(b) => BigCount::from(size) <= *b,
        None => size == 0,
    }
}

/// Builds `F_{≥x}` and `F_x` for `k = ⌈x⌉` and checks every structural claim
/// and cardinality bound that applies.
pub fn audit_family(w: &WeightVector, x: &BigRational) -> Result<FamilyAuditReport> {
    if !x.is_positive() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    let geq = build_family_geq(w, x)?;
    let eq = build_family_eq(w, x)?;
    let n = geq.ground_set_size();
    let k = u32::try_from(ceil_i64(x)?).unwrap_or(u32::MAX);
    let bounds_apply = k <= n;
    let geq_diameter = geq.diameter().ok();
    let diameter_ok = match geq_diameter {
        None => true,
        Some(d) => bounds_apply && d <= n - k,
    };
    let eq_antichain = if w.all_nonzero() {
        Applicable::Yes(eq.check_antichain())
    } else {
        Applicable::NotApplicable
    };
    let pow = BigCount::pow2(n);
    let bridge = |size: usize, p: crate::exactnum::DyadicProb| {
        BigCount::from(size as u64).value() * p.denominator() == pow.value() * p.numerator()
    };
    Ok(FamilyAuditReport {
        n,
        x: x.clone(),
        k,
        weights_digest: w.digest(),
        geq_size: geq.len() as u64,
        eq_size: eq.len() as u64,
        geq_k_intersecting: geq.check_k_intersecting(k),
        geq_diameter,
        diameter_ok,
        eq_antichain,
        eq_k_intersecting: eq.check_k_intersecting(k),
        katona: bounds_apply.then(|| katona_bound(n, k)).transpose()?,
        kleitman: bounds_apply.then(|| kleitman_bound(n, k)).transpose()?,
        milner: bounds_apply.then(|| milner_bound(n, k)).transpose()?,
        bridge_tail_ok: bridge(geq.len(), tail_prob(w, x)?),
        bridge_point_ok: bridge(eq.len(), point_prob(w, x)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(n: u32, bits: &[&str]) -> SetFamily {
        SetFamily::new(n, bits.iter().map(|b| bitstring_to_mask(b, n).unwrap()).collect()).unwrap()
    }

    fn w112() -> WeightVector {
        WeightVector::new(vec![ratio(1, 1), ratio(1, 1), ratio(1, 2)]).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(build_family_geq(&w112(), &ratio(3, 2)).unwrap(), fam(3, &["111", "110"]));
        assert!(build_family_geq(&WeightVector::ones(2), &ratio(3, 1)).unwrap().is_empty());
        assert_eq!(build_family_geq(&WeightVector::ones(1), &ratio(1, 1)).unwrap(), fam(1, &["1"]));
        assert_eq!(build_family_eq(&w112(), &ratio(1, 2)).unwrap(), fam(3, &["101", "011"]));
        assert_eq!(
            build_family_eq(&WeightVector::ones(3), &ratio(1, 1)).unwrap(),
            fam(3, &["110", "101", "011"])
        );
        assert!(build_family_eq(&WeightVector::ones(2), &ratio(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn structure_examples() {
        assert!(fam(3, &["111", "110"]).check_k_intersecting(2).holds());
        assert_eq!(
            fam(3, &["100", "010"]).check_k_intersecting(1),
            PairCheck::Violated(0b010, 0b100)
        );
        assert!(fam(3, &[]).check_k_intersecting(5).holds());
        assert!(fam(3, &["110", "101", "011"]).check_antichain().holds());
        assert_eq!(fam(3, &["100", "110"]).check_antichain(), PairCheck::Violated(0b100, 0b110));
        assert!(fam(3, &["111"]).check_antichain().holds());
        assert_eq!(fam(3, &["111", "110"]).diameter().unwrap(), 1);
        assert_eq!(fam(3, &["000", "111"]).diameter().unwrap(), 3);
        assert_eq!(fam(3, &["110", "101", "011"]).diameter().unwrap(), 2);
        assert!(fam(3, &[]).diameter().is_err());
        let f = fam(3, &["110", "101", "011"]);
        assert_eq!(
            *f.structure(),
            StructureFlags {
                k_intersecting_for: Some(1),
                is_antichain: true,
                diameter: Some(2)
            }
        );
    }

    #[test]
    fn invalid_families() {
        assert!(SetFamily::new(2, vec![4]).is_err());
        assert!(SetFamily::new(3, vec![1, 1]).is_err());
        assert!(matches!(SetFamily::new(25, vec![]), Err(Error::Resource { .. })));
        assert!(build_family_geq(&WeightVector::ones(25), &ratio(1, 1)).is_err());
    }

    #[test]
    fn bitstring_round_trip() {
        let f = fam(4, &["1010", "0111", "0000"]);
        assert_eq!(SetFamily::from_bitstrings(&f.to_bitstrings(), None).unwrap(), f);
        assert!(SetFamily::from_bitstrings("101\n11\n", None).is_err());
    }

    #[test]
    fn audit_examples() {
        let r = audit_family(&w112(), &ratio(3, 2)).unwrap();
        assert!(r.geq_k_intersecting.holds());
        assert_eq!(r.geq_size, 2);
        assert_eq!(r.katona, Some(BigCount::from(2u64)));
        assert!(r.all_hold());

        let r = audit_family(&WeightVector::ones(4), &ratio(2, 1)).unwrap();
        assert_eq!(r.geq_size, 5);
        assert_eq!(r.katona, Some(BigCount::from(5u64)));

        let r = audit_family(&WeightVector::uniform(4, ratio(3, 4)), &ratio(3, 2)).unwrap();
        assert_eq!(r.eq_size, 4);
        assert_eq!(r.milner, Some(BigCount::from(4u64)));
        assert_eq!(r.eq_antichain, Applicable::Yes(PairCheck::Holds));
        assert!(r.all_hold());

        // a zero weight: F_x = {0, 1}-patterns differing only at that weight
        let wz = WeightVector::new(vec![ratio(0, 1), ratio(1, 1)]).unwrap();
        let r = audit_family(&wz, &ratio(1, 1)).unwrap();
        assert_eq!(r.eq_antichain, Applicable::NotApplicable);
        assert_eq!(r.milner_ok(), Applicable::NotApplicable);
        assert!(!build_family_eq(&wz, &ratio(1, 1)).unwrap().check_antichain().holds());
        assert!(r.all_hold());

        assert!(audit_family(&w112(), &ratio(0, 1)).is_err());
        // x beyond the range: everything empty and vacuous
        let r = audit_family(&w112(), &ratio(7, 1)).unwrap();
        assert_eq!((r.geq_size, r.katona.clone()), (0, None));
        assert!(r.all_hold());
    }

    fn random_family(rng: &mut ChaCha8Rng, n: u32, size: usize, min_pop: u32) -> SetFamily {
        let mut members: Vec<u32> = (0..size)
            .map(|_| rng.gen_range(0..1u32 << n))
            .filter(|m| m.count_ones() >= min_pop)
            .collect();
        members.sort_unstable();
        members.dedup();
        SetFamily::new(n, members).unwrap()
    }

    #[test]
    fn transforms_agree_with_pair_scans() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 13 + trial % 3;
            let min_pop = rng.gen_range(0..=n / 3);
            let f = random_family(&mut rng, n, 6000 + 50 * trial as usize, min_pop);
            assert!(f.len() > PAIR_SCAN_LIMIT, "exercise the transform path");
            let m = &f.members;
            let k = rng.gen_range(1..=n / 2);
            assert_eq!(
                f.check_k_intersecting(k),
                pair_scan(m, |a, b| (a & b).count_ones() >= k),
                "trial {trial}"
            );
            assert_eq!(
                f.check_antichain(),
                pair_scan(m, |a, b| a == b || (a & b != a && a & b != b))
            );
            assert_eq!(f.diameter().unwrap(), pair_max(m, |a, b| (a ^ b).count_ones()));
            assert_eq!(f.min_intersection(), Some(pair_min(m, |a, b| (a & b).count_ones())));
        }
    }

    #[test]
    fn antichain_transform_on_layers() {
        // a full layer is an antichain; adding one superset breaks it
        let n = 14;
        let layer: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() == 7).collect();
        let f = SetFamily::new(n, layer.clone()).unwrap();
        assert!(f.check_antichain().holds());
        let mut broken = layer;
        broken.push(0b11111111);
        let f = SetFamily::new(n, broken).unwrap();
        assert_eq!(f.check_antichain(), PairCheck::Violated(0b01111111, 0b11111111));
    }

    #[test]
    fn k_intersecting_implies_small_diameter() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(2..=10);
            let (size, min_pop) = (rng.gen_range(1..40), rng.gen_range(0..=n));
            let f = random_family(&mut rng, n, size, min_pop);
            if f.is_empty() {
                continue;
            }
            if let Some(k) = f.min_intersection().filter(|&k| k >= 1) {
                assert!(f.diameter().unwrap() <= n - k);
            }
        }
    }

    #[test]
    fn bridge_identities_and_structure_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=16);
            let ws: Vec<_> = (0..n)
                .map(|_| {
                    let q = rng.gen_range(1..=16);
                    ratio(rng.gen_range(1..=q), q)
                })
                .collect();
            let w = WeightVector::new(ws).unwrap();
            for twice_x in 1..=2 * n as i64 {
                let r = audit_family(&w, &ratio(twice_x, 2)).unwrap();
                assert!(r.all_hold(), "{w} x={}", twice_x as f64 / 2.0);
            }
        }
    }

    #[test]
    fn signed_sums_define_the_families() {
        let w = w112();
        let geq = build_family_geq(&w, &ratio(1, 2)).unwrap();
        for mask in 0..8u32 {
            let s = signed_subset_sum(&w, mask);
            assert_eq!(geq.contains(mask), s.s_value >= ratio(1, 2));
        }
    }
}
