//! Sweeps that check every inequality against exact computation.
//!
//! A sweep walks over dimensions `n`, weight vectors (or random Lipschitz
//! tables) and a grid of `x`, and emits one [`VerifyRecord`] per check and
//! parameter point. Records come out in a fixed order (dimension, then
//! subject in generation order, then check, then `x` or `k`) no matter how
//! many threads evaluate them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{
    hoeffding_bound, kwapien_rhs, lo_bound, point_bound_lem1, point_bound_thm2, rational_to_f64,
    tail_bound,
};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_i64, format_rational, parse_rational, ratio, BigCount, DyadicProb};
use crate::families::{audit_family, Applicable, FamilyAuditReport, MAX_FAMILY_N};
use crate::lipschitz::{check_lipschitz_bound, random_odd_lipschitz, LipschitzTable, MAX_TABLE_N};
use crate::wsum::{distribution, Engine, WalkDistribution, WeightVector};

/// Units evaluated per parallel batch.
const BATCH: usize = 1024;

/// Default cap on the number of sweep units.
pub const DEFAULT_MAX_UNITS: u64 = 20_000_000;

/// Failing records kept in the summary.
const KEPT_FAILURES: usize = 100;

/// Slack allowed when comparing with the floating-point Hoeffding bound.
fn hoeffding_tolerance() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << 40)
}

/// The inequalities a sweep can check.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CheckTag {
    Thm1,
    Thm2,
    Lem1,
    Lo,
    Katona,
    Milner,
    Kleitman,
    Lipschitz,
    HoeffdingCmp,
    KwapienCmp,
}

impl CheckTag {
    pub const ALL: [CheckTag; 10] = [
        CheckTag::Thm1,
        CheckTag::Thm2,
        CheckTag::Lem1,
        CheckTag::Lo,
        CheckTag::Katona,
        CheckTag::Milner,
        CheckTag::Kleitman,
        CheckTag::Lipschitz,
        CheckTag::HoeffdingCmp,
        CheckTag::KwapienCmp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckTag::Thm1 => "thm1",
            CheckTag::Thm2 => "thm2",
            CheckTag::Lem1 => "lem1",
            CheckTag::Lo => "lo",
            CheckTag::Katona => "katona",
            CheckTag::Milner => "milner",
            CheckTag::Kleitman => "kleitman",
            CheckTag::Lipschitz => "lipschitz",
            CheckTag::HoeffdingCmp => "hoeffding_cmp",
            CheckTag::KwapienCmp => "kwapien_cmp",
        }
    }

    /// Checks that do not depend on weights.
    fn weight_free(&self) -> bool {
        matches!(self, CheckTag::HoeffdingCmp | CheckTag::KwapienCmp)
    }
}

impl fmt::Display for CheckTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckTag::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown check {s:?}")))
    }
}

/// Where the weight vectors of a sweep come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightSource {
    /// All vectors in `{0, step, 2 step, ..., 1}^n`.
    FullGrid(BigRational),
    /// All vectors in `values^n`.
    Values(Vec<BigRational>),
    /// `count` random vectors per `n` with denominators at most 64, or
    /// `count` random tables per `n` for the Lipschitz check.
    Random { count: u64, seed: u64 },
    /// The extremal candidates for every check and `x` of the sweep.
    ExtremalOnly,
}

/// Values of `x` for a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XGrid {
    /// `step, 2 step, ..., n`.
    Step(BigRational),
    Values(Vec<BigRational>),
    /// The step grid plus up to `atoms` positive atoms of each `S_n`, so
    /// that point events are not almost always empty for random weights.
    StepAndAtoms { step: BigRational, atoms: usize },
}

impl XGrid {
    fn base(&self, n: u32) -> Vec<BigRational> {
        match self {
            XGrid::Step(step) | XGrid::StepAndAtoms { step, .. } => {
                let top = BigRational::from_integer(BigInt::from(n));
                let mut xs = Vec::new();
                let mut x = step.clone();
                while x <= top {
                    xs.push(x.clone());
                    x += step;
                }
                xs
            }
            XGrid::Values(v) => v.clone(),
        }
    }

    fn for_distribution(&self, n: u32, d: Option<&WalkDistribution>) -> Vec<BigRational> {
        let mut xs = self.base(n);
        if let (XGrid::StepAndAtoms { atoms, .. }, Some(d)) = (self, d) {
            let positive: Vec<BigRational> = (0..d.len())
                .map(|i| d.value_at(i))
                .filter(|v| v.is_positive())
                .collect();
            if *atoms > 0 && !positive.is_empty() {
                let picks = (*atoms).min(positive.len());
                for j in 0..picks {
                    xs.push(positive[j * positive.len() / picks].clone());
                }
            }
            xs.sort();
            xs.dedup();
        }
        xs
    }
}

/// A sweep over a parameter space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSpec {
    pub n_min: u32,
    pub n_max: u32,
    pub x_grid: XGrid,
    /// Interval half-widths for the Littlewood–Offord check.
    pub k_values: Vec<u32>,
    pub weight_source: WeightSource,
    pub checks: Vec<CheckTag>,
    /// Units beyond this are not evaluated; the summary says so.
    pub max_units: u64,
}

fn grid_step_ok(step: &BigRational) -> Result<()> {
    if !step.is_positive() || !(BigRational::one() / step).is_integer() {
        return Err(Error::domain(format!(
            "grid step must divide 1, got {}",
            format_rational(step)
        )));
    }
    Ok(())
}

impl SweepSpec {
    pub fn new(n_min: u32, n_max: u32, weight_source: WeightSource, checks: &[CheckTag]) -> Self {
        SweepSpec {
            n_min,
            n_max,
            x_grid: XGrid::Step(ratio(1, 2)),
            k_values: vec![1, 2, 3],
            weight_source,
            checks: checks.to_vec(),
            max_units: DEFAULT_MAX_UNITS,
        }
    }

    pub fn with_x_grid(mut self, x_grid: XGrid) -> Self {
        self.x_grid = x_grid;
        self
    }

    pub fn with_k_values(mut self, k_values: Vec<u32>) -> Self {
        self.k_values = k_values;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::domain(format!(
                "need 1 <= n_min <= n_max, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.checks.is_empty() {
            return Err(Error::domain("no checks selected"));
        }
        if let WeightSource::FullGrid(step) = &self.weight_source {
            grid_step_ok(step)?;
        }
        match &self.x_grid {
            XGrid::Step(step) | XGrid::StepAndAtoms { step, .. } if !step.is_positive() => {
                return Err(Error::domain("x grid step must be positive"));
            }
            XGrid::Values(v) if v.iter().any(|x| !x.is_positive()) => {
                return Err(Error::domain("x values must be positive"));
            }
            _ => {}
        }
        if self.k_values.contains(&0) {
            return Err(Error::domain("k values must be positive"));
        }
        Ok(())
    }

    fn has(&self, c: CheckTag) -> bool {
        self.checks.contains(&c)
    }

    fn has_weighted(&self) -> bool {
        self.checks
            .iter()
            .any(|c| !c.weight_free() && !(*c == CheckTag::Lipschitz && self.random_tables()))
    }

    fn random_tables(&self) -> bool {
        matches!(self.weight_source, WeightSource::Random { .. }) && self.has(CheckTag::Lipschitz)
    }

    /// Parses the plain key-value (TOML) form, e.g.
    ///
    /// ```toml
    /// n_min = 1
    /// n_max = 6
    /// checks = ["thm1", "thm2"]
    /// x_step = "1/4"
    /// [weights]
    /// source = "full_grid"
    /// step = "1/4"
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        raw.into_spec()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n_min: Option<u32>,
    n_max: u32,
    checks: Vec<String>,
    x_step: Option<String>,
    x_values: Option<Vec<String>>,
    x_atoms: Option<usize>,
    k_values: Option<Vec<u32>>,
    max_units: Option<u64>,
    weights: RawSource,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    source: String,
    step: Option<String>,
    values: Option<Vec<String>>,
    count: Option<u64>,
    seed: Option<u64>,
}

impl RawSpec {
    fn into_spec(self) -> Result<SweepSpec> {
        let rationals = |v: &[String]| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>();
        let missing = |what: &str| Error::parse(format!("missing {what}"));
        let w = &self.weights;
        let source = match w.source.as_str() {
            "full_grid" => WeightSource::FullGrid(parse_rational(
                w.step.as_deref().ok_or_else(|| missing("weights.step"))?,
            )?),
            "values" => WeightSource::Values(rationals(
                w.values.as_deref().ok_or_else(|| missing("weights.values"))?,
            )?),
            "random" => WeightSource::Random {
                count: w.count.ok_or_else(|| missing("weights.count"))?,
                seed: w.seed.unwrap_or(0),
            },
            "extremal_only" => WeightSource::ExtremalOnly,
            other => return Err(Error::parse(format!("unknown weight source {other:?}"))),
        };
        let x_grid = match (&self.x_values, &self.x_step) {
            (Some(v), None) => XGrid::Values(rationals(v)?),
            (None, step) => {
                let step = parse_rational(step.as_deref().unwrap_or("1/2"))?;
                match self.x_atoms {
                    Some(atoms) => XGrid::StepAndAtoms { step, atoms },
                    None => XGrid::Step(step),
                }
            }
            (Some(_), Some(_)) => return Err(Error::parse("give x_step or x_values, not both")),
        };
        let checks = self
            .checks
            .iter()
            .map(|c| c.parse())
            .collect::<Result<Vec<CheckTag>>>()?;
        let mut spec = SweepSpec::new(self.n_min.unwrap_or(1), self.n_max, source, &checks)
            .with_x_grid(x_grid);
        if let Some(k) = self.k_values {
            spec.k_values = k;
        }
        if let Some(m) = self.max_units {
            spec.max_units = m;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// What a record was computed on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    /// Weight-free comparisons.
    Walk,
    /// A weight vector, by digest.
    Weights(String),
    /// A table from [`random_odd_lipschitz`] with this seed.
    Table(u64),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Walk => write!(f, "walk"),
            Subject::Weights(d) => write!(f, "{d}"),
            Subject::Table(seed) => write!(f, "table seed={seed}"),
        }
    }
}

/// One inequality `lhs <= rhs` at one parameter point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyRecord {
    pub check: CheckTag,
    pub n: u32,
    pub x: Option<BigRational>,
    pub k: Option<u32>,
    pub subject: Subject,
    pub lhs: DyadicProb,
    pub rhs: DyadicProb,
    pub tight: bool,
    pub passed: bool,
    /// Structural failures and tolerances.
    pub note: Option<String>,
}

impl VerifyRecord {
    fn compare(check: CheckTag, n: u32, subject: &Subject, lhs: DyadicProb, rhs: DyadicProb) -> Self {
        VerifyRecord {
            check,
            n,
            x: None,
            k: None,
            subject: subject.clone(),
            passed: lhs <= rhs,
            tight: lhs == rhs,
            lhs,
            rhs,
            note: None,
        }
    }

    fn at_x(mut self, x: &BigRational) -> Self {
        self.x = Some(x.clone());
        self
    }

    fn at_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    fn structure(mut self, failures: Vec<String>) -> Self {
        if !failures.is_empty() {
            self.passed = false;
            self.tight = false;
            self.note = Some(failures.join("; "));
        }
        self
    }

    /// Command lines reproducing this record with the `symwalk` binary.
    pub fn repro(&self) -> String {
        let x = self.x.as_ref().map(format_rational).unwrap_or_default();
        let k = self.k.unwrap_or(0);
        let n = self.n;
        let w = match &self.subject {
            Subject::Weights(d) => d.clone(),
            _ => String::new(),
        };
        match (self.check, &self.subject) {
            (CheckTag::Thm1, _) => {
                format!("symwalk prob tail --weights {w} --x {x} && symwalk bound tail --n {n} --x {x}")
            }
            (CheckTag::Thm2, _) => {
                format!("symwalk prob point --weights {w} --x {x} && symwalk bound point --n {n} --x {x}")
            }
            (CheckTag::Lem1, _) => format!(
                "symwalk prob point --weights {w} --x {x} && symwalk bound point --n {n} --x {x} --strict-positive"
            ),
            (CheckTag::Lo, _) => {
                format!("symwalk prob interval --weights {w} --k {k} && symwalk bound lo --n {n} --k {k}")
            }
            (CheckTag::Katona | CheckTag::Milner | CheckTag::Kleitman, _) => {
                format!("symwalk family audit --weights {w} --x {x}")
            }
            (CheckTag::Lipschitz, Subject::Table(seed)) => format!(
                "symwalk lipschitz gen --n {n} --seed {seed} --out table.txt && symwalk lipschitz check --table table.txt --x {x}"
            ),
            (CheckTag::Lipschitz, _) => {
                format!("symwalk prob tail --weights {w} --x {x} && symwalk bound tail --n {n} --x {x}")
            }
            (CheckTag::HoeffdingCmp | CheckTag::KwapienCmp, _) => {
                format!("symwalk curve --n {n} --x-min {x} --x-max {x} --step 1")
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "check": self.check.name(),
            "n": self.n,
            "x": self.x.as_ref().map(format_rational),
            "k": self.k,
            "subject": self.subject.to_string(),
            "lhs": self.lhs.to_power_form(),
            "lhs_decimal": self.lhs.to_decimal_auto(12),
            "rhs": self.rhs.to_power_form(),
            "rhs_decimal": self.rhs.to_decimal_auto(12),
            "tight": self.tight,
            "passed": self.passed,
        });
        if let Some(note) = &self.note {
            v["note"] = json!(note);
        }
        if !self.passed {
            v["repro"] = json!(self.repro());
        }
        v
    }
}

/// Per-check tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckCounts {
    pub total: u64,
    pub passed: u64,
    pub failed: u64,
    pub tight: u64,
    /// Parameter points where the hypothesis of the check was not met.
    pub skipped: u64,
}

/// Tallies of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub per_check: BTreeMap<CheckTag, CheckCounts>,
    pub units: u64,
    /// The first failing records.
    pub failures: Vec<VerifyRecord>,
    /// Why the sweep stopped early, if it did.
    pub truncated: Option<String>,
}

impl SweepSummary {
    pub fn failed(&self) -> u64 {
        self.per_check.values().map(|c| c.failed).sum()
    }

    pub fn total(&self) -> u64 {
        self.per_check.values().map(|c| c.total).sum()
    }

    pub fn tight(&self) -> u64 {
        self.per_check.values().map(|c| c.tight).sum()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    fn add(&mut self, r: &VerifyRecord) {
        let c = self.per_check.entry(r.check).or_default();
        c.total += 1;
        if r.passed {
            c.passed += 1;
        } else {
            c.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(r.clone());
            }
        }
        if r.tight {
            c.tight += 1;
        }
    }

    fn skip(&mut self, check: CheckTag, count: u64) {
        self.per_check.entry(check).or_default().skipped += count;
    }

    pub fn merge(&mut self, other: SweepSummary) {
        for (check, c) in other.per_check {
            let e = self.per_check.entry(check).or_default();
            e.total += c.total;
            e.passed += c.passed;
            e.failed += c.failed;
            e.tight += c.tight;
            e.skipped += c.skipped;
        }
        self.units += other.units;
        let room = KEPT_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        self.truncated = match (self.truncated.take(), other.truncated) {
            (Some(a), Some(b)) => Some(format!("{a}; {b}")),
            (a, b) => a.or(b),
        };
    }

    /// `check,total,passed,failed,tight,skipped` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,total,passed,failed,tight,skipped\n");
        for (check, c) in &self.per_check {
            out.push_str(&format!(
                "{check},{},{},{},{},{}\n",
                c.total, c.passed, c.failed, c.tight, c.skipped
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let per_check: serde_json::Map<String, serde_json::Value> = self
            .per_check
            .iter()
            .map(|(check, c)| {
                (
                    check.name().to_string(),
                    json!({"total": c.total, "passed": c.passed, "failed": c.failed,
                           "tight": c.tight, "skipped": c.skipped}),
                )
            })
            .collect();
        json!({
            "units": self.units,
            "total": self.total(),
            "failed": self.failed(),
            "tight": self.tight(),
            "per_check": per_check,
            "failures": self.failures.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "truncated": self.truncated,
        })
    }
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} records, {} failed, {} tight ({} units)",
            self.total(),
            self.failed(),
            self.tight(),
            self.units
        )?;
        for (check, c) in &self.per_check {
            writeln!(
                f,
                "  {:<14} total {:>9}  failed {:>4}  tight {:>7}  skipped {:>7}",
                check.name(),
                c.total,
                c.failed,
                c.tight,
                c.skipped
            )?;
        }
        for r in &self.failures {
            writeln!(f, "FAILED {} n={} {}: {} > {}", r.check, r.n, r.subject, r.lhs, r.rhs)?;
            writeln!(f, "  repro: {}", r.repro())?;
        }
        if let Some(t) = &self.truncated {
            writeln!(f, "TRUNCATED: {t}")?;
        }
        Ok(())
    }
}

/// Records and summary of a sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub records: Vec<VerifyRecord>,
    pub summary: SweepSummary,
}

#[derive(Clone, Debug)]
enum UnitSubject {
    Walk,
    Weights(WeightVector),
    Table(u64),
}

#[derive(Clone, Debug)]
struct Unit {
    n: u32,
    subject: UnitSubject,
}

fn mix_seed(seed: u64, n: u32) -> u64 {
    seed ^ u64::from(n).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// `count` random weight vectors of length `n`, each weight `p/q` with
/// `1 <= q <= 64` and `0 <= p <= q`.
pub fn random_weights(n: u32, count: u64, seed: u64) -> impl Iterator<Item = WeightVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, n));
    (0..count).map(move |_| {
        let w = (0..n)
            .map(|_| {
                let q = rng.gen_range(1..=64i64);
                ratio(rng.gen_range(0..=q), q)
            })
            .collect();
        WeightVector::new_unbounded(w)
    })
}

/// Seeds of the random tables of a sweep, one per table.
fn table_seeds(n: u32, count: u64, seed: u64) -> impl Iterator<Item = u64> {
    let base = mix_seed(seed, n);
    (0..count).map(move |i| base.wrapping_add(i))
}

fn grid_tuples(values: Vec<BigRational>, n: u32) -> Result<impl Iterator<Item = WeightVector>> {
    let l = values.len() as u64;
    let total = l
        .checked_pow(n)
        .ok_or_else(|| Error::resource(format!("grid of {l}^{n} weight vectors"), u64::MAX))?;
    Ok((0..total).map(move |mut idx| {
        // most significant digit first: lexicographic order
        let mut digits = vec![0usize; n as usize];
        for d in digits.iter_mut().rev() {
            *d = (idx % l) as usize;
            idx /= l;
        }
        WeightVector::new_unbounded(digits.into_iter().map(|d| values[d].clone()).collect())
    }))
}

fn grid_values(step: &BigRational) -> Vec<BigRational> {
    let steps = (BigRational::one() / step).to_integer().to_u64().unwrap_or(0);
    (0..=steps)
        .map(|i| step * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn units(spec: &SweepSpec) -> Result<Box<dyn Iterator<Item = Result<Unit>> + Send>> {
    let mut parts: Vec<Box<dyn Iterator<Item = Result<Unit>> + Send>> = Vec::new();
    for n in spec.n_min..=spec.n_max {
        if spec.checks.iter().any(|c| c.weight_free()) {
            parts.push(Box::new(std::iter::once(Ok(Unit { n, subject: UnitSubject::Walk }))));
        }
        if spec.random_tables() {
            if let WeightSource::Random { count, seed } = spec.weight_source {
                parts.push(Box::new(
                    table_seeds(n, count, seed).map(move |s| Ok(Unit { n, subject: UnitSubject::Table(s) })),
                ));
            }
        }
        if !spec.has_weighted() {
            continue;
        }
        let weights: Box<dyn Iterator<Item = WeightVector> + Send> = match &spec.weight_source {
            WeightSource::FullGrid(step) => Box::new(grid_tuples(grid_values(step), n)?),
            WeightSource::Values(v) => Box::new(grid_tuples(v.clone(), n)?),
            WeightSource::Random { count, seed } => Box::new(random_weights(n, *count, *seed)),
            WeightSource::ExtremalOnly => {
                let mut all: Vec<WeightVector> = Vec::new();
                let mut xs = spec.x_grid.base(n);
                xs.extend(spec.k_values.iter().map(|&k| ratio(i64::from(k), 1)));
                for c in &spec.checks {
                    for x in &xs {
                        for w in extremal_candidates(*c, n, x)? {
                            if !all.contains(&w) {
                                all.push(w);
                            }
                        }
                    }
                }
                Box::new(all.into_iter())
            }
        };
        parts.push(Box::new(
            weights.map(move |w| Ok(Unit { n, subject: UnitSubject::Weights(w) })),
        ));
    }
    Ok(Box::new(parts.into_iter().flatten()))
}

/// Records of one unit, plus per-check skip counts.
type UnitResult = (Vec<VerifyRecord>, Vec<(CheckTag, u64)>);

fn evaluate(spec: &SweepSpec, unit: &Unit) -> Result<UnitResult> {
    let n = unit.n;
    let mut out = Vec::new();
    let mut skips = Vec::new();
    match &unit.subject {
        UnitSubject::Walk => {
            let subject = Subject::Walk;
            for x in spec.x_grid.base(n) {
                let bound = tail_bound(n, &x)?.bound;
                if spec.has(CheckTag::HoeffdingCmp) {
                    let h = hoeffding_bound(n, rational_to_f64(&x));
                    let rhs = DyadicProb::from_f64(h)?;
                    let mut r = VerifyRecord::compare(CheckTag::HoeffdingCmp, n, &subject, bound.clone(), rhs)
                        .at_x(&x);
                    r.passed = bound.to_rational() <= r.rhs.to_rational() + hoeffding_tolerance();
                    r.note = Some("float tolerance 2^-40".into());
                    out.push(r);
                }
                if spec.has(CheckTag::KwapienCmp) {
                    let rhs = kwapien_rhs(n, &x)?;
                    out.push(VerifyRecord::compare(CheckTag::KwapienCmp, n, &subject, bound, rhs).at_x(&x));
                }
            }
        }
        UnitSubject::Table(seed) => {
            let subject = Subject::Table(*seed);
            let t = random_odd_lipschitz(n, *seed)?;
            for x in spec.x_grid.base(n) {
                out.push(lipschitz_record(&t, &x, &subject)?);
            }
        }
        UnitSubject::Weights(w) => evaluate_weights(spec, n, w, &mut out, &mut skips)?,
    }
    Ok((out, skips))
}

fn lipschitz_record(t: &LipschitzTable, x: &BigRational, subject: &Subject) -> Result<VerifyRecord> {
    let r = check_lipschitz_bound(t, x)?;
    Ok(VerifyRecord::compare(CheckTag::Lipschitz, t.dimension(), subject, r.lhs, r.rhs.bound).at_x(x))
}

fn evaluate_weights(
    spec: &SweepSpec,
    n: u32,
    w: &WeightVector,
    out: &mut Vec<VerifyRecord>,
    skips: &mut Vec<(CheckTag, u64)>,
) -> Result<()> {
    let subject = Subject::Weights(w.digest());
    let bounded = w.is_bounded();
    let needs_dist = spec.checks.iter().any(|c| {
        matches!(c, CheckTag::Thm1 | CheckTag::Thm2 | CheckTag::Lem1 | CheckTag::Lo)
    }) || matches!(spec.x_grid, XGrid::StepAndAtoms { .. });
    let dist = if needs_dist { Some(distribution(w, Engine::Auto)?) } else { None };
    let xs = spec.x_grid.for_distribution(n, dist.as_ref());
    let prob = |count: u128| DyadicProb::from_count(&BigCount::from(count), n);
    let mut skip = |c: CheckTag, count: usize| skips.push((c, count as u64));

    for &check in &spec.checks {
        match check {
            CheckTag::Thm1 | CheckTag::Thm2 | CheckTag::Lem1 => {
                let applies = bounded && (check != CheckTag::Lem1 || w.all_nonzero());
                if !applies {
                    skip(check, xs.len());
                    continue;
                }
                let d = dist.as_ref().expect("distribution computed");
                for x in &xs {
                    let (lhs, rhs) = match check {
                        CheckTag::Thm1 => (prob(d.tail_count(x))?, tail_bound(n, x)?.bound),
                        CheckTag::Thm2 => (prob(d.point_count(x))?, point_bound_thm2(n, x)?.bound),
                        _ => (prob(d.point_count(x))?, point_bound_lem1(n, x)?),
                    };
                    out.push(VerifyRecord::compare(check, n, &subject, lhs, rhs).at_x(x));
                }
            }
            CheckTag::Lo => {
                if !w.all_at_least_one() {
                    skip(check, spec.k_values.len());
                    continue;
                }
                let d = dist.as_ref().expect("distribution computed");
                for &k in &spec.k_values {
                    let (_, mass) = d.best_window(k);
                    out.push(VerifyRecord::compare(check, n, &subject, prob(mass)?, lo_bound(n, k)?).at_k(k));
                }
            }
            CheckTag::Katona | CheckTag::Milner | CheckTag::Kleitman => {}
            CheckTag::Lipschitz => {
                if !bounded || n > MAX_TABLE_N {
                    skip(check, xs.len());
                    continue;
                }
                let t = LipschitzTable::weighted_sum(w.weights())?;
                for x in &xs {
                    out.push(lipschitz_record(&t, x, &subject)?);
                }
            }
            CheckTag::HoeffdingCmp | CheckTag::KwapienCmp => {}
        }
    }

    let family_checks: Vec<CheckTag> = spec
        .checks
        .iter()
        .copied()
        .filter(|c| matches!(c, CheckTag::Katona | CheckTag::Milner | CheckTag::Kleitman))
        .collect();
    if family_checks.is_empty() {
        return Ok(());
    }
    if !bounded || n > MAX_FAMILY_N {
        for c in family_checks {
            skip(c, xs.len());
        }
        return Ok(());
    }
    let mut family_records: Vec<VerifyRecord> = Vec::new();
    for x in &xs {
        let audit = audit_family(w, x)?;
        if audit.katona.is_none() {
            // k > n: both families are empty and no bound is defined
            for &c in &family_checks {
                skip(c, 1);
            }
            continue;
        }
        for &c in &family_checks {
            match family_record(c, n, &subject, x, &audit)? {
                Some(r) => family_records.push(r),
                None => skip(c, 1),
            }
        }
    }
    // order by check, then x
    family_records.sort_by_key(|r| r.check);
    out.extend(family_records);
    Ok(())
}

fn family_record(
    check: CheckTag,
    n: u32,
    subject: &Subject,
    x: &BigRational,
    a: &FamilyAuditReport,
) -> Result<Option<VerifyRecord>> {
    let count = |c: u64| DyadicProb::from_count(&BigCount::from(c), n);
    let bound = |b: &Option<BigCount>| DyadicProb::from_count(b.as_ref().expect("k <= n"), n);
    let mut failures = Vec::new();
    let r = match check {
        CheckTag::Katona | CheckTag::Kleitman => {
            if let Some((p, q)) = a.geq_k_intersecting.witness() {
                failures.push(format!("F_>=x not {}-intersecting: {p:#b}, {q:#b}", a.k));
            }
            if !a.bridge_tail_ok {
                failures.push("|F_>=x| != 2^n P{S_n >= x}".into());
            }
            if check == CheckTag::Kleitman && !a.diameter_ok {
                failures.push(format!("diameter {:?} > n - k", a.geq_diameter));
            }
            let b = if check == CheckTag::Katona { &a.katona } else { &a.kleitman };
            VerifyRecord::compare(check, n, subject, count(a.geq_size)?, bound(b)?)
        }
        CheckTag::Milner => {
            let Applicable::Yes(antichain) = a.eq_antichain else {
                return Ok(None);
            };
            if let Some((p, q)) = antichain.witness() {
                failures.push(format!("F_x not an antichain: {p:#b}, {q:#b}"));
            }
            if let Some((p, q)) = a.eq_k_intersecting.witness() {
                failures.push(format!("F_x not {}-intersecting: {p:#b}, {q:#b}", a.k));
            }
            if !a.bridge_point_ok {
                failures.push("|F_x| != 2^n P{S_n = x}".into());
            }
            VerifyRecord::compare(check, n, subject, count(a.eq_size)?, bound(&a.milner)?)
        }
        _ => unreachable!("not a family check"),
    };
    Ok(Some(r.at_x(x).structure(failures)))
}

/// Runs a sweep, handing each record to `sink` in the deterministic order.
pub fn run_sweep_streaming(
    spec: &SweepSpec,
    mut sink: impl FnMut(&VerifyRecord),
) -> Result<SweepSummary> {
    spec.validate()?;
    let mut summary = SweepSummary::default();
    let mut iter = units(spec)?;
    let mut batch: Vec<Unit> = Vec::with_capacity(BATCH);
    loop {
        batch.clear();
        while batch.len() < BATCH {
            match iter.next() {
                Some(u) => batch.push(u?),
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        let room = spec.max_units.saturating_sub(summary.units);
        let over_budget = batch.len() as u64 > room;
        batch.truncate(room as usize);
        let results: Vec<Result<UnitResult>> = batch.par_iter().map(|u| evaluate(spec, u)).collect();
        for (unit, result) in batch.iter().zip(results) {
            match result {
                Ok((records, skips)) => {
                    for r in &records {
                        summary.add(r);
                        sink(r);
                    }
                    for (c, count) in skips {
                        summary.skip(c, count);
                    }
                    summary.units += 1;
                }
                Err(Error::Resource { what, limit }) => {
                    summary.truncated = Some(format!(
                        "stopped at n={} after {} units: {what} exceeds the limit {limit}",
                        unit.n, summary.units
                    ));
                    return Ok(summary);
                }
                Err(e) => return Err(e),
            }
        }
        if over_budget {
            summary.truncated = Some(format!(
                "stopped after max_units = {} units",
                spec.max_units
            ));
            return Ok(summary);
        }
    }
    Ok(summary)
}

/// Runs a sweep and keeps every record.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let mut records = Vec::new();
    let summary = run_sweep_streaming(spec, |r| records.push(r.clone()))?;
    Ok(SweepOutcome { records, summary })
}

fn padded(n: u32, value: &BigRational, m: u32) -> WeightVector {
    let mut w = vec![value.clone(); m as usize];
    w.resize(n as usize, BigRational::zero());
    WeightVector::new_unbounded(w)
}

/// Weight vectors at which the inequalities are attained: all ones, all
/// ones with one zero, `x/k` repeated `m` times padded with zeros (`m` the
/// walk length of the point bound) and all `x/k`. For `lo`, `x` is read as
/// `k` and only all ones is returned. Candidates violating a check's
/// hypothesis are left out.
pub fn extremal_candidates(check: CheckTag, n: u32, x: &BigRational) -> Result<Vec<WeightVector>> {
    if !x.is_positive() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let one = BigRational::one();
    if check == CheckTag::Lo {
        return Ok(vec![WeightVector::ones(n as usize)]);
    }
    let k = ceil_i64(x)?;
    let ratio_xk = x / BigRational::from_integer(BigInt::from(k));
    let mut out = vec![WeightVector::ones(n as usize), padded(n, &one, n - 1)];
    if let Ok(r) = point_bound_thm2(n, x) {
        out.push(padded(n, &ratio_xk, r.effective_walk_length));
    }
    out.push(padded(n, &ratio_xk, n));
    let mut dedup: Vec<WeightVector> = Vec::new();
    for w in out {
        if !dedup.contains(&w) {
            dedup.push(w);
        }
    }
    if check == CheckTag::Lem1 {
        dedup.retain(|w| w.all_nonzero());
    }
    Ok(dedup)
}

/// Search space for [`find_max_tail`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchBudget {
    /// Every multiset of weights from `{0, step, ..., 1}`.
    Grid(BigRational),
    /// Random vectors with denominators at most 64.
    Random { count: u64, seed: u64 },
}

/// Non-decreasing index tuples of length `n` over `0..l`.
fn multisets(l: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n).rev().find(|&i| cur[i] + 1 < l) else {
            return out;
        };
        let v = cur[i] + 1;
        for c in &mut cur[i..] {
            *c = v;
        }
    }
}

/// Largest `P{S_n >= x}` found over the search space, with the weights
/// attaining it. The extremal candidates are tried first and win ties.
pub fn find_max_tail(n: u32, x: &BigRational, budget: &SearchBudget) -> Result<(WeightVector, DyadicProb)> {
    let mut pool = extremal_candidates(CheckTag::Thm1, n, x)?;
    match budget {
        SearchBudget::Grid(step) => {
            grid_step_ok(step)?;
            let values = grid_values(step);
            let count = multisets(values.len(), n as usize).len();
            if count > 10_000_000 {
                return Err(Error::resource("multisets in the search grid", 10_000_000));
            }
            pool.extend(multisets(values.len(), n as usize).into_iter().map(|idx| {
                WeightVector::new_unbounded(idx.into_iter().map(|i| values[i].clone()).collect())
            }));
        }
        SearchBudget::Random { count, seed } => {
            pool.extend(random_weights(n, *count, *seed));
        }
    }
    let probs: Vec<DyadicProb> = pool
        .par_iter()
        .map(|w| crate::wsum::tail_prob(w, x))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if p > &probs[best] {
            best = i;
        }
    }
    Ok((pool.swap_remove(best), probs[best].clone()))
}

/// Named sweep collections.
pub fn preset(name: &str) -> Result<Vec<SweepSpec>> {
    use CheckTag::*;
    let half = ratio(1, 2);
    let quarter = ratio(1, 4);
    let lo_values = vec![ratio(1, 1), ratio(5, 4), ratio(3, 2), ratio(2, 1)];
    match name {
        "quick" => Ok(vec![
            SweepSpec::new(1, 6, WeightSource::FullGrid(half.clone()), &[Thm1, Thm2, Lem1, Lipschitz]),
            SweepSpec::new(1, 5, WeightSource::FullGrid(half.clone()), &[Katona, Milner, Kleitman]),
            SweepSpec::new(1, 4, WeightSource::Values(lo_values), &[Lo]),
            SweepSpec::new(1, 8, WeightSource::ExtremalOnly, &[Thm1, Thm2]),
            SweepSpec::new(2, 6, WeightSource::Random { count: 20, seed: 1 }, &[Lipschitz]),
            SweepSpec::new(1, 12, WeightSource::ExtremalOnly, &[HoeffdingCmp, KwapienCmp]),
        ]),
        "full" => Ok(vec![
            SweepSpec::new(1, 6, WeightSource::FullGrid(quarter.clone()), &[Thm1, Thm2, Lem1])
                .with_x_grid(XGrid::Step(quarter.clone())),
            SweepSpec::new(1, 10, WeightSource::ExtremalOnly, &[Thm1, Thm2, Lem1, Lipschitz]),
            SweepSpec::new(1, 6, WeightSource::Values(lo_values), &[Lo]),
            SweepSpec::new(1, 14, WeightSource::Random { count: 36, seed: 2024 }, &[Katona, Milner, Kleitman])
                .with_x_grid(XGrid::StepAndAtoms { step: half.clone(), atoms: 8 }),
            SweepSpec::new(2, 10, WeightSource::Random { count: 1000, seed: 7 }, &[Lipschitz]),
            SweepSpec::new(1, 30, WeightSource::ExtremalOnly, &[HoeffdingCmp, KwapienCmp])
                .with_x_grid(XGrid::Step(quarter)),
        ]),
        other => Err(Error::domain(format!("unknown preset {other:?} (quick, full)"))),
    }
}
