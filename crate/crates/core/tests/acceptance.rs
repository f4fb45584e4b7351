//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p symwalk --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symwalk::bounds::{katona_bound, lo_bound, milner_bound, point_bound_thm2, tail_bound};
use symwalk::exactnum::{ceil_i64, ratio, BigCount, DyadicProb};
use symwalk::lipschitz::{check_lipschitz_bound, LipschitzTable};
use symwalk::verify::{
    extremal_candidates, run_sweep, run_sweep_streaming, CheckTag, Subject, SweepSpec,
    SweepSummary, WeightSource, XGrid,
};
use symwalk::walk::{walk_point, walk_tail};
use symwalk::wsum::{best_interval_prob, distribution, point_prob, tail_prob, Engine, WeightVector};

type Outcome = Result<String, String>;

fn p(num: u64, e: u32) -> DyadicProb {
    DyadicProb::new(num, e).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sweep_clean(s: &SweepSummary) -> Result<(), String> {
    ensure(s.truncated.is_none(), || format!("truncated: {:?}", s.truncated))?;
    ensure(s.ok(), || format!("{} violations, first: {:?}", s.failed(), s.failures.first()))
}

/// 1. Exact values of the bound examples.
fn exact_bound_values() -> Outcome {
    let mut checked = 0;
    let mut eq = |what: String, got: DyadicProb, want: DyadicProb| -> Result<(), String> {
        checked += 1;
        ensure(got == want, || format!("{what}: got {got}, want {want}"))
    };
    for (n, x, want, m) in [(4, ratio(6, 5), p(5, 4), 4), (3, ratio(2, 1), p(1, 2), 2)] {
        let r = tail_bound(n, &x).map_err(|e| e.to_string())?;
        eq(format!("tail_bound({n}, {x})"), r.bound, want)?;
        ensure(r.effective_walk_length == m, || format!("tail_bound({n}, {x}) length"))?;
    }
    eq(
        "tail_bound(7, 1/2)".into(),
        tail_bound(7, &ratio(1, 2)).unwrap().bound,
        p(1, 1),
    )?;
    for (n, x, want, m) in [
        (4, ratio(3, 2), p(4, 4), 4),
        (9, ratio(2, 1), p(4, 4), 4),
        (1, ratio(1, 1), p(1, 1), 1),
    ] {
        let r = point_bound_thm2(n, &x).map_err(|e| e.to_string())?;
        eq(format!("point_bound_thm2({n}, {x})"), r.bound, want)?;
        ensure(r.effective_walk_length == m, || format!("point_bound_thm2({n}, {x}) length"))?;
    }
    for (n, k, want) in [(3, 1, p(3, 3)), (4, 2, p(10, 4)), (1, 1, p(1, 1))] {
        eq(format!("lo_bound({n}, {k})"), lo_bound(n, k).unwrap(), want)?;
    }
    for (n, k, want) in [(3, 1, 4u64), (4, 1, 8), (4, 2, 5)] {
        let got = katona_bound(n, k).unwrap();
        checked += 1;
        ensure(got == BigCount::from(want), || format!("katona_bound({n}, {k}) = {got}"))?;
    }
    for (n, k, want) in [(4, 2, 4u64), (4, 1, 4), (3, 3, 1)] {
        let got = milner_bound(n, k).unwrap();
        checked += 1;
        ensure(got == BigCount::from(want), || format!("milner_bound({n}, {k}) = {got}"))?;
    }
    Ok(format!("{checked} values"))
}

/// 2. Tail bound over the full weight grid.
fn thm1_sweep() -> Outcome {
    let spec = SweepSpec::new(1, 6, WeightSource::FullGrid(ratio(1, 4)), &[CheckTag::Thm1])
        .with_x_grid(XGrid::Step(ratio(1, 4)));
    let out = run_sweep(&spec).map_err(|e| e.to_string())?;
    sweep_clean(&out.summary)?;
    ensure(out.summary.units == 19530, || format!("{} weight vectors", out.summary.units))?;
    // every integer x has a tight case, and the extremal candidates are tight
    for n in 1..=6u32 {
        for k in 1..=i64::from(n) {
            let x = ratio(k, 1);
            let tight: Vec<&Subject> = out
                .records
                .iter()
                .filter(|r| r.n == n && r.x.as_ref() == Some(&x) && r.tight)
                .map(|r| &r.subject)
                .collect();
            let candidates = extremal_candidates(CheckTag::Thm1, n, &x).unwrap();
            let hit = candidates
                .iter()
                .any(|w| tight.contains(&&Subject::Weights(w.digest())));
            ensure(hit, || format!("no tight extremal candidate at n={n} x={k}"))?;
        }
    }
    Ok(format!(
        "{} records, 0 violations, {} tight",
        out.summary.total(),
        out.summary.tight()
    ))
}

/// 3. Point bounds over the grid, and equality of the second at `(x/k) W_m`.
fn point_sweeps() -> Outcome {
    let spec = SweepSpec::new(1, 6, WeightSource::FullGrid(ratio(1, 4)), &[CheckTag::Thm2, CheckTag::Lem1])
        .with_x_grid(XGrid::Step(ratio(1, 4)));
    let s = run_sweep_streaming(&spec, |_| {}).map_err(|e| e.to_string())?;
    sweep_clean(&s)?;
    let lem1 = s.per_check[&CheckTag::Lem1];
    ensure(lem1.total > 0, || "no strictly positive vectors".into())?;
    let mut equalities = 0;
    for n in 1..=10u32 {
        for twice_x in 1..=2 * i64::from(n) {
            let x = ratio(twice_x, 2);
            let r = point_bound_thm2(n, &x).map_err(|e| e.to_string())?;
            let k = ceil_i64(&x).unwrap();
            let a = &x / BigRational::from_integer(BigInt::from(k));
            let mut w = vec![a; r.effective_walk_length as usize];
            w.resize(n as usize, BigRational::zero());
            let w = WeightVector::new(w).map_err(|e| e.to_string())?;
            let got = point_prob(&w, &x).map_err(|e| e.to_string())?;
            ensure(got == r.bound, || format!("no equality at n={n} x={x}: {got} < {}", r.bound))?;
            equalities += 1;
        }
    }
    Ok(format!(
        "{} thm2 + {} lem1 records ({} lem1 points skipped for zero weights), {equalities} equalities",
        s.per_check[&CheckTag::Thm2].total,
        lem1.total,
        lem1.skipped
    ))
}

/// 4. Littlewood–Offord.
fn littlewood_offord() -> Outcome {
    let values = vec![ratio(1, 1), ratio(5, 4), ratio(3, 2), ratio(2, 1)];
    let spec = SweepSpec::new(1, 6, WeightSource::Values(values), &[CheckTag::Lo])
        .with_k_values(vec![1, 2, 3]);
    let s = run_sweep_streaming(&spec, |_| {}).map_err(|e| e.to_string())?;
    sweep_clean(&s)?;
    for n in 1..=6u32 {
        for k in 1..=3u32 {
            let r = best_interval_prob(&WeightVector::ones(n as usize), k).map_err(|e| e.to_string())?;
            let b = lo_bound(n, k).unwrap();
            ensure(r.prob == b, || format!("all ones n={n} k={k}: {} != {b}", r.prob))?;
        }
    }
    Ok(format!("{} records, equality at all ones", s.total()))
}

/// 5. Family structure on random weights.
fn family_structure() -> Outcome {
    let spec = SweepSpec::new(
        1,
        14,
        WeightSource::Random { count: 36, seed: 2024 },
        &[CheckTag::Katona, CheckTag::Milner, CheckTag::Kleitman],
    )
    .with_x_grid(XGrid::StepAndAtoms { step: ratio(1, 2), atoms: 8 });
    let s = run_sweep_streaming(&spec, |_| {}).map_err(|e| e.to_string())?;
    sweep_clean(&s)?;
    ensure(s.units >= 500, || format!("only {} weight vectors", s.units))?;
    let milner = s.per_check[&CheckTag::Milner];
    ensure(milner.total > 0, || "no antichain checks ran".into())?;
    Ok(format!(
        "{} weight vectors, {} family audits, {} antichain checks",
        s.units,
        s.per_check[&CheckTag::Katona].total,
        milner.total
    ))
}

/// 6. Family bounds as walk probabilities.
fn identities() -> Outcome {
    let mut count = 0;
    for n in 1..=30u32 {
        for k in 1..=n {
            let ki = i64::from(k);
            let x = ratio(ki, 1);
            let scale = |d: DyadicProb| d.numerator_at(n);
            let katona = katona_bound(n, k).unwrap();
            let milner = milner_bound(n, k).unwrap();
            let (tail, layer) = if (n + k) % 2 == 0 {
                (walk_tail(n, &x), walk_point(n, ki))
            } else {
                (walk_tail(n - 1, &x), walk_point(n, ki + 1))
            };
            ensure(katona.value() == &scale(tail), || format!("katona n={n} k={k}"))?;
            ensure(milner.value() == &scale(layer), || format!("milner n={n} k={k}"))?;
            count += 2;
        }
    }
    Ok(format!("{count} identities"))
}

/// 7. `j ↦ P{W_j = k}` peaks at `j = k²`.
fn unimodality() -> Outcome {
    let mut pairs = 0;
    for k in 1..=10i64 {
        let mut j = k;
        while j + 2 <= 120 {
            let a = walk_point(j as u32, k);
            let b = walk_point(j as u32 + 2, k);
            ensure((a <= b) == (j + 2 <= k * k), || format!("k={k} j={j}"))?;
            pairs += 1;
            j += 2;
        }
        let peak = walk_point((k * k) as u32, k);
        let mut j = k;
        while j <= 120 {
            let v = walk_point(j as u32, k);
            ensure(v <= peak, || format!("P{{W_{j} = {k}}} above the peak"))?;
            ensure(j <= k * k || v < peak, || format!("k={k}: tie beyond k² at j={j}"))?;
            j += 2;
        }
    }
    Ok(format!("{pairs} consecutive pairs"))
}

/// 8. Random odd Lipschitz functions.
fn lipschitz_bound() -> Outcome {
    let spec = SweepSpec::new(2, 10, WeightSource::Random { count: 1000, seed: 7 }, &[CheckTag::Lipschitz]);
    let s = run_sweep_streaming(&spec, |_| {}).map_err(|e| e.to_string())?;
    sweep_clean(&s)?;
    ensure(s.units == 9000, || format!("{} tables", s.units))?;
    for n in 2..=10u32 {
        let t = LipschitzTable::coordinate_sum(n).unwrap();
        for k in 1..=n {
            let r = check_lipschitz_bound(&t, &ratio(i64::from(k), 1)).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("coordinate sum n={n} x={k} fails"))?;
            if (n + k) % 2 == 0 {
                ensure(r.tight, || format!("coordinate sum n={n} x={k} not tight"))?;
            }
        }
    }
    Ok(format!("{} tables, {} records", s.units, s.total()))
}

/// 9. Hoeffding and Kwapień comparisons.
fn comparisons() -> Outcome {
    let spec = SweepSpec::new(1, 30, WeightSource::ExtremalOnly, &[CheckTag::HoeffdingCmp, CheckTag::KwapienCmp])
        .with_x_grid(XGrid::Step(ratio(1, 4)));
    let s = run_sweep_streaming(&spec, |_| {}).map_err(|e| e.to_string())?;
    sweep_clean(&s)?;
    Ok(format!(
        "{} Hoeffding + {} Kwapień records",
        s.per_check[&CheckTag::HoeffdingCmp].total,
        s.per_check[&CheckTag::KwapienCmp].total
    ))
}

/// 10. Distribution engines agree.
fn engines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..200 {
        let n = rng.gen_range(1..=16usize);
        let w: Vec<BigRational> = (0..n)
            .map(|_| {
                let q = rng.gen_range(1..=64i64);
                ratio(rng.gen_range(-q..=q), q)
            })
            .collect();
        let w = WeightVector::new(w).map_err(|e| e.to_string())?;
        let a = distribution(&w, Engine::Enumerate).map_err(|e| e.to_string())?;
        let b = distribution(&w, Engine::Convolve).map_err(|e| e.to_string())?;
        let c = distribution(&w, Engine::MeetInMiddle).map_err(|e| e.to_string())?;
        ensure(a == b && b == c, || format!("instance {i} ({w}) differs"))?;
        let x = ratio(rng.gen_range(1..=8), 4);
        ensure(a.tail_prob(&x) == tail_prob(&w, &x).unwrap(), || format!("instance {i} query"))?;
    }
    Ok("200 instances".into())
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact bound values", Duration::from_secs(1), exact_bound_values),
        ("tail bound sweep", Duration::from_secs(120), thm1_sweep),
        ("point bound sweeps", Duration::from_secs(120), point_sweeps),
        ("Littlewood-Offord", Duration::from_secs(60), littlewood_offord),
        ("family structure", Duration::from_secs(120), family_structure),
        ("family bound identities", Duration::from_secs(5), identities),
        ("unimodality", Duration::from_secs(5), unimodality),
        ("Lipschitz bound", Duration::from_secs(300), lipschitz_bound),
        ("comparison claims", Duration::from_secs(10), comparisons),
        ("engine equivalence", Duration::from_secs(60), engines),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed < limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {limit:?} limit")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "[{status}] {:>2}. {name:<24} {:>8.3}s (limit {:>4}s)  {detail}",
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
