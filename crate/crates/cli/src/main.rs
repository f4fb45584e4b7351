//! `symwalk`: exact tail bounds for weighted Rademacher sums.
//!
//! Rationals on the command line are exact: `0.1` is `1/10`, `3/2` is
//! `3/2`. Exponent notation is rejected.

mod output;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;

use symwalk::bounds::{
    family_bound, hoeffding_bound, kwapien_rhs, lo_bound, point_bound_lem1, point_bound_thm2,
    rational_to_f64, tail_bound, BoundReport, TheoremTag,
};
use symwalk::error::Error;
use symwalk::exactnum::{format_rational, parse_rational, DyadicProb};
use symwalk::families::{audit_family, build_family_eq, build_family_geq};
use symwalk::lipschitz::{check_lipschitz_bound, diagnose_non_odd, random_odd_lipschitz, LipschitzTable};
use symwalk::verify::{find_max_tail, preset, run_sweep_streaming, SearchBudget, SweepSpec, SweepSummary};
use symwalk::wsum::{best_interval_prob, distribution, point_prob, tail_prob, Engine, WeightVector};

use output::{human_prob, render, Format, Row};

#[derive(Parser)]
#[command(name = "symwalk", version, about = "Exact tail bounds for weighted Rademacher sums")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Fractional digits in decimal renderings.
    #[arg(long, global = true, default_value_t = 12)]
    digits: usize,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SYMWALK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds in terms of the simple random walk.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Exact law of S_n = Σ a_i ε_i.
    Dist {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, default_value = "auto")]
        engine: String,
    },
    /// Exact probabilities for given weights.
    #[command(subcommand)]
    Prob(ProbCmd),
    /// Set families of sign patterns.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Odd 1-Lipschitz functions on the cube.
    #[command(subcommand)]
    Lipschitz(LipschitzCmd),
    /// Run a verification sweep.
    Verify {
        /// Named sweep collection: quick or full.
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        /// Sweep description in TOML.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Write every record to this file as JSON lines.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// CSV comparing the best tail found with the bounds, over a range of x.
    Curve {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        x_min: BigRational,
        #[arg(long, value_parser = rational)]
        x_max: BigRational,
        #[arg(long, value_parser = rational)]
        step: BigRational,
        /// Weight grid step for the search.
        #[arg(long, value_parser = rational, default_value = "1/4")]
        search_step: BigRational,
        /// Search random weights instead of the grid.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Sharp bound on P{S_n >= x}.
    Tail {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        x: BigRational,
    },
    /// Sharp bound on P{S_n = x}.
    Point {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        x: BigRational,
        /// Use the bound for strictly positive weights.
        #[arg(long)]
        strict_positive: bool,
        /// Weights to check against the hypothesis.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Littlewood–Offord bound on P{S_n ∈ (x-k, x+k]} for |a_i| >= 1.
    Lo {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
    },
    /// Extremal family sizes.
    Family {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        which: Which,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Katona,
    Milner,
    Kleitman,
}

#[derive(Args)]
struct WeightsArg {
    /// Comma-separated list (`1,1,0.5`) or a file with one weight per line.
    #[arg(long)]
    weights: String,
}

#[derive(Subcommand)]
enum ProbCmd {
    /// P{S_n >= x}.
    Tail {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_parser = rational)]
        x: BigRational,
    },
    /// P{S_n = x}.
    Point {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_parser = rational)]
        x: BigRational,
    },
    /// max over x of P{S_n ∈ (x-k, x+k]}.
    Interval {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Structure and size checks of F_{>=x} and F_x.
    Audit {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_parser = rational)]
        x: BigRational,
    },
    /// Members of F_{>=x} or F_x as bit strings.
    Export {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_parser = rational)]
        x: BigRational,
        #[arg(long, value_enum, default_value_t = Member::Geq)]
        which: Member,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Member {
    Geq,
    Eq,
}

#[derive(Subcommand)]
enum LipschitzCmd {
    /// Random odd 1-Lipschitz table.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare P{f >= x} with the tail bound.
    Check {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_parser = rational)]
        x: BigRational,
        /// Accept tables that are not odd and only report the comparison.
        #[arg(long)]
        diagnose: bool,
    },
}

fn rational(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Failures mapped to exit codes.
#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(PathBuf, io::Error),
    /// A hypothesis of the requested bound does not hold.
    Hypothesis(String),
    /// A checked inequality failed.
    Failed(String),
    /// A sweep stopped early.
    Truncated(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Core(Error::Resource { .. }) | CliError::Truncated(_) => 3,
            CliError::Core(_) | CliError::Io(..) => 2,
            CliError::Hypothesis(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Hypothesis(m) => write!(f, "warning: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
            CliError::Truncated(m) => write!(f, "truncated: {m}"),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

struct Ctx {
    format: Format,
    digits: usize,
    out: BufWriter<io::Stdout>,
}

impl Ctx {
    fn emit(&mut self, rows: &[Row]) -> CliResult {
        let text = render(rows, self.format, self.digits);
        self.write(&text)
    }

    fn write(&mut self, text: &str) -> CliResult {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_weights(arg: &str, bounded: bool) -> CliResult<WeightVector> {
    let path = Path::new(arg);
    let values = if path.is_file() {
        WeightVector::parse_text(&read_file(path)?)?
    } else {
        WeightVector::parse_list(arg)?
    };
    Ok(if bounded {
        WeightVector::new(values)?
    } else {
        WeightVector::new_unbounded(values)
    })
}

fn bound_row(n: u32, x: &BigRational, r: &BoundReport) -> Row {
    Row::new(r.to_string())
        .int("n", n)
        .text("x", format_rational(x))
        .prob("bound", &r.bound)
        .int("effective_walk_length", r.effective_walk_length)
        .text("parity_case", r.parity_case.to_string())
        .text("theorem", tag_name(r.theorem_tag))
}

fn tag_name(t: TheoremTag) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn run(cli: Cli) -> CliResult {
    if let Some(t) = cli.threads {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut ctx = Ctx {
        format: cli.format,
        digits: cli.digits,
        out: BufWriter::new(io::stdout()),
    };
    let result = dispatch(cli.command, &mut ctx);
    let flushed = ctx.out.flush().map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e));
    result.and(flushed)
}

fn dispatch(command: Command, ctx: &mut Ctx) -> CliResult {
    let d = ctx.digits;
    match command {
        Command::Bound(b) => bound(b, ctx),
        Command::Dist { weights, engine } => {
            let w = load_weights(&weights.weights, false)?;
            let engine: Engine = engine.parse()?;
            let dist = distribution(&w, engine)?;
            let n = w.len() as u32;
            let rows: Vec<Row> = dist
                .support()
                .into_iter()
                .map(|(v, c)| {
                    let p = DyadicProb::from_count(&c, n).expect("count <= 2^n");
                    Row::new(format!("{:>12}  {:>12}  {}", format_rational(&v), c, human_prob(&p, d)))
                        .text("value", format_rational(&v))
                        .text("count", c.to_string())
                        .prob("prob", &p)
                })
                .collect();
            if ctx.format == Format::Json {
                let support: Vec<_> = rows.iter().map(|r| r.to_json(d)).collect();
                let v = json!({"weights": w.digest(), "n": n, "support": support});
                ctx.write(&format!("{}\n", serde_json::to_string_pretty(&v).unwrap_or_default()))
            } else {
                ctx.emit(&rows)
            }
        }
        Command::Prob(p) => prob(p, ctx),
        Command::Family(f) => family(f, ctx),
        Command::Lipschitz(l) => lipschitz(l, ctx),
        Command::Verify { preset: name, spec, records } => verify(name, spec, records, ctx),
        Command::Curve {
            n,
            x_min,
            x_max,
            step,
            search_step,
            random,
            seed,
        } => {
            if step <= BigRational::from_integer(BigInt::from(0)) {
                return Err(Error::Domain("step must be positive".into()).into());
            }
            let budget = match random {
                Some(count) => SearchBudget::Random { count, seed },
                None => SearchBudget::Grid(search_step),
            };
            let mut text = String::from(
                "x,exact_max_found,thm1_bound,hoeffding,kwapien,exact_max_found_decimal,thm1_bound_decimal,kwapien_decimal,max_weights\n",
            );
            let mut x = x_min;
            while x <= x_max {
                let (w, best) = find_max_tail(n, &x, &budget)?;
                let thm1 = tail_bound(n, &x)?.bound;
                let h = hoeffding_bound(n, rational_to_f64(&x));
                let kw = kwapien_rhs(n, &x)?;
                text.push_str(&format!(
                    "{},{},{},{:?},{},{},{},{},\"{}\"\n",
                    format_rational(&x),
                    best.to_power_form(),
                    thm1.to_power_form(),
                    h,
                    kw.to_power_form(),
                    best.to_decimal_auto(d),
                    thm1.to_decimal_auto(d),
                    kw.to_decimal_auto(d),
                    w.digest()
                ));
                x += &step;
            }
            ctx.write(&text)
        }
    }
}

fn bound(cmd: BoundCmd, ctx: &mut Ctx) -> CliResult {
    let d = ctx.digits;
    match cmd {
        BoundCmd::Tail { n, x } => {
            let r = tail_bound(n, &x)?;
            ctx.emit(&[bound_row(n, &x, &r)])
        }
        BoundCmd::Point {
            n,
            x,
            strict_positive,
            weights,
        } => {
            if strict_positive {
                let p = point_bound_lem1(n, &x)?;
                let row = Row::new(human_prob(&p, d))
                    .int("n", n)
                    .text("x", format_rational(&x))
                    .prob("bound", &p)
                    .text("theorem", tag_name(TheoremTag::LemmaLem1));
                ctx.emit(&[row])?;
                if let Some(ws) = weights {
                    let w = WeightVector::parse_list(&ws)?;
                    if let Some(bad) = w.iter().find(|a| *a <= &BigRational::from_integer(BigInt::from(0))) {
                        return Err(CliError::Hypothesis(format!(
                            "--strict-positive needs a_i > 0, got {}",
                            format_rational(bad)
                        )));
                    }
                }
                Ok(())
            } else {
                let r = point_bound_thm2(n, &x)?;
                ctx.emit(&[bound_row(n, &x, &r)])
            }
        }
        BoundCmd::Lo { n, k } => {
            let p = lo_bound(n, k)?;
            let row = Row::new(human_prob(&p, d))
                .int("n", n)
                .int("k", k)
                .prob("bound", &p)
                .text("theorem", tag_name(TheoremTag::LittlewoodOfford));
            ctx.emit(&[row])
        }
        BoundCmd::Family { n, k, which } => {
            let tag = match which {
                Which::Katona => TheoremTag::Katona,
                Which::Milner => TheoremTag::Milner,
                Which::Kleitman => TheoremTag::Kleitman,
            };
            let b = family_bound(tag, n, k)?;
            let row = Row::new(format!("{} sets, {}", b.count, human_prob(&b.prob, d)))
                .int("n", n)
                .int("k", k)
                .text("count", b.count.to_string())
                .prob("prob", &b.prob)
                .text("theorem", tag_name(tag));
            ctx.emit(&[row])
        }
    }
}

fn prob(cmd: ProbCmd, ctx: &mut Ctx) -> CliResult {
    let d = ctx.digits;
    let (row, w) = match cmd {
        ProbCmd::Tail { weights, x } => {
            let w = load_weights(&weights.weights, false)?;
            let p = tail_prob(&w, &x)?;
            (Row::new(human_prob(&p, d)).text("x", format_rational(&x)).prob("prob", &p), w)
        }
        ProbCmd::Point { weights, x } => {
            let w = load_weights(&weights.weights, false)?;
            let p = point_prob(&w, &x)?;
            (Row::new(human_prob(&p, d)).text("x", format_rational(&x)).prob("prob", &p), w)
        }
        ProbCmd::Interval { weights, k } => {
            let w = load_weights(&weights.weights, false)?;
            let r = best_interval_prob(&w, k)?;
            let row = Row::new(r.to_string())
                .int("k", k)
                .text("x_star", format_rational(&r.x_star))
                .prob("prob", &r.prob)
                .flag("hypothesis_satisfied", r.hypothesis_satisfied);
            (row, w)
        }
    };
    ctx.emit(&[row.text("weights", w.digest())])
}

fn family(cmd: FamilyCmd, ctx: &mut Ctx) -> CliResult {
    match cmd {
        FamilyCmd::Audit { weights, x } => {
            let w = load_weights(&weights.weights, true)?;
            let r = audit_family(&w, &x)?;
            let j = r.to_json();
            match ctx.format {
                Format::Json => ctx.write(&format!("{}\n", serde_json::to_string_pretty(&j).unwrap_or_default()))?,
                Format::Csv => {
                    let obj = j.as_object().expect("audit is an object");
                    let header: Vec<&str> = obj.keys().map(String::as_str).collect();
                    let row: Vec<String> = obj
                        .values()
                        .map(|v| match v {
                            serde_json::Value::Object(o) => output::csv_field(&o["holds"]),
                            other => output::csv_field(other),
                        })
                        .collect();
                    ctx.write(&format!("{}\n{}\n", header.join(","), row.join(",")))?
                }
                Format::Human => {
                    let mut s = String::new();
                    for (k, v) in j.as_object().expect("audit is an object") {
                        s.push_str(&format!("{k:<20} {v}\n"));
                    }
                    ctx.write(&s)?
                }
            }
            if !r.all_hold() {
                return Err(CliError::Failed("family audit found a violated statement".into()));
            }
            Ok(())
        }
        FamilyCmd::Export { weights, x, which } => {
            let w = load_weights(&weights.weights, true)?;
            let f = match which {
                Member::Geq => build_family_geq(&w, &x)?,
                Member::Eq => build_family_eq(&w, &x)?,
            };
            ctx.write(&f.to_bitstrings())
        }
    }
}

fn lipschitz(cmd: LipschitzCmd, ctx: &mut Ctx) -> CliResult {
    match cmd {
        LipschitzCmd::Gen { n, seed, out } => {
            let t = random_odd_lipschitz(n, seed)?;
            match out {
                Some(path) => fs::write(&path, t.to_text()).map_err(|e| CliError::Io(path, e)),
                None => ctx.write(&t.to_text()),
            }
        }
        LipschitzCmd::Check { table, x, diagnose } => {
            let t = LipschitzTable::parse_text(&read_file(&table)?)?;
            let r = if diagnose {
                diagnose_non_odd(&t, &x)?
            } else {
                check_lipschitz_bound(&t, &x)?
            };
            let row = Row::new(format!("{r}\nslack {}", format_rational(&r.slack)))
                .int("n", r.n)
                .text("x", format_rational(&x))
                .prob("lhs", &r.lhs)
                .prob("rhs", &r.rhs.bound)
                .text("slack", format_rational(&r.slack))
                .flag("passed", r.passed)
                .flag("tight", r.tight)
                .flag("odd", r.odd);
            ctx.emit(&[row])?;
            if !r.passed && r.odd {
                return Err(CliError::Failed(format!("P{{f >= x}} = {} exceeds the bound", r.lhs)));
            }
            Ok(())
        }
    }
}

fn verify(name: Option<String>, spec: Option<PathBuf>, records: Option<PathBuf>, ctx: &mut Ctx) -> CliResult {
    let specs = match (name, spec) {
        (Some(name), _) => preset(&name)?,
        (None, Some(path)) => vec![SweepSpec::from_toml(&read_file(&path)?)?],
        (None, None) => unreachable!("clap requires one of --preset/--spec"),
    };
    let mut sink: Option<(PathBuf, BufWriter<fs::File>)> = match records {
        Some(path) => {
            let f = fs::File::create(&path).map_err(|e| CliError::Io(path.clone(), e))?;
            Some((path, BufWriter::new(f)))
        }
        None => None,
    };
    let mut summary = SweepSummary::default();
    let mut io_error: Option<CliError> = None;
    for spec in &specs {
        let s = run_sweep_streaming(spec, |r| {
            if let (Some((path, w)), None) = (sink.as_mut(), io_error.as_ref()) {
                if let Err(e) = writeln!(w, "{}", r.to_json()) {
                    io_error = Some(CliError::Io(path.clone(), e));
                }
            }
        })?;
        summary.merge(s);
    }
    if let Some(e) = io_error {
        return Err(e);
    }
    if let Some((path, mut w)) = sink {
        w.flush().map_err(|e| CliError::Io(path, e))?;
    }
    match ctx.format {
        Format::Human => ctx.write(&summary.to_string())?,
        Format::Csv => ctx.write(&summary.to_csv())?,
        Format::Json => ctx.write(&format!("{}\n", summary.to_json()))?,
    }
    if !summary.ok() {
        return Err(CliError::Failed(format!("{} failing records", summary.failed())));
    }
    if let Some(t) = summary.truncated {
        return Err(CliError::Truncated(t));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
