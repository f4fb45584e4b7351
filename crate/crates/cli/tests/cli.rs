use std::process::{Command, Output};

use symwalk::exactnum::DyadicProb;

fn symwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symwalk"))
        .args(args)
        .env_remove("SYMWALK_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = symwalk(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    symwalk(args).status.code().unwrap()
}

fn dyadic(s: &str) -> DyadicProb {
    s.parse().unwrap()
}

#[test]
fn bound_tail_example() {
    assert_eq!(stdout(&["bound", "tail", "--n", "3", "--x", "2"]), "1/4 (0.25) [odd case, W_2]\n");
}

#[test]
fn bound_point_and_family() {
    assert_eq!(
        stdout(&["bound", "point", "--n", "4", "--x", "3/2"]),
        "1/4 (0.25) [even case, W_4]\n"
    );
    assert_eq!(
        stdout(&["bound", "point", "--n", "5", "--x", "1.5", "--strict-positive"]),
        "5/32 (0.15625)\n"
    );
    assert_eq!(
        stdout(&["bound", "family", "--n", "4", "--k", "2", "--which", "katona"]),
        "5 sets, 5/16 (0.3125)\n"
    );
    assert_eq!(stdout(&["bound", "lo", "--n", "3", "--k", "1"]), "3/8 (0.375)\n");
}

#[test]
fn prob_interval_maximizes_over_all_x() {
    // the window (-3/2, 1/2] holds four of the eight patterns
    assert_eq!(
        stdout(&["prob", "interval", "--weights", "1,1,0.5", "--k", "1"]),
        "1/2 at x*=-1/2 (hypothesis not satisfied: some |a_i| < 1)\n"
    );
    assert_eq!(
        stdout(&["prob", "interval", "--weights", "1,1,1", "--k", "1"]),
        "3/8 at x*=-2\n"
    );
}

#[test]
fn weights_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    std::fs::write(&path, "# weights\n1\n1\n1/2\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["prob", "tail", "--weights", p, "--x", "3/2"]), "1/4 (0.25)\n");
    assert_eq!(
        stdout(&["prob", "point", "--weights", p, "--x", "1/2"]),
        "1/4 (0.25)\n"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["bound", "tail", "--n", "3", "--x", "1e3"]), 2);
    assert_eq!(code(&["prob", "tail", "--weights", "1,x", "--x", "1"]), 2);
    assert_eq!(code(&["bound", "tail", "--n", "3", "--x", "-1"]), 2);
    let big = vec!["1"; 50].join(",");
    assert_eq!(code(&["dist", "--weights", &big, "--engine", "enumerate"]), 3);
    assert_eq!(
        code(&["bound", "point", "--n", "3", "--x", "1", "--strict-positive", "--weights", "1,0,1"]),
        4
    );
    assert_eq!(code(&["verify", "--preset", "nope"]), 2);
}

#[test]
fn csv_and_json_round_trip() {
    let csv = stdout(&["dist", "--weights", "1,1/3,1/2", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("value,count,prob,prob_decimal"));
    let mut total = DyadicProb::zero();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let p = dyadic(cols[2]);
        assert_eq!(dyadic(cols[3]), p);
        total = total.checked_add(&p).unwrap();
    }
    assert_eq!(total, DyadicProb::one());

    let json = stdout(&["bound", "tail", "--n", "7", "--x", "5/2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let p = dyadic(v["bound"].as_str().unwrap());
    assert_eq!(p, dyadic("29/128"));
    assert_eq!(dyadic(v["bound_decimal"].as_str().unwrap()), p);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--preset", "quick", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["curve", "--n", "5", "--x-min", "1/2", "--x-max", "5", "--step", "1/2"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn verify_quick_passes_and_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("r.jsonl");
    let out = stdout(&["verify", "--preset", "quick", "--records", records.to_str().unwrap()]);
    assert!(out.contains(" 0 failed"), "{out}");
    let text = std::fs::read_to_string(&records).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["check"], "thm1");
    for line in text.lines().take(2000) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let lhs = dyadic(v["lhs"].as_str().unwrap());
        let rhs = dyadic(v["rhs"].as_str().unwrap());
        assert_eq!(v["passed"], lhs <= rhs);
        assert_eq!(v["tight"], lhs == rhs);
    }
}

#[test]
fn verify_spec_file_and_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    std::fs::write(
        &spec,
        "n_max = 4\nchecks = [\"thm1\", \"kwapien_cmp\"]\n[weights]\nsource = \"full_grid\"\nstep = \"1/2\"\n",
    )
    .unwrap();
    let s = spec.to_str().unwrap();
    let csv = stdout(&["verify", "--spec", s, "--format", "csv"]);
    assert!(csv.starts_with("check,total,passed,failed,tight,skipped\nthm1,"));
    std::fs::write(
        &spec,
        "n_max = 4\nchecks = [\"thm1\"]\nmax_units = 5\n[weights]\nsource = \"full_grid\"\nstep = \"1/2\"\n",
    )
    .unwrap();
    assert_eq!(code(&["verify", "--spec", s]), 3);
}

#[test]
fn lipschitz_gen_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.txt");
    let t = table.to_str().unwrap();
    stdout(&["lipschitz", "gen", "--n", "5", "--seed", "3", "--out", t]);
    assert_eq!(std::fs::read_to_string(&table).unwrap().lines().count(), 32);
    let json = stdout(&["lipschitz", "check", "--table", t, "--x", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["odd"], true);

    let constant = dir.path().join("c.txt");
    std::fs::write(&constant, "00 2\n01 2\n10 2\n11 2\n").unwrap();
    let c = constant.to_str().unwrap();
    assert_eq!(code(&["lipschitz", "check", "--table", c, "--x", "1"]), 2);
    let out = stdout(&["lipschitz", "check", "--table", c, "--x", "1", "--diagnose"]);
    assert!(out.contains("VIOLATED"));
}

#[test]
fn family_audit_and_export() {
    let json = stdout(&["family", "audit", "--weights", "1,1,1/2", "--x", "3/2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["geq_size"], 2);
    assert_eq!(v["katona_bound"], "2");
    assert_eq!(v["all_hold"], true);
    assert_eq!(
        stdout(&["family", "export", "--weights", "1,1,1/2", "--x", "1/2", "--which", "eq"]),
        "011\n101\n"
    );
}

#[test]
fn curve_columns() {
    let csv = stdout(&["curve", "--n", "3", "--x-min", "1", "--x-max", "3", "--step", "1"]);
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("x,exact_max_found,thm1_bound,hoeffding,kwapien"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        // the grid search reaches the sharp bound at integer x
        assert_eq!(dyadic(cols[1]), dyadic(cols[2]));
        assert!(dyadic(cols[2]) <= dyadic(cols[4]));
        let h: f64 = cols[3].parse().unwrap();
        assert!(dyadic(cols[2]).to_f64() <= h);
    }
}

#[test]
fn thread_env_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_symwalk"))
        .args(["bound", "tail", "--n", "3", "--x", "2"])
        .env("SYMWALK_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}
