use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ellipsephic::export::{self, parse_csv};

const BIN: &str = env!("CARGO_BIN_EXE_ellipsephic");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn count_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["count", "digit_set=p=3;digits=0,1", "k=1", "s=2", "X=9", "method=brute"],
    );
    assert_eq!(
        read(dir.path(), "count.csv"),
        "# config: X=9 digit_set=p=3;digits=0,1 k=1 method=brute s=2\n\
         X,Y,s,k,count,method,seconds\n\
         9,4,2,1,28,brute,0.000000\n"
    );
}

#[test]
fn invalid_base_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["enumerate", "digit_set=p=4;digits=0,1", "X=10"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error kind=validation msg="));
    assert!(stderr.contains("base not an odd prime"));
    assert!(!dir.path().join("enumerate.csv").exists());
}

#[test]
fn unknown_and_missing_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "waring",
            "digit_set=p=5;digits=0,1,4",
            "s=2",
            "k=2",
            "X=9",
            "frobnicate=1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["waring", "digit_set=p=5;digits=0,1,4", "s=2", "k=2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing key X"));
}

#[test]
fn budget_refusal_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "count",
            "digit_set=p=3;digits=0,1",
            "k=1",
            "s=3",
            "X=81",
            "method=brute",
            "--budget-tuples",
            "1000",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=budget "));
}

#[test]
fn fit_recovers_square_growth() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    for y in [4u64, 8, 16, 32, 64] {
        rows.push(vec![
            (y * 3).to_string(),
            y.to_string(),
            "2".into(),
            "1".into(),
            (y * y).to_string(),
            "mitm".into(),
            "0".into(),
        ]);
    }
    let mut buf = Vec::new();
    export::write_csv(&mut buf, "synthetic", &export::COUNT_SERIES, rows).unwrap();
    let input = dir.path().join("series.csv");
    fs::write(&input, buf).unwrap();
    let setting = format!("input={}", input.display());
    ok(dir.path(), &["fit", &setting]);
    let parsed = parse_csv(&read(dir.path(), "fit.csv")).unwrap();
    assert_eq!(parsed.schema, export::FIT);
    let slope: f64 = parsed.column("slope").unwrap()[0].parse().unwrap();
    assert!((slope - 2.0).abs() < 1e-12);
    assert_eq!(parsed.column("points").unwrap(), vec!["5"]);
}

#[test]
fn config_file_header_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# Waring run\ndigit_set=p=5;digits=0,1,4\ns=2 k=2\nX=625   # 5^4\noutput=w\n",
    )
    .unwrap();
    ok(dir.path(), &["waring", "--config", cfg.to_str().unwrap()]);
    let csv = read(dir.path(), "w.csv");
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "# config: X=625 digit_set=p=5;digits=0,1,4 k=2 output=w s=2");
    let json = read(dir.path(), "w.json");
    let mut lines = json.lines();
    assert_eq!(lines.next(), Some(header));
    let body = lines.next().unwrap();
    assert!(body.contains("\"sumR2\":101"));
    assert!(body.contains("\"N\":29"));

    // Command-line settings override the file and the header follows.
    ok(dir.path(), &["waring", "--config", cfg.to_str().unwrap(), "X=100"]);
    assert!(read(dir.path(), "w.csv").starts_with("# config: X=100 "));
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let runs: &[&[&str]] = &[
        &[
            "count",
            "digit_set=p=5;digits=0,1,4",
            "k=2",
            "s=1..3",
            "X=5^2..5^3",
            "histogram=on",
        ],
        &[
            "congruence",
            "digit_set=p=3;digits=0,1",
            "k=1",
            "s=2",
            "B=2..3",
            "method=grid",
        ],
        &[
            "congruence",
            "digit_set=p=3;digits=0,1",
            "k=2",
            "s=3",
            "B=2",
            "sweep=k",
            "t=1",
            "r=1",
            "a=1",
            "b=1,2",
        ],
        &["lift", "digit_set=p=3;digits=0,1", "t=2", "d=3"],
        &["etstar", "t=2", "N=5000"],
    ];
    for args in runs {
        let one = tempfile::tempdir().unwrap();
        let many = tempfile::tempdir().unwrap();
        let mut a = args.to_vec();
        a.extend(["--workers", "1"]);
        ok(one.path(), &a);
        let mut b = args.to_vec();
        b.extend(["--workers", "4"]);
        ok(many.path(), &b);
        let mut names: Vec<_> = fs::read_dir(one.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let x = fs::read(one.path().join(&name)).unwrap();
            let y = fs::read(many.path().join(&name)).unwrap();
            assert_eq!(x, y, "{args:?}: {name:?} differs");
            let text = String::from_utf8(x).unwrap();
            if name.to_string_lossy().ends_with(".csv") {
                parse_csv(&text).unwrap();
            }
        }
    }
}

#[test]
fn every_subcommand_writes_a_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str, export::Schema)] = &[
        (
            &["enumerate", "digit_set=p=5;digits=0,1,4", "X=30"],
            "enumerate.csv",
            export::MEMBERS,
        ),
        (
            &["count", "digit_set=p=3;digits=0,1", "k=1", "s=2", "X=9,27"],
            "count.csv",
            export::COUNT_SERIES,
        ),
        (
            &["congruence", "digit_set=p=3;digits=0,1", "k=1", "s=2", "B=2"],
            "congruence.csv",
            export::LAMBDA,
        ),
        (
            &["lift", "mode=chain", "digit_set=p=3;digits=0,1", "t=2", "c=1", "B=3"],
            "lift.csv",
            export::CHAIN,
        ),
        (
            &["waring", "digit_set=p=5;digits=0,1,4", "s=2", "k=2", "X=625"],
            "waring.csv",
            export::WARING,
        ),
        (&["etstar", "t=2", "N=100"], "etstar.csv", export::ETSTAR),
        (
            &["fit", "digit_set=p=3;digits=0,1", "k=1", "s=1,2", "X=3^2..3^5"],
            "fit.csv",
            export::FIT,
        ),
    ];
    for (args, file, schema) in cases {
        ok(dir.path(), args);
        let parsed = parse_csv(&read(dir.path(), file)).unwrap();
        assert_eq!(parsed.schema, *schema, "{args:?}");
        assert!(!parsed.rows.is_empty(), "{args:?}");
    }
}

#[test]
fn subcommand_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["lift", "mode=chain", "digit_set=p=3;digits=0,1", "t=2", "c=1", "B=3"],
    );
    assert!(out.contains("j_star=3"));
    let chain = parse_csv(&read(dir.path(), "lift.csv")).unwrap();
    assert_eq!(chain.column("c_j").unwrap(), vec!["1", "2", "3"]);
    assert!(chain.column("verified").unwrap().iter().all(|v| *v == "true"));

    ok(
        dir.path(),
        &["lift", "digit_set=p=3;digits=0,1", "t=2", "d=2", "output=carry"],
    );
    let carry = parse_csv(&read(dir.path(), "carry.csv")).unwrap();
    assert_eq!(carry.rows, vec![vec!["(0,0)".to_string(), "36".to_string()]]);

    ok(
        dir.path(),
        &[
            "congruence",
            "digit_set=p=3;digits=0,1",
            "k=1",
            "s=2",
            "B=2",
            "sweep=k",
            "t=2",
            "r=1",
            "a=1",
            "b=1",
            "nu=1",
            "output=k",
        ],
    );
    let k = parse_csv(&read(dir.path(), "k.csv")).unwrap();
    assert_eq!(k.column("K").unwrap(), vec!["3/4"]);

    ok(
        dir.path(),
        &[
            "congruence",
            "digit_set=p=3;digits=0,1",
            "k=1",
            "s=2",
            "B=3",
            "weights=single",
            "output=single",
        ],
    );
    let single = parse_csv(&read(dir.path(), "single.csv")).unwrap();
    assert_eq!(single.column("ratio").unwrap()[0], "0");
}

#[test]
fn grid_mode_refuses_large_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "congruence",
            "digit_set=p=5;digits=0,1,4",
            "k=2",
            "s=1",
            "B=5",
            "method=grid",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}
