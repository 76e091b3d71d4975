use std::process::{Command, Output};

fn lazybits(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazybits"))
        .args(args)
        .env_remove("LAZYBITS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV report as maps from column name to cell.
fn rows(o: &Output) -> Vec<Vec<(String, String)>> {
    let text = stdout(o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            let cells: Vec<String> = l.split(',').map(String::from).collect();
            header.iter().cloned().zip(cells).collect()
        })
        .collect()
}

fn cell<'a>(row: &'a [(String, String)], col: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == col).unwrap().1
}

fn summary(o: &Output, key: &str) -> String {
    let prefix = format!("# {key}=");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(String::from))
        .unwrap_or_else(|| panic!("no {key} in output"))
}

#[test]
fn bounds_rows() {
    let o = lazybits(&["bounds", "--n", "1..3"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.len(), 3);
    assert_eq!(cell(&r[0], "n"), "1");
    assert_eq!(cell(&r[0], "lower"), "2");
    assert_eq!(cell(&r[0], "slack2"), "8");
    let o = lazybits(&["bounds", "--n", "1", "--eps", "1e-9"]);
    assert_eq!(cell(&rows(&o)[0], "theorem1"), "5.000000000");
}

#[test]
fn bounds_csv_and_json_agree() {
    let csv = rows(&lazybits(&["bounds", "--n", "1..4"]));
    let json = stdout(&lazybits(&["bounds", "--n", "1..4", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), csv.len());
    assert!(json.contains("\"theorem1\":5.000000000,"));
    for (c, j) in csv.iter().zip(jrows) {
        for (k, val) in c {
            assert_eq!(j[k].as_f64().unwrap(), val.parse::<f64>().unwrap(), "column {k}");
        }
    }
}

#[test]
fn every_output_starts_with_header() {
    for fmt in ["csv", "json", "svg"] {
        let o = lazybits(&["bounds", "--n", "1..2", "--format", fmt, "--seed", "9"]);
        let first = stdout(&o).lines().next().unwrap().to_string();
        assert!(first.contains("lazybits"), "{first}");
        assert!(first.contains("bounds"), "{first}");
        assert!(first.contains('9'), "{first}");
    }
}

#[test]
fn invalid_range_is_usage_error() {
    for r in ["3..1", "0..2", "a"] {
        assert_eq!(lazybits(&["bounds", "--n", r]).status.code(), Some(2), "{r}");
    }
    assert_eq!(lazybits(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn decide_examples() {
    let o = lazybits(&["decide", "--fn", "identity", "--n", "1", "--tapes", "1/4,3/4"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(cell(&r[0], "verdict"), "LT");
    assert!(stdout(&o).contains("LT,2,\"1,2\""));

    let o = lazybits(&["decide", "--fn", "hard", "--n", "2", "--seed", "7"]);
    let cuts: usize = cell(&rows(&o)[0], "cut_count").parse().unwrap();
    assert!(cuts >= 3);

    let o = lazybits(&["decide", "--fn", "constant:1/2", "--n", "1", "--tapes", "0/1,3/4"]);
    assert_eq!(cell(&rows(&o)[0], "verdict"), "LT");
}

#[test]
fn decide_errors() {
    let o = lazybits(&["decide", "--fn", "identity", "--tapes", "1/4,5/4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lazybits(&["decide", "--fn", "hard", "--n", "3", "--cut-cap", "2", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("x1:"));
}

#[test]
fn sample_constant_half_attempts() {
    let o = lazybits(&["sample", "--fn", "constant:1/2", "--count", "100000", "--precision", "8"]);
    assert!(o.status.success());
    let mean: f64 = summary(&o, "mean_attempts").parse().unwrap();
    assert!((mean - 2.0).abs() <= 0.05, "{mean}");
    let r = rows(&o);
    assert_eq!(r.len(), 100_000);
    assert!(cell(&r[0], "x_1").ends_with("/2^8"));
}

#[test]
fn sample_identity_passes_gof() {
    let o = lazybits(&["gof", "--fn", "identity", "--count", "100000"]);
    assert!(o.status.success());
    let p: f64 = summary(&o, "p_value").parse().unwrap();
    assert!(p > 1e-3, "{p}");
}

#[test]
fn sample_attempt_cap_is_budget_error() {
    let o = lazybits(&["sample", "--fn", "constant:0", "--count", "1", "--attempt-cap", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn same_seed_same_bytes() {
    let a = lazybits(&["sample", "--fn", "mean", "--n", "2", "--count", "300", "--seed", "5"]);
    let b = lazybits(&["sample", "--fn", "mean", "--n", "2", "--count", "300", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let c = lazybits(&["sample", "--fn", "mean", "--n", "2", "--count", "300", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_lazybits"));
        cmd.args(["bench", "--fn", "identity", "--trials", "500"]);
        match env {
            Some(s) => cmd.env("LAZYBITS_SEED", s),
            None => cmd.env_remove("LAZYBITS_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    let explicit = lazybits(&["bench", "--fn", "identity", "--trials", "500", "--seed", "42"]).stdout;
    assert_eq!(run(Some("42")), explicit);
    assert_ne!(run(None), explicit);
}

#[test]
fn verify_commands() {
    let o = lazybits(&["verify-prop1", "--dims", "4,4", "--cases", "1000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lazybits(&["verify-lb", "--n", "3", "--trials", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    for r in rows(&o) {
        assert_eq!(cell(&r, "min_cuts"), "4");
    }
}

#[test]
fn fit_theorem1_slope() {
    let o = lazybits(&["fit", "--curve", "theorem1", "--n", "10..200"]);
    assert!(o.status.success());
    let s: f64 = summary(&o, "slope").parse().unwrap();
    assert!((1.10..=1.25).contains(&s), "{s}");
}

#[test]
fn check_monotone_builtins() {
    for f in ["hard", "product", "staircase:4", "mean"] {
        let o = lazybits(&["check-monotone", "--fn", f, "--n", "2", "--trials", "2000"]);
        assert_eq!(o.status.code(), Some(0), "{f}");
    }
    assert_eq!(lazybits(&["check-monotone", "--fn", "staircase:3"]).status.code(), Some(2));
}

#[test]
fn out_path_picks_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let o = lazybits(&["bounds", "--n", "1..2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
    let svg = dir.path().join("b.svg");
    lazybits(&["bounds", "--n", "1..5", "--out", svg.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn svg_needs_a_chart() {
    let o = lazybits(&["decide", "--fn", "identity", "--tapes", "1/4,3/4", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_threshold() {
    let o = lazybits(&["bench", "--fn", "threshold:1/3", "--trials", "200000"]);
    let mean: f64 = cell(&rows(&o)[0], "mean").parse().unwrap();
    assert!((1.98..=2.02).contains(&mean), "{mean}");
}
