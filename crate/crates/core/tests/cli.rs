use std::io::Write;
use std::process::Command;

fn d4count(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_d4count")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn count_at_height_one() {
    assert_eq!(
        d4count(&["count", "--height", "1", "--method", "both"]),
        (0, "3\n".into(), String::new())
    );
}

#[test]
fn conic_verdicts() {
    assert_eq!(d4count(&["solubility", "1", "1", "-3"]).1, "insoluble\n");
    let (code, out, _) = d4count(&["solubility", "-5", "3", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(3), Some("true"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bogus"][..],
        &["count"],
        &["count", "--height", "x"],
        &["lemma", "nope"],
        &["count", "--height", "3", "--frobnicate"],
    ] {
        let (code, out, err) = d4count(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }
}

#[test]
fn limits_exit_three() {
    let (code, out, err) = d4count(&["count", "--height", "600"]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("exceeds the configured limit"));
}

#[test]
fn invariant_failures_exit_one_with_witness() {
    let (code, _, err) = d4count(&["lemma", "cover", "--grid", "small"]);
    assert_eq!(code, 1);
    assert!(err.contains("witness"), "{err}");
    let (code, _, err) = d4count(&["ep", "--p", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("3/32"), "{err}");
}

#[test]
fn hard_bound_lemmas_pass() {
    for which in ["line", "rho", "conic"] {
        let (code, out, _) = d4count(&["lemma", which, "--format", "csv"]);
        assert_eq!(code, 0, "{which}");
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        assert_eq!((row[0], row[1], row[3]), (which, "true", "0"));
    }
}

#[test]
fn config_file_sets_limits() {
    let dir = std::env::temp_dir().join(format!("d4count-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("limits.conf");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "direct_limit = 4").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(d4count(&["count", "--height", "5", "--config", p]).0, 3);
    assert_eq!(
        d4count(&["count", "--height", "5", "--config", p, "--direct-limit", "5"]).1,
        "33\n"
    );
    writeln!(f, "unknown_key = 1").unwrap();
    assert_eq!(d4count(&["count", "--height", "5", "--config", p]).0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn growth_json_has_rows_and_notes() {
    let (code, out, err) = d4count(&["growth", "--heights", "1,10,5", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let bs: Vec<u64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["B"].as_u64().unwrap())
        .collect();
    assert_eq!(bs, [1, 5, 10]);
    assert!(v["rows"][0]["ratio6"].is_null());
    assert!(v["notes"].as_str().unwrap().contains("1/4"));
}

#[test]
fn torsor_subcommands() {
    let (code, out, _) = d4count(&["torsor", "enumerate", "--height", "1", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    assert_eq!(out.lines().next().unwrap(), "s0,s1,s2,s3,u1,u2,u3,y1,y2,y3");
    let (code, verbose, err) = d4count(&["torsor", "compare", "--height", "10", "--verbose"]);
    assert_eq!(code, 0);
    assert!(verbose.contains("127"));
    assert!(err.contains("lines written"));
}

#[test]
fn preimages() {
    let (code, out, _) = d4count(&["torsor", "preimages", "1", "1", "-1", "-1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    // Off the surface, and on the line x1 = x4 = 0.
    assert_eq!(d4count(&["torsor", "preimages", "2", "2", "-1", "2"]).0, 2);
    assert_eq!(d4count(&["torsor", "preimages", "0", "1", "-1", "0"]).0, 2);
}

#[test]
fn sums_subcommands() {
    assert_eq!(d4count(&["sums", "s", "--x", "2"]).1.split(' ').next(), Some("4"));
    let (code, out, _) = d4count(&[
        "sums",
        "lower",
        "--b",
        "2535301200456458802993406410752",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert!(out
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("lower,2535301200456458802993406410752,6338253001141147007483516026880,2.5"));
    assert_eq!(d4count(&["sums", "theta", "--z", "200000"]).0, 3);
}
