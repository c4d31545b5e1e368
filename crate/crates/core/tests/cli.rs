use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rapm(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rapm"));
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_season(dir: &Path) {
    ok(rapm(
        &[
            "synth",
            "--teams",
            "6",
            "--players-per-team",
            "9",
            "--n-possessions",
            "3000",
            "--seed",
            "4",
        ],
        &[("--out", dir)],
    ));
}

#[test]
fn end_to_end_on_a_small_season() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_season(&data);
    for f in ["possessions.csv", "ledger.json", "boxscore.csv", "all_nba.txt"] {
        assert!(data.join(f).is_file(), "{f}");
    }
    let poss = data.join("possessions.csv");
    let bs = data.join("boxscore.csv");

    let ingest = tmp.path().join("ingest");
    ok(rapm(
        &["ingest"],
        &[("--possessions", &poss), ("--boxscore", &bs), ("--out", &ingest)],
    ));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ingest.join("ingest.json")).unwrap()).unwrap();
    assert_eq!(summary["possessions"], 3000);
    assert_eq!(summary["players"], 54);

    let fit = tmp.path().join("fit");
    let out = ok(rapm(
        &["fit", "--folds", "4", "--seed", "2"],
        &[("--possessions", &poss), ("--out", &fit)],
    ));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda"));
    for f in ["fit.json", "cv.json", "cv.txt", "ratings.csv", "ratings.json"] {
        assert!(fit.join(f).is_file(), "{f}");
    }

    let multi = tmp.path().join("multi");
    ok(rapm(
        &["multinomial", "--folds", "4", "--gof-sims", "40"],
        &[("--possessions", &poss), ("--out", &multi)],
    ));
    let header = fs::read_to_string(multi.join("ratings.csv")).unwrap();
    assert!(header.starts_with("player,team,side,rapm,rapm_binomial,epts,wepts,weight,is_reference,rank\n"));
    let gof: serde_json::Value = serde_json::from_str(&fs::read_to_string(multi.join("gof.json")).unwrap()).unwrap();
    let p = gof["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));

    let rated = tmp.path().join("rated");
    ok(rapm(
        &["rate"],
        &[
            ("--possessions", &poss),
            ("--model", &fit.join("fit.json")),
            ("--model", &multi.join("multinomial.json")),
            ("--out", &rated),
        ],
    ));
    let table = fs::read_to_string(rated.join("ratings.csv")).unwrap();
    let first = table.lines().nth(1).unwrap();
    let cells: Vec<&str> = first.split(',').collect();
    assert!(
        !cells[3].is_empty() && !cells[5].is_empty() && !cells[6].is_empty(),
        "{first}"
    );
    assert!(cells[4].is_empty(), "no binomial model was given: {first}");

    ok(rapm(
        &["gof", "--gof-sims", "30"],
        &[
            ("--possessions", &poss),
            ("--model", &multi.join("multinomial.json")),
            ("--out", &tmp.path().join("gof")),
        ],
    ));

    let val = tmp.path().join("val");
    let lasso = format!("lasso={}", multi.join("ratings.csv").display());
    let out = ok(rapm(
        &["validate", "--ratings", &lasso, "--top-n", "10"],
        &[
            ("--boxscore", &bs),
            ("--all-nba", &data.join("all_nba.txt")),
            ("--out", &val),
        ],
    ));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lasso") && text.contains("C1"), "{text}");
    assert!(val.join("validation.json").is_file());
}

#[test]
fn missing_input_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rapm(
        &["fit"],
        &[("--possessions", &tmp.path().join("nope.csv")), ("--out", tmp.path())],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
    assert!(!tmp.path().join("fit.json").exists());
}

#[test]
fn malformed_rows_are_all_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("p.csv");
    fs::write(
        &csv,
        "home_off,pts,season_type,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n\
         1,x,regular,A a,A b,A c,A d,A e,B a,B b,B c,B d,B e\n\
         1,2,regular,A a,A b,A c,A d,A e,B a,B b,B c,B d,B e\n\
         0,2,weird,B a,B b,B c,B d,B e,A a,A b,A c,A d,A e\n",
    )
    .unwrap();
    let out = rapm(
        &["ingest"],
        &[("--possessions", &csv), ("--out", &tmp.path().join("o"))],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("line 4"), "{err}");
}

#[test]
fn fixed_lambda_skips_cross_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_season(&data);
    let out = tmp.path().join("fit");
    ok(rapm(
        &["fit", "--lambda", "0.01", "--family", "binomial"],
        &[("--possessions", &data.join("possessions.csv")), ("--out", &out)],
    ));
    assert!(out.join("fit.json").is_file());
    assert!(!out.join("cv.json").exists());
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["lambda"], 0.01);
    assert_eq!(fit["family"], "binomial");
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_season(&data);
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "possessions = {:?}\nlambda = 0.05\nhome_off = true\n",
            data.join("possessions.csv").display().to_string()
        ),
    )
    .unwrap();
    let out = tmp.path().join("fit");
    ok(rapm(
        &["fit", "--lambda", "0.02"],
        &[("--config", &cfg), ("--out", &out)],
    ));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["lambda"], 0.02);
    let names: Vec<&str> = fit["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.is_empty() || !names.contains(&"season_type"));

    fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let bad = rapm(&["fit"], &[("--config", &cfg), ("--out", &out)]);
    assert_eq!(bad.status.code(), Some(2));
}
