//! End-to-end checks of the CLI surface: literals, CSV/JSON schemas, golden
//! files, config handling and exit codes.

use std::fs;
use std::path::PathBuf;

use depthwalk::{execute, CliError};

fn run(args: &[&str], out: &std::path::Path) -> Result<depthwalk::RunOutcome, CliError> {
    let mut argv: Vec<String> = vec!["depthwalk".into()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.to_string_lossy().into_owned());
    execute(argv)
}

#[test]
fn expect_exact_row_at_n_1() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &["expect", "--group", "Z", "--n-grid", "1", "--k-max", "8"],
        dir.path(),
    )
    .unwrap();
    let csv = fs::read_to_string(dir.path().join("expect.csv")).unwrap();
    let row = csv.lines().nth(2).unwrap();
    // n, estimate, stderr (empty: exact), cap_hits, ...
    assert!(row.starts_with("1,1,,0,"), "row was {row:?}");
}

#[test]
fn lambda_csv_matches_lcm_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    run(&["lambda", "--group", "Z", "--k-max", "5"], dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("lambda.csv")).unwrap();
    let body: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(
        body,
        vec!["2,2,formula", "3,6,formula", "4,12,formula", "5,60,formula"]
    );
}

#[test]
fn density_csv_reports_13_17() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &["density", "--group", "F2", "--predicate", "even", "--radius", "2"],
        dir.path(),
    )
    .unwrap();
    let csv = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert!(csv.lines().last().unwrap().ends_with("17,13,13,17"));
}

#[test]
fn depth_json_shape() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &["depth", "--group", "Z", "--element", "Z:6", "--cap", "16"],
        dir.path(),
    )
    .unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("depth.json")).unwrap()).unwrap();
    assert_eq!(doc["value"], 4);
    assert_eq!(doc["method"], "formula");
    assert_eq!(doc["witness"], "Z/4");
    assert_eq!(doc["exceeds_cap"], false);
}

/// Golden files under data/lambda/ regenerate byte-for-byte.
#[test]
fn lambda_golden_files_are_stable() {
    let golden_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lambda");
    let cases = [
        ("Z", "12", "z_k12.csv"),
        ("Z^2", "6", "z2_k6.csv"),
        ("Z/6", "6", "z6_k6.csv"),
        ("H", "8", "h_k8.csv"),
    ];
    for (group, k, golden) in cases {
        let dir = tempfile::tempdir().unwrap();
        run(&["lambda", "--group", group, "--k-max", k], dir.path()).unwrap();
        let produced = fs::read(dir.path().join("lambda.csv")).unwrap();
        let expected = fs::read(golden_dir.join(golden))
            .unwrap_or_else(|e| panic!("missing golden {golden}: {e}"));
        assert_eq!(produced, expected, "golden mismatch for {group} K={k}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    fs::write(
        &config,
        "subcommand=lambda\ngroup=Z\nk-max=3\n# a comment\n",
    )
    .unwrap();

    // run dispatches on the subcommand key
    let out1 = dir.path().join("run1");
    let mut argv: Vec<String> = vec![
        "depthwalk".into(),
        "run".into(),
        "--config".into(),
        config.to_string_lossy().into_owned(),
        "--out".into(),
        out1.to_string_lossy().into_owned(),
    ];
    execute(argv.clone()).unwrap();
    let csv = fs::read_to_string(out1.join("lambda.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header x2 + k=2,3

    // a direct subcommand takes defaults from the file, flags override
    let out2 = dir.path().join("run2");
    argv = vec![
        "depthwalk".into(),
        "lambda".into(),
        "--config".into(),
        config.to_string_lossy().into_owned(),
        "--k-max".into(),
        "5".into(),
        "--out".into(),
        out2.to_string_lossy().into_owned(),
    ];
    execute(argv).unwrap();
    let csv = fs::read_to_string(out2.join("lambda.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6); // k = 2..5

    // manifest echoes the resolved configuration
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["k-max"], "5");
    assert_eq!(manifest["config"]["group"], "Z");
    assert_eq!(manifest["command"], "lambda");
}

#[test]
fn bad_config_line_is_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.conf");
    fs::write(&config, "group=Z\nnonsense line\n").unwrap();
    let err = run(
        &["lambda", "--config", config.to_str().unwrap()],
        dir.path(),
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(format!("{err}").contains(":2:"), "{err}");
}

#[test]
fn exit_codes_map_error_kinds() {
    let dir = tempfile::tempdir().unwrap();
    // usage: unknown group spec
    let e = run(&["lambda", "--group", "Q8", "--k-max", "3"], dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    // usage: missing required option
    let e = run(&["lambda", "--k-max", "3"], dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    // capacity: cyclic modulus beyond the table cap
    let e = run(&["lambda", "--group", "Z/6000", "--k-max", "3"], dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    // capacity: Heisenberg truncation above its cap
    let e = run(&["lambda", "--group", "H", "--k-max", "40"], dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn walk_csv_carries_exact_column_for_integers() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "walk", "--group", "Z", "--n-grid", "2", "--trials", "4000", "--seed", "5",
        ],
        dir.path(),
    )
    .unwrap();
    let csv = fs::read_to_string(dir.path().join("walk.csv")).unwrap();
    let row = csv.lines().nth(2).unwrap();
    let exact: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((exact - 1.375).abs() < 1e-12);
    // and the Monte Carlo estimate agrees loosely
    let est: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((est - 1.375).abs() < 0.1);
}

#[test]
fn out_dir_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    std::env::set_var("DEPTHWALK_OUT", &target);
    let outcome = execute(vec![
        "depthwalk".to_string(),
        "lambda".into(),
        "--group".into(),
        "Z".into(),
        "--k-max".into(),
        "3".into(),
    ])
    .unwrap();
    std::env::remove_var("DEPTHWALK_OUT");
    assert_eq!(outcome.out_dir, target);
    assert!(target.join("lambda.csv").exists());
}

#[test]
fn spectra_json_for_congruence_quotient() {
    let dir = tempfile::tempdir().unwrap();
    run(&["spectra", "--quotient", "Z%4", "--n-max", "100"], dir.path()).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spectra.json")).unwrap())
            .unwrap();
    assert_eq!(doc["order"], 4);
    assert_eq!(doc["check"], "pass");
    let mu2 = doc["mu2"].as_f64().unwrap();
    assert!((mu2 - 0.5).abs() < 1e-10);
}
