use std::path::PathBuf;
use std::process::{Command, Output};

fn nodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .env_remove("NODAL_PATTERNS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SUBCOMMANDS: [&str; 11] = [
    "",
    "gen",
    "eval",
    "grid",
    "betti",
    "validate",
    "bound",
    "orthant",
    "patterns",
    "patterns check",
    "experiment",
];

/// Help output is pinned in `tests/golden`; set `NODAL_BLESS=1` to rewrite.
#[test]
fn help_matches_golden_files() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("NODAL_BLESS").is_some();
    for sub in SUBCOMMANDS {
        let mut args: Vec<&str> = sub.split_whitespace().collect();
        args.push("--help");
        let o = nodal(&args);
        assert!(o.status.success(), "{sub} --help failed");
        let name = if sub.is_empty() {
            "nodal".to_string()
        } else {
            sub.replace(' ', "-")
        };
        let path = dir.join(format!("{name}.txt"));
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, stdout(&o)).unwrap();
        } else {
            let want = std::fs::read_to_string(&path)
                .unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
            assert_eq!(stdout(&o), want, "help text of `{sub}` changed");
        }
    }
}

#[test]
fn patterns_check_prints_checksums() {
    let o = nodal(&["patterns", "check"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({"B": 66, "I4": 92, "I": 90}));
    let file = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/patterns.txt");
    let o = nodal(&["patterns", "check", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn corrupt_pattern_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, "#B:1\n+-+\n...\n...\n").unwrap();
    let o = nodal(&["patterns", "check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bound_reaches_target() {
    let o = nodal(&["bound", "--dim", "1", "--N", "10", "--M", "75"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["bound"].as_f64().unwrap() >= 0.95);
    let o = nodal(&["bound", "--dim", "1", "--N", "10", "--target", "0.95"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["M"], 75);
}

#[test]
fn validate_exit_codes() {
    let o = nodal(&[
        "validate", "--dim", "1", "--N", "5", "--M", "2", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "NotCertified");
    assert!(!v["violations"].as_array().unwrap().is_empty());
    let o = nodal(&[
        "validate", "--dim", "1", "--N", "5", "--M", "200", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(nodal(&["--bogus"]).status.code(), Some(1));
    assert_eq!(
        nodal(&["validate", "--M", "3", "--nope"]).status.code(),
        Some(1)
    );
    assert_eq!(nodal(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        nodal(&["eval", "--N", "3", "--x", "100"]).status.code(),
        Some(1)
    );
}

#[test]
fn gen_grid_betti_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("f.json");
    let grid = dir.path().join("g.json");
    let f = field.to_str().unwrap();
    assert!(
        nodal(&["gen", "--dim", "2", "--N", "2", "--seed", "3", "--out", f])
            .status
            .success()
    );
    assert!(nodal(&[
        "grid",
        "--field",
        f,
        "--M",
        "12",
        "--out",
        grid.to_str().unwrap()
    ])
    .status
    .success());
    let from_grid = stdout(&nodal(&["betti", "--grid", grid.to_str().unwrap()]));
    let from_field = stdout(&nodal(&["betti", "--field", f, "--M", "12"]));
    assert_eq!(from_grid, from_field);
    let again = dir.path().join("f2.json");
    nodal(&[
        "gen",
        "--dim",
        "2",
        "--N",
        "2",
        "--seed",
        "3",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(&field).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn experiment_output_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"N": 4, "M": [3, 12], "trials": 40, "seed": 9}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let a = nodal(&["--threads", "1", "experiment", "homology-1d", "--config", c]);
    let b = nodal(&["--threads", "3", "experiment", "homology-1d", "--config", c]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let header = stdout(&a)
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string();
    assert!(header.starts_with("experiment,dim,N,M,trials,seed,rate_match"));
    std::fs::write(
        &cfg,
        r#"{"kind": "Homology1D", "N": 4, "M": [3], "trials": 2}"#,
    )
    .unwrap();
    let wrong = nodal(&["experiment", "homology-2d", "--config", c]);
    assert_eq!(wrong.status.code(), Some(1));
}
