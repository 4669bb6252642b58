use std::path::Path;
use std::process::{Command, Output};

fn su2eth(args: &[&str], cwd: &Path, env_cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_su2eth"));
    cmd.args(args).current_dir(cwd).env_remove("SU2ETH_CACHE");
    if let Some(p) = env_cache {
        cmd.env("SU2ETH_CACHE", p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn env_var_sets_cache_root_and_flag_overrides_it() {
    let dir = tempfile::tempdir().unwrap();
    let env_root = dir.path().join("from-env");
    let o = su2eth(&["spectrum", "--L", "6", "--lambda", "3", "--out", "out"], dir.path(), Some(&env_root));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_dir(&env_root).unwrap().count(), 12);

    let flag_root = dir.path().join("from-flag");
    let o = su2eth(
        &["spectrum", "--L", "6", "--lambda", "3", "--out", "out", "--cache", flag_root.to_str().unwrap()],
        dir.path(),
        Some(&env_root),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&flag_root).unwrap().count(), 12);
    assert!(stdout(&o).contains("diagonalized=12"));

    let o = su2eth(&["spectrum", "--L", "6", "--lambda", "3", "--out", "out"], dir.path(), Some(&env_root));
    assert!(stdout(&o).contains("hits=12 diagonalized=0"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c");
    let cache = c.to_str().unwrap();
    assert_eq!(su2eth(&["spectrum", "--L", "7", "--cache", cache], dir.path(), None).status.code(), Some(2));
    assert_eq!(su2eth(&["spectrum", "--bogus"], dir.path(), None).status.code(), Some(2));
    assert_eq!(su2eth(&["oracle", "--L", "5", "--S", "0", "--lambda", "1"], dir.path(), None).status.code(), Some(2));

    let o = su2eth(&["diag-eth", "--L", "6", "--cache", cache, "--out", "o"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spectrum"));

    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"lengths": [6], "spin_pairs": [[0, 1]], "observables": ["B"]}"#,
    )
    .unwrap();
    let o = su2eth(&["offdiag-eth", "--config", "bad.json", "--cache", cache], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Z2"));
}

#[test]
fn oracle_check_reports_corrupted_sector() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--L", "6", "--lambda", "0", "--cache", "c", "--out", "o"];
    let run = |cmd: &str| su2eth(&[&[cmd][..], &base[..]].concat(), dir.path(), None);
    assert_eq!(run("spectrum").status.code(), Some(0));
    let o = run("oracle-check");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("PASS"));

    let victim = dir.path().join("c").join("L6_M0_k1_zp_lam0.spec");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes[20] ^= 0xff;
    std::fs::write(&victim, bytes).unwrap();
    let o = run("oracle-check");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("L6_M0_k1_zp"), "{}", stdout(&o));
}

#[test]
fn table_and_moment_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = su2eth(&["cg-table", "--max-twice", "2"], dir.path(), None);
    let text = stdout(&o);
    assert!(text.starts_with("2j,2m,2j1,2m1,2j2,2m2,numerator,denominator-square,float"));
    assert!(text.lines().any(|l| l.starts_with("0,0,1,1,1,-1,1,2,")));

    let o = su2eth(&["oracle", "--L", "6", "--S", "0", "--lambda", "3"], dir.path(), None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["eps2"].as_f64().unwrap() + 0.15).abs() < 1e-15);
}
