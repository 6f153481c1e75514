use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bellsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run bellsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let o = bellsim(d, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`command`"), "{}", stderr(&o));

    let o = bellsim(d, &["--command", "chsh", "--seed", "seven"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`seed`"));

    let o = bellsim(d, &["--command", "correlate", "--shaky-width", "2.0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`shaky_width`"));

    let o = bellsim(d, &["--config", "missing.conf"]);
    assert_eq!(o.status.code(), Some(4));

    let o = bellsim(d, &["--command", "chsh", "--out", "no/such/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.conf"),
        "# chsh at reduced size\ncommand=chsh\nseed=1\nn_per_point=500\n",
    )
    .unwrap();
    let o = bellsim(d, &["--config", "run.conf", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(d.join("chsh.manifest")).unwrap();
    assert!(manifest.contains("\nseed=7\n"), "{manifest}");
    assert!(manifest.contains("\nn_per_point=500\n"));
    assert!(manifest.contains("\nversion=v"));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bellsim(
        d,
        &["--command", "passive-test", "--grid-points", "3", "--n-per-point", "400", "--out", "p.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("p.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "setting,value,stderr");
    let settings: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(settings, ["0", "1.57079632679", "3.14159265359"]);
    assert!(d.join("p.manifest").exists());
}

#[test]
fn chsh_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bellsim(d, &["--command", "chsh", "--n-per-point", "1000", "--angle-set", "0,pi/4,pi/8,3pi/8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("chsh.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "pair,e_value,stderr");
    let labels: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["a/b", "a/b'", "a'/b", "a'/b'", "S"]);
    let s: f64 = lines[5].split(',').nth(1).unwrap().parse().unwrap();
    assert!(s > 2.0 && s < 4.0, "{s}");
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bellsim(
        d,
        &["--command", "malus-check", "--theta", "pi/6", "--grid-points", "12", "--n-per-point", "2000", "--out", "m.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(d.join("m.csv")).unwrap();
    let o = bellsim(d, &["--config", "m.manifest", "--out", "again.csv", "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, fs::read(d.join("again.csv")).unwrap());
}

#[test]
fn oracle_compare_prints_worst_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellsim(dir.path(), &["--command", "oracle-compare", "--configs", "5", "--n-per-point", "3000"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("worst cell: config "), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("oracle-compare.csv")).unwrap();
    assert!(csv.starts_with("config,cell,mc_frequency,oracle_probability,z_score\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 5);
}
