use std::path::Path;
use std::process::{Command, Output};

fn pdfw(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdfw"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_then_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdfw(
        &[
            "run", "--algo", "fw", "--set", "simplex", "--dim", "1000", "--obj", "dist", "--step",
            "open-loop", "--iters", "2000", "--seed", "7", "--out", "t.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2001);
    let meta = std::fs::read_to_string(dir.path().join("t.meta")).unwrap();
    assert!(meta.contains("seed = 7") && meta.contains("final_gap = "));

    let o = pdfw(&["slope", "t.csv", "--column", "gap_ahead"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s: f64 = stdout(&o).trim().parse().unwrap();
    assert!(s < -0.9 && s > -1.2, "{s}");

    let o = pdfw(&["slope", "t.csv", "--column", "gap_ahead", "--range", "10", "100"], dir.path());
    assert!(o.status.success());
}

#[test]
fn config_file_and_stride() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.conf"),
        "# optimistic run\nalgo = ofw-ftrl\nset = ksparse\ndim = 100\nk = 10\nobj = lsq\niters = 200\nseed = 7\n",
    )
    .unwrap();
    let o = pdfw(&["run", "--config", "c.conf", "--stride", "50", "--out", "o.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdfw(&["run", "--algo", "fw", "--dim", "ten"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`dim`"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.conf"), "algo = fw\ncolour = red\n").unwrap();
    let o = pdfw(&["run", "--config", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`colour`"));

    let o = pdfw(&["run", "--algo", "gd-pd", "--set", "unconstrained", "--obj", "lsq"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`d_bound`"));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdfw(&["run", "--iters", "5", "--out", "missing/dir/t.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = pdfw(&["slope", "nope.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compare_table_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    for algo in ["fw", "hbfw", "ofw_ftrl"] {
        std::fs::write(
            dir.path().join(format!("{algo}.conf")),
            format!("algo = {algo}\ndim = 200\niters = 300\n"),
        )
        .unwrap();
    }
    let o = pdfw(
        &["compare", "fw.conf", "hbfw.conf", "ofw_ftrl.conf", "--with", "seed=3", "--out-dir", "runs"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("ofw_ftrl") && table.contains('*'), "{table}");
    assert_eq!(std::fs::read_dir(dir.path().join("runs")).unwrap().count(), 6);

    std::fs::write(dir.path().join("other.conf"), "algo = fw\ndim = 201\niters = 300\n").unwrap();
    let o = pdfw(&["compare", "fw.conf", "other.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`dim`"));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdfw(&["verify"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
