//! End-to-end exercises of the `oica` binary: exit codes, artifacts, and
//! the gen -> run -> compare pipeline.

use std::path::Path;
use std::process::{Command, Output};

fn oica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oica"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn gen_easy(dir: &Path) -> String {
    let bundle = dir.join("bundle");
    let out = oica(&[
        "gen",
        "--out",
        bundle.to_str().unwrap(),
        "--rho",
        "1",
        "--rho",
        "6",
        "--gaussian",
        "1",
        "--samples",
        "4000",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    bundle.to_str().unwrap().to_owned()
}

#[test]
fn gen_rejects_zero_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = oica(&[
        "gen",
        "--out",
        dir.path().join("b").to_str().unwrap(),
        "--rho",
        "1",
        "--samples",
        "0",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn gen_requires_some_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = oica(&[
        "gen",
        "--out",
        dir.path().join("b").to_str().unwrap(),
        "--samples",
        "100",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = oica(&["run", "--no-such-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn run_missing_bundle_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = oica(&[
        "run",
        "--dataset",
        dir.path().join("missing").to_str().unwrap(),
        "--l",
        "5",
        "--seed",
        "1",
        "--out",
        dir.path().join("rec").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_prints_bundle_and_kurtosis_table() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    assert!(Path::new(&bundle).join("X.mat").exists());
    assert!(Path::new(&bundle).join("A.mat").exists());
    assert!(Path::new(&bundle).join("S.mat").exists());
    assert!(Path::new(&bundle).join("meta.txt").exists());
}

#[test]
fn run_compare_pipeline_fast_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let rec_fast = dir.path().join("fast");
    let rec_ref = dir.path().join("ref");
    let out = oica(&[
        "run",
        "--dataset",
        &bundle,
        "--algorithm",
        "fast",
        "--l",
        "4",
        "--seed",
        "9",
        "--out",
        rec_fast.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rec_fast.join("W.mat").exists());
    assert!(rec_fast.join("upsilon.csv").exists());
    assert!(rec_fast.join("timing.csv").exists());

    let out = oica(&[
        "run",
        "--dataset",
        &bundle,
        "--algorithm",
        "reference",
        "--matched-init",
        "--l",
        "4",
        "--seed",
        "9",
        "--out",
        rec_ref.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = oica(&[
        "compare",
        rec_fast.to_str().unwrap(),
        rec_ref.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("max row deviation"));
}

#[test]
fn compare_record_with_itself_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let rec = dir.path().join("rec");
    let out = oica(&[
        "run", "--dataset", &bundle, "--l", "3", "--seed", "2", "--out",
        rec.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = oica(&["compare", rec.to_str().unwrap(), rec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn compare_across_datasets_is_algorithm_error() {
    let dir = tempfile::tempdir().unwrap();
    let bundle_a = gen_easy(dir.path());
    let bundle_b = dir.path().join("bundle2");
    let out = oica(&[
        "gen",
        "--out",
        bundle_b.to_str().unwrap(),
        "--rho",
        "1",
        "--rho",
        "6",
        "--gaussian",
        "1",
        "--samples",
        "4000",
        "--seed",
        "6",
    ]);
    assert_eq!(code(&out), 0);
    let rec_a = dir.path().join("ra");
    let rec_b = dir.path().join("rb");
    for (bundle, rec) in [(bundle_a.as_str(), &rec_a), (bundle_b.to_str().unwrap(), &rec_b)] {
        let out = oica(&[
            "run", "--dataset", bundle, "--l", "3", "--seed", "2", "--out",
            rec.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let out = oica(&["compare", rec_a.to_str().unwrap(), rec_b.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
}

#[test]
fn fluct_needs_at_least_two_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let out = oica(&[
        "fluct",
        "--dataset",
        &bundle,
        "--l",
        "3",
        "--repeats",
        "1",
        "--seed",
        "1",
        "--out",
        dir.path().join("f").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn fluct_identical_seeds_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let fdir = dir.path().join("f");
    let out = oica(&[
        "fluct",
        "--dataset",
        &bundle,
        "--l",
        "3",
        "--repeats",
        "3",
        "--seed",
        "1",
        "--identical-seeds",
        "--out",
        fdir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(fdir.join("fluctuation_per_rank.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rank,mean_divergence"));
    for line in lines {
        let (_, v) = line.split_once(',').unwrap();
        assert_eq!(v.parse::<f64>().unwrap(), 0.0, "line: {line}");
    }
}

#[test]
fn sweep_writes_three_csvs_with_stable_headers() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let sdir = dir.path().join("s");
    let out = oica(&[
        "sweep",
        "--dataset",
        &bundle,
        "--l",
        "1",
        "--l",
        "4",
        "--repeats",
        "2",
        "--seed",
        "3",
        "--out",
        sdir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "ordering_error_vs_L.csv",
        "time_vs_L.csv",
        "ngauss_count_vs_L.csv",
    ] {
        let csv = std::fs::read_to_string(sdir.join(name)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("L,mean,stddev"), "{name}");
        assert_eq!(lines.count(), 2, "{name}");
    }
}

#[test]
fn sweep_single_repeat_has_zero_stddev() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let sdir = dir.path().join("s");
    let out = oica(&[
        "sweep", "--dataset", &bundle, "--l", "2", "--repeats", "1",
        "--seed", "3", "--out", sdir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(sdir.join("ordering_error_vs_L.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    let std = line.rsplit(',').next().unwrap();
    assert_eq!(std.parse::<f64>().unwrap(), 0.0);
}

#[test]
fn run_is_deterministic_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let rec1 = dir.path().join("r1");
    let rec2 = dir.path().join("r2");
    for rec in [&rec1, &rec2] {
        let out = oica(&[
            "run", "--dataset", &bundle, "--l", "3", "--seed", "8", "--out",
            rec.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(
        std::fs::read(rec1.join("W.mat")).unwrap(),
        std::fs::read(rec2.join("W.mat")).unwrap()
    );
    assert_eq!(
        std::fs::read(rec1.join("upsilon.csv")).unwrap(),
        std::fs::read(rec2.join("upsilon.csv")).unwrap()
    );
}

#[test]
fn text_format_bundle_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("tb");
    let out = oica(&[
        "gen",
        "--out",
        bundle.to_str().unwrap(),
        "--rho",
        "1",
        "--samples",
        "500",
        "--seed",
        "4",
        "--format",
        "text",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let head = std::fs::read_to_string(bundle.join("X.mat")).unwrap();
    assert!(head.starts_with("1 500"), "unexpected header: {}", &head[..20]);
    let rec = dir.path().join("rec");
    let out = oica(&[
        "run",
        "--dataset",
        bundle.to_str().unwrap(),
        "--l",
        "2",
        "--seed",
        "1",
        "--out",
        rec.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tampered_dataset_fails_checksum_on_run() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_easy(dir.path());
    let x_path = Path::new(&bundle).join("X.mat");
    let mut bytes = std::fs::read(&x_path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x01;
    std::fs::write(&x_path, bytes).unwrap();
    let out = oica(&[
        "run", "--dataset", &bundle, "--l", "3", "--seed", "1", "--out",
        dir.path().join("rec").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}
