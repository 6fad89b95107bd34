use std::path::Path;
use std::process::{Command, Output};

fn mccdma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mccdma"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const SMALL: &str = "trials = 2\ncycles = 40\nheldout_blocks = 64\npayload_blocks = 2000\n\
[system]\nsubcarriers = 8\nusers = 3\n[ga]\nmax_cycles = 100\n";

#[test]
fn verify_passes_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mccdma(&["verify", "--seed", "7"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.ends_with("6/6 suites passed\n"), "{stdout}");
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mccdma(&["selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn zero_cycles_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mccdma(&["mse-curve", "--cycles", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("cycles"), "{stderr}");
    assert!(!dir.path().join("mse_curve.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mccdma(&["mse-curve", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(mccdma(&["plot"], dir.path()).status.code(), Some(2));
    assert_eq!(mccdma(&[], dir.path()).status.code(), Some(2));
    assert_eq!(mccdma(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_config_values_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[ga]\nselection = \"best\"\n").unwrap();
    let out = mccdma(&["mse-curve", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("ga.selection"));

    let out = mccdma(&["ber-curve", "--snr-min", "10", "--snr-max", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = mccdma(&["mse-curve", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ber_curve_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let args = ["ber-curve", "--config", "small.toml", "--seed", "1", "--snr-step", "10"];
    for name in ["a.csv", "b.csv"] {
        let mut a = args.to_vec();
        a.extend(["--out", name]);
        let out = mccdma(&a, dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.csv.meta.toml"), read("b.csv.meta.toml"));
    let csv = String::from_utf8(read("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("snr [dB],lms_mu0.01 [ratio],"));
}

#[test]
fn overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = mccdma(
        &["mse-curve", "--config", "small.toml", "--cycles", "7", "--trials", "1", "--selection", "random",
          "--crossover-ratio", "0.5", "--out", "m.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let meta = std::fs::read_to_string(dir.path().join("m.csv.meta.toml")).unwrap();
    assert!(meta.contains("selection = \"random\""));
    assert!(meta.contains("crossover_ratio = 0.5"));
    assert!(meta.contains("trials = 1"));
}
