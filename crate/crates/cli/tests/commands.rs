use std::path::Path;
use std::process::{Command, Output};

fn qarray(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qarray"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn qarray")
}

/// Data rows of a CSV written by the tool, header comments stripped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn sequential_ledger_for_five_bins_two_bands() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(&["encode", "--m", "5", "--r", "2", "--layout", "sequential", "--out", "enc.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("10/10"), "{stdout}");
    let data = rows(&dir.path().join("enc.csv"));
    assert_eq!(data.len(), 10);
    assert!(data.iter().all(|r| r[5] == "true" && r[6] == "4"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(&["encode", "--eps", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.cfg"), "m = 4\nwobble = 3\n").unwrap();
    let out = qarray(&["encode", "-c", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wobble"));

    let out = qarray(&["imaging", "--source", "nebula"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_checks_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // A grid that stops at small alpha cannot reach the deterministic plateau.
    let out = qarray(
        &["transfer", "--alpha-max", "0.5", "--alpha-step", "0.25", "--eta", "1.0", "--ports", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn imaging_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["imaging", "--n", "4", "--l", "2000", "--trials", "20", "--source", "flat"];
    for name in ["a.csv", "b.csv"] {
        let mut a = args.to_vec();
        a.extend(["--out", name]);
        assert!(qarray(&a, dir.path()).status.success());
    }
    // Only the out key differs between the two headers.
    let read = |n: &str| {
        std::fs::read_to_string(dir.path().join(n))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# out"))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn point_source_has_zero_qft_variance() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(
        &["imaging", "--n", "4", "--source", "point", "--point", "1", "--l", "1000", "--trials", "10", "--out", "p.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("p.csv"));
    assert_eq!(data.len(), 4);
    for r in &data {
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
        let expect = if r[0] == "1" { 1.0 } else { 0.0 };
        assert_eq!(r[3].parse::<f64>().unwrap(), expect);
    }
}

#[test]
fn two_site_baseline_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(
        &["imaging", "--n", "2", "--source", "baselines", "--g", "0.6", "--l", "100000", "--trials", "20", "--out", "b.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("b.csv"));
    // p_j = (1 +/- g) / 2 on the two-point grid.
    let truth: Vec<f64> = data.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((truth[0] - 0.8).abs() < 1e-12 && (truth[1] - 0.2).abs() < 1e-12, "{truth:?}");
    for r in &data {
        let t: f64 = r[2].parse().unwrap();
        let mean: f64 = r[3].parse().unwrap();
        // Mean of 20 trials, each with standard error sqrt(t(1-t)/l).
        let se = (t * (1.0 - t) / 1e5 / 20.0).sqrt();
        assert!((mean - t).abs() < 4.0 * se, "{mean} vs {t}");
    }
}

#[test]
fn transfer_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(&["transfer", "--eta", "0.1,0.5,1.0", "--ports", "2", "--out", "t"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eta = rows(&dir.path().join("t_eta.csv"));
    let end: Vec<f64> = eta.last().unwrap().iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(end[0], 1.0);
    assert!((end[1] - 1.0).abs() < 1e-12 && (end[2] - 0.5).abs() < 1e-12, "{end:?}");
    assert_eq!(rows(&dir.path().join("t_alpha.csv")).len(), 81);
    assert_eq!(rows(&dir.path().join("t_multiport.csv")).len(), 2);
}

#[test]
fn formulas_agree_with_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarray(&["formulas", "--n", "5", "--trials", "20000"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("formulas.csv"));
    // N = 2: fidelity is f2 itself.
    assert_eq!(data[0][1], "0.82");
    assert!(data.iter().all(|r| r[0].parse::<usize>().unwrap() <= 5));
}
