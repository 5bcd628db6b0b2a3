use std::path::Path;
use std::process::{Command, Output};

fn m2m(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_m2m"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.conf");
    std::fs::write(
        &path,
        "n_peers = 5\nsim_duration = 10\nwarmup = 1\nm_values = 2, 4\ntout_values = 2\nseeds = 1\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_prints_operating_point() {
    let o = m2m(&["solve", "--m", "32", "--tout", "inf"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("rtt_s       0.775805"), "{text}");
    assert!(text.contains("status      converged"), "{text}");
}

#[test]
fn bad_parameters_exit_one() {
    let o = m2m(&["solve", "--tout", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(m2m(&["compare", "/definitely/not/here.csv"]).status.code(), Some(1));
}

#[test]
fn theory_fig4_emits_csv() {
    let o = m2m(&["fig4", "--mode", "theory"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("mode,m,tout_s,seed,rtt_s,p_timeout,gamma_raw,gamma_good,status")
    );
    assert_eq!(lines.count(), 17 * 4);
}

#[test]
fn sweep_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path());
    let csv = dir.path().join("rows.csv");
    let csv_s = csv.to_string_lossy().into_owned();

    let o = m2m(&["--config", &conf, "--out", &csv_s, "sweep"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 + 2);

    let o = m2m(&["compare", &csv_s]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("overall:"));

    // same seed, same bytes
    let again = dir.path().join("again.csv");
    let again_s = again.to_string_lossy().into_owned();
    assert!(m2m(&["--config", &conf, "--out", &again_s, "sweep"]).status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn compare_check_fails_without_simulation_rows() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path());
    let csv = dir.path().join("theory.csv");
    let csv_s = csv.to_string_lossy().into_owned();
    assert!(m2m(&["--config", &conf, "--mode", "theory", "--out", &csv_s, "sweep"])
        .status
        .success());
    let o = m2m(&["compare", "--check", &csv_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("sim slice absent"));
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path());
    let trace = dir.path().join("trace.tsv");
    let trace_s = trace.to_string_lossy().into_owned();
    let o = m2m(&["--config", &conf, "simulate", "--m", "3", "--trace", &trace_s]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("requests_sent"));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("0.000000000\trequest\t"));
}
