use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_intelligibility-cli"));
    c.env_remove("INTELLIGIBILITY_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn demo(dir: &Path) -> (PathBuf, PathBuf) {
    let d = dir.join("demo");
    let o = run(&["demo-dataset", d.to_str().unwrap(), "--seconds", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (d.join("demo.json"), d.join("demo_reversed.json"))
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn self_comparison_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let clean = dir.path().join("demo/clean.wav");
    let o = run(&["compute", clean.to_str().unwrap(), clean.to_str().unwrap(), "--metric", "stoi"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    assert_eq!(v["metric_name"], "stoi");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["unit"], "dimensionless");
    assert!(v["frames_used"].as_u64().unwrap() > 0);
    assert!(v["wall_time"].as_f64().is_some());
}

#[test]
fn compute_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let c = dir.path().join("demo/clean.wav");
    let d = dir.path().join("demo/ssn_+0dB.wav");
    let line = |threads: &str| {
        let o = run(&[
            "compute",
            c.to_str().unwrap(),
            d.to_str().unwrap(),
            "--metric",
            "siib-gauss,siib,miknn",
            "--seed",
            "7",
            "--threads",
            threads,
        ]);
        assert!(o.status.success());
        json_lines(&o)
            .into_iter()
            .map(|mut v| {
                v.as_object_mut().unwrap().remove("wall_time");
                v
            })
            .collect::<Vec<_>>()
    };
    let first = line("2");
    assert_eq!(first, line("2"));
    assert_eq!(first, line("1"));
}

#[test]
fn exit_codes() {
    let o = run(&["compute", "/nonexistent/a.wav", "/nonexistent/b.wav"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/a.wav"));

    assert_eq!(run(&["compute", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["bench", "--threads", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let c = dir.path().join("demo/clean.wav");
    let c = c.to_str().unwrap();
    assert_eq!(run(&["compute", c, c, "--metric", "stio"]).status.code(), Some(1));

    let silent = dir.path().join("silent.wav");
    write_silence(&silent);
    let o = run(&["compute", silent.to_str().unwrap(), silent.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_silence(path: &Path) {
    // 16-bit mono PCM at 10 kHz, 1 s of zeros.
    let n: u32 = 10_000;
    let mut b = Vec::new();
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&(36 + 2 * n).to_le_bytes());
    b.extend_from_slice(b"WAVEfmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&10_000u32.to_le_bytes());
    b.extend_from_slice(&20_000u32.to_le_bytes());
    b.extend_from_slice(&2u16.to_le_bytes());
    b.extend_from_slice(&16u16.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&(2 * n).to_le_bytes());
    b.resize(b.len() + 2 * n as usize, 0);
    std::fs::write(path, b).unwrap();
}

#[test]
fn evaluate_demo_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let (m, rev) = demo(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "evaluate",
        m.to_str().unwrap(),
        rev.to_str().unwrap(),
        "--metrics",
        "siib-gauss,stoi",
        "--out",
        out.to_str().unwrap(),
        "--bootstrap",
        "1000",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("synthetic-ssn ") && l.contains("siib-gauss") && l.ends_with("1.00   1.00")), "{text}");

    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 4);
    let rows: Vec<Vec<&str>> = report.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][..4], ["synthetic-ssn", "siib-gauss", "1.0", "1.0"]);
    assert_eq!(rows[2][..4], ["synthetic-ssn-reversed", "siib-gauss", "0.0", "0.0"]);
    for f in ["summary.csv", "summary.json", "report.json", "scatter/synthetic-ssn__stoi.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn two_metrics_one_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = demo(dir.path());
    let out = dir.path().join("o");
    let o = run(&[
        "evaluate",
        m.to_str().unwrap(),
        "--metrics",
        "stoi,estoi",
        "-o",
        out.to_str().unwrap(),
        "--bootstrap",
        "1000",
    ]);
    assert!(o.status.success());
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
}

#[test]
fn all_expands_to_eight_metrics() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let c = dir.path().join("demo/clean.wav");
    let d = dir.path().join("demo/ssn_+10dB.wav");
    let o = run(&["compute", c.to_str().unwrap(), d.to_str().unwrap(), "--metrics", "all"]);
    assert!(o.status.success());
    let names: Vec<String> = json_lines(&o).iter().map(|v| v["metric_name"].as_str().unwrap().to_owned()).collect();
    assert_eq!(
        names,
        ["stoi", "estoi", "miknn", "siib", "siib-noklt", "siib-gauss", "stoi-klt", "stoi-klt-gamma"]
    );
}

#[test]
fn aborted_evaluation_leaves_no_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = demo(dir.path());
    let text = std::fs::read_to_string(&m).unwrap().replace("ssn_+5dB.wav", "missing.wav");
    let broken = dir.path().join("demo/broken.json");
    std::fs::write(&broken, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "evaluate",
        m.to_str().unwrap(),
        broken.to_str().unwrap(),
        "--metrics",
        "stoi",
        "--out",
        out.to_str().unwrap(),
        "--bootstrap",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ssn_+5dB"));
    assert!(!out.join("report.csv").exists());

    let v = run(&["validate-manifest", m.to_str().unwrap(), broken.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stdout(&v).starts_with("ok "));
}

#[test]
fn bootstrap_floor_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = demo(dir.path());
    let o = run(&["evaluate", m.to_str().unwrap(), "--metrics", "stoi", "--bootstrap", "200"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_reports_both_siib_variants() {
    let o = run(&["bench", "--seconds", "4", "--repeats", "3", "--json"]);
    assert!(o.status.success());
    let rows = json_lines(&o);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["metric"], "siib");
    assert_eq!(rows[1]["metric"], "siib-gauss");
    assert_eq!(rows[1]["ratio_to_siib_gauss"], 1.0);
    assert!(rows[0]["ratio_to_siib_gauss"].as_f64().unwrap() > 0.0);
    assert!(rows.iter().all(|r| r["repeats"] == 3));
    assert_eq!(run(&["bench", "--seconds", "0"]).status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let c = dir.path().join("demo/clean.wav");
    let d = dir.path().join("demo/ssn_+0dB.wav");
    let (c, d) = (c.to_str().unwrap(), d.to_str().unwrap());
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "metrics = [\"estoi\"]\nseed = 3\n").unwrap();
    let names = |o: &Output| -> Vec<String> {
        json_lines(o).iter().map(|v| v["metric_name"].as_str().unwrap().to_owned()).collect()
    };

    let from_file = run(&["compute", c, d, "--config", cfg.to_str().unwrap()]);
    assert_eq!(names(&from_file), ["estoi"]);
    let flag = run(&["compute", c, d, "--config", cfg.to_str().unwrap(), "--metric", "stoi"]);
    assert_eq!(names(&flag), ["stoi"]);
    let env = bin()
        .args(["compute", c, d])
        .env("INTELLIGIBILITY_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(names(&env), ["estoi"]);

    let json_cfg = dir.path().join("cfg.json");
    std::fs::write(&json_cfg, r#"{"metrics": ["miknn"]}"#).unwrap();
    assert_eq!(names(&run(&["compute", c, d, "--config", json_cfg.to_str().unwrap()])), ["miknn"]);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "metrics = 3\n").unwrap();
    assert_eq!(run(&["compute", c, d, "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["compute", c, d, "--config", "/nonexistent.toml"]).status.code(), Some(2));
}
