use std::path::{Path, PathBuf};

use intelligibility::harness::{
    aggregate, benchmark, evaluate_dataset, import_scores, prepare_pair, write_demo_dataset, write_report,
    AggregateConfig, DatasetResult, EvalOptions, EvalReport,
};
use intelligibility::signal::{load_manifest, read_wav, DatasetManifest};
use intelligibility::stats::BootstrapConfig;
use intelligibility::{Error, Metric, MetricConfig};

use crate::args::{BenchArgs, Cli, Command, ComputeArgs, DemoArgs, EvaluateArgs, ValidateArgs};
use crate::config::CliConfig;
use crate::CliError;

/// Flags merged over the config file.
struct Settings {
    file: CliConfig,
    seed: u64,
    metric_config: MetricConfig,
}

impl Settings {
    fn metrics(&self, flag: Option<&str>, default: &str) -> Result<Vec<Metric>, CliError> {
        let list = match (flag, &self.file.metrics) {
            (Some(f), _) => f.to_owned(),
            (None, Some(v)) => v.join(","),
            (None, None) => default.to_owned(),
        };
        Ok(Metric::parse_list(&list)?)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = CliConfig::discover(cli.global.config.as_deref())?;
    let threads = cli.global.threads.or(file.threads);
    init_threads(threads)?;
    let seed = cli.global.seed.or(file.seed).unwrap_or(0);
    let metric_config = file.metric_config.clone().unwrap_or_default().with_seed(seed);
    let settings = Settings {
        file,
        seed,
        metric_config,
    };
    match cli.command {
        Command::Compute(a) => compute(&settings, a),
        Command::Evaluate(a) => evaluate(&settings, a),
        Command::Bench(a) => bench(&settings, a),
        Command::ValidateManifest(a) => validate(a),
        Command::DemoDataset(a) => demo(&settings, a),
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<u64>) -> Result<(), CliError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_threads: Option<u64>) -> Result<(), CliError> {
    Ok(())
}

fn input(e: Error, path: &Path) -> CliError {
    if e.is_input_error() {
        CliError::Io(format!("{}: {e}", path.display()))
    } else {
        CliError::Core(e)
    }
}

fn compute(s: &Settings, a: ComputeArgs) -> Result<(), CliError> {
    let metrics = s.metrics(a.metric.as_deref(), "stoi")?;
    let clean = read_wav(&a.clean).map_err(|e| input(e, &a.clean))?;
    let degraded = read_wav(&a.degraded).map_err(|e| input(e, &a.degraded))?;
    let max_lag = (a.align || s.file.align == Some(true)).then_some(1.0);
    for m in metrics {
        let rate = s.metric_config.sample_rate(m);
        let (c, d, _) = prepare_pair(clean.clone(), degraded.clone(), rate, max_lag)?;
        let score = m.compute(&c, &d, &s.metric_config)?;
        if a.pretty {
            let unit = serde_json::to_value(score.unit).expect("unit serialises");
            println!(
                "{:<16} {:>12.6} {:<16} frames {:>6}  {:.3} s",
                score.metric_name,
                score.value,
                unit.as_str().unwrap_or_default(),
                score.frames_used,
                score.wall_time
            );
        } else {
            println!("{}", serde_json::to_string(&score).expect("score serialises"));
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<DatasetManifest, CliError> {
    load_manifest(path).map_err(|e| input(e, path))
}

fn parse_imports(specs: &[String]) -> Result<Vec<(String, PathBuf)>, CliError> {
    specs
        .iter()
        .map(|spec| match spec.split_once('=') {
            Some((m, dir)) if !m.is_empty() && !dir.is_empty() => Ok((m.to_owned(), PathBuf::from(dir))),
            _ => Err(CliError::Usage(format!("--import expects METRIC=DIR, got `{spec}`"))),
        })
        .collect()
}

fn evaluate(s: &Settings, a: EvaluateArgs) -> Result<(), CliError> {
    let metrics = s.metrics(a.metrics.as_deref(), "all")?;
    let imports = parse_imports(&a.imports)?;
    let manifests = if a.manifests.is_empty() {
        s.file.manifests.clone()
    } else {
        a.manifests
    };
    if manifests.is_empty() {
        return Err(CliError::Usage("no manifests given".into()));
    }
    let out = a
        .out
        .or_else(|| s.file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("report"));
    let replicates = a.bootstrap.or(s.file.bootstrap).unwrap_or(5000);
    if replicates < 1000 {
        return Err(CliError::Usage(format!("--bootstrap must be at least 1000, got {replicates}")));
    }
    let coverage = a.coverage.or(s.file.coverage).unwrap_or(0.95);
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(CliError::Usage(format!("--coverage must lie in (0, 1), got {coverage}")));
    }
    let opts = EvalOptions {
        metrics: s.metric_config.clone(),
        align: (a.align || s.file.align == Some(true)).then_some(true),
        ..EvalOptions::default()
    };
    let agg = AggregateConfig {
        bootstrap: BootstrapConfig {
            replicates,
            coverage,
            seed: s.seed,
            ..BootstrapConfig::default()
        },
        refit: !a.no_refit && s.file.refit != Some(false),
    };

    let loaded = manifests.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let mut results: Vec<DatasetResult> = Vec::new();
    for m in &loaded {
        for &metric in &metrics {
            results.push(evaluate_dataset(metric, m, &opts)?);
        }
        for (name, dir) in &imports {
            let path = dir.join(format!("{}.csv", m.name));
            results.push(import_scores(m, name, &path).map_err(|e| input(e, &path))?);
        }
    }
    let report = aggregate(&results, &agg)?;
    write_report(&report, &out).map_err(|e| input(e, &out))?;
    print_summary(&report);
    eprintln!("reports written to {}", out.display());
    Ok(())
}

fn print_summary(report: &EvalReport) {
    println!("{:<24} {:<16} {:>6} {:>6}", "dataset", "metric", "tau", "rho");
    for r in &report.per_dataset {
        let mark = if r.seen { "*" } else { "" };
        println!("{:<24} {:<16} {:>6.2} {:>6.2}", format!("{}{mark}", r.dataset), r.metric, r.tau, r.rho);
    }
    println!();
    println!(
        "{:<16} {:>6} {:>15} {:>6} {:>15}",
        "metric", "tau", "tau 95% CI", "rho", "rho CI"
    );
    for s in &report.summaries {
        println!(
            "{:<16} {:>6.2} {:>15} {:>6.2} {:>15}",
            s.metric,
            s.mean_tau,
            format!("[{:.2}, {:.2}]", s.ci_tau.lo, s.ci_tau.hi),
            s.mean_rho,
            format!("[{:.2}, {:.2}]", s.ci_rho.lo, s.ci_rho.hi),
        );
    }
}

fn bench(s: &Settings, a: BenchArgs) -> Result<(), CliError> {
    let metrics = Metric::parse_list(&a.metrics)?;
    let rows = benchmark(&metrics, a.seconds, a.repeats, &s.metric_config, s.seed)?;
    if a.json {
        for r in &rows {
            println!("{}", serde_json::to_string(r).expect("row serialises"));
        }
        return Ok(());
    }
    println!("{:<16} {:>14} {:>16}", "metric", "s per 20 s", "vs siib-gauss");
    for r in &rows {
        let ratio = r.ratio_to_siib_gauss.map_or_else(|| "-".to_owned(), |v| format!("{v:.1}x"));
        println!("{:<16} {:>14.4} {:>16}", r.metric, r.seconds_per_20s, ratio);
    }
    eprintln!("median of {} runs on a {} s stimulus", a.repeats, a.seconds);
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let mut first_error = None;
    for path in &a.manifests {
        match load(path).and_then(|m| check_files(&m).map(|()| m)) {
            Ok(m) => println!("ok    {}: {} conditions", path.display(), m.conditions.len()),
            Err(e) => {
                println!("error {}: {e}", path.display());
                first_error.get_or_insert(e);
            }
        }
    }
    first_error.map_or(Ok(()), Err)
}

fn check_files(m: &DatasetManifest) -> Result<(), CliError> {
    for c in &m.conditions {
        for p in c.clean_files.iter().chain(&c.degraded_files) {
            if !p.is_file() {
                return Err(CliError::Io(format!("condition `{}`: missing file {}", c.id, p.display())));
            }
        }
    }
    Ok(())
}

fn demo(s: &Settings, a: DemoArgs) -> Result<(), CliError> {
    let opts = EvalOptions {
        metrics: s.metric_config.clone(),
        ..EvalOptions::default()
    };
    let demo = write_demo_dataset(&a.dir, a.seconds, s.seed, &opts).map_err(|e| input(e, &a.dir))?;
    println!("{}", demo.manifest.display());
    println!("{}", demo.reversed.display());
    Ok(())
}
