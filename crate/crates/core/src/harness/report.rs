use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{DatasetResult, EvalReport, MetricSummary};
use crate::error::{Error, Result};

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub report_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub scatter_csv: Vec<PathBuf>,
    pub all: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ReportRow<'a> {
    dataset: &'a str,
    metric: &'a str,
    tau: f64,
    rho: f64,
    a: f64,
    b: f64,
    rmse: f64,
    seen: bool,
    n_conditions: usize,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    metric: &'a str,
    mean_tau: f64,
    ci_tau_lo: f64,
    ci_tau_hi: f64,
    mean_rho: f64,
    ci_rho_lo: f64,
    ci_rho_hi: f64,
    mean_tau_seen: Option<f64>,
    mean_tau_unseen: Option<f64>,
    mean_rho_seen: Option<f64>,
    mean_rho_unseen: Option<f64>,
}

#[derive(Serialize)]
struct ScatterRow<'a> {
    condition_id: &'a str,
    d_raw: f64,
    d_normalized: f64,
    p: f64,
    tags: String,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn report_row(r: &DatasetResult) -> ReportRow<'_> {
    ReportRow {
        dataset: &r.dataset,
        metric: &r.metric,
        tau: round2(r.tau),
        rho: round2(r.rho),
        a: r.fit.a,
        b: r.fit.b,
        rmse: r.fit.rmse,
        seen: r.seen,
        n_conditions: r.scatter.len(),
    }
}

fn summary_row(s: &MetricSummary) -> SummaryRow<'_> {
    SummaryRow {
        metric: &s.metric,
        mean_tau: round2(s.mean_tau),
        ci_tau_lo: round2(s.ci_tau.lo),
        ci_tau_hi: round2(s.ci_tau.hi),
        mean_rho: round2(s.mean_rho),
        ci_rho_lo: round2(s.ci_rho.lo),
        ci_rho_hi: round2(s.ci_rho.hi),
        mean_tau_seen: s.seen.map(|m| round2(m.tau)),
        mean_tau_unseen: s.unseen.map(|m| round2(m.tau)),
        mean_rho_seen: s.seen.map(|m| round2(m.rho)),
        mean_rho_unseen: s.unseen.map(|m| round2(m.rho)),
    }
}

/// Min-max normalisation to [0, 1]; constant scores map to 0.
pub fn normalise_scores(d: &[f64]) -> Vec<f64> {
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    d.iter()
        .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

fn scatter_rows(r: &DatasetResult) -> Vec<ScatterRow<'_>> {
    let d: Vec<f64> = r.scatter.iter().map(|s| s.d).collect();
    r.scatter
        .iter()
        .zip(normalise_scores(&d))
        .map(|(s, n)| ScatterRow {
            condition_id: &s.condition_id,
            d_raw: s.d,
            d_normalized: n,
            p: s.p,
            tags: s.tags.iter().map(String::as_str).collect::<Vec<_>>().join(";"),
        })
        .collect()
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

struct Writer {
    written: Vec<PathBuf>,
    created_dirs: Vec<PathBuf>,
}

impl Writer {
    fn dir(&mut self, dir: &Path) -> Result<()> {
        if !dir.exists() {
            fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
            self.created_dirs.push(dir.to_owned());
        }
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, path: PathBuf, rows: &[T]) -> Result<PathBuf> {
        self.written.push(path.clone());
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::from(e).at_path(&path))?;
        for row in rows {
            w.serialize(row).map_err(|e| Error::from(e).at_path(&path))?;
        }
        w.flush().map_err(|e| Error::from(e).at_path(&path))?;
        Ok(path)
    }

    fn json<T: Serialize + ?Sized>(&mut self, path: PathBuf, value: &T) -> Result<PathBuf> {
        self.written.push(path.clone());
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").map_err(|e| Error::from(e).at_path(&path))?;
        Ok(path)
    }

    fn rollback(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

/// Writes `report.csv`, `summary.csv`, one `scatter/<dataset>__<metric>.csv`
/// per result, JSON mirrors of each and, when present, `bench.csv`. If any
/// write fails, the files written so far are removed.
pub fn write_report(report: &EvalReport, out_dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let mut w = Writer {
        written: Vec::new(),
        created_dirs: Vec::new(),
    };
    let result = write_all(&mut w, report, out_dir.as_ref());
    match result {
        Ok(mut files) => {
            files.all = w.written;
            Ok(files)
        }
        Err(e) => {
            w.rollback();
            Err(e)
        }
    }
}

fn write_all(w: &mut Writer, report: &EvalReport, out: &Path) -> Result<ReportFiles> {
    w.dir(out)?;
    let rows: Vec<_> = report.per_dataset.iter().map(report_row).collect();
    let report_csv = w.csv(out.join("report.csv"), &rows)?;
    w.json(out.join("report.json"), &rows)?;
    let summary: Vec<_> = report.summaries.iter().map(summary_row).collect();
    let summary_csv = w.csv(out.join("summary.csv"), &summary)?;
    w.json(out.join("summary.json"), &summary)?;

    let scatter_dir = out.join("scatter");
    w.dir(&scatter_dir)?;
    let mut scatter_csv = Vec::new();
    for r in &report.per_dataset {
        let stem = format!("{}__{}", file_stem(&r.dataset), file_stem(&r.metric));
        let rows = scatter_rows(r);
        scatter_csv.push(w.csv(scatter_dir.join(format!("{stem}.csv")), &rows)?);
        w.json(scatter_dir.join(format!("{stem}.json")), &rows)?;
    }
    if !report.bench.is_empty() {
        w.csv(out.join("bench.csv"), &report.bench)?;
        w.json(out.join("bench.json"), &report.bench)?;
    }
    Ok(ReportFiles {
        report_csv,
        summary_csv,
        scatter_csv,
        all: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{aggregate, AggregateConfig, ScatterPoint};
    use crate::stats::BootstrapConfig;
    use std::collections::BTreeSet;

    fn report() -> EvalReport {
        let d = [0.2, 0.4, 0.5, 0.9, 0.7];
        let p = [10.0, 35.0, 40.0, 95.0, 60.0];
        let scatter = d
            .iter()
            .zip(p)
            .enumerate()
            .map(|(i, (&d, p))| ScatterPoint {
                condition_id: format!("c{i}"),
                d,
                p,
                tags: BTreeSet::from(["ssn".to_string(), format!("t{i}")]),
            })
            .collect();
        let r = DatasetResult::from_scores("demo set", "stoi", true, scatter).unwrap();
        let cfg = AggregateConfig {
            bootstrap: BootstrapConfig {
                replicates: 1000,
                ..Default::default()
            },
            refit: true,
        };
        aggregate(&[r], &cfg).unwrap()
    }

    #[test]
    fn normalisation() {
        assert_eq!(normalise_scores(&[2.0, 4.0, 3.0]), [0.0, 1.0, 0.5]);
        assert_eq!(normalise_scores(&[1.0, 1.0]), [0.0, 0.0]);
    }

    #[test]
    fn writes_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let rep = report();
        let files = write_report(&rep, dir.path().join("out")).unwrap();
        let text = fs::read_to_string(&files.report_csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "dataset,metric,tau,rho,a,b,rmse,seen,n_conditions");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "demo set");
        assert_eq!(row[2], "1.0");
        assert_eq!(row[7], "true");
        assert_eq!(row[8], "5");

        let summary = fs::read_to_string(&files.summary_csv).unwrap();
        assert_eq!(
            summary.lines().next().unwrap(),
            "metric,mean_tau,ci_tau_lo,ci_tau_hi,mean_rho,ci_rho_lo,ci_rho_hi,\
             mean_tau_seen,mean_tau_unseen,mean_rho_seen,mean_rho_unseen"
        );
        let fields: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
        assert!(!fields[7].is_empty() && fields[8].is_empty());
        assert!(!fields[9].is_empty() && fields[10].is_empty());

        let scatter = fs::read_to_string(&files.scatter_csv[0]).unwrap();
        assert!(files.scatter_csv[0].ends_with("scatter/demo_set__stoi.csv"));
        let mut lines = scatter.lines();
        assert_eq!(lines.next().unwrap(), "condition_id,d_raw,d_normalized,p,tags");
        assert_eq!(lines.next().unwrap(), "c0,0.2,0.0,10.0,ssn;t0");
        assert_eq!(lines.nth(2).unwrap(), "c3,0.9,1.0,95.0,ssn;t3");
        assert_eq!(files.all.len(), 6);
    }

    #[test]
    fn json_mirrors_are_rounded() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&report(), dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        let rho = v[0]["mean_rho"].as_f64().unwrap();
        assert_eq!(rho, round2(rho));
        assert!(v[0]["mean_tau_unseen"].is_null());
        let rows: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(files.all.iter().find(|p| p.ends_with("report.json")).unwrap()).unwrap())
                .unwrap();
        assert_eq!(rows[0]["n_conditions"], 5);
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        fs::create_dir_all(out.join("scatter")).unwrap();
        // A directory where a scatter file should go makes that write fail.
        fs::create_dir_all(out.join("scatter/demo_set__stoi.csv")).unwrap();
        assert!(write_report(&report(), &out).is_err());
        assert!(!out.join("report.csv").exists());
        assert!(!out.join("summary.json").exists());
    }
}
