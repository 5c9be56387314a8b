use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::Method;

pub const METRICS_HEADER: &str =
    "run_id,method,dataset,homo,noise_ratio,seed,best_val_acc,test_acc,wall_time_s";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// `<group>-s<seed>`; rows differing only in seed share a group.
    pub run_id: String,
    pub method: Method,
    pub dataset: String,
    /// Empirical homophily of the training graph; absent without edges.
    pub homo: Option<f64>,
    pub noise_ratio: f64,
    pub seed: u64,
    pub best_val_acc: f64,
    pub test_acc: f64,
    pub wall_time_s: f64,
}

impl MetricsRow {
    pub fn group(&self) -> &str {
        group_of(&self.run_id)
    }
}

pub fn group_of(run_id: &str) -> &str {
    run_id.rsplit_once("-s").map_or(run_id, |(g, _)| g)
}

/// Rows in a fixed order. Reals are written in shortest round-trip form so
/// a parsed table compares equal to the one written.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(METRICS_HEADER);
        out.push('\n');
        for r in &self.rows {
            let homo = r.homo.map(|h| h.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{homo},{},{},{},{},{}",
                r.run_id, r.method, r.dataset, r.noise_ratio, r.seed, r.best_val_acc, r.test_acc, r.wall_time_s
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(METRICS_HEADER) {
            return Err(Error::param("metrics CSV header mismatch"));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let bad = || Error::param(format!("metrics CSV row {} malformed", k + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            rows.push(MetricsRow {
                run_id: f[0].to_string(),
                method: f[1].parse()?,
                dataset: f[2].to_string(),
                homo: if f[3].is_empty() { None } else { Some(real(f[3])?) },
                noise_ratio: real(f[4])?,
                seed: f[5].parse().map_err(|_| bad())?,
                best_val_acc: real(f[6])?,
                test_acc: real(f[7])?,
                wall_time_s: real(f[8])?,
            });
        }
        Ok(Self { rows })
    }

    /// Mean and sample standard deviation of test accuracy per group, in
    /// group order.
    pub fn summarize(&self) -> Vec<GroupSummary> {
        let mut groups: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry(r.group()).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|(group, rows)| {
                let test: Vec<f64> = rows.iter().map(|r| r.test_acc).collect();
                let val: Vec<f64> = rows.iter().map(|r| r.best_val_acc).collect();
                let (mean_test, std_test) = mean_std(&test);
                GroupSummary {
                    group: group.to_string(),
                    method: rows[0].method,
                    runs: rows.len(),
                    mean_test,
                    std_test,
                    mean_val: mean_std(&val).0,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: String,
    pub method: Method,
    pub runs: usize,
    pub mean_test: f64,
    pub std_test: f64,
    pub mean_val: f64,
}

pub const SUMMARY_HEADER: &str = "group,method,runs,mean_test_acc,std_test_acc,mean_best_val_acc";

pub fn summary_csv(summary: &[GroupSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.group, s.method, s.runs, s.mean_test, s.std_test, s.mean_val
        );
    }
    out
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
