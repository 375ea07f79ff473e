//! Report artifacts: JSON, CSV tables and two-column plot data.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use levy_variation::mc_harness::{ExperimentReport, LlnRow};

use crate::config::Formats;

pub const REPORT_FILE: &str = "report.json";

pub fn report_json(report: &ExperimentReport) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

pub fn read_report(path: &Path) -> io::Result<ExperimentReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// One series, two whitespace-separated columns, `#` comments.
fn write_dat(path: &Path, title: &str, columns: (&str, &str), points: &[(f64, f64)]) -> io::Result<()> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# {title}")?;
    writeln!(w, "# {} {}", columns.0, columns.1)?;
    for (x, y) in points {
        writeln!(w, "{} {}", num(*x), num(*y))?;
    }
    w.flush()
}

fn lln_table(rows: &[LlnRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.function.clone(),
                num(r.delta),
                r.n_steps.to_string(),
                num(r.horizon),
                format!("{:?}", r.theorem),
                opt(r.predicted),
                num(r.estimate.mean),
                num(r.estimate.std_error),
                num(r.rel_error),
                num(r.mean_abs_error),
                num(r.sup_error),
                num(r.pass_fraction),
            ]
        })
        .collect()
}

const LLN_HEADER: [&str; 12] = [
    "function", "delta", "n_steps", "horizon", "theorem", "predicted", "mean", "std_error", "rel_error",
    "mean_abs_error", "sup_error", "pass_fraction",
];

/// Rows grouped by key in first-seen order.
fn series<T, K: PartialEq + Clone>(rows: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut out: Vec<(K, Vec<&T>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match out.iter_mut().find(|(j, _)| *j == k) {
            Some((_, v)) => v.push(r),
            None => out.push((k, vec![r])),
        }
    }
    out
}

fn csv_files(report: &ExperimentReport, dir: &Path, files: &mut Vec<PathBuf>) -> io::Result<()> {
    let mut put = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> io::Result<()> {
        let path = dir.join(name);
        write_csv(&path, header, &rows)?;
        files.push(path);
        Ok(())
    };
    let checks = report
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), c.tolerance.clone(), num(c.observed), num(c.threshold), c.passed.to_string(), c.hard.to_string()])
        .collect();
    put("checks.csv", &["name", "tolerance", "observed", "threshold", "passed", "hard"], checks)?;
    if !report.lln.is_empty() {
        put("lln.csv", &LLN_HEADER, lln_table(&report.lln))?;
    }
    if !report.long_horizon.is_empty() {
        put("long_horizon.csv", &LLN_HEADER, lln_table(&report.long_horizon))?;
    }
    if let Some(rate) = &report.rate {
        let rows = rate.deltas.iter().zip(&rate.errors).map(|(d, e)| vec![rate.function.clone(), num(*d), num(*e)]).collect();
        put("rate.csv", &["function", "delta", "mean_abs_error"], rows)?;
    }
    if !report.clt.is_empty() {
        let rows = report
            .clt
            .iter()
            .map(|r| {
                vec![
                    r.function.clone(),
                    num(r.delta),
                    format!("{:?}", r.theorem),
                    r.variant.clone(),
                    num(r.predicted_variance),
                    num(r.empirical_variance),
                    num(r.variance_rel_error),
                    num(r.mean),
                    num(r.ks_distance),
                    opt(r.centering.map(|c| c.mean)),
                    opt(r.centering.map(|c| c.std_error)),
                ]
            })
            .collect();
        let header = [
            "function", "delta", "theorem", "variant", "predicted_variance", "empirical_variance",
            "variance_rel_error", "mean", "ks_distance", "centering", "centering_std_error",
        ];
        put("clt.csv", &header, rows)?;
    }
    if let Some(j) = &report.joint {
        let mut rows = Vec::new();
        for (i, (p, e)) in j.predicted.iter().zip(&j.empirical).enumerate() {
            for (k, (pv, ev)) in p.iter().zip(e).enumerate() {
                rows.push(vec![i.to_string(), k.to_string(), num(*pv), num(*ev)]);
            }
        }
        put("joint.csv", &["row", "column", "predicted", "empirical"], rows)?;
    }
    if !report.conditional.is_empty() {
        let rows = report
            .conditional
            .iter()
            .map(|r| {
                vec![
                    r.function.clone(),
                    r.scenario.to_string(),
                    r.jumps.len().to_string(),
                    num(r.delta),
                    num(r.predicted_variance),
                    num(r.empirical_variance),
                    num(r.variance_rel_error),
                ]
            })
            .collect();
        let header = ["function", "scenario", "jumps", "delta", "predicted_variance", "empirical_variance", "variance_rel_error"];
        put("conditional.csv", &header, rows)?;
    }
    Ok(())
}

fn plot_files(report: &ExperimentReport, dir: &Path, files: &mut Vec<PathBuf>) -> io::Result<()> {
    let mut put = |name: String, title: String, columns: (&str, &str), points: Vec<(f64, f64)>| -> io::Result<()> {
        let path = dir.join(name);
        write_dat(&path, &title, columns, &points)?;
        files.push(path);
        Ok(())
    };
    for (k, ((f, th), rows)) in series(&report.lln, |r| (r.function.clone(), r.theorem)).into_iter().enumerate() {
        let pts = rows.iter().map(|r| (r.delta, r.rel_error)).collect();
        put(format!("lln_{k}.dat"), format!("LLN {f} {th:?}"), ("delta", "rel_error"), pts)?;
    }
    for (k, (f, rows)) in series(&report.long_horizon, |r| r.function.clone()).into_iter().enumerate() {
        let pts = rows.iter().map(|r| (r.horizon, r.estimate.mean)).collect();
        put(format!("long_horizon_{k}.dat"), format!("long horizon {f}"), ("horizon", "normalised_value"), pts)?;
    }
    if let Some(rate) = &report.rate {
        let pts = rate.deltas.iter().copied().zip(rate.errors.iter().copied()).collect();
        let title = format!("rate {} slope {} r2 {}", rate.function, rate.fit.slope, rate.fit.r_squared);
        put("rate.dat".into(), title, ("delta", "mean_abs_error"), pts)?;
    }
    let clt = series(&report.clt, |r| (r.function.clone(), r.theorem, r.variant.clone()));
    for (k, ((f, th, v), rows)) in clt.into_iter().enumerate() {
        let pts = rows.iter().map(|r| (r.delta, r.empirical_variance)).collect();
        let title = format!("CLT {f} {th:?} {v} predicted variance {}", rows[0].predicted_variance);
        put(format!("clt_{k}.dat"), title, ("delta", "empirical_variance"), pts)?;
    }
    let cond = series(&report.conditional, |r| (r.function.clone(), r.scenario));
    for (k, ((f, s), rows)) in cond.into_iter().enumerate() {
        let pts = rows.iter().map(|r| (r.delta, r.empirical_variance)).collect();
        let title = format!("conditional {f} scenario {s} predicted variance {}", rows[0].predicted_variance);
        put(format!("conditional_{k}.dat"), title, ("delta", "empirical_variance"), pts)?;
    }
    Ok(())
}

/// Write the artifacts of one report into `dir`, returning the paths.
pub fn write_report(report: &ExperimentReport, dir: &Path, formats: Formats) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    if formats.json {
        let path = dir.join(REPORT_FILE);
        fs::write(&path, report_json(report)?)?;
        files.push(path);
    }
    if formats.csv {
        csv_files(report, dir, &mut files)?;
    }
    if formats.plot {
        plot_files(report, dir, &mut files)?;
    }
    Ok(files)
}
