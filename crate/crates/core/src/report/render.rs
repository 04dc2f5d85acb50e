use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{file_stem, BenchmarkReport};
use crate::criteria::Criterion;
use crate::error::{Error, Result};
use crate::metrics::write_per_instance_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Markdown,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "md" | "markdown" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidConfig(format!("unknown output format `{other}`"))),
        }
    }
}

/// One Markdown row per method, in ranking order.
pub fn compare_table(report: &BenchmarkReport) -> String {
    let mut out = String::from("| Method |");
    for c in Criterion::ALL {
        let _ = write!(out, " {} |", c.title());
    }
    out.push_str(" S | Warnings |\n|---|");
    out.push_str(&"---:|".repeat(Criterion::ALL.len() + 1));
    out.push_str("---|\n");
    for m in &report.methods {
        let _ = write!(out, "| {} |", m.name);
        for c in Criterion::ALL {
            let _ = write!(out, " {:.2} ({}) |", m.score.scores[c], m.score.bands[c]);
        }
        let flag = if m.warnings > 0 { format!("⚠ {}", m.warnings) } else { String::new() };
        let _ = writeln!(out, " {:.2} | {} |", m.score.total, flag);
    }
    out
}

pub fn markdown(report: &BenchmarkReport) -> String {
    let mut out = String::from("# Explanation benchmark\n\n");
    let _ = writeln!(out, "- Run id: `{}`", report.run_id);
    let _ = writeln!(out, "- Seed: {}", report.seed);
    let _ = writeln!(
        out,
        "- Dataset: {} instances, {:?} {:?}",
        report.dataset.instances, report.dataset.kind, report.dataset.dims
    );
    let weights: Vec<String> =
        report.profile.weights.iter().map(|(c, w)| format!("{} {:.4}", c.name(), w)).collect();
    let _ = writeln!(out, "- Profile: {} ({})", report.profile.name, weights.join(", "));
    out.push_str("\n## Scores\n\n");
    out.push_str(&compare_table(report));
    if let Some(drift) = &report.drift {
        out.push_str("\n## Drift\n\n| Feature | PSI |\n|---|---:|\n");
        for f in &drift.features {
            let _ = writeln!(out, "| {} | {:.4} |", f.feature, f.psi);
        }
        if let Some(p) = drift.prediction_psi {
            let _ = writeln!(out, "| predictions | {p:.4} |");
        }
        let _ = writeln!(
            out,
            "\nFeature drift: {}. Prediction drift: {}.",
            yes_no(drift.feature_drift),
            yes_no(drift.prediction_drift)
        );
        if let Some(a) = &report.adaptation {
            let _ = writeln!(out, "\nWeights adapted by {} rule(s):\n", a.fired.len());
            for c in Criterion::ALL {
                let _ = writeln!(out, "- {}: {:.4} -> {:.4}", c.name(), a.before[c], a.after[c]);
            }
        }
    }
    if !report.warnings.is_empty() {
        out.push_str("\n## Warnings\n\n");
        for w in &report.warnings {
            let mut place = Vec::new();
            if let Some(m) = &w.method {
                place.push(m.clone());
            }
            if let Some(i) = w.instance {
                place.push(format!("instance {i}"));
            }
            if let Some(c) = w.criterion {
                place.push(c.name().to_string());
            }
            let _ = writeln!(out, "- [{}] {}", place.join(", "), w.message);
        }
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write_synced(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let ctx = || path.display().to_string();
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    write(&mut w)?;
    let file = w.into_inner().map_err(|e| Error::io(ctx(), e.into_error()))?;
    file.sync_all().map_err(|e| Error::io(ctx(), e))
}

/// Writes the requested files into `dir` and returns their paths.
pub fn emit(report: &BenchmarkReport, dir: &Path, formats: &BTreeSet<Format>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            Format::Json => {
                let path = dir.join("report.json");
                let text = report.to_json()?;
                write_synced(&path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io("report.json", e)))?;
                written.push(path);
            }
            Format::Markdown => {
                let path = dir.join("report.md");
                let text = markdown(report);
                write_synced(&path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io("report.md", e)))?;
                written.push(path);
            }
            Format::Csv => {
                for m in report.methods.iter().filter(|m| m.per_instance_csv.is_some()) {
                    let path = dir.join(format!("per_instance_{}.csv", file_stem(&m.name)));
                    write_synced(&path, |w| write_per_instance_csv(&m.per_instance, w))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}
