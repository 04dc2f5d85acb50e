use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use uxeval::io::{read_csv_file, write_csv_file, write_npy_file, NdArray};
use uxeval::oracle::{generate_synthetic, LinearModel, Model, SyntheticKind};
use uxeval::report::{compare_table, emit, explain_dataset, run_benchmark, Format, RunConfig};
use uxeval::score::{builtin_profiles, detect_drift, load_profile};
use uxeval::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "uxeval", version, about = "Evaluate and benchmark feature-attribution explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write the reports.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `output_dir`, then `uxeval-out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "json,md,csv")]
        format: Vec<String>,
    },
    /// Write one method's attributions as NPY with a JSON sidecar.
    Explain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in domain weight profiles.
    Profiles {
        #[command(subcommand)]
        action: ProfilesAction,
    },
    /// Population stability index of every feature between two CSV files.
    Drift {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        current: PathBuf,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Generate a synthetic dataset with known ground truth.
    Synth {
        #[arg(long)]
        kind: SyntheticKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProfilesAction {
    List,
    /// Print a profile in the percent file format.
    Show { name: String },
}

fn load_config(path: &Path) -> Result<(RunConfig, PathBuf)> {
    RunConfig::load(path).map_err(|e| match e {
        Error::Io { context, source } => Error::InvalidConfig(format!("{context}: {source}")),
        e => e,
    })
}

fn evaluate(config: &Path, seed: Option<u64>, out: Option<PathBuf>, format: &[String]) -> Result<()> {
    let formats = format.iter().map(|f| f.parse()).collect::<Result<BTreeSet<Format>>>()?;
    let (mut cfg, base) = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let dir = out
        .or_else(|| cfg.output_dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from("uxeval-out"));
    let report = run_benchmark(&cfg, &base)?;
    for path in emit(&report, &dir, &formats)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", compare_table(&report));
    for w in report.warnings.iter().filter(|w| w.kind == uxeval::metrics::WarningKind::MethodFailed) {
        eprintln!("warning: method `{}` failed: {}", w.method.as_deref().unwrap_or("?"), w.message);
    }
    Ok(())
}

fn explain(config: &Path, method: &str, out: &Path) -> Result<()> {
    let (cfg, base) = load_config(config)?;
    let (array, sidecar) = explain_dataset(&cfg, &base, method)?;
    write_npy_file(&array, out)?;
    let sidecar_path = out.with_extension("json");
    let text = serde_json::to_string_pretty(&sidecar)? + "\n";
    std::fs::write(&sidecar_path, text).map_err(|e| Error::io(sidecar_path.display().to_string(), e))?;
    eprintln!("wrote {} and {}", out.display(), sidecar_path.display());
    Ok(())
}

fn percent_file(name: &str) -> Result<serde_json::Value> {
    let p = load_profile(name)?;
    let weights: serde_json::Map<String, serde_json::Value> =
        p.weights.iter().map(|(c, w)| (c.name().to_string(), json!((w * 100.0 * 1e9).round() / 1e9))).collect();
    Ok(json!({"name": p.name, "weights": weights}))
}

fn profiles(action: &ProfilesAction) -> Result<()> {
    match action {
        ProfilesAction::List => {
            for p in builtin_profiles() {
                let pct: Vec<String> = p.weights.iter().map(|(c, w)| format!("{}={}", c.name(), w * 100.0)).collect();
                println!("{:<12} {}", p.name, pct.join(" "));
            }
        }
        ProfilesAction::Show { name } => println!("{}", serde_json::to_string_pretty(&percent_file(name)?)?),
    }
    Ok(())
}

fn drift(reference: &Path, current: &Path, bins: usize) -> Result<()> {
    let r = read_csv_file(reference)?;
    let c = read_csv_file(current)?;
    let report = detect_drift(&r.rows(), &c.rows(), &c.feature_names(), bins)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn synth(kind: SyntheticKind, n: usize, seed: u64, out: &Path) -> Result<()> {
    let s = generate_synthetic(kind, n, seed)?;
    let companion = |suffix: &str| {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.with_file_name(format!("{stem}.{suffix}"))
    };
    match kind {
        SyntheticKind::TabularLinear | SyntheticKind::TabularGroups => {
            write_csv_file(&s.dataset, out)?;
            let weights = s.true_weights.expect("tabular kinds have weights");
            let model = Model::Linear(LinearModel::identity(weights, 0.0));
            let path = companion("model.json");
            std::fs::write(&path, model.to_json()? + "\n").map_err(|e| Error::io(path.display().to_string(), e))?;
            eprintln!("wrote {} and {}", out.display(), path.display());
        }
        SyntheticKind::ImageShapes => {
            write_npy_file(&uxeval::io::image_dataset_to_array(&s.dataset)?, out)?;
            let masks = s.masks.expect("image kinds have masks");
            let data = masks.iter().flatten().map(|&m| if m { 1.0 } else { 0.0 }).collect();
            let mut shape = vec![n];
            shape.extend(s.dataset.shape.dims());
            let path = companion("mask.npy");
            write_npy_file(&NdArray::new(shape, data)?, &path)?;
            eprintln!("wrote {} and {}", out.display(), path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate { config, seed, out, format } => evaluate(&config, seed, out, &format),
        Command::Explain { config, method, out } => explain(&config, &method, &out),
        Command::Profiles { action } => profiles(&action),
        Command::Drift { reference, current, bins } => drift(&reference, &current, bins),
        Command::Synth { kind, n, seed, out } => synth(kind, n, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ErrorClass::Config.exit_code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
