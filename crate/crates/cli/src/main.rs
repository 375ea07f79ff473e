use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levyvar_cli::inspect::{predict, simulate, write_path};
use levyvar_cli::render::{read_report, write_report, REPORT_FILE};
use levyvar_cli::suite::select;
use levyvar_cli::{parse_config, run_suite, Formats, RunOptions, SuiteConfig};

#[derive(Parser)]
#[command(name = "levyvar", version, about = "Power variations of Lévy processes: predictions and Monte Carlo checks")]
struct Cli {
    /// Worker threads for replicas (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Selection {
    /// Suite config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Run only the experiment with this name.
    #[arg(long)]
    only: Option<String>,
    /// Override every experiment's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write reports; exits 1 if a hard tolerance fails.
    Verify {
        #[command(flatten)]
        sel: Selection,
        /// Output directory (overrides `out_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the oracle's verdicts for each experiment's functions as JSON.
    Predict {
        #[command(flatten)]
        sel: Selection,
    },
    /// Simulate one path of an experiment's model.
    Simulate {
        #[command(flatten)]
        sel: Selection,
        /// Output directory for path.dat, jumps.dat and path.bin.
        #[arg(long)]
        out: PathBuf,
        /// Step size (default: the experiment's finest grid).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
    /// Re-render saved JSON reports to CSV and plot data.
    Report {
        /// A report file, an experiment directory or a suite directory.
        input: PathBuf,
        /// Write here instead of next to each report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type Failure = Box<dyn std::error::Error>;

fn load(path: &Path) -> Result<SuiteConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn options(sel: &Selection, out: Option<PathBuf>) -> RunOptions {
    RunOptions { out_dir: out, seed: sel.seed, only: sel.only.clone() }
}

fn find_reports(input: &Path) -> Result<Vec<PathBuf>, Failure> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if input.join(REPORT_FILE).is_file() {
        return Ok(vec![input.join(REPORT_FILE)]);
    }
    let mut found: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path().join(REPORT_FILE)))
        .filter(|p| p.is_file())
        .collect();
    found.sort();
    if found.is_empty() {
        return Err(format!("no {REPORT_FILE} under {}", input.display()).into());
    }
    Ok(found)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Verify { sel, out } => {
            let cfg = load(&sel.config)?;
            let summary = run_suite(&cfg, &options(&sel, out))?;
            print!("{summary}");
            println!("reports in {}", summary.out_dir.display());
            Ok(summary.exit_code())
        }
        Command::Predict { sel } => {
            let cfg = load(&sel.config)?;
            let mut all = Vec::new();
            for exp in select(&cfg, &options(&sel, None))? {
                all.extend(predict(&exp).map_err(|e| format!("{}: {e}", exp.name))?);
            }
            println!("{}", serde_json::to_string_pretty(&all)?);
            Ok(0)
        }
        Command::Simulate { sel, out, delta, replica } => {
            let cfg = load(&sel.config)?;
            let exps = select(&cfg, &options(&sel, None))?;
            let [exp] = exps.as_slice() else {
                return Err("simulate needs exactly one experiment; pass --only NAME".into());
            };
            let path = simulate(exp, delta, replica)?;
            for f in write_path(&path, &out)? {
                println!("{}", f.display());
            }
            Ok(0)
        }
        Command::Report { input, out } => {
            for file in find_reports(&input)? {
                let report = read_report(&file)?;
                let here = file.parent().unwrap_or(Path::new(".")).to_path_buf();
                let (dir, json) = match &out {
                    Some(o) => (o.join(&report.name), true),
                    None => (here, false),
                };
                let files = write_report(&report, &dir, Formats { json, csv: true, plot: true })?;
                println!("{}: {} files in {}", report.name, files.len(), dir.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
