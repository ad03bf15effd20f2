//! Command-line front end: `icl-gap run` and `icl-gap report`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use icl_gap::runner::{self, RunConfig};
use icl_gap::{EvalSetting, Error, ModelEndpoint};

#[derive(Parser)]
#[command(name = "icl-gap", version, about = "Few-shot semantic parsing generalization-gap harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model on one dataset and persist a resumable run record.
    Run(RunArgs),
    /// Turn run records into gap reports and plot-data CSVs.
    Report {
        /// Glob matching run_record.json files or run directories (repeatable).
        #[arg(long, required = true)]
        records: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// tt, rr, tr or rt (repeatable).
    #[arg(long = "setting")]
    settings: Vec<String>,
    #[arg(long)]
    shots: Option<usize>,
    /// Repeatable.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    max_queries: Option<usize>,
    /// Completion endpoint URL.
    #[arg(long, conflicts_with = "mock")]
    endpoint: Option<String>,
    /// `oracle` or `noise:<p>`.
    #[arg(long)]
    mock: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    model_label: Option<String>,
    #[arg(long)]
    concurrency: Option<usize>,
    /// Store full prompt text in every entry instead of only its hash.
    #[arg(long)]
    store_prompts: bool,
}

fn path_value(p: PathBuf) -> toml::Value {
    toml::Value::String(p.to_string_lossy().into_owned())
}

fn int_value(n: u64) -> Result<toml::Value, Error> {
    i64::try_from(n)
        .map(toml::Value::Integer)
        .map_err(|_| Error::Config(format!("{n} is out of range")))
}

fn build_config(args: RunArgs) -> Result<RunConfig, Error> {
    let mut table = match &args.config {
        Some(path) => RunConfig::load_table(path)?,
        None => toml::Table::new(),
    };
    if let Some(d) = args.dataset {
        d.parse::<icl_gap::DatasetId>()?;
        table.insert("dataset".into(), toml::Value::String(d.to_ascii_lowercase()));
    }
    if let Some(p) = args.train {
        table.insert("train".into(), path_value(p));
    }
    if let Some(p) = args.test {
        table.insert("test".into(), path_value(p));
    }
    if !args.settings.is_empty() {
        let settings = args
            .settings
            .iter()
            .map(|s| s.parse::<EvalSetting>().map(|s| toml::Value::String(s.code().into())))
            .collect::<Result<Vec<_>, _>>()?;
        table.insert("settings".into(), toml::Value::Array(settings));
    }
    if let Some(k) = args.shots {
        table.insert("shots".into(), int_value(k as u64)?);
    }
    if !args.seeds.is_empty() {
        let seeds = args.seeds.into_iter().map(int_value).collect::<Result<Vec<_>, _>>()?;
        table.insert("seeds".into(), toml::Value::Array(seeds));
    }
    if let Some(n) = args.max_queries {
        table.insert("max_queries".into(), int_value(n as u64)?);
    }
    if let Some(url) = args.endpoint {
        let mut ep = match table.remove("endpoint") {
            Some(toml::Value::Table(t)) if t.get("kind").and_then(|k| k.as_str()) == Some("http_completion") => t,
            _ => toml::Table::new(),
        };
        ep.insert("kind".into(), toml::Value::String("http_completion".into()));
        ep.insert("url".into(), toml::Value::String(url));
        table.insert("endpoint".into(), toml::Value::Table(ep));
    }
    if let Some(mock) = args.mock {
        let ep = toml::Value::try_from(ModelEndpoint::parse_mock(&mock)?)
            .map_err(|e| Error::Config(e.to_string()))?;
        table.insert("endpoint".into(), ep);
    }
    if let Some(p) = args.out {
        table.insert("out".into(), path_value(p));
    }
    if let Some(label) = args.model_label {
        table.insert("model_label".into(), toml::Value::String(label));
    }
    if let Some(c) = args.concurrency {
        table.insert("concurrency".into(), int_value(c as u64)?);
    }
    if args.store_prompts {
        table.insert("store_prompts".into(), toml::Value::Boolean(true));
    }
    RunConfig::from_table(table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let prepared = match build_config(args).and_then(runner::prepare) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match runner::execute(prepared) {
                Ok(record) => {
                    for agg in &record.aggregates {
                        println!(
                            "{:<12} seed {:<4} n={:<5} acc={:.4} failures={}",
                            agg.setting.to_string(),
                            agg.seed,
                            agg.n,
                            agg.accuracy,
                            agg.failures
                        );
                    }
                    println!("wrote {}", record.config.out.join(runner::RECORD_FILE).display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(if e.is_config() { 1 } else { 2 })
                }
            }
        }
        Command::Report { records, out } => {
            let mut paths = Vec::new();
            for pattern in &records {
                match runner::find_records(pattern) {
                    Ok(found) => paths.extend(found),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
            }
            paths.sort();
            paths.dedup();
            match runner::report(&paths, &out) {
                Ok(written) => {
                    for p in written {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(if e.is_config() { 1 } else { 2 })
                }
            }
        }
    }
}
