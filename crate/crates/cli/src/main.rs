//! `synalloc`: run allocation scenarios, audit a run, or summarise a dataset.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 invariant
//! failure.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use synalloc::stats::summarize_dataset;
use synalloc::validate::validate;
use synalloc::{
    load_air_quality, run_scenario_with, summary_csv, summary_table, EngineConfig, ErrorKind, InitialData,
    LoadOptions, RunConfig, RunReport, Scenario, SyntheticInit, ThresholdPolicy,
};

#[derive(Parser)]
#[command(name = "synalloc", version, about = "Synopsis-based allocation of streaming vectors to partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream synthetic vectors through the allocator and report partition statistics.
    Run(RunArgs),
    /// Run the audit and invariant probes against a randomized run.
    Validate(SetupArgs),
    /// Summarise a cleaned air-quality CSV.
    Stats {
        /// Dataset path (published `;`/decimal-comma layout or plain CSV).
        #[arg(env = "SYNALLOC_DATASET")]
        dataset: PathBuf,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
    Custom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SetupArgs {
    /// Preset 1 (μ=25, σ=10), 2 (μ=25, σ=20), 3 (μ=50, σ=50), all three, or custom.
    #[arg(long, value_enum, default_value = "1")]
    scenario: ScenarioArg,
    /// Generation mean for `--scenario custom`.
    #[arg(long)]
    mu: Option<f64>,
    /// Generation standard deviation for `--scenario custom`.
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of synthetic vectors to stream [default: 10000; required for custom].
    #[arg(long)]
    vectors: Option<usize>,
    #[arg(long, short = 'n', default_value_t = 5)]
    partitions: usize,
    /// Vector dimension in synthetic mode (a dataset fixes it at 5).
    #[arg(long, default_value_t = 5)]
    dimension: usize,
    /// Initialise partitions from a random split of this dataset instead of synthetic data.
    #[arg(long, env = "SYNALLOC_DATASET")]
    dataset: Option<PathBuf>,
    /// Reject malformed dataset rows instead of skipping them.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Minimum micro-cluster size kept in a synopsis.
    #[arg(long, default_value_t = 50)]
    alpha: u64,
    /// CF-tree branching factor.
    #[arg(long, default_value_t = 8)]
    branching: usize,
    /// Absolute CF-tree absorption threshold.
    #[arg(long, conflicts_with = "threshold_factor")]
    threshold: Option<f64>,
    /// Threshold as a multiple of the initial data's RMS per-dimension std.
    #[arg(long, default_value_t = 0.5)]
    threshold_factor: f64,
    /// Weight given to each outlier metric.
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    /// Outlier cut-off in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    k: f64,
    /// Insertions between synopsis refreshes.
    #[arg(long, default_value_t = 1)]
    refresh: u64,
    /// Synthetic initial vectors per partition.
    #[arg(long, default_value_t = 200)]
    init_per_partition: usize,
    /// Displacement of synthetic initial means, in units of σ.
    #[arg(long, default_value_t = 2.0)]
    init_spread: f64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    setup: SetupArgs,
    /// Report file; written atomically.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// `json` writes the full report(s), `csv` the summary table.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write one JSON line per allocation to this file (single scenario only).
    #[arg(long)]
    records: Option<PathBuf>,
}

impl SetupArgs {
    fn scenarios(&self) -> anyhow::Result<Vec<Scenario>> {
        Ok(match self.scenario {
            ScenarioArg::One => vec![Scenario::One],
            ScenarioArg::Two => vec![Scenario::Two],
            ScenarioArg::Three => vec![Scenario::Three],
            ScenarioArg::All => Scenario::PRESETS.to_vec(),
            ScenarioArg::Custom => {
                let (Some(mu), Some(sigma), Some(_)) = (self.mu, self.sigma, self.vectors) else {
                    return Err(config_error("--scenario custom needs --mu, --sigma and --vectors"));
                };
                vec![Scenario::Custom { mu, sigma }]
            }
        })
    }

    fn run_configs(&self) -> anyhow::Result<Vec<RunConfig>> {
        if self.scenario != ScenarioArg::Custom && (self.mu.is_some() || self.sigma.is_some()) {
            return Err(config_error("--mu/--sigma only apply to --scenario custom"));
        }
        let engine = EngineConfig {
            partitions: self.partitions,
            dimension: self.dimension,
            alpha: self.alpha,
            branching: self.branching,
            threshold: match self.threshold {
                Some(t) => ThresholdPolicy::Fixed(t),
                None => ThresholdPolicy::DataScaled(self.threshold_factor),
            },
            theta: self.theta,
            k: self.k,
            refresh_interval: self.refresh,
        };
        let initial = match &self.dataset {
            Some(path) => InitialData::Dataset {
                path: path.clone(),
                strict: self.strict,
            },
            None => InitialData::Synthetic(SyntheticInit {
                per_partition: self.init_per_partition,
                spread: self.init_spread,
                ..SyntheticInit::default()
            }),
        };
        let base = RunConfig {
            engine,
            vectors: self.vectors.unwrap_or(10_000),
            initial,
            seed: self.seed,
            ..RunConfig::default()
        };
        Ok(self.scenarios()?.into_iter().map(|s| base.clone().with_scenario(s)).collect())
    }
}

fn config_error(msg: &str) -> anyhow::Error {
    anyhow::Error::new(synalloc::Error::Config(msg.into()))
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes via a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = parent_dir(path);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let configs = args.setup.run_configs()?;
    if args.records.is_some() && configs.len() > 1 {
        return Err(config_error("--records needs a single scenario"));
    }
    for c in &configs {
        c.engine.validate()?;
    }

    let reports: Vec<RunReport> = if let Some(path) = &args.records {
        let tmp = tempfile::NamedTempFile::new_in(parent_dir(path))?;
        let mut out = BufWriter::new(tmp);
        let mut io_err = None;
        let run = run_scenario_with(&configs[0], |r| {
            if io_err.is_none() {
                if let Err(e) = writeln!(out, "{}", r.to_json_line()) {
                    io_err = Some(e);
                }
            }
        })?;
        if let Some(e) = io_err {
            return Err(e).context("writing allocation records");
        }
        let tmp = out.into_inner().map_err(|e| anyhow!("writing allocation records: {}", e.error()))?;
        tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
        vec![run.report]
    } else {
        // independent scenarios run side by side; order of results is fixed
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| s.spawn(move || run_scenario_with(c, |_| {}).map(|r| r.report)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scenario thread panicked"))
                .collect::<synalloc::Result<Vec<_>>>()
        })?
    };

    let csv = summary_csv(&summary_table(&reports))?;
    if let Some(path) = &args.out {
        let body = match args.format {
            Format::Csv => csv.clone().into_bytes(),
            Format::Json if reports.len() == 1 => (reports[0].to_json()? + "\n").into_bytes(),
            Format::Json => (serde_json::to_string_pretty(&reports)? + "\n").into_bytes(),
        };
        write_atomic(path, &body)?;
    }
    print!("{csv}");
    Ok(())
}

fn cmd_validate(args: &SetupArgs) -> anyhow::Result<bool> {
    let mut ok = true;
    for cfg in args.run_configs()? {
        let report = validate(&cfg)?;
        println!("scenario {} seed {}", cfg.scenario, cfg.seed);
        print!("{report}");
        ok &= report.all_passed();
    }
    println!("{}", if ok { "all checks passed" } else { "some checks FAILED" });
    Ok(ok)
}

fn cmd_stats(dataset: &Path, strict: bool) -> anyhow::Result<()> {
    let ds = load_air_quality(dataset, LoadOptions { strict })?;
    let summary = summarize_dataset(&ds)?;
    println!("rows: {}", summary.rows);
    println!("{:<10} {:>14} {:>14} {:>12} {:>12}", "dimension", "mean", "std", "min", "max");
    for d in &summary.dimensions {
        println!("{:<10} {:>14.6} {:>14.6} {:>12.4} {:>12.4}", d.name, d.mean, d.std, d.min, d.max);
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<synalloc::Error>().map(synalloc::Error::kind) {
        Some(ErrorKind::Config) => 1,
        Some(ErrorKind::Data) => 2,
        Some(ErrorKind::Internal) => 3,
        // file system trouble writing outputs
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Validate(args) => cmd_validate(args),
        Command::Stats { dataset, strict } => cmd_stats(dataset, *strict).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
