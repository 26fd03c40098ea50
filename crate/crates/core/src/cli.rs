//! Command-line interface: `synth`, `run`, `report`, `preprocess`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{self, ReportOptions, ResultsStore, RunConfig, RESULTS_FILE};
use crate::ingest::{self, LoadOptions, SubjectDataset};
use crate::learn::GridPreset;
use crate::model::{CombinationSpec, SpecFilter, TRIALS_PER_SUBJECT};
use crate::preprocess::{feature_table, SubjectFeatures};

/// Exit code of `run` when some tasks failed.
pub const EXIT_TASK_FAILURES: i32 = 13;

#[derive(Debug, Parser)]
#[command(name = "gaitbench", version, about = "Gait GRF preprocessing × classifier benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset in the canonical CSV layout.
    Synth {
        /// Number of subjects.
        #[arg(long, short = 'n')]
        n_subjects: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every selected (subject, combination) pair into results.csv.
    Run(RunArgs),
    /// Aggregate results.csv into the report tables.
    Report {
        /// Results file (default: <out>/results.csv).
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Aggregate an incomplete grid.
        #[arg(long)]
        partial: bool,
    },
    /// Dump the feature matrix of one subject and combination.
    Preprocess {
        #[command(flatten)]
        source: SourceArgs,
        /// Full combination, e.g. filtering=none;deriv=grf;T=101;red=pca;wn=0;scale=z_at_mm_at;clf=svm
        #[arg(long)]
        spec: String,
        /// Subject id (default: first subject).
        #[arg(long)]
        subject: Option<String>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Dataset directory with meta.csv and trials/.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Generate N synthetic subjects instead of reading a directory.
    #[arg(long, value_name = "N")]
    pub synth: Option<usize>,
    /// Seed of the synthetic dataset.
    #[arg(long, default_value_t = 0)]
    pub synth_seed: u64,
    /// Warn instead of failing on incomplete subjects.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Output directory; results.csv is created or resumed there.
    #[arg(long)]
    pub out: PathBuf,
    /// Global seed for folds and training.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated subject ids.
    #[arg(long, value_delimiter = ',')]
    pub subjects: Option<Vec<String>>,
    /// Combination filter, e.g. "clf=svm;red=pca,tc".
    #[arg(long, default_value = "")]
    pub filter: String,
    /// Hyperparameter grid: coarse or paper.
    #[arg(long, default_value = "coarse")]
    pub grid: String,
    /// Worker threads (default: available cores).
    #[arg(long, env = "GAITBENCH_WORKERS")]
    pub workers: Option<usize>,
    /// Fit PCA and scaling on each fold's training trials.
    #[arg(long)]
    pub pca_foldwise: bool,
    /// No per-task progress lines.
    #[arg(long)]
    pub quiet: bool,
}

impl SourceArgs {
    pub fn load(&self) -> Result<Vec<SubjectDataset>> {
        match (&self.data_dir, self.synth) {
            (Some(_), Some(_)) => Err(Error::InvalidArgument(
                "pass either --data-dir or --synth, not both".into(),
            )),
            (None, None) => Err(Error::InvalidArgument(
                "no data source: pass --data-dir DIR or --synth N".into(),
            )),
            (Some(dir), None) => ingest::load_dataset(dir, &LoadOptions { lenient: self.lenient }),
            (None, Some(n)) => ingest::synthesize_dataset(n, self.synth_seed),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs a parsed command; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth { n_subjects, seed, out } => cmd_synth(n_subjects, seed, &out),
        Command::Run(args) => cmd_run(&args),
        Command::Report { results, out, partial } => {
            let results = results.unwrap_or_else(|| out.join(RESULTS_FILE));
            cmd_report(&results, &out, partial)
        }
        Command::Preprocess {
            source,
            spec,
            subject,
            out,
        } => cmd_preprocess(&source, &spec, subject.as_deref(), out.as_deref()),
    }
}

fn cmd_synth(n_subjects: usize, seed: u64, out: &Path) -> Result<i32> {
    let data = ingest::synthesize_dataset(n_subjects, seed)?;
    ingest::write_dataset(out, &data)?;
    println!(
        "wrote {} subjects × {} trials ({} trial files + meta.csv) to {}",
        data.len(),
        TRIALS_PER_SUBJECT,
        2 * TRIALS_PER_SUBJECT * data.len(),
        out.display()
    );
    Ok(0)
}

/// Validates every argument before any data is loaded.
pub fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let filter: SpecFilter = args.filter.parse()?;
    let grid: GridPreset = args.grid.parse()?;
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(Error::InvalidArgument("--workers must be at least 1".into()));
    }
    if args.source.data_dir.is_none() && args.source.synth.is_none() {
        return Err(Error::InvalidArgument(
            "no data source: pass --data-dir DIR or --synth N".into(),
        ));
    }
    let mut cfg = RunConfig::new(&args.out);
    cfg.seed = args.seed;
    cfg.subjects = args.subjects.clone();
    cfg.filter = filter;
    cfg.grid = grid;
    cfg.workers = workers;
    cfg.pca_foldwise = args.pca_foldwise;
    cfg.progress = !args.quiet;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let cfg = run_config(args)?;
    let data = args.source.load()?;
    let s = experiment::run_grid(&data, &cfg)?;
    let new = s.subjects * s.specs - s.already_done;
    println!(
        "{} subjects × {} combinations: {} already done, {new} new tasks, {} completed, {} failed",
        s.subjects,
        s.specs,
        s.already_done,
        s.completed,
        s.failures.len()
    );
    if s.unsupported > 0 {
        println!("skipped {} unsupported combinations (single-trial scaling needs red=tc)", s.unsupported);
    }
    println!("results: {}", cfg.results_path().display());
    if s.failures.is_empty() {
        return Ok(0);
    }
    eprintln!("{} tasks failed:", s.failures.len());
    for f in &s.failures {
        eprintln!("  {} {}: {}", f.subject_id, f.spec, f.message);
    }
    Ok(EXIT_TASK_FAILURES)
}

fn cmd_report(results: &Path, out: &Path, partial: bool) -> Result<i32> {
    let store = ResultsStore::read(results)?;
    let outcome = experiment::write_report(&store, out, ReportOptions { partial })?;
    println!("top combinations by mean F1:");
    println!("{:>4}  {:>7}  {:>7}  combination", "rank", "mean_f1", "sd");
    for b in outcome.best.iter().take(10) {
        let sd = b.sd_f1.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!("{:>4}  {:>7.4}  {:>7}  {}", b.rank, b.mean_f1, sd, b.spec);
    }
    for p in &outcome.written {
        println!("wrote {}", p.display());
    }
    for (name, why) in &outcome.skipped {
        eprintln!("skipped {name}: {why}");
    }
    Ok(0)
}

fn cmd_preprocess(source: &SourceArgs, spec: &str, subject: Option<&str>, out: Option<&Path>) -> Result<i32> {
    let spec: CombinationSpec = spec.parse()?;
    let data = source.load()?;
    let ds = match subject {
        Some(id) => data
            .iter()
            .find(|d| d.subject_id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("subject {id} is not in the dataset")))?,
        None => data
            .first()
            .ok_or_else(|| Error::Dataset("dataset has no subjects".into()))?,
    };
    let features = SubjectFeatures::new(ds).features(&spec)?;
    let table = feature_table(ds, &features);
    match out {
        Some(p) => std::fs::write(p, table).map_err(|e| Error::io(p, e))?,
        None => print!("{table}"),
    }
    Ok(0)
}
