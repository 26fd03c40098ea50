//! Parallel evaluation of every (subject, combination) task with resumable,
//! worker-count-independent output.

use std::fs::{self, OpenOptions};
use std::hash::Hasher;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fnv::FnvHasher;
use rayon::prelude::*;

use super::store::{result_rows, FoldId, ResultRow, ResultsStore, RESULTS_FILE};
use crate::error::{Error, Result};
use crate::eval::{evaluate_combination, EvalOptions};
use crate::ingest::SubjectDataset;
use crate::learn::{GridPreset, HyperGrid, TrainConfig};
use crate::model::{CombinationSpec, SpecFilter};
use crate::preprocess::SubjectFeatures;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    /// None runs every subject of the dataset.
    pub subjects: Option<Vec<String>>,
    pub filter: SpecFilter,
    pub grid: GridPreset,
    pub workers: usize,
    pub pca_foldwise: bool,
    pub train: TrainConfig,
    /// Per-task progress lines on stderr.
    pub progress: bool,
}

impl RunConfig {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            output_dir: output_dir.into(),
            seed: 0,
            subjects: None,
            filter: SpecFilter::all(),
            grid: GridPreset::Coarse,
            workers: 1,
            pca_foldwise: false,
            train: TrainConfig::default(),
            progress: false,
        }
    }

    pub fn results_path(&self) -> PathBuf {
        self.output_dir.join(RESULTS_FILE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskFailure {
    pub subject_id: String,
    pub spec: CombinationSpec,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub subjects: usize,
    /// Supported specs selected by the filter.
    pub specs: usize,
    /// Filter matches the pipeline cannot run (single-trial scaling on td/pca).
    pub unsupported: usize,
    pub already_done: usize,
    pub completed: usize,
    pub failures: Vec<TaskFailure>,
}

/// Seed shared by all combinations of one subject (folds depend on it).
pub fn subject_seed(seed: u64, subject_id: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write_u64(seed);
    h.write(subject_id.as_bytes());
    h.finish()
}

fn select_subjects<'a>(
    datasets: &'a [SubjectDataset],
    wanted: Option<&[String]>,
) -> Result<Vec<&'a SubjectDataset>> {
    let Some(wanted) = wanted else {
        return Ok(datasets.iter().collect());
    };
    wanted
        .iter()
        .map(|id| {
            datasets
                .iter()
                .find(|d| &d.subject_id == id)
                .ok_or_else(|| Error::InvalidArgument(format!("subject {id} is not in the dataset")))
        })
        .collect()
}

fn append_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let text: String = rows.iter().map(|r| r.to_csv() + "\n").collect();
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Evaluates every selected (subject, spec) pair that has no mean row in
/// `results.csv` yet. Rows are appended as tasks finish; the file is then
/// rewritten in canonical order, so its content does not depend on the
/// number of workers.
pub fn run_grid(datasets: &[SubjectDataset], cfg: &RunConfig) -> Result<RunSummary> {
    if cfg.workers == 0 {
        return Err(Error::InvalidArgument("worker count must be at least 1".into()));
    }
    let subjects = select_subjects(datasets, cfg.subjects.as_deref())?;
    let candidates = cfg.filter.select();
    let specs: Vec<CombinationSpec> = candidates.iter().copied().filter(|s| s.is_supported()).collect();
    let mut summary = RunSummary {
        subjects: subjects.len(),
        specs: specs.len(),
        unsupported: candidates.len() - specs.len(),
        ..Default::default()
    };

    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let path = cfg.results_path();
    let mut store = ResultsStore::read_or_empty(&path)?;
    store.drop_incomplete();
    store.write(&path)?;
    let done = store.completed();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let opts = EvalOptions {
        grid: HyperGrid::preset(cfg.grid),
        train: cfg.train,
        pca_foldwise: cfg.pca_foldwise,
    };
    let new_rows: Mutex<Vec<ResultRow>> = Mutex::default();
    let failures: Mutex<Vec<TaskFailure>> = Mutex::default();
    let file_lock = Mutex::new(());
    let total: usize = subjects.len() * specs.len();
    let finished = Mutex::new(0usize);

    for ds in subjects {
        let todo: Vec<CombinationSpec> = specs
            .iter()
            .copied()
            .filter(|s| !done.contains(&(ds.subject_id.clone(), *s)))
            .collect();
        summary.already_done += specs.len() - todo.len();
        *finished.lock().unwrap() += specs.len() - todo.len();
        let features = SubjectFeatures::new(ds);
        let seed = subject_seed(cfg.seed, &ds.subject_id);
        pool.install(|| {
            todo.par_iter().for_each(|spec| {
                let outcome = evaluate_combination(&features, spec, seed, &opts);
                let n = {
                    let mut f = finished.lock().unwrap();
                    *f += 1;
                    *f
                };
                match outcome {
                    Ok(result) => {
                        let rows = result_rows(&ds.subject_id, &result);
                        {
                            let _g = file_lock.lock().unwrap();
                            if let Err(e) = append_rows(&path, &rows) {
                                failures.lock().unwrap().push(TaskFailure {
                                    subject_id: ds.subject_id.clone(),
                                    spec: *spec,
                                    message: e.to_string(),
                                });
                                return;
                            }
                        }
                        if cfg.progress {
                            eprintln!(
                                "[{n}/{total}] {} {spec} f1={:.3} ({:.1}s)",
                                ds.subject_id,
                                result.mean.f1,
                                result.seconds()
                            );
                        }
                        new_rows.lock().unwrap().extend(rows);
                    }
                    Err(e) => {
                        if cfg.progress {
                            eprintln!("[{n}/{total}] {} {spec} FAILED: {e}", ds.subject_id);
                        }
                        failures.lock().unwrap().push(TaskFailure {
                            subject_id: ds.subject_id.clone(),
                            spec: *spec,
                            message: e.to_string(),
                        });
                    }
                }
            })
        });
    }

    let new_rows = new_rows.into_inner().unwrap();
    summary.completed = new_rows.iter().filter(|r| r.fold == FoldId::Mean).count();
    store.extend(new_rows);
    store.write(&path)?;
    let mut failures = failures.into_inner().unwrap();
    failures.sort_by(|a, b| (&a.subject_id, a.spec).cmp(&(&b.subject_id, b.spec)));
    summary.failures = failures;
    Ok(summary)
}
