//! Stratified 15-fold protocol, confusion counts, macro metrics and the
//! per-combination evaluation loop.

use std::hash::Hasher;
use std::time::Instant;

use fnv::FnvHasher;
use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, ResultExt};
use crate::learn::{self, HyperGrid, Hyperparams, TrainConfig};
use crate::model::{
    ClassCounts, CombinationSpec, FoldSplit, MetricsRecord, N_CLASSES, N_SESSIONS, TRIALS_PER_SESSION,
};
use crate::preprocess::SubjectFeatures;

pub const N_FOLDS: usize = TRIALS_PER_SESSION;

/// Per session, a seeded permutation of its trials puts the i-th trial in
/// test fold i. Validation of fold f is test fold (f+1) mod 15.
pub fn stratified_folds(labels: &[usize], seed: u64) -> Result<Vec<FoldSplit>> {
    let mut by_session: Vec<Vec<usize>> = vec![Vec::new(); N_SESSIONS];
    for (i, &l) in labels.iter().enumerate() {
        by_session
            .get_mut(l)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} out of range")))?
            .push(i);
    }
    if let Some((s, v)) = by_session
        .iter()
        .enumerate()
        .find(|(_, v)| v.len() != TRIALS_PER_SESSION)
    {
        return Err(Error::InvalidArgument(format!(
            "session {} has {} trials, expected {TRIALS_PER_SESSION}",
            s + 1,
            v.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut by_session {
        v.shuffle(&mut rng);
    }
    let fold_of = |f: usize| -> Vec<usize> {
        let mut v: Vec<usize> = by_session.iter().map(|s| s[f]).collect();
        v.sort_unstable();
        v
    };
    Ok((0..N_FOLDS)
        .map(|f| {
            let test = fold_of(f);
            let validation = fold_of((f + 1) % N_FOLDS);
            let train = (0..labels.len())
                .filter(|i| !test.contains(i) && !validation.contains(i))
                .collect();
            FoldSplit {
                fold_index: f,
                train,
                validation,
                test,
            }
        })
        .collect())
}

/// One-vs-rest counts per class.
pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<Vec<ClassCounts>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if let Some(&l) = y_true.iter().chain(y_pred).find(|&&l| l >= n_classes) {
        return Err(Error::InvalidArgument(format!("label {l} out of range for {n_classes} classes")));
    }
    let mut counts = vec![ClassCounts::default(); n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == p {
            counts[t].tp += 1;
        } else {
            counts[p].fp += 1;
            counts[t].fn_ += 1;
        }
    }
    let n = y_true.len();
    for c in &mut counts {
        c.tn = n - c.tp - c.fp - c.fn_;
    }
    Ok(counts)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Macro precision/recall, F1 from the two macro values, accuracy as the
/// fraction of correct predictions.
pub fn metrics(counts: &[ClassCounts]) -> Result<MetricsRecord> {
    let Some(first) = counts.first() else {
        return Err(Error::InvalidArgument("no classes".into()));
    };
    let total = first.total();
    if counts.iter().any(|c| c.total() != total) {
        return Err(Error::InvalidArgument("per-class counts disagree on the total".into()));
    }
    let k = counts.len() as f64;
    let precision = counts.iter().map(|c| ratio(c.tp, c.tp + c.fp)).sum::<f64>() / k;
    let recall = counts.iter().map(|c| ratio(c.tp, c.tp + c.fn_)).sum::<f64>() / k;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let correct: usize = counts.iter().map(|c| c.tp).sum();
    Ok(MetricsRecord {
        accuracy: ratio(correct, total),
        precision,
        recall,
        f1,
        counts: counts.to_vec(),
    })
}

pub fn score(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<MetricsRecord> {
    metrics(&confusion(y_true, y_pred, n_classes)?)
}

/// Field-wise mean over folds (counts are summed).
pub fn mean_record(records: &[MetricsRecord]) -> MetricsRecord {
    let n = records.len().max(1) as f64;
    let avg = |f: fn(&MetricsRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let mut counts: Vec<ClassCounts> = Vec::new();
    for r in records {
        if counts.is_empty() {
            counts = vec![ClassCounts::default(); r.counts.len()];
        }
        for (a, b) in counts.iter_mut().zip(&r.counts) {
            a.tp += b.tp;
            a.fp += b.fp;
            a.fn_ += b.fn_;
            a.tn += b.tn;
        }
    }
    MetricsRecord {
        accuracy: avg(|r| r.accuracy),
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        f1: avg(|r| r.f1),
        counts,
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub grid: HyperGrid,
    pub train: TrainConfig,
    /// Fit PCA and scaling on each fold's training rows instead of all trials.
    pub pca_foldwise: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            grid: HyperGrid::coarse(),
            train: TrainConfig::default(),
            pca_foldwise: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold_index: usize,
    pub record: MetricsRecord,
    pub best: Hyperparams,
    pub validation_f1: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CombinationResult {
    pub spec: CombinationSpec,
    pub folds: Vec<FoldOutcome>,
    pub mean: MetricsRecord,
}

impl CombinationResult {
    pub fn seconds(&self) -> f64 {
        self.folds.iter().map(|f| f.seconds).sum()
    }
}

pub fn spec_hash(spec: &CombinationSpec) -> u64 {
    let mut h = FnvHasher::default();
    h.write(spec.to_string().as_bytes());
    h.finish()
}

/// Folds come from `seed` alone, so every spec of a subject shares them;
/// training seeds additionally mix in the spec.
pub fn evaluate_combination(
    features: &SubjectFeatures,
    spec: &CombinationSpec,
    seed: u64,
    opts: &EvalOptions,
) -> Result<CombinationResult> {
    let subject = features.dataset().subject_id.clone();
    let ctx = |fold: Option<usize>| match fold {
        Some(f) => format!("subject {subject}, {spec}, fold {f}"),
        None => format!("subject {subject}, {spec}"),
    };
    spec.check_supported().context_with(|| ctx(None))?;
    let labels = features.dataset().labels();
    let folds = stratified_folds(&labels, learn::derive_seed(seed, 0xF01D)).context_with(|| ctx(None))?;
    let train_seed = learn::derive_seed(seed, spec_hash(spec));
    let shared = if opts.pca_foldwise {
        None
    } else {
        Some(features.features(spec).context_with(|| ctx(None))?)
    };

    let mut outcomes = Vec::with_capacity(folds.len());
    for fold in &folds {
        let started = Instant::now();
        let run = || -> Result<FoldOutcome> {
            let owned;
            let data = match &shared {
                Some(d) => d.as_ref(),
                None => {
                    owned = features.features_fitted(spec, &fold.train)?;
                    &owned
                }
            };
            let sel = learn::search_fold(spec.classifier, data, fold, &opts.grid, train_seed, &opts.train)?;
            let xt = data.x.select(Axis(0), &fold.test);
            let yt: Vec<usize> = fold.test.iter().map(|&i| data.labels[i]).collect();
            let record = score(&yt, &sel.model.predict(xt.view()), N_CLASSES)?;
            Ok(FoldOutcome {
                fold_index: fold.fold_index,
                record,
                best: sel.best,
                validation_f1: sel.validation_f1,
                seconds: started.elapsed().as_secs_f64(),
            })
        };
        outcomes.push(run().context_with(|| ctx(Some(fold.fold_index)))?);
    }
    let records: Vec<MetricsRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    Ok(CombinationResult {
        spec: *spec,
        folds: outcomes,
        mean: mean_record(&records),
    })
}
