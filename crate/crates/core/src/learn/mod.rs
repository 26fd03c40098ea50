//! Classifiers (linear SVM, random forest, MLP, 1-D CNN) and the
//! validation-driven hyperparameter search.

pub mod adam;
pub mod cnn;
pub mod mlp;
pub mod rfc;
pub mod svm;

use std::fmt;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::eval;
use crate::model::{Classifier, FeatureLayout, FoldSplit, N_CLASSES};
use crate::preprocess::FeatureSet;

pub use adam::AdamConfig;
pub use cnn::{Cnn, CnnShape};
pub use mlp::Mlp;
pub use rfc::RandomForest;
pub use svm::{LinearSvm, SvmSolverOptions};

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// splitmix64 of `base` mixed with `tag`.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn he_uniform(w: &mut [f64], fan_in: usize, rng: &mut impl Rng) {
    let bound = (6.0 / fan_in.max(1) as f64).sqrt();
    for v in w {
        *v = rng.gen_range(-bound..bound);
    }
}

pub(crate) fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row /= s;
    }
}

/// Mean cross-entropy of softmax(logits) and its gradient w.r.t. logits.
pub(crate) fn softmax_cross_entropy(mut logits: Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let n = logits.nrows() as f64;
    softmax_rows(&mut logits);
    let mut loss = 0.0;
    for (mut row, &l) in logits.axis_iter_mut(Axis(0)).zip(labels) {
        loss -= row[l].max(1e-300).ln();
        row[l] -= 1.0;
    }
    logits /= n;
    (loss / n, logits)
}

pub fn check_training_data(x: ArrayView2<f64>, labels: &[usize], n_classes: usize) -> Result<()> {
    if x.nrows() != labels.len() {
        return Err(Error::Training(format!(
            "{} rows but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::Training(format!("label {l} out of range for {n_classes} classes")));
    }
    let first = labels.first().copied();
    if labels.iter().all(|&l| Some(l) == first) {
        return Err(Error::Training("training labels contain fewer than 2 classes".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("non-finite feature value".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hyperparams {
    Svm { c: f64 },
    Rfc { n_trees: usize, max_depth: usize },
    Mlp { alpha: f64 },
    Cnn,
}

impl Hyperparams {
    pub fn classifier(&self) -> Classifier {
        match self {
            Hyperparams::Svm { .. } => Classifier::Svm,
            Hyperparams::Rfc { .. } => Classifier::Rfc,
            Hyperparams::Mlp { .. } => Classifier::Mlp,
            Hyperparams::Cnn => Classifier::Cnn,
        }
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::Svm { c } => write!(f, "C=2^{}", c.log2()),
            Hyperparams::Rfc { n_trees, max_depth } => write!(f, "trees={n_trees},depth={max_depth}"),
            Hyperparams::Mlp { alpha } => write!(f, "alpha={alpha:e}"),
            Hyperparams::Cnn => write!(f, "fixed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridPreset {
    Paper,
    Coarse,
}

impl std::str::FromStr for GridPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(GridPreset::Paper),
            "coarse" => Ok(GridPreset::Coarse),
            other => Err(Error::InvalidArgument(format!(
                "unknown grid preset '{other}' (expected paper or coarse)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub svm_c: Vec<f64>,
    pub rfc: Vec<(usize, usize)>,
    pub mlp_alpha: Vec<f64>,
}

impl HyperGrid {
    pub fn preset(p: GridPreset) -> Self {
        match p {
            GridPreset::Paper => Self::paper(),
            GridPreset::Coarse => Self::coarse(),
        }
    }

    /// C = 2^−5 … 2^15 step 2^0.25; trees 200..=350 step 25 × depth 4..=8;
    /// α = 10^−1 … 10^−7.
    pub fn paper() -> Self {
        Self {
            svm_c: (0..81).map(|i| 2f64.powf(-5.0 + 0.25 * i as f64)).collect(),
            rfc: (0..7)
                .flat_map(|t| (4..=8).map(move |d| (200 + 25 * t, d)))
                .collect(),
            mlp_alpha: (1..=7).map(|e| 10f64.powi(-e)).collect(),
        }
    }

    pub fn coarse() -> Self {
        Self {
            svm_c: (0..11).map(|i| 2f64.powi(-5 + 2 * i)).collect(),
            rfc: [200, 275, 350]
                .into_iter()
                .flat_map(|t| [4, 6, 8].into_iter().map(move |d| (t, d)))
                .collect(),
            mlp_alpha: [1, 3, 5, 7].into_iter().map(|e| 10f64.powi(-e)).collect(),
        }
    }

    pub fn points(&self, classifier: Classifier) -> Vec<Hyperparams> {
        match classifier {
            Classifier::Svm => self.svm_c.iter().map(|&c| Hyperparams::Svm { c }).collect(),
            Classifier::Rfc => self
                .rfc
                .iter()
                .map(|&(n_trees, max_depth)| Hyperparams::Rfc { n_trees, max_depth })
                .collect(),
            Classifier::Mlp => self.mlp_alpha.iter().map(|&alpha| Hyperparams::Mlp { alpha }).collect(),
            Classifier::Cnn => vec![Hyperparams::Cnn],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub adam: AdamConfig,
    pub svm: SvmSolverOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            adam: AdamConfig::default(),
            svm: SvmSolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Learned {
    Svm(LinearSvm),
    Rfc(RandomForest),
    Mlp(Mlp),
    Cnn(Cnn),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: Hyperparams,
    pub seed: u64,
    pub learned: Learned,
}

impl TrainedModel {
    pub fn classifier(&self) -> Classifier {
        self.params.classifier()
    }

    /// Per-class scores: decision values (svm), vote counts (rfc) or
    /// logits (mlp, cnn).
    pub fn scores(&self, x: ArrayView2<f64>) -> Array2<f64> {
        match &self.learned {
            Learned::Svm(m) => {
                let mut out = Array2::zeros((x.nrows(), m.bias.len()));
                for (mut o, r) in out.rows_mut().into_iter().zip(x.rows()) {
                    o.assign(&ndarray::Array1::from(m.decision_values(r)));
                }
                out
            }
            Learned::Rfc(m) => {
                let mut out = Array2::zeros((x.nrows(), m.n_classes));
                for (mut o, r) in out.rows_mut().into_iter().zip(x.rows()) {
                    for (k, v) in m.votes(r).into_iter().enumerate() {
                        o[k] = v as f64;
                    }
                }
                out
            }
            Learned::Mlp(m) => m.logits(x),
            Learned::Cnn(m) => m.logits(x),
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        self.scores(x)
            .rows()
            .into_iter()
            .map(|r| argmax(r.iter().copied()))
            .collect()
    }
}

/// Trains one model on (x, labels) with N_CLASSES outputs.
pub fn train(
    params: &Hyperparams,
    x: ArrayView2<f64>,
    labels: &[usize],
    layout: &FeatureLayout,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_with_classes(params, x, labels, N_CLASSES, layout, seed, cfg)
}

pub fn train_with_classes(
    params: &Hyperparams,
    x: ArrayView2<f64>,
    labels: &[usize],
    n_classes: usize,
    layout: &FeatureLayout,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    check_training_data(x, labels, n_classes)?;
    let learned = match *params {
        Hyperparams::Svm { c } => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!("svm cost must be positive, got {c}")));
            }
            Learned::Svm(LinearSvm::fit(x, labels, n_classes, c, &cfg.svm)?)
        }
        Hyperparams::Rfc { n_trees, max_depth } => {
            if n_trees == 0 || max_depth == 0 {
                return Err(Error::InvalidArgument("forest needs ≥1 tree and depth ≥1".into()));
            }
            Learned::Rfc(RandomForest::fit(x, labels, n_classes, n_trees, max_depth, seed))
        }
        Hyperparams::Mlp { alpha } => Learned::Mlp(Mlp::fit(
            x,
            labels,
            n_classes,
            alpha,
            cfg.iterations,
            cfg.adam,
            seed,
        )),
        Hyperparams::Cnn => {
            let (channels, length) = layout.sequence_shape();
            if channels * length != x.ncols() {
                return Err(Error::InvalidArgument(format!(
                    "layout {channels}×{length} does not match {} features",
                    x.ncols()
                )));
            }
            let shape = CnnShape::new(channels, length, n_classes)?;
            Learned::Cnn(Cnn::fit(x, labels, shape, cfg.iterations, cfg.adam, seed)?)
        }
    };
    Ok(TrainedModel {
        params: *params,
        seed,
        learned,
    })
}

#[derive(Debug, Clone)]
pub struct FoldSelection {
    pub fold_index: usize,
    /// (grid point, validation macro F1) in grid order
    pub scores: Vec<(Hyperparams, f64)>,
    pub best: Hyperparams,
    pub validation_f1: f64,
    /// trained on the fold's training rows with `best`
    pub model: TrainedModel,
}

fn take_rows(x: ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
    x.select(Axis(0), rows)
}

/// Grid search for one fold. Every grid point trains with the same seed,
/// so the winner's model is exactly what a retrain would produce.
pub fn search_fold(
    classifier: Classifier,
    data: &FeatureSet,
    fold: &FoldSplit,
    grid: &HyperGrid,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<FoldSelection> {
    let points = grid.points(classifier);
    if points.is_empty() {
        return Err(Error::InvalidArgument(format!("empty grid for {classifier}")));
    }
    let x = data.x.view();
    let xt = take_rows(x, &fold.train);
    let yt: Vec<usize> = fold.train.iter().map(|&i| data.labels[i]).collect();
    let xv = take_rows(x, &fold.validation);
    let yv: Vec<usize> = fold.validation.iter().map(|&i| data.labels[i]).collect();
    let fold_seed = derive_seed(seed, fold.fold_index as u64);

    check_training_data(xt.view(), &yt, N_CLASSES)?;

    // Shared work across grid points; results equal independent training.
    let gram = (classifier == Classifier::Svm).then(|| svm::augmented_gram(xt.view()));
    let forest = match classifier {
        Classifier::Rfc => {
            let trees = grid.rfc.iter().map(|p| p.0).max().unwrap_or(0);
            let depth = grid.rfc.iter().map(|p| p.1).max().unwrap_or(0);
            (trees > 0 && depth > 0)
                .then(|| RandomForest::fit(xt.view(), &yt, N_CLASSES, trees, depth, fold_seed))
        }
        _ => None,
    };

    let mut scores = Vec::with_capacity(points.len());
    let mut best: Option<(usize, f64, TrainedModel)> = None;
    for (i, p) in points.iter().enumerate() {
        let shared = match (*p, &gram, &forest) {
            (Hyperparams::Svm { c }, Some(g), _) if c > 0.0 && c.is_finite() => Some(Learned::Svm(
                LinearSvm::fit_with_gram(xt.view(), g.view(), &yt, N_CLASSES, c, &cfg.svm)?,
            )),
            (Hyperparams::Rfc { n_trees, max_depth }, _, Some(f)) if n_trees > 0 && max_depth > 0 => {
                Some(Learned::Rfc(f.truncated(n_trees, max_depth)))
            }
            _ => None,
        };
        let model = match shared {
            Some(learned) => TrainedModel {
                params: *p,
                seed: fold_seed,
                learned,
            },
            None => train(p, xt.view(), &yt, &data.layout, fold_seed, cfg)?,
        };
        let f1 = eval::score(&yv, &model.predict(xv.view()), N_CLASSES)?.f1;
        scores.push((*p, f1));
        if best.as_ref().map_or(true, |b| f1 > b.1) {
            best = Some((i, f1, model));
        }
    }
    let (i, validation_f1, model) = best.expect("non-empty grid");
    Ok(FoldSelection {
        fold_index: fold.fold_index,
        scores,
        best: points[i],
        validation_f1,
        model,
    })
}

pub fn grid_search(
    classifier: Classifier,
    data: &FeatureSet,
    folds: &[FoldSplit],
    grid: &HyperGrid,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<Vec<FoldSelection>> {
    folds
        .iter()
        .map(|f| search_fold(classifier, data, f, grid, seed, cfg))
        .collect()
}
