//! The six preprocessing steps and feature assembly.
//!
//! Per trial and foot the order is: stance extraction, optional low-pass
//! filtering at the per-channel optimal cut-off, optional first derivative
//! (at the native sample rate), optional body-weight normalization, time
//! normalization. The six normalized waveforms are then reduced (tc
//! concatenation, td extrema or PCA) and scaled.

pub mod filter;
pub mod pca;
pub mod scaling;
pub mod signal;
pub mod td;

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{s, Array2, ArrayView1, ArrayView2};

pub use filter::{butterworth_lowpass, optimal_cutoff};
pub use pca::{pca_fit, PcaModel};
pub use scaling::{scale_features, ScalingModel};
pub use signal::{time_derivative, time_normalize, weight_normalize};
pub use td::td_features;

use crate::error::{Error, Result};
use crate::ingest::{extract_stance, SubjectDataset};
use crate::model::{
    CombinationSpec, Derivative, FeatureLayout, FeatureVector, Filtering, FootForces, ForceTrial,
    Reduction, Scaling, TimePoints, WeightNorm, STANCE_THRESHOLD_N,
};

/// Steps that act on native-rate signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalKey {
    pub filtering: Filtering,
    pub derivative: Derivative,
    pub weight_norm: WeightNorm,
}

/// Everything in a spec except the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureKey {
    pub signal: SignalKey,
    pub time_points: TimePoints,
    pub reduction: Reduction,
    pub scaling: Scaling,
}

impl From<&CombinationSpec> for FeatureKey {
    fn from(spec: &CombinationSpec) -> Self {
        Self {
            signal: SignalKey {
                filtering: spec.filtering,
                derivative: spec.derivative,
                weight_norm: spec.weight_norm,
            },
            time_points: spec.time_points,
            reduction: spec.reduction,
            scaling: spec.scaling,
        }
    }
}

/// Left and right foot signals of one trial.
pub type TrialSignals = [FootForces; 2];

fn prepare_foot(
    forces: &FootForces,
    trial: &ForceTrial,
    key: SignalKey,
) -> Result<FootForces> {
    let range = extract_stance(&forces.vertical, STANCE_THRESHOLD_N)?;
    let mut out = if range.len() == forces.len() {
        forces.clone()
    } else {
        forces.slice(range)
    };
    let fs = trial.sample_rate;
    if key.filtering == Filtering::AutoCutoff {
        out = out.map_channels(|c| butterworth_lowpass(c, optimal_cutoff(c, fs)?, fs))?;
    }
    if key.derivative == Derivative::Jerk {
        out = out.map_channels(|c| time_derivative(c, fs))?;
    }
    if key.weight_norm.enabled() {
        out = weight_normalize(&out, trial.body_weight)?;
    }
    Ok(out)
}

/// Native-rate signals of one trial after the signal-level steps.
pub fn prepare_trial(trial: &ForceTrial, key: SignalKey) -> Result<TrialSignals> {
    let left = prepare_foot(&trial.left, trial, key);
    let right = prepare_foot(&trial.right, trial, key);
    match (left, right) {
        (Ok(l), Ok(r)) => Ok([l, r]),
        (Err(e), _) => Err(e.context(format!("{} left foot", trial.identity()))),
        (_, Err(e)) => Err(e.context(format!("{} right foot", trial.identity()))),
    }
}

/// One row per trial: time-normalized left fore-aft, medio-lateral,
/// vertical, then the right foot's three channels.
pub fn waveform_matrix(signals: &[TrialSignals], time_points: TimePoints) -> Result<Array2<f64>> {
    let t = time_points.count();
    let mut out = Array2::zeros((signals.len(), 6 * t));
    for (i, feet) in signals.iter().enumerate() {
        for (f, foot) in feet.iter().enumerate() {
            for (c, ch) in foot.channels().iter().enumerate() {
                let norm = time_normalize(ch, t)?;
                let col = (3 * f + c) * t;
                out.slice_mut(s![i, col..col + t])
                    .assign(&ArrayView1::from(&norm));
            }
        }
    }
    Ok(out)
}

fn row_to_feet(row: ArrayView1<f64>, t: usize) -> (FootForces, FootForces) {
    let ch = |k: usize| row.slice(s![k * t..(k + 1) * t]).to_vec();
    (
        FootForces::new(ch(0), ch(1), ch(2)),
        FootForces::new(ch(3), ch(4), ch(5)),
    )
}

/// Applies the reduction step. PCA is fitted on `fit_rows` and applied to
/// every row.
pub fn reduce(
    waveforms: ArrayView2<f64>,
    spec: &CombinationSpec,
    fit_rows: &[usize],
) -> Result<(Array2<f64>, FeatureLayout)> {
    let layout = FeatureLayout::new(spec.reduction, spec.time_points, spec.derivative);
    let t = spec.time_points.count();
    match spec.reduction {
        Reduction::Tc => Ok((waveforms.to_owned(), layout)),
        Reduction::Td => {
            let mut out = Array2::zeros((waveforms.nrows(), layout.len()));
            for (i, row) in waveforms.rows().into_iter().enumerate() {
                let (left, right) = row_to_feet(row, t);
                let v = td_features(&left, &right, spec.derivative, spec.time_points)
                    .map_err(|e| e.context(format!("trial row {i}")))?;
                out.row_mut(i).assign(&ArrayView1::from(&v.values));
            }
            Ok((out, layout))
        }
        Reduction::Pca => {
            let fit = waveforms.select(ndarray::Axis(0), fit_rows);
            let model = pca_fit(fit.view())?;
            let projected = model.project_rows(waveforms)?;
            Ok((projected, layout.with_components(model.k)))
        }
    }
}

/// Classifier input for all trials of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    /// One row per trial.
    pub x: Array2<f64>,
    /// Class indices 0..6 (session − 1).
    pub labels: Vec<usize>,
    pub layout: FeatureLayout,
}

impl FeatureSet {
    pub fn new(x: Array2<f64>, labels: Vec<usize>, layout: FeatureLayout) -> Result<Self> {
        if x.ncols() != layout.len() || x.nrows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "feature matrix {}x{} does not match layout length {} / {} labels",
                x.nrows(),
                x.ncols(),
                layout.len(),
                labels.len()
            )));
        }
        Ok(Self { x, labels, layout })
    }

    pub fn vectors(&self) -> Vec<FeatureVector> {
        self.x
            .rows()
            .into_iter()
            .map(|r| FeatureVector {
                values: r.to_vec(),
                layout: self.layout,
            })
            .collect()
    }
}

fn cached<K, T>(
    map: &Mutex<HashMap<K, Arc<OnceLock<Arc<T>>>>>,
    key: K,
    build: impl FnOnce() -> Result<T>,
) -> Result<Arc<T>>
where
    K: Eq + Hash,
{
    let cell = map
        .lock()
        .expect("feature cache poisoned")
        .entry(key)
        .or_default()
        .clone();
    if let Some(v) = cell.get() {
        return Ok(v.clone());
    }
    // Concurrent builders may race; results are deterministic so either wins.
    let built = Arc::new(build()?);
    Ok(cell.get_or_init(|| built).clone())
}

/// Memoized feature building for one subject. Signals and waveforms are
/// shared between specs; safe to use from many worker threads.
pub struct SubjectFeatures<'a> {
    dataset: &'a SubjectDataset,
    signals: Mutex<HashMap<SignalKey, Arc<OnceLock<Arc<Vec<TrialSignals>>>>>>,
    waveforms: Mutex<HashMap<(SignalKey, TimePoints), Arc<OnceLock<Arc<Array2<f64>>>>>>,
    features: Mutex<HashMap<FeatureKey, Arc<OnceLock<Arc<FeatureSet>>>>>,
}

impl<'a> SubjectFeatures<'a> {
    pub fn new(dataset: &'a SubjectDataset) -> Self {
        Self {
            dataset,
            signals: Mutex::default(),
            waveforms: Mutex::default(),
            features: Mutex::default(),
        }
    }

    pub fn dataset(&self) -> &SubjectDataset {
        self.dataset
    }

    pub fn signals(&self, key: SignalKey) -> Result<Arc<Vec<TrialSignals>>> {
        cached(&self.signals, key, || {
            self.dataset
                .trials
                .iter()
                .map(|t| prepare_trial(t, key))
                .collect()
        })
    }

    pub fn waveforms(&self, key: SignalKey, time_points: TimePoints) -> Result<Arc<Array2<f64>>> {
        cached(&self.waveforms, (key, time_points), || {
            waveform_matrix(&self.signals(key)?, time_points)
        })
    }

    /// Features with reduction and scaling fitted on `fit_rows` only.
    pub fn features_fitted(&self, spec: &CombinationSpec, fit_rows: &[usize]) -> Result<FeatureSet> {
        spec.check_supported()?;
        let key = FeatureKey::from(spec);
        let waveforms = self.waveforms(key.signal, spec.time_points)?;
        let (reduced, layout) = reduce(waveforms.view(), spec, fit_rows)?;
        let scaler = ScalingModel::fit(reduced.view(), fit_rows, spec.scaling, &layout)?;
        let x = scaler.transform(reduced.view());
        FeatureSet::new(x, self.dataset.labels(), layout)
    }

    /// Features fitted on all trials of the subject, memoized per spec
    /// (ignoring the classifier).
    pub fn features(&self, spec: &CombinationSpec) -> Result<Arc<FeatureSet>> {
        let all: Vec<usize> = (0..self.dataset.trials.len()).collect();
        cached(&self.features, FeatureKey::from(spec), || {
            self.features_fitted(spec, &all)
        })
    }
}

/// Builds the feature vectors and labels of one subject for `spec`.
pub fn build_features(dataset: &SubjectDataset, spec: &CombinationSpec) -> Result<FeatureSet> {
    let features = SubjectFeatures::new(dataset).features(spec)?;
    Ok(Arc::try_unwrap(features).unwrap_or_else(|a| (*a).clone()))
}

/// Text table for debugging: one row per trial (session, trial, features).
pub fn feature_table(dataset: &SubjectDataset, features: &FeatureSet) -> String {
    let mut out = String::from("session,trial");
    for j in 0..features.x.ncols() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for (t, row) in dataset.trials.iter().zip(features.x.rows()) {
        out.push_str(&format!("{},{}", t.session, t.trial));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::synthesize_dataset;
    use crate::model::enumerate_combinations;

    fn spec(text: &str) -> CombinationSpec {
        text.parse().unwrap()
    }

    #[test]
    fn tc_lengths_follow_time_points() {
        let ds = &synthesize_dataset(1, 3).unwrap()[0];
        for (t, len) in [("11", 66), ("101", 606), ("1001", 6006)] {
            let s = spec(&format!(
                "filtering=none;deriv=grf;T={t};red=tc;wn=0;scale=z_at_mm_at;clf=svm"
            ));
            let f = build_features(ds, &s).unwrap();
            assert_eq!(f.x.dim(), (90, len));
            assert!(f.vectors().iter().all(|v| v.values.len() == len));
        }
    }

    #[test]
    fn td_lengths_ignore_time_points() {
        let ds = &synthesize_dataset(1, 3).unwrap()[0];
        for t in ["11", "101", "1001"] {
            for (d, len) in [("grf", 28), ("jerk", 24)] {
                let s = spec(&format!(
                    "filtering=auto_cutoff;deriv={d};T={t};red=td;wn=1;scale=z_at_mm_at;clf=rfc"
                ));
                let f = build_features(ds, &s).unwrap();
                assert_eq!(f.x.ncols(), len, "T={t} {d}");
            }
        }
    }

    #[test]
    fn raw_td_occurrences_in_range() {
        let ds = &synthesize_dataset(1, 4).unwrap()[0];
        let s = spec("filtering=none;deriv=grf;T=101;red=td;wn=0;scale=z_at_mm_at;clf=svm");
        let key = FeatureKey::from(&s);
        let cache = SubjectFeatures::new(ds);
        let w = cache.waveforms(key.signal, s.time_points).unwrap();
        let all: Vec<usize> = (0..90).collect();
        let (td, _) = reduce(w.view(), &s, &all).unwrap();
        for row in td.rows() {
            for occ in row.iter().skip(1).step_by(2) {
                assert!((0.0..=100.0).contains(occ));
            }
        }
    }

    #[test]
    fn synthetic_trials_have_two_vertical_peaks() {
        let ds = &synthesize_dataset(1, 8).unwrap()[0];
        let key = SignalKey {
            filtering: Filtering::None,
            derivative: Derivative::Grf,
            weight_norm: WeightNorm::No,
        };
        let cache = SubjectFeatures::new(ds);
        let w = cache.waveforms(key, TimePoints::T101).unwrap();
        for row in w.rows() {
            let (l, r) = row_to_feet(row, 101);
            for foot in [l, r] {
                let (p1, p2) = td::two_peaks(&foot.vertical).expect("two peaks");
                assert!((15..=35).contains(&p1) && (65..=85).contains(&p2), "{p1} {p2}");
            }
        }
    }

    #[test]
    fn pca_lengths_bounded_by_trials() {
        let ds = &synthesize_dataset(1, 3).unwrap()[0];
        let s = spec("filtering=auto_cutoff;deriv=grf;T=101;red=pca;wn=0;scale=z_at_mm_at;clf=svm");
        let f = build_features(ds, &s).unwrap();
        assert!(f.layout.components >= 1 && f.layout.components <= 90);
        assert_eq!(f.x.ncols(), f.layout.components);
    }

    #[test]
    fn weight_norm_absorbed_by_scaling_for_constant_weight() {
        let mut ds = synthesize_dataset(1, 6).unwrap().remove(0);
        for t in &mut ds.trials {
            t.body_weight = 700.0;
        }
        for red in ["tc", "pca", "td"] {
            let a = spec(&format!(
                "filtering=none;deriv=grf;T=101;red={red};wn=0;scale=z_at_mm_at;clf=svm"
            ));
            let b = CombinationSpec {
                weight_norm: WeightNorm::Yes,
                ..a
            };
            let fa = build_features(&ds, &a).unwrap();
            let fb = build_features(&ds, &b).unwrap();
            assert_eq!(fa.x.dim(), fb.x.dim());
            let diff = (&fa.x - &fb.x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(diff <= 1e-9, "{red}: {diff}");
        }
    }

    #[test]
    fn features_are_deterministic() {
        let ds = &synthesize_dataset(1, 12).unwrap()[0];
        let s = spec("filtering=auto_cutoff;deriv=jerk;T=11;red=pca;wn=1;scale=z_at_mm_at;clf=mlp");
        let a = build_features(ds, &s).unwrap();
        let b = build_features(ds, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsupported_scaling_is_rejected() {
        let ds = &synthesize_dataset(1, 3).unwrap()[0];
        let bad = enumerate_combinations(false)
            .into_iter()
            .find(|s| !s.is_supported())
            .unwrap();
        assert!(matches!(
            build_features(ds, &bad).unwrap_err(),
            Error::Unsupported(_)
        ));
    }

    #[test]
    fn labels_are_sessions() {
        let ds = &synthesize_dataset(1, 3).unwrap()[0];
        let s = spec("filtering=none;deriv=grf;T=11;red=tc;wn=0;scale=z_st_mm_st;clf=svm");
        let f = build_features(ds, &s).unwrap();
        assert_eq!(f.labels, ds.labels());
        let table = feature_table(ds, &f);
        assert_eq!(table.lines().count(), 91);
        assert!(table.starts_with("session,trial,f0,"));
    }
}
