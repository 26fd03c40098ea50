//! Two-pass amplitude scaling: z-transform, then min-max to [−1, 1], each
//! pass fitted over all trials or within a single trial.

use std::ops::Range;

use ndarray::{Array2, ArrayView2, ArrayViewMut1};

use crate::error::{Error, Result};
use crate::model::{FeatureLayout, Reduction, Scaling, Scope};

/// Column groups forming one scaling variable: a whole (foot, channel)
/// waveform for tc, a single scalar column otherwise.
pub fn variable_groups(layout: &FeatureLayout, width: usize) -> Vec<Range<usize>> {
    match layout.reduction {
        Reduction::Tc => {
            let t = layout.time_points.count();
            (0..layout.channel_count).map(|c| c * t..(c + 1) * t).collect()
        }
        _ => (0..width).map(|c| c..c + 1).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PassStats {
    /// Per-variable statistics pooled over the fitting rows.
    AllTrials(Vec<(f64, f64)>),
    /// Statistics are taken from each trial at transform time.
    SingleTrial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingModel {
    pub groups: Vec<Range<usize>>,
    /// (mean, sample standard deviation) per variable.
    pub z: PassStats,
    /// (min, max) per variable, measured after the z pass.
    pub min_max: PassStats,
}

fn pooled(x: ArrayView2<f64>, rows: &[usize], g: &Range<usize>) -> Vec<f64> {
    rows.iter()
        .flat_map(|&r| g.clone().map(move |c| x[[r, c]]))
        .collect()
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn is_constant(values: impl Iterator<Item = f64>) -> bool {
    let (lo, hi) = min_max(values);
    lo == hi
}

fn z_slice(mut v: ArrayViewMut1<f64>, stats: Option<(f64, f64)>) {
    let (mean, sd) = match stats {
        Some(s) => s,
        None if is_constant(v.iter().copied()) => (0.0, 0.0),
        None => mean_sd(v.iter().copied()),
    };
    if sd == 0.0 {
        v.fill(0.0);
    } else {
        v.mapv_inplace(|x| (x - mean) / sd);
    }
}

fn mm_slice(mut v: ArrayViewMut1<f64>, stats: Option<(f64, f64)>) {
    let (lo, hi) = stats.unwrap_or_else(|| min_max(v.iter().copied()));
    if lo == hi {
        v.fill(0.0);
    } else {
        v.mapv_inplace(|x| 2.0 * (x - lo) / (hi - lo) - 1.0);
    }
}

impl ScalingModel {
    /// Fits the all-trials statistics on `fit_rows` of `x`.
    pub fn fit(
        x: ArrayView2<f64>,
        fit_rows: &[usize],
        method: Scaling,
        layout: &FeatureLayout,
    ) -> Result<Self> {
        let (z_scope, mm_scope) = method.scopes();
        if layout.reduction != Reduction::Tc
            && (z_scope == Scope::SingleTrial || mm_scope == Scope::SingleTrial)
        {
            return Err(Error::Unsupported(format!(
                "single-trial scaling ({method}) is undefined for scalar {} features",
                layout.reduction
            )));
        }
        if fit_rows.is_empty() {
            return Err(Error::InvalidArgument("scaling fit on zero rows".into()));
        }
        let groups = variable_groups(layout, x.ncols());
        let z = match z_scope {
            Scope::SingleTrial => PassStats::SingleTrial,
            Scope::AllTrials => PassStats::AllTrials(
                groups
                    .iter()
                    .map(|g| {
                        let values = pooled(x, fit_rows, g);
                        let (mean, sd) = mean_sd(values.iter().copied());
                        let sd = if is_constant(values.iter().copied()) { 0.0 } else { sd };
                        (mean, sd)
                    })
                    .collect(),
            ),
        };
        let mut model = Self {
            groups,
            z,
            min_max: PassStats::SingleTrial,
        };
        if mm_scope == Scope::AllTrials {
            let fit_x: Array2<f64> = x.select(ndarray::Axis(0), fit_rows);
            let after_z = model.z_pass(fit_x.view());
            let all: Vec<usize> = (0..after_z.nrows()).collect();
            model.min_max = PassStats::AllTrials(
                model
                    .groups
                    .iter()
                    .map(|g| min_max(pooled(after_z.view(), &all, g).into_iter()))
                    .collect(),
            );
        }
        Ok(model)
    }

    fn z_pass(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (gi, g) in self.groups.iter().enumerate() {
                let stats = match &self.z {
                    PassStats::AllTrials(s) => Some(s[gi]),
                    PassStats::SingleTrial => None,
                };
                z_slice(row.slice_mut(ndarray::s![g.clone()]), stats);
            }
        }
        out
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.z_pass(x);
        for mut row in out.rows_mut() {
            for (gi, g) in self.groups.iter().enumerate() {
                let stats = match &self.min_max {
                    PassStats::AllTrials(s) => Some(s[gi]),
                    PassStats::SingleTrial => None,
                };
                mm_slice(row.slice_mut(ndarray::s![g.clone()]), stats);
            }
        }
        out
    }
}

/// Fits on every row and transforms the same matrix.
pub fn scale_features(
    x: ArrayView2<f64>,
    method: Scaling,
    layout: &FeatureLayout,
) -> Result<Array2<f64>> {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    Ok(ScalingModel::fit(x, &rows, method, layout)?.transform(x))
}
