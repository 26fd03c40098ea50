//! Time-discrete gait variables: extrema of the time-normalized waveforms and
//! where in the stance phase they occur.

use crate::error::{Error, Result};
use crate::model::{Derivative, FeatureLayout, FeatureVector, FootForces, Reduction, TimePoints};

/// Interior local maxima: strictly above the left neighbour and above the
/// first sample after any plateau. Plateaus report their first index.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// The two largest local maxima at least 10 % of stance apart, in time
/// order.
pub fn two_peaks(x: &[f64]) -> Option<(usize, usize)> {
    let mut maxima = local_maxima(x);
    if maxima.len() < 2 {
        return None;
    }
    maxima.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let min_gap = 0.1 * (x.len() - 1) as f64;
    let first = maxima[0];
    let second = maxima[1..]
        .iter()
        .copied()
        .find(|&m| (m as f64 - first as f64).abs() >= min_gap)?;
    Some((first.min(second), first.max(second)))
}

fn argmin(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < x[best] { i } else { best })
}

fn argmax(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > x[best] { i } else { best })
}

fn occurrence(index: usize, n: usize) -> f64 {
    index as f64 / (n - 1) as f64 * 100.0
}

fn push_extremum(out: &mut Vec<f64>, x: &[f64], index: usize) {
    out.push(x[index]);
    out.push(occurrence(index, x.len()));
}

fn foot_features(foot: &FootForces, derivative: Derivative, out: &mut Vec<f64>) -> Result<()> {
    for ch in [&foot.fore_aft, &foot.medio_lateral] {
        push_extremum(out, ch, argmin(ch));
        push_extremum(out, ch, argmax(ch));
    }
    let v = &foot.vertical;
    match derivative {
        Derivative::Grf => {
            let (p1, p2) = two_peaks(v).ok_or_else(|| {
                Error::DegenerateWaveform(
                    "vertical force has fewer than two local maxima 10% of stance apart".into(),
                )
            })?;
            let valley = p1 + 1 + argmin(&v[p1 + 1..p2]);
            push_extremum(out, v, p1);
            push_extremum(out, v, valley);
            push_extremum(out, v, p2);
        }
        Derivative::Jerk => {
            push_extremum(out, v, argmin(v));
            push_extremum(out, v, argmax(v));
        }
    }
    Ok(())
}

/// Left foot then right; per foot fore-aft, medio-lateral, vertical; each
/// value followed by its occurrence in percent of stance.
pub fn td_features(
    left: &FootForces,
    right: &FootForces,
    derivative: Derivative,
    time_points: TimePoints,
) -> Result<FeatureVector> {
    let layout = FeatureLayout::new(Reduction::Td, time_points, derivative);
    let mut values = Vec::with_capacity(layout.len());
    for (name, foot) in [("left", left), ("right", right)] {
        if foot.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "{name} foot waveform has {} points, need at least 3",
                foot.len()
            )));
        }
        foot_features(foot, derivative, &mut values)
            .map_err(|e| e.context(format!("{name} foot")))?;
    }
    FeatureVector::new(values, layout)
}
