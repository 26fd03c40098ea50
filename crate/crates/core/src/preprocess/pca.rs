//! Principal component analysis retaining 98 % of the total variance.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Cumulative explained-variance fraction the retained components must reach.
pub const VARIANCE_TARGET: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Unit-length directions ordered by decreasing explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained: Vec<f64>,
    /// Retained component count.
    pub k: usize,
    /// Set when the fitting data had no variance at all.
    pub degenerate: bool,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector of length {len} does not match PCA input length {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Scores on the first `n` components.
    pub fn project_n(&self, x: ArrayView1<f64>, n: usize) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok(self.components[..n.min(self.components.len())]
            .iter()
            .map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Centered projection onto the retained components.
    pub fn project(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        self.project_n(x, self.k)
    }

    pub fn project_rows(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((x.nrows(), self.k));
        for (i, row) in x.axis_iter(Axis(0)).enumerate() {
            let z = self.project(row)?;
            out.row_mut(i).assign(&ArrayView1::from(&z));
        }
        Ok(out)
    }

    /// Inverse of [`PcaModel::project_n`] using `scores.len()` components.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (s, c) in scores.iter().zip(&self.components) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += s * v;
            }
        }
        out
    }
}

/// Fits on the rows of `x` (one observation per row).
pub fn pca_fit(x: ArrayView2<f64>) -> Result<PcaModel> {
    let (m, d) = x.dim();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 observations, got {m}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("PCA on zero-length vectors".into()));
    }
    let mean: Vec<f64> = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let centered = DMatrix::from_fn(m, d, |i, j| x[[i, j]] - mean[j]);

    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let rms = (centered.iter().map(|v| v * v).sum::<f64>() / (m * d) as f64).sqrt();
    if rms <= 1e-12 * scale {
        let mut axis = vec![0.0; d];
        axis[0] = 1.0;
        return Ok(PcaModel {
            mean,
            components: vec![axis],
            explained: vec![0.0],
            k: 1,
            degenerate: true,
        });
    }

    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();

    let mut components = Vec::with_capacity(order.len());
    let mut explained = Vec::with_capacity(order.len());
    for &i in &order {
        let mut c: Vec<f64> = v_t.row(i).iter().copied().collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        c.iter_mut().for_each(|v| *v /= norm);
        // Sign convention: the entry of largest magnitude is positive.
        let lead = c
            .iter()
            .enumerate()
            .fold(0, |b, (j, v)| if v.abs() > c[b].abs() { j } else { b });
        if c[lead] < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(c);
        explained.push(svd.singular_values[i].powi(2) / total);
    }

    let mut cumulative = 0.0;
    let mut k = explained.len();
    for (i, e) in explained.iter().enumerate() {
        cumulative += e;
        if cumulative >= VARIANCE_TARGET {
            k = i + 1;
            break;
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained,
        k: k.max(1),
        degenerate: false,
    })
}
