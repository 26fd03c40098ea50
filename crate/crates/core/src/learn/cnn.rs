//! 1-D convolutional network: three conv+ReLU layers, flatten, dense to
//! the class logits. Convolutions run as im2col + GEMM.

use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{self, AdamConfig};
use super::{he_uniform, softmax_cross_entropy, softmax_rows};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvSpec {
    /// floor((L + 2·pad − kernel)/stride) + 1, or None if the padded input
    /// is shorter than the kernel.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        let padded = len + 2 * self.pad;
        (padded >= self.kernel).then(|| (padded - self.kernel) / self.stride + 1)
    }
}

pub const LAYERS: [ConvSpec; 3] = [
    ConvSpec { filters: 24, kernel: 8, stride: 2, pad: 4 },
    ConvSpec { filters: 32, kernel: 8, stride: 2, pad: 4 },
    ConvSpec { filters: 48, kernel: 6, stride: 3, pad: 3 },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnnShape {
    pub channels: usize,
    pub classes: usize,
    pub layers: Vec<ConvSpec>,
    /// input length followed by each layer's output length
    pub lengths: Vec<usize>,
}

struct Forward {
    /// im2col matrix per layer, (C_in·k, n·L_out)
    cols: Vec<Array2<f64>>,
    /// post-ReLU activations per layer, (F, n·L_out)
    acts: Vec<Array2<f64>>,
    flat: Array2<f64>,
    logits: Array2<f64>,
}

fn im2col(act: &Array2<f64>, n: usize, len: usize, spec: &ConvSpec, out_len: usize) -> Array2<f64> {
    let c_in = act.nrows();
    let mut cols = Array2::zeros((c_in * spec.kernel, n * out_len));
    let src = act.as_slice().unwrap();
    let width = n * out_len;
    let dst = cols.as_slice_mut().unwrap();
    for c in 0..c_in {
        for j in 0..spec.kernel {
            let row = &mut dst[(c * spec.kernel + j) * width..][..width];
            for s in 0..n {
                let base = c * n * len + s * len;
                for o in 0..out_len {
                    let t = (o * spec.stride + j) as isize - spec.pad as isize;
                    if t >= 0 && (t as usize) < len {
                        row[s * out_len + o] = src[base + t as usize];
                    }
                }
            }
        }
    }
    cols
}

fn col2im(dcols: &Array2<f64>, c_in: usize, n: usize, len: usize, spec: &ConvSpec, out_len: usize) -> Array2<f64> {
    let mut dact = Array2::zeros((c_in, n * len));
    let dst = dact.as_slice_mut().unwrap();
    let width = n * out_len;
    let src = dcols.as_slice().unwrap();
    for c in 0..c_in {
        for j in 0..spec.kernel {
            let row = &src[(c * spec.kernel + j) * width..][..width];
            for s in 0..n {
                let base = c * n * len + s * len;
                for o in 0..out_len {
                    let t = (o * spec.stride + j) as isize - spec.pad as isize;
                    if t >= 0 && (t as usize) < len {
                        dst[base + t as usize] += row[s * out_len + o];
                    }
                }
            }
        }
    }
    dact
}

impl CnnShape {
    pub fn new(channels: usize, length: usize, classes: usize) -> Result<Self> {
        Self::with_layers(channels, length, classes, LAYERS.to_vec())
    }

    pub fn with_layers(
        channels: usize,
        length: usize,
        classes: usize,
        layers: Vec<ConvSpec>,
    ) -> Result<Self> {
        let mut lengths = vec![length];
        for (i, l) in layers.iter().enumerate() {
            let prev = *lengths.last().unwrap();
            let next = l.output_len(prev).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "input length {length} too short for conv layer {} (kernel {}, pad {})",
                    i + 1,
                    l.kernel,
                    l.pad
                ))
            })?;
            lengths.push(next);
        }
        Ok(Self {
            channels,
            classes,
            layers,
            lengths,
        })
    }

    fn in_channels(&self, i: usize) -> usize {
        if i == 0 {
            self.channels
        } else {
            self.layers[i - 1].filters
        }
    }

    pub fn flattened_len(&self) -> usize {
        self.layers.last().map_or(self.channels, |l| l.filters) * self.lengths.last().unwrap()
    }

    /// (weight offset, bias offset) per conv layer plus the dense layer.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut at = 0;
        for (i, l) in self.layers.iter().enumerate() {
            let w = l.filters * self.in_channels(i) * l.kernel;
            out.push((at, at + w));
            at += w + l.filters;
        }
        out.push((at, at + self.flattened_len() * self.classes));
        out
    }

    pub fn n_params(&self) -> usize {
        let (_, b) = *self.offsets().last().unwrap();
        b + self.classes
    }

    pub fn init(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![0.0; self.n_params()];
        for (i, (w, b)) in self.offsets().into_iter().enumerate() {
            let fan_in = match self.layers.get(i) {
                Some(l) => self.in_channels(i) * l.kernel,
                None => self.flattened_len(),
            };
            he_uniform(&mut p[w..b], fan_in, &mut rng);
        }
        p
    }

    fn forward(&self, p: &[f64], x: ArrayView2<f64>) -> Forward {
        let n = x.nrows();
        let len0 = self.lengths[0];
        let mut act = Array2::zeros((self.channels, n * len0));
        for (s, row) in x.rows().into_iter().enumerate() {
            for c in 0..self.channels {
                for t in 0..len0 {
                    act[[c, s * len0 + t]] = row[c * len0 + t];
                }
            }
        }
        let offsets = self.offsets();
        let mut cols = Vec::new();
        let mut acts = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            let (w_off, b_off) = offsets[i];
            let w = ArrayView2::from_shape((l.filters, self.in_channels(i) * l.kernel), &p[w_off..b_off])
                .unwrap();
            let bias = &p[b_off..b_off + l.filters];
            let c = im2col(&act, n, self.lengths[i], l, self.lengths[i + 1]);
            let mut z = w.dot(&c);
            for (mut row, b) in z.rows_mut().into_iter().zip(bias) {
                row.mapv_inplace(|v| (v + b).max(0.0));
            }
            cols.push(c);
            acts.push(std::mem::replace(&mut act, z));
        }
        let last_len = *self.lengths.last().unwrap();
        let filters = act.nrows();
        let mut flat = Array2::zeros((n, filters * last_len));
        for f in 0..filters {
            for s in 0..n {
                for o in 0..last_len {
                    flat[[s, f * last_len + o]] = act[[f, s * last_len + o]];
                }
            }
        }
        acts.push(act);
        acts.remove(0);
        let (w_off, b_off) = *offsets.last().unwrap();
        let wf = ArrayView2::from_shape((self.flattened_len(), self.classes), &p[w_off..b_off]).unwrap();
        let bf = ndarray::ArrayView1::from(&p[b_off..]);
        let logits = flat.dot(&wf) + &bf;
        Forward {
            cols,
            acts,
            flat,
            logits,
        }
    }

    pub fn logits(&self, p: &[f64], x: ArrayView2<f64>) -> Array2<f64> {
        self.forward(p, x).logits
    }

    pub fn loss_grad(&self, p: &[f64], x: ArrayView2<f64>, labels: &[usize]) -> (f64, Vec<f64>) {
        let n = x.nrows();
        let fw = self.forward(p, x);
        let (loss, dz) = softmax_cross_entropy(fw.logits, labels);
        let offsets = self.offsets();
        let mut grad = vec![0.0; p.len()];

        let (w_off, b_off) = *offsets.last().unwrap();
        let wf = ArrayView2::from_shape((self.flattened_len(), self.classes), &p[w_off..b_off]).unwrap();
        let dwf = fw.flat.t().dot(&dz);
        grad[w_off..b_off].copy_from_slice(dwf.as_standard_layout().as_slice().unwrap());
        grad[b_off..].copy_from_slice(dz.sum_axis(Axis(0)).as_slice().unwrap());
        let dflat = dz.dot(&wf.t());

        let last_len = *self.lengths.last().unwrap();
        let filters = fw.acts.last().unwrap().nrows();
        let mut dact = Array2::zeros((filters, n * last_len));
        for f in 0..filters {
            for s in 0..n {
                for o in 0..last_len {
                    dact[[f, s * last_len + o]] = dflat[[s, f * last_len + o]];
                }
            }
        }
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            dact.zip_mut_with(&fw.acts[i], |g, &a| {
                if a <= 0.0 {
                    *g = 0.0
                }
            });
            let (w_off, b_off) = offsets[i];
            let c_in = self.in_channels(i);
            let dw = dact.dot(&fw.cols[i].t());
            grad[w_off..b_off].copy_from_slice(dw.as_standard_layout().as_slice().unwrap());
            grad[b_off..b_off + l.filters]
                .copy_from_slice(dact.sum_axis(Axis(1)).as_slice().unwrap());
            if i > 0 {
                let w = ArrayView2::from_shape((l.filters, c_in * l.kernel), &p[w_off..b_off]).unwrap();
                let dcols = w.t().dot(&dact);
                dact = col2im(&dcols, c_in, n, self.lengths[i], l, self.lengths[i + 1]);
            }
        }
        (loss, grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cnn {
    pub shape: CnnShape,
    pub params: Vec<f64>,
}

impl Cnn {
    pub fn fit(
        x: ArrayView2<f64>,
        labels: &[usize],
        shape: CnnShape,
        iterations: usize,
        adam_cfg: AdamConfig,
        seed: u64,
    ) -> Result<Self> {
        if shape.channels * shape.lengths[0] != x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "cnn input {}×{} does not match feature width {}",
                shape.channels,
                shape.lengths[0],
                x.ncols()
            )));
        }
        let mut params = shape.init(seed);
        adam::minimize(&mut params, iterations, adam_cfg, |p| shape.loss_grad(p, x, labels));
        Ok(Self { shape, params })
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.shape.logits(&self.params, x)
    }

    pub fn probabilities(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = self.logits(x);
        softmax_rows(&mut z);
        z
    }
}
