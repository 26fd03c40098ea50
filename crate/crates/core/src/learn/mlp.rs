//! One-hidden-layer perceptron: d → 64 ReLU → classes, softmax output.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{self, AdamConfig};
use super::{he_uniform, softmax_cross_entropy, softmax_rows};

pub const HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpShape {
    pub fn n_params(&self) -> usize {
        self.inputs * self.hidden + self.hidden + self.hidden * self.classes + self.classes
    }

    fn offsets(&self) -> [usize; 4] {
        let w1 = 0;
        let b1 = w1 + self.inputs * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.classes;
        [w1, b1, w2, b2]
    }

    fn views<'a>(
        &self,
        p: &'a [f64],
    ) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>, ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let [w1, b1, w2, b2] = self.offsets();
        let (d, h, k) = (self.inputs, self.hidden, self.classes);
        (
            ArrayView2::from_shape((d, h), &p[w1..b1]).unwrap(),
            ArrayView1::from(&p[b1..w2]),
            ArrayView2::from_shape((h, k), &p[w2..b2]).unwrap(),
            ArrayView1::from(&p[b2..]),
        )
    }

    pub fn init(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![0.0; self.n_params()];
        let [w1, b1, w2, b2] = self.offsets();
        he_uniform(&mut p[w1..b1], self.inputs, &mut rng);
        he_uniform(&mut p[w2..b2], self.hidden, &mut rng);
        p
    }

    pub fn logits(&self, p: &[f64], x: ArrayView2<f64>) -> Array2<f64> {
        let (w1, b1, w2, b2) = self.views(p);
        let a = (x.dot(&w1) + &b1).mapv(|v| v.max(0.0));
        a.dot(&w2) + &b2
    }

    /// Cross-entropy + α/(2n)·Σ W² and its gradient (biases unpenalized).
    pub fn loss_grad(
        &self,
        p: &[f64],
        x: ArrayView2<f64>,
        labels: &[usize],
        alpha: f64,
    ) -> (f64, Vec<f64>) {
        let n = x.nrows() as f64;
        let (w1, b1, w2, b2) = self.views(p);
        let h = x.dot(&w1) + &b1;
        let a = h.mapv(|v| v.max(0.0));
        let z = a.dot(&w2) + &b2;
        let (ce, dz) = softmax_cross_entropy(z, labels);
        let reg = 0.5 * alpha / n * (w1.iter().map(|v| v * v).sum::<f64>()
            + w2.iter().map(|v| v * v).sum::<f64>());

        let mut grad = vec![0.0; p.len()];
        let [o_w1, o_b1, o_w2, o_b2] = self.offsets();
        let dw2 = a.t().dot(&dz) + &(&w2 * (alpha / n));
        grad[o_w2..o_b2].copy_from_slice(dw2.as_slice().unwrap());
        let db2: Array1<f64> = dz.sum_axis(Axis(0));
        grad[o_b2..].copy_from_slice(db2.as_slice().unwrap());
        let mut dh = dz.dot(&w2.t());
        dh.zip_mut_with(&h, |g, &hv| {
            if hv <= 0.0 {
                *g = 0.0
            }
        });
        let dw1 = x.t().dot(&dh) + &(&w1 * (alpha / n));
        let dw1 = dw1.as_standard_layout();
        grad[o_w1..o_b1].copy_from_slice(dw1.as_slice().unwrap());
        let db1 = dh.sum_axis(Axis(0));
        grad[o_b1..o_w2].copy_from_slice(db1.as_slice().unwrap());
        (ce + reg, grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub shape: MlpShape,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn fit(
        x: ArrayView2<f64>,
        labels: &[usize],
        n_classes: usize,
        alpha: f64,
        iterations: usize,
        adam_cfg: AdamConfig,
        seed: u64,
    ) -> Self {
        let shape = MlpShape {
            inputs: x.ncols(),
            hidden: HIDDEN,
            classes: n_classes,
        };
        let mut params = shape.init(seed);
        adam::minimize(&mut params, iterations, adam_cfg, |p| {
            shape.loss_grad(p, x, labels, alpha)
        });
        Self { shape, params }
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.shape.logits(&self.params, x)
    }

    pub fn probabilities(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = self.logits(x);
        softmax_rows(&mut z);
        z
    }

    pub fn hidden_weights(&self) -> ArrayView2<'_, f64> {
        self.shape.views(&self.params).0
    }

    pub fn output_weights(&self) -> ArrayView2<'_, f64> {
        self.shape.views(&self.params).2
    }
}
