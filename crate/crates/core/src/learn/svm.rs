//! Linear soft-margin SVM, one-vs-rest, solved in the dual by coordinate
//! descent with a fixed sweep order.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::Result;

/// Convergence state of one binary dual solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState {
    /// ½αᵀQα − Σα (minimized; the negated dual objective).
    pub dual_objective: f64,
    pub primal_objective: f64,
    /// primal − dual ≥ 0
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub final_state: DualState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmSolverOptions {
    /// Stop when primal − dual ≤ tol · max(1, primal).
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SvmSolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_sweeps: 1000,
        }
    }
}

/// XXᵀ + 1: inner products in the bias-augmented feature space.
pub fn augmented_gram(x: ArrayView2<f64>) -> Array2<f64> {
    x.dot(&x.t()) + 1.0
}

/// Solves min_w ½‖(w, b)‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b)) with labels ±1.
/// The bias is an extra constant feature of value 1. `trace` receives the
/// state after every sweep.
pub fn solve_binary(
    x: ArrayView2<f64>,
    y: &[f64],
    c: f64,
    opts: &SvmSolverOptions,
    trace: Option<&mut Vec<DualState>>,
) -> BinarySvm {
    let gram = augmented_gram(x);
    let alpha = solve_dual(gram.view(), y, c, opts, trace);
    alpha.into_primal(x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub final_state: DualState,
}

impl DualSolution {
    /// w = Σ αᵢyᵢxᵢ, b = Σ αᵢyᵢ.
    pub fn into_primal(self, x: ArrayView2<f64>, y: &[f64]) -> BinarySvm {
        let ay: Vec<f64> = self.alpha.iter().zip(y).map(|(a, y)| a * y).collect();
        let weights = x.t().dot(&ArrayView1::from(&ay)).to_vec();
        BinarySvm {
            weights,
            bias: ay.iter().sum(),
            sweeps: self.sweeps,
            converged: self.converged,
            final_state: self.final_state,
        }
    }
}

fn state(y: &[f64], c: f64, alpha: &[f64], u: &[f64]) -> DualState {
    // u = K(α∘y) holds every decision value, and ‖(w,b)‖² = (α∘y)·u
    let mut norm2 = 0.0;
    let mut hinge = 0.0;
    for i in 0..y.len() {
        norm2 += alpha[i] * y[i] * u[i];
        hinge += (1.0 - y[i] * u[i]).max(0.0);
    }
    let primal = 0.5 * norm2 + c * hinge;
    let dual_objective = 0.5 * norm2 - alpha.iter().sum::<f64>();
    DualState {
        dual_objective,
        primal_objective: primal,
        gap: primal + dual_objective,
    }
}

/// Dual coordinate descent over the augmented Gram matrix, coordinates
/// visited in index order each sweep.
pub fn solve_dual(
    gram: ArrayView2<f64>,
    y: &[f64],
    c: f64,
    opts: &SvmSolverOptions,
    mut trace: Option<&mut Vec<DualState>>,
) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut sweeps = 0;
    let mut converged = false;
    let mut last = state(y, c, &alpha, &u);
    while sweeps < opts.max_sweeps {
        for i in 0..n {
            let q = gram[[i, i]];
            if q <= 0.0 {
                continue;
            }
            let g = y[i] * u[i] - 1.0;
            let old = alpha[i];
            let new = (old - g / q).clamp(0.0, c);
            if new != old {
                alpha[i] = new;
                let delta = (new - old) * y[i];
                for (uj, kj) in u.iter_mut().zip(gram.row(i)) {
                    *uj += delta * kj;
                }
            }
        }
        sweeps += 1;
        last = state(y, c, &alpha, &u);
        if let Some(t) = trace.as_deref_mut() {
            t.push(last);
        }
        if last.gap <= opts.tol * last.primal_objective.max(1.0) {
            converged = true;
            break;
        }
    }
    DualSolution {
        alpha,
        sweeps,
        converged,
        final_state: last,
    }
}

/// One-vs-rest linear SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    /// n_classes × n_features
    pub weights: Array2<f64>,
    pub bias: Vec<f64>,
}

impl LinearSvm {
    pub fn fit(
        x: ArrayView2<f64>,
        labels: &[usize],
        n_classes: usize,
        c: f64,
        opts: &SvmSolverOptions,
    ) -> Result<Self> {
        Self::fit_with_gram(x, augmented_gram(x).view(), labels, n_classes, c, opts)
    }

    /// As `fit`, reusing a precomputed `augmented_gram(x)`.
    pub fn fit_with_gram(
        x: ArrayView2<f64>,
        gram: ArrayView2<f64>,
        labels: &[usize],
        n_classes: usize,
        c: f64,
        opts: &SvmSolverOptions,
    ) -> Result<Self> {
        let mut weights = Array2::zeros((n_classes, x.ncols()));
        let mut bias = vec![0.0; n_classes];
        for k in 0..n_classes {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == k { 1.0 } else { -1.0 })
                .collect();
            let m = solve_dual(gram, &y, c, opts, None).into_primal(x, &y);
            weights.row_mut(k).assign(&ArrayView1::from(&m.weights));
            bias[k] = m.bias;
        }
        Ok(Self { weights, bias })
    }

    pub fn decision_values(&self, x: ArrayView1<f64>) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .zip(&self.bias)
            .map(|(w, b)| w.dot(&x) + b)
            .collect()
    }
}
