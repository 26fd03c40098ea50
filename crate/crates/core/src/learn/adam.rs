//! Adam over a flat parameter vector.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, n_params: usize) -> Self {
        Self {
            cfg,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.cfg;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

/// Full-batch minimization of `loss_grad` for a fixed number of iterations.
pub fn minimize<F>(params: &mut [f64], iterations: usize, cfg: AdamConfig, mut loss_grad: F)
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut opt = Adam::new(cfg, params.len());
    for _ in 0..iterations {
        let (_, grad) = loss_grad(params);
        opt.step(params, &grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = vec![1.0, -1.0];
        let mut opt = Adam::new(AdamConfig::default(), 2);
        opt.step(&mut p, &[3.0, -0.5]);
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((p[1] - (-1.0 + 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn converges_on_quadratic() {
        let mut p = vec![0.3, -0.2];
        let cfg = AdamConfig {
            learning_rate: 1e-2,
            ..Default::default()
        };
        minimize(&mut p, 3000, cfg, |q| {
            let g = vec![2.0 * (q[0] - 0.5), 2.0 * (q[1] + 0.25)];
            ((q[0] - 0.5).powi(2) + (q[1] + 0.25).powi(2), g)
        });
        assert!((p[0] - 0.5).abs() < 1e-3 && (p[1] + 0.25).abs() < 1e-3);
    }
}
