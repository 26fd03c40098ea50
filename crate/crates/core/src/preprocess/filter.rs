//! Zero-lag Butterworth low-pass filtering and residual-based cut-off
//! selection.

use crate::error::{Error, Result};

/// Cut-off correction for a second-order filter run twice: the cascade's
/// −3 dB point lands on the requested frequency.
/// (2^(1/passes) − 1)^(1/(2·order)) with passes = 2, order = 2.
fn dual_pass_correction() -> f64 {
    (2f64.sqrt() - 1.0).powf(0.25)
}

/// Second-order section in direct form II transposed, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Digital second-order Butterworth low-pass (bilinear transform with
    /// pre-warping) whose dual-pass response is −3 dB at `cutoff`.
    pub fn lowpass_dual_pass(cutoff: f64, sample_rate: f64) -> Result<Self> {
        let nyquist = sample_rate / 2.0;
        if !(cutoff > 0.0 && cutoff < nyquist) {
            return Err(Error::InvalidArgument(format!(
                "cut-off {cutoff} Hz outside (0, {nyquist}) Hz"
            )));
        }
        let k = (std::f64::consts::PI * cutoff / sample_rate).tan() / dual_pass_correction();
        let k2 = k * k;
        let sqrt2 = std::f64::consts::SQRT_2;
        let norm = 1.0 / (1.0 + sqrt2 * k + k2);
        let b0 = k2 * norm;
        Ok(Self {
            b: [b0, 2.0 * b0, b0],
            a: [1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - sqrt2 * k + k2) * norm],
        })
    }

    /// Magnitude response of one pass at `freq`.
    pub fn magnitude(&self, freq: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq / sample_rate;
        let (c1, s1, c2, s2) = (w.cos(), w.sin(), (2.0 * w).cos(), (2.0 * w).sin());
        let num_re = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let num_im = -(self.b[1] * s1 + self.b[2] * s2);
        let den_re = 1.0 + self.a[1] * c1 + self.a[2] * c2;
        let den_im = -(self.a[1] * s1 + self.a[2] * s2);
        (num_re.hypot(num_im)) / (den_re.hypot(den_im))
    }

    /// Steady-state internal state for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let gain = self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>();
        let z2 = self.b[2] - self.a[2] * gain;
        let z1 = self.b[1] - self.a[1] * gain + z2;
        [z1, z2]
    }

    fn run(&self, x: &[f64], state: [f64; 2]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let [mut z1, mut z2] = state;
        x.iter()
            .map(|&v| {
                let y = b0 * v + z1;
                z1 = b1 * v - a1 * y + z2;
                z2 = b2 * v - a2 * y;
                y
            })
            .collect()
    }

    /// Forward-backward filtering with odd reflective padding and
    /// steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let pad = (3 * 3).min(n.saturating_sub(1));
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let zi = self.step_state();
        let scaled = |s: f64| [zi[0] * s, zi[1] * s];
        let mut y = self.run(&ext, scaled(ext[0]));
        y.reverse();
        let mut y = self.run(&y, scaled(y[0]));
        y.reverse();
        y.drain(..pad);
        y.truncate(n);
        y
    }
}

/// Second-order Butterworth low-pass applied forward then backward.
pub fn butterworth_lowpass(series: &[f64], cutoff: f64, sample_rate: f64) -> Result<Vec<f64>> {
    if series.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "filter needs at least 8 samples, got {}",
            series.len()
        )));
    }
    Ok(Biquad::lowpass_dual_pass(cutoff, sample_rate)?.filtfilt(series))
}

/// Candidate cut-offs of the sweep: 2–50 Hz in 0.5 Hz steps.
pub fn cutoff_candidates() -> impl Iterator<Item = f64> {
    (4..=100).map(|i| i as f64 * 0.5)
}

/// Lag-one autocorrelation; `None` when the series has no variation.
pub fn lag_one_autocorrelation(r: &[f64]) -> Option<f64> {
    let n = r.len();
    if n < 2 {
        return None;
    }
    let mean = r.iter().sum::<f64>() / n as f64;
    let denom: f64 = r.iter().map(|v| (v - mean).powi(2)).sum();
    if denom == 0.0 {
        return None;
    }
    let num: f64 = r.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(num / denom)
}

/// Cut-off whose residual (raw − filtered) is closest to white noise, i.e.
/// has the smallest |lag-one autocorrelation|. Ties go to the lower cut-off.
pub fn optimal_cutoff(series: &[f64], sample_rate: f64) -> Result<f64> {
    if series.len() < 32 {
        return Err(Error::InvalidArgument(format!(
            "cut-off search needs at least 32 samples, got {}",
            series.len()
        )));
    }
    let scale = series.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * scale;
    let mut best: Option<(f64, f64)> = None;
    let mut residual = vec![0.0; series.len()];
    for fc in cutoff_candidates().filter(|&fc| fc < sample_rate / 2.0) {
        let filtered = butterworth_lowpass(series, fc, sample_rate)?;
        for ((r, x), y) in residual.iter_mut().zip(series).zip(&filtered) {
            *r = x - y;
        }
        let rms = (residual.iter().map(|v| v * v).sum::<f64>() / residual.len() as f64).sqrt();
        // A residual at round-off level carries no structure.
        let score = if rms <= floor {
            0.0
        } else {
            lag_one_autocorrelation(&residual).map_or(0.0, f64::abs)
        };
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((fc, score));
        }
    }
    best.map(|(fc, _)| fc).ok_or_else(|| {
        Error::InvalidArgument(format!("no cut-off candidate below Nyquist at {sample_rate} Hz"))
    })
}
