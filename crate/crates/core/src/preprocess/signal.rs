//! Per-channel signal operations: derivative, time and weight normalization.

use crate::error::{Error, Result};
use crate::model::FootForces;

/// First time derivative in units per second: central differences inside,
/// one-sided differences at both ends.
pub fn time_derivative(series: &[f64], sample_rate: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "derivative needs at least 3 samples, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push((series[1] - series[0]) * sample_rate);
    out.extend(
        series
            .windows(3)
            .map(|w| (w[2] - w[0]) * 0.5 * sample_rate),
    );
    out.push((series[n - 1] - series[n - 2]) * sample_rate);
    Ok(out)
}

/// Linear interpolation onto `n` phase points spanning 0–100 % of the
/// series. First and last samples are reproduced exactly.
pub fn time_normalize(series: &[f64], n: usize) -> Result<Vec<f64>> {
    let len = series.len();
    if len < 2 {
        return Err(Error::InvalidArgument(format!(
            "time normalization needs at least 2 samples, got {len}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot normalize to {n} points"
        )));
    }
    let span = (len - 1) as f64;
    let steps = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let pos = i as f64 * span / steps;
            let j = pos.floor() as usize;
            if j >= len - 1 {
                return series[len - 1];
            }
            let frac = pos - j as f64;
            if frac == 0.0 {
                series[j]
            } else {
                series[j] + frac * (series[j + 1] - series[j])
            }
        })
        .collect())
}

/// Divides every sample by the session's body weight (N).
pub fn weight_normalize(forces: &FootForces, body_weight: f64) -> Result<FootForces> {
    if !(body_weight.is_finite() && body_weight > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "body weight {body_weight} N is not positive"
        )));
    }
    forces.map_channels(|c| Ok(c.iter().map(|v| v / body_weight).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_constant_is_zero() {
        let d = time_derivative(&[7.0; 20], 1000.0).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_of_ramp_is_exact() {
        let x: Vec<f64> = (0..50).map(|i| 2.0 * i as f64).collect();
        let d = time_derivative(&x, 1000.0).unwrap();
        assert_eq!(d.len(), 50);
        assert!(d.iter().all(|&v| (v - 2000.0).abs() < 1e-9));
    }

    #[test]
    fn derivative_of_sine_has_analytic_amplitude() {
        let x: Vec<f64> = (0..2000).map(|i| (2.0 * PI * i as f64 / 1000.0).sin()).collect();
        let d = time_derivative(&x, 1000.0).unwrap();
        let peak = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 2.0 * PI).abs() < 1e-3, "{peak}");
    }

    #[test]
    fn derivative_needs_three_samples() {
        assert!(time_derivative(&[1.0, 2.0], 1000.0).is_err());
    }

    #[test]
    fn normalize_identity_when_lengths_match() {
        let x: Vec<f64> = (0..101).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(time_normalize(&x, 101).unwrap(), x);
    }

    #[test]
    fn normalize_is_exact_on_ramps() {
        let x: Vec<f64> = (0..737).map(|i| 3.0 - 0.25 * i as f64).collect();
        for n in [11, 101, 1001] {
            let y = time_normalize(&x, n).unwrap();
            assert_eq!(y[0], x[0]);
            assert_eq!(y[n - 1], x[736]);
            for (i, v) in y.iter().enumerate() {
                let expected = 3.0 - 0.25 * 736.0 * i as f64 / (n - 1) as f64;
                assert!((v - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normalize_parabola_error_bound() {
        // f(s) = s² on [0, 1] sampled at 1000 points; range 1.
        let len = 1000;
        let x: Vec<f64> = (0..len)
            .map(|i| (i as f64 / (len - 1) as f64).powi(2))
            .collect();
        let y = time_normalize(&x, 101).unwrap();
        let max_dev = y
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (i as f64 / 100.0).powi(2)).abs())
            .fold(0.0f64, f64::max);
        // Linear interpolation error ≤ h²/8 · max|f''| = (1/999)²/4.
        assert!(max_dev <= 0.25 / 999f64.powi(2) + 1e-15);
        assert!(max_dev < 1e-5, "{max_dev}");
    }

    #[test]
    fn normalize_needs_two_samples() {
        assert!(time_normalize(&[1.0], 11).is_err());
    }

    #[test]
    fn weight_normalization() {
        let f = FootForces::new(vec![0.0; 5], vec![0.0; 5], vec![700.0; 5]);
        let n = weight_normalize(&f, 700.0).unwrap();
        assert!(n.fore_aft.iter().all(|&v| v == 0.0));
        assert!(n.vertical.iter().all(|&v| v == 1.0));
        let half = weight_normalize(&f, 1400.0).unwrap();
        assert!(half.vertical.iter().all(|&v| v == 0.5));
        assert!(weight_normalize(&f, 0.0).is_err());
        assert!(weight_normalize(&f, -3.0).is_err());
    }
}
