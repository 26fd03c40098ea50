//! Paired-samples t-test, Cohen's d for paired data, Bonferroni correction.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// two-sided
    pub p: f64,
    pub df: f64,
}

fn differences(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Statistics(format!(
            "paired samples differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Statistics(format!(
            "paired test needs at least 2 pairs, got {}",
            xs.len()
        )));
    }
    Ok(xs.iter().zip(ys).map(|(x, y)| x - y).collect())
}

fn mean_sd(d: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// t = mean(d)/(sd(d)/√n), df = n − 1. All-zero differences give t = 0,
/// p = 1; a constant non-zero difference gives t = ±∞, p = 0.
pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest> {
    let d = differences(xs, ys)?;
    let n = d.len() as f64;
    let df = n - 1.0;
    let (mean, sd) = mean_sd(&d);
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest {
                t: mean.signum() * f64::INFINITY,
                p: 0.0,
                df,
            }
        });
    }
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Statistics(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, p, df })
}

/// d = mean(differences)/sd(differences).
pub fn cohens_d_paired(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let d = differences(xs, ys)?;
    let (mean, sd) = mean_sd(&d);
    if sd == 0.0 {
        return Err(Error::Statistics(
            "effect size undefined: differences have zero spread".into(),
        ));
    }
    Ok(mean / sd)
}

/// p·k capped at 1.
pub fn bonferroni(p_values: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < p_values.len() {
        return Err(Error::Statistics(format!(
            "bonferroni factor {k} is smaller than the {} comparisons",
            p_values.len()
        )));
    }
    Ok(p_values.iter().map(|p| (p * k as f64).min(1.0)).collect())
}
