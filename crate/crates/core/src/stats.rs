//! Small statistics toolkit: standardization, correlation, and the
//! regularized incomplete beta function backing t-distribution tail areas.
//!
//! All standard deviations here are population standard deviations (divide by
//! n, not n-1); the scoring and regression modules standardize with the same
//! convention throughout.

use thiserror::Error;

/// Population standard deviation below this is treated as a constant vector.
pub const CONSTANT_STD_EPS: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("constant input: population standard deviation is below 1e-15")]
    ConstantInput,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Standardize to mean 0, population standard deviation 1, preserving order.
///
/// A constant input is reported as [`StatsError::ConstantInput`] so callers
/// can route it to their own degenerate handling instead of dividing by zero.
///
/// Centering is done in two passes; a single pass loses digits when the
/// variation is many orders of magnitude below the mean, which the score
/// iteration produces routinely.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    let mut out = Vec::new();
    zscore_into(values, &mut out)?;
    Ok(out)
}

/// In-place variant of [`zscore`] writing into `out`.
pub(crate) fn zscore_into(values: &[f64], out: &mut Vec<f64>) -> Result<(), StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooShort(values.len()));
    }
    let n = values.len() as f64;
    let m = mean(values);
    out.clear();
    out.extend(values.iter().map(|v| v - m));
    // remove the first-order rounding error of the mean
    let residual = out.iter().sum::<f64>() / n;
    for d in out.iter_mut() {
        *d -= residual;
    }
    let sd = (out.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    if sd < CONSTANT_STD_EPS {
        return Err(StatsError::ConstantInput);
    }
    for d in out.iter_mut() {
        *d /= sd;
    }
    Ok(())
}

/// Pearson correlation; `None` when either side is constant or lengths
/// differ or fewer than two observations are given.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let xa = a - mx;
        let yb = b - my;
        num += xa * yb;
        dx += xa * xa;
        dy += yb * yb;
    }
    let denom = (dx * dy).sqrt();
    if denom < CONSTANT_STD_EPS {
        return None;
    }
    Some(num / denom)
}

/// Correlation of two already-standardized vectors: plain dot product / n.
pub(crate) fn standardized_corr(zx: &[f64], zy: &[f64]) -> f64 {
    let n = zx.len() as f64;
    zx.iter().zip(zy).map(|(a, b)| a * b).sum::<f64>() / n
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks are 1-based; ties share the average rank of the run
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Continued-fraction evaluation (modified Lentz), switching to the
/// symmetric form when `x` is past the distribution bulk so the fraction
/// converges quickly on both sides.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
