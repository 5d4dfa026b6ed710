//! Ordinary least squares with t-based inference, and the ten-year growth
//! regression
//!
//! ```text
//! G(t, t+10) = ECI(t) + log GDPpc(t) + log POP(t) + C
//! ```
//!
//! where G is the annualized compound growth rate of GDP per capita. The
//! response and every non-constant regressor are standardized (population
//! std) before fitting, so the score coefficient is comparable across the
//! whole variant family.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ComplexityScores;
use crate::stats;
use crate::trade::{compound_growth, MacroPanel};

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("design matrix column {column} is collinear with earlier columns")]
    Collinear { column: usize },
    #[error("need at least {required} observations for {columns} columns, got {got}")]
    InsufficientObservations {
        got: usize,
        columns: usize,
        required: usize,
    },
    #[error("regression sample has {0} complete countries; need at least 6")]
    InsufficientSample(usize),
    #[error("design matrix columns must all have length {expected}")]
    LengthMismatch { expected: usize },
    #[error("non-finite value in regression input")]
    NonFiniteInput,
    #[error("t statistic must be finite")]
    NonFiniteT,
    #[error("degrees of freedom must be at least 1")]
    BadDof,
    #[error("growth horizon must be at least 1 year")]
    BadHorizon,
    #[error(transparent)]
    Trade(#[from] crate::trade::TradeError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
}

/// General least-squares fit for a design matrix given as columns (the
/// leading column is the intercept).
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub n_obs: usize,
}

/// Named coefficient block of the growth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub intercept: f64,
    pub eci: f64,
    pub gdp: f64,
    pub pop: f64,
}

/// One growth regression: coefficients, inference, fit quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: CoefficientSet,
    pub standard_errors: CoefficientSet,
    pub t_stats: CoefficientSet,
    pub p_values: CoefficientSet,
    pub r_squared: f64,
    pub n_obs: usize,
    pub eci_degenerate: bool,
}

impl RegressionResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("regression result serializes")
    }
}

/// Two-sided p-value of a t statistic with `dof` degrees of freedom,
/// computed as the regularized incomplete beta `I_x(dof/2, 1/2)` with
/// `x = dof / (dof + t^2)`.
pub fn t_pvalue(t: f64, dof: u32) -> Result<f64, RegressionError> {
    if !t.is_finite() {
        return Err(RegressionError::NonFiniteT);
    }
    if dof < 1 {
        return Err(RegressionError::BadDof);
    }
    let v = dof as f64;
    let x = v / (v + t * t);
    Ok(stats::regularized_incomplete_beta(v / 2.0, 0.5, x).clamp(0.0, 1.0))
}

/// Least squares via Householder QR (no normal equations), with residual
/// variance on n - k degrees of freedom and unadjusted R².
pub fn ols(y: &[f64], columns: &[Vec<f64>]) -> Result<OlsFit, RegressionError> {
    let n = y.len();
    let k = columns.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(RegressionError::LengthMismatch { expected: n });
    }
    if n < k + 1 {
        return Err(RegressionError::InsufficientObservations {
            got: n,
            columns: k,
            required: k + 1,
        });
    }
    if y.iter().any(|v| !v.is_finite())
        || columns.iter().any(|c| c.iter().any(|v| !v.is_finite()))
    {
        return Err(RegressionError::NonFiniteInput);
    }

    // column-major working copy of the design matrix
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let col_scale: Vec<f64> = a
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let scale_floor = col_scale.iter().cloned().fold(0.0, f64::max) * (n as f64) * f64::EPSILON;

    // Householder triangularization, applied to y as we go
    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= scale_floor || norm == 0.0 {
            return Err(RegressionError::Collinear { column: j });
        }
        let alpha = if a[j][j] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            let beta = 2.0 / vtv;
            for col in a.iter_mut().skip(j) {
                let dot: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
                let f = beta * dot;
                for (vi, ci) in v.iter().zip(col[j..].iter_mut()) {
                    *ci -= f * vi;
                }
            }
            let dot: f64 = v.iter().zip(&qty[j..]).map(|(a, b)| a * b).sum();
            let f = beta * dot;
            for (vi, yi) in v.iter().zip(qty[j..].iter_mut()) {
                *yi -= f * vi;
            }
        }
        a[j][j] = alpha;
        // diagonal check against the running upper triangle
        if a[j][j].abs() <= scale_floor {
            return Err(RegressionError::Collinear { column: j });
        }
    }

    // back-substitute R beta = (Q^T y)[0..k]
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for j in (i + 1)..k {
            acc -= a[j][i] * beta[j];
        }
        beta[i] = acc / a[i][i];
    }

    // residual sum of squares is the tail of Q^T y
    let ssr: f64 = qty[k..].iter().map(|v| v * v).sum();
    let y_mean = stats::mean(y);
    let sst: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let y_scale: f64 = y.iter().map(|v| v * v).sum();
    let r_squared = if sst <= f64::EPSILON * y_scale || sst == 0.0 {
        0.0
    } else {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    };

    // (X'X)^{-1} = R^{-1} R^{-T}; invert the k x k upper triangle
    let dof = n - k;
    let sigma2 = ssr / dof as f64;
    let mut rinv = vec![vec![0.0; k]; k];
    for i in (0..k).rev() {
        rinv[i][i] = 1.0 / a[i][i];
        for j in (i + 1)..k {
            let mut acc = 0.0;
            for l in (i + 1)..=j {
                acc += a[l][i] * rinv[l][j];
            }
            rinv[i][j] = -acc / a[i][i];
        }
    }
    let mut standard_errors = vec![0.0; k];
    for i in 0..k {
        let gram_ii: f64 = (i..k).map(|j| rinv[i][j] * rinv[i][j]).sum();
        standard_errors[i] = (sigma2 * gram_ii).sqrt();
    }

    let mut t_stats = vec![0.0; k];
    let mut p_values = vec![1.0; k];
    for i in 0..k {
        if standard_errors[i] > 0.0 {
            t_stats[i] = beta[i] / standard_errors[i];
            p_values[i] = t_pvalue(t_stats[i], dof as u32)?;
        } else if beta[i].abs() > 1e-300 {
            t_stats[i] = f64::INFINITY * beta[i].signum();
            p_values[i] = 0.0;
        }
    }

    Ok(OlsFit {
        coefficients: beta,
        standard_errors,
        t_stats,
        p_values,
        r_squared,
        n_obs: n,
    })
}

fn standardize_or_keep(values: &[f64]) -> Vec<f64> {
    match stats::zscore(values) {
        Ok(z) => z,
        Err(_) => values.to_vec(),
    }
}

/// Fit the baseline growth model for one score set and start year.
///
/// The sample is all scored countries with GDP per capita at both ends of
/// the horizon and population at the start (listwise deletion). Degenerate
/// scores drop the score column from the fit; the score coefficient is then
/// reported as 0 with p = 1 and the degenerate flag set.
pub fn growth_regression(
    scores: &ComplexityScores,
    panel: &MacroPanel,
    start_year: i32,
    horizon: u32,
) -> Result<RegressionResult, RegressionError> {
    if horizon < 1 {
        return Err(RegressionError::BadHorizon);
    }
    let end_year = start_year + horizon as i32;
    let mut y = Vec::new();
    let mut eci = Vec::new();
    let mut log_gdp = Vec::new();
    let mut log_pop = Vec::new();
    for (i, country) in scores.countries.iter().enumerate() {
        let (Some(gdp_start), Some(gdp_end), Some(population)) = (
            panel.gdp_per_capita(country, start_year),
            panel.gdp_per_capita(country, end_year),
            panel.population(country, start_year),
        ) else {
            continue;
        };
        y.push(compound_growth(gdp_start, gdp_end, horizon)?);
        eci.push(scores.k_c[i]);
        log_gdp.push(gdp_start.ln());
        log_pop.push(population.ln());
    }
    let n = y.len();
    if n < 6 {
        return Err(RegressionError::InsufficientSample(n));
    }

    let eci_constant = stats::population_std(&eci) < stats::CONSTANT_STD_EPS;
    let eci_degenerate = scores.degenerate || eci_constant;

    let zy = standardize_or_keep(&y);
    let z_gdp = standardize_or_keep(&log_gdp);
    let z_pop = standardize_or_keep(&log_pop);
    let intercept = vec![1.0; n];

    if eci_degenerate {
        let fit = ols(&zy, &[intercept, z_gdp, z_pop])?;
        Ok(RegressionResult {
            coefficients: CoefficientSet {
                intercept: fit.coefficients[0],
                eci: 0.0,
                gdp: fit.coefficients[1],
                pop: fit.coefficients[2],
            },
            standard_errors: CoefficientSet {
                intercept: fit.standard_errors[0],
                eci: 0.0,
                gdp: fit.standard_errors[1],
                pop: fit.standard_errors[2],
            },
            t_stats: CoefficientSet {
                intercept: fit.t_stats[0],
                eci: 0.0,
                gdp: fit.t_stats[1],
                pop: fit.t_stats[2],
            },
            p_values: CoefficientSet {
                intercept: fit.p_values[0],
                eci: 1.0,
                gdp: fit.p_values[1],
                pop: fit.p_values[2],
            },
            r_squared: fit.r_squared,
            n_obs: fit.n_obs,
            eci_degenerate: true,
        })
    } else {
        let z_eci = stats::zscore(&eci)?;
        let fit = ols(&zy, &[intercept, z_eci, z_gdp, z_pop])?;
        Ok(RegressionResult {
            coefficients: CoefficientSet {
                intercept: fit.coefficients[0],
                eci: fit.coefficients[1],
                gdp: fit.coefficients[2],
                pop: fit.coefficients[3],
            },
            standard_errors: CoefficientSet {
                intercept: fit.standard_errors[0],
                eci: fit.standard_errors[1],
                gdp: fit.standard_errors[2],
                pop: fit.standard_errors[3],
            },
            t_stats: CoefficientSet {
                intercept: fit.t_stats[0],
                eci: fit.t_stats[1],
                gdp: fit.t_stats[2],
                pop: fit.t_stats[3],
            },
            p_values: CoefficientSet {
                intercept: fit.p_values[0],
                eci: fit.p_values[1],
                gdp: fit.p_values[2],
                pop: fit.p_values[3],
            },
            r_squared: fit.r_squared,
            n_obs: fit.n_obs,
            eci_degenerate: false,
        })
    }
}
