//! The full variant × start-year sweep and the aggregate statistics derived
//! from it: R² landscapes, within-threshold fractions, significance counts,
//! robust-variant selection, correlations against a reference variant, and
//! ranking exports.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{iterate_variant, ComplexityScores, IterationOptions, MetricError};
use crate::regression::{growth_regression, RegressionError, RegressionResult};
use crate::stats;
use crate::trade::{ExportMatrix, MacroPanel};
use crate::variant::{VariantError, VariantSpec, VARIANT_COUNT};
use crate::weights::{build_membership, WeightError, WeightMode};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no usable start years (each needs exports at t and macro data at t and t+horizon)")]
    NoUsableYears,
    #[error("within-threshold fraction must be in (0, 1], got {0}")]
    BadFraction(f64),
    #[error("year {0} is not part of this report")]
    UnknownYear(i32),
    #[error("reference variant {variant} is degenerate for year {year}")]
    DegenerateReference { variant: u16, year: i32 },
    #[error("scores are degenerate; rankings are undefined")]
    DegenerateScores,
    #[error(transparent)]
    Variant(#[from] VariantError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub iteration: IterationOptions,
}

/// Scores retained for one (variant, year) cell of the sweep.
#[derive(Debug, Clone)]
pub struct VariantScore {
    pub k_c: Vec<f64>,
    pub degenerate: bool,
    pub converged: bool,
    pub iterations_used: u32,
}

/// All 729 score vectors for one start year, over a shared country registry.
#[derive(Debug, Clone)]
pub struct YearScores {
    pub year: i32,
    pub countries: Vec<String>,
    pub variants: Vec<VariantScore>,
}

/// The (variant × start-year) grid of growth regressions plus cached scores.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub mode: WeightMode,
    pub horizon: u32,
    pub start_years: Vec<i32>,
    /// `grid[year_idx][variant_index - 1]`
    pub grid: Vec<Vec<RegressionResult>>,
    pub scores_cache: Vec<YearScores>,
}

/// Flattened grid row for the report export.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GridRow {
    pub variant: u16,
    pub start_year: i32,
    pub r_squared: f64,
    pub eci_coef: f64,
    pub eci_p: f64,
    pub n_obs: usize,
    pub degenerate: bool,
}

/// Within-threshold statistics at one fraction of the per-year maximum R².
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WithinFraction {
    pub fraction: f64,
    /// Qualifying (variant, year) pairs over all pairs.
    pub per_pair_fraction: f64,
    pub qualifying_pairs: usize,
    pub total_pairs: usize,
    /// Per variant: share of years in which it qualifies (index = variant-1).
    #[serde(skip)]
    pub per_variant_share: Vec<f64>,
}

/// Headline statistics for one sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub within: Vec<WithinFraction>,
    pub p_threshold: f64,
    pub min_count: u32,
    pub robust_variant_count: usize,
    pub robust_variants: Vec<u16>,
    /// Per year: share of non-degenerate variants whose squared correlation
    /// with the reference variant reaches at least 0.5.
    pub reference_variant: u16,
    pub reference_r2_at_least_half: BTreeMap<i32, f64>,
}

/// Run the full 729-variant sweep over every usable start year.
///
/// A start year is usable when exports exist for it and the growth
/// regression sample (scored countries with macro data at t and t+horizon)
/// has at least 6 countries; other years are dropped with a warning. Within
/// a year, variants are computed in parallel and assembled in index order,
/// so the report does not depend on scheduling.
pub fn run_sweep(
    exports_by_year: &BTreeMap<i32, ExportMatrix>,
    panel: &MacroPanel,
    start_years: &[i32],
    horizon: u32,
    mode: WeightMode,
    opts: &SweepOptions,
) -> Result<SweepReport, SweepError> {
    let mut usable_years = Vec::new();
    let mut grid = Vec::new();
    let mut scores_cache = Vec::new();

    for &year in start_years {
        let Some(exports) = exports_by_year.get(&year) else {
            log::warn!("start year {year} dropped: no export data");
            continue;
        };
        let weights = match build_membership(exports, mode) {
            Ok(w) => w,
            Err(e) => {
                log::warn!("start year {year} dropped: {e}");
                continue;
            }
        };
        let end_year = year + horizon as i32;
        let complete = weights
            .countries()
            .iter()
            .filter(|c| {
                panel.gdp_per_capita(c, year).is_some()
                    && panel.gdp_per_capita(c, end_year).is_some()
                    && panel.population(c, year).is_some()
            })
            .count();
        if complete < 6 {
            log::warn!(
                "start year {year} dropped: only {complete} countries with complete macro data"
            );
            continue;
        }

        let cells: Vec<(ComplexityScores, RegressionResult)> = (1..=VARIANT_COUNT)
            .into_par_iter()
            .map(|index| {
                let spec = VariantSpec::from_index(index)?;
                let scores = iterate_variant(&weights, spec, &opts.iteration)?;
                let fit = growth_regression(&scores, panel, year, horizon)?;
                Ok::<_, SweepError>((scores, fit))
            })
            .collect::<Result<_, _>>()?;

        let mut fits = Vec::with_capacity(VARIANT_COUNT as usize);
        let mut variants = Vec::with_capacity(VARIANT_COUNT as usize);
        for (scores, fit) in cells {
            variants.push(VariantScore {
                k_c: scores.k_c,
                degenerate: scores.degenerate,
                converged: scores.converged,
                iterations_used: scores.iterations_used,
            });
            fits.push(fit);
        }
        usable_years.push(year);
        grid.push(fits);
        scores_cache.push(YearScores {
            year,
            countries: weights.countries().to_vec(),
            variants,
        });
    }

    if usable_years.is_empty() {
        return Err(SweepError::NoUsableYears);
    }
    Ok(SweepReport {
        mode,
        horizon,
        start_years: usable_years,
        grid,
        scores_cache,
    })
}

impl SweepReport {
    pub fn n_years(&self) -> usize {
        self.start_years.len()
    }

    pub fn fit(&self, variant: u16, year: i32) -> Option<&RegressionResult> {
        let year_idx = self.start_years.iter().position(|&y| y == year)?;
        self.grid[year_idx].get(variant as usize - 1)
    }

    /// Grid flattened in (year, variant) order.
    pub fn grid_rows(&self) -> Vec<GridRow> {
        let mut rows = Vec::with_capacity(self.n_years() * VARIANT_COUNT as usize);
        for (year_idx, &year) in self.start_years.iter().enumerate() {
            for (v, fit) in self.grid[year_idx].iter().enumerate() {
                rows.push(GridRow {
                    variant: (v + 1) as u16,
                    start_year: year,
                    r_squared: fit.r_squared,
                    eci_coef: fit.coefficients.eci,
                    eci_p: fit.p_values.eci,
                    n_obs: fit.n_obs,
                    degenerate: fit.eci_degenerate,
                });
            }
        }
        rows
    }

    /// Landscape export for one year: `variant,r_squared` in variant order.
    pub fn write_landscape<W: Write>(&self, year: i32, mut out: W) -> Result<(), SweepError> {
        let year_idx = self
            .start_years
            .iter()
            .position(|&y| y == year)
            .ok_or(SweepError::UnknownYear(year))?;
        writeln!(out, "variant,r_squared")?;
        for (v, fit) in self.grid[year_idx].iter().enumerate() {
            writeln!(out, "{},{}", v + 1, fit.r_squared)?;
        }
        Ok(())
    }

    /// Compute the headline statistics in one pass.
    pub fn summarize(
        &self,
        fractions: &[f64],
        p_threshold: f64,
        min_count: u32,
        reference_variant: u16,
    ) -> Result<SweepSummary, SweepError> {
        let within = fractions
            .iter()
            .map(|&f| within_fraction(self, f))
            .collect::<Result<Vec<_>, _>>()?;
        let counts = significance_counts(self, p_threshold);
        let robust = robust_variants(&counts, min_count);
        let mut reference_r2 = BTreeMap::new();
        for &year in &self.start_years {
            match correlation_with_reference(self, reference_variant, year) {
                Ok(r2s) => {
                    let defined: Vec<f64> = r2s.into_iter().flatten().collect();
                    if !defined.is_empty() {
                        let share = defined.iter().filter(|&&r| r >= 0.5).count() as f64
                            / defined.len() as f64;
                        reference_r2.insert(year, share);
                    }
                }
                Err(SweepError::DegenerateReference { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(SweepSummary {
            within,
            p_threshold,
            min_count,
            robust_variant_count: robust.len(),
            robust_variants: robust,
            reference_variant,
            reference_r2_at_least_half: reference_r2,
        })
    }
}

/// Fraction of (variant, year) pairs whose R² reaches `fraction` times the
/// year's maximum, plus each variant's share of qualifying years.
pub fn within_fraction(report: &SweepReport, fraction: f64) -> Result<WithinFraction, SweepError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SweepError::BadFraction(fraction));
    }
    let n_years = report.n_years();
    let total_pairs = n_years * VARIANT_COUNT as usize;
    let mut qualifying_pairs = 0;
    let mut per_variant_years = vec![0usize; VARIANT_COUNT as usize];
    for year_fits in &report.grid {
        let max_r2 = year_fits
            .iter()
            .map(|f| f.r_squared)
            .fold(f64::NEG_INFINITY, f64::max);
        let cutoff = fraction * max_r2;
        for (v, fit) in year_fits.iter().enumerate() {
            if fit.r_squared >= cutoff {
                qualifying_pairs += 1;
                per_variant_years[v] += 1;
            }
        }
    }
    let per_variant_share = per_variant_years
        .into_iter()
        .map(|c| c as f64 / n_years as f64)
        .collect();
    Ok(WithinFraction {
        fraction,
        per_pair_fraction: qualifying_pairs as f64 / total_pairs as f64,
        qualifying_pairs,
        total_pairs,
        per_variant_share,
    })
}

/// Per variant: number of years with a positive, significant, non-degenerate
/// score coefficient.
pub fn significance_counts(report: &SweepReport, p_threshold: f64) -> Vec<u32> {
    let mut counts = vec![0u32; VARIANT_COUNT as usize];
    for year_fits in &report.grid {
        for (v, fit) in year_fits.iter().enumerate() {
            if !fit.eci_degenerate
                && fit.coefficients.eci > 0.0
                && fit.p_values.eci < p_threshold
            {
                counts[v] += 1;
            }
        }
    }
    counts
}

/// Variants whose significance count reaches `min_count`, ascending by index.
pub fn robust_variants(counts: &[u32], min_count: u32) -> Vec<u16> {
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c >= min_count)
        .map(|(v, _)| (v + 1) as u16)
        .collect()
}

/// Squared Pearson correlation of every variant's country scores with the
/// reference variant's, for one year. Degenerate variants are `None`.
pub fn correlation_with_reference(
    report: &SweepReport,
    reference_variant: u16,
    year: i32,
) -> Result<Vec<Option<f64>>, SweepError> {
    VariantSpec::from_index(reference_variant)?;
    let year_scores = report
        .scores_cache
        .iter()
        .find(|ys| ys.year == year)
        .ok_or(SweepError::UnknownYear(year))?;
    let reference = &year_scores.variants[reference_variant as usize - 1];
    if reference.degenerate {
        return Err(SweepError::DegenerateReference {
            variant: reference_variant,
            year,
        });
    }
    Ok(year_scores
        .variants
        .iter()
        .map(|v| {
            if v.degenerate {
                None
            } else {
                stats::pearson(&v.k_c, &reference.k_c).map(|r| r * r)
            }
        })
        .collect())
}

/// One row of the exponent-pattern export.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PatternRow {
    pub variant: u16,
    pub alpha: i8,
    pub beta: i8,
    pub gamma: i8,
    pub delta: i8,
    pub epsilon: i8,
    pub theta: i8,
}

/// Exponent rows for a list of variant indices, in the given order.
pub fn export_pattern(variants: &[u16]) -> Result<Vec<PatternRow>, VariantError> {
    variants
        .iter()
        .map(|&index| {
            let spec = VariantSpec::from_index(index)?;
            let [alpha, beta, gamma, delta, epsilon, theta] = spec.exponents();
            Ok(PatternRow {
                variant: index,
                alpha,
                beta,
                gamma,
                delta,
                epsilon,
                theta,
            })
        })
        .collect()
}

/// Pattern export: `variant,alpha,beta,gamma,delta,epsilon,theta`.
pub fn write_pattern<W: Write>(rows: &[PatternRow], mut out: W) -> Result<(), SweepError> {
    writeln!(out, "variant,alpha,beta,gamma,delta,epsilon,theta")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.variant, r.alpha, r.beta, r.gamma, r.delta, r.epsilon, r.theta
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RankedCountry {
    pub rank: usize,
    pub country: String,
    pub k_c: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Rankings {
    pub top: Vec<RankedCountry>,
    pub bottom: Vec<RankedCountry>,
}

/// Top and bottom country lists by standardized score. Ties are broken by
/// country code ascending; requested lengths are truncated to the country
/// count.
pub fn export_rankings(
    scores: &ComplexityScores,
    top_n: usize,
    bottom_n: usize,
) -> Result<Rankings, SweepError> {
    if scores.degenerate {
        return Err(SweepError::DegenerateScores);
    }
    let mut descending: Vec<usize> = (0..scores.countries.len()).collect();
    descending.sort_by(|&a, &b| {
        scores.k_c[b]
            .total_cmp(&scores.k_c[a])
            .then_with(|| scores.countries[a].cmp(&scores.countries[b]))
    });
    let mut ascending: Vec<usize> = (0..scores.countries.len()).collect();
    ascending.sort_by(|&a, &b| {
        scores.k_c[a]
            .total_cmp(&scores.k_c[b])
            .then_with(|| scores.countries[a].cmp(&scores.countries[b]))
    });
    let ranked = |order: &[usize], n: usize| {
        order
            .iter()
            .take(n)
            .enumerate()
            .map(|(rank, &i)| RankedCountry {
                rank: rank + 1,
                country: scores.countries[i].clone(),
                k_c: scores.k_c[i],
            })
            .collect()
    };
    Ok(Rankings {
        top: ranked(&descending, top_n),
        bottom: ranked(&ascending, bottom_n),
    })
}
