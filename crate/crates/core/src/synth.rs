//! Seeded synthetic datasets: random bipartite matrices, planted-signal
//! growth panels, and the random-score significance baseline.
//!
//! Everything here is deterministic given the RNG seed, so tests, benchmarks
//! and the `baseline` subcommand reproduce exactly.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{iterate_variant, ComplexityScores, IterationOptions};
use crate::regression::{growth_regression, RegressionError};
use crate::trade::{ExportMatrix, MacroPanel, MacroRecord, TradeError};
use crate::variant::VariantSpec;
use crate::weights::{build_membership, WeightError, WeightMatrix, WeightMode};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Trade(#[from] TradeError),
    #[error(transparent)]
    Metric(#[from] crate::engine::MetricError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error("could not draw a connected matrix in {0} attempts")]
    ConnectivityRetriesExhausted(u32),
    #[error("start years collide within the growth horizon")]
    CollidingYears,
}

fn country_code(i: usize) -> String {
    format!("C{i:03}")
}
fn product_code(j: usize) -> String {
    format!("P{j:03}")
}

/// Random export matrix with lognormal values; every country and product is
/// guaranteed at least one cell.
pub fn random_export_matrix<R: Rng>(
    rng: &mut R,
    year: i32,
    n_countries: usize,
    n_products: usize,
    density: f64,
) -> ExportMatrix {
    let value_dist = LogNormal::new(2.0, 1.5).unwrap();
    let mut rows = Vec::new();
    let mut row_filled = vec![false; n_countries];
    let mut col_filled = vec![false; n_products];
    for c in 0..n_countries {
        for p in 0..n_products {
            if rng.gen::<f64>() < density {
                rows.push((country_code(c), product_code(p), value_dist.sample(rng)));
                row_filled[c] = true;
                col_filled[p] = true;
            }
        }
    }
    for (c, filled) in row_filled.iter().enumerate() {
        if !filled {
            let p = rng.gen_range(0..n_products);
            rows.push((country_code(c), product_code(p), value_dist.sample(rng)));
            col_filled[p] = true;
        }
    }
    for (p, filled) in col_filled.iter().enumerate() {
        if !filled {
            let c = rng.gen_range(0..n_countries);
            rows.push((country_code(c), product_code(p), value_dist.sample(rng)));
        }
    }
    ExportMatrix::from_rows(year, rows).expect("generated matrix is nonempty")
}

/// Random pruned binary weight matrix. With `require_connected` the draw is
/// retried (seeded, hence deterministic) until the bipartite graph is a
/// single component.
pub fn random_binary_weights<R: Rng>(
    rng: &mut R,
    n_countries: usize,
    n_products: usize,
    density: f64,
    require_connected: bool,
) -> Result<WeightMatrix, SynthError> {
    const MAX_ATTEMPTS: u32 = 100;
    for _ in 0..MAX_ATTEMPTS {
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        let mut row_filled = vec![false; n_countries];
        let mut col_filled = vec![false; n_products];
        for c in 0..n_countries {
            for p in 0..n_products {
                if rng.gen::<f64>() < density {
                    entries.push((c as u32, p as u32, 1.0));
                    row_filled[c] = true;
                    col_filled[p] = true;
                }
            }
        }
        for (c, filled) in row_filled.iter().enumerate() {
            if !filled {
                let p = rng.gen_range(0..n_products);
                entries.push((c as u32, p as u32, 1.0));
                col_filled[p] = true;
            }
        }
        for (p, filled) in col_filled.iter().enumerate() {
            if !filled {
                let c = rng.gen_range(0..n_countries);
                entries.push((c as u32, p as u32, 1.0));
            }
        }
        entries.sort_unstable_by_key(|&(c, p, _)| (c, p));
        entries.dedup_by_key(|&mut (c, p, _)| (c, p));
        let w = WeightMatrix::from_entries(
            WeightMode::BinaryRca,
            2000,
            (0..n_countries).map(country_code).collect(),
            (0..n_products).map(product_code).collect(),
            &entries,
        )?;
        if !require_connected || crate::eigen::is_connected(&w) {
            return Ok(w);
        }
    }
    Err(SynthError::ConnectivityRetriesExhausted(MAX_ATTEMPTS))
}

/// Configuration for [`planted_signal_dataset`].
#[derive(Debug, Clone, Copy)]
pub struct PlantedSignal {
    pub n_countries: usize,
    pub n_products: usize,
    pub density: f64,
    pub horizon: u32,
    /// Growth loading on the standardized all-ones-variant score.
    pub signal_coef: f64,
    pub noise_sigma: f64,
}

impl Default for PlantedSignal {
    fn default() -> Self {
        Self {
            n_countries: 50,
            n_products: 120,
            density: 0.3,
            horizon: 10,
            signal_coef: 0.5,
            noise_sigma: 0.1,
        }
    }
}

/// Synthetic exports plus macro panel in which ten-year growth loads on the
/// all-ones variant's scores: `growth = signal_coef * k_c + noise`.
///
/// Growth is floored at -0.5 per year so end-of-horizon income stays
/// positive; the floor only binds in the far left tail of the score
/// distribution.
pub fn planted_signal_dataset<R: Rng>(
    rng: &mut R,
    start_years: &[i32],
    cfg: &PlantedSignal,
) -> Result<(BTreeMap<i32, ExportMatrix>, MacroPanel), SynthError> {
    for (i, &a) in start_years.iter().enumerate() {
        for &b in &start_years[i + 1..] {
            if a == b || (a - b).unsigned_abs() == cfg.horizon {
                return Err(SynthError::CollidingYears);
            }
        }
    }
    let gdp_dist = LogNormal::new(8.5, 0.8).unwrap();
    let pop_dist = LogNormal::new(16.0, 1.5).unwrap();
    let noise = Normal::new(0.0, cfg.noise_sigma).unwrap();

    let mut exports = BTreeMap::new();
    let mut panel = MacroPanel::new();
    for &year in start_years {
        let x = random_export_matrix(rng, year, cfg.n_countries, cfg.n_products, cfg.density);
        let w = build_membership(&x, WeightMode::BinaryRca)?;
        let scores = iterate_variant(&w, VariantSpec::classic(), &IterationOptions::default())?;
        for (i, country) in scores.countries.iter().enumerate() {
            let gdp_start = gdp_dist.sample(rng);
            let g = (cfg.signal_coef * scores.k_c[i] + noise.sample(rng)).max(-0.5);
            let gdp_end = gdp_start * (1.0 + g).powi(cfg.horizon as i32);
            let population = pop_dist.sample(rng);
            panel.insert(
                country,
                year,
                MacroRecord {
                    gdp_per_capita: Some(gdp_start),
                    population: Some(population),
                },
            )?;
            panel.insert(
                country,
                year + cfg.horizon as i32,
                MacroRecord {
                    gdp_per_capita: Some(gdp_end),
                    population: Some(population),
                },
            )?;
        }
        exports.insert(year, x);
    }
    Ok((exports, panel))
}

/// Outcome of the random-score significance baseline.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BaselineSummary {
    pub trials: u32,
    pub significant: u32,
    pub fraction: f64,
}

/// Replace the complexity scores with seeded random numbers and count how
/// often the score coefficient comes out positive with p below the threshold
/// in a growth regression where growth is independent of every regressor.
pub fn null_significance_experiment(
    seed: u64,
    trials: u32,
    n_countries: usize,
    p_threshold: f64,
) -> Result<BaselineSummary, SynthError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gdp_dist = LogNormal::new(8.5, 1.0).unwrap();
    let pop_dist = LogNormal::new(16.0, 1.5).unwrap();
    let growth_dist = Normal::new(0.02, 0.03).unwrap();
    let score_dist = Normal::new(0.0, 1.0).unwrap();
    let year = 1995;
    let horizon = 10;

    let mut significant = 0;
    for _ in 0..trials {
        let countries: Vec<String> = (0..n_countries).map(country_code).collect();
        let values: Vec<f64> = (0..n_countries).map(|_| score_dist.sample(&mut rng)).collect();
        let scores = ComplexityScores::from_raw_values(
            VariantSpec::classic(),
            year,
            WeightMode::BinaryRca,
            countries.clone(),
            values,
        )?;
        let mut panel = MacroPanel::new();
        for country in &countries {
            let gdp_start = gdp_dist.sample(&mut rng);
            let g: f64 = growth_dist.sample(&mut rng);
            let g = g.max(-0.5);
            let gdp_end = gdp_start * (1.0 + g).powi(horizon as i32);
            panel.insert(
                country,
                year,
                MacroRecord {
                    gdp_per_capita: Some(gdp_start),
                    population: Some(pop_dist.sample(&mut rng)),
                },
            )?;
            panel.insert(
                country,
                year + horizon as i32,
                MacroRecord {
                    gdp_per_capita: Some(gdp_end),
                    population: None,
                },
            )?;
        }
        let fit = growth_regression(&scores, &panel, year, horizon)?;
        if fit.coefficients.eci > 0.0 && fit.p_values.eci < p_threshold {
            significant += 1;
        }
    }
    Ok(BaselineSummary {
        trials,
        significant,
        fraction: significant as f64 / trials as f64,
    })
}
