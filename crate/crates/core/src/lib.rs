//! Economic complexity metrics, generalized.
//!
//! The country/product scoring rules in this crate all come from one pair of
//! coupled equations over a bipartite country–product weight matrix:
//!
//! ```text
//! K_c = (Σ_p M_cp · K_p^α)^γ / (Σ_p M_cp)^ε
//! K_p = (Σ_c M_cp · K_c^β)^δ / (Σ_c M_cp)^θ
//! ```
//!
//! Each of the six exponents ranges over {-1, 0, 1}, giving a family of
//! 3^6 = 729 variants indexed 1..=729. Variant 729 (all ones) is the classic
//! reflections-based complexity index; variant 545 = (1,-1,1,-1,0,0) is the
//! fitness rule that replaces the averages with a sum and an inverse of
//! reciprocals.
//!
//! The crate covers the full pipeline:
//!
//! - [`trade`]: export-table and macro-panel ingestion, compound growth rates
//! - [`weights`]: weight-matrix construction (binary comparative-advantage
//!   test, export shares, raw values) and degenerate row/column pruning
//! - [`variant`]: the exponent family and its 1..=729 indexing
//! - [`engine`]: the fixed-point iteration producing standardized scores
//! - [`eigen`]: an independent eigenvector formulation used to validate
//!   variant 729
//! - [`regression`]: OLS with t-based inference and the ten-year growth
//!   regression
//! - [`sweep`]: the variant × start-year grid and its aggregate statistics
//! - [`synth`]: seeded synthetic datasets for baselines, tests and benchmarks

pub mod eigen;
pub mod engine;
pub mod regression;
pub mod stats;
pub mod sweep;
pub mod synth;
pub mod trade;
pub mod variant;
pub mod weights;

pub use engine::{ComplexityScores, IterationOptions, MetricError};
pub use regression::{CoefficientSet, OlsFit, RegressionError, RegressionResult};
pub use sweep::{SweepError, SweepOptions, SweepReport, SweepSummary};
pub use trade::{ExportMatrix, MacroPanel, TradeError};
pub use variant::{VariantError, VariantSpec, VARIANT_COUNT};
pub use weights::{WeightError, WeightMatrix, WeightMode};
