//! Country–product weight matrices.
//!
//! Three constructions are supported:
//!
//! - `binary_rca`: entry 1 where a country's export of a product exceeds the
//!   size-expected value, i.e. `X_cp * X > X_p * X_c` (strict; ties give 0).
//!   The comparison is cross-multiplied so no division is involved.
//! - `share`: each entry is the product's share of the country's exports,
//!   `X_cp / X_c`; rows sum to one.
//! - `raw`: the export values unchanged.
//!
//! Matrices are pruned before use: countries with zero diversity and products
//! with zero ubiquity are removed in alternating passes until none remain, so
//! negative exponents downstream never hit an empty sum.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trade::ExportMatrix;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("export matrix has zero world total")]
    ZeroWorldTotal,
    #[error("matrix is empty after pruning")]
    PrunedToEmpty,
    #[error("weight for {country}/{product} must be finite and nonnegative, got {value}")]
    BadWeight {
        country: String,
        product: String,
        value: f64,
    },
    #[error("{mode} mode violation: {problem}")]
    ModeViolation { mode: WeightMode, problem: String },
    #[error("entry ({country}, {product}) is out of bounds")]
    EntryOutOfBounds { country: u32, product: u32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    BinaryRca,
    Share,
    Raw,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            WeightMode::BinaryRca => "binary",
            WeightMode::Share => "share",
            WeightMode::Raw => "raw",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for WeightMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "binary_rca" | "rca" => Ok(Self::BinaryRca),
            "share" => Ok(Self::Share),
            "raw" => Ok(Self::Raw),
            other => Err(format!(
                "unknown matrix mode {other:?}; expected binary, share, or raw"
            )),
        }
    }
}

/// Per-country and per-product export totals plus the world total.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportTotals {
    pub by_country: Vec<f64>,
    pub by_product: Vec<f64>,
    pub world: f64,
}

/// Sum the export matrix along both axes.
pub fn totals(x: &ExportMatrix) -> Result<ExportTotals, WeightError> {
    let mut by_country = vec![0.0; x.n_countries()];
    let mut by_product = vec![0.0; x.n_products()];
    let mut world = 0.0;
    for (c, p, v) in x.cells() {
        by_country[c as usize] += v;
        by_product[p as usize] += v;
        world += v;
    }
    if world <= 0.0 {
        return Err(WeightError::ZeroWorldTotal);
    }
    Ok(ExportTotals {
        by_country,
        by_product,
        world,
    })
}

/// One removal recorded during pruning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub code: String,
    pub kind: RemovalKind,
    pub pass: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalKind {
    Country,
    Product,
}

/// A pruned sparse weight matrix with row/column adjacency in both
/// directions and cached diversity (row sums) and ubiquity (column sums).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    mode: WeightMode,
    year: i32,
    countries: Vec<String>,
    products: Vec<String>,
    rows: Vec<Vec<(u32, f64)>>,
    cols: Vec<Vec<(u32, f64)>>,
    diversity: Vec<f64>,
    ubiquity: Vec<f64>,
}

impl WeightMatrix {
    /// Build a matrix from explicit entries. Weights must be finite and
    /// nonnegative; binary mode additionally requires every stored weight to
    /// be exactly 1 and share mode requires rows to sum to 1 within 1e-12.
    ///
    /// The result is not pruned; call [`prune`] if empty rows or columns may
    /// be present.
    pub fn from_entries(
        mode: WeightMode,
        year: i32,
        countries: Vec<String>,
        products: Vec<String>,
        entries: &[(u32, u32, f64)],
    ) -> Result<Self, WeightError> {
        let nc = countries.len();
        let np = products.len();
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nc];
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); np];
        let mut sorted: Vec<(u32, u32, f64)> = entries.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for &(c, p, w) in &sorted {
            if c as usize >= nc || p as usize >= np {
                return Err(WeightError::EntryOutOfBounds {
                    country: c,
                    product: p,
                });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(WeightError::BadWeight {
                    country: countries[c as usize].clone(),
                    product: products[p as usize].clone(),
                    value: w,
                });
            }
            if mode == WeightMode::BinaryRca && w != 1.0 {
                return Err(WeightError::ModeViolation {
                    mode,
                    problem: format!("stored weight must be 1, got {w}"),
                });
            }
            rows[c as usize].push((p, w));
            cols[p as usize].push((c, w));
        }
        let matrix = Self::assemble(mode, year, countries, products, rows, cols);
        if mode == WeightMode::Share {
            for (c, &d) in matrix.diversity.iter().enumerate() {
                if !matrix.rows[c].is_empty() && (d - 1.0).abs() > 1e-12 {
                    return Err(WeightError::ModeViolation {
                        mode,
                        problem: format!(
                            "row for {} sums to {d}, expected 1",
                            matrix.countries[c]
                        ),
                    });
                }
            }
        }
        Ok(matrix)
    }

    fn assemble(
        mode: WeightMode,
        year: i32,
        countries: Vec<String>,
        products: Vec<String>,
        rows: Vec<Vec<(u32, f64)>>,
        cols: Vec<Vec<(u32, f64)>>,
    ) -> Self {
        let diversity = rows
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum())
            .collect();
        let ubiquity = cols
            .iter()
            .map(|c| c.iter().map(|&(_, w)| w).sum())
            .collect();
        Self {
            mode,
            year,
            countries,
            products,
            rows,
            cols,
            diversity,
            ubiquity,
        }
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }
    pub fn year(&self) -> i32 {
        self.year
    }
    pub fn countries(&self) -> &[String] {
        &self.countries
    }
    pub fn products(&self) -> &[String] {
        &self.products
    }
    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }
    pub fn n_products(&self) -> usize {
        self.products.len()
    }
    /// Row sums.
    pub fn diversity(&self) -> &[f64] {
        &self.diversity
    }
    /// Column sums.
    pub fn ubiquity(&self) -> &[f64] {
        &self.ubiquity
    }
    /// Stored entries of one country row as `(product, weight)` pairs.
    pub fn row(&self, country: usize) -> &[(u32, f64)] {
        &self.rows[country]
    }
    /// Stored entries of one product column as `(country, weight)` pairs.
    pub fn col(&self, product: usize) -> &[(u32, f64)] {
        &self.cols[product]
    }

    pub fn weight(&self, country: u32, product: u32) -> f64 {
        self.rows[country as usize]
            .iter()
            .find(|&&(p, _)| p == product)
            .map(|&(_, w)| w)
            .unwrap_or(0.0)
    }

    /// Stored entries in (country, product) order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(c, row)| row.iter().map(move |&(p, w)| (c as u32, p, w)))
    }

    /// Debug export: `country,product,weight` sorted by (country, product).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), WeightError> {
        writeln!(out, "country,product,weight")?;
        for (c, p, w) in self.entries() {
            writeln!(
                out,
                "{},{},{}",
                self.countries[c as usize], self.products[p as usize], w
            )?;
        }
        Ok(())
    }
}

/// Build the weight matrix for `mode` and prune it.
///
/// Share rows are computed from the pre-pruning country totals; if pruning
/// removes one of a country's products the surviving row is re-normalized to
/// sum to one again (logged at warn level).
pub fn build_membership(x: &ExportMatrix, mode: WeightMode) -> Result<WeightMatrix, WeightError> {
    let t = totals(x)?;
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    for (c, p, v) in x.cells() {
        match mode {
            WeightMode::BinaryRca => {
                // strict comparison, cross-multiplied: X_cp * X > X_p * X_c
                if v * t.world > t.by_product[p as usize] * t.by_country[c as usize] {
                    entries.push((c, p, 1.0));
                }
            }
            WeightMode::Share => {
                entries.push((c, p, v / t.by_country[c as usize]));
            }
            WeightMode::Raw => {
                entries.push((c, p, v));
            }
        }
    }
    let unpruned = WeightMatrix::from_entries(
        mode,
        x.year(),
        x.countries().to_vec(),
        x.products().to_vec(),
        &entries,
    )?;
    let (mut pruned, removals) = prune(&unpruned)?;
    for r in &removals {
        log::warn!(
            "pruned {} {:?} on pass {} (year {}, mode {})",
            match r.kind {
                RemovalKind::Country => "country",
                RemovalKind::Product => "product",
            },
            r.code,
            r.pass,
            x.year(),
            mode
        );
    }
    if mode == WeightMode::Share && !removals.is_empty() {
        renormalize_share_rows(&mut pruned);
    }
    Ok(pruned)
}

fn renormalize_share_rows(w: &mut WeightMatrix) {
    let mut touched = Vec::new();
    for c in 0..w.rows.len() {
        let sum: f64 = w.rows[c].iter().map(|&(_, v)| v).sum();
        if (sum - 1.0).abs() > 1e-12 && sum > 0.0 {
            for entry in &mut w.rows[c] {
                entry.1 /= sum;
            }
            touched.push(c);
        }
    }
    if touched.is_empty() {
        return;
    }
    for &c in &touched {
        log::warn!(
            "re-normalized share row for {} after pruning",
            w.countries[c]
        );
    }
    // rebuild columns and cached sums from the adjusted rows
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); w.products.len()];
    for (c, row) in w.rows.iter().enumerate() {
        for &(p, v) in row {
            cols[p as usize].push((c as u32, v));
        }
    }
    w.cols = cols;
    w.diversity = w
        .rows
        .iter()
        .map(|r| r.iter().map(|&(_, v)| v).sum())
        .collect();
    w.ubiquity = w
        .cols
        .iter()
        .map(|c| c.iter().map(|&(_, v)| v).sum())
        .collect();
}

/// Remove countries with zero diversity and products with zero ubiquity
/// until none remain, alternating country and product passes. The removal
/// log records each dropped code and the pass on which it fell.
pub fn prune(w: &WeightMatrix) -> Result<(WeightMatrix, Vec<Removal>), WeightError> {
    let mut keep_c: Vec<bool> = vec![true; w.n_countries()];
    let mut keep_p: Vec<bool> = vec![true; w.n_products()];
    let mut diversity = w.diversity.clone();
    let mut ubiquity = w.ubiquity.clone();
    let mut removals = Vec::new();
    let mut pass = 0u32;
    loop {
        // country pass
        pass += 1;
        let mut dropped = false;
        for c in 0..keep_c.len() {
            if keep_c[c] && diversity[c] <= 0.0 {
                keep_c[c] = false;
                dropped = true;
                removals.push(Removal {
                    code: w.countries[c].clone(),
                    kind: RemovalKind::Country,
                    pass,
                });
                for &(p, weight) in &w.rows[c] {
                    if keep_p[p as usize] {
                        ubiquity[p as usize] -= weight;
                    }
                }
            }
        }
        let country_pass_dropped = dropped;

        // product pass
        pass += 1;
        dropped = false;
        for p in 0..keep_p.len() {
            if keep_p[p] && ubiquity[p] <= 0.0 {
                keep_p[p] = false;
                dropped = true;
                removals.push(Removal {
                    code: w.products[p].clone(),
                    kind: RemovalKind::Product,
                    pass,
                });
                for &(c, weight) in &w.cols[p] {
                    if keep_c[c as usize] {
                        diversity[c as usize] -= weight;
                    }
                }
            }
        }
        if !country_pass_dropped && !dropped {
            break;
        }
    }

    if keep_c.iter().all(|k| !k) || keep_p.iter().all(|k| !k) {
        return Err(WeightError::PrunedToEmpty);
    }
    if removals.is_empty() {
        return Ok((w.clone(), removals));
    }

    let mut country_map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut countries = Vec::new();
    for (c, &keep) in keep_c.iter().enumerate() {
        if keep {
            country_map.insert(c as u32, countries.len() as u32);
            countries.push(w.countries[c].clone());
        }
    }
    let mut product_map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut products = Vec::new();
    for (p, &keep) in keep_p.iter().enumerate() {
        if keep {
            product_map.insert(p as u32, products.len() as u32);
            products.push(w.products[p].clone());
        }
    }
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); countries.len()];
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); products.len()];
    for (c, row) in w.rows.iter().enumerate() {
        let Some(&new_c) = country_map.get(&(c as u32)) else {
            continue;
        };
        for &(p, weight) in row {
            if let Some(&new_p) = product_map.get(&p) {
                rows[new_c as usize].push((new_p, weight));
                cols[new_p as usize].push((new_c, weight));
            }
        }
    }
    let pruned = WeightMatrix::assemble(w.mode, w.year, countries, products, rows, cols);
    Ok((pruned, removals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::ExportMatrix;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn matrix(rows: &[(&str, &str, f64)]) -> ExportMatrix {
        let rows: Vec<(String, String, f64)> = rows
            .iter()
            .map(|&(c, p, v)| (c.to_string(), p.to_string(), v))
            .collect();
        ExportMatrix::from_rows(2000, rows).unwrap()
    }

    #[test]
    fn totals_of_small_matrix() {
        // [[5, 0], [3, 4]]
        let x = matrix(&[("A", "p", 5.0), ("B", "p", 3.0), ("B", "q", 4.0)]);
        let t = totals(&x).unwrap();
        assert_eq!(t.by_country, vec![5.0, 7.0]);
        assert_eq!(t.by_product, vec![8.0, 4.0]);
        assert_eq!(t.world, 12.0);
    }

    #[test]
    fn totals_of_single_cell() {
        let x = matrix(&[("A", "p", 9.0)]);
        let t = totals(&x).unwrap();
        assert_eq!(t.by_country, vec![9.0]);
        assert_eq!(t.by_product, vec![9.0]);
        assert_eq!(t.world, 9.0);
    }

    #[test]
    fn binary_test_uses_strict_cross_multiplied_comparison() {
        // [[10, 0], [2, 8]]: X_c = (10, 10), X_p = (12, 8), X = 20
        // (A,p): 10*20 > 12*10 -> 1; (B,p): 2*20 > 12*10 false -> 0
        // (B,q): 8*20 > 8*10 -> 1
        let x = matrix(&[("A", "p", 10.0), ("B", "p", 2.0), ("B", "q", 8.0)]);
        let w = build_membership(&x, WeightMode::BinaryRca).unwrap();
        assert_eq!(w.weight(0, 0), 1.0);
        assert_eq!(w.weight(1, 0), 0.0);
        assert_eq!(w.weight(1, 1), 1.0);
        assert_eq!(w.diversity(), &[1.0, 1.0]);
        assert_eq!(w.ubiquity(), &[1.0, 1.0]);
    }

    #[test]
    fn exact_rca_tie_yields_zero() {
        // Symmetric 2x2 with equal cells: every test is X/4 * X == X/2 * X/2,
        // a tie everywhere, so all weights are 0 and pruning empties the
        // matrix.
        let x = matrix(&[
            ("A", "p", 1.0),
            ("A", "q", 1.0),
            ("B", "p", 1.0),
            ("B", "q", 1.0),
        ]);
        assert!(matches!(
            build_membership(&x, WeightMode::BinaryRca),
            Err(WeightError::PrunedToEmpty)
        ));
    }

    #[test]
    fn raw_mode_keeps_values() {
        let x = matrix(&[("A", "p", 5.0), ("B", "p", 3.0), ("B", "q", 4.0)]);
        let w = build_membership(&x, WeightMode::Raw).unwrap();
        assert_eq!(w.weight(0, 0), 5.0);
        assert_eq!(w.weight(1, 0), 3.0);
        assert_eq!(w.weight(1, 1), 4.0);
    }

    #[test]
    fn share_mode_rows_sum_to_one() {
        let x = matrix(&[("A", "p", 5.0), ("B", "p", 3.0), ("B", "q", 4.0)]);
        let w = build_membership(&x, WeightMode::Share).unwrap();
        assert_abs_diff_eq!(w.weight(0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weight(1, 0), 0.428571, epsilon = 1e-6);
        assert_abs_diff_eq!(w.weight(1, 1), 0.571429, epsilon = 1e-6);
        for &d in w.diversity() {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn prune_removes_empty_country_row() {
        let w = WeightMatrix::from_entries(
            WeightMode::Raw,
            2000,
            vec!["A".into(), "B".into(), "C".into()],
            vec!["p".into(), "q".into()],
            &[(0, 0, 2.0), (1, 1, 3.0)],
        )
        .unwrap();
        let (pruned, removals) = prune(&w).unwrap();
        assert_eq!(pruned.countries(), &["A".to_string(), "B".to_string()]);
        assert_eq!(removals.len(), 1);
        assert_eq!(removals[0].code, "C");
        assert_eq!(removals[0].kind, RemovalKind::Country);
        assert_eq!(removals[0].pass, 1);
    }

    #[test]
    fn prune_is_identity_on_clean_matrix() {
        let w = WeightMatrix::from_entries(
            WeightMode::Raw,
            2000,
            vec!["A".into(), "B".into()],
            vec!["p".into(), "q".into()],
            &[(0, 0, 2.0), (1, 1, 3.0), (0, 1, 1.0)],
        )
        .unwrap();
        let (pruned, removals) = prune(&w).unwrap();
        assert!(removals.is_empty());
        assert_eq!(pruned, w);
    }

    #[test]
    fn prune_cascade_falls_on_second_pass() {
        // Country C stores a single zero-weight entry for product r, so C
        // falls on the country pass; with C gone, r is empty and falls on
        // the following product pass.
        let w = WeightMatrix::from_entries(
            WeightMode::Raw,
            2000,
            vec!["A".into(), "B".into(), "C".into()],
            vec!["p".into(), "q".into(), "r".into()],
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0), (2, 2, 0.0)],
        )
        .unwrap();
        let (pruned, removals) = prune(&w).unwrap();
        assert_eq!(pruned.countries(), &["A".to_string(), "B".to_string()]);
        assert_eq!(pruned.products(), &["p".to_string(), "q".to_string()]);
        assert_eq!(removals.len(), 2);
        assert_eq!((removals[0].code.as_str(), removals[0].pass), ("C", 1));
        assert_eq!((removals[1].code.as_str(), removals[1].pass), ("r", 2));
    }

    #[test]
    fn prune_is_idempotent() {
        let w = WeightMatrix::from_entries(
            WeightMode::Raw,
            2000,
            vec!["A".into(), "B".into(), "C".into()],
            vec!["p".into(), "q".into(), "r".into()],
            &[(0, 0, 1.0), (1, 1, 3.0), (2, 2, 0.0)],
        )
        .unwrap();
        let (once, _) = prune(&w).unwrap();
        let (twice, removals) = prune(&once).unwrap();
        assert!(removals.is_empty());
        assert_eq!(once, twice);
    }

    #[test]
    fn prune_to_empty_is_an_error() {
        let w = WeightMatrix::from_entries(
            WeightMode::Raw,
            2000,
            vec!["A".into()],
            vec!["p".into()],
            &[(0, 0, 0.0)],
        )
        .unwrap();
        assert!(matches!(prune(&w), Err(WeightError::PrunedToEmpty)));
    }

    #[test]
    fn binary_mode_rejects_non_unit_weights() {
        let err = WeightMatrix::from_entries(
            WeightMode::BinaryRca,
            2000,
            vec!["A".into()],
            vec!["p".into()],
            &[(0, 0, 0.5)],
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::ModeViolation { .. }));
    }

    #[test]
    fn csv_export_is_sorted_by_country_then_product() {
        let x = matrix(&[("B", "q", 4.0), ("A", "p", 5.0), ("B", "p", 3.0)]);
        let w = build_membership(&x, WeightMode::Raw).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "country,product,weight\nA,p,5\nB,p,3\nB,q,4\n");
    }

    fn random_export_rows(seed: u64, nc: usize, np: usize) -> Vec<(String, String, f64)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for c in 0..nc {
            for p in 0..np {
                if rng.gen::<f64>() < 0.4 {
                    rows.push((
                        format!("C{c:02}"),
                        format!("P{p:02}"),
                        rng.gen_range(0.1..100.0),
                    ));
                }
            }
        }
        rows
    }

    proptest! {
        #[test]
        fn binary_rca_is_scale_invariant(seed in 0u64..500, lambda in 1e-3..1e3f64) {
            let rows = random_export_rows(seed, 8, 12);
            prop_assume!(!rows.is_empty());
            let x = ExportMatrix::from_rows(2000, rows.clone()).unwrap();
            let scaled_rows: Vec<_> = rows
                .into_iter()
                .map(|(c, p, v)| (c, p, v * lambda))
                .collect();
            let x_scaled = ExportMatrix::from_rows(2000, scaled_rows).unwrap();
            match (
                build_membership(&x, WeightMode::BinaryRca),
                build_membership(&x_scaled, WeightMode::BinaryRca),
            ) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.countries(), b.countries());
                    prop_assert_eq!(a.products(), b.products());
                    let ea: Vec<_> = a.entries().collect();
                    let eb: Vec<_> = b.entries().collect();
                    prop_assert_eq!(ea, eb);
                }
                (Err(WeightError::PrunedToEmpty), Err(WeightError::PrunedToEmpty)) => {}
                (a, b) => prop_assert!(false, "diverging outcomes: {:?} vs {:?}", a.err(), b.err()),
            }
        }

        // Every surviving country has at least one qualifying product;
        // countries without one are pruned, never silently kept.
        #[test]
        fn binary_rows_are_nonempty_after_pruning(seed in 0u64..500) {
            let rows = random_export_rows(seed, 10, 15);
            prop_assume!(rows.len() > 4);
            let x = ExportMatrix::from_rows(2000, rows).unwrap();
            prop_assume!(x.n_products() >= 2);
            if let Ok(w) = build_membership(&x, WeightMode::BinaryRca) {
                for c in 0..w.n_countries() {
                    prop_assert!(!w.row(c).is_empty());
                    prop_assert!(w.diversity()[c] >= 1.0);
                }
                for p in 0..w.n_products() {
                    prop_assert!(!w.col(p).is_empty());
                }
            }
        }

        #[test]
        fn prune_is_idempotent_on_random_matrices(seed in 0u64..500) {
            let rows = random_export_rows(seed, 8, 10);
            prop_assume!(!rows.is_empty());
            let x = ExportMatrix::from_rows(2000, rows).unwrap();
            if let Ok(w) = build_membership(&x, WeightMode::BinaryRca) {
                let (again, removals) = prune(&w).unwrap();
                prop_assert!(removals.is_empty());
                prop_assert_eq!(again, w);
            }
        }
    }
}
