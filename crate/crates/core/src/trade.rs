//! Export-table and macro-panel ingestion.
//!
//! Input files are comma-separated UTF-8 text with a `.` decimal point.
//! Lines starting with `#` are treated as comments, so files written with a
//! provenance header reload cleanly.
//!
//! - exports: header `year,country,product,value`
//! - macro panel: header `year,country,gdp_pc,population` (empty field =
//!   missing)

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TradeError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: expected {expected:?}, got {got:?}")]
    BadHeader { expected: Vec<String>, got: Vec<String> },
    #[error("row {row}: {problem}")]
    BadRow { row: u64, problem: String },
    #[error("no export rows found for year {0}")]
    EmptyMatrix(i32),
    #[error("duplicate macro record for country {country}, year {year}")]
    DuplicateMacroKey { country: String, year: i32 },
    #[error("compound growth needs positive values, got start={start}, end={end}")]
    NonPositiveValue { start: f64, end: f64 },
    #[error("growth horizon must be at least 1 year")]
    BadHorizon,
}

/// Sparse nonnegative country × product export values for a single year.
///
/// Registries are sorted lexicographically and indices are dense; zero cells
/// are not stored, so every stored value is strictly positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportMatrix {
    year: i32,
    countries: Vec<String>,
    products: Vec<String>,
    cells: BTreeMap<(u32, u32), f64>,
}

impl ExportMatrix {
    /// Build a matrix from `(country, product, value)` triples, summing
    /// duplicates. Triples with a zero value validate but are not stored.
    ///
    /// Summation is canonicalized (triples are sorted before folding), so the
    /// result is bit-identical under any permutation of the input.
    pub fn from_rows(year: i32, rows: Vec<(String, String, f64)>) -> Result<Self, TradeError> {
        let mut triples = rows;
        triples.sort_by(|a, b| {
            (a.0.as_str(), a.1.as_str())
                .cmp(&(b.0.as_str(), b.1.as_str()))
                .then(a.2.total_cmp(&b.2))
        });

        let mut summed: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (country, product, value) in triples {
            *summed.entry((country, product)).or_insert(0.0) += value;
        }
        summed.retain(|_, v| *v > 0.0);
        if summed.is_empty() {
            return Err(TradeError::EmptyMatrix(year));
        }

        let mut countries: Vec<String> = summed.keys().map(|(c, _)| c.clone()).collect();
        countries.dedup();
        let mut products: Vec<String> = summed.keys().map(|(_, p)| p.clone()).collect();
        products.sort();
        products.dedup();

        let country_index: BTreeMap<&str, u32> = countries
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u32))
            .collect();
        let product_index: BTreeMap<&str, u32> = products
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i as u32))
            .collect();

        let cells = summed
            .into_iter()
            .map(|((c, p), v)| {
                (
                    (country_index[c.as_str()], product_index[p.as_str()]),
                    v,
                )
            })
            .collect();

        Ok(Self {
            year,
            countries,
            products,
            cells,
        })
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

    pub fn value(&self, country: u32, product: u32) -> f64 {
        self.cells.get(&(country, product)).copied().unwrap_or(0.0)
    }

    /// Stored (strictly positive) cells in (country, product) order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.cells.iter().map(|(&(c, p), &v)| (c, p, v))
    }

    /// Write the matrix back out in the exports file format. Reloading the
    /// output with [`load_exports`] reproduces the matrix exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), TradeError> {
        writeln!(out, "year,country,product,value")?;
        for (c, p, v) in self.cells() {
            writeln!(
                out,
                "{},{},{},{}",
                self.year, self.countries[c as usize], self.products[p as usize], v
            )?;
        }
        Ok(())
    }
}

/// Per-(country, year) GDP per capita and population; either may be missing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MacroPanel {
    rows: BTreeMap<(String, i32), MacroRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MacroRecord {
    pub gdp_per_capita: Option<f64>,
    pub population: Option<f64>,
}

impl MacroPanel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one record; present values must be finite and strictly
    /// positive, and `(country, year)` keys must be unique.
    pub fn insert(
        &mut self,
        country: &str,
        year: i32,
        record: MacroRecord,
    ) -> Result<(), TradeError> {
        for value in [record.gdp_per_capita, record.population].into_iter().flatten() {
            if !value.is_finite() || value <= 0.0 {
                return Err(TradeError::BadRow {
                    row: 0,
                    problem: format!(
                        "macro value for {country}/{year} must be finite and positive, got {value}"
                    ),
                });
            }
        }
        let key = (country.to_owned(), year);
        if self.rows.contains_key(&key) {
            return Err(TradeError::DuplicateMacroKey {
                country: country.to_owned(),
                year,
            });
        }
        self.rows.insert(key, record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn gdp_per_capita(&self, country: &str, year: i32) -> Option<f64> {
        self.rows
            .get(&(country.to_owned(), year))
            .and_then(|r| r.gdp_per_capita)
    }

    pub fn population(&self, country: &str, year: i32) -> Option<f64> {
        self.rows
            .get(&(country.to_owned(), year))
            .and_then(|r| r.population)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, &MacroRecord)> {
        self.rows.iter().map(|((c, y), r)| (c.as_str(), *y, r))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), TradeError> {
        writeln!(out, "year,country,gdp_pc,population")?;
        for (country, year, record) in self.iter() {
            let gdp = record.gdp_per_capita.map(|v| v.to_string()).unwrap_or_default();
            let pop = record.population.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{year},{country},{gdp},{pop}")?;
        }
        Ok(())
    }
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(source)
}

fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<(), TradeError> {
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != expected {
        return Err(TradeError::BadHeader {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            got,
        });
    }
    Ok(())
}

fn row_number(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<T, TradeError> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse().map_err(|_| TradeError::BadRow {
        row: row_number(record),
        problem: format!("{what} is not numeric: {raw:?}"),
    })
}

/// Load the export matrix for one year from a `year,country,product,value`
/// stream. Duplicate (country, product) rows are summed. Malformed rows are
/// errors, not silently skipped.
pub fn load_exports<R: Read>(source: R, year: i32) -> Result<ExportMatrix, TradeError> {
    let mut by_year = load_exports_rows(source)?;
    match by_year.remove(&year) {
        Some(rows) => ExportMatrix::from_rows(year, rows),
        None => Err(TradeError::EmptyMatrix(year)),
    }
}

/// Load export matrices for every year present in the stream.
pub fn load_exports_all_years<R: Read>(
    source: R,
) -> Result<BTreeMap<i32, ExportMatrix>, TradeError> {
    let by_year = load_exports_rows(source)?;
    by_year
        .into_iter()
        .map(|(year, rows)| Ok((year, ExportMatrix::from_rows(year, rows)?)))
        .collect()
}

fn load_exports_rows<R: Read>(
    source: R,
) -> Result<BTreeMap<i32, Vec<(String, String, f64)>>, TradeError> {
    let mut rdr = reader(source);
    check_header(rdr.headers()?, &["year", "country", "product", "value"])?;
    let mut by_year: BTreeMap<i32, Vec<(String, String, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = row_number(&record);
        let row_year: i32 = parse_field(&record, 0, "year")?;
        let country = record.get(1).unwrap_or("").to_owned();
        let product = record.get(2).unwrap_or("").to_owned();
        if country.is_empty() || product.is_empty() {
            return Err(TradeError::BadRow {
                row,
                problem: "country and product codes must be non-empty".into(),
            });
        }
        let value: f64 = parse_field(&record, 3, "value")?;
        if !value.is_finite() {
            return Err(TradeError::BadRow {
                row,
                problem: format!("value is not finite: {value}"),
            });
        }
        if value < 0.0 {
            return Err(TradeError::BadRow {
                row,
                problem: format!("negative export value {value} for {country}/{product}"),
            });
        }
        by_year.entry(row_year).or_default().push((country, product, value));
    }
    Ok(by_year)
}

/// Load a macro panel from a `year,country,gdp_pc,population` stream.
/// Empty fields denote missing values; duplicate (country, year) keys are an
/// error.
pub fn load_macro<R: Read>(source: R) -> Result<MacroPanel, TradeError> {
    let mut rdr = reader(source);
    check_header(rdr.headers()?, &["year", "country", "gdp_pc", "population"])?;
    let mut panel = MacroPanel::new();
    for record in rdr.records() {
        let record = record?;
        let row = row_number(&record);
        let year: i32 = parse_field(&record, 0, "year")?;
        let country = record.get(1).unwrap_or("").to_owned();
        if country.is_empty() {
            return Err(TradeError::BadRow {
                row,
                problem: "country code must be non-empty".into(),
            });
        }
        let gdp = parse_optional(&record, 2, "gdp_pc")?;
        let pop = parse_optional(&record, 3, "population")?;
        let macro_record = MacroRecord {
            gdp_per_capita: gdp,
            population: pop,
        };
        panel.insert(&country, year, macro_record).map_err(|e| match e {
            TradeError::BadRow { problem, .. } => TradeError::BadRow { row, problem },
            other => other,
        })?;
    }
    Ok(panel)
}

fn parse_optional(
    record: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<Option<f64>, TradeError> {
    let raw = record.get(idx).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    let value: f64 = raw.parse().map_err(|_| TradeError::BadRow {
        row: row_number(record),
        problem: format!("{what} is not numeric: {raw:?}"),
    })?;
    Ok(Some(value))
}

/// Annualized compound growth rate: `(v_end / v_start)^(1/horizon) - 1`.
pub fn compound_growth(v_start: f64, v_end: f64, horizon: u32) -> Result<f64, TradeError> {
    if horizon < 1 {
        return Err(TradeError::BadHorizon);
    }
    if !(v_start.is_finite() && v_end.is_finite()) || v_start <= 0.0 || v_end <= 0.0 {
        return Err(TradeError::NonPositiveValue {
            start: v_start,
            end: v_end,
        });
    }
    Ok((v_end / v_start).powf(1.0 / horizon as f64) - 1.0)
}
