//! Record types of the tabular outputs and their readers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vxf_core::{CountryRegistry, DMatrix, SectorRegistry, VaxMatrix, VaxReport};

use crate::error::{CliError, CliResult};
use crate::io::read_records;

/// `year,country,sector,vax`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaxRecord {
    pub year: i32,
    pub country: String,
    pub sector: String,
    pub vax: f64,
}

pub fn vax_records(vax: &VaxMatrix) -> Vec<VaxRecord> {
    let mut out = Vec::with_capacity(vax.values.len());
    for c in 0..vax.countries.len() {
        for s in 0..vax.sectors.len() {
            out.push(VaxRecord {
                year: vax.year,
                country: vax.countries.code(c).to_string(),
                sector: vax.sectors.id(s).to_string(),
                vax: vax.values[(c, s)],
            });
        }
    }
    out
}

/// Dense matrix from long records: countries sorted, columns in order of
/// first appearance. Missing cells are zero; repeated cells are an error.
fn assemble(
    path: &Path,
    cells: impl Iterator<Item = (String, String, f64)>,
) -> CliResult<(CountryRegistry, SectorRegistry, DMatrix<f64>)> {
    let mut columns: Vec<String> = Vec::new();
    let mut column_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut values: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for (country, column, v) in cells {
        let next = columns.len();
        let j = *column_index.entry(column.clone()).or_insert(next);
        if j == next {
            columns.push(column.clone());
        }
        if values.insert((country.clone(), j), v).is_some() {
            return Err(CliError::from(vxf_core::Error::DuplicateId {
                kind: "cell",
                id: format!("{country}/{column}"),
            })
            .at(path));
        }
    }
    let countries = CountryRegistry::sorted(
        values.keys().map(|(c, _)| c.as_str()).collect::<std::collections::BTreeSet<_>>(),
    )
    .map_err(|e| CliError::from(e).at(path))?;
    let sectors = SectorRegistry::new(&columns).map_err(|e| CliError::from(e).at(path))?;
    let mut m = DMatrix::zeros(countries.len(), sectors.len());
    for ((c, j), v) in values {
        m[(countries.index_of(&c).unwrap(), j)] = v;
    }
    Ok((countries, sectors, m))
}

/// Reads a VAX file, one matrix per year (or only `year`). Negative cells
/// are clamped as in the computation.
pub fn read_vax(path: &Path, year: Option<i32>) -> CliResult<BTreeMap<i32, VaxMatrix>> {
    let rows: Vec<VaxRecord> = read_records(path)?;
    let mut by_year: BTreeMap<i32, Vec<VaxRecord>> = BTreeMap::new();
    for r in rows.into_iter().filter(|r| year.is_none_or(|y| y == r.year)) {
        by_year.entry(r.year).or_default().push(r);
    }
    if by_year.is_empty() {
        return Err(CliError::new("empty_input", crate::error::exit::INPUT, "no VAX rows").at(path));
    }
    by_year
        .into_iter()
        .map(|(y, rows)| {
            let (c, s, m) = assemble(path, rows.into_iter().map(|r| (r.country, r.sector, r.vax)))?;
            let vax = VaxMatrix::new(y, c, s, m).map_err(|e| CliError::from(e).at(path))?;
            Ok((y, vax))
        })
        .collect()
}

/// `country,activity,value`; a `year` column is accepted on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    #[serde(default, skip_serializing)]
    pub year: Option<i32>,
    pub country: String,
    pub activity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub year: Option<i32>,
    pub countries: CountryRegistry,
    pub activities: SectorRegistry,
    pub values: DMatrix<f64>,
}

pub fn matrix_records(countries: &CountryRegistry, activities: &SectorRegistry, m: &DMatrix<f64>) -> Vec<MatrixRecord> {
    let mut out = Vec::with_capacity(m.len());
    for c in 0..m.nrows() {
        for p in 0..m.ncols() {
            out.push(MatrixRecord {
                year: None,
                country: countries.code(c).to_string(),
                activity: activities.id(p).to_string(),
                value: m[(c, p)],
            });
        }
    }
    out
}

/// Reads a country × activity matrix. With a `year` column present, `year`
/// selects one; a file holding several years needs the selection.
pub fn read_matrix(path: &Path, year: Option<i32>) -> CliResult<LabeledMatrix> {
    let rows: Vec<MatrixRecord> = read_records(path)?;
    let years: std::collections::BTreeSet<i32> = rows.iter().filter_map(|r| r.year).collect();
    let chosen = match (year, years.len()) {
        (Some(y), _) if !years.is_empty() && !years.contains(&y) => {
            return Err(CliError::new("empty_input", crate::error::exit::INPUT, format!("no rows for year {y}")).at(path));
        }
        (Some(y), _) => Some(y),
        (None, 0) => None,
        (None, 1) => years.first().copied(),
        (None, _) => {
            return Err(CliError::usage(format!(
                "{} holds several years ({}); select one with --year",
                path.display(),
                years.iter().map(i32::to_string).collect::<Vec<_>>().join(", ")
            )));
        }
    };
    let rows = rows.into_iter().filter(|r| r.year.is_none() || r.year == chosen);
    let (countries, activities, values) = assemble(path, rows.map(|r| (r.country, r.activity, r.value)))?;
    Ok(LabeledMatrix {
        year: chosen,
        countries,
        activities,
        values,
    })
}

/// `year,country,vax,value_added,share_of_world_va,gross_exports,exceeds_gross_exports`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaxReportRecord {
    pub year: i32,
    pub country: String,
    pub vax: f64,
    pub value_added: f64,
    pub share_of_world_va: f64,
    pub gross_exports: f64,
    pub exceeds_gross_exports: bool,
}

pub fn vax_report_records(report: &VaxReport) -> Vec<VaxReportRecord> {
    report
        .countries
        .iter()
        .map(|c| VaxReportRecord {
            year: report.year,
            country: c.country.clone(),
            vax: c.vax,
            value_added: c.value_added,
            share_of_world_va: c.share_of_world_va,
            gross_exports: c.gross_exports,
            exceeds_gross_exports: c.exceeds_gross_exports,
        })
        .collect()
}

/// `country,metric,year,value,rank,converged,iterations`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub country: String,
    pub metric: String,
    pub year: Option<i32>,
    pub value: f64,
    /// Optional on input; zero when absent.
    #[serde(default)]
    pub rank: usize,
    #[serde(default = "assume_converged")]
    pub converged: bool,
    #[serde(default)]
    pub iterations: Option<usize>,
}

fn assume_converged() -> bool {
    true
}

/// Scores written by `metrics`, or any file with at least
/// `country,metric,year,value`.
pub fn read_scores(path: &Path) -> CliResult<Vec<ScoreRecord>> {
    read_records(path)
}

/// `activity,metric,year,value,converged,iterations`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub activity: String,
    pub metric: String,
    pub year: Option<i32>,
    pub value: f64,
    pub converged: bool,
    pub iterations: Option<usize>,
}

/// `metric,year,rank,country,value`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub metric: String,
    pub year: Option<i32>,
    pub rank: usize,
    pub country: String,
    pub value: f64,
}
