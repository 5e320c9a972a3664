//! Auxiliary country-year series: `country,year,variable,value`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vxf_core::{AuxiliarySeries, CountryRegistry, Variable};

use crate::error::{CliError, CliResult};
use crate::io::read_records;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxRecord {
    pub country: String,
    pub year: i32,
    pub variable: String,
    pub value: f64,
}

pub fn load_auxiliary(path: &Path, registry: Option<&CountryRegistry>) -> CliResult<AuxiliarySeries> {
    let rows: Vec<AuxRecord> = read_records(path)?;
    let mut aux = AuxiliarySeries::new();
    for (k, r) in rows.into_iter().enumerate() {
        let var = Variable::parse(&r.variable).ok_or_else(|| {
            let names: Vec<&str> = Variable::ALL.iter().map(|v| v.name()).collect();
            CliError::malformed(
                path,
                format!("record {}: unknown variable `{}` (expected one of {})", k + 1, r.variable, names.join(", ")),
            )
        })?;
        aux.insert(registry, &r.country, r.year, var, r.value)
            .map_err(|e| CliError::from(e).at(path))?;
    }
    Ok(aux)
}

pub fn aux_records(aux: &AuxiliarySeries) -> Vec<AuxRecord> {
    aux.iter()
        .map(|(c, y, v, x)| AuxRecord {
            country: c.to_string(),
            year: y,
            variable: v.name().to_string(),
            value: x,
        })
        .collect()
}

/// Country list with header `country`.
pub fn load_countries(path: &Path) -> CliResult<CountryRegistry> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
    }
    let rows: Vec<Row> = read_records(path)?;
    CountryRegistry::sorted(rows.into_iter().map(|r| r.country)).map_err(|e| CliError::from(e).at(path))
}
