//! Country-year macro series used by the growth regressions.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::registry::CountryRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    GdpPerCapita,
    Capital,
    Population,
    HumanCapital,
    Eci,
    Ef,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::GdpPerCapita,
        Variable::Capital,
        Variable::Population,
        Variable::HumanCapital,
        Variable::Eci,
        Variable::Ef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::GdpPerCapita => "gdp_pc",
            Variable::Capital => "capital",
            Variable::Population => "population",
            Variable::HumanCapital => "human_capital",
            Variable::Eci => "eci",
            Variable::Ef => "ef",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    fn must_be_positive(self) -> bool {
        matches!(
            self,
            Variable::GdpPerCapita | Variable::Capital | Variable::Population
        )
    }
}

/// A later row overwrote an earlier one for the same key.
#[derive(Debug, Clone, PartialEq)]
pub struct DuplicateWarning {
    pub country: String,
    pub year: i32,
    pub variable: Variable,
    pub previous: f64,
    pub replacement: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuxiliarySeries {
    values: BTreeMap<(String, i32, Variable), f64>,
    warnings: Vec<DuplicateWarning>,
}

impl AuxiliarySeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores one observation. Malformed codes, unknown countries (when a
    /// registry is given) and non-positive GDP, capital or population are
    /// rejected. Duplicates overwrite and leave a warning.
    pub fn insert(
        &mut self,
        registry: Option<&CountryRegistry>,
        country: &str,
        year: i32,
        variable: Variable,
        value: f64,
    ) -> Result<()> {
        if !crate::registry::valid_iso3(country) {
            return Err(Error::InvalidCountryCode(country.to_string()));
        }
        if let Some(reg) = registry {
            reg.require(country)?;
        }
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "auxiliary series",
                index: 0,
                label: alloc::format!("{country}/{year}/{}", variable.name()),
            });
        }
        if variable.must_be_positive() && value <= 0.0 {
            return Err(Error::NonPositiveSeries {
                country: country.to_string(),
                year,
                variable: variable.name(),
                value,
            });
        }
        if let Some(previous) = self
            .values
            .insert((country.to_string(), year, variable), value)
        {
            self.warnings.push(DuplicateWarning {
                country: country.to_string(),
                year,
                variable,
                previous,
                replacement: value,
            });
        }
        Ok(())
    }

    pub fn get(&self, country: &str, year: i32, variable: Variable) -> Option<f64> {
        self.values
            .get(&(country.to_string(), year, variable))
            .copied()
    }

    pub fn warnings(&self) -> &[DuplicateWarning] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Countries with at least one observation, sorted.
    pub fn countries(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (c, _, _) in self.values.keys() {
            if out.last() != Some(c) {
                out.push(c.clone());
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, Variable, f64)> {
        self.values
            .iter()
            .map(|((c, y, v), x)| (c.as_str(), *y, *v, *x))
    }

    /// All observations of one variable keyed by (country, year).
    pub fn series(&self, variable: Variable) -> BTreeMap<(String, i32), f64> {
        self.values
            .iter()
            .filter(|((_, _, v), _)| *v == variable)
            .map(|((c, y, _), x)| ((c.clone(), *y), *x))
            .collect()
    }
}
