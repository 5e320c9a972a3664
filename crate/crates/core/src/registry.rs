//! Country and sector registries. Their order defines row and column order
//! of every matrix built downstream.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub(crate) fn valid_iso3(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// Ordered list of ISO 3166-1 alpha-3 codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryRegistry {
    codes: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl CountryRegistry {
    /// Builds a registry in the given order.
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        let mut index = BTreeMap::new();
        for code in codes {
            let code = code.as_ref();
            if !valid_iso3(code) {
                return Err(Error::InvalidCountryCode(code.to_string()));
            }
            if index.insert(code.to_string(), out.len()).is_some() {
                return Err(Error::DuplicateId {
                    kind: "country",
                    id: code.to_string(),
                });
            }
            out.push(code.to_string());
        }
        if out.is_empty() {
            return Err(Error::EmptyRegistry("country"));
        }
        Ok(Self { codes: out, index })
    }

    /// Builds a registry in canonical (lexicographic) order.
    pub fn sorted<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut codes: Vec<String> = codes.into_iter().map(|c| c.as_ref().to_string()).collect();
        codes.sort();
        Self::new(codes)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &str {
        &self.codes[i]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn require(&self, code: &str) -> Result<usize> {
        self.index_of(code)
            .ok_or_else(|| Error::UnknownCountry(code.to_string()))
    }
}

/// Ordered industry identifiers with optional human-readable labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorRegistry {
    ids: Vec<String>,
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl SectorRegistry {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ids: Vec<String> = ids.into_iter().map(|s| s.as_ref().to_string()).collect();
        let labels = ids.clone();
        Self::with_labels(ids, labels)
    }

    pub fn with_labels(ids: Vec<String>, labels: Vec<String>) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "sector labels",
                expected: ids.len().to_string(),
                found: labels.len().to_string(),
            });
        }
        let mut index = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "sector id",
                    reason: "empty identifier".to_string(),
                });
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "sector",
                    id: id.clone(),
                });
            }
        }
        if ids.is_empty() {
            return Err(Error::EmptyRegistry("sector"));
        }
        Ok(Self { ids, labels, index })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Registry restricted to the given positions, in that order.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        Self::with_labels(
            keep.iter().map(|&i| self.ids[i].clone()).collect(),
            keep.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn country_codes_validated() {
        assert!(CountryRegistry::new(["USA", "DEU"]).is_ok());
        assert_eq!(
            CountryRegistry::new(["usa"]),
            Err(Error::InvalidCountryCode("usa".into()))
        );
        assert!(matches!(
            CountryRegistry::new(["USA", "USA"]),
            Err(Error::DuplicateId { .. })
        ));
        assert_eq!(
            CountryRegistry::new(Vec::<&str>::new()),
            Err(Error::EmptyRegistry("country"))
        );
    }

    #[test]
    fn sorted_registry_is_canonical() {
        let a = CountryRegistry::sorted(["USA", "AUT", "DEU"]).unwrap();
        let b = CountryRegistry::sorted(["DEU", "USA", "AUT"]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.codes(), ["AUT", "DEU", "USA"]);
        assert_eq!(a.index_of("DEU"), Some(1));
        assert!(matches!(a.require("XXX"), Err(Error::UnknownCountry(_))));
    }

    #[test]
    fn sectors_keep_source_order() {
        let s = SectorRegistry::new(["C26", "A01", "M72"]).unwrap();
        assert_eq!(s.id(0), "C26");
        assert_eq!(s.index_of("M72"), Some(2));
        let sub = s.subset(&[2, 0]).unwrap();
        assert_eq!(sub.ids(), ["M72", "C26"]);
        assert!(SectorRegistry::new(["A", "A"]).is_err());
    }
}
