//! Country × activity adjacency matrices.
//!
//! The binary matrix marks revealed comparative advantage in gross exports;
//! the weighted matrix holds each country's share of an industry's world
//! value-added exports, so every retained column sums to one.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::registry::{CountryRegistry, SectorRegistry};
use crate::vax::VaxMatrix;

/// Gross exports by country (rows) and product or sector (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ExportMatrix {
    pub countries: CountryRegistry,
    pub activities: SectorRegistry,
    pub values: DMatrix<f64>,
}

impl ExportMatrix {
    pub fn new(
        countries: CountryRegistry,
        activities: SectorRegistry,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.nrows() != countries.len() || values.ncols() != activities.len() {
            return Err(Error::DimensionMismatch {
                what: "export matrix",
                expected: alloc::format!("{}x{}", countries.len(), activities.len()),
                found: alloc::format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                let v = values[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        matrix: "exports",
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            countries,
            activities,
            values,
        })
    }
}

/// Balassa index. Countries with no exports get zero across their row.
pub fn rca(exports: &ExportMatrix) -> Result<DMatrix<f64>> {
    let e = &exports.values;
    let world = crate::math::sum(e.iter().copied());
    if world <= 0.0 {
        return Err(Error::AllZero("export matrix"));
    }
    let country_totals: Vec<f64> = e
        .row_iter()
        .map(|r| crate::math::sum(r.iter().copied()))
        .collect();
    let product_shares: Vec<f64> = e
        .column_iter()
        .map(|c| crate::math::sum(c.iter().copied()) / world)
        .collect();
    Ok(DMatrix::from_fn(e.nrows(), e.ncols(), |c, p| {
        if country_totals[c] == 0.0 || product_shares[p] == 0.0 {
            0.0
        } else {
            (e[(c, p)] / country_totals[c]) / product_shares[p]
        }
    }))
}

/// Entries are exactly 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryAdjacency(DMatrix<f64>);

impl BinaryAdjacency {
    /// Wraps a matrix after checking every entry is 0 or 1.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if let Some(k) = m.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidParameter {
                name: "binary adjacency",
                reason: alloc::format!("entry {k} is {} (expected 0 or 1)", m[k]),
            });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Row sums.
    pub fn diversity(&self) -> Vec<f64> {
        self.0
            .row_iter()
            .map(|r| crate::math::sum(r.iter().copied()))
            .collect()
    }

    /// Column sums.
    pub fn ubiquity(&self) -> Vec<f64> {
        self.0
            .column_iter()
            .map(|c| crate::math::sum(c.iter().copied()))
            .collect()
    }
}

impl core::ops::Deref for BinaryAdjacency {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub const DEFAULT_RCA_THRESHOLD: f64 = 1.0;

/// `M_cp = 1` iff `RCA_cp >= threshold`.
pub fn binarize(rca: &DMatrix<f64>, threshold: f64) -> Result<BinaryAdjacency> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: alloc::format!("must be positive, got {threshold}"),
        });
    }
    Ok(BinaryAdjacency(
        rca.map(|v| if v >= threshold { 1.0 } else { 0.0 }),
    ))
}

/// Column-stochastic matrix of value-added export shares.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    pub year: i32,
    pub countries: CountryRegistry,
    /// Sectors that were kept, in original order.
    pub sectors: SectorRegistry,
    pub w: DMatrix<f64>,
    /// Sectors with zero world value-added exports, removed from `w`.
    pub dropped: Vec<String>,
}

pub fn weighted_adjacency(vax: &VaxMatrix) -> Result<WeightedAdjacency> {
    let values = &vax.values;
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    let mut totals = Vec::new();
    for (s, col) in values.column_iter().enumerate() {
        if let Some(c) = col.iter().position(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::NegativeEntry {
                matrix: "VAX",
                row: c,
                col: s,
                value: col[c],
            });
        }
        let total = crate::math::sum(col.iter().copied());
        if total > 0.0 {
            keep.push(s);
            totals.push(total);
        } else {
            dropped.push(String::from(vax.sectors.id(s)));
        }
    }
    if keep.is_empty() {
        return Err(Error::AllZero("value-added exports"));
    }
    let w = DMatrix::from_fn(values.nrows(), keep.len(), |c, k| {
        values[(c, keep[k])] / totals[k]
    });
    Ok(WeightedAdjacency {
        year: vax.year,
        countries: vax.countries.clone(),
        sectors: vax.sectors.subset(&keep)?,
        w,
        dropped,
    })
}
