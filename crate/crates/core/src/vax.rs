//! Value-added exports through the global Leontief inverse.
//!
//! With technical coefficients `A = Z diag(x)^-1`, value-added coefficients
//! `v = va / x` and `B = (I - A)^-1`, the value added of activity `i`
//! absorbed by final demand of country `d` is `v_i [B f_d]_i`. Value-added
//! exports keep only destinations other than the activity's own country.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::iot::IoTable;
use crate::registry::{CountryRegistry, SectorRegistry};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LeontiefSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    v: DVector<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Perron root of a non-negative matrix by power iteration.
pub fn spectral_radius_estimate(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0);
    let mut rho = 0.0;
    for _ in 0..500 {
        let y = a.map(f64::abs) * &x;
        let norm = y.amax();
        if norm == 0.0 {
            return 0.0;
        }
        rho = norm / x.amax();
        x = y / norm;
    }
    rho
}

impl LeontiefSystem {
    pub fn build(iot: &IoTable) -> Result<Self> {
        let n = iot.n_activities();
        let x = iot.gross_output();
        let z = iot.intermediate();
        let a = DMatrix::from_fn(n, n, |i, j| if x[j] > 0.0 { z[(i, j)] / x[j] } else { 0.0 });
        let v = DVector::from_fn(n, |j, _| {
            if x[j] > 0.0 {
                iot.value_added()[j] / x[j]
            } else {
                0.0
            }
        });

        let lu = (DMatrix::identity(n, n) - &a).lu();
        let u = lu.u();
        let singular = (0..n).any(|k| u[(k, k)].abs() < PIVOT_TOL);
        let b = if singular { None } else { lu.try_inverse() };
        match b {
            Some(b) if b.iter().all(|v| v.is_finite()) => Ok(Self { a, b, v, lu }),
            _ => Err(Error::SingularLeontief {
                spectral_radius: spectral_radius_estimate(&a),
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Technical coefficients.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Leontief inverse.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Value-added coefficients.
    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    /// Solves `(I - A) X = rhs` with the stored factorization.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "Leontief right-hand side",
                expected: alloc::format!("{} rows", self.n()),
                found: alloc::format!("{} rows", rhs.nrows()),
            });
        }
        self.lu.solve(rhs).ok_or(Error::SingularLeontief {
            spectral_radius: spectral_radius_estimate(&self.a),
        })
    }

    /// `v_i [B f_d]_i` for every activity `i` and destination `d`.
    pub fn value_added_absorption(&self, final_demand: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = self.solve(final_demand)?;
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= self.v[i];
        }
        Ok(out)
    }
}

/// Value-added exports by origin country (rows) and sector (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct VaxMatrix {
    pub year: i32,
    pub countries: CountryRegistry,
    pub sectors: SectorRegistry,
    pub values: DMatrix<f64>,
    /// Sum of magnitudes of negative values set to zero.
    pub clamped_mass: f64,
    pub clamped_count: usize,
}

impl VaxMatrix {
    /// Builds from already-computed values; negatives are clamped.
    pub fn new(
        year: i32,
        countries: CountryRegistry,
        sectors: SectorRegistry,
        mut values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.nrows() != countries.len() || values.ncols() != sectors.len() {
            return Err(Error::DimensionMismatch {
                what: "VAX matrix",
                expected: alloc::format!("{}x{}", countries.len(), sectors.len()),
                found: alloc::format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        let mut clamped_mass = 0.0;
        let mut clamped_count = 0;
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "VAX matrix",
                    index: 0,
                    label: String::new(),
                });
            }
            if *v < 0.0 {
                clamped_mass += -*v;
                clamped_count += 1;
                *v = 0.0;
            }
        }
        Ok(Self {
            year,
            countries,
            sectors,
            values,
            clamped_mass,
            clamped_count,
        })
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.values *= lambda;
        out
    }

    pub fn country_totals(&self) -> Vec<f64> {
        self.values
            .row_iter()
            .map(|r| crate::math::sum(r.iter().copied()))
            .collect()
    }
}

pub fn compute_vax(sys: &LeontiefSystem, iot: &IoTable) -> Result<VaxMatrix> {
    let n = iot.n_activities();
    if sys.n() != n {
        return Err(Error::DimensionMismatch {
            what: "Leontief system vs table",
            expected: alloc::format!("{n}"),
            found: alloc::format!("{}", sys.n()),
        });
    }
    let absorbed = sys.value_added_absorption(iot.final_demand())?;
    let nc = iot.countries().len();
    let ns = iot.sectors().len();
    let values = DMatrix::from_fn(nc, ns, |c, s| {
        let i = iot.activity(c, s);
        crate::math::sum((0..nc).filter(|&d| d != c).map(|d| absorbed[(i, d)]))
    });
    VaxMatrix::new(
        iot.year(),
        iot.countries().clone(),
        iot.sectors().clone(),
        values,
    )
}

/// Convenience: Leontief system and value-added exports in one call.
pub fn vax_from_table(iot: &IoTable) -> Result<VaxMatrix> {
    let sys = LeontiefSystem::build(iot)?;
    compute_vax(&sys, iot)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryVax {
    pub country: String,
    pub vax: f64,
    pub value_added: f64,
    pub share_of_world_va: f64,
    pub gross_exports: f64,
    pub exceeds_gross_exports: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaxReport {
    pub year: i32,
    pub world_value_added: f64,
    pub world_vax: f64,
    pub clamped_mass: f64,
    pub countries: Vec<CountryVax>,
}

pub fn vax_accounting_report(vax: &VaxMatrix, iot: &IoTable) -> Result<VaxReport> {
    if vax.countries != *iot.countries() || vax.sectors != *iot.sectors() || vax.year != iot.year()
    {
        return Err(Error::DimensionMismatch {
            what: "VAX matrix vs table registries",
            expected: alloc::format!("year {}", iot.year()),
            found: alloc::format!("year {}", vax.year),
        });
    }
    let world_va = crate::math::sum(iot.value_added().iter().copied());
    let exports = iot.gross_exports();
    let totals = vax.country_totals();
    let ns = iot.sectors().len();
    let countries = totals
        .iter()
        .enumerate()
        .map(|(c, &total)| {
            let va = crate::math::sum((0..ns).map(|s| iot.value_added()[iot.activity(c, s)]));
            CountryVax {
                country: iot.countries().code(c).into(),
                vax: total,
                value_added: va,
                share_of_world_va: if world_va > 0.0 { total / world_va } else { 0.0 },
                gross_exports: exports[c],
                exceeds_gross_exports: total > exports[c] * (1.0 + 1e-9) + 1e-9,
            }
        })
        .collect();
    Ok(VaxReport {
        year: vax.year,
        world_value_added: world_va,
        world_vax: crate::math::sum(totals.iter().copied()),
        clamped_mass: vax.clamped_mass,
        countries,
    })
}
