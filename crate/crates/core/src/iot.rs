//! Inter-country input-output tables.
//!
//! Activities are indexed country-major: activity `c * S + s` is sector `s`
//! of country `c`. `Z` is the `(C·S)×(C·S)` intermediate-flow matrix, `F` the
//! `(C·S)×C` final-demand matrix (one column per destination country), `va`
//! value added and `x` gross output.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Axis, Error, Result};
use crate::registry::{CountryRegistry, SectorRegistry};

/// Validation thresholds applied when a table is assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct IoOptions {
    /// Relative tolerance on both accounting identities.
    pub identity_rel_tol: f64,
    /// Absolute floor (currency units) under the relative tolerance.
    pub identity_abs_floor: f64,
    /// Negatives smaller in magnitude than this fraction of a block's largest
    /// absolute entry are clamped to zero.
    pub negative_rel_tol: f64,
    /// Final-demand categories left out when summing per destination
    /// (for example `INVEN`). Empty means every category is summed.
    pub excluded_fd_categories: Vec<String>,
}

impl Default for IoOptions {
    fn default() -> Self {
        Self {
            identity_rel_tol: 1e-6,
            identity_abs_floor: 1e-3,
            negative_rel_tol: 1e-6,
            excluded_fd_categories: Vec::new(),
        }
    }
}

/// A final-demand entry that is negative beyond the clamping threshold.
/// These are legitimate inventory drawdowns and are kept as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedNegative {
    pub row: usize,
    pub dest: usize,
    pub value: f64,
}

/// What happened to the raw numbers while the table was assembled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub clamped_negatives: usize,
    pub flagged_final_demand: Vec<FlaggedNegative>,
    pub worst_row_residual: f64,
    pub worst_column_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoTable {
    year: i32,
    countries: CountryRegistry,
    sectors: SectorRegistry,
    z: DMatrix<f64>,
    f: DMatrix<f64>,
    va: DVector<f64>,
    x: DVector<f64>,
    report: IngestReport,
}

fn clamp_small_negatives(m: &mut DMatrix<f64>, rel: f64) -> (usize, f64) {
    let eps = rel * m.amax();
    let mut n = 0;
    for v in m.iter_mut() {
        if *v < 0.0 && *v >= -eps {
            *v = 0.0;
            n += 1;
        }
    }
    (n, eps)
}

fn require_non_negative(m: &DMatrix<f64>, name: &'static str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: name,
                    index: i * m.ncols() + j,
                    label: format!("({i}, {j})"),
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    matrix: name,
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

impl IoTable {
    /// Assembles and validates a table from dense blocks already in registry
    /// order.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        year: i32,
        countries: CountryRegistry,
        sectors: SectorRegistry,
        z: DMatrix<f64>,
        f: DMatrix<f64>,
        va: DVector<f64>,
        x: DVector<f64>,
        opts: &IoOptions,
    ) -> Result<Self> {
        let n = countries.len() * sectors.len();
        let dims = [
            ("Z", (z.nrows(), z.ncols()), (n, n)),
            ("F", (f.nrows(), f.ncols()), (n, countries.len())),
            ("va", (va.len(), 1), (n, 1)),
            ("x", (x.len(), 1), (n, 1)),
        ];
        for (what, found, expected) in dims {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: format!("{}x{}", expected.0, expected.1),
                    found: format!("{}x{}", found.0, found.1),
                });
            }
        }

        let mut z = z;
        let mut f = f;
        let mut va_m = DMatrix::from_column_slice(n, 1, va.as_slice());
        let mut x_m = DMatrix::from_column_slice(n, 1, x.as_slice());
        let mut report = IngestReport::default();

        for (m, name) in [(&mut z, "Z"), (&mut va_m, "va"), (&mut x_m, "x")] {
            let (k, _) = clamp_small_negatives(m, opts.negative_rel_tol);
            report.clamped_negatives += k;
            require_non_negative(m, name)?;
        }
        let (k, _) = clamp_small_negatives(&mut f, opts.negative_rel_tol);
        report.clamped_negatives += k;
        for d in 0..f.ncols() {
            for i in 0..n {
                let v = f[(i, d)];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        what: "F",
                        index: i,
                        label: format!("({i}, {d})"),
                    });
                }
                if v < 0.0 {
                    report.flagged_final_demand.push(FlaggedNegative {
                        row: i,
                        dest: d,
                        value: v,
                    });
                }
            }
        }

        let table = Self {
            year,
            countries,
            sectors,
            z,
            f,
            va: DVector::from_column_slice(va_m.as_slice()),
            x: DVector::from_column_slice(x_m.as_slice()),
            report,
        };
        table.check_identities(opts)
    }

    fn check_identities(mut self, opts: &IoOptions) -> Result<Self> {
        let n = self.n_activities();
        let tol = |x: f64| f64::max(opts.identity_rel_tol * x.abs(), opts.identity_abs_floor);

        for axis in [Axis::Row, Axis::Column] {
            let mut worst: Option<(usize, f64, f64)> = None;
            let mut worst_ratio = 0.0;
            for i in 0..n {
                let used = match axis {
                    Axis::Row => {
                        crate::math::sum(self.z.row(i).iter().copied())
                            + crate::math::sum(self.f.row(i).iter().copied())
                    }
                    Axis::Column => crate::math::sum(self.z.column(i).iter().copied()) + self.va[i],
                };
                let residual = self.x[i] - used;
                let ratio = residual.abs() / tol(self.x[i]);
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst = Some((i, residual, self.x[i]));
                }
            }
            let worst_residual = worst.map_or(0.0, |w| w.1.abs());
            match axis {
                Axis::Row => self.report.worst_row_residual = worst_residual,
                Axis::Column => self.report.worst_column_residual = worst_residual,
            }
            if worst_ratio > 1.0 {
                let (index, residual, x) = worst.unwrap();
                return Err(Error::AccountingIdentity {
                    axis,
                    index,
                    label: self.activity_label(index),
                    residual,
                    relative: if x != 0.0 { residual / x } else { f64::INFINITY },
                });
            }
        }
        Ok(self)
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn countries(&self) -> &CountryRegistry {
        &self.countries
    }

    pub fn sectors(&self) -> &SectorRegistry {
        &self.sectors
    }

    pub fn n_activities(&self) -> usize {
        self.countries.len() * self.sectors.len()
    }

    /// Country index owning activity `i`.
    pub fn country_of(&self, i: usize) -> usize {
        i / self.sectors.len()
    }

    pub fn activity(&self, country: usize, sector: usize) -> usize {
        country * self.sectors.len() + sector
    }

    pub fn activity_label(&self, i: usize) -> String {
        let s = self.sectors.len();
        format!("{}/{}", self.countries.code(i / s), self.sectors.id(i % s))
    }

    pub fn intermediate(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn final_demand(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn value_added(&self) -> &DVector<f64> {
        &self.va
    }

    pub fn gross_output(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    /// Gross exports per country: intermediate and final sales to every
    /// other country.
    pub fn gross_exports(&self) -> Vec<f64> {
        let n = self.n_activities();
        let mut out = alloc::vec![0.0; self.countries.len()];
        for i in 0..n {
            let c = self.country_of(i);
            let mut e = 0.0;
            for j in 0..n {
                if self.country_of(j) != c {
                    e += self.z[(i, j)];
                }
            }
            for d in 0..self.countries.len() {
                if d != c {
                    e += self.f[(i, d)];
                }
            }
            out[c] += e;
        }
        out
    }

    /// Multiplies every currency block by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut t = self.clone();
        t.z *= lambda;
        t.f *= lambda;
        t.va *= lambda;
        t.x *= lambda;
        t
    }
}

/// Where a flow recorded in a long-format table lands.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Destination {
    /// Intermediate use by (country, sector).
    Intermediate { country: String, sector: String },
    /// Final use by a country, optionally tagged with a demand category.
    Final {
        country: String,
        category: Option<String>,
    },
}

type CellKey = (String, String, Destination);

/// Accumulates cells in any order and assembles an [`IoTable`] in canonical
/// order: countries lexicographic, sectors as given by an explicit registry
/// or else by first appearance.
#[derive(Debug, Clone)]
pub struct IoTableBuilder {
    year: i32,
    sector_order: Option<SectorRegistry>,
    seen_sectors: Vec<String>,
    seen_sector_set: BTreeSet<String>,
    countries: BTreeSet<String>,
    flows: BTreeMap<CellKey, f64>,
    value_added: BTreeMap<(String, String), f64>,
    gross_output: BTreeMap<(String, String), f64>,
}

impl IoTableBuilder {
    pub fn new(year: i32) -> Self {
        Self {
            year,
            sector_order: None,
            seen_sectors: Vec::new(),
            seen_sector_set: BTreeSet::new(),
            countries: BTreeSet::new(),
            flows: BTreeMap::new(),
            value_added: BTreeMap::new(),
            gross_output: BTreeMap::new(),
        }
    }

    /// Fixes sector order instead of using first appearance.
    pub fn with_sectors(mut self, sectors: SectorRegistry) -> Self {
        self.sector_order = Some(sectors);
        self
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    fn note(&mut self, country: &str, sector: &str) {
        self.countries.insert(country.to_string());
        if self.seen_sector_set.insert(sector.to_string()) {
            self.seen_sectors.push(sector.to_string());
        }
    }

    pub fn add_flow(
        &mut self,
        origin_country: &str,
        origin_sector: &str,
        dest: Destination,
        value: f64,
    ) -> Result<()> {
        self.note(origin_country, origin_sector);
        match &dest {
            Destination::Intermediate { country, sector } => {
                let (c, s) = (country.clone(), sector.clone());
                self.note(&c, &s);
            }
            Destination::Final { country, .. } => {
                self.countries.insert(country.clone());
            }
        }
        let key = (origin_country.to_string(), origin_sector.to_string(), dest);
        if self.flows.insert(key.clone(), value).is_some() {
            return Err(Error::DuplicateId {
                kind: "cell",
                id: format!("{}/{} -> {:?}", key.0, key.1, key.2),
            });
        }
        Ok(())
    }

    pub fn add_value_added(&mut self, country: &str, sector: &str, value: f64) -> Result<()> {
        self.note(country, sector);
        let key = (country.to_string(), sector.to_string());
        if self.value_added.insert(key, value).is_some() {
            return Err(Error::DuplicateId {
                kind: "value-added cell",
                id: format!("{country}/{sector}"),
            });
        }
        Ok(())
    }

    pub fn add_gross_output(&mut self, country: &str, sector: &str, value: f64) -> Result<()> {
        self.note(country, sector);
        let key = (country.to_string(), sector.to_string());
        if self.gross_output.insert(key, value).is_some() {
            return Err(Error::DuplicateId {
                kind: "gross-output cell",
                id: format!("{country}/{sector}"),
            });
        }
        Ok(())
    }

    /// Assembles the table. Missing cells are zero. Gross output, when not
    /// supplied at all, is taken as the row total.
    pub fn build(self, opts: &IoOptions) -> Result<IoTable> {
        let countries = CountryRegistry::sorted(self.countries.iter())?;
        let sectors = match self.sector_order {
            Some(reg) => {
                if let Some(extra) = self.seen_sectors.iter().find(|s| reg.index_of(s).is_none()) {
                    return Err(Error::UnknownSector(extra.clone()));
                }
                reg
            }
            None => SectorRegistry::new(self.seen_sectors.iter())?,
        };
        let ns = sectors.len();
        let nc = countries.len();
        let n = nc * ns;
        let act = |c: &str, s: &str| -> Result<usize> {
            let ci = countries.require(c)?;
            let si = sectors
                .index_of(s)
                .ok_or_else(|| Error::UnknownSector(s.to_string()))?;
            Ok(ci * ns + si)
        };

        let mut z = DMatrix::zeros(n, n);
        let mut f = DMatrix::zeros(n, nc);
        for ((oc, os, dest), v) in &self.flows {
            let i = act(oc, os)?;
            match dest {
                Destination::Intermediate { country, sector } => {
                    z[(i, act(country, sector)?)] = *v;
                }
                Destination::Final { country, category } => {
                    if let Some(cat) = category {
                        if opts.excluded_fd_categories.iter().any(|e| e == cat) {
                            continue;
                        }
                    }
                    f[(i, countries.require(country)?)] += *v;
                }
            }
        }
        let mut va = DVector::zeros(n);
        for ((c, s), v) in &self.value_added {
            va[act(c, s)?] = *v;
        }
        let x = if self.gross_output.is_empty() {
            DVector::from_fn(n, |i, _| {
                crate::math::sum(z.row(i).iter().copied()) + crate::math::sum(f.row(i).iter().copied())
            })
        } else {
            let mut x = DVector::zeros(n);
            for ((c, s), v) in &self.gross_output {
                x[act(c, s)?] = *v;
            }
            x
        };
        IoTable::from_parts(self.year, countries, sectors, z, f, va, x, opts)
    }
}
