//! Input-output tables in long and wide CSV.
//!
//! Long format, one cell per line:
//!
//! ```text
//! year,origin_country,origin_sector,dest_country,dest_sector_or_FD,value
//! 2014,AUT,C10,DEU,C10,12.5        intermediate flow
//! 2014,AUT,C10,DEU,FD,40.0         final demand of DEU
//! 2014,AUT,C10,DEU,FD:HH,40.0      final demand, category HH
//! 2014,VA,,AUT,C10,30.0            value added of AUT/C10
//! 2014,GO,,AUT,C10,80.0            gross output of AUT/C10 (optional)
//! ```
//!
//! Wide format, one row per origin activity plus `VA` and `GO` rows; column
//! headers are `CTRY|SECTOR`, `CTRY|FD` or `CTRY|FD:<category>`:
//!
//! ```text
//! year,row,AUT|C10,DEU|C10,AUT|FD,DEU|FD
//! 2014,AUT|C10,1,2,3,4
//! 2014,VA,5,6,,
//! 2014,GO,10,12,,
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use vxf_core::{Destination, IoOptions, IoTable, IoTableBuilder, SectorRegistry};

use crate::error::{CliError, CliResult};
use crate::io::read_to_string;

pub const LONG_HEADER: [&str; 6] = [
    "year",
    "origin_country",
    "origin_sector",
    "dest_country",
    "dest_sector_or_FD",
    "value",
];
const VALUE_ADDED: &str = "VA";
const GROSS_OUTPUT: &str = "GO";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum IotFormat {
    /// Detect from the header.
    #[default]
    Auto,
    #[value(name = "long-csv")]
    Long,
    #[value(name = "wide-csv")]
    Wide,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub format: IotFormat,
    pub year: Option<i32>,
    /// Fixed sector order; otherwise order of first appearance.
    pub sectors: Option<SectorRegistry>,
    pub io: IoOptions,
}

#[derive(Debug, Deserialize)]
struct LongRow {
    year: i32,
    origin_country: String,
    origin_sector: String,
    dest_country: String,
    #[serde(rename = "dest_sector_or_FD")]
    dest: String,
    value: f64,
}

fn final_category(dest: &str) -> Option<Option<String>> {
    if dest == "FD" {
        Some(None)
    } else {
        dest.strip_prefix("FD:").map(|c| Some(c.to_string()))
    }
}

/// Loads every year in the file (or only `opts.year`), keyed by year.
pub fn load_iot(path: &Path, opts: &LoadOptions) -> CliResult<BTreeMap<i32, IoTable>> {
    let text = read_to_string(path)?;
    let format = match opts.format {
        IotFormat::Auto => detect(&text).ok_or_else(|| {
            CliError::malformed(path, "unrecognized header; expected long-csv or wide-csv")
        })?,
        f => f,
    };
    let builders = match format {
        IotFormat::Long => parse_long(path, &text, opts)?,
        _ => parse_wide(path, &text, opts)?,
    };
    if builders.is_empty() {
        let msg = match opts.year {
            Some(y) => format!("no rows for year {y}"),
            None => "no data rows".to_string(),
        };
        return Err(CliError::new("empty_input", crate::error::exit::INPUT, msg).at(path));
    }
    builders
        .into_iter()
        .map(|(year, b)| {
            let b = match &opts.sectors {
                Some(reg) => b.with_sectors(reg.clone()),
                None => b,
            };
            let table = b.build(&opts.io).map_err(|e| CliError::from(e).at(path))?;
            Ok((year, table))
        })
        .collect()
}

fn detect(text: &str) -> Option<IotFormat> {
    let header = text.lines().next()?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols == LONG_HEADER {
        Some(IotFormat::Long)
    } else if cols.len() > 2 && cols[0] == "year" && cols[1] == "row" {
        Some(IotFormat::Wide)
    } else {
        None
    }
}

fn builder(map: &mut BTreeMap<i32, IoTableBuilder>, year: i32) -> &mut IoTableBuilder {
    map.entry(year).or_insert_with(|| IoTableBuilder::new(year))
}

fn parse_long(path: &Path, text: &str, opts: &LoadOptions) -> CliResult<BTreeMap<i32, IoTableBuilder>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != LONG_HEADER {
        return Err(CliError::malformed(path, format!("expected header {}", LONG_HEADER.join(","))));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.deserialize::<LongRow>() {
        let row = rec.map_err(|e| CliError::csv(path, e))?;
        if opts.year.is_some_and(|y| y != row.year) {
            continue;
        }
        let b = builder(&mut out, row.year);
        let res = match row.origin_country.as_str() {
            VALUE_ADDED => b.add_value_added(&row.dest_country, &row.dest, row.value),
            GROSS_OUTPUT => b.add_gross_output(&row.dest_country, &row.dest, row.value),
            _ => {
                let dest = match final_category(&row.dest) {
                    Some(category) => Destination::Final {
                        country: row.dest_country,
                        category,
                    },
                    None => Destination::Intermediate {
                        country: row.dest_country,
                        sector: row.dest,
                    },
                };
                b.add_flow(&row.origin_country, &row.origin_sector, dest, row.value)
            }
        };
        res.map_err(|e| CliError::from(e).at(path))?;
    }
    Ok(out)
}

enum WideColumn {
    Activity(String, String),
    Final(String, Option<String>),
}

fn split_label(path: &Path, label: &str) -> CliResult<(String, String)> {
    label
        .split_once('|')
        .map(|(c, s)| (c.to_string(), s.to_string()))
        .ok_or_else(|| CliError::malformed(path, format!("label `{label}` is not COUNTRY|SECTOR")))
}

fn parse_wide(path: &Path, text: &str, opts: &LoadOptions) -> CliResult<BTreeMap<i32, IoTableBuilder>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?.clone();
    let columns: Vec<WideColumn> = header
        .iter()
        .skip(2)
        .map(|h| {
            let (c, s) = split_label(path, h)?;
            Ok(match final_category(&s) {
                Some(cat) => WideColumn::Final(c, cat),
                None => WideColumn::Activity(c, s),
            })
        })
        .collect::<CliResult<_>>()?;

    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| {
            CliError::malformed(path, format!("line {line}: {msg}"))
                .with_details(serde_json::json!({ "path": path.display().to_string(), "line": line }))
        };
        if rec.len() != columns.len() + 2 {
            return Err(bad(format!("expected {} fields, found {}", columns.len() + 2, rec.len())));
        }
        let year: i32 = rec[0].parse().map_err(|_| bad(format!("invalid year `{}`", &rec[0])))?;
        if opts.year.is_some_and(|y| y != year) {
            continue;
        }
        let b = builder(&mut out, year);
        let row_label = &rec[1];
        for (k, col) in columns.iter().enumerate() {
            let cell = &rec[k + 2];
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| bad(format!("invalid number `{cell}`")))?;
            let res = match (row_label, col) {
                (VALUE_ADDED, WideColumn::Activity(c, s)) => b.add_value_added(c, s, v),
                (GROSS_OUTPUT, WideColumn::Activity(c, s)) => b.add_gross_output(c, s, v),
                (VALUE_ADDED | GROSS_OUTPUT, WideColumn::Final(..)) if v == 0.0 => Ok(()),
                (VALUE_ADDED | GROSS_OUTPUT, WideColumn::Final(..)) => {
                    return Err(bad(format!("{row_label} row has a value in a final-demand column")));
                }
                (_, col) => {
                    let (oc, os) = split_label(path, row_label)?;
                    let dest = match col {
                        WideColumn::Activity(c, s) => Destination::Intermediate {
                            country: c.clone(),
                            sector: s.clone(),
                        },
                        WideColumn::Final(c, cat) => Destination::Final {
                            country: c.clone(),
                            category: cat.clone(),
                        },
                    };
                    b.add_flow(&oc, &os, dest, v)
                }
            };
            res.map_err(|e| CliError::from(e).at(path))?;
        }
    }
    Ok(out)
}

/// Long CSV of one or more tables. Value-added and gross-output rows come
/// first, in registry order, so reading the file back reproduces the sector
/// order; flows equal to zero are omitted.
pub fn write_iot_long<'a>(tables: impl IntoIterator<Item = &'a IoTable>) -> String {
    let mut out = LONG_HEADER.join(",");
    out.push('\n');
    for t in tables {
        let n = t.n_activities();
        let year = t.year();
        let ns = t.sectors().len();
        let c_of = |i: usize| t.countries().code(t.country_of(i));
        let s_of = |i: usize| t.sectors().id(i % ns);
        for i in 0..n {
            let _ = writeln!(out, "{year},{VALUE_ADDED},,{},{},{}", c_of(i), s_of(i), t.value_added()[i]);
        }
        for i in 0..n {
            let _ = writeln!(out, "{year},{GROSS_OUTPUT},,{},{},{}", c_of(i), s_of(i), t.gross_output()[i]);
        }
        for i in 0..n {
            let (oc, os) = (c_of(i), s_of(i));
            for j in 0..n {
                let v = t.intermediate()[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{year},{oc},{os},{},{},{v}", c_of(j), s_of(j));
                }
            }
            for d in 0..t.countries().len() {
                let v = t.final_demand()[(i, d)];
                if v != 0.0 {
                    let _ = writeln!(out, "{year},{oc},{os},{},FD,{v}", t.countries().code(d));
                }
            }
        }
    }
    out
}

/// Wide CSV of one or more tables sharing registries.
pub fn write_iot_wide<'a>(tables: impl IntoIterator<Item = &'a IoTable>) -> String {
    let mut out = String::new();
    let mut header_written = false;
    for t in tables {
        let n = t.n_activities();
        let nc = t.countries().len();
        let label = |i: usize| {
            format!("{}|{}", t.countries().code(t.country_of(i)), t.sectors().id(i % t.sectors().len()))
        };
        if !header_written {
            out.push_str("year,row");
            for j in 0..n {
                let _ = write!(out, ",{}", label(j));
            }
            for d in 0..nc {
                let _ = write!(out, ",{}|FD", t.countries().code(d));
            }
            out.push('\n');
            header_written = true;
        }
        let year = t.year();
        for i in 0..n {
            let _ = write!(out, "{year},{}", label(i));
            for j in 0..n {
                let _ = write!(out, ",{}", t.intermediate()[(i, j)]);
            }
            for d in 0..nc {
                let _ = write!(out, ",{}", t.final_demand()[(i, d)]);
            }
            out.push('\n');
        }
        for (name, v) in [(VALUE_ADDED, t.value_added()), (GROSS_OUTPUT, t.gross_output())] {
            let _ = write!(out, "{year},{name}");
            for j in 0..n {
                let _ = write!(out, ",{}", v[j]);
            }
            for _ in 0..nc {
                out.push(',');
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Deserialize)]
struct SectorRow {
    sector: String,
    #[serde(default)]
    label: Option<String>,
}

/// Sector list with header `sector[,label]`, in the order to use.
pub fn load_sectors(path: &Path) -> CliResult<SectorRegistry> {
    let rows: Vec<SectorRow> = crate::io::read_records(path)?;
    let labels = rows
        .iter()
        .map(|r| r.label.clone().filter(|l| !l.is_empty()).unwrap_or_else(|| r.sector.clone()))
        .collect();
    SectorRegistry::with_labels(rows.into_iter().map(|r| r.sector).collect(), labels)
        .map_err(|e| CliError::from(e).at(path))
}
