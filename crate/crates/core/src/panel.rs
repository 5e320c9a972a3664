//! Country × period panel for the growth regressions.
//!
//! Each row covers one five-year window `[t-4, t]` and holds log-differences
//! of GDP per capita, population, capital and human capital, the window-start
//! levels, and the change and start level of one complexity metric.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::math::ln;
use crate::series::{AuxiliarySeries, Variable};

/// The three non-overlapping windows.
pub const WINDOWS: [(i32, i32); 3] = [(2000, 2004), (2005, 2009), (2010, 2014)];

/// Dropped from the panel by default: not covered by every metric.
pub const DEFAULT_EXCLUDED: [&str; 3] = ["LUX", "MLT", "TWN"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Vxf,
    Ef,
    Eci,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Vxf => "vxf",
            Metric::Ef => "ef",
            Metric::Eci => "eci",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Vxf => "VXF",
            Metric::Ef => "EF",
            Metric::Eci => "ECI",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Metric::Vxf, Metric::Ef, Metric::Eci]
            .into_iter()
            .find(|m| m.name() == s)
    }

    /// Fitness metrics enter in logs; ECI can be negative and enters in levels.
    pub fn default_transform(self) -> Transform {
        match self {
            Metric::Vxf | Metric::Ef => Transform::Log,
            Metric::Eci => Transform::Level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Log,
    Level,
}

impl Transform {
    fn apply(self, v: f64) -> Option<f64> {
        match self {
            Transform::Log if v > 0.0 => Some(ln(v)),
            Transform::Log => None,
            Transform::Level => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelOptions {
    pub metric_transform: Transform,
    pub human_capital_transform: Transform,
    pub excluded: Vec<String>,
    /// Restrict to these countries; `None` uses every country with data.
    pub countries: Option<Vec<String>>,
}

impl PanelOptions {
    pub fn for_metric(metric: Metric) -> Self {
        Self {
            metric_transform: metric.default_transform(),
            human_capital_transform: Transform::Log,
            excluded: DEFAULT_EXCLUDED.iter().map(|s| s.to_string()).collect(),
            countries: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub country: String,
    /// Index into [`WINDOWS`].
    pub period: usize,
    pub dy: f64,
    pub y_lag: f64,
    pub n: f64,
    pub dk: f64,
    pub dh: f64,
    pub h_lag: f64,
    pub dc: f64,
    pub c_lag: f64,
}

/// An endpoint observation that kept a row out of the panel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingObservation {
    pub country: String,
    pub year: i32,
    pub variable: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    pub metric: Metric,
    pub metric_transform: Transform,
    pub human_capital_transform: Transform,
    pub rows: Vec<PanelRow>,
    pub rejected: Vec<MissingObservation>,
}

impl PanelDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn countries(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.country.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Complete when every country that has rows has one per window.
    pub fn is_balanced(&self) -> bool {
        let countries = self.countries();
        self.rows.len() == countries.len() * WINDOWS.len()
    }
}

/// Complexity scores keyed by (country, year).
pub type ScoreSeries = BTreeMap<(String, i32), f64>;

pub fn build_panel(
    aux: &AuxiliarySeries,
    scores: &ScoreSeries,
    metric: Metric,
    opts: &PanelOptions,
) -> PanelDataset {
    let countries: Vec<String> = match &opts.countries {
        Some(list) => {
            let mut l = list.clone();
            l.sort();
            l.dedup();
            l
        }
        None => {
            let mut set: BTreeSet<String> = aux.countries().into_iter().collect();
            set.extend(scores.keys().map(|(c, _)| c.clone()));
            set.into_iter().collect()
        }
    };

    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for country in countries.iter().filter(|c| !opts.excluded.contains(c)) {
        for (period, &(t0, t1)) in WINDOWS.iter().enumerate() {
            let mut missing = Vec::new();
            let mut fetch = |year: i32, name: &str, value: Option<f64>, tr: Transform| -> f64 {
                match value.and_then(|v| tr.apply(v)) {
                    Some(v) => v,
                    None => {
                        let label = if value.is_some() {
                            alloc::format!("{name} (non-positive)")
                        } else {
                            name.to_string()
                        };
                        missing.push(MissingObservation {
                            country: country.clone(),
                            year,
                            variable: label,
                        });
                        f64::NAN
                    }
                }
            };
            let get = |y: i32, v: Variable| aux.get(country, y, v);
            let score = |y: i32| scores.get(&(country.clone(), y)).copied();
            let hc = opts.human_capital_transform;
            let mt = opts.metric_transform;

            let y0 = fetch(t0, "gdp_pc", get(t0, Variable::GdpPerCapita), Transform::Log);
            let y1 = fetch(t1, "gdp_pc", get(t1, Variable::GdpPerCapita), Transform::Log);
            let p0 = fetch(t0, "population", get(t0, Variable::Population), Transform::Log);
            let p1 = fetch(t1, "population", get(t1, Variable::Population), Transform::Log);
            let k0 = fetch(t0, "capital", get(t0, Variable::Capital), Transform::Log);
            let k1 = fetch(t1, "capital", get(t1, Variable::Capital), Transform::Log);
            let h0 = fetch(t0, "human_capital", get(t0, Variable::HumanCapital), hc);
            let h1 = fetch(t1, "human_capital", get(t1, Variable::HumanCapital), hc);
            let c0 = fetch(t0, metric.name(), score(t0), mt);
            let c1 = fetch(t1, metric.name(), score(t1), mt);

            if missing.is_empty() {
                rows.push(PanelRow {
                    country: country.clone(),
                    period,
                    dy: y1 - y0,
                    y_lag: y0,
                    n: p1 - p0,
                    dk: k1 - k0,
                    dh: h1 - h0,
                    h_lag: h0,
                    dc: c1 - c0,
                    c_lag: c0,
                });
            } else {
                rejected.extend(missing);
            }
        }
    }
    rejected.sort();
    rejected.dedup();
    PanelDataset {
        metric,
        metric_transform: opts.metric_transform,
        human_capital_transform: opts.human_capital_transform,
        rows,
        rejected,
    }
}

/// Scores of one metric taken from the external series of an auxiliary file.
pub fn external_scores(aux: &AuxiliarySeries, metric: Metric) -> Option<ScoreSeries> {
    match metric {
        Metric::Eci => Some(aux.series(Variable::Eci)),
        Metric::Ef => Some(aux.series(Variable::Ef)),
        Metric::Vxf => None,
    }
}

/// Per-country growth of log GDP per capita and of the metric between two
/// years, for countries with all four observations.
pub fn growth_pairs(
    aux: &AuxiliarySeries,
    scores: &ScoreSeries,
    transform: Transform,
    start: i32,
    end: i32,
    excluded: &[String],
) -> Vec<(String, f64, f64)> {
    let mut countries: BTreeSet<String> = aux.countries().into_iter().collect();
    countries.extend(scores.keys().map(|(c, _)| c.clone()));
    countries
        .into_iter()
        .filter(|c| !excluded.contains(c))
        .filter_map(|c| {
            let g0 = aux.get(&c, start, Variable::GdpPerCapita)?;
            let g1 = aux.get(&c, end, Variable::GdpPerCapita)?;
            let s0 = transform.apply(*scores.get(&(c.clone(), start))?)?;
            let s1 = transform.apply(*scores.get(&(c.clone(), end))?)?;
            Some((c, ln(g1) - ln(g0), s1 - s0))
        })
        .collect()
}
