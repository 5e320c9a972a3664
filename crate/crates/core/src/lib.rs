//! Economic complexity from value-added exports.
//!
//! The crate is `no_std` (with `alloc`) and carries the numerical pipeline:
//!
//! * [`iot`]: validated inter-country input-output tables,
//! * [`vax`]: Leontief inverse and value-added exports by country and sector,
//! * [`adjacency`]: RCA, binary and share-weighted country × activity matrices,
//! * [`fitness`]: the fitness-complexity fixed point (EF on binary input,
//!   VXF on the weighted matrix),
//! * [`eci`]: Economic Complexity Index by reflections or eigenvector,
//! * [`rank`]: deterministic rankings,
//! * [`series`], [`panel`], [`regression`]: macro series, the three-window
//!   growth panel and two-way fixed-effects regressions with robust errors.
//!
//! File formats and the command-line front end live in the `vxf` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod adjacency;
pub mod eci;
pub mod error;
pub mod fitness;
pub mod iot;
mod math;
pub mod panel;
pub mod rank;
pub mod registry;
pub mod regression;
pub mod series;
pub mod vax;

pub use adjacency::{binarize, rca, weighted_adjacency, BinaryAdjacency, ExportMatrix, WeightedAdjacency};
pub use eci::{eci_eigenvector, eci_reflections, reflections, EciMethod, EciResult, ReflectionScheme, Reflections};
pub use error::{Error, Result};
pub use fitness::{fitness, FitnessConfig, FitnessResult, FitnessState};
pub use iot::{Destination, IoOptions, IoTable, IoTableBuilder};
pub use panel::{build_panel, Metric, PanelDataset, PanelOptions, ScoreSeries, Transform};
pub use rank::{rank, RankEntry, Ranking};
pub use registry::{CountryRegistry, SectorRegistry};
pub use regression::{
    fit_fd_dynamic, fit_within_fe, unconditional_correlation, CovarianceType, Estimator, FitOptions,
    ModelSpec, RegressionResult,
};
pub use series::{AuxiliarySeries, Variable};
pub use vax::{compute_vax, vax_accounting_report, LeontiefSystem, VaxMatrix, VaxReport};

pub use nalgebra::{DMatrix, DVector};
