//! Argument parsing and subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use vxf_core::adjacency::{binarize, rca, weighted_adjacency, ExportMatrix, DEFAULT_RCA_THRESHOLD};
use vxf_core::eci::{eci_eigenvector, is_column_stochastic, reflections, ReflectionScheme, DEFAULT_REFLECTION_ORDER};
use vxf_core::fitness::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use vxf_core::panel::{external_scores, growth_pairs, DEFAULT_EXCLUDED};
use vxf_core::regression::{fit_panel, unconditional_correlation, Estimator, FitOptions};
use vxf_core::vax::{compute_vax, vax_accounting_report, LeontiefSystem};
use vxf_core::{
    build_panel, fitness, rank, CovarianceType, DMatrix, Error as CoreError, IoOptions, IoTable, Metric, ModelSpec,
    PanelOptions, RegressionResult, ScoreSeries, Transform,
};

use crate::error::{exit, CliError, CliResult};
use crate::io::iot::{load_iot, load_sectors, write_iot_long, write_iot_wide, IotFormat, LoadOptions};
use crate::io::records::{
    matrix_records, read_matrix, read_scores, read_vax, vax_records, vax_report_records, LabeledMatrix, ScoreRecord,
};
use crate::io::series::{load_auxiliary, load_countries};
use crate::io::{records_to_bytes, write_bytes, write_records, OutputFormat};
use crate::manifest::{self, RunManifest};
use crate::report::{coefficient_records, render_table, ScatterFitRecord, ScatterRecord};

#[derive(Debug, Parser)]
#[command(name = "vxf", version, about = "Value-added export fitness, economic fitness and ECI from input-output tables")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Convergence tolerance of the fitness iteration (max-norm change).
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Iteration budget of the fitness iteration.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// RCA threshold for the binary adjacency matrix (inclusive).
    #[arg(long, global = true, default_value_t = DEFAULT_RCA_THRESHOLD)]
    pub rca_threshold: f64,
    /// Format of tabular output files.
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// Write a run manifest to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an input-output table and/or auxiliary series.
    Ingest(IngestArgs),
    /// Value-added exports by country and sector.
    Vax(VaxArgs),
    /// RCA, binary or weighted adjacency matrices.
    Adjacency(AdjacencyArgs),
    /// VXF, EF or ECI scores with convergence metadata and ranks.
    Metrics(MetricsArgs),
    /// Rank countries from a scores file.
    Rank(RankArgs),
    /// Fixed-effects growth regressions and growth scatter.
    Regress(RegressArgs),
    /// Inspect, verify or replay a run manifest.
    Manifest(ManifestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Input-output table (long-csv or wide-csv).
    #[arg(long)]
    pub iot: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub iot_format: IotFormat,
    /// Only this year.
    #[arg(long)]
    pub year: Option<i32>,
    /// Sector list (`sector[,label]`) fixing sector order.
    #[arg(long)]
    pub sectors: Option<PathBuf>,
    /// Final-demand categories to leave out (as tagged `FD:<category>`).
    #[arg(long = "exclude-fd", value_delimiter = ',')]
    pub exclude_fd: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub iot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub iot_format: IotFormat,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub sectors: Option<PathBuf>,
    #[arg(long = "exclude-fd", value_delimiter = ',')]
    pub exclude_fd: Vec<String>,
    /// Auxiliary series (`country,year,variable,value`).
    #[arg(long)]
    pub aux: Option<PathBuf>,
    /// Country list (`country`) to check auxiliary rows against; defaults
    /// to the table's countries when a table is given.
    #[arg(long)]
    pub countries: Option<PathBuf>,
    /// Write the validated table back out.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "long-csv")]
    pub out_format: IotFormat,
}

#[derive(Debug, Clone, Args)]
pub struct VaxArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// VAX output (`year,country,sector,vax`).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-country accounting report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdjacencyKind {
    Rca,
    Binary,
    Weighted,
}

#[derive(Debug, Clone, Args)]
pub struct AdjacencyArgs {
    #[arg(long, value_enum)]
    pub kind: AdjacencyKind,
    /// Gross exports (`country,activity,value`) for rca and binary.
    #[arg(long, required_unless_present = "vax")]
    pub exports: Option<PathBuf>,
    /// Value-added exports (`year,country,sector,vax`) for weighted.
    #[arg(long, conflicts_with = "exports")]
    pub vax: Option<PathBuf>,
    #[arg(long)]
    pub year: Option<i32>,
    /// Output (`country,activity,value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Vxf,
    Ef,
    Eci,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Vxf => Metric::Vxf,
            MetricArg::Ef => Metric::Ef,
            MetricArg::Eci => Metric::Eci,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum InputKind {
    /// VAX file when it has a `vax` column, otherwise a matrix.
    #[default]
    Auto,
    /// Value-added exports (`year,country,sector,vax`).
    Vax,
    /// Country × activity matrix used as is (`country,activity,value`).
    Matrix,
    /// Gross exports; RCA and the threshold give the binary matrix.
    Exports,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EciMethodArg {
    #[default]
    Reflections,
    Eigenvector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SchemeArg {
    #[default]
    Alternating,
    Simultaneous,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub input_kind: InputKind,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, value_enum, default_value_t)]
    pub eci_method: EciMethodArg,
    /// Reflection order for ECI.
    #[arg(long, default_value_t = DEFAULT_REFLECTION_ORDER)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t)]
    pub scheme: SchemeArg,
    /// Scores output (`country,metric,year,value,rank,converged,iterations`).
    #[arg(long)]
    pub out: PathBuf,
    /// Activity complexity output for fitness metrics.
    #[arg(long)]
    pub complexity_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecArg {
    FdDynamic,
    WithinFe,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CovarianceArg {
    Hc0,
    #[default]
    Hc1,
    Hc2,
    Hc3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EstimatorArg {
    #[default]
    Dummy,
    Within,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum TransformArg {
    #[default]
    Log,
    Level,
}

impl From<TransformArg> for Transform {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Log => Transform::Log,
            TransformArg::Level => Transform::Level,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub aux: PathBuf,
    /// Scores file; EF and ECI fall back to the `ef` / `eci` series of the
    /// auxiliary file.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "vxf")]
    pub metric: Vec<MetricArg>,
    #[arg(long, value_enum, default_value = "both")]
    pub spec: SpecArg,
    #[arg(long, value_enum, default_value_t)]
    pub covariance: CovarianceArg,
    #[arg(long, value_enum, default_value_t)]
    pub estimator: EstimatorArg,
    /// Human capital in logs or levels.
    #[arg(long, value_enum, default_value_t)]
    pub human_capital: TransformArg,
    /// Countries left out of the panel.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EXCLUDED.map(String::from))]
    pub exclude: Vec<String>,
    /// Keep going when some rows are incomplete.
    #[arg(long)]
    pub allow_incomplete: bool,
    /// Coefficient table (CSV or JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Text rendering of the coefficient table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Growth scatter points.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
    /// Simple-regression fit of each scatter.
    #[arg(long)]
    pub scatter_fit: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub scatter_start: i32,
    #[arg(long, default_value_t = 2014)]
    pub scatter_end: i32,
}

#[derive(Debug, Clone, Args)]
pub struct ManifestArgs {
    #[command(subcommand)]
    pub action: ManifestAction,
}

#[derive(Debug, Clone, Subcommand)]
pub enum ManifestAction {
    /// Print a manifest.
    Show { path: PathBuf },
    /// Check recorded digests against the files on disk.
    Verify { path: PathBuf },
    /// Re-run the recorded command and compare output digests.
    Replay { path: PathBuf },
}

/// What a command did.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub params: Map<String, Value>,
    /// Set when outputs were written but the run still failed (e.g. no
    /// convergence).
    pub failure: Option<CliError>,
    /// Commands that manage manifests do not write one themselves.
    pub no_manifest: bool,
}

impl Outcome {
    fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.stdout.push_str(s.as_ref());
        self.stdout.push('\n');
    }
}

/// Result of one invocation.
#[derive(Debug)]
pub struct RunReport {
    pub exit: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run(argv: &[String]) -> RunReport {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    RunReport { exit: exit::OK, stdout: e.to_string(), stderr: String::new() }
                }
                _ => failure_report(String::new(), &CliError::usage(e.to_string().trim_end())),
            };
        }
    };
    let recorded = strip_manifest_args(&argv[1..]);
    let command = command_name(&cli.command);
    let mut result = dispatch(&cli);
    if let (Ok(outcome), Some(path)) = (&mut result, &cli.global.manifest) {
        if !outcome.no_manifest {
            if let Err(e) = write_manifest(path, command, recorded, &cli.global, outcome) {
                result = Err(e);
            }
        }
    }
    match result {
        Ok(outcome) => match &outcome.failure {
            Some(err) => failure_report(outcome.stdout.clone(), err),
            None => RunReport { exit: exit::OK, stdout: outcome.stdout, stderr: String::new() },
        },
        Err(err) => failure_report(String::new(), &err),
    }
}

fn failure_report(stdout: String, err: &CliError) -> RunReport {
    let mut stderr = serde_json::to_string(&err.to_json()).expect("serializable error");
    stderr.push('\n');
    RunReport { exit: err.exit, stdout, stderr }
}

fn strip_manifest_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Vax(_) => "vax",
        Command::Adjacency(_) => "adjacency",
        Command::Metrics(_) => "metrics",
        Command::Rank(_) => "rank",
        Command::Regress(_) => "regress",
        Command::Manifest(_) => "manifest",
    }
}

fn write_manifest(path: &Path, command: &str, args: Vec<String>, g: &GlobalArgs, outcome: &Outcome) -> CliResult<()> {
    let mut params = outcome.params.clone();
    params.insert("tol".into(), json!(g.tol));
    params.insert("max_iter".into(), json!(g.max_iter));
    params.insert("rca_threshold".into(), json!(g.rca_threshold));
    params.insert("format".into(), json!(format_name(g.format)));
    let m = RunManifest {
        tool: manifest::TOOL.into(),
        version: manifest::VERSION.into(),
        command: command.into(),
        args,
        params,
        inputs: manifest::digests(&outcome.inputs)?,
        outputs: manifest::digests(&outcome.outputs)?,
        exit: outcome.failure.as_ref().map_or(exit::OK, |f| f.exit),
    };
    write_bytes(path, &m.to_bytes())
}

fn format_name(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        return Err(CliError::usage(format!("--tol must be positive, got {}", g.tol)));
    }
    if g.max_iter == 0 {
        return Err(CliError::usage("--max-iter must be at least 1"));
    }
    if !(g.rca_threshold > 0.0) {
        return Err(CliError::usage(format!("--rca-threshold must be positive, got {}", g.rca_threshold)));
    }
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(g, a),
        Command::Vax(a) => cmd_vax(g, a),
        Command::Adjacency(a) => cmd_adjacency(g, a),
        Command::Metrics(a) => cmd_metrics(g, a),
        Command::Rank(a) => cmd_rank(g, a),
        Command::Regress(a) => cmd_regress(g, a),
        Command::Manifest(a) => cmd_manifest(a),
    }
}

fn load_tables(
    iot: &Path,
    format: IotFormat,
    year: Option<i32>,
    sectors: Option<&PathBuf>,
    exclude_fd: &[String],
    out: &mut Outcome,
) -> CliResult<BTreeMap<i32, IoTable>> {
    let sectors = match sectors {
        Some(p) => {
            out.inputs.push(p.clone());
            Some(load_sectors(p)?)
        }
        None => None,
    };
    out.inputs.insert(0, iot.to_path_buf());
    out.param("exclude_fd", exclude_fd.to_vec());
    if let Some(y) = year {
        out.param("year", y);
    }
    let opts = LoadOptions {
        format,
        year,
        sectors,
        io: IoOptions {
            excluded_fd_categories: exclude_fd.to_vec(),
            ..IoOptions::default()
        },
    };
    load_iot(iot, &opts)
}

fn describe_table(out: &mut Outcome, t: &IoTable) {
    let r = t.report();
    out.line(format!(
        "{}: {} countries x {} sectors = {} activities; {} small negatives clamped; {} negative final-demand cells flagged; worst row residual {:e}, worst column residual {:e}",
        t.year(),
        t.countries().len(),
        t.sectors().len(),
        t.n_activities(),
        r.clamped_negatives,
        r.flagged_final_demand.len(),
        r.worst_row_residual,
        r.worst_column_residual,
    ));
}

fn cmd_ingest(_g: &GlobalArgs, a: &IngestArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    if a.iot.is_none() && a.aux.is_none() {
        return Err(CliError::usage("nothing to ingest: give --iot and/or --aux"));
    }
    let mut registry = None;
    if let Some(iot) = &a.iot {
        let tables = load_tables(iot, a.iot_format, a.year, a.sectors.as_ref(), &a.exclude_fd, &mut out)?;
        for t in tables.values() {
            describe_table(&mut out, t);
        }
        registry = tables.values().next().map(|t| t.countries().clone());
        if let Some(path) = &a.out {
            let text = match a.out_format {
                IotFormat::Wide => write_iot_wide(tables.values()),
                _ => write_iot_long(tables.values()),
            };
            write_bytes(path, text.as_bytes())?;
            out.outputs.push(path.clone());
        }
    }
    if let Some(p) = &a.countries {
        out.inputs.push(p.clone());
        registry = Some(load_countries(p)?);
    }
    if let Some(aux_path) = &a.aux {
        out.inputs.push(aux_path.clone());
        let aux = load_auxiliary(aux_path, registry.as_ref())?;
        out.line(format!(
            "{}: {} observations for {} countries",
            aux_path.display(),
            aux.len(),
            aux.countries().len()
        ));
        for w in aux.warnings() {
            out.line(format!(
                "warning: duplicate {}/{}/{}: {} replaced by {}",
                w.country,
                w.year,
                w.variable.name(),
                w.previous,
                w.replacement
            ));
        }
    }
    Ok(out)
}

fn cmd_vax(g: &GlobalArgs, a: &VaxArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let t = &a.table;
    let tables = load_tables(&t.iot, t.iot_format, t.year, t.sectors.as_ref(), &t.exclude_fd, &mut out)?;
    let mut records = Vec::new();
    let mut report_records = Vec::new();
    for table in tables.values() {
        let sys = LeontiefSystem::build(table)?;
        let vax = compute_vax(&sys, table)?;
        let report = vax_accounting_report(&vax, table)?;
        out.line(format!(
            "{}: world value added {}, value-added exports {} ({:.4} of value added); clamped {} cells, mass {}",
            report.year,
            report.world_value_added,
            report.world_vax,
            if report.world_value_added > 0.0 { report.world_vax / report.world_value_added } else { 0.0 },
            vax.clamped_count,
            report.clamped_mass
        ));
        for c in report.countries.iter().filter(|c| c.exceeds_gross_exports) {
            out.line(format!(
                "warning: {} {}: value-added exports {} exceed gross exports {}",
                report.year, c.country, c.vax, c.gross_exports
            ));
        }
        records.extend(vax_records(&vax));
        report_records.extend(vax_report_records(&report));
    }
    write_records(&a.out, &records, g.format)?;
    out.outputs.push(a.out.clone());
    if let Some(p) = &a.report {
        write_records(p, &report_records, g.format)?;
        out.outputs.push(p.clone());
    }
    Ok(out)
}

fn exports_matrix(m: &LabeledMatrix, path: &Path) -> CliResult<ExportMatrix> {
    ExportMatrix::new(m.countries.clone(), m.activities.clone(), m.values.clone()).map_err(|e| CliError::from(e).at(path))
}

fn single_vax_year(path: &Path, year: Option<i32>) -> CliResult<vxf_core::VaxMatrix> {
    let mut all = read_vax(path, year)?;
    if all.len() > 1 {
        let years: Vec<String> = all.keys().map(i32::to_string).collect();
        return Err(CliError::usage(format!(
            "{} holds several years ({}); select one with --year",
            path.display(),
            years.join(", ")
        )));
    }
    let (_, v) = all.pop_first().expect("non-empty");
    Ok(v)
}

fn cmd_adjacency(g: &GlobalArgs, a: &AdjacencyArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    out.param("kind", format!("{:?}", a.kind).to_lowercase());
    let (countries, activities, values) = match a.kind {
        AdjacencyKind::Rca | AdjacencyKind::Binary => {
            let path = a
                .exports
                .as_ref()
                .ok_or_else(|| CliError::usage("rca and binary adjacency need --exports"))?;
            out.inputs.push(path.clone());
            let m = read_matrix(path, a.year)?;
            let r = rca(&exports_matrix(&m, path)?)?;
            let values = if a.kind == AdjacencyKind::Binary {
                binarize(&r, g.rca_threshold)?.into_inner()
            } else {
                r
            };
            (m.countries, m.activities, values)
        }
        AdjacencyKind::Weighted => {
            let path = a
                .vax
                .as_ref()
                .ok_or_else(|| CliError::usage("weighted adjacency needs --vax"))?;
            out.inputs.push(path.clone());
            let vax = single_vax_year(path, a.year)?;
            let w = weighted_adjacency(&vax)?;
            if !w.dropped.is_empty() {
                out.line(format!("dropped sectors with zero value-added exports: {}", w.dropped.join(", ")));
            }
            (w.countries, w.sectors, w.w)
        }
    };
    out.line(format!("{} countries x {} activities", countries.len(), activities.len()));
    write_records(&a.out, &matrix_records(&countries, &activities, &values), g.format)?;
    out.outputs.push(a.out.clone());
    Ok(out)
}

fn is_binary(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| *v == 0.0 || *v == 1.0)
}

/// One year's scores before ranking.
struct YearScores {
    year: Option<i32>,
    countries: Vec<String>,
    values: Vec<f64>,
    converged: bool,
    iterations: Option<usize>,
    activities: Option<(Vec<String>, Vec<f64>)>,
}

fn sniff_vax(path: &Path) -> CliResult<bool> {
    let text = crate::io::read_to_string(path)?;
    let head = text.lines().next().unwrap_or("");
    Ok(head.split(',').any(|c| c.trim() == "vax") || head.contains("\"vax\"") || text.contains("\"vax\":"))
}

fn cmd_metrics(g: &GlobalArgs, a: &MetricsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let metric: Metric = a.metric.into();
    out.inputs.push(a.input.clone());
    out.param("metric", metric.name());
    let kind = match a.input_kind {
        InputKind::Auto if sniff_vax(&a.input)? => InputKind::Vax,
        InputKind::Auto => InputKind::Matrix,
        k => k,
    };
    out.param("input_kind", format!("{kind:?}").to_lowercase());

    // (year, countries, activities, matrix) per year.
    let mut inputs: Vec<(Option<i32>, LabeledMatrix)> = Vec::new();
    match kind {
        InputKind::Vax => {
            if metric != Metric::Vxf {
                return Err(CliError::usage(format!(
                    "{} needs a binary adjacency or an exports matrix, not value-added exports",
                    metric.label()
                )));
            }
            for (year, vax) in read_vax(&a.input, a.year)? {
                let w = weighted_adjacency(&vax)?;
                if !w.dropped.is_empty() {
                    out.line(format!("{year}: dropped sectors with zero value-added exports: {}", w.dropped.join(", ")));
                }
                inputs.push((
                    Some(year),
                    LabeledMatrix { year: Some(year), countries: w.countries, activities: w.sectors, values: w.w },
                ));
            }
        }
        InputKind::Matrix | InputKind::Exports => {
            let mut m = read_matrix(&a.input, a.year)?;
            if m.year.is_none() {
                m.year = a.year;
            }
            if kind == InputKind::Exports {
                let r = rca(&exports_matrix(&m, &a.input)?)?;
                m.values = binarize(&r, g.rca_threshold)?.into_inner();
            } else if metric == Metric::Vxf {
                // Treated as value-added exports; shares are scale-free.
                let vax = vxf_core::VaxMatrix::new(m.year.unwrap_or(0), m.countries.clone(), m.activities.clone(), m.values.clone())
                    .map_err(|e| CliError::from(e).at(&a.input))?;
                let w = weighted_adjacency(&vax)?;
                if !w.dropped.is_empty() {
                    out.line(format!("dropped activities with zero value-added exports: {}", w.dropped.join(", ")));
                }
                m.activities = w.sectors;
                m.values = w.w;
            }
            inputs.push((m.year, m));
        }
        InputKind::Auto => unreachable!(),
    }

    let mut years = Vec::new();
    for (year, m) in &inputs {
        let countries: Vec<String> = m.countries.codes().to_vec();
        let label = year.map_or_else(|| "matrix".to_string(), |y| y.to_string());
        let scores = match metric {
            Metric::Vxf | Metric::Ef => {
                if metric == Metric::Ef && !is_binary(&m.values) {
                    return Err(not_binary(&a.input, "EF"));
                }
                let res = fitness(&m.values, g.tol, g.max_iter)?;
                out.line(format!(
                    "{label}: {} {} after {} iterations (final change {:e})",
                    metric.label(),
                    if res.converged { "converged" } else { "did NOT converge" },
                    res.iterations,
                    res.final_delta
                ));
                if !res.floored.is_empty() {
                    let names: Vec<&str> = res.floored.iter().map(|&c| countries[c].as_str()).collect();
                    out.line(format!("{label}: fitness ~ 0 (floored) for {}", names.join(", ")));
                }
                YearScores {
                    year: *year,
                    countries,
                    values: res.fitness,
                    converged: res.converged,
                    iterations: Some(res.iterations),
                    activities: Some((m.activities.ids().to_vec(), res.industry_complexity)),
                }
            }
            Metric::Eci => {
                let binary = is_binary(&m.values);
                let res = match a.eci_method {
                    EciMethodArg::Eigenvector if !binary => return Err(not_binary(&a.input, "ECI")),
                    EciMethodArg::Eigenvector => eci_eigenvector(&m.values)?,
                    EciMethodArg::Reflections => {
                        let scheme = match a.scheme {
                            SchemeArg::Alternating => ReflectionScheme::Alternating,
                            SchemeArg::Simultaneous => ReflectionScheme::Simultaneous,
                        };
                        if !binary && !is_column_stochastic(&m.values, 1e-9) {
                            return Err(not_binary(&a.input, "ECI"));
                        }
                        let seq = reflections(&m.values, a.order, scheme)?;
                        match seq.eci(a.order) {
                            Ok(r) => r,
                            Err(CoreError::Degenerate(reason)) if !binary => {
                                let spread = seq.products[1..]
                                    .iter()
                                    .flatten()
                                    .fold(0.0_f64, |acc, v| acc.max((v - 1.0).abs()));
                                return Err(CliError::new(
                                    "eci_degenerate_weighted",
                                    exit::DEGENERATE,
                                    format!(
                                        "ECI is undefined on a column-stochastic matrix: product scores k_p,N equal 1 for every N >= 1 (max deviation {spread:.1e}), so country scores carry no variation"
                                    ),
                                )
                                .with_details(json!({ "order": a.order, "max_abs_kp_minus_1": spread, "reason": reason }))
                                .at(&a.input));
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                };
                out.line(format!("{label}: ECI by {}", res.method.name()));
                YearScores {
                    year: *year,
                    countries,
                    values: res.eci,
                    converged: true,
                    iterations: res.order,
                    activities: None,
                }
            }
        };
        years.push(scores);
    }

    let mut records = Vec::new();
    let mut activity_records = Vec::new();
    let mut unconverged = Vec::new();
    for ys in &years {
        let pairs: Vec<(&str, f64)> = ys.countries.iter().map(String::as_str).zip(ys.values.iter().copied()).collect();
        let ranking = rank(&pairs)?;
        for e in ranking {
            records.push(ScoreRecord {
                country: e.country,
                metric: metric.name().into(),
                year: ys.year,
                value: e.score,
                rank: e.rank,
                converged: ys.converged,
                iterations: ys.iterations,
            });
        }
        if !ys.converged {
            unconverged.push(ys.year);
        }
        if let Some((ids, q)) = &ys.activities {
            for (id, v) in ids.iter().zip(q) {
                activity_records.push(crate::io::records::ComplexityRecord {
                    activity: id.clone(),
                    metric: metric.name().into(),
                    year: ys.year,
                    value: *v,
                    converged: ys.converged,
                    iterations: ys.iterations,
                });
            }
        }
    }
    write_records(&a.out, &records, g.format)?;
    out.outputs.push(a.out.clone());
    if let Some(p) = &a.complexity_out {
        write_records(p, &activity_records, g.format)?;
        out.outputs.push(p.clone());
    }
    if metric == Metric::Eci {
        out.param("eci_method", format!("{:?}", a.eci_method).to_lowercase());
        out.param("order", a.order);
        out.param("scheme", format!("{:?}", a.scheme).to_lowercase());
    }
    if !unconverged.is_empty() {
        out.failure = Some(
            CliError::new(
                "not_converged",
                exit::NOT_CONVERGED,
                format!(
                    "{} did not converge within {} iterations (tol {}); partial scores written with converged=false",
                    metric.label(),
                    g.max_iter,
                    g.tol
                ),
            )
            .with_details(json!({ "years": unconverged, "max_iter": g.max_iter, "tol": g.tol, "output": a.out.display().to_string() })),
        );
    }
    Ok(out)
}

fn not_binary(path: &Path, what: &str) -> CliError {
    CliError::new(
        "not_binary",
        exit::VALIDATION,
        format!("{what} needs a 0/1 adjacency matrix; pass --input-kind exports to build one from gross exports"),
    )
    .at(path)
}

/// (country, value) pairs of one metric and year.
type ScoreGroup = Vec<(String, f64)>;

fn cmd_rank(g: &GlobalArgs, a: &RankArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    out.inputs.push(a.scores.clone());
    let records = read_scores(&a.scores)?;
    let mut groups: BTreeMap<(String, Option<i32>), ScoreGroup> = BTreeMap::new();
    for r in records {
        if a.metric.is_some_and(|m| Metric::from(m).name() != r.metric) || a.year.is_some_and(|y| Some(y) != r.year) {
            continue;
        }
        groups.entry((r.metric, r.year)).or_default().push((r.country, r.value));
    }
    if groups.is_empty() {
        return Err(CliError::new("empty_input", exit::INPUT, "no scores match the selection").at(&a.scores));
    }
    let mut rows = Vec::new();
    for ((metric, year), scores) in groups {
        let ranking = rank(&scores)?;
        let label = year.map_or_else(|| "-".into(), |y| y.to_string());
        out.line(format!("{} {label}", metric.to_uppercase()));
        for e in ranking.iter().take(a.top) {
            out.line(format!("{:>4}  {}  {}", e.rank, e.country, e.score));
        }
        rows.extend(ranking.into_iter().map(|e| crate::io::records::RankRecord {
            metric: metric.clone(),
            year,
            rank: e.rank,
            country: e.country,
            value: e.score,
        }));
    }
    out.param("top", a.top);
    if let Some(p) = &a.out {
        write_records(p, &rows, g.format)?;
        out.outputs.push(p.clone());
    }
    Ok(out)
}

fn scores_for(metric: Metric, records: &[ScoreRecord]) -> ScoreSeries {
    records
        .iter()
        .filter(|r| r.metric == metric.name())
        .filter_map(|r| r.year.map(|y| ((r.country.clone(), y), r.value)))
        .collect()
}

fn cmd_regress(g: &GlobalArgs, a: &RegressArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    out.inputs.push(a.aux.clone());
    let aux = load_auxiliary(&a.aux, None)?;
    let score_records = match &a.scores {
        Some(p) => {
            out.inputs.push(p.clone());
            read_scores(p)?
        }
        None => Vec::new(),
    };
    let specs: Vec<ModelSpec> = match a.spec {
        SpecArg::FdDynamic => vec![ModelSpec::FirstDifferencedDynamic],
        SpecArg::WithinFe => vec![ModelSpec::WithinFe],
        SpecArg::Both => vec![ModelSpec::FirstDifferencedDynamic, ModelSpec::WithinFe],
    };
    let opts = FitOptions {
        covariance: match a.covariance {
            CovarianceArg::Hc0 => CovarianceType::Hc0,
            CovarianceArg::Hc1 => CovarianceType::Hc1,
            CovarianceArg::Hc2 => CovarianceType::Hc2,
            CovarianceArg::Hc3 => CovarianceType::Hc3,
        },
        estimator: match a.estimator {
            EstimatorArg::Dummy => Estimator::DummyVariables,
            EstimatorArg::Within => Estimator::Within,
        },
    };
    let mut metrics: Vec<Metric> = Vec::new();
    for m in &a.metric {
        let m = Metric::from(*m);
        if !metrics.contains(&m) {
            metrics.push(m);
        }
    }
    out.param("metrics", metrics.iter().map(|m| m.name()).collect::<Vec<_>>());
    out.param("specs", specs.iter().map(|s| s.name()).collect::<Vec<_>>());
    out.param("covariance", opts.covariance.name());
    out.param("estimator", format!("{:?}", a.estimator).to_lowercase());
    out.param("human_capital", format!("{:?}", a.human_capital).to_lowercase());
    out.param("exclude", a.exclude.clone());

    let mut panels = Vec::new();
    let mut series = Vec::new();
    for &metric in &metrics {
        let mut scores = scores_for(metric, &score_records);
        if scores.is_empty() {
            scores = external_scores(&aux, metric).unwrap_or_default();
            if !scores.is_empty() {
                out.line(format!("{}: using the `{}` series of the auxiliary file", metric.label(), metric.name()));
            }
        }
        if scores.is_empty() {
            return Err(CliError::new(
                "missing_scores",
                exit::INPUT,
                format!("no {} scores: pass --scores with metric `{}` rows", metric.label(), metric.name()),
            ));
        }
        let popts = PanelOptions {
            metric_transform: metric.default_transform(),
            human_capital_transform: a.human_capital.into(),
            excluded: a.exclude.clone(),
            countries: None,
        };
        let panel = build_panel(&aux, &scores, metric, &popts);
        if !panel.rejected.is_empty() {
            let missing: Vec<Value> = panel
                .rejected
                .iter()
                .map(|m| json!({ "country": m.country, "year": m.year, "variable": m.variable }))
                .collect();
            let mut pairs: Vec<String> = panel.rejected.iter().map(|m| format!("{} {}", m.country, m.year)).collect();
            pairs.dedup();
            if !a.allow_incomplete {
                return Err(CliError::new(
                    "panel_incomplete",
                    exit::PANEL,
                    format!("{} panel is incomplete; missing (country, year): {}", metric.label(), pairs.join("; ")),
                )
                .with_details(json!({ "metric": metric.name(), "missing": missing })));
            }
            out.line(format!("{}: dropped incomplete rows for {}", metric.label(), pairs.join("; ")));
        }
        out.line(format!(
            "{}: panel of {} rows, {} countries{}",
            metric.label(),
            panel.len(),
            panel.countries().len(),
            if panel.is_balanced() { "" } else { " (unbalanced)" }
        ));
        let pairs = growth_pairs(&aux, &scores, metric.default_transform(), a.scatter_start, a.scatter_end, &a.exclude);
        series.push((metric, pairs));
        panels.push(panel);
    }

    let mut results: Vec<RegressionResult> = Vec::new();
    for &spec in &specs {
        for panel in &panels {
            results.push(fit_panel(panel, spec, opts)?);
        }
    }
    let table = render_table(&results);
    out.stdout.push_str(&table);

    write_records(&a.out, &coefficient_records(&results), g.format)?;
    out.outputs.push(a.out.clone());

    let mut points = Vec::new();
    let mut fits = Vec::new();
    for (metric, pairs) in &series {
        let x: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        match unconditional_correlation(&x, &y) {
            Ok(fit) => {
                out.line(format!(
                    "{} growth {}-{}: slope {:.4}, R2 {:.3} (n = {})",
                    metric.label(),
                    a.scatter_start,
                    a.scatter_end,
                    fit.slope,
                    fit.r2,
                    fit.n
                ));
                fits.push(ScatterFitRecord {
                    metric: metric.name().into(),
                    start: a.scatter_start,
                    end: a.scatter_end,
                    n: fit.n,
                    intercept: fit.intercept,
                    slope: fit.slope,
                    r2: fit.r2,
                });
            }
            Err(e) => out.line(format!("{} growth scatter: no fit ({e})", metric.label())),
        }
        points.extend(pairs.iter().map(|(c, gy, gm)| ScatterRecord {
            country: c.clone(),
            metric: metric.name().into(),
            start: a.scatter_start,
            end: a.scatter_end,
            gdp_growth: *gy,
            metric_growth: *gm,
        }));
    }
    if let Some(p) = &a.table {
        let mut text = table.clone();
        for f in &fits {
            let _ = writeln!(text, "{} growth {}-{}: slope {:.4}, R2 {:.3}, n = {}", f.metric.to_uppercase(), f.start, f.end, f.slope, f.r2, f.n);
        }
        write_bytes(p, text.as_bytes())?;
        out.outputs.push(p.clone());
    }
    if let Some(p) = &a.scatter {
        write_bytes(p, &records_to_bytes(&points, g.format))?;
        out.outputs.push(p.clone());
    }
    if let Some(p) = &a.scatter_fit {
        write_records(p, &fits, g.format)?;
        out.outputs.push(p.clone());
    }
    Ok(out)
}

fn cmd_manifest(a: &ManifestArgs) -> CliResult<Outcome> {
    let mut out = Outcome { no_manifest: true, ..Outcome::default() };
    match &a.action {
        ManifestAction::Show { path } => {
            out.stdout = RunManifest::load(path)?.render();
        }
        ManifestAction::Verify { path } => {
            let m = RunManifest::load(path)?;
            let mut bad = manifest::mismatches(&m.inputs);
            bad.extend(manifest::mismatches(&m.outputs));
            if !bad.is_empty() {
                return Err(manifest::mismatch_error("manifest_mismatch", "files", &bad));
            }
            out.line(format!("{} inputs and {} outputs match", m.inputs.len(), m.outputs.len()));
        }
        ManifestAction::Replay { path } => {
            let m = RunManifest::load(path)?;
            let bad = manifest::mismatches(&m.inputs);
            if !bad.is_empty() {
                return Err(manifest::mismatch_error("manifest_mismatch", "inputs", &bad));
            }
            let mut argv = vec![manifest::TOOL.to_string()];
            argv.extend(m.args.iter().cloned());
            let report = run(&argv);
            if report.exit != m.exit {
                return Err(CliError::new(
                    "replay_mismatch",
                    exit::VALIDATION,
                    format!("replay exited with {} but the manifest records {}", report.exit, m.exit),
                )
                .with_details(json!({ "stderr": report.stderr })));
            }
            let bad = manifest::mismatches(&m.outputs);
            if !bad.is_empty() {
                return Err(manifest::mismatch_error("replay_mismatch", "outputs", &bad));
            }
            out.line(format!("replayed `{}`: {} outputs byte-identical", m.command, m.outputs.len()));
        }
    }
    Ok(out)
}
