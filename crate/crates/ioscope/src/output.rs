//! Report files: one CSV (or JSON array) per report plus `summary.json`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ioscope_core::reach::AttributedMethods;
use ioscope_core::report::io_candidates;
use ioscope_core::{AnalysisMode, DynSummary, NativeCategory, StaticSummary};
use serde::Serialize;

use crate::analysis::{DynamicAnalysis, GraphStats, Reports, StaticAnalysis};
use crate::scan::EntryError;
use crate::{Error, Result};

pub const LINT_FILE: &str = "lint";
pub const DISTRIBUTION_FILE: &str = "distribution";
pub const SIZE_HIST_FILE: &str = "size_hist";
pub const TOP_NATIVES_FILE: &str = "top_natives";
pub const SUMMARY_FILE: &str = "summary.json";
pub const METHODS_FILE: &str = "methods.tsv";
pub const IO_CANDIDATES_FILE: &str = "io_candidates.tsv";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LintRow {
    pub project_id: String,
    pub criterion: &'static str,
    pub subject: String,
    pub detail: String,
}

/// `record` is `project` for per-project rows and `bin` for bin counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub record: &'static str,
    pub project_id: Option<String>,
    pub pct_calls_io: Option<f64>,
    pub bin_lower: Option<u32>,
    pub bin_upper: Option<u32>,
    pub projects: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub metric: &'static str,
    pub size: u32,
    pub io_count: usize,
    pub non_io_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopRow {
    pub category: &'static str,
    pub rank: usize,
    pub native: String,
    pub callers: usize,
}

pub fn lint_rows(r: &Reports) -> Vec<LintRow> {
    r.lint
        .iter()
        .map(|(p, f)| LintRow {
            project_id: p.clone(),
            criterion: f.criterion.code(),
            subject: f.subject.clone(),
            detail: f.detail.clone(),
        })
        .collect()
}

pub fn distribution_rows(r: &Reports) -> Vec<DistributionRow> {
    let d = &r.distribution;
    let mut rows: Vec<DistributionRow> = d
        .rows
        .iter()
        .map(|row| DistributionRow {
            record: "project",
            project_id: Some(row.project_id.clone()),
            pct_calls_io: row.pct_calls_io,
            bin_lower: row.bin,
            bin_upper: row.bin.map(|b| b + d.bin_width),
            projects: None,
        })
        .collect();
    rows.extend(d.bins.iter().map(|(&lower, &count)| DistributionRow {
        record: "bin",
        project_id: None,
        pct_calls_io: None,
        bin_lower: Some(lower),
        bin_upper: Some(lower + d.bin_width),
        projects: Some(count),
    }));
    rows
}

pub fn size_rows(r: &Reports) -> Vec<SizeRow> {
    let h = &r.histogram;
    h.bins
        .iter()
        .map(|(&size, b)| SizeRow { metric: h.metric.as_str(), size, io_count: b.io_count, non_io_count: b.non_io_count })
        .collect()
}

pub fn top_rows(r: &Reports) -> Vec<TopRow> {
    let mut rows = Vec::new();
    for (cat, ranked) in &r.top {
        for (i, (m, n)) in ranked.iter().enumerate() {
            rows.push(TopRow { category: cat.token(), rank: i + 1, native: m.to_string(), callers: *n });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryShare {
    pub category: &'static str,
    pub count: usize,
    pub pct: Option<f64>,
}

fn shares(per_category: &[usize; 7], of: usize) -> Vec<CategoryShare> {
    NativeCategory::ALL
        .iter()
        .map(|&c| CategoryShare {
            category: c.token(),
            count: per_category[c as usize],
            pct: (of > 0).then(|| per_category[c as usize] as f64 * 100.0 / of as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticPopulation {
    pub project_id: String,
    pub total_source_methods: usize,
    pub reachable: usize,
    pub reachable_pct: Option<f64>,
    pub calls_native: usize,
    pub calls_native_pct: Option<f64>,
    pub calls_io: usize,
    pub calls_io_pct: Option<f64>,
    pub categories: Vec<CategoryShare>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphJson {
    pub nodes: usize,
    pub edges: usize,
    pub entry_points: usize,
    pub unresolved_call_sites: usize,
}

impl From<GraphStats> for GraphJson {
    fn from(g: GraphStats) -> Self {
        GraphJson { nodes: g.nodes, edges: g.edges, entry_points: g.entry_points, unresolved_call_sites: g.unresolved }
    }
}

impl StaticPopulation {
    pub fn new(id: &str, s: &StaticSummary, graph: Option<GraphStats>) -> Self {
        StaticPopulation {
            project_id: id.to_string(),
            total_source_methods: s.total_source_methods,
            reachable: s.reachable,
            reachable_pct: s.reachable_pct(),
            calls_native: s.calls_native,
            calls_native_pct: s.calls_native_pct(),
            calls_io: s.calls_io,
            calls_io_pct: s.calls_io_pct(),
            categories: shares(&s.per_category, s.reachable),
            graph: graph.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicPopulation {
    pub trace: String,
    pub executed: usize,
    pub calls_native: usize,
    pub calls_native_pct: Option<f64>,
    pub calls_io: usize,
    pub calls_io_pct: Option<f64>,
    pub categories: Vec<CategoryShare>,
}

impl DynamicPopulation {
    pub fn new(id: &str, s: &DynSummary) -> Self {
        DynamicPopulation {
            trace: id.to_string(),
            executed: s.executed,
            calls_native: s.calls_native,
            calls_native_pct: s.calls_native_pct(),
            calls_io: s.calls_io,
            calls_io_pct: s.calls_io_pct(),
            categories: shares(&s.per_category, s.executed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdJson {
    pub metric: &'static str,
    /// methods with size >= threshold form the population
    pub threshold: u32,
    pub population: usize,
    pub calls_io: usize,
    pub calls_io_pct: Option<f64>,
}

impl ThresholdJson {
    fn of(r: &Reports) -> Self {
        let h = &r.histogram;
        ThresholdJson {
            metric: h.metric.as_str(),
            threshold: h.threshold,
            population: h.threshold_population,
            calls_io: h.threshold_io,
            calls_io_pct: h.threshold_pct(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanErrorJson {
    pub entry: String,
    pub error: String,
}

fn scan_errors(errors: &[EntryError]) -> Vec<ScanErrorJson> {
    errors.iter().map(|e| ScanErrorJson { entry: e.entry.clone(), error: e.kind.to_string() }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticSummaryJson {
    pub mode: &'static str,
    pub algorithm: &'static str,
    pub total: StaticPopulation,
    pub projects: Vec<StaticPopulation>,
    pub size_threshold: ThresholdJson,
    pub scan_errors: Vec<ScanErrorJson>,
}

impl StaticSummaryJson {
    pub fn new(a: &StaticAnalysis) -> Self {
        StaticSummaryJson {
            mode: "static",
            algorithm: a.algorithm.as_str(),
            total: StaticPopulation::new("all", &a.total, None),
            projects: a.projects.iter().map(|p| StaticPopulation::new(&p.id, &p.summary, Some(p.graph))).collect(),
            size_threshold: ThresholdJson::of(&a.reports),
            scan_errors: scan_errors(&a.scan_errors),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicSummaryJson {
    pub mode: &'static str,
    pub total: DynamicPopulation,
    pub traces: Vec<DynamicPopulation>,
    pub size_threshold: ThresholdJson,
    /// trace frames with no matching method in the supplied classes
    pub unknown_methods: Vec<String>,
    pub scan_errors: Vec<ScanErrorJson>,
}

impl DynamicSummaryJson {
    pub fn new(a: &DynamicAnalysis) -> Self {
        DynamicSummaryJson {
            mode: "dynamic",
            total: DynamicPopulation::new("all", &a.total),
            traces: a.traces.iter().map(|t| DynamicPopulation::new(&t.id, &t.summary)).collect(),
            size_threshold: ThresholdJson::of(&a.reports),
            unknown_methods: a.merged.unknown.iter().map(ToString::to_string).collect(),
            scan_errors: scan_errors(&a.scan_errors),
        }
    }
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.into(), source })
}

/// Writes rows as CSV with a header row. A header is written even when
/// there are no rows.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let err = |source| Error::Csv { path: path.into(), source };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|source| Error::Json { path: path.into(), source })?;
    f.write_all(b"\n").map_err(|source| Error::Io { path: path.into(), source })
}

fn write_table<T: Serialize>(dir: &Path, stem: &str, format: Format, header: &[&str], rows: &[T]) -> Result<()> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => write_csv(&path, header, rows),
        Format::Json => write_json(&path, rows),
    }
}

fn methods_tsv_dynamic(r: &Reports) -> String {
    let mut out = String::new();
    for (m, a) in r.pooled.population() {
        out.push_str(&format!(
            "{m}\ttrue\t{}\t{}\t{}\n",
            a.mask,
            a.calls_native(),
            a.calls_io(AnalysisMode::Dynamic)
        ));
    }
    out
}

fn io_candidates_tsv(r: &Reports) -> String {
    io_candidates(&r.pooled).into_iter().map(|(m, mask)| format!("{m}\t{mask}\n")).collect()
}

fn write_common(dir: &Path, format: Format, r: &Reports) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    write_table(dir, LINT_FILE, format, &["project_id", "criterion", "subject", "detail"], &lint_rows(r))?;
    write_table(
        dir,
        DISTRIBUTION_FILE,
        format,
        &["record", "project_id", "pct_calls_io", "bin_lower", "bin_upper", "projects"],
        &distribution_rows(r),
    )?;
    write_table(dir, SIZE_HIST_FILE, format, &["metric", "size", "io_count", "non_io_count"], &size_rows(r))?;
    write_table(dir, TOP_NATIVES_FILE, format, &["category", "rank", "native", "callers"], &top_rows(r))?;
    write_bytes(&dir.join(IO_CANDIDATES_FILE), io_candidates_tsv(r).as_bytes())
}

pub fn write_static(dir: &Path, format: Format, a: &StaticAnalysis) -> Result<()> {
    write_common(dir, format, &a.reports)?;
    let mut methods = String::new();
    for p in &a.projects {
        if a.projects.len() > 1 {
            methods.push_str(&format!("# project: {}\n", p.id));
        }
        methods.push_str(&p.reach.to_tsv());
    }
    write_bytes(&dir.join(METHODS_FILE), methods.as_bytes())?;
    write_json(&dir.join(SUMMARY_FILE), &StaticSummaryJson::new(a))
}

pub fn write_dynamic(dir: &Path, format: Format, a: &DynamicAnalysis) -> Result<()> {
    write_common(dir, format, &a.reports)?;
    write_bytes(&dir.join(METHODS_FILE), methods_tsv_dynamic(&a.reports).as_bytes())?;
    write_json(&dir.join(SUMMARY_FILE), &DynamicSummaryJson::new(a))
}
