//! The static and dynamic pipelines, from loaded classes to report data.

use std::collections::BTreeMap;

use ioscope_core::callgraph::{build_call_graph, find_entry_points, GraphBuild};
use ioscope_core::reach::{natives_reachable, summarize_static, AttributedMethods};
use ioscope_core::report::{
    histogram_from, lint_corpus, project_distribution, top_natives, Distribution, LintFinding,
    ModuleAllowlist, SizeHistogram, SizeMetric,
};
use ioscope_core::trace::{attribute, summarize_dynamic};
use ioscope_core::{
    Algorithm, AnalysisMode, Attribution, CategoryDb, ClassModel, Corpus, DynResult, DynSummary,
    MethodRef, NativeCategory, ReachabilityResult, StaticSummary, TraceEvent,
};

use crate::scan::EntryError;
use crate::Result;

/// Static defaults: at least 5 statement units; dynamic: more than 10 bytes.
pub const STATIC_SIZE_THRESHOLD: u32 = 5;
pub const DYNAMIC_SIZE_THRESHOLD: u32 = 11;
pub const DEFAULT_BIN_WIDTH: u32 = 5;
pub const DEFAULT_TOP_K: usize = 10;

/// Methods pooled from several results, for reports over all of them.
#[derive(Debug, Clone)]
pub struct Pooled {
    pub mode: AnalysisMode,
    pub items: Vec<(MethodRef, Attribution)>,
}

impl AttributedMethods for Pooled {
    fn mode(&self) -> AnalysisMode {
        self.mode
    }

    fn population(&self) -> Vec<(&MethodRef, &Attribution)> {
        self.items.iter().map(|(m, a)| (m, a)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub entry_points: usize,
    pub unresolved: usize,
}

impl GraphStats {
    pub fn of(build: &GraphBuild) -> Self {
        GraphStats {
            nodes: build.graph.node_count(),
            edges: build.graph.edge_count(),
            entry_points: build.graph.entry_ids().count(),
            unresolved: build.unresolved.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectResult {
    pub id: String,
    pub graph: GraphStats,
    pub reach: ReachabilityResult,
    pub summary: StaticSummary,
    pub lint: Vec<LintFinding>,
}

pub struct StaticOptions<'a> {
    pub algorithm: Algorithm,
    pub db: &'a CategoryDb,
    pub allowlist: &'a ModuleAllowlist,
    pub size_threshold: u32,
    pub bin_width: u32,
    pub top_k: usize,
}

/// Everything the report files are made from.
#[derive(Debug, Clone)]
pub struct Reports {
    pub lint: Vec<(String, LintFinding)>,
    pub distribution: Distribution,
    pub histogram: SizeHistogram,
    pub top: BTreeMap<NativeCategory, Vec<(MethodRef, usize)>>,
    pub pooled: Pooled,
}

#[derive(Debug, Clone)]
pub struct StaticAnalysis {
    pub algorithm: Algorithm,
    pub projects: Vec<ProjectResult>,
    pub total: StaticSummary,
    pub reports: Reports,
    pub scan_errors: Vec<EntryError>,
}

/// Builds a corpus from one project's classes plus shared dependency and
/// runtime classes (project classes win on name clashes).
pub fn corpus_for(project: Vec<ClassModel>, shared: &[ClassModel]) -> Corpus {
    let corpus = Corpus::new(project.into_iter().chain(shared.iter().cloned()));
    for name in corpus.shadowed() {
        log::debug!("class {name} defined more than once; using the first definition");
    }
    corpus
}

pub fn analyze_project(id: &str, corpus: &Corpus, opts: &StaticOptions<'_>) -> Result<ProjectResult> {
    let entries = find_entry_points(corpus);
    let build = build_call_graph(corpus, &entries, opts.algorithm);
    let lint = lint_corpus(corpus, Some(&build), opts.db, opts.allowlist);
    let reach = natives_reachable(&build.graph, corpus, opts.db)?;
    let summary = summarize_static(&reach);
    log::info!(
        "{id}: {} entry points, {} nodes, {} edges, {} unresolved call sites",
        entries.len(),
        build.graph.node_count(),
        build.graph.edge_count(),
        build.unresolved.len()
    );
    Ok(ProjectResult { id: id.to_string(), graph: GraphStats::of(&build), reach, summary, lint })
}

/// Runs the static pipeline over every project. `corpora` pairs project ids
/// with their corpora.
pub fn analyze_static(
    corpora: &[(String, Corpus)],
    opts: &StaticOptions<'_>,
    scan_errors: Vec<EntryError>,
) -> Result<StaticAnalysis> {
    let mut projects = Vec::new();
    for (id, corpus) in corpora {
        projects.push(analyze_project(id, corpus, opts)?);
    }

    let mut total = StaticSummary::default();
    let mut sizes = Vec::new();
    let mut pooled = Pooled { mode: AnalysisMode::Static, items: Vec::new() };
    let mut lint = Vec::new();
    for (p, (_, corpus)) in projects.iter().zip(corpora) {
        total.merge(&p.summary);
        for (m, a) in p.reach.population() {
            if let Some(model) = corpus.method(m) {
                sizes.push((model.statement_units, a.calls_io(AnalysisMode::Static)));
            }
            pooled.items.push((m.clone(), a.clone()));
        }
        lint.extend(p.lint.iter().map(|f| (p.id.clone(), f.clone())));
    }
    let per_project: Vec<(String, StaticSummary)> = projects.iter().map(|p| (p.id.clone(), p.summary)).collect();
    let reports = Reports {
        lint,
        distribution: project_distribution(&per_project, opts.bin_width),
        histogram: histogram_from(sizes, SizeMetric::StatementUnits, opts.size_threshold),
        top: top_natives(&pooled, opts.db, opts.top_k),
        pooled,
    };
    Ok(StaticAnalysis { algorithm: opts.algorithm, projects, total, reports, scan_errors })
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub id: String,
    pub result: DynResult,
    pub summary: DynSummary,
}

#[derive(Debug, Clone)]
pub struct DynamicAnalysis {
    pub traces: Vec<TraceResult>,
    pub merged: DynResult,
    pub total: DynSummary,
    pub reports: Reports,
    pub scan_errors: Vec<EntryError>,
}

pub struct DynamicOptions<'a> {
    pub db: &'a CategoryDb,
    pub allowlist: &'a ModuleAllowlist,
    pub size_threshold: u32,
    pub bin_width: u32,
    pub top_k: usize,
}

/// Summary of a dynamic population in the shape used by the distribution
/// report, with executed methods in place of reachable ones.
fn as_population_summary(s: &DynSummary) -> StaticSummary {
    StaticSummary {
        total_source_methods: s.executed,
        reachable: s.executed,
        calls_native: s.calls_native,
        calls_io: s.calls_io,
        per_category: s.per_category,
    }
}

/// Attributes each trace separately against `corpus`, then merges.
pub fn analyze_dynamic(
    corpus: &Corpus,
    traces: Vec<(String, Vec<TraceEvent>)>,
    opts: &DynamicOptions<'_>,
    scan_errors: Vec<EntryError>,
) -> Result<DynamicAnalysis> {
    let mut results = Vec::new();
    let mut merged = DynResult::default();
    for (id, events) in traces {
        let result = attribute(events, opts.db, corpus)?;
        for m in &result.unknown {
            log::warn!("{id}: {m} is not in the supplied classes; not attributed");
        }
        merged.merge(&result);
        let summary = summarize_dynamic(&result);
        results.push(TraceResult { id, result, summary });
    }
    let total = summarize_dynamic(&merged);

    let sizes = merged.executed.iter().filter_map(|(m, a)| {
        corpus.method(m).map(|model| (model.code_size_bytes, a.calls_io(AnalysisMode::Dynamic)))
    });
    let histogram = histogram_from(sizes, SizeMetric::BytecodeBytes, opts.size_threshold);
    let per_trace: Vec<(String, StaticSummary)> =
        results.iter().map(|t| (t.id.clone(), as_population_summary(&t.summary))).collect();
    let pooled = Pooled {
        mode: AnalysisMode::Dynamic,
        items: merged.executed.iter().map(|(m, a)| (m.clone(), a.clone())).collect(),
    };
    let lint = lint_corpus(corpus, None, opts.db, opts.allowlist)
        .into_iter()
        .map(|f| (crate::inputs::DEFAULT_PROJECT.to_string(), f))
        .collect();
    let reports = Reports {
        lint,
        distribution: project_distribution(&per_trace, opts.bin_width),
        histogram,
        top: top_natives(&merged, opts.db, opts.top_k),
        pooled,
    };
    Ok(DynamicAnalysis { traces: results, merged, total, reports, scan_errors })
}
