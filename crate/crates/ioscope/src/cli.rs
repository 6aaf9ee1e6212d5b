//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ioscope_core::callgraph::{build_call_graph, find_entry_points};
use ioscope_core::natives::{diff_natives, extract_natives};
use ioscope_core::report::lint_corpus;
use ioscope_core::{Algorithm, CategoryDb, ClassModel, Corpus, Origin};

use crate::analysis::{self, DynamicOptions, StaticOptions};
use crate::inputs::{self, group_projects, load_containers, Loaded};
use crate::output::{self, Format};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ioscope", version, about = "Find JVM methods that can or do reach I/O-performing native methods")]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Containers {
    /// Project class directory or JAR; `NAME=PATH` groups containers into named projects
    #[arg(long = "project", value_name = "[NAME=]PATH")]
    pub project: Vec<String>,
    /// Dependency class directory or JAR
    #[arg(long = "dep", value_name = "PATH")]
    pub dep: Vec<PathBuf>,
    /// Runtime (JDK) class directory or JAR
    #[arg(long = "runtime", value_name = "PATH")]
    pub runtime: Vec<PathBuf>,
}

/// Per-project corpora plus the entries that failed to load.
type ProjectCorpora = (Vec<(String, Corpus)>, Vec<crate::EntryError>);

impl Containers {
    fn is_empty(&self) -> bool {
        self.project.is_empty() && self.dep.is_empty() && self.runtime.is_empty()
    }

    fn project_paths(&self) -> Vec<PathBuf> {
        group_projects(&self.project).into_iter().flat_map(|p| p.containers).collect()
    }

    /// Dependency classes followed by runtime classes.
    fn load_shared(&self) -> Result<Loaded> {
        let mut shared = load_containers(&self.dep, Origin::Dependency)?;
        shared.extend(load_containers(&self.runtime, Origin::Runtime)?);
        Ok(shared)
    }

    fn load_all(&self) -> Result<Loaded> {
        let mut all = load_containers(&self.project_paths(), Origin::Project)?;
        all.extend(self.load_shared()?);
        Ok(all)
    }

    /// One corpus per project, all sharing dependency and runtime classes.
    fn load_projects(&self) -> Result<ProjectCorpora> {
        let specs = group_projects(&self.project);
        if specs.is_empty() {
            return Err(Error::Usage("at least one --project is required".into()));
        }
        let shared = self.load_shared()?;
        let mut errors = Vec::new();
        let mut corpora = Vec::new();
        for spec in specs {
            let project = load_containers(&spec.containers, Origin::Project)?;
            errors.extend(project.errors);
            corpora.push((spec.id, analysis::corpus_for(project.classes, &shared.classes)));
        }
        errors.extend(shared.errors);
        Ok((corpora, errors))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    #[default]
    Cha,
    Rta,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Cha => Algorithm::Cha,
            AlgoArg::Rta => Algorithm::Rta,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directory for report files
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Module allowlist file (default: java.* and java.smartcardio)
    #[arg(long = "modules-allowlist", value_name = "FILE")]
    pub modules_allowlist: Option<PathBuf>,
    /// Size threshold for the threshold statistic (default 5 units statically, 11 bytes dynamically)
    #[arg(long = "size-threshold", value_name = "N")]
    pub size_threshold: Option<u32>,
    /// Bin width of the per-project distribution, in percentage points
    #[arg(long = "bin-width", default_value_t = analysis::DEFAULT_BIN_WIDTH, value_parser = clap::value_parser!(u32).range(1..=100))]
    pub bin_width: u32,
    /// Rows per category in the top-natives report
    #[arg(long, default_value_t = analysis::DEFAULT_TOP_K, value_parser = parse_positive)]
    pub top: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List every native method declared in the given containers
    ScanNatives {
        #[command(flatten)]
        containers: Containers,
        /// Also report how the natives compare with this category database
        #[arg(long, value_name = "FILE")]
        db: Option<PathBuf>,
    },
    /// Compare declared natives with a category database
    Diff {
        #[command(flatten)]
        containers: Containers,
        #[arg(long, value_name = "FILE")]
        db: PathBuf,
    },
    /// Check projects against the corpus criteria E3, E4, E5 and I6
    Lint {
        #[command(flatten)]
        containers: Containers,
        #[arg(long, value_name = "FILE")]
        db: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = AlgoArg::Cha)]
        algo: AlgoArg,
        #[arg(long = "modules-allowlist", value_name = "FILE")]
        modules_allowlist: Option<PathBuf>,
        /// Write lint.csv (or lint.json) here instead of standard output
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Build the call graph and print its size, or dump it
    Graph {
        #[command(flatten)]
        containers: Containers,
        #[arg(long, value_enum, default_value_t = AlgoArg::Cha)]
        algo: AlgoArg,
        /// Print `entry` and `edge` lines instead of the size summary
        #[arg(long)]
        dump: bool,
        /// Write to this file instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Static analysis: reachable natives per source method, with reports
    Analyze {
        #[command(flatten)]
        containers: Containers,
        #[arg(long, value_name = "FILE")]
        db: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Cha)]
        algo: AlgoArg,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Dynamic analysis of recorded traces, with reports
    TraceAnalyze {
        #[command(flatten)]
        containers: Containers,
        #[arg(long, value_name = "FILE")]
        db: PathBuf,
        /// Trace file (repeatable)
        #[arg(long, value_name = "FILE", required = true)]
        trace: Vec<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn write_out(stdout: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.into(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn require_inputs(c: &Containers) -> Result<()> {
    if c.is_empty() {
        return Err(Error::Usage("no input containers; use --project, --dep or --runtime".into()));
    }
    Ok(())
}

fn declared_natives(classes: &[ClassModel]) -> Vec<ioscope_core::MethodRef> {
    extract_natives(classes.iter())
}

/// Runs a parsed command line. Data goes to `stdout` or to files;
/// diagnostics go through the logger.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::ScanNatives { containers, db } => {
            require_inputs(&containers)?;
            let loaded = containers.load_all()?;
            let natives = declared_natives(&loaded.classes);
            let db = db.as_deref().map(inputs::load_db).transpose()?;
            let mut text = String::new();
            for m in &natives {
                let cat = db.as_ref().and_then(|d| d.get(m)).map_or("uncatalogued", |c| c.token());
                text.push_str(&format!("{}\t{}\t{}\t{cat}\n", m.class_name, m.method_name, m.descriptor));
            }
            if let Some(db) = &db {
                let d = diff_natives(&natives, db);
                log::warn!(
                    "{} natives found, {} uncatalogued, {} database entries not found",
                    natives.len(),
                    d.uncatalogued.len(),
                    d.stale.len()
                );
            }
            write_out(stdout, None, &text)
        }
        Command::Diff { containers, db } => {
            require_inputs(&containers)?;
            let loaded = containers.load_all()?;
            let db = inputs::load_db(&db)?;
            let d = diff_natives(&declared_natives(&loaded.classes), &db);
            let mut text = String::new();
            for m in &d.uncatalogued {
                text.push_str(&format!("uncatalogued\t{m}\n"));
            }
            for m in &d.stale {
                text.push_str(&format!("stale\t{m}\n"));
            }
            write_out(stdout, None, &text)
        }
        Command::Lint { containers, db, algo, modules_allowlist, out, format } => {
            let db = db.as_deref().map(inputs::load_db).transpose()?.unwrap_or_default();
            let allowlist = inputs::load_allowlist(modules_allowlist.as_deref())?;
            let (corpora, _) = containers.load_projects()?;
            let mut rows = Vec::new();
            for (id, corpus) in &corpora {
                let build = build_call_graph(corpus, &find_entry_points(corpus), algo.into());
                for f in lint_corpus(corpus, Some(&build), &db, &allowlist) {
                    rows.push(output::LintRow {
                        project_id: id.clone(),
                        criterion: f.criterion.code(),
                        subject: f.subject,
                        detail: f.detail,
                    });
                }
            }
            let header = ["project_id", "criterion", "subject", "detail"];
            match (out, format) {
                (Some(dir), format) => {
                    std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                    match format {
                        Format::Csv => output::write_csv(&dir.join("lint.csv"), &header, &rows),
                        Format::Json => output::write_json(&dir.join("lint.json"), &rows),
                    }
                }
                (None, Format::Json) => {
                    let text = serde_json::to_string_pretty(&rows)
                        .map_err(|source| Error::Json { path: "<stdout>".into(), source })?;
                    write_out(stdout, None, &(text + "\n"))
                }
                (None, Format::Csv) => {
                    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                    let csv_err = |source| Error::Csv { path: "<stdout>".into(), source };
                    w.write_record(header).map_err(csv_err)?;
                    for r in &rows {
                        w.serialize(r).map_err(csv_err)?;
                    }
                    let bytes = w.into_inner().map_err(|e| Error::Io { path: "<stdout>".into(), source: e.into_error() })?;
                    write_out(stdout, None, &String::from_utf8_lossy(&bytes))
                }
            }
        }
        Command::Graph { containers, algo, dump, out } => {
            let (corpora, _) = containers.load_projects()?;
            let mut text = String::new();
            for (id, corpus) in &corpora {
                let build = build_call_graph(corpus, &find_entry_points(corpus), algo.into());
                if corpora.len() > 1 {
                    text.push_str(&format!("# project: {id}\n"));
                }
                if dump {
                    text.push_str(&build.graph.dump());
                } else {
                    let s = analysis::GraphStats::of(&build);
                    text.push_str(&format!(
                        "algorithm={} nodes={} edges={} entry_points={} unresolved={}\n",
                        build.graph.algorithm.as_str(),
                        s.nodes,
                        s.edges,
                        s.entry_points,
                        s.unresolved
                    ));
                }
                for u in &build.unresolved {
                    log::info!("{id}: unresolved {} from {}", u.target, u.caller);
                }
            }
            write_out(stdout, out.as_deref(), &text)
        }
        Command::Analyze { containers, db, algo, report } => {
            let db: CategoryDb = inputs::load_db(&db)?;
            let allowlist = inputs::load_allowlist(report.modules_allowlist.as_deref())?;
            let (corpora, errors) = containers.load_projects()?;
            let opts = StaticOptions {
                algorithm: algo.into(),
                db: &db,
                allowlist: &allowlist,
                size_threshold: report.size_threshold.unwrap_or(analysis::STATIC_SIZE_THRESHOLD),
                bin_width: report.bin_width,
                top_k: report.top,
            };
            let result = analysis::analyze_static(&corpora, &opts, errors)?;
            output::write_static(&report.out, report.format, &result)
        }
        Command::TraceAnalyze { containers, db, trace, report } => {
            let db: CategoryDb = inputs::load_db(&db)?;
            let allowlist = inputs::load_allowlist(report.modules_allowlist.as_deref())?;
            require_inputs(&containers)?;
            let loaded = containers.load_all()?;
            let corpus = Corpus::new(loaded.classes);
            let mut traces = Vec::new();
            for path in &trace {
                if !path.exists() {
                    return Err(Error::Usage(format!("trace {} does not exist", path.display())));
                }
                traces.push((path.display().to_string(), inputs::read_trace(path)?));
            }
            let opts = DynamicOptions {
                db: &db,
                allowlist: &allowlist,
                size_threshold: report.size_threshold.unwrap_or(analysis::DYNAMIC_SIZE_THRESHOLD),
                bin_width: report.bin_width,
                top_k: report.top,
            };
            let result = analysis::analyze_dynamic(&corpus, traces, &opts, loaded.errors)?;
            output::write_dynamic(&report.out, report.format, &result)
        }
    }
}
