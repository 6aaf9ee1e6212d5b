//! Derived analyses: corpus lint, per-project distribution, size
//! histograms with threshold statistics, and top natives per category.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::callgraph::{find_entry_points, GraphBuild, UnresolvedReason};
use crate::corpus::Corpus;
use crate::model::{MethodRef, Origin};
use crate::natives::{diff_natives, extract_natives, CategoryDb, CategoryMask, NativeCategory};
use crate::reach::{pct, AttributedMethods, StaticSummary};

/// Corpus admission criteria checked by [`lint_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LintCriterion {
    /// unresolved reference to a class or method
    E3Unresolved,
    /// project or dependency declares its own native method
    E4CustomNative,
    /// use of a runtime module outside the allowlist
    E5ForeignModule,
    /// no main method or test method to start from
    I6NoEntryPoint,
}

impl LintCriterion {
    pub fn code(self) -> &'static str {
        match self {
            LintCriterion::E3Unresolved => "E3",
            LintCriterion::E4CustomNative => "E4",
            LintCriterion::E5ForeignModule => "E5",
            LintCriterion::I6NoEntryPoint => "I6",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LintFinding {
    pub criterion: LintCriterion,
    pub subject: String,
    pub detail: String,
}

/// Runtime modules considered part of the analyzed runtime image.
///
/// One pattern per line; a trailing `*` matches any suffix, `#` starts a
/// comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleAllowlist {
    patterns: Vec<String>,
}

impl Default for ModuleAllowlist {
    /// Java SE modules plus `java.smartcardio`.
    fn default() -> Self {
        Self { patterns: alloc::vec!["java.*".to_string(), "java.smartcardio".to_string()] }
    }
}

impl ModuleAllowlist {
    pub fn parse(text: &str) -> Self {
        let patterns = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(ToString::to_string)
            .collect();
        Self { patterns }
    }

    pub fn allows(&self, module: &str) -> bool {
        self.patterns.iter().any(|p| match p.strip_suffix('*') {
            Some(prefix) => module.starts_with(prefix),
            None => module == p,
        })
    }
}

/// Checks the corpus against criteria E3, E4, E5 and I6. An empty result
/// means the project is admissible.
///
/// E3 looks at every class named in the constant pools of project and
/// dependency classes, plus unresolved methods from `graph` if given.
pub fn lint_corpus(
    corpus: &Corpus,
    graph: Option<&GraphBuild>,
    db: &CategoryDb,
    allowlist: &ModuleAllowlist,
) -> Vec<LintFinding> {
    let mut findings: BTreeSet<LintFinding> = BTreeSet::new();
    let user_classes = || corpus.classes().filter(|c| c.origin != Origin::Runtime && !c.is_module_info());

    let mut missing: BTreeMap<&str, &str> = BTreeMap::new();
    let mut foreign: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for c in user_classes() {
        for r in c.referenced_classes.iter().map(String::as_str) {
            match corpus.class(r) {
                None => {
                    missing.entry(r).or_insert(&c.name);
                }
                Some(target) if target.origin == Origin::Runtime => {
                    if let Some(module) = target.module.as_deref().filter(|m| !allowlist.allows(m)) {
                        foreign.entry(module).or_insert((r, &c.name));
                    }
                }
                Some(_) => {}
            }
        }
    }
    for (class, by) in missing {
        findings.insert(LintFinding {
            criterion: LintCriterion::E3Unresolved,
            subject: class.to_string(),
            detail: format!("class referenced by {by} is not in the corpus"),
        });
    }
    if let Some(build) = graph {
        for u in &build.unresolved {
            let subject = match u.reason {
                UnresolvedReason::MissingClass => u.target.class_name.clone(),
                UnresolvedReason::MissingMethod => u.target.to_string(),
            };
            if findings.iter().any(|f| f.criterion == LintCriterion::E3Unresolved && f.subject == subject) {
                continue;
            }
            findings.insert(LintFinding {
                criterion: LintCriterion::E3Unresolved,
                subject,
                detail: format!("call from {} cannot be resolved", u.caller),
            });
        }
    }

    let declared = extract_natives(user_classes());
    for m in diff_natives(&declared, db).uncatalogued {
        findings.insert(LintFinding {
            criterion: LintCriterion::E4CustomNative,
            subject: m.to_string(),
            detail: "native method declared outside the runtime".to_string(),
        });
    }

    for (module, (class, by)) in foreign {
        findings.insert(LintFinding {
            criterion: LintCriterion::E5ForeignModule,
            subject: module.to_string(),
            detail: format!("{by} uses {class}"),
        });
    }

    if find_entry_points(corpus).is_empty() {
        findings.insert(LintFinding {
            criterion: LintCriterion::I6NoEntryPoint,
            subject: "entry-points".to_string(),
            detail: "no main method or JUnit 3-5 test method in project classes".to_string(),
        });
    }
    findings.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub project_id: String,
    pub pct_calls_io: Option<f64>,
    /// lower bound of the bin, absent with the percentage
    pub bin: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub bin_width: u32,
    pub rows: Vec<DistributionRow>,
    /// bin lower bound -> number of projects
    pub bins: BTreeMap<u32, usize>,
}

/// Per-project I/O-caller percentages, binned by `bin_width` percentage
/// points (bins are `[lower, lower + width)`).
pub fn project_distribution(per_project: &[(String, StaticSummary)], bin_width: u32) -> Distribution {
    assert!(bin_width > 0, "bin width must be positive");
    let mut bins = BTreeMap::new();
    let rows = per_project
        .iter()
        .map(|(id, s)| {
            let bin = (s.reachable > 0).then(|| {
                // exact integer floor of pct / width
                let lower = (s.calls_io as u64 * 100 / (s.reachable as u64 * bin_width as u64)) as u32 * bin_width;
                *bins.entry(lower).or_insert(0) += 1;
                lower
            });
            DistributionRow { project_id: id.clone(), pct_calls_io: s.calls_io_pct(), bin }
        })
        .collect();
    Distribution { bin_width, rows, bins }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeMetric {
    StatementUnits,
    BytecodeBytes,
}

impl SizeMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeMetric::StatementUnits => "statement_units",
            SizeMetric::BytecodeBytes => "bytecode_bytes",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeBin {
    pub io_count: usize,
    pub non_io_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeHistogram {
    pub metric: SizeMetric,
    pub bins: BTreeMap<u32, SizeBin>,
    /// methods with size >= `threshold` are counted in the threshold statistic
    pub threshold: u32,
    pub threshold_population: usize,
    pub threshold_io: usize,
}

impl SizeHistogram {
    pub fn threshold_pct(&self) -> Option<f64> {
        pct(self.threshold_io, self.threshold_population)
    }

    pub fn total(&self) -> usize {
        self.bins.values().map(|b| b.io_count + b.non_io_count).sum()
    }
}

/// Histogram over `(size, calls_io)` pairs.
pub fn histogram_from(items: impl IntoIterator<Item = (u32, bool)>, metric: SizeMetric, threshold: u32) -> SizeHistogram {
    let mut h = SizeHistogram { metric, bins: BTreeMap::new(), threshold, threshold_population: 0, threshold_io: 0 };
    for (size, io) in items {
        let bin = h.bins.entry(size).or_default();
        if io {
            bin.io_count += 1;
        } else {
            bin.non_io_count += 1;
        }
        if size >= threshold {
            h.threshold_population += 1;
            h.threshold_io += io as usize;
        }
    }
    h
}

/// Size histogram of a method population. Methods absent from `corpus`
/// have no defined size and are skipped.
pub fn size_histogram<R: AttributedMethods + ?Sized>(
    r: &R,
    corpus: &Corpus,
    metric: SizeMetric,
    threshold: u32,
) -> SizeHistogram {
    let mode = r.mode();
    let items = r.population().into_iter().filter_map(|(m, a)| {
        let model = corpus.method(m)?;
        let size = match metric {
            SizeMetric::StatementUnits => model.statement_units,
            SizeMetric::BytecodeBytes => model.code_size_bytes,
        };
        Some((size, a.calls_io(mode)))
    });
    histogram_from(items, metric, threshold)
}

/// Per category, natives ranked by how many methods of the population are
/// attributed to them; ties go to the smaller method reference. At most
/// `k` rows per category; categories without rows are omitted.
pub fn top_natives<R: AttributedMethods + ?Sized>(
    r: &R,
    db: &CategoryDb,
    k: usize,
) -> BTreeMap<NativeCategory, Vec<(MethodRef, usize)>> {
    let mut counts: BTreeMap<&MethodRef, usize> = BTreeMap::new();
    for (_, a) in r.population() {
        for n in &a.natives {
            *counts.entry(n).or_insert(0) += 1;
        }
    }
    let mut out: BTreeMap<NativeCategory, Vec<(MethodRef, usize)>> = BTreeMap::new();
    for (n, c) in counts {
        if let Some(cat) = db.category_of(n) {
            out.entry(cat).or_default().push((n.clone(), c));
        }
    }
    for rows in out.values_mut() {
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows.truncate(k);
    }
    out
}

/// Methods of the population that call I/O, with their categories: the
/// candidates for an I/O marker annotation.
pub fn io_candidates<R: AttributedMethods + ?Sized>(r: &R) -> Vec<(MethodRef, CategoryMask)> {
    let mode = r.mode();
    r.population()
        .into_iter()
        .filter(|(_, a)| a.calls_io(mode))
        .map(|(m, a)| (m.clone(), a.mask))
        .collect()
}
