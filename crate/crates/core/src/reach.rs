//! Reachable source methods and the natives each of them can reach.
//!
//! Native sets are propagated once over the condensation of the call graph:
//! components are visited sinks first, and each component's set is the
//! union of its members' own natives and its successor components' sets.
//! Sets are bitsets over the graph's native nodes.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::callgraph::{is_source_method, CallGraph};
use crate::corpus::Corpus;
use crate::model::{MethodRef, Origin};
use crate::natives::{AnalysisMode, CategoryDb, CategoryMask, NativeCategory};
use crate::scc;

/// Natives attributed to one method and their categories.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Attribution {
    pub natives: BTreeSet<MethodRef>,
    pub mask: CategoryMask,
}

impl Attribution {
    pub fn calls_native(&self) -> bool {
        !self.mask.is_empty()
    }

    pub fn calls_io(&self, mode: AnalysisMode) -> bool {
        self.mask.any_io(mode)
    }

    pub fn merge(&mut self, other: &Attribution) {
        self.natives.extend(other.natives.iter().cloned());
        self.mask = self.mask.union(other.mask);
    }
}

/// A population of methods with native attributions, as consumed by the
/// report functions.
pub trait AttributedMethods {
    fn mode(&self) -> AnalysisMode;
    /// The methods that form the population (reachable source methods, or
    /// executed methods), sorted by method.
    fn population(&self) -> Vec<(&MethodRef, &Attribution)>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MethodReach {
    pub reachable: bool,
    pub attribution: Attribution,
}

impl MethodReach {
    pub fn calls_native(&self) -> bool {
        self.attribution.calls_native()
    }
    pub fn calls_io(&self) -> bool {
        self.attribution.calls_io(AnalysisMode::Static)
    }
}

/// Per source method: reachability and reachable natives (static policy).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReachabilityResult {
    pub methods: BTreeMap<MethodRef, MethodReach>,
}

impl ReachabilityResult {
    pub fn get(&self, m: &MethodRef) -> Option<&MethodReach> {
        self.methods.get(m)
    }

    /// One line per source method:
    /// `ref<TAB>reachable<TAB>mask<TAB>calls_native<TAB>calls_io`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (m, r) in &self.methods {
            let _ = writeln!(
                out,
                "{m}\t{}\t{}\t{}\t{}",
                r.reachable,
                r.attribution.mask,
                r.calls_native(),
                r.calls_io()
            );
        }
        out
    }
}

impl AttributedMethods for ReachabilityResult {
    fn mode(&self) -> AnalysisMode {
        AnalysisMode::Static
    }

    fn population(&self) -> Vec<(&MethodRef, &Attribution)> {
        self.methods
            .iter()
            .filter(|(_, r)| r.reachable)
            .map(|(m, r)| (m, &r.attribution))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReachError {
    #[error("reachable native methods missing from the category database: {}", list(.0))]
    UncataloguedNative(Vec<MethodRef>),
}

pub(crate) fn list(ms: &[MethodRef]) -> String {
    let mut s = String::new();
    for (i, m) in ms.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{m}");
    }
    s
}

/// Node ids reachable from the entry points (entry points included).
pub fn reachable_ids(g: &CallGraph) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for e in g.entry_ids() {
        if !seen[e] {
            seen[e] = true;
            queue.push_back(e);
        }
    }
    while let Some(v) = queue.pop_front() {
        for w in g.successors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn reachable_methods(g: &CallGraph) -> BTreeSet<MethodRef> {
    reachable_ids(g)
        .into_iter()
        .enumerate()
        .filter(|(_, r)| *r)
        .map(|(i, _)| g.node(i).clone())
        .collect()
}

struct BitSet {
    words: usize,
    bits: Vec<u64>,
}

impl BitSet {
    fn new(rows: usize, width: usize) -> Self {
        let words = width.div_ceil(64);
        Self { words, bits: vec![0; rows * words] }
    }
    fn set(&mut self, row: usize, bit: usize) {
        self.bits[row * self.words + bit / 64] |= 1 << (bit % 64);
    }
    fn or_into(&mut self, dst: usize, src: usize) {
        if dst == src {
            return;
        }
        for k in 0..self.words {
            self.bits[dst * self.words + k] |= self.bits[src * self.words + k];
        }
    }
    fn ones(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        let base = row * self.words;
        (0..self.words).flat_map(move |k| {
            let w = self.bits[base + k];
            (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| k * 64 + b)
        })
    }
}

/// Attributes reachable natives to every source method in `corpus`.
///
/// A graph node is a native if its declaration carries the native flag or
/// it is the `invokedynamic` pseudo-node (categorized as invocation).
pub fn natives_reachable(
    g: &CallGraph,
    corpus: &Corpus,
    db: &CategoryDb,
) -> Result<ReachabilityResult, ReachError> {
    let n = g.node_count();
    let mut native_ids: Vec<usize> = Vec::new();
    let mut native_cats: Vec<NativeCategory> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    let mut missing = Vec::new();
    for (i, node) in g.nodes().iter().enumerate() {
        let is_native =
            node.is_dynamic_pseudo() || corpus.method(node).is_some_and(|m| m.flags.is_native());
        if !is_native {
            continue;
        }
        match db.category_of(node) {
            Some(c) => {
                slot[i] = native_ids.len();
                native_ids.push(i);
                native_cats.push(c);
            }
            None => missing.push(node.clone()),
        }
    }
    let reach = reachable_ids(g);
    missing.retain(|m| g.index_of(m).is_some_and(|i| reach[i]));
    if !missing.is_empty() {
        return Err(ReachError::UncataloguedNative(missing));
    }

    let comps = scc::tarjan(n, |v| g.successors(v));
    let mut sets = BitSet::new(comps.members.len(), native_ids.len());
    for (c, members) in comps.members.iter().enumerate() {
        for &v in members {
            if slot[v] != usize::MAX {
                sets.set(c, slot[v]);
            }
            for w in g.successors(v) {
                // successors in other components were finished earlier
                sets.or_into(c, comps.component_of[w]);
            }
        }
    }

    let mut result = ReachabilityResult::default();
    for m in corpus.methods().filter(|m| m.origin == Origin::Project && is_source_method(m)) {
        let mut r = MethodReach::default();
        if let Some(id) = g.index_of(&m.method).filter(|&id| reach[id]) {
            r.reachable = true;
            for k in sets.ones(comps.component_of[id]) {
                r.attribution.natives.insert(g.node(native_ids[k]).clone());
                r.attribution.mask.insert(native_cats[k]);
            }
        }
        result.methods.insert(m.method.clone(), r);
    }
    Ok(result)
}

/// Corpus-level static summary. Percentages are over reachable source methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StaticSummary {
    pub total_source_methods: usize,
    pub reachable: usize,
    pub calls_native: usize,
    pub calls_io: usize,
    /// indexed like [`NativeCategory::ALL`]
    pub per_category: [usize; 7],
}

pub(crate) fn pct(count: usize, of: usize) -> Option<f64> {
    (of > 0).then(|| count as f64 * 100.0 / of as f64)
}

impl StaticSummary {
    pub fn reachable_pct(&self) -> Option<f64> {
        pct(self.reachable, self.total_source_methods)
    }
    pub fn calls_native_pct(&self) -> Option<f64> {
        pct(self.calls_native, self.reachable)
    }
    pub fn calls_io_pct(&self) -> Option<f64> {
        pct(self.calls_io, self.reachable)
    }
    pub fn category_pct(&self, c: NativeCategory) -> Option<f64> {
        pct(self.per_category[c as usize], self.reachable)
    }

    /// Combines summaries of disjoint method populations.
    pub fn merge(&mut self, other: &StaticSummary) {
        self.total_source_methods += other.total_source_methods;
        self.reachable += other.reachable;
        self.calls_native += other.calls_native;
        self.calls_io += other.calls_io;
        for (a, b) in self.per_category.iter_mut().zip(other.per_category) {
            *a += b;
        }
    }
}

pub fn summarize_static(r: &ReachabilityResult) -> StaticSummary {
    let mut s = StaticSummary { total_source_methods: r.methods.len(), ..Default::default() };
    for (_, m) in r.methods.iter().filter(|(_, m)| m.reachable) {
        s.reachable += 1;
        s.calls_native += m.calls_native() as usize;
        s.calls_io += m.calls_io() as usize;
        for c in m.attribution.mask.iter() {
            s.per_category[c as usize] += 1;
        }
    }
    s
}
