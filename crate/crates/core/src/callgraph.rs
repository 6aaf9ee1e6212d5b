//! Entry points, source methods and whole-program call graphs.
//!
//! Graphs are built on the fly from the entry points: only methods reached
//! so far contribute call sites. Static and special sites link to their
//! resolved declaration. Virtual and interface sites are dispatched over
//! subtypes of the static receiver type, either all of them (CHA) or only
//! those instantiated by a `new` in some reachable method (RTA). Every
//! `invokedynamic` links to the single [`MethodRef::dynamic_invoke`]
//! pseudo-node. Static initializers are never traversed.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::corpus::Corpus;
use crate::model::{CallKind, ClassModel, MethodModel, MethodRef, Origin};

const TEST_CASE: &str = "junit/framework/TestCase";
const JUNIT4_TEST: &str = "org/junit/Test";
const JUNIT5_TEST: &str = "org/junit/jupiter/api/Test";
const MAIN_DESCRIPTOR: &str = "([Ljava/lang/String;)V";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntryKind {
    Main,
    JUnit3,
    JUnit4,
    JUnit5,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntryPoint {
    pub method: MethodRef,
    pub kind: EntryKind,
}

fn extends_test_case(corpus: &Corpus, class: &ClassModel) -> bool {
    corpus
        .superclass_chain(&class.name)
        .any(|c| c.name == TEST_CASE || c.super_name.as_deref() == Some(TEST_CASE))
}

fn entry_kind(corpus: &Corpus, class: &ClassModel, m: &MethodModel) -> Option<EntryKind> {
    let r = &m.method;
    if r.method_name == "main"
        && r.descriptor == MAIN_DESCRIPTOR
        && m.flags.is_static()
        && m.flags.is_public()
    {
        return Some(EntryKind::Main);
    }
    if m.has_annotation(JUNIT5_TEST) {
        return Some(EntryKind::JUnit5);
    }
    if m.has_annotation(JUNIT4_TEST) {
        return Some(EntryKind::JUnit4);
    }
    if r.method_name.starts_with("test")
        && r.descriptor == "()V"
        && m.flags.is_public()
        && !m.flags.is_static()
        && extends_test_case(corpus, class)
    {
        return Some(EntryKind::JUnit3);
    }
    None
}

/// `main` methods and JUnit 3/4/5 test methods declared in project classes,
/// sorted by method.
pub fn find_entry_points(corpus: &Corpus) -> Vec<EntryPoint> {
    let mut out: Vec<EntryPoint> = corpus
        .classes()
        .filter(|c| c.origin == Origin::Project && !c.is_module_info())
        .flat_map(|c| {
            c.methods.iter().filter_map(move |m| {
                entry_kind(corpus, c, m).map(|kind| EntryPoint { method: m.method.clone(), kind })
            })
        })
        .collect();
    out.sort();
    out
}

/// A method written by the project's developers: project origin, not
/// synthetic or bridge, not a static initializer.
pub fn is_source_method(m: &MethodModel) -> bool {
    m.origin == Origin::Project
        && !m.flags.is_synthetic()
        && !m.flags.is_bridge()
        && !m.method.is_static_initializer()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Algorithm {
    #[default]
    Cha,
    Rta,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cha => "cha",
            Algorithm::Rta => "rta",
        }
    }
}

/// Directed call graph with sorted, deduplicated nodes and successor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    nodes: Vec<MethodRef>,
    succ: Vec<Vec<u32>>,
    entries: Vec<u32>,
    pub algorithm: Algorithm,
}

impl CallGraph {
    /// Builds a graph from explicit parts. Endpoints of edges and entry
    /// points are added as nodes.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = MethodRef>,
        edges: impl IntoIterator<Item = (MethodRef, MethodRef)>,
        entries: impl IntoIterator<Item = MethodRef>,
        algorithm: Algorithm,
    ) -> Self {
        let edges: Vec<(MethodRef, MethodRef)> = edges.into_iter().collect();
        let entries: Vec<MethodRef> = entries.into_iter().collect();
        let mut all: BTreeSet<MethodRef> = nodes.into_iter().collect();
        all.extend(entries.iter().cloned());
        for (a, b) in &edges {
            all.insert(a.clone());
            all.insert(b.clone());
        }
        let nodes: Vec<MethodRef> = all.into_iter().collect();
        let idx = |m: &MethodRef| nodes.binary_search(m).unwrap() as u32;
        let mut succ = alloc::vec![Vec::new(); nodes.len()];
        for (a, b) in &edges {
            succ[idx(a) as usize].push(idx(b));
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let mut entry_ids: Vec<u32> = entries.iter().map(idx).collect();
        entry_ids.sort_unstable();
        entry_ids.dedup();
        CallGraph { nodes, succ, entries: entry_ids, algorithm }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[MethodRef] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &MethodRef {
        &self.nodes[id]
    }

    pub fn index_of(&self, m: &MethodRef) -> Option<usize> {
        self.nodes.binary_search(m).ok()
    }

    pub fn contains(&self, m: &MethodRef) -> bool {
        self.index_of(m).is_some()
    }

    pub fn successors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[id].iter().map(|&s| s as usize)
    }

    pub fn entry_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&e| e as usize)
    }

    pub fn entry_points(&self) -> impl Iterator<Item = &MethodRef> {
        self.entry_ids().map(|i| &self.nodes[i])
    }

    pub fn edges(&self) -> impl Iterator<Item = (&MethodRef, &MethodRef)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(a, ss)| ss.iter().map(move |&b| (&self.nodes[a], &self.nodes[b as usize])))
    }

    pub fn has_edge(&self, from: &MethodRef, to: &MethodRef) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.succ[a].binary_search(&(b as u32)).is_ok(),
            _ => false,
        }
    }

    /// Line dump: `entry<TAB>ref` and `edge<TAB>caller<TAB>callee`, sorted.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .entry_points()
            .map(|e| alloc::format!("entry\t{e}"))
            .chain(self.edges().map(|(a, b)| alloc::format!("edge\t{a}\t{b}")))
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnresolvedReason {
    /// the target's class is not in the corpus
    MissingClass,
    /// the class is present but declares or inherits no such method
    MissingMethod,
}

/// A call site whose target could not be resolved against the corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnresolvedTarget {
    pub caller: MethodRef,
    pub target: MethodRef,
    pub kind: CallKind,
    pub reason: UnresolvedReason,
}

#[derive(Debug, Clone)]
pub struct GraphBuild {
    pub graph: CallGraph,
    /// sorted and deduplicated
    pub unresolved: Vec<UnresolvedTarget>,
}

struct VirtualSite {
    caller: u32,
    receiver: String,
    name: String,
    descriptor: String,
}

struct Builder<'c> {
    corpus: &'c Corpus,
    algorithm: Algorithm,
    ids: BTreeMap<MethodRef, u32>,
    nodes: Vec<MethodRef>,
    edges: BTreeSet<(u32, u32)>,
    queue: VecDeque<u32>,
    unresolved: BTreeSet<UnresolvedTarget>,
    instantiated: BTreeSet<String>,
    /// RTA: virtual sites seen so far, grouped by receiver class
    sites_by_receiver: BTreeMap<String, Vec<VirtualSite>>,
    dispatch_cache: BTreeMap<(String, String, String), Option<MethodRef>>,
    concrete_subtypes: BTreeMap<String, Vec<String>>,
}

fn is_concrete(c: &ClassModel) -> bool {
    !c.flags.is_interface() && !c.flags.is_abstract()
}

/// Array receivers dispatch like `java/lang/Object`.
fn receiver_class(name: &str) -> &str {
    if name.starts_with('[') {
        "java/lang/Object"
    } else {
        name
    }
}

enum Resolution<'c> {
    Found(&'c MethodModel),
    MissingClass,
    MissingMethod,
}

impl<'c> Builder<'c> {
    fn intern(&mut self, m: &MethodRef) -> (u32, bool) {
        if let Some(&id) = self.ids.get(m) {
            return (id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(m.clone());
        self.ids.insert(m.clone(), id);
        (id, true)
    }

    fn link(&mut self, caller: u32, callee: &MethodRef) {
        let (id, fresh) = self.intern(callee);
        self.edges.insert((caller, id));
        if fresh {
            self.queue.push_back(id);
        }
    }

    /// Method resolution: superclass chain, then superinterfaces, then
    /// signature-polymorphic natives (`MethodHandle.invoke` and friends).
    fn resolve(&self, target: &MethodRef) -> Resolution<'c> {
        let class = receiver_class(&target.class_name);
        if !self.corpus.contains_class(class) {
            return Resolution::MissingClass;
        }
        let (name, desc) = target.signature();
        for c in self.corpus.superclass_chain(class) {
            if let Some(m) = c.find_method(name, desc) {
                return Resolution::Found(m);
            }
        }
        let interfaces = self.corpus.class(class).filter(|c| c.flags.is_interface());
        for c in interfaces.into_iter().chain(self.corpus.superinterfaces(class)) {
            if let Some(m) = c.find_method(name, desc) {
                return Resolution::Found(m);
            }
        }
        for c in self.corpus.superclass_chain(class) {
            if let Some(m) = c.methods.iter().find(|m| {
                m.method.method_name == name
                    && m.flags.is_native()
                    && m.flags.is_varargs()
                    && m.method.descriptor == "([Ljava/lang/Object;)Ljava/lang/Object;"
                    && matches!(c.name.as_str(), "java/lang/invoke/MethodHandle" | "java/lang/invoke/VarHandle")
            }) {
                return Resolution::Found(m);
            }
        }
        Resolution::MissingMethod
    }

    /// Selects the implementation a receiver of exact class `class` runs.
    fn dispatch(&mut self, class: &str, name: &str, descriptor: &str) -> Option<MethodRef> {
        let key = (class.to_string(), name.to_string(), descriptor.to_string());
        if let Some(hit) = self.dispatch_cache.get(&key) {
            return hit.clone();
        }
        let mut found = None;
        let mut blocked = false;
        for c in self.corpus.superclass_chain(class) {
            if let Some(m) = c.find_method(name, descriptor) {
                if m.flags.is_static() || (m.flags.is_private() && c.name != class) {
                    continue;
                }
                if m.flags.is_abstract() {
                    blocked = true;
                } else {
                    found = Some(m.method.clone());
                }
                break;
            }
        }
        if found.is_none() && !blocked {
            found = self
                .corpus
                .superinterfaces(class)
                .into_iter()
                .filter_map(|i| i.find_method(name, descriptor))
                .find(|m| !m.flags.is_abstract() && !m.flags.is_static() && !m.flags.is_private())
                .map(|m| m.method.clone());
        }
        self.dispatch_cache.insert(key, found.clone());
        found
    }

    fn concrete_subtypes(&mut self, class: &str) -> Vec<String> {
        if let Some(v) = self.concrete_subtypes.get(class) {
            return v.clone();
        }
        let v: Vec<String> = self
            .corpus
            .subtypes_inclusive(class)
            .into_iter()
            .filter(|c| is_concrete(c))
            .map(|c| c.name.clone())
            .collect();
        self.concrete_subtypes.insert(class.to_string(), v.clone());
        v
    }

    fn unresolved(&mut self, caller: u32, target: &MethodRef, kind: CallKind, reason: UnresolvedReason) {
        self.unresolved.insert(UnresolvedTarget {
            caller: self.nodes[caller as usize].clone(),
            target: target.clone(),
            kind,
            reason,
        });
    }

    fn process(&mut self, id: u32) {
        let corpus = self.corpus;
        let Some(model) = corpus.method(&self.nodes[id as usize]) else {
            return;
        };

        if self.algorithm == Algorithm::Rta {
            let fresh: Vec<String> = model
                .new_types
                .iter()
                .filter(|t| self.instantiated.insert((*t).clone()))
                .cloned()
                .collect();
            for t in fresh {
                self.on_instantiated(&t);
            }
        }

        for site in &model.call_sites {
            let target = &site.target;
            match site.kind {
                CallKind::Dynamic => self.link(id, &MethodRef::dynamic_invoke()),
                CallKind::Static | CallKind::Special => match self.resolve(target) {
                    Resolution::Found(m) => {
                        if !m.method.is_static_initializer() {
                            self.link(id, &m.method)
                        }
                    }
                    Resolution::MissingClass => {
                        self.unresolved(id, target, site.kind, UnresolvedReason::MissingClass)
                    }
                    Resolution::MissingMethod => {
                        self.unresolved(id, target, site.kind, UnresolvedReason::MissingMethod)
                    }
                },
                CallKind::Virtual | CallKind::Interface => {
                    let resolved = match self.resolve(target) {
                        Resolution::Found(m) => m,
                        Resolution::MissingClass => {
                            self.unresolved(id, target, site.kind, UnresolvedReason::MissingClass);
                            continue;
                        }
                        Resolution::MissingMethod => {
                            self.unresolved(id, target, site.kind, UnresolvedReason::MissingMethod);
                            continue;
                        }
                    };
                    let polymorphic = resolved.method.descriptor != target.descriptor;
                    if resolved.flags.is_private() || resolved.flags.is_static() || polymorphic {
                        self.link(id, &resolved.method);
                        continue;
                    }
                    let receiver = receiver_class(&target.class_name).to_string();
                    let (name, desc) = (resolved.method.method_name.clone(), resolved.method.descriptor.clone());
                    if self.algorithm == Algorithm::Cha && !resolved.flags.is_abstract() {
                        self.link(id, &resolved.method);
                    }
                    for sub in self.concrete_subtypes(&receiver) {
                        if self.algorithm == Algorithm::Rta && !self.instantiated.contains(&sub) {
                            continue;
                        }
                        if let Some(m) = self.dispatch(&sub, &name, &desc) {
                            self.link(id, &m);
                        }
                    }
                    if self.algorithm == Algorithm::Rta {
                        self.sites_by_receiver.entry(receiver.clone()).or_default().push(VirtualSite {
                            caller: id,
                            receiver,
                            name,
                            descriptor: desc,
                        });
                    }
                }
            }
        }
    }

    /// RTA: a newly instantiated type may be the receiver of any earlier
    /// virtual site typed with one of its supertypes.
    fn on_instantiated(&mut self, class: &str) {
        let corpus = self.corpus;
        let Some(model) = corpus.class(class) else { return };
        if !is_concrete(model) {
            return;
        }
        let mut supertypes: Vec<&str> = corpus.superclass_chain(class).map(|c| c.name.as_str()).collect();
        supertypes.extend(corpus.superinterfaces(class).into_iter().map(|c| c.name.as_str()));
        let mut pending = Vec::new();
        for sup in supertypes {
            if let Some(sites) = self.sites_by_receiver.get(sup) {
                for s in sites {
                    debug_assert_eq!(s.receiver, sup);
                    pending.push((s.caller, s.name.clone(), s.descriptor.clone()));
                }
            }
        }
        for (caller, name, desc) in pending {
            if let Some(m) = self.dispatch(class, &name, &desc) {
                self.link(caller, &m);
            }
        }
    }

    fn finish(self, entry_ids: Vec<u32>) -> GraphBuild {
        // renumber into sorted order
        let mut order: Vec<u32> = (0..self.nodes.len() as u32).collect();
        order.sort_by(|a, b| self.nodes[*a as usize].cmp(&self.nodes[*b as usize]));
        let mut rank = alloc::vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old as usize] = new as u32;
        }
        let mut succ = alloc::vec![Vec::new(); order.len()];
        for &(a, b) in &self.edges {
            succ[rank[a as usize] as usize].push(rank[b as usize]);
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        let mut entries: Vec<u32> = entry_ids.iter().map(|&e| rank[e as usize]).collect();
        entries.sort_unstable();
        entries.dedup();
        let mut nodes = self.nodes;
        let mut slots: Vec<Option<MethodRef>> = nodes.drain(..).map(Some).collect();
        let nodes: Vec<MethodRef> = order.iter().map(|&o| slots[o as usize].take().unwrap()).collect();
        GraphBuild {
            graph: CallGraph { nodes, succ, entries, algorithm: self.algorithm },
            unresolved: self.unresolved.into_iter().collect(),
        }
    }
}

/// Builds the call graph reachable from `entries`.
pub fn build_call_graph(corpus: &Corpus, entries: &[EntryPoint], algorithm: Algorithm) -> GraphBuild {
    let mut b = Builder {
        corpus,
        algorithm,
        ids: BTreeMap::new(),
        nodes: Vec::new(),
        edges: BTreeSet::new(),
        queue: VecDeque::new(),
        unresolved: BTreeSet::new(),
        instantiated: BTreeSet::new(),
        sites_by_receiver: BTreeMap::new(),
        dispatch_cache: BTreeMap::new(),
        concrete_subtypes: BTreeMap::new(),
    };
    let mut sorted: Vec<&EntryPoint> = entries.iter().collect();
    sorted.sort();
    let mut entry_ids = Vec::new();
    for e in sorted {
        if e.method.is_static_initializer() {
            continue;
        }
        let (id, fresh) = b.intern(&e.method);
        entry_ids.push(id);
        if fresh {
            b.queue.push_back(id);
        }
    }
    while let Some(id) = b.queue.pop_front() {
        b.process(id);
    }
    b.finish(entry_ids)
}
