//! Execution traces and dynamic native attribution.
//!
//! # Trace format
//!
//! UTF-8, one record per line, fields separated by whitespace:
//!
//! ```text
//! # comment
//! E <thread> <class> <name> <descriptor>
//! N <thread> <k>
//! F <class> <name> <descriptor>      (exactly k lines, innermost first)
//! ```
//!
//! `E` records a method entry. `N` records a call to a native method along
//! with the full call stack at that moment; the first `F` frame is the
//! native itself.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::iter::Peekable;
use core::str::Lines;

use crate::corpus::Corpus;
use crate::model::{MethodFlags, MethodRef, MethodRefError, Origin};
use crate::natives::{AnalysisMode, CategoryDb, NativeCategory};
use crate::reach::{list, pct, AttributedMethods, Attribution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Entry { thread: u64, method: MethodRef },
    /// `stack[0]` is the native method itself.
    NativeCall { thread: u64, stack: Vec<MethodRef> },
}

impl TraceEvent {
    /// Builds a native-call event; `None` if `stack` is empty.
    pub fn native_call(thread: u64, stack: Vec<MethodRef>) -> Option<Self> {
        (!stack.is_empty()).then_some(TraceEvent::NativeCall { thread, stack })
    }

    pub fn thread(&self) -> u64 {
        match self {
            TraceEvent::Entry { thread, .. } | TraceEvent::NativeCall { thread, .. } => *thread,
        }
    }

    /// Writes the event in trace-file syntax, trailing newline included.
    pub fn to_line(&self) -> String {
        let mut out = String::new();
        match self {
            TraceEvent::Entry { thread, method } => {
                out = alloc::format!(
                    "E {thread} {} {} {}\n",
                    method.class_name, method.method_name, method.descriptor
                );
            }
            TraceEvent::NativeCall { thread, stack } => {
                out.push_str(&alloc::format!("N {thread} {}\n", stack.len()));
                for f in stack {
                    out.push_str(&alloc::format!("F {} {} {}\n", f.class_name, f.method_name, f.descriptor));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {kind}")]
pub struct TraceError {
    /// 1-based line number
    pub line: usize,
    pub kind: TraceErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceErrorKind {
    #[error("unknown record tag `{0}`")]
    UnknownTag(String),
    #[error("`{tag}` record needs {expected} fields, found {found}")]
    FieldCount { tag: char, expected: usize, found: usize },
    #[error("bad number `{0}`")]
    BadNumber(String),
    #[error("native call with no stack frames")]
    EmptyStack,
    #[error("{0}")]
    BadMethod(MethodRefError),
    #[error("expected {expected} stack frames, found {found}")]
    MissingFrames { expected: usize, found: usize },
    #[error("stack frame outside a native-call record")]
    StrayFrame,
}

/// Lazy parser over a trace; see [`parse_trace`].
pub struct TraceParser<'a> {
    lines: Peekable<core::iter::Enumerate<Lines<'a>>>,
}

/// Parses trace text lazily, yielding events in file order. A malformed
/// record yields an error and parsing resumes on the next line.
pub fn parse_trace(text: &str) -> TraceParser<'_> {
    TraceParser { lines: text.lines().enumerate().peekable() }
}

fn is_skippable(l: &str) -> bool {
    let t = l.trim();
    t.is_empty() || t.starts_with('#')
}

fn method_fields(tag: char, fields: &[&str], expected: usize, line: usize) -> Result<MethodRef, TraceError> {
    let err = |kind| TraceError { line, kind };
    if fields.len() != expected {
        return Err(err(TraceErrorKind::FieldCount { tag, expected, found: fields.len() }));
    }
    let n = fields.len();
    MethodRef::new(fields[n - 3], fields[n - 2], fields[n - 1]).map_err(|e| err(TraceErrorKind::BadMethod(e)))
}

fn number<T: core::str::FromStr>(s: &str, line: usize) -> Result<T, TraceError> {
    s.parse().map_err(|_| TraceError { line, kind: TraceErrorKind::BadNumber(s.to_string()) })
}

impl TraceParser<'_> {
    fn native_call(&mut self, line: usize, fields: &[&str]) -> Result<TraceEvent, TraceError> {
        if fields.len() != 3 {
            return Err(TraceError {
                line,
                kind: TraceErrorKind::FieldCount { tag: 'N', expected: 3, found: fields.len() },
            });
        }
        let thread = number(fields[1], line)?;
        let k: usize = number(fields[2], line)?;
        if k == 0 {
            return Err(TraceError { line, kind: TraceErrorKind::EmptyStack });
        }
        let mut stack = Vec::with_capacity(k);
        while stack.len() < k {
            // comments may sit between frames
            while self.lines.peek().is_some_and(|(_, l)| is_skippable(l)) {
                self.lines.next();
            }
            let missing = |at| TraceError {
                line: at,
                kind: TraceErrorKind::MissingFrames { expected: k, found: stack.len() },
            };
            let Some(&(i, l)) = self.lines.peek() else {
                return Err(missing(line));
            };
            let fields: Vec<&str> = l.split_ascii_whitespace().collect();
            if fields[0] != "F" {
                // leave the line for the next call
                return Err(missing(i + 1));
            }
            self.lines.next();
            stack.push(method_fields('F', &fields, 4, i + 1)?);
        }
        Ok(TraceEvent::NativeCall { thread, stack })
    }
}

impl Iterator for TraceParser<'_> {
    type Item = Result<TraceEvent, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (i, l) = self.lines.next()?;
            if is_skippable(l) {
                continue;
            }
            let line = i + 1;
            let fields: Vec<&str> = l.split_ascii_whitespace().collect();
            return Some(match fields[0] {
                "E" => method_fields('E', &fields, 5, line).and_then(|method| {
                    Ok(TraceEvent::Entry { thread: number(fields[1], line)?, method })
                }),
                "N" => self.native_call(line, &fields),
                "F" => Err(TraceError { line, kind: TraceErrorKind::StrayFrame }),
                other => Err(TraceError { line, kind: TraceErrorKind::UnknownTag(other.to_string()) }),
            });
        }
    }
}

/// Source of origin and flags for methods named in a trace.
pub trait MethodMeta {
    fn lookup(&self, method: &MethodRef) -> Option<(Origin, MethodFlags)>;
}

impl MethodMeta for Corpus {
    fn lookup(&self, method: &MethodRef) -> Option<(Origin, MethodFlags)> {
        self.method(method).map(|m| (m.origin, m.flags))
    }
}

impl MethodMeta for BTreeMap<MethodRef, (Origin, MethodFlags)> {
    fn lookup(&self, method: &MethodRef) -> Option<(Origin, MethodFlags)> {
        self.get(method).copied()
    }
}

/// Methods a trace shows as executed, with the natives each had on its stack.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynResult {
    pub executed: BTreeMap<MethodRef, Attribution>,
    /// Methods named by the trace but absent from the corpus metadata;
    /// excluded from attribution.
    pub unknown: BTreeSet<MethodRef>,
}

impl DynResult {
    pub fn calls_io(&self, m: &MethodRef) -> Option<bool> {
        self.executed.get(m).map(|a| a.calls_io(AnalysisMode::Dynamic))
    }

    /// Union of executed sets and per-method attributions.
    pub fn merge(&mut self, other: &DynResult) {
        for (m, a) in &other.executed {
            self.executed.entry(m.clone()).or_default().merge(a);
        }
        self.unknown.extend(other.unknown.iter().cloned());
    }
}

impl AttributedMethods for DynResult {
    fn mode(&self) -> AnalysisMode {
        AnalysisMode::Dynamic
    }

    fn population(&self) -> Vec<(&MethodRef, &Attribution)> {
        self.executed.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttributeError {
    #[error("traced native methods missing from the category database: {}", list(.0))]
    UncataloguedNative(Vec<MethodRef>),
}

/// Excludes static initializers, runtime classes, synthetic and abstract methods.
fn counts_as_executed(method: &MethodRef, origin: Origin, flags: MethodFlags) -> bool {
    !method.is_static_initializer() && origin != Origin::Runtime && !flags.is_synthetic() && !flags.is_abstract()
}

/// Marks every non-excluded frame on a native call's stack as a caller of
/// that native. Each event is handled on its own, so event order and
/// duplication do not matter.
pub fn attribute<M: MethodMeta + ?Sized>(
    events: impl IntoIterator<Item = TraceEvent>,
    db: &CategoryDb,
    meta: &M,
) -> Result<DynResult, AttributeError> {
    let mut r = DynResult::default();
    let mut uncatalogued = BTreeSet::new();
    let admit = |r: &mut DynResult, m: &MethodRef| -> bool {
        match meta.lookup(m) {
            None => {
                r.unknown.insert(m.clone());
                false
            }
            Some((origin, flags)) => {
                let ok = counts_as_executed(m, origin, flags);
                if ok && !r.executed.contains_key(m) {
                    r.executed.insert(m.clone(), Attribution::default());
                }
                ok
            }
        }
    };
    for event in events {
        match event {
            TraceEvent::Entry { method, .. } => {
                admit(&mut r, &method);
            }
            TraceEvent::NativeCall { stack, .. } => {
                let native = &stack[0];
                let Some(category) = db.get(native) else {
                    uncatalogued.insert(native.clone());
                    continue;
                };
                for frame in &stack {
                    if admit(&mut r, frame) {
                        let a = r.executed.get_mut(frame).expect("admitted frame");
                        a.natives.insert(native.clone());
                        a.mask.insert(category);
                    }
                }
            }
        }
    }
    if !uncatalogued.is_empty() {
        return Err(AttributeError::UncataloguedNative(uncatalogued.into_iter().collect()));
    }
    Ok(r)
}

/// Summary over executed methods (dynamic policy).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DynSummary {
    pub executed: usize,
    pub calls_native: usize,
    pub calls_io: usize,
    /// indexed like [`NativeCategory::ALL`]
    pub per_category: [usize; 7],
}

impl DynSummary {
    pub fn calls_native_pct(&self) -> Option<f64> {
        pct(self.calls_native, self.executed)
    }
    pub fn calls_io_pct(&self) -> Option<f64> {
        pct(self.calls_io, self.executed)
    }
    pub fn category_pct(&self, c: NativeCategory) -> Option<f64> {
        pct(self.per_category[c as usize], self.executed)
    }
}

pub fn summarize_dynamic(r: &DynResult) -> DynSummary {
    let mut s = DynSummary { executed: r.executed.len(), ..Default::default() };
    for a in r.executed.values() {
        s.calls_native += a.calls_native() as usize;
        s.calls_io += a.calls_io(AnalysisMode::Dynamic) as usize;
        for c in a.mask.iter() {
            s.per_category[c as usize] += 1;
        }
    }
    s
}
