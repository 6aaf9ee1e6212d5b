//! Static and dynamic analysis of which JVM methods can reach, or do reach,
//! input/output-performing native methods.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here works on
//! bytes and strings already in memory; reading JARs, directories and trace
//! files lives in the `ioscope` crate.
//!
//! Pipeline, static side:
//!
//! 1. [`classfile::parse_class`] turns class-file bytes into a [`ClassModel`].
//! 2. [`Corpus`] indexes project, dependency and runtime classes together.
//! 3. [`callgraph::find_entry_points`] and [`callgraph::build_call_graph`]
//!    produce a whole-program [`CallGraph`] (CHA or RTA).
//! 4. [`reach::natives_reachable`] attributes reachable natives and their
//!    [`NativeCategory`] to each source method.
//!
//! Dynamic side: [`trace::parse_trace`] and [`trace::attribute`] consume the
//! line-oriented trace format emitted by an instrumentation agent.
//!
//! [`report`] aggregates either result into lint findings, distributions,
//! size histograms and top-native rankings.

#![no_std]
#![warn(clippy::std_instead_of_alloc)]
#![warn(clippy::std_instead_of_core)]

extern crate alloc;

pub mod callgraph;
pub mod classfile;
pub mod corpus;
pub mod descriptor;
pub mod model;
pub mod natives;
pub mod reach;
pub mod report;
pub mod scc;
pub mod trace;

pub use callgraph::{Algorithm, CallGraph, EntryKind, EntryPoint, UnresolvedTarget};
pub use classfile::{parse_class, ClassFileError, MAX_SUPPORTED_MAJOR};
pub use corpus::Corpus;
pub use model::{
    CallKind, CallSite, ClassFlags, ClassModel, MethodFlags, MethodModel, MethodRef, Origin,
};
pub use natives::{AnalysisMode, CategoryDb, CategoryMask, DbError, NativeCategory};
pub use reach::{Attribution, ReachabilityResult, StaticSummary};
pub use trace::{DynResult, DynSummary, TraceError, TraceEvent};
