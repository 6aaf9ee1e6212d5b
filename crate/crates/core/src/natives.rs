//! Native-method taxonomy, the category database and the I/O policy.
//!
//! # Database format
//!
//! UTF-8 text, one native per line, four TAB-separated fields:
//!
//! ```text
//! # runtime: temurin-17.0.6+10 linux-x64
//! # source: manual categorization
//! java/io/FileInputStream	readBytes	([BII)I	files
//! ```
//!
//! Blank lines and lines starting with `#` are ignored, except that
//! `# runtime:` and `# source:` comment lines populate [`DbMeta`].
#![allow(clippy::tabs_in_doc_comments)]

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use crate::model::{ClassModel, MethodRef, MethodRefError};

/// The seven categories of JRE native methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NativeCategory {
    NonIo,
    Invocation,
    Desktop,
    Time,
    Files,
    Network,
    Os,
}

impl NativeCategory {
    pub const ALL: [NativeCategory; 7] = [
        NativeCategory::NonIo,
        NativeCategory::Invocation,
        NativeCategory::Desktop,
        NativeCategory::Time,
        NativeCategory::Files,
        NativeCategory::Network,
        NativeCategory::Os,
    ];

    pub fn token(self) -> &'static str {
        match self {
            NativeCategory::NonIo => "non-io",
            NativeCategory::Invocation => "invocation",
            NativeCategory::Desktop => "desktop",
            NativeCategory::Time => "time",
            NativeCategory::Files => "files",
            NativeCategory::Network => "network",
            NativeCategory::Os => "os",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.token() == token)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for NativeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalysisMode {
    Static,
    Dynamic,
}

/// Whether natives of `category` count as I/O under `mode`.
///
/// Reflective invocation can reach anything, so it is I/O for static
/// analysis. A dynamic trace already shows the concrete natives reached
/// through reflection, so there it is not.
pub fn is_io(category: NativeCategory, mode: AnalysisMode) -> bool {
    match category {
        NativeCategory::NonIo => false,
        NativeCategory::Invocation => mode == AnalysisMode::Static,
        NativeCategory::Desktop
        | NativeCategory::Time
        | NativeCategory::Files
        | NativeCategory::Network
        | NativeCategory::Os => true,
    }
}

/// A set of [`NativeCategory`] values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryMask(u8);

impl CategoryMask {
    pub const EMPTY: CategoryMask = CategoryMask(0);

    pub fn insert(&mut self, c: NativeCategory) {
        self.0 |= c.bit();
    }

    pub fn with(mut self, c: NativeCategory) -> Self {
        self.insert(c);
        self
    }

    pub fn contains(self, c: NativeCategory) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CategoryMask) -> CategoryMask {
        CategoryMask(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = NativeCategory> {
        NativeCategory::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    pub fn any_io(self, mode: AnalysisMode) -> bool {
        self.iter().any(|c| is_io(c, mode))
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl FromIterator<NativeCategory> for CategoryMask {
    fn from_iter<I: IntoIterator<Item = NativeCategory>>(iter: I) -> Self {
        let mut m = CategoryMask::EMPTY;
        for c in iter {
            m.insert(c);
        }
        m
    }
}

/// Comma-separated tokens in taxonomy order, empty string for no categories.
impl fmt::Display for CategoryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            f.write_str(c.token())?;
        }
        Ok(())
    }
}

impl FromStr for CategoryMask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| NativeCategory::from_token(t).ok_or_else(|| t.to_string()))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DbMeta {
    pub runtime_id: Option<String>,
    pub source: Option<String>,
}

/// Mapping from native method to its category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryDb {
    entries: BTreeMap<MethodRef, NativeCategory>,
    pub meta: DbMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct DbError {
    pub line: usize,
    pub kind: DbErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DbErrorKind {
    #[error("expected 4 tab-separated fields, found {0}")]
    FieldCount(usize),
    #[error("{0}")]
    BadMethod(MethodRefError),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("duplicate entry for {0}")]
    Duplicate(MethodRef),
}

impl CategoryDb {
    pub fn new(meta: DbMeta) -> Self {
        Self { entries: BTreeMap::new(), meta }
    }

    /// Adds an entry; returns the previous category if the key existed.
    pub fn insert(&mut self, method: MethodRef, category: NativeCategory) -> Option<NativeCategory> {
        self.entries.insert(method, category)
    }

    pub fn get(&self, method: &MethodRef) -> Option<NativeCategory> {
        self.entries.get(method).copied()
    }

    /// Like [`get`](Self::get), but the `invokedynamic` pseudo-node is always
    /// [`NativeCategory::Invocation`].
    pub fn category_of(&self, method: &MethodRef) -> Option<NativeCategory> {
        if method.is_dynamic_pseudo() {
            Some(NativeCategory::Invocation)
        } else {
            self.get(method)
        }
    }

    pub fn contains(&self, method: &MethodRef) -> bool {
        self.entries.contains_key(method)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MethodRef, NativeCategory)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &MethodRef> {
        self.entries.keys()
    }

    pub fn count(&self, category: NativeCategory) -> usize {
        self.entries.values().filter(|c| **c == category).count()
    }

    /// Entry counts indexed like [`NativeCategory::ALL`].
    pub fn counts(&self) -> [usize; 7] {
        let mut out = [0; 7];
        for c in self.entries.values() {
            out[*c as usize] += 1;
        }
        out
    }

    /// Serializes to the TSV format accepted by [`load_category_db`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        if let Some(r) = &self.meta.runtime_id {
            let _ = writeln!(out, "# runtime: {r}");
        }
        if let Some(s) = &self.meta.source {
            let _ = writeln!(out, "# source: {s}");
        }
        for (m, c) in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", m.class_name, m.method_name, m.descriptor, c);
        }
        out
    }
}

/// Parses the category database TSV.
pub fn load_category_db(text: &str) -> Result<CategoryDb, DbError> {
    let mut db = CategoryDb::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |kind| DbError { line, kind };
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() {
            continue;
        }
        if let Some(comment) = l.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("runtime:") {
                db.meta.runtime_id = Some(v.trim().to_string());
            } else if let Some(v) = comment.strip_prefix("source:") {
                db.meta.source = Some(v.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(DbErrorKind::FieldCount(fields.len())));
        }
        let method = MethodRef::new(fields[0], fields[1], fields[2])
            .map_err(|e| err(DbErrorKind::BadMethod(e)))?;
        let category = NativeCategory::from_token(fields[3])
            .ok_or_else(|| err(DbErrorKind::UnknownCategory(fields[3].to_string())))?;
        if db.entries.contains_key(&method) {
            return Err(err(DbErrorKind::Duplicate(method)));
        }
        db.entries.insert(method, category);
    }
    Ok(db)
}

/// Every native-flagged method, regardless of visibility, sorted.
pub fn extract_natives<'a>(classes: impl IntoIterator<Item = &'a ClassModel>) -> Vec<MethodRef> {
    let set: BTreeSet<MethodRef> = classes
        .into_iter()
        .flat_map(|c| c.methods.iter())
        .filter(|m| m.flags.is_native())
        .map(|m| m.method.clone())
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NativeDiff {
    /// found but missing from the database
    pub uncatalogued: Vec<MethodRef>,
    /// in the database but not found
    pub stale: Vec<MethodRef>,
}

pub fn diff_natives(found: &[MethodRef], db: &CategoryDb) -> NativeDiff {
    let found: BTreeSet<&MethodRef> = found.iter().collect();
    NativeDiff {
        uncatalogued: found.iter().filter(|m| !db.contains(m)).map(|m| (*m).clone()).collect(),
        stale: db.keys().filter(|m| !found.contains(m)).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn policy_table() {
        use AnalysisMode::*;
        use NativeCategory::*;
        assert!(is_io(Invocation, Static));
        assert!(!is_io(Invocation, Dynamic));
        assert!(!is_io(NonIo, Static));
        assert!(!is_io(NonIo, Dynamic));
        for c in [Desktop, Time, Files, Network, Os] {
            assert!(is_io(c, Static) && is_io(c, Dynamic));
        }
    }

    #[test]
    fn tokens_round_trip() {
        for c in NativeCategory::ALL {
            assert_eq!(NativeCategory::from_token(c.token()), Some(c));
        }
        assert_eq!(NativeCategory::from_token("gpu"), None);
    }

    #[test]
    fn mask_display_and_parse() {
        let m = CategoryMask::EMPTY.with(NativeCategory::Files).with(NativeCategory::Time);
        assert_eq!(m.to_string(), "time,files");
        assert_eq!("time,files".parse::<CategoryMask>().unwrap(), m);
        assert_eq!("".parse::<CategoryMask>().unwrap(), CategoryMask::EMPTY);
        assert!("time,gpu".parse::<CategoryMask>().is_err());
    }

    #[test]
    fn load_reads_meta_and_entries() {
        let text = "# runtime: jdk17 linux\n# source: test\n\n\
                    java/lang/System\tnanoTime\t()J\ttime\r\n\
                    # plain comment\n\
                    java/io/FileInputStream\tread0\t()I\tfiles\n";
        let db = load_category_db(text).unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.meta.runtime_id.as_deref(), Some("jdk17 linux"));
        assert_eq!(db.count(NativeCategory::Time), 1);
        let again = load_category_db(&db.to_tsv()).unwrap();
        assert_eq!(again, db);
    }

    #[test]
    fn comments_only_is_empty() {
        let db = load_category_db("# nothing\n\n#\n").unwrap();
        assert!(db.is_empty());
    }

    #[test]
    fn bad_records_carry_line_numbers() {
        let e = load_category_db("# h\njava/lang/X\tm\t()V\tgpu\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, DbErrorKind::UnknownCategory(ref t) if t == "gpu"));

        let e = load_category_db("a/B\tm\t()V\n").unwrap_err();
        assert_eq!(e.kind, DbErrorKind::FieldCount(3));

        let e = load_category_db("a/B\tm\t(V\tos\n").unwrap_err();
        assert!(matches!(e.kind, DbErrorKind::BadMethod(_)));

        let e = load_category_db("a/B\tm\t()V\tos\na/B\tm\t()V\tfiles\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, DbErrorKind::Duplicate(_)));
    }

    #[test]
    fn diff_partitions() {
        let a: MethodRef = "a/A.x()V".parse().unwrap();
        let b: MethodRef = "a/B.y()V".parse().unwrap();
        let c: MethodRef = "z/C.z()V".parse().unwrap();
        let mut db = CategoryDb::default();
        db.insert(a.clone(), NativeCategory::Os);
        db.insert(c.clone(), NativeCategory::Files);
        let d = diff_natives(&[b.clone(), a.clone()], &db);
        assert_eq!(d.uncatalogued, vec![b]);
        assert_eq!(d.stale, vec![c]);
        let same = diff_natives(&[a, "z/C.z()V".parse().unwrap()], &db);
        assert_eq!(same, NativeDiff::default());
    }

    #[test]
    fn dynamic_pseudo_node_is_invocation() {
        let db = CategoryDb::default();
        assert_eq!(db.category_of(&MethodRef::dynamic_invoke()), Some(NativeCategory::Invocation));
    }
}
