//! Whole-program class index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{ClassModel, MethodModel, MethodRef};

/// Project, dependency and runtime classes indexed by name.
///
/// When two classes share a name the one supplied first wins, mirroring a
/// classpath lookup; shadowed names are listed by [`Corpus::shadowed`].
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    classes: Vec<ClassModel>,
    by_name: BTreeMap<String, usize>,
    methods: BTreeMap<MethodRef, (usize, usize)>,
    direct_subtypes: BTreeMap<String, Vec<usize>>,
    shadowed: Vec<String>,
}

impl Corpus {
    pub fn new(classes: impl IntoIterator<Item = ClassModel>) -> Self {
        let mut corpus = Corpus::default();
        for class in classes {
            if class.is_module_info() {
                corpus.classes.push(class);
                continue;
            }
            if corpus.by_name.contains_key(&class.name) {
                corpus.shadowed.push(class.name.clone());
                continue;
            }
            let idx = corpus.classes.len();
            corpus.by_name.insert(class.name.clone(), idx);
            for (mi, m) in class.methods.iter().enumerate() {
                corpus.methods.entry(m.method.clone()).or_insert((idx, mi));
            }
            corpus.classes.push(class);
        }
        for (name, &idx) in &corpus.by_name {
            let class = &corpus.classes[idx];
            debug_assert_eq!(&class.name, name);
            for parent in class.super_name.iter().chain(class.interfaces.iter()) {
                corpus.direct_subtypes.entry(parent.clone()).or_default().push(idx);
            }
        }
        corpus
    }

    /// Every retained class in input order, `module-info` entries included.
    pub fn classes(&self) -> impl Iterator<Item = &ClassModel> {
        self.classes.iter()
    }

    pub fn class(&self, name: &str) -> Option<&ClassModel> {
        self.by_name.get(name).map(|&i| &self.classes[i])
    }

    pub fn contains_class(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn method(&self, method: &MethodRef) -> Option<&MethodModel> {
        self.methods.get(method).map(|&(c, m)| &self.classes[c].methods[m])
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodModel> {
        self.classes().filter(|c| !c.is_module_info()).flat_map(|c| c.methods.iter())
    }

    pub fn shadowed(&self) -> &[String] {
        &self.shadowed
    }

    /// `name` followed by its superclasses, as far as they are present.
    pub fn superclass_chain<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a ClassModel> + 'a {
        let mut next = self.class(name);
        let mut seen = BTreeSet::new();
        core::iter::from_fn(move || {
            let current = next.take()?;
            if !seen.insert(current.name.as_str()) {
                return None;
            }
            next = current.super_name.as_deref().and_then(|s| self.class(s));
            Some(current)
        })
    }

    /// Classes and interfaces directly extending or implementing `name`.
    pub fn direct_subtypes(&self, name: &str) -> impl Iterator<Item = &ClassModel> {
        self.direct_subtypes
            .get(name)
            .into_iter()
            .flatten()
            .map(|&i| &self.classes[i])
    }

    /// `name` and every transitive subtype present in the corpus, sorted by name.
    pub fn subtypes_inclusive(&self, name: &str) -> Vec<&ClassModel> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut out = Vec::new();
        let mut stack: Vec<&ClassModel> = self.class(name).into_iter().collect();
        while let Some(c) = stack.pop() {
            if !seen.insert(c.name.as_str()) {
                continue;
            }
            out.push(c);
            stack.extend(self.direct_subtypes(&c.name));
        }
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out
    }

    /// Whether `sub` is `sup` or transitively extends/implements it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut stack = alloc::vec![sub];
        while let Some(n) = stack.pop() {
            if n == sup {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            if let Some(c) = self.class(n) {
                stack.extend(c.super_name.as_deref());
                stack.extend(c.interfaces.iter().map(String::as_str));
            }
        }
        false
    }

    /// All superinterfaces of `name` (through superclasses too), breadth first.
    pub fn superinterfaces(&self, name: &str) -> Vec<&ClassModel> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue: alloc::collections::VecDeque<&str> = alloc::collections::VecDeque::new();
        for c in self.superclass_chain(name) {
            queue.extend(c.interfaces.iter().map(String::as_str));
        }
        while let Some(n) = queue.pop_front() {
            if !seen.insert(n) {
                continue;
            }
            if let Some(c) = self.class(n) {
                out.push(c);
                queue.extend(c.interfaces.iter().map(String::as_str));
            }
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::model::{CallKind, CallSite, ClassFlags, MethodFlags, Origin};
    use alloc::string::ToString;

    /// Tiny builder used by unit tests across the crate.
    pub struct ClassBuilder(pub ClassModel);

    impl ClassBuilder {
        pub fn new(name: &str, super_name: Option<&str>) -> Self {
            Self(ClassModel {
                name: name.to_string(),
                super_name: super_name.map(ToString::to_string),
                interfaces: Vec::new(),
                methods: Vec::new(),
                flags: ClassFlags(ClassFlags::PUBLIC),
                origin: Origin::Project,
                major_version: 61,
                module: None,
                referenced_classes: Vec::new(),
            })
        }

        pub fn interface(name: &str) -> Self {
            let mut b = Self::new(name, Some("java/lang/Object"));
            b.0.flags = ClassFlags(ClassFlags::PUBLIC | ClassFlags::INTERFACE | ClassFlags::ABSTRACT);
            b
        }

        pub fn implements(mut self, i: &str) -> Self {
            self.0.interfaces.push(i.to_string());
            self
        }

        pub fn origin(mut self, o: Origin) -> Self {
            self.0 = self.0.with_origin(o);
            self
        }

        /// Adds a method; `calls` are `(kind, "cls.name(desc)")`, `news` are instantiated classes.
        pub fn method(mut self, name: &str, desc: &str, flags: u16, calls: &[(CallKind, &str)], news: &[&str]) -> Self {
            let class = self.0.name.clone();
            let call_sites: Vec<CallSite> = calls
                .iter()
                .map(|(k, t)| CallSite { kind: *k, target: t.parse().unwrap() })
                .collect();
            let has_body = flags & (MethodFlags::NATIVE | MethodFlags::ABSTRACT) == 0;
            let units = call_sites.len() as u32;
            self.0.methods.push(MethodModel {
                method: MethodRef::new(class, name, desc).unwrap(),
                flags: MethodFlags(flags),
                origin: self.0.origin,
                call_sites,
                new_types: news.iter().map(|s| s.to_string()).collect(),
                code_size_bytes: if has_body { 1 + 3 * units } else { 0 },
                statement_units: units,
                instruction_count: if has_body { units + 1 } else { 0 },
                annotations: Vec::new(),
            });
            self
        }

        pub fn annotate_last(mut self, ann: &str) -> Self {
            self.0.methods.last_mut().unwrap().annotations.push(ann.to_string());
            self
        }

        pub fn build(self) -> ClassModel {
            self.0
        }
    }

    pub fn object() -> ClassModel {
        ClassBuilder::new("java/lang/Object", None)
            .origin(Origin::Runtime)
            .method("<init>", "()V", MethodFlags::PUBLIC, &[], &[])
            .build()
    }
}
