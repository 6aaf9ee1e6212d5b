mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use ioscope_core::callgraph::{build_call_graph, find_entry_points};
use ioscope_core::natives::{diff_natives, is_io, load_category_db};
use ioscope_core::reach::{natives_reachable, reachable_methods, summarize_static};
use ioscope_core::report::{histogram_from, top_natives, SizeMetric};
use ioscope_core::trace::{attribute, parse_trace};
use ioscope_core::{
    parse_class, AnalysisMode, Algorithm, CallKind, CategoryDb, ClassFlags, ClassModel, Corpus,
    DynResult, MethodFlags, MethodRef, NativeCategory, Origin, TraceEvent,
};
use proptest::prelude::*;

const PUBLIC: u16 = MethodFlags::PUBLIC;
const NATIVE_NAMES: [(&str, NativeCategory); 4] = [
    ("n0", NativeCategory::Time),
    ("n1", NativeCategory::Files),
    ("n2", NativeCategory::NonIo),
    ("n3", NativeCategory::Invocation),
];

/// Reads choices off a tape of random numbers; runs out gracefully.
struct Tape<'a>(&'a [u32], usize);

impl Tape<'_> {
    fn next(&mut self, bound: u32) -> u32 {
        let v = self.0.get(self.1).copied().unwrap_or(0);
        self.1 += 1;
        v % bound.max(1)
    }
    fn flip(&mut self) -> bool {
        self.next(2) == 1
    }
}

fn random_db() -> CategoryDb {
    let mut db = CategoryDb::default();
    for (n, c) in NATIVE_NAMES {
        db.insert(mref(&format!("rt/N.{n}()V")), c);
    }
    db
}

/// A small project: classes `p/C0..` with single inheritance among
/// themselves, interfaces `p/J0`, `p/J1`, a runtime class of natives, and
/// `p/C0.main` calling into all of it.
fn random_corpus(tape: &[u32]) -> Corpus {
    let mut t = Tape(tape, 0);
    let n = 1 + t.next(5) as usize;
    let mut classes = vec![object()];

    let mut natives = class("rt/N", Some("java/lang/Object"), Origin::Runtime);
    for (name, _) in NATIVE_NAMES {
        let m = method(&natives, name, "()V", PUBLIC | MethodFlags::STATIC | MethodFlags::NATIVE);
        natives.methods.push(m);
    }
    classes.push(natives);

    for j in 0..2 {
        let mut i = class(&format!("p/J{j}"), Some("java/lang/Object"), Origin::Project);
        i.flags = ClassFlags(ClassFlags::PUBLIC | ClassFlags::INTERFACE | ClassFlags::ABSTRACT);
        for name in ["a", "b"] {
            let m = method(&i, name, "()V", PUBLIC | MethodFlags::ABSTRACT);
            i.methods.push(m);
        }
        classes.push(i);
    }

    let random_calls = |t: &mut Tape, sites: &mut Vec<ioscope_core::CallSite>, news: &mut Vec<String>| {
        for _ in 0..t.next(4) {
            let target = match t.next(5) {
                0 => call(CallKind::Virtual, &format!("p/C{}.{}()V", t.next(n as u32), ["a", "b", "c"][t.next(3) as usize])),
                1 => call(CallKind::Interface, &format!("p/J{}.{}()V", t.next(2), ["a", "b"][t.next(2) as usize])),
                2 => call(CallKind::Static, &format!("p/C{}.s()V", t.next(n as u32))),
                3 => call(CallKind::Static, &format!("rt/N.n{}()V", t.next(4))),
                _ => call(CallKind::Dynamic, "<dynamic>.invoke([Ljava/lang/Object;)Ljava/lang/Object;"),
            };
            sites.push(target);
        }
        for _ in 0..t.next(2) {
            news.push(format!("p/C{}", t.next(n as u32)));
        }
    };

    for i in 0..n {
        let sup = if i > 0 && t.flip() { format!("p/C{}", t.next(i as u32)) } else { "java/lang/Object".into() };
        let mut c = class(&format!("p/C{i}"), Some(&sup), Origin::Project);
        let is_abstract = t.next(4) == 0;
        if is_abstract {
            c.flags.0 |= ClassFlags::ABSTRACT;
        }
        for j in 0..2 {
            if t.flip() {
                c.interfaces.push(format!("p/J{j}"));
            }
        }
        for name in ["a", "b", "c", "s"] {
            if !t.flip() {
                continue;
            }
            let mut flags = PUBLIC;
            if name == "s" {
                flags |= MethodFlags::STATIC;
            } else if is_abstract && t.next(3) == 0 {
                flags |= MethodFlags::ABSTRACT;
            }
            let mut m = method(&c, name, "()V", flags);
            if !m.flags.is_abstract() {
                random_calls(&mut t, &mut m.call_sites, &mut m.new_types);
            }
            c.methods.push(m);
        }
        if i == 0 {
            let mut m = method(&c, "main", "([Ljava/lang/String;)V", PUBLIC | MethodFlags::STATIC);
            random_calls(&mut t, &mut m.call_sites, &mut m.new_types);
            // make sure something gets called
            m.call_sites.push(call(CallKind::Virtual, &format!("p/C{}.a()V", t.next(n as u32))));
            c.methods.push(m);
        }
        classes.push(c);
    }
    Corpus::new(classes)
}

fn edges_of(g: &ioscope_core::CallGraph) -> BTreeSet<(MethodRef, MethodRef)> {
    g.edges().map(|(a, b)| (a.clone(), b.clone())).collect()
}

fn method_ref_strategy() -> impl Strategy<Value = MethodRef> {
    (
        prop::sample::select(vec!["a/B", "a/C", "java/io/X", "q/R$1"]),
        prop::sample::select(vec!["f", "g", "<init>", "read0"]),
        prop::sample::select(vec!["()V", "(I)J", "([BII)I", "(Ljava/lang/String;)V"]),
    )
        .prop_map(|(c, n, d)| MethodRef::new(c, n, d).unwrap())
}

fn category_strategy() -> impl Strategy<Value = NativeCategory> {
    prop::sample::select(NativeCategory::ALL.to_vec())
}

/// One instruction drawn from a menu covering every size class the scanner
/// must handle, including switches and `wide`.
fn instruction(pos: usize, choice: u8, arg: u8) -> Vec<u8> {
    match choice % 12 {
        0 => vec![0x00],
        1 => vec![0x03, 0x3b],
        2 => vec![0x84, 0, arg],
        3 => vec![0xb8, 0, 9],
        4 => vec![0x10, arg, 0x57],
        5 => vec![0x2a, 0xc2],
        6 => vec![0xc4, 0x84, 0, 1, 0, arg],
        7 => vec![0xc4, 0x15, 0, 2, 0x57],
        8 => {
            // iconst_0; tableswitch
            let mut v = vec![0x03, 0xaa];
            while !(pos + v.len()).is_multiple_of(4) {
                v.push(0);
            }
            for x in [0i32, 0, 1] {
                v.extend_from_slice(&x.to_be_bytes());
            }
            for _ in 0..2 {
                v.extend_from_slice(&0i32.to_be_bytes());
            }
            v
        }
        9 => {
            // iconst_0; lookupswitch with one pair
            let mut v = vec![0x03, 0xab];
            while !(pos + v.len()).is_multiple_of(4) {
                v.push(0);
            }
            for x in [0i32, 1, arg as i32, 0] {
                v.extend_from_slice(&x.to_be_bytes());
            }
            v
        }
        10 => vec![0x01, 0x4b],
        _ => vec![0x2b, 0x03, 0x03, 0x4f],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parse_is_deterministic_and_units_bounded(ops in prop::collection::vec((any::<u8>(), any::<u8>()), 0..40)) {
        let mut code = Vec::new();
        let mut expected_calls = 0;
        for (c, a) in ops {
            if c % 12 == 3 {
                expected_calls += 1;
            }
            let ins = instruction(code.len(), c, a);
            code.extend(ins);
        }
        code.push(0xb1);
        let bytes = class_with_code(&code);
        let a = parse_class(&bytes).unwrap();
        let b = parse_class(&bytes).unwrap();
        prop_assert_eq!(&a, &b);
        let m = &a.methods[0];
        prop_assert!(m.statement_units <= m.instruction_count);
        prop_assert_eq!(m.code_size_bytes as usize, code.len());
        prop_assert_eq!(m.call_sites.len(), expected_calls);
    }

    #[test]
    fn parse_never_panics_on_corruption(flips in prop::collection::vec((any::<usize>(), any::<u8>()), 1..6), cut in any::<usize>()) {
        let mut bytes = class_with_code(&[0x03, 0x3b, 0xb8, 0, 9, 0xb1]);
        for (i, v) in flips {
            let i = i % bytes.len();
            bytes[i] = v;
        }
        bytes.truncate(cut % (bytes.len() + 1));
        let a = parse_class(&bytes);
        prop_assert_eq!(a, parse_class(&bytes));
    }

    #[test]
    fn db_round_trip(entries in prop::collection::btree_map(method_ref_strategy(), category_strategy(), 0..20)) {
        let mut db = CategoryDb::default();
        for (m, c) in &entries {
            db.insert(m.clone(), *c);
        }
        db.meta.runtime_id = Some("test runtime".into());
        let again = load_category_db(&db.to_tsv()).unwrap();
        prop_assert_eq!(&again, &db);
        let got: BTreeMap<MethodRef, NativeCategory> = again.iter().map(|(m, c)| (m.clone(), c)).collect();
        prop_assert_eq!(got, entries);
    }

    #[test]
    fn diff_set_law(
        found in prop::collection::vec(method_ref_strategy(), 0..20),
        keys in prop::collection::btree_set(method_ref_strategy(), 0..20),
    ) {
        let mut db = CategoryDb::default();
        for k in &keys {
            db.insert(k.clone(), NativeCategory::Os);
        }
        let d = diff_natives(&found, &db);
        let found_set: BTreeSet<MethodRef> = found.iter().cloned().collect();
        let common: BTreeSet<MethodRef> = found_set.intersection(&keys).cloned().collect();
        let unc: BTreeSet<MethodRef> = d.uncatalogued.iter().cloned().collect();
        let stale: BTreeSet<MethodRef> = d.stale.iter().cloned().collect();
        prop_assert!(unc.is_disjoint(&common));
        prop_assert!(stale.is_disjoint(&common));
        prop_assert_eq!(unc.union(&common).cloned().collect::<BTreeSet<_>>(), found_set);
        prop_assert_eq!(stale.union(&common).cloned().collect::<BTreeSet<_>>(), keys);
        prop_assert!(d.uncatalogued.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(d.stale.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rta_is_contained_in_cha(tape in prop::collection::vec(any::<u32>(), 32..200)) {
        let corpus = random_corpus(&tape);
        let entries = find_entry_points(&corpus);
        let cha = build_call_graph(&corpus, &entries, Algorithm::Cha);
        let rta = build_call_graph(&corpus, &entries, Algorithm::Rta);
        let cha_edges = edges_of(&cha.graph);
        let rta_edges = edges_of(&rta.graph);
        prop_assert!(rta_edges.is_subset(&cha_edges), "{:?}", rta_edges.difference(&cha_edges).collect::<Vec<_>>());
        let cha_nodes: BTreeSet<&MethodRef> = cha.graph.nodes().iter().collect();
        prop_assert!(rta.graph.nodes().iter().all(|m| cha_nodes.contains(m)));
        for g in [&cha.graph, &rta.graph] {
            let entry_set: BTreeSet<&MethodRef> = g.entry_points().collect();
            let targets: BTreeSet<&MethodRef> = g.edges().map(|(_, b)| b).collect();
            for m in g.nodes() {
                prop_assert!(entry_set.contains(m) || targets.contains(m), "orphan node {}", m);
            }
        }
        let again = build_call_graph(&corpus, &entries, Algorithm::Cha);
        prop_assert_eq!(again.graph.dump(), cha.graph.dump());
    }

    #[test]
    fn static_attribution_invariants(tape in prop::collection::vec(any::<u32>(), 32..200)) {
        let corpus = random_corpus(&tape);
        let db = random_db();
        let entries = find_entry_points(&corpus);
        let g = build_call_graph(&corpus, &entries, Algorithm::Cha).graph;
        let r = natives_reachable(&g, &corpus, &db).unwrap();
        let reachable = reachable_methods(&g);
        for (m, mr) in &r.methods {
            prop_assert_eq!(mr.reachable, reachable.contains(m));
            if !mr.reachable {
                prop_assert!(mr.attribution.natives.is_empty());
            }
            prop_assert_eq!(mr.calls_native(), !mr.attribution.natives.is_empty());
            let by_set = mr.attribution.natives.iter()
                .any(|n| is_io(db.category_of(n).unwrap(), AnalysisMode::Static));
            prop_assert_eq!(mr.calls_io(), by_set);
        }
        for (a, b) in g.edges() {
            if let (Some(ra), Some(rb)) = (r.get(a), r.get(b)) {
                if ra.reachable && rb.reachable {
                    prop_assert!(rb.attribution.natives.is_subset(&ra.attribution.natives));
                }
            }
        }
        let s = summarize_static(&r);
        if let (Some(io), Some(nat)) = (s.calls_io_pct(), s.calls_native_pct()) {
            prop_assert!(io <= nat && nat <= 100.0);
        }
    }

    #[test]
    fn trace_attribution_is_order_and_duplicate_insensitive(
        t1 in prop::collection::vec((0u8..6, 0u8..4, 0u8..3), 0..12),
        t2 in prop::collection::vec((0u8..6, 0u8..4, 0u8..3), 0..12),
        interleave in prop::collection::vec(any::<bool>(), 24),
        dup in any::<prop::sample::Index>(),
    ) {
        let db = random_db();
        let frames = ["p/A.f()V", "p/A.g()V", "p/A.<clinit>()V", "p/A.access$0()V", "rt/R.h()V", "p/B.main([Ljava/lang/String;)V"];
        let mut meta: BTreeMap<MethodRef, (Origin, MethodFlags)> = BTreeMap::new();
        for (i, f) in frames.iter().enumerate() {
            let origin = if i == 4 { Origin::Runtime } else { Origin::Project };
            let flags = if i == 3 { MethodFlags(MethodFlags::SYNTHETIC) } else { MethodFlags(PUBLIC) };
            meta.insert(mref(f), (origin, flags));
        }
        let to_events = |thread: u64, spec: &[(u8, u8, u8)]| -> Vec<TraceEvent> {
            spec.iter().map(|&(f, n, depth)| {
                if depth == 0 {
                    TraceEvent::Entry { thread, method: mref(frames[f as usize]) }
                } else {
                    let mut stack = vec![mref(&format!("rt/N.n{n}()V"))];
                    for k in 0..depth {
                        stack.push(mref(frames[(f as usize + k as usize) % frames.len()]));
                    }
                    TraceEvent::native_call(thread, stack).unwrap()
                }
            }).collect()
        };
        let e1 = to_events(1, &t1);
        let e2 = to_events(2, &t2);
        let sequential: Vec<TraceEvent> = e1.iter().chain(e2.iter()).cloned().collect();
        let base = attribute(sequential.clone(), &db, &meta).unwrap();

        let (mut i, mut j) = (0, 0);
        let mut mixed = Vec::new();
        for &pick_first in interleave.iter().chain(std::iter::repeat(&true)) {
            if i == e1.len() && j == e2.len() {
                break;
            }
            if (pick_first && i < e1.len()) || j == e2.len() {
                mixed.push(e1[i].clone());
                i += 1;
            } else {
                mixed.push(e2[j].clone());
                j += 1;
            }
        }
        prop_assert_eq!(&attribute(mixed, &db, &meta).unwrap(), &base);

        if !sequential.is_empty() {
            let mut doubled = sequential.clone();
            let k = dup.index(sequential.len());
            doubled.insert(k, sequential[k].clone());
            prop_assert_eq!(&attribute(doubled, &db, &meta).unwrap(), &base);
        }

        let text: String = sequential.iter().map(TraceEvent::to_line).collect();
        let parsed: Vec<TraceEvent> = parse_trace(&text).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(parsed, sequential);

        for (m, a) in &base.executed {
            prop_assert!(!m.is_static_initializer());
            prop_assert!(m.class_name != "rt/R" && m.method_name != "access$0");
            prop_assert!(!(a.calls_io(AnalysisMode::Dynamic) && a.mask.iter().all(|c| c == NativeCategory::Invocation || c == NativeCategory::NonIo)));
        }
    }

    #[test]
    fn histogram_conserves_mass(items in prop::collection::vec((0u32..30, any::<bool>()), 0..60), threshold in 0u32..30) {
        let h = histogram_from(items.iter().copied(), SizeMetric::StatementUnits, threshold);
        prop_assert_eq!(h.total(), items.len());
        let over: Vec<_> = items.iter().filter(|(s, _)| *s >= threshold).collect();
        prop_assert_eq!(h.threshold_population, over.len());
        prop_assert_eq!(h.threshold_io, over.iter().filter(|(_, io)| *io).count());
        for (size, bin) in &h.bins {
            prop_assert_eq!(bin.io_count, items.iter().filter(|(s, io)| s == size && *io).count());
            prop_assert_eq!(bin.non_io_count, items.iter().filter(|(s, io)| s == size && !*io).count());
        }
    }

    #[test]
    fn top_natives_matches_recount_and_ignores_merge_order(
        rows in prop::collection::vec((0u8..8, prop::collection::btree_set(0u8..4, 0..4)), 1..16),
        k in 1usize..4,
    ) {
        let db = random_db();
        let parts: Vec<DynResult> = rows.iter().map(|(m, ns)| {
            let mut r = DynResult::default();
            let a = r.executed.entry(mref(&format!("p/M.m{m}()V"))).or_default();
            for n in ns {
                let native = mref(&format!("rt/N.n{n}()V"));
                a.mask.insert(db.get(&native).unwrap());
                a.natives.insert(native);
            }
            r
        }).collect();
        let mut forward = DynResult::default();
        for p in &parts {
            forward.merge(p);
        }
        let mut backward = DynResult::default();
        for p in parts.iter().rev() {
            backward.merge(p);
        }
        let top = top_natives(&forward, &db, k);
        prop_assert_eq!(&top, &top_natives(&backward, &db, k));

        let mut counts: BTreeMap<MethodRef, usize> = BTreeMap::new();
        for a in forward.executed.values() {
            for n in &a.natives {
                *counts.entry(n.clone()).or_default() += 1;
            }
        }
        for (cat, ranked) in &top {
            prop_assert!(ranked.len() <= k);
            let mut expect: Vec<(MethodRef, usize)> = counts.iter()
                .filter(|(n, _)| db.get(n) == Some(*cat))
                .map(|(n, c)| (n.clone(), *c))
                .collect();
            expect.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            expect.truncate(k);
            prop_assert_eq!(ranked, &expect);
        }
    }
}

#[test]
fn random_corpus_is_well_formed() {
    let corpus = random_corpus(&[7; 64]);
    let classes: Vec<&ClassModel> = corpus.classes().collect();
    for c in classes {
        for m in &c.methods {
            assert_eq!(m.method.class_name, c.name);
        }
    }
    assert_eq!(find_entry_points(&corpus).len(), 1);
}

/// Guards against the generator degenerating into trivial corpora.
#[test]
fn generator_exercises_dispatch_and_natives() {
    let (mut strictly_smaller, mut with_io, mut unresolved) = (0, 0, 0);
    for seed in 0u32..300 {
        let tape: Vec<u32> = (0..160u32).map(|i| seed.wrapping_mul(2_654_435_761).wrapping_add(i.wrapping_mul(40_503)).rotate_left(i % 31)).collect();
        let corpus = random_corpus(&tape);
        let entries = find_entry_points(&corpus);
        let cha = build_call_graph(&corpus, &entries, Algorithm::Cha);
        let rta = build_call_graph(&corpus, &entries, Algorithm::Rta);
        strictly_smaller += (rta.graph.edge_count() < cha.graph.edge_count()) as usize;
        unresolved += !cha.unresolved.is_empty() as usize;
        let r = natives_reachable(&cha.graph, &corpus, &random_db()).unwrap();
        with_io += (summarize_static(&r).calls_io > 0) as usize;
    }
    assert!(strictly_smaller > 10, "{strictly_smaller}");
    assert!(with_io > 30, "{with_io}");
    assert!(unresolved > 10, "{unresolved}");
}
