mod common;

use common::{fixture, ioscope, manifest, project_args, runtime_args, ALL_PROJECTS};
use serde_json::Value;

fn s(x: &str) -> String {
    x.to_string()
}

fn db_args() -> Vec<String> {
    vec![s("--db"), fixture("db/sample.tsv").display().to_string()]
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn analyze(projects: &[&str], out: &std::path::Path, extra: &[&str]) -> std::process::Output {
    let mut args = vec![s("analyze")];
    args.extend(project_args(projects));
    args.extend(db_args());
    args.extend([s("--out"), out.display().to_string()]);
    args.extend(extra.iter().map(|x| s(x)));
    ioscope(&args)
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(ioscope(&[s("--help")]).status.code(), Some(0));
    assert_eq!(ioscope(&[s("--version")]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(ioscope(&[s("frobnicate")]).status.code(), Some(2));
    // --out is required for analyze
    let mut args = vec![s("analyze")];
    args.extend(project_args(&["pure"]));
    args.extend(db_args());
    assert_eq!(ioscope(&args).status.code(), Some(2));
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = ioscope(&[
        s("analyze"),
        s("--project"),
        fixture("projects/nope").display().to_string(),
        s("--db"),
        fixture("db/sample.tsv").display().to_string(),
        s("--out"),
        dir.path().display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("does not exist"));
}

#[test]
fn missing_database_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![s("analyze")];
    args.extend(project_args(&["pure"]));
    args.extend([s("--db"), fixture("db/absent.tsv").display().to_string()]);
    args.extend([s("--out"), dir.path().display().to_string()]);
    assert_eq!(ioscope(&args).status.code(), Some(2));
}

#[test]
fn malformed_database_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("bad.tsv");
    std::fs::write(&db, "java/lang/System\tnanoTime\t()J\tgpu\n").unwrap();
    let mut args = vec![s("analyze")];
    args.extend(project_args(&["pure"]));
    args.extend([s("--db"), db.display().to_string()]);
    args.extend([s("--out"), dir.path().join("out").display().to_string()]);
    let o = ioscope(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn analyze_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(&["pure", "time", "iface"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "summary.json",
        "lint.csv",
        "distribution.csv",
        "size_hist.csv",
        "top_natives.csv",
        "methods.tsv",
        "io_candidates.tsv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["mode"], "static");
    assert_eq!(summary["algorithm"], "cha");
    let ids: Vec<&str> = summary["projects"].as_array().unwrap().iter().map(|p| p["project_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["pure", "time", "iface"]);
    // 5 + 4 + 6 source methods; 4 + 2 + 4 reachable; 0 + 2 + 3 reach I/O
    assert_eq!(summary["total"]["total_source_methods"], 15);
    assert_eq!(summary["total"]["reachable"], 10);
    assert_eq!(summary["total"]["calls_io"], 5);
    assert_eq!(summary["total"]["calls_io_pct"], 50.0);
}

#[test]
fn analyze_with_custom_native_exits_one_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(&["custom"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("custom/Native.compute()I"), "{}", stderr(&o));
}

#[test]
fn analyze_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(&["time", "missing"], dir.path(), &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lint = read_json(&dir.path().join("lint.json"));
    assert_eq!(lint.as_array().unwrap().len(), 1);
    assert_eq!(lint[0]["project_id"], "missing");
    assert_eq!(lint[0]["criterion"], "E3");
    assert_eq!(lint[0]["subject"], "com/absent/Lib");
    let top = read_json(&dir.path().join("top_natives.json"));
    assert_eq!(top[0]["category"], "time");
    assert_eq!(top[0]["native"], "java/lang/System.nanoTime()J");
    assert_eq!(top[0]["callers"], 2);
    assert!(!dir.path().join("lint.csv").exists());
}

#[test]
fn analyze_threshold_and_distribution_options() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(&["iface"], dir.path(), &["--size-threshold", "1", "--bin-width", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["size_threshold"]["threshold"], 1);
    assert_eq!(summary["size_threshold"]["population"], 4);
    assert_eq!(summary["size_threshold"]["calls_io_pct"], 75.0);
    let dist = std::fs::read_to_string(dir.path().join("distribution.csv")).unwrap();
    assert!(dist.contains("project,iface,75.0,70,80,"), "{dist}");
    assert!(dist.contains("bin,,,70,80,1"), "{dist}");
}

#[test]
fn rta_option_changes_masks() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(&["iface"], dir.path(), &["--algo", "rta"]);
    assert_eq!(o.status.code(), Some(0));
    let methods = std::fs::read_to_string(dir.path().join("methods.tsv")).unwrap();
    assert!(methods.contains("iface/Main.main([Ljava/lang/String;)V\ttrue\ttime\ttrue\ttrue\n"), "{methods}");
    assert!(methods.contains("iface/B.run()V\tfalse\t\tfalse\tfalse\n"), "{methods}");
}

#[test]
fn lint_lists_findings_on_stdout() {
    let mut args = vec![s("lint")];
    args.extend(project_args(ALL_PROJECTS));
    args.extend(db_args());
    let o = ioscope(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("project_id,criterion,subject,detail"));
    let rows: Vec<(&str, &str, &str)> = lines
        .map(|l| {
            let mut f = l.splitn(4, ',');
            (f.next().unwrap(), f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    let mut expected = Vec::new();
    let m = manifest();
    for p in ALL_PROJECTS {
        for f in m["projects"][*p]["lint"].as_array().unwrap() {
            expected.push((*p, f[0].as_str().unwrap(), f[1].as_str().unwrap()));
        }
    }
    assert_eq!(rows, expected);
}

#[test]
fn lint_writes_file_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![s("lint")];
    args.extend(project_args(&["pure"]));
    args.extend([s("--out"), dir.path().display().to_string()]);
    let o = ioscope(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("lint.csv")).unwrap(), "project_id,criterion,subject,detail\n");
    assert!(stdout(&o).is_empty());
}

#[test]
fn graph_summary_and_dump() {
    let mut args = vec![s("graph")];
    args.extend(project_args(&["iface"]));
    let o = ioscope(&args);
    assert_eq!(stdout(&o), "algorithm=cha nodes=10 edges=10 entry_points=1 unresolved=0\n");

    args.extend([s("--algo"), s("rta"), s("--dump")]);
    let o = ioscope(&args);
    let expected = "\
edge\tiface/A.<init>()V\tjava/lang/Object.<init>()V
edge\tiface/A.run()V\tjava/lang/System.nanoTime()J
edge\tiface/Main.main([Ljava/lang/String;)V\tiface/A.<init>()V
edge\tiface/Main.main([Ljava/lang/String;)V\tiface/A.run()V
entry\tiface/Main.main([Ljava/lang/String;)V
";
    assert_eq!(stdout(&o), expected);
}

#[test]
fn graph_reports_unresolved_targets() {
    let mut args = vec![s("graph")];
    args.extend(project_args(&["missing"]));
    let o = ioscope(&args);
    assert!(stdout(&o).ends_with("unresolved=1\n"), "{}", stdout(&o));
}

#[test]
fn diff_and_scan_natives() {
    let mut args = vec![s("diff")];
    args.extend(runtime_args());
    args.extend(db_args());
    let o = ioscope(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let stale: Vec<&str> = text.lines().map(|l| l.strip_prefix("stale\t").unwrap()).collect();
    assert_eq!(
        stale,
        [
            "java/io/FileOutputStream.writeBytes([BIIZ)V",
            "java/util/zip/CRC32.update(II)I",
            "jdk/internal/reflect/NativeConstructorAccessorImpl.newInstance0(Ljava/lang/reflect/Constructor;[Ljava/lang/Object;)Ljava/lang/Object;",
            "sun/awt/X11/XlibWrapper.XBell(JI)V",
        ]
    );

    let mut args = vec![s("diff"), s("--project"), fixture("projects/custom").display().to_string()];
    args.extend(runtime_args());
    args.extend(db_args());
    let o = ioscope(&args);
    assert!(stdout(&o).starts_with("uncatalogued\tcustom/Native.compute()I\n"), "{}", stdout(&o));

    let mut args = vec![s("scan-natives"), s("--project"), fixture("projects/custom").display().to_string()];
    args.extend(db_args());
    let o = ioscope(&args);
    assert_eq!(stdout(&o), "custom/Native\tcompute\t()I\tuncatalogued\n");

    let mut args = vec![s("scan-natives")];
    args.extend(runtime_args());
    args.extend(db_args());
    let text = stdout(&ioscope(&args));
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("java/io/FileInputStream\topen0\t(Ljava/lang/String;)V\tfiles\n"));
}

#[test]
fn scan_natives_without_inputs_is_a_usage_error() {
    assert_eq!(ioscope(&[s("scan-natives")]).status.code(), Some(2));
}

fn trace_analyze(out: &std::path::Path, extra: &[String]) -> std::process::Output {
    let m = manifest();
    let spec = &m["traces"]["traces/synthetic.trace"];
    let mut args = vec![s("trace-analyze")];
    for p in spec["projects"].as_array().unwrap() {
        args.extend([s("--project"), fixture(&format!("projects/{}", p.as_str().unwrap())).display().to_string()]);
    }
    args.extend(runtime_args());
    args.extend(db_args());
    args.extend([s("--out"), out.display().to_string()]);
    args.extend(extra.iter().cloned());
    ioscope(&args)
}

#[test]
fn trace_analyze_matches_hand_computed_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = fixture("traces/synthetic.trace").display().to_string();
    let o = trace_analyze(dir.path(), &[s("--trace"), trace]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest();
    let spec = &m["traces"]["traces/synthetic.trace"];
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["mode"], "dynamic");
    let total = &summary["total"];
    assert_eq!(total["executed"].as_u64(), Some(spec["executed"].as_object().unwrap().len() as u64));
    assert_eq!(total["calls_native"], spec["calls_native"]);
    assert_eq!(total["calls_io"], spec["calls_io"]);
    for c in total["categories"].as_array().unwrap() {
        assert_eq!(c["count"], spec["categories"][c["category"].as_str().unwrap()], "{c}");
    }
    assert_eq!(summary["unknown_methods"], spec["unknown"]);
    assert_eq!(summary["size_threshold"]["population"], spec["size_threshold"]["population"]);
    assert_eq!(summary["size_threshold"]["calls_io"], spec["size_threshold"]["calls_io"]);

    let methods = std::fs::read_to_string(dir.path().join("methods.tsv")).unwrap();
    for (line, (m, mask)) in methods.lines().zip(spec["executed"].as_object().unwrap()) {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!((f[0], f[2]), (m.as_str(), mask.as_str().unwrap()));
    }
}

#[test]
fn trace_analyze_needs_an_existing_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = trace_analyze(dir.path(), &[s("--trace"), fixture("traces/absent.trace").display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    let o = trace_analyze(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_analyze_rejects_malformed_traces() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.trace");
    std::fs::write(&bad, "E 1 time/Main main ([Ljava/lang/String;)V\nN 1 2\nF java/lang/System nanoTime ()J\n").unwrap();
    let o = trace_analyze(&dir.path().join("out"), &[s("--trace"), bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.trace"), "{}", stderr(&o));
}

#[test]
fn trace_with_uncatalogued_native_fails() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.trace");
    std::fs::write(&t, "N 1 2\nF custom/Native compute ()I\nF custom/Main main ([Ljava/lang/String;)V\n").unwrap();
    let o = trace_analyze(&dir.path().join("out"), &[s("--trace"), t.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("custom/Native.compute()I"), "{}", stderr(&o));
}
