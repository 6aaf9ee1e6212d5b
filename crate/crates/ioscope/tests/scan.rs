mod common;

use common::{fixture, manifest, mref};
use ioscope::inputs::load_containers;
use ioscope::scan::EntryErrorKind;
use ioscope::{scan_container, ScanError};
use ioscope_core::natives::extract_natives;
use ioscope_core::{ClassFileError, Origin};

fn names(scan: &ioscope::Scan) -> Vec<&str> {
    scan.classes.iter().map(|c| c.name.as_str()).collect()
}

#[test]
fn directory_with_three_classes() {
    let s = scan_container(&fixture("containers/three"), Origin::Project).unwrap();
    assert_eq!(names(&s), ["a/One", "a/Two", "a/b/Three"]);
    assert_eq!(s.entries, ["a/One.class", "a/Two.class", "a/b/Three.class"]);
    assert!(s.errors.is_empty());
    assert!(s.classes.iter().all(|c| c.origin == Origin::Project));
}

#[test]
fn jar_with_one_class_ignores_other_entries() {
    let s = scan_container(&fixture("containers/one.jar"), Origin::Dependency).unwrap();
    assert_eq!(names(&s), ["c/Only"]);
    assert_eq!(s.classes[0].origin, Origin::Dependency);
}

#[test]
fn corrupt_member_is_reported_and_the_rest_survive() {
    let s = scan_container(&fixture("containers/corrupt.jar"), Origin::Project).unwrap();
    // the versioned copy of C1 and the nested jar are not scanned
    assert_eq!(names(&s), ["k/C1", "k/C2", "k/C4", "k/C5"]);
    assert_eq!(s.errors.len(), 1);
    assert_eq!(s.errors[0].entry, "k/C3.class");
    assert!(matches!(s.errors[0].kind, EntryErrorKind::Parse(ClassFileError::Malformed { .. })));
}

#[test]
fn module_info_assigns_module() {
    let s = scan_container(&fixture("containers/modular.jar"), Origin::Runtime).unwrap();
    let thing = s.classes.iter().find(|c| c.name == "m/Thing").unwrap();
    assert_eq!(thing.module.as_deref(), Some("demo.mod"));

    let rt = scan_container(&fixture("runtime/java.base"), Origin::Runtime).unwrap();
    assert!(rt.classes.iter().filter(|c| !c.is_module_info()).all(|c| c.module.as_deref() == Some("java.base")));
}

#[test]
fn directory_opens_contained_jars_and_rejects_new_versions() {
    let s = scan_container(&fixture("containers/mixed"), Origin::Project).unwrap();
    assert_eq!(s.entries, ["lib/dep.jar!/d/Dep.class", "z/Last.class"]);
    assert_eq!(s.errors.len(), 1);
    assert_eq!(s.errors[0].entry, "z/Newer.class");
    assert!(matches!(
        s.errors[0].kind,
        EntryErrorKind::Parse(ClassFileError::UnsupportedVersion { major: 62, minor: 0 })
    ));
}

#[test]
fn container_counts_match_manifest() {
    let m = manifest();
    for (path, spec) in m["containers"].as_object().unwrap() {
        let s = scan_container(&fixture(path), Origin::Project).unwrap();
        assert_eq!(s.len() as u64, spec["classes"].as_u64().unwrap(), "{path}");
        let mut errors: Vec<&str> = s.errors.iter().map(|e| e.entry.as_str()).collect();
        errors.sort();
        assert_eq!(errors, common::strings(&spec["errors"]), "{path}");
    }
}

#[test]
fn missing_path_is_an_io_error() {
    let err = scan_container(&fixture("containers/nope"), Origin::Project).unwrap_err();
    assert!(matches!(err, ScanError::Io { .. }));
}

#[test]
fn non_archive_file_is_an_archive_error() {
    let err = scan_container(&fixture("containers/three/readme.txt"), Origin::Project).unwrap_err();
    assert!(matches!(err, ScanError::Archive { .. }), "{err}");
}

#[test]
fn load_containers_qualifies_error_entries() {
    let jar = fixture("containers/corrupt.jar");
    let loaded = load_containers(&[jar.clone(), fixture("containers/three")], Origin::Project).unwrap();
    assert_eq!(loaded.classes.len(), 7);
    assert_eq!(loaded.errors[0].entry, format!("{}!/k/C3.class", jar.display()));
}

#[test]
fn load_containers_rejects_missing_inputs_as_usage() {
    let err = load_containers(&[fixture("does/not/exist")], Origin::Project).unwrap_err();
    assert!(matches!(err, ioscope::Error::Usage(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn private_and_public_natives_are_extracted() {
    let m = manifest();
    let s = scan_container(&fixture("containers/twonatives"), Origin::Project).unwrap();
    let found = extract_natives(&s.classes);
    let expected: Vec<_> = common::strings(&m["containers"]["containers/twonatives"]["natives"])
        .iter()
        .map(|s| mref(s))
        .collect();
    assert_eq!(found, expected);
}
