//! Loading the inputs named on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use ioscope_core::natives::load_category_db;
use ioscope_core::report::ModuleAllowlist;
use ioscope_core::trace::parse_trace;
use ioscope_core::{CategoryDb, ClassModel, Origin, TraceEvent};

use crate::scan::{scan_container, EntryError};
use crate::{Error, Result};

/// Project id used for `--project` values without a `NAME=` prefix.
pub const DEFAULT_PROJECT: &str = "project";

/// The class containers making up one project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSpec {
    pub id: String,
    pub containers: Vec<PathBuf>,
}

/// Groups `--project` values into projects. `NAME=PATH` puts `PATH` into
/// project `NAME`; a bare `PATH` goes into the default project. Projects
/// keep the order of their first mention.
pub fn group_projects(values: &[String]) -> Vec<ProjectSpec> {
    let mut out: Vec<ProjectSpec> = Vec::new();
    for v in values {
        let (id, path) = match v.split_once('=') {
            Some((id, path)) if !id.is_empty() && !Path::new(v).exists() => (id, path),
            _ => (DEFAULT_PROJECT, v.as_str()),
        };
        match out.iter_mut().find(|p| p.id == id) {
            Some(p) => p.containers.push(PathBuf::from(path)),
            None => out.push(ProjectSpec { id: id.to_string(), containers: vec![PathBuf::from(path)] }),
        }
    }
    out
}

/// Classes from a list of containers, in container order then entry order.
#[derive(Debug, Clone, Default)]
pub struct Loaded {
    pub classes: Vec<ClassModel>,
    /// entry names qualified by their container path
    pub errors: Vec<EntryError>,
}

impl Loaded {
    pub fn extend(&mut self, other: Loaded) {
        self.classes.extend(other.classes);
        self.errors.extend(other.errors);
    }
}

pub fn load_containers(paths: &[PathBuf], origin: Origin) -> Result<Loaded> {
    let mut out = Loaded::default();
    for path in paths {
        if !path.exists() {
            return Err(Error::Usage(format!("input {} does not exist", path.display())));
        }
        let scan = scan_container(path, origin)?;
        let sep = if path.is_dir() { "/" } else { "!/" };
        log::info!("{}: {} classes, {} unreadable entries", path.display(), scan.len(), scan.errors.len());
        for mut e in scan.errors {
            e.entry = format!("{}{sep}{}", path.display(), e.entry);
            log::warn!("skipping {e}");
            out.errors.push(e);
        }
        out.classes.extend(scan.classes);
    }
    Ok(out)
}

/// A missing file is a usage error; other read failures are I/O errors.
fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::Usage(format!("input {} does not exist", path.display())));
    }
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn load_db(path: &Path) -> Result<CategoryDb> {
    let text = read_text(path)?;
    load_category_db(&text).map_err(|source| Error::Db { path: path.into(), source })
}

pub fn load_allowlist(path: Option<&Path>) -> Result<ModuleAllowlist> {
    match path {
        Some(p) => Ok(ModuleAllowlist::parse(&read_text(p)?)),
        None => Ok(ModuleAllowlist::default()),
    }
}

/// Reads a whole trace file. The first malformed record is an error.
pub fn read_trace(path: &Path) -> Result<Vec<TraceEvent>> {
    let text = read_text(path)?;
    parse_trace(&text)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|source| Error::Trace { path: path.into(), source })
}
