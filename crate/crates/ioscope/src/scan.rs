//! Reading class files out of directories and JAR/ZIP containers.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use ioscope_core::{parse_class, ClassFileError, ClassModel, Origin};

/// One container entry that could not be turned into a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryError {
    /// `path/in/dir/A.class`, or `lib.jar!/a/B.class` for archive members
    pub entry: String,
    pub kind: EntryErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntryErrorKind {
    #[error(transparent)]
    Parse(#[from] ClassFileError),
    #[error("read failed: {0}")]
    Read(String),
}

impl std::fmt::Display for EntryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.entry, self.kind)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{} is not a readable JAR/ZIP archive: {source}", path.display())]
    Archive { path: PathBuf, source: zip::result::ZipError },
}

/// Classes parsed from one container, ordered by entry name.
#[derive(Debug, Clone, Default)]
pub struct Scan {
    pub classes: Vec<ClassModel>,
    /// entry names parallel to `classes`
    pub entries: Vec<String>,
    pub errors: Vec<EntryError>,
}

impl Scan {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

fn is_archive(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.ends_with(".jar") || lower.ends_with(".zip")
}

/// Parses every `.class` file in a directory tree or JAR/ZIP archive.
///
/// Archives found inside a directory are opened; archives inside archives
/// are not. Multi-release variants under `META-INF/versions/` are ignored so
/// each class is seen once. Classes below a `module-info.class` (the same
/// directory or archive) are assigned that module.
pub fn scan_container(path: &Path, origin: Origin) -> Result<Scan, ScanError> {
    let meta = fs::metadata(path).map_err(|source| ScanError::Io { path: path.into(), source })?;
    let mut raw = RawScan::default();
    if meta.is_dir() {
        scan_dir(path, &mut raw)?;
    } else {
        scan_archive(path, "", &mut raw)?;
    }
    Ok(raw.finish(origin))
}

#[derive(Default)]
struct RawScan {
    found: Vec<(String, ClassModel)>,
    errors: Vec<EntryError>,
}

impl RawScan {
    fn add(&mut self, entry: String, bytes: &[u8]) {
        match parse_class(bytes) {
            Ok(c) => self.found.push((entry, c)),
            Err(e) => self.errors.push(EntryError { entry, kind: e.into() }),
        }
    }

    fn finish(mut self, origin: Origin) -> Scan {
        self.found.sort_by(|a, b| a.0.cmp(&b.0));
        self.errors.sort_by(|a, b| a.entry.cmp(&b.entry));
        // (entry prefix, module name), longest prefixes first
        let mut modules: Vec<(String, String)> = self
            .found
            .iter()
            .filter(|(_, c)| c.is_module_info())
            .filter_map(|(e, c)| {
                let prefix = e.strip_suffix("module-info.class")?;
                Some((prefix.to_string(), c.module.clone()?))
            })
            .collect();
        modules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));

        let mut scan = Scan { errors: self.errors, ..Scan::default() };
        for (entry, class) in self.found {
            let mut class = class.with_origin(origin);
            if class.module.is_none() {
                class.module = modules.iter().find(|(p, _)| entry.starts_with(p.as_str())).map(|(_, m)| m.clone());
            }
            scan.entries.push(entry);
            scan.classes.push(class);
        }
        scan
    }
}

fn scan_dir(root: &Path, raw: &mut RawScan) -> Result<(), ScanError> {
    for item in walkdir::WalkDir::new(root).sort_by_file_name() {
        let item = item.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            ScanError::Io { path, source: e.into() }
        })?;
        if !item.file_type().is_file() {
            continue;
        }
        let rel = item.path().strip_prefix(root).unwrap_or(item.path());
        let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if name.ends_with(".class") {
            match fs::read(item.path()) {
                Ok(bytes) => raw.add(name, &bytes),
                Err(e) => raw.errors.push(EntryError { entry: name, kind: EntryErrorKind::Read(e.to_string()) }),
            }
        } else if is_archive(&name) {
            if let Err(e) = scan_archive(item.path(), &format!("{name}!/"), raw) {
                raw.errors.push(EntryError { entry: name, kind: EntryErrorKind::Read(e.to_string()) });
            }
        }
    }
    Ok(())
}

fn scan_archive(path: &Path, prefix: &str, raw: &mut RawScan) -> Result<(), ScanError> {
    let file = fs::File::open(path).map_err(|source| ScanError::Io { path: path.into(), source })?;
    let mut zip = zip::ZipArchive::new(io::BufReader::new(file))
        .map_err(|source| ScanError::Archive { path: path.into(), source })?;
    for i in 0..zip.len() {
        let mut member = match zip.by_index(i) {
            Ok(m) => m,
            Err(e) => {
                raw.errors.push(EntryError { entry: format!("{prefix}#{i}"), kind: EntryErrorKind::Read(e.to_string()) });
                continue;
            }
        };
        let name = member.name().to_string();
        if member.is_dir() || name.starts_with("META-INF/versions/") {
            continue;
        }
        if is_archive(&name) {
            log::debug!("{}: not descending into nested archive {name}", path.display());
            continue;
        }
        if !name.ends_with(".class") {
            continue;
        }
        let entry = format!("{prefix}{name}");
        let mut bytes = Vec::with_capacity(member.size() as usize);
        match member.read_to_end(&mut bytes) {
            Ok(_) => raw.add(entry, &bytes),
            Err(e) => raw.errors.push(EntryError { entry, kind: EntryErrorKind::Read(e.to_string()) }),
        }
    }
    Ok(())
}
