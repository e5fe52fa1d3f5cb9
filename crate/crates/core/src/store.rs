//! File-backed workspace. Every document lives in its own JSON file, written
//! through a same-directory temp file that is synced and renamed into place.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::doc;
use crate::error::{Error, Result};
use crate::questionnaire::AnswerSheet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    Assessment,
    Scenario,
    Ledger,
    Config,
}

impl DocKind {
    pub const ALL: [DocKind; 4] = [DocKind::Assessment, DocKind::Scenario, DocKind::Ledger, DocKind::Config];

    pub fn dir(&self) -> &'static str {
        match self {
            DocKind::Assessment => "assessments",
            DocKind::Scenario => "scenarios",
            DocKind::Ledger => "ledgers",
            DocKind::Config => "configs",
        }
    }
}

const TEMP_PREFIX: &str = ".tmp-";
const LOCK_DIR: &str = ".locks";

#[derive(Debug, Clone)]
pub struct WorkspaceStore {
    root: PathBuf,
}

/// Document names: ASCII letters, digits, `-`, `_` and `.`, not starting with `.`.
fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("id", format!("`{name}` is not a valid document name")))
    }
}

impl WorkspaceStore {
    /// Opens (creating if needed) a workspace rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for kind in DocKind::ALL {
            fs::create_dir_all(root.join(kind.dir()))?;
        }
        fs::create_dir_all(root.join(LOCK_DIR))?;
        Ok(WorkspaceStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, kind: DocKind, name: &str) -> Result<PathBuf> {
        check_name(name)?;
        Ok(self.root.join(kind.dir()).join(format!("{name}.json")))
    }

    /// Holds an exclusive advisory lock on one document until dropped.
    fn lock(&self, kind: DocKind, name: &str) -> Result<File> {
        let path = self.root.join(LOCK_DIR).join(format!("{}-{name}.lock", kind.dir()));
        let f = OpenOptions::new().create(true).truncate(false).write(true).open(path)?;
        f.lock()?;
        Ok(f)
    }

    /// Writes `bytes` as document `name`, replacing any previous version atomically.
    pub fn put_bytes(&self, kind: DocKind, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        self.write(kind, name, bytes, None)
    }

    /// Like [`put_bytes`](Self::put_bytes) but stops after `fail_after` bytes,
    /// as a crash would, leaving the partial temp file behind.
    pub fn put_bytes_faulty(&self, kind: DocKind, name: &str, bytes: &[u8], fail_after: usize) -> Result<PathBuf> {
        self.write(kind, name, bytes, Some(fail_after))
    }

    fn write(&self, kind: DocKind, name: &str, bytes: &[u8], fail_after: Option<usize>) -> Result<PathBuf> {
        let target = self.path_of(kind, name)?;
        let dir = target.parent().expect("document path has a parent");
        let _guard = self.lock(kind, name)?;
        let mut tmp = tempfile::Builder::new().prefix(TEMP_PREFIX).suffix(".part").tempfile_in(dir)?;
        if let Some(n) = fail_after.filter(|n| *n < bytes.len()) {
            tmp.write_all(&bytes[..n])?;
            tmp.flush()?;
            tmp.keep().map_err(|e| Error::Io(e.error))?;
            return Err(Error::InjectedFault(n));
        }
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
        Ok(target)
    }

    pub fn put_json<T: Serialize>(&self, kind: DocKind, name: &str, value: &T) -> Result<PathBuf> {
        self.put_bytes(kind, name, doc::to_pretty_json(value)?.as_bytes())
    }

    pub fn get_text(&self, kind: DocKind, name: &str) -> Result<String> {
        let path = self.path_of(kind, name)?;
        match fs::read_to_string(&path) {
            Ok(s) => Ok(s),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(name.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn exists(&self, kind: DocKind, name: &str) -> bool {
        self.path_of(kind, name).map(|p| p.is_file()).unwrap_or(false)
    }

    /// Document names of one kind, sorted. Temp files are skipped.
    pub fn list(&self, kind: DocKind) -> Result<Vec<String>> {
        let mut names = Vec::new();
        for entry in fs::read_dir(self.root.join(kind.dir()))? {
            let entry = entry?;
            let file = entry.file_name();
            let Some(file) = file.to_str() else { continue };
            if file.starts_with('.') || !entry.file_type()?.is_file() {
                continue;
            }
            if let Some(stem) = file.strip_suffix(".json") {
                names.push(stem.to_string());
            }
        }
        names.sort();
        Ok(names)
    }

    /// Leftover temp files from interrupted writes.
    pub fn orphans(&self, kind: DocKind) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join(kind.dir()))? {
            let entry = entry?;
            if entry.file_name().to_string_lossy().starts_with(TEMP_PREFIX) {
                out.push(entry.path());
            }
        }
        Ok(out)
    }

    /// Stores a sheet under its content id and returns the id.
    pub fn put_sheet(&self, sheet: &AnswerSheet) -> Result<String> {
        let id = sheet.content_id();
        self.put_json(DocKind::Assessment, &id, sheet)?;
        Ok(id)
    }

    pub fn get_sheet(&self, id: &str) -> Result<AnswerSheet> {
        AnswerSheet::from_json(&self.get_text(DocKind::Assessment, id)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_list() {
        let dir = tempfile::tempdir().unwrap();
        let store = WorkspaceStore::open(dir.path()).unwrap();
        let sheet = AnswerSheet::template();
        let id = store.put_sheet(&sheet).unwrap();
        assert_eq!(store.get_sheet(&id).unwrap(), sheet);
        assert_eq!(store.list(DocKind::Assessment).unwrap(), vec![id.clone()]);
        // Same content, same id, still one document.
        assert_eq!(store.put_sheet(&sheet).unwrap(), id);
        assert_eq!(store.list(DocKind::Assessment).unwrap().len(), 1);
        assert!(matches!(store.get_sheet("nope"), Err(Error::NotFound(_))));
    }

    #[test]
    fn rejects_path_like_names() {
        let dir = tempfile::tempdir().unwrap();
        let store = WorkspaceStore::open(dir.path()).unwrap();
        for bad in ["../x", "a/b", ".hidden", ""] {
            assert!(store.put_bytes(DocKind::Config, bad, b"{}").is_err(), "{bad}");
        }
    }

    #[test]
    fn faulty_write_leaves_previous_version() {
        let dir = tempfile::tempdir().unwrap();
        let store = WorkspaceStore::open(dir.path()).unwrap();
        store.put_bytes(DocKind::Config, "w", b"{\"v\":1}").unwrap();
        let err = store.put_bytes_faulty(DocKind::Config, "w", b"{\"v\":2222}", 4).unwrap_err();
        assert!(matches!(err, Error::InjectedFault(4)));
        assert_eq!(store.get_text(DocKind::Config, "w").unwrap(), "{\"v\":1}");
        assert_eq!(store.orphans(DocKind::Config).unwrap().len(), 1);
        assert_eq!(store.list(DocKind::Config).unwrap(), vec!["w".to_string()]);
    }

    #[test]
    fn newer_schema_is_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = WorkspaceStore::open(dir.path()).unwrap();
        let mut v = serde_json::to_value(AnswerSheet::template()).unwrap();
        v["schema_version"] = "2".into();
        store.put_json(DocKind::Assessment, "future", &v).unwrap();
        assert!(matches!(store.get_sheet("future"), Err(Error::SchemaVersion { .. })));
    }
}
