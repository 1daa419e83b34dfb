//! Output plumbing: atomic file writes, CSV rendering and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::data(format!("cannot write {}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Renders a header and rows as RFC 4180 CSV.
pub fn render_csv<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory cannot fail");
    for row in rows {
        w.write_record(row).expect("writing to memory cannot fail");
    }
    w.into_inner().expect("flushing to memory cannot fail")
}

/// Sends machine-readable output to `out`, or to standard output when no
/// path was given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::data(format!("cannot write to standard output: {e}"))),
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Run manifest written next to an output file. It is written once with the
/// resolved configuration before any work starts and rewritten with the
/// results on success; a failed run removes it again.
pub struct Manifest {
    path: Option<PathBuf>,
    body: Value,
    finished: bool,
}

impl Manifest {
    pub fn start(out: Option<&Path>, command: &str, config: Value) -> Result<Self, CliError> {
        let body = json!({
            "tool": "cvboost",
            "version": env!("CARGO_PKG_VERSION"),
            "model_format_version": cvboost::boosting::FORMAT_VERSION,
            "command": command,
            "config": config,
            "status": "running",
        });
        let manifest = Manifest { path: out.map(manifest_path), body, finished: false };
        manifest.write()?;
        Ok(manifest)
    }

    fn write(&self) -> Result<(), CliError> {
        match &self.path {
            Some(p) => {
                let mut text = serde_json::to_string_pretty(&self.body).expect("manifest serializes");
                text.push('\n');
                write_atomic(p, text.as_bytes())
            }
            None => Ok(()),
        }
    }

    pub fn finish(mut self, results: Value, wall_time: Option<f64>) -> Result<(), CliError> {
        self.body["status"] = json!("complete");
        self.body["results"] = results;
        if let Some(secs) = wall_time {
            self.body["wall_time_seconds"] = json!(secs);
        }
        self.write()?;
        self.finished = true;
        Ok(())
    }
}

impl Drop for Manifest {
    fn drop(&mut self) {
        if !self.finished {
            if let Some(p) = &self.path {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn csv_quotes_fields() {
        let bytes = render_csv(&["a", "b"], [["x,y", "z"]]);
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n\"x,y\",z\n");
    }

    #[test]
    fn unfinished_manifest_is_removed() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let m = Manifest::start(Some(&out), "test", json!({"seed": 1})).unwrap();
        assert!(manifest_path(&out).exists());
        drop(m);
        assert!(!manifest_path(&out).exists());

        let m = Manifest::start(Some(&out), "test", json!({"seed": 1})).unwrap();
        m.finish(json!({"ok": true}), None).unwrap();
        let body: Value = serde_json::from_str(&std::fs::read_to_string(manifest_path(&out)).unwrap()).unwrap();
        assert_eq!(body["status"], "complete");
        assert!(body.get("wall_time_seconds").is_none());
    }
}
