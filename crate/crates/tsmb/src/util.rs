//! Small filesystem helpers.

use std::io::Write;
use std::path::Path;

/// Writes a file atomically: the content lands in a temporary file in the
/// destination directory and is renamed into place, so readers never observe
/// a partially written artifact and a crash cannot corrupt an existing one.
pub fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
