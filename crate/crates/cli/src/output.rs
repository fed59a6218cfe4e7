use std::fs;
use std::path::{Path, PathBuf};

use sigsub_core::io::write_file;
use sigsub_core::Result;

/// Tracks files and directories a command creates and deletes them unless
/// the command finishes successfully.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Claims a directory, remembering it for cleanup only if this call creates it.
    pub fn dir(&mut self, dir: &Path) -> Result<()> {
        if !dir.exists() {
            let mut first_missing = dir.to_path_buf();
            while let Some(parent) = first_missing.parent() {
                if parent.as_os_str().is_empty() || parent.exists() {
                    break;
                }
                first_missing = parent.to_path_buf();
            }
            fs::create_dir_all(dir).map_err(|e| sigsub_core::Error::Io { path: dir.to_path_buf(), source: e })?;
            self.dirs.push(first_missing);
        }
        Ok(())
    }

    pub fn write(&mut self, path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            self.dir(parent)?;
        }
        self.files.push(path.to_path_buf());
        write_file(path, contents)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}
