//! Output staging: files are buffered and written together at the end of a
//! command, so a failing command leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    /// Writes every staged file. On failure, files and directories already
    /// created are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written: Vec<PathBuf> = Vec::with_capacity(self.files.len());
        let mut created: Vec<PathBuf> = Vec::new();
        for (path, bytes) in self.files {
            let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
            if let Some(top) = parent.and_then(first_missing) {
                created.push(top);
            }
            let res = parent.map_or(Ok(()), fs::create_dir_all).and_then(|_| fs::write(&path, &bytes));
            if let Err(e) = res {
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                for d in created.iter().rev() {
                    let _ = fs::remove_dir_all(d);
                }
                return Err(CliError::io(format!("{}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Outermost ancestor of `dir` (or `dir` itself) that does not exist yet.
fn first_missing(dir: &Path) -> Option<PathBuf> {
    let mut missing = None;
    for a in dir.ancestors() {
        if a.as_os_str().is_empty() || a.exists() {
            break;
        }
        missing = Some(a.to_path_buf());
    }
    missing
}

/// `output_dir/run-{unix seconds}-seed{seed}`, suffixed when that name is taken.
pub fn run_dir(output_dir: &Path, seed: u64) -> PathBuf {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let base = format!("run-{secs}-seed{seed}");
    let mut dir = output_dir.join(&base);
    let mut k = 1;
    while dir.exists() {
        dir = output_dir.join(format!("{base}-{k}"));
        k += 1;
    }
    dir
}

/// `dir/stem{suffix}.ext` for a template path `dir/stem.ext`.
pub fn with_suffix(template: &Path, suffix: &str) -> PathBuf {
    let stem = template.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let name = match template.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    template.with_file_name(name)
}
