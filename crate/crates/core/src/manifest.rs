//! Two-column tab-separated manifests mapping an input file to the file a
//! stage produced from it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, Error, Result};
use crate::fsutil::{relative_to, write_atomic};

pub const MANIFEST_NAME: &str = "manifest.tsv";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<(PathBuf, PathBuf)>,
}

impl Manifest {
    pub fn new(entries: Vec<(PathBuf, PathBuf)>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes one `source<TAB>output` line per entry. Paths under the
    /// manifest's directory are stored relative to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        let cell = |p: &Path| -> Result<String> {
            let s = relative_to(p, base).to_string_lossy().into_owned();
            if s.contains(['\t', '\n', '\r']) {
                return Err(Error::InvalidParameter(format!("path {s:?} cannot be stored in a manifest")));
            }
            Ok(s)
        };
        let mut text = String::new();
        for (a, b) in &self.entries {
            text.push_str(&format!("{}\t{}\n", cell(a)?, cell(b)?));
        }
        write_atomic(path, text.as_bytes())
    }

    /// Reads a manifest, resolving relative paths against its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let text = fs::read_to_string(path).map_err(io_err(format!("read {}", path.display())))?;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let (a, b) = line.split_once('\t').ok_or_else(|| Error::Decode {
                file: path.to_path_buf(),
                reason: format!("line {} has no tab", n + 1),
            })?;
            entries.push((base.join(a), base.join(b)));
        }
        Ok(Self { entries })
    }
}
