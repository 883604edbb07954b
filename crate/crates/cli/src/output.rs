//! Atomic output files with checksums.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::CliError;

pub const UNITS_LINE: &str = "# energies in gamma0, times in 1/gamma0";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

/// Output directory that remembers the checksum of everything written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        write_atomic(&path, bytes)?;
        self.checksums.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(path)
    }

    /// CSV preceded by the units comment line.
    pub fn write_csv<R, I>(&mut self, name: &str, header: &[String], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut buf = Vec::new();
        buf.extend_from_slice(UNITS_LINE.as_bytes());
        buf.push(b'\n');
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| CliError::Io {
                path: name.to_string(),
                source: e.into(),
            };
            w.write_record(header).map_err(csv_err)?;
            for row in rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_err(Path::new(name))(e))?;
        }
        self.write(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io {
            path: name.to_string(),
            source: e.into(),
        })?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn checksums(&self) -> &BTreeMap<String, String> {
        &self.checksums
    }
}
