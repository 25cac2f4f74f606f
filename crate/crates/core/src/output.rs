//! All-or-nothing output sets: files are written into a hidden staging
//! directory next to their destination and only renamed into place once
//! every one of them has been written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::{Error, Result};

pub struct StagedOutputs {
    dest: PathBuf,
    staging: TempDir,
    files: Vec<String>,
}

impl StagedOutputs {
    /// Creates `dest` if needed and a staging directory inside it.
    pub fn new(dest: impl AsRef<Path>) -> Result<Self> {
        let dest = dest.as_ref().to_path_buf();
        std::fs::create_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".gridsweep-staging-")
            .tempdir_in(&dest)
            .map_err(|e| Error::io(&dest, e))?;
        Ok(Self {
            dest,
            staging,
            files: Vec::new(),
        })
    }

    pub fn dest(&self) -> &Path {
        &self.dest
    }

    /// Path inside the staging directory for the output `name`.
    pub fn staged_path(&self, name: &str) -> PathBuf {
        self.staging.path().join(name)
    }

    /// Registers `name` as an output that was written directly to
    /// [`staged_path`](Self::staged_path) (e.g. from worker threads).
    pub fn register(&mut self, name: impl Into<String>) {
        self.files.push(name.into());
    }

    /// Writes one output through `body`.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.staged_path(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(&path, e))?;
        self.register(name);
        Ok(())
    }

    /// Moves every registered file into the destination, returning their
    /// final paths. Dropping without committing discards everything.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let from = self.staging.path().join(name);
            let to = self.dest.join(name);
            std::fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
            done.push(to);
        }
        Ok(done)
    }
}
