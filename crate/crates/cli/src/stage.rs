//! Stage output directories, written to a temporary sibling and renamed into
//! place so a failed run leaves no partial output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::{io_at, CliError, CliResult};

pub struct StageDir {
    tmp: TempDir,
    target: PathBuf,
}

impl StageDir {
    pub fn create(out: &Path, stage: &str) -> CliResult<Self> {
        std::fs::create_dir_all(out).map_err(io_at(out))?;
        let tmp = tempfile::Builder::new().prefix(&format!(".{stage}-")).tempdir_in(out).map_err(io_at(out))?;
        Ok(Self { tmp, target: out.join(stage) })
    }

    pub fn write<F>(&self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> CliResult<()>,
    {
        let path = self.tmp.path().join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_at(parent))?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(io_at(&path))?);
        body(&mut w)?;
        w.flush().map_err(io_at(&path))?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<()> {
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(CliError::from))
    }

    /// Replaces any previous output of the stage.
    pub fn commit(self) -> CliResult<PathBuf> {
        if self.target.exists() {
            std::fs::remove_dir_all(&self.target).map_err(io_at(&self.target))?;
        }
        let tmp = self.tmp.keep();
        std::fs::rename(&tmp, &self.target).map_err(|e| {
            let _ = std::fs::remove_dir_all(&tmp);
            CliError::Io(format!("{}: {e}", self.target.display()))
        })?;
        Ok(self.target)
    }
}
