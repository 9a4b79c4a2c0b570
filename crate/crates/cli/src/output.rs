//! CSV and manifest emission.
//!
//! Floats are printed with 17 significant digits so a rerun with the
//! same config and seed reproduces every file byte for byte. The
//! manifest is written last; if the run fails, everything written so
//! far is removed and the directory is left as it was found.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

/// Full-precision decimal form of `x` (17 significant digits).
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects output files for one run and tears them down on failure.
pub struct RunWriter {
    dir: PathBuf,
    files: Vec<PathBuf>,
    /// Extra `key = value` notes experiments want echoed in the manifest.
    notes: Vec<String>,
}

impl RunWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(RunWriter { dir: dir.to_path_buf(), files: Vec::new(), notes: Vec::new() })
    }

    /// Writes `name` with the given header and rows, registering it for
    /// cleanup should a later step fail.
    pub fn csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let mut out = String::new();
        out.push_str(header);
        out.push('\n');
        for row in rows {
            out.push_str(&row);
            out.push('\n');
        }
        fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    /// Records a manifest note (`key = value`).
    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// Writes the manifest and finishes the run.
    pub fn finish(mut self, cfg: &ExperimentConfig, wall: Duration) -> Result<()> {
        let path = self.dir.join("manifest.txt");
        let mut f = fs::File::create(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        writeln!(f, "tool = qfc {}", env!("CARGO_PKG_VERSION"))?;
        for line in cfg.echo() {
            writeln!(f, "{line}")?;
        }
        for line in &self.notes {
            writeln!(f, "{line}")?;
        }
        writeln!(f, "wall_seconds = {:.3}", wall.as_secs_f64())?;
        let names: Vec<String> = self
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        writeln!(f, "files = {}", names.join(","))?;
        self.files.clear();
        Ok(())
    }

    /// Removes everything written so far (the error path).
    pub fn cleanup(&mut self) {
        for path in self.files.drain(..) {
            let _ = fs::remove_file(path);
        }
    }
}

impl Drop for RunWriter {
    fn drop(&mut self) {
        self.cleanup();
    }
}
