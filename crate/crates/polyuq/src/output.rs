//! Deterministic run outputs: CSV tables, gnuplot-ready `.dat` twins and a
//! replayable manifest. Floats print with a fixed scientific format so a
//! rerun with the same configuration and seed writes byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes a CSV file plus its whitespace-separated `.dat` twin.
    pub fn write_table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut csv = String::new();
        let mut dat = String::new();
        writeln!(csv, "{}", header.join(",")).unwrap();
        writeln!(dat, "# {}", header.join(" ")).unwrap();
        for row in rows {
            writeln!(csv, "{}", row.join(",")).unwrap();
            writeln!(dat, "{}", row.join(" ")).unwrap();
        }
        fs::write(self.dir.join(format!("{name}.csv")), csv)?;
        fs::write(self.dir.join(format!("{name}.dat")), dat)?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), text)
    }

    /// The run manifest: experiment, version, seed, config hash and any
    /// extra replay notes. No timestamps, so reruns are byte-identical.
    pub fn write_manifest(
        &self,
        experiment: &str,
        seed: u64,
        config_hash: u64,
        threads: usize,
        notes: &[String],
    ) -> io::Result<()> {
        let mut text = String::new();
        writeln!(text, "experiment = {experiment}").unwrap();
        writeln!(text, "version = {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(text, "seed = {seed}").unwrap();
        writeln!(text, "config_hash = {config_hash:016x}").unwrap();
        writeln!(text, "threads = {threads}").unwrap();
        for n in notes {
            writeln!(text, "note = {n}").unwrap();
        }
        self.write_text("manifest.txt", &text)
    }
}

/// Fixed-width scientific float formatting used across all tables.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
