//! Output directory bookkeeping: every file is hashed into the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Output {
    dir: PathBuf,
    /// Comment line stamped on every CSV.
    stamp: String,
    files: Vec<FileEntry>,
}

/// One plotting series: `(x, y)` pairs with an optional group label.
pub struct PlotSeries<'a> {
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub group: Option<Vec<String>>,
    /// Extra columns appended after `y`.
    pub extra: Vec<(&'a str, Vec<f64>)>,
}

impl Output {
    pub fn create(dir: &Path, model_hash: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            stamp: format!("# model_hash={model_hash} seed={seed}"),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// CSV with the stamp, any `notes` as further `#` lines, then a header.
    pub fn csv<I>(&mut self, name: &str, notes: &[&str], columns: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut s = String::new();
        writeln!(s, "{}", self.stamp)?;
        for n in notes {
            writeln!(s, "# {n}")?;
        }
        writeln!(s, "{}", columns.join(","))?;
        for row in rows {
            writeln!(s, "{}", row.join(","))?;
        }
        self.write(name, s.as_bytes())
    }

    /// Plot-ready CSV `(x, y[, extra...][, group])`; `illustrates` names the
    /// result the figure shows.
    pub fn emit_plot_data(&mut self, name: &str, illustrates: &str, series: &PlotSeries) -> Result<()> {
        let mut cols = vec![series.x_label, series.y_label];
        cols.extend(series.extra.iter().map(|e| e.0));
        if series.group.is_some() {
            cols.push("group");
        }
        let rows = series.points.iter().enumerate().map(|(i, (x, y))| {
            let mut r = vec![num(*x), num(*y)];
            r.extend(series.extra.iter().map(|e| num(e.1[i])));
            if let Some(g) = &series.group {
                r.push(g[i].clone());
            }
            r
        });
        self.csv(name, &[illustrates], &cols, rows)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish<T: Serialize>(mut self, header: T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a, T> {
            #[serde(flatten)]
            header: T,
            files: &'a [FileEntry],
        }
        let files = std::mem::take(&mut self.files);
        let m = Manifest { header, files: &files };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form; non-finite values as `inf`/`nan`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
