//! CSV and JSON rendering. Floats use the shortest decimal that round-trips.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{io_err, Result};

/// A record that can be written as one or more CSV lines.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn write_rows(&self, out: &mut Vec<Vec<String>>);
}

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), float)
}

pub fn render<R: CsvRecord + Serialize>(cfg: &RunConfig, records: &[R]) -> String {
    match cfg.format {
        Format::Csv => render_csv(cfg, records),
        Format::Json => render_json(cfg, records),
    }
}

pub fn render_csv<R: CsvRecord>(cfg: &RunConfig, records: &[R]) -> String {
    let mut s = format!("# config: {}\n", cfg.echo());
    s.push_str(&R::HEADER.join(","));
    s.push('\n');
    let mut rows = Vec::new();
    for r in records {
        r.write_rows(&mut rows);
    }
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Document<'a, R> {
    config: &'a RunConfig,
    records: &'a [R],
}

pub fn render_json<R: Serialize>(cfg: &RunConfig, records: &[R]) -> String {
    let mut s = serde_json::to_string_pretty(&Document {
        config: cfg,
        records,
    })
    .expect("records serialize");
    s.push('\n');
    s
}

/// Output destination, opened before any computation so that an unwritable
/// path fails fast.
pub enum Sink {
    Stdout,
    File(PathBuf, File),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Sink::Stdout),
            Some(p) => {
                let f = File::create(p).map_err(io_err(format!("opening {}", p.display())))?;
                Ok(Sink::File(p.to_path_buf(), f))
            }
        }
    }

    pub fn write(self, text: &str) -> Result<()> {
        match self {
            Sink::Stdout => match io::stdout().lock().write_all(text.as_bytes()) {
                // Reader went away (`| head`); nothing left to report.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(io_err("writing stdout")),
            },
            Sink::File(p, mut f) => f
                .write_all(text.as_bytes())
                .map_err(io_err(format!("writing {}", p.display()))),
        }
    }
}

/// `runs.csv` -> `runs_dist.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}
