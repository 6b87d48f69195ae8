//! Artifact emission: JSON with 17 significant digits, CSV with a provenance
//! preamble, and SVG line plots. Files are written atomically.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::Formats;
use crate::error::CliError;

/// Pretty JSON whose floats are printed as `{:.16e}`.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(io::Error::new(io::ErrorKind::InvalidData, e)))?;
    buf.push(b'\n');
    Ok(buf)
}

/// `{:.16e}`, with `inf`/`-inf`/`nan` spelled out.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }
}

/// Output directory plus the provenance stamped on every artifact.
pub struct Artifacts {
    pub dir: PathBuf,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub formats: Formats,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

impl Artifacts {
    pub fn new(dir: &str, command: &str, config_hash: String, seed: u64, formats: Formats) -> Self {
        Self {
            dir: PathBuf::from(dir),
            command: command.to_string(),
            config_hash,
            seed,
            formats,
            written: Vec::new(),
        }
    }

    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `name` if JSON output is enabled; `body` must serialize to an
    /// object.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        if !self.formats.json {
            return Ok(());
        }
        let stamped = Stamped {
            command: &self.command,
            config_hash: &self.config_hash,
            seed: self.seed,
            body,
        };
        let bytes = to_json_bytes(&stamped)?;
        self.write_atomic(name, &bytes)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        if !self.formats.csv {
            return Ok(());
        }
        let mut buf = format!(
            "# command={}\n# config_hash={}\n# seed={}\n",
            self.command, self.config_hash, self.seed
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&table.header).map_err(csv_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        self.write_atomic(name, &buf)
    }

    pub fn svg(&mut self, name: &str, plot: &crate::svg::Plot) -> Result<(), CliError> {
        if !self.formats.svg {
            return Ok(());
        }
        let text = plot.render(&self.config_hash, self.seed);
        self.write_atomic(name, text.as_bytes())
    }

    pub fn paths(&self) -> Vec<String> {
        self.written.iter().map(|p| display(p)).collect()
    }
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e))
}
