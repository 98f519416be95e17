//! Serialization helpers: provenance stamps, 17-digit floats in JSON and CSV,
//! and staged writes that only touch the disk once everything is rendered.

use std::io;
use std::path::{Path, PathBuf};

use care_core::io::{format_f64, write_atomic};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const TOOL: &str = "care";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(run: &RunConfig) -> Self {
        let command = serde_json::to_value(run.command)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        Self { tool: TOOL, version: VERSION, command, config_sha256: run.config_hash(), seed: run.seed }
    }

    /// Leading comment line of every CSV file.
    pub fn csv_comment(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={} seed={}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// JSON document with the provenance block first.
#[derive(Serialize)]
pub struct Stamped<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub body: &'a T,
}

/// A CSV document built row by row.
pub struct Csv {
    text: String,
}

pub enum Cell<'a> {
    Str(&'a str),
    Int(u64),
    Float(f64),
}

impl Csv {
    pub fn new(provenance: &Provenance, header: &[&str]) -> Self {
        let mut text = provenance.csv_comment();
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        for (k, cell) in cells.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match cell {
                Cell::Str(s) => self.text.push_str(&quote(s)),
                Cell::Int(v) => self.text.push_str(&v.to_string()),
                Cell::Float(v) => self.text.push_str(&format_f64(*v)),
            }
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Files rendered in memory and written together once the command succeeds.
#[derive(Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, relative: impl AsRef<Path>, bytes: Vec<u8>) {
        self.files.push((relative.as_ref().to_path_buf(), bytes));
    }

    pub fn names(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    pub fn commit(self, out: &Path) -> CliResult<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (relative, bytes) in self.files {
            let path = out.join(relative);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}
