//! Output plumbing shared by all subcommands: CSV and JSON writers with
//! fixed column order and 17-significant-digit floats, so identical configs
//! produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; relative paths are joined under $QVBS_OUT_DIR when set,
    /// and stdout is used when the flag is absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One emitted table row: a fixed header list and the matching cell texts.
pub trait TableRow {
    const HEADERS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn fmt_opt_int(x: Option<i64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Semicolon-joined list cell, so list-valued columns stay one CSV column.
pub fn fmt_float_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_float(x)).collect::<Vec<_>>().join(";")
}

pub fn fmt_int_list(xs: &[i64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a C,
    rows: &'a [R],
}

pub fn write_output<C, R>(
    command: &str,
    config: &C,
    rows: &[R],
    out: &OutArgs,
) -> Result<(), String>
where
    C: Serialize,
    R: Serialize + TableRow,
{
    let bytes = match out.format {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(&Document { command, config, rows })?,
    };
    match &out.out {
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| format!("cannot write to stdout: {e}")),
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)
                        .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
                }
            }
            fs::write(&path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
    }
}

/// Relative output paths land in $QVBS_OUT_DIR when the variable is set.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os("QVBS_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn to_csv<R: TableRow>(rows: &[R]) -> Result<Vec<u8>, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::HEADERS).map_err(|e| e.to_string())?;
    for row in rows {
        w.write_record(row.cells()).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(doc: &T) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter::new());
    doc.serialize(&mut ser).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    Ok(buf)
}

/// Pretty printer whose floats always carry 17 significant digits, keeping
/// JSON numerically lossless and byte-stable.
struct SciFormatter {
    pretty: PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        SciFormatter { pretty: PrettyFormatter::new() }
    }
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}
