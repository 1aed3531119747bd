use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?} (expected csv or json)"))),
        }
    }
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Seventeen significant digits in scientific notation, independent of locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_float(*x),
        Cell::Text(s) => s.clone(),
    }
}

fn csv_error(e: csv::Error) -> std::io::Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return io;
        }
        unreachable!("is_io_error implies an Io kind");
    }
    std::io::Error::other(e)
}

/// Header row then one line per row, LF line endings. Metadata is not part
/// of the CSV body.
pub fn write_csv<W: Write>(w: W, table: &Table) -> std::io::Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wr.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        wr.write_record(row.iter().map(cell_text)).map_err(csv_error)?;
    }
    wr.flush()
}

/// `{"metadata": {...}, "columns": [...], "rows": [[...], ...]}`.
pub fn write_json<W: Write>(mut w: W, table: &Table) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, table)?;
    w.write_all(b"\n")
}

pub fn write_table<W: Write>(w: W, table: &Table, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, table),
        Format::Json => write_json(w, table),
    }
}

/// Metadata sidecar written next to a CSV file: `out.csv` → `out.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

/// Write `table` to `path`, or to stdout when no path is given. CSV output
/// to a file also writes the metadata sidecar when metadata is present.
pub fn emit(table: &Table, path: Option<&Path>, format: Format) -> Result<()> {
    let Some(path) = path else {
        let stdout = std::io::stdout();
        return write_table(stdout.lock(), table, format).map_err(io_err(Path::new("<stdout>")));
    };
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_table(&mut w, table, format).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))?;
    if format == Format::Csv && !table.metadata.is_empty() {
        let side = sidecar_path(path);
        let mut w = BufWriter::new(File::create(&side).map_err(io_err(&side))?);
        serde_json::to_writer_pretty(&mut w, &table.metadata).map_err(|e| io_err(&side)(e.into()))?;
        w.write_all(b"\n").map_err(io_err(&side))?;
        w.flush().map_err(io_err(&side))?;
    }
    Ok(())
}

fn parse_cell(s: &str) -> Cell {
    match s.parse::<f64>() {
        Ok(x) => Cell::Num(x),
        Err(_) => Cell::Text(s.to_owned()),
    }
}

pub fn read_csv(text: &str) -> std::result::Result<Table, String> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let columns: Vec<String> = rd
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut table = Table::new(columns);
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        table.rows.push(rec.iter().map(parse_cell).collect());
    }
    Ok(table)
}

pub fn read_json(text: &str) -> std::result::Result<Table, String> {
    let mut table: Table = serde_json::from_str(text).map_err(|e| e.to_string())?;
    // non-finite numbers travel as strings
    for row in &mut table.rows {
        for c in row.iter_mut() {
            if let Cell::Text(s) = c {
                if let Ok(x) = s.parse::<f64>() {
                    if !x.is_finite() {
                        *c = Cell::Num(x);
                    }
                }
            }
        }
    }
    Ok(table)
}

/// Load a table written by [`emit`], picking the format from the extension
/// (CSV unless `.json`). A CSV sidecar, if present, restores the metadata.
pub fn load(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |message| Error::Parse {
        path: path.to_owned(),
        message,
    };
    match Format::from_path(path).unwrap_or(Format::Csv) {
        Format::Json => read_json(&text).map_err(parse_err),
        Format::Csv => {
            let mut table = read_csv(&text).map_err(parse_err)?;
            let side = sidecar_path(path);
            if side.exists() {
                let meta = std::fs::read_to_string(&side).map_err(io_err(&side))?;
                let value: Value = serde_json::from_str(&meta).map_err(|e| Error::Parse {
                    path: side.clone(),
                    message: e.to_string(),
                })?;
                if let Value::Object(map) = value {
                    table.metadata = map.into_iter().collect();
                }
            }
            Ok(table)
        }
    }
}
