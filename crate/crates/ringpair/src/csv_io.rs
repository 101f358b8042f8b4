//! CSV conventions.
//!
//! Every file starts with a header row. Floats are written in the shortest
//! form that parses back to the same `f64`, so write→read is lossless.
//! Time-tag files have the header `channel,time_ps` with channel 0 for the
//! signal arm and 1 for the idler arm.

use std::fs::File;
use std::path::Path;

use ringpair_core::estimation::{XYPoint, XYSeries};
use ringpair_core::montecarlo::{Channel, TagStreams, TimeTag};

use crate::error::{Error, Result};
use crate::output::write_atomic;

/// Header of time-tag files.
pub const TAG_HEADER: [&str; 2] = ["channel", "time_ps"];

/// Shortest round-trip representation, switching to exponent notation for
/// very large or small magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.into(),
            line,
            reason: format!("{kind:?}"),
        },
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, column: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(column).ok_or_else(|| Error::Parse {
        path: path.into(),
        line,
        reason: format!("missing column `{name}`"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        reason: format!("`{raw}` is not a valid {name}"),
    })
}

/// Header and numeric rows of a CSV file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Index of the column named `name`.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// All values of the column named `name`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Reads a CSV of numbers. Every row must have as many fields as the header.
pub fn read_table_csv(path: &Path) -> Result<Table> {
    let mut reader = open_reader(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::EmptySeries { path: path.into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = (0..header.len())
            .map(|k| parse_field::<f64>(path, &record, k, &header[k]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Writes `rows` under `header`, atomically.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(bad) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(Error::Argument {
            name: "rows",
            reason: format!("row has {} fields, header has {}", bad.len(), header.len()),
        });
    }
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for row in rows {
            out.write_record(row.iter().map(|&x| format_float(x)))?;
        }
        out.flush()
    })
}

/// Reads `x,y` or `x,y,sigma` columns (header names are free) into a series.
pub fn read_xy_csv(path: &Path) -> Result<XYSeries> {
    let table = read_table_csv(path)?;
    if !(2..=3).contains(&table.header.len()) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: format!("expected 2 or 3 columns, found {}", table.header.len()),
        });
    }
    if table.rows.is_empty() {
        return Err(Error::EmptySeries { path: path.into() });
    }
    let points = table
        .rows
        .iter()
        .map(|r| XYPoint { x: r[0], y: r[1], sigma: r.get(2).copied() })
        .collect();
    Ok(XYSeries::new(points)?)
}

/// Reads a time-tag file. Each channel must be in ascending time order.
pub fn read_tags_csv(path: &Path) -> Result<TagStreams> {
    let mut reader = open_reader(path)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(TAG_HEADER) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: format!("header must be `{}`", TAG_HEADER.join(",")),
        });
    }
    let mut tags = Vec::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(|e| csv_error(path, e))? {
        let code: u8 = parse_field(path, &record, 0, "channel")?;
        let channel = Channel::from_code(code).ok_or_else(|| Error::Parse {
            path: path.into(),
            line: record.position().map_or(0, |p| p.line()),
            reason: format!("channel must be 0 or 1, found {code}"),
        })?;
        let time_ps = parse_field(path, &record, 1, "time_ps")?;
        tags.push(TimeTag { channel, time_ps });
    }
    Ok(TagStreams::from_tags(&tags)?)
}

/// Writes both arms merged into one time-ordered tag file, atomically.
pub fn write_tags_csv(path: &Path, streams: &TagStreams) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", TAG_HEADER.join(","))?;
        for tag in streams.to_tags() {
            writeln!(w, "{},{}", tag.channel.code(), tag.time_ps)?;
        }
        Ok(())
    })
}
