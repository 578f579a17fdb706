//! CSV and JSON emission. Every format writes the same field names; CSV
//! always carries its header row.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render<T: Serialize>(
    rows: &[T],
    header: &[&str],
    format: Format,
) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(header).map_err(|e| e.to_string())?;
            for row in rows {
                w.serialize(row).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

/// Writes to `out`, or to stdout when absent.
pub fn emit<T: Serialize>(
    rows: &[T],
    header: &[&str],
    format: Format,
    out: Option<&Path>,
) -> Result<(), String> {
    let bytes = render(rows, header, format)?;
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    }
}
