//! CSV reports with a `# key = value` comment header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// Resolved settings of a run, in the order they are printed.
pub type Settings = Vec<(&'static str, String)>;

pub fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

pub fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn open(output: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes the comment header, the column row and `rows` as CSV to
/// `output`, or to stdout.
pub fn write_csv(
    output: Option<&Path>,
    command: &str,
    settings: &Settings,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let target = output.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
    let wrap = |e: io::Error| CliError::Io {
        path: target.clone(),
        source: e,
    };
    let mut out = open(output)?;
    writeln!(out, "# shapecode {}", shapecode::VERSION).map_err(wrap)?;
    writeln!(out, "# command = {command}").map_err(wrap)?;
    for (k, v) in settings {
        writeln!(out, "# {k} = {v}").map_err(wrap)?;
    }
    let mut csv = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io {
        path: target.clone(),
        source: e.into(),
    };
    csv.write_record(columns).map_err(csv_err)?;
    for row in rows {
        csv.write_record(row).map_err(csv_err)?;
    }
    csv.flush().map_err(wrap)?;
    Ok(())
}

/// `key = value` lines on stdout for the single-item commands.
pub fn print_pairs(pairs: &Settings) {
    for (k, v) in pairs {
        println!("{k} = {v}");
    }
}
