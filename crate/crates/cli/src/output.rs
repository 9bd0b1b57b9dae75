use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

pub type CsvOut = csv::Writer<BufWriter<File>>;

/// Opens `path` and writes the `#` header: tool version, resolved config, seed.
pub fn csv_writer(path: &Path, cfg: &RunConfig, columns: &[&str]) -> Result<CsvOut, CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# qarray {} {}", env!("CARGO_PKG_VERSION"), cfg.command)?;
    for (k, v) in cfg.entries() {
        writeln!(f, "# {k} = {v}")?;
    }
    writeln!(f, "# seed {}", cfg.raw("seed"))?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(columns)?;
    Ok(w)
}

pub fn row(w: &mut CsvOut, fields: &[String]) -> Result<(), CliError> {
    w.write_record(fields)?;
    Ok(())
}

/// Shortest round-trip formatting for floats.
pub fn num(x: f64) -> String {
    format!("{x}")
}
