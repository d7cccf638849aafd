use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
struct Metadata<'a, C: Serialize> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    metadata: Metadata<'a, C>,
    records: &'a [R],
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// A reader that closed the pipe early (`| head`) is not an error.
pub fn io_result(result: io::Result<()>) -> Result<(), CliError> {
    match result {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

pub fn write_csv<R: Serialize>(sink: &mut dyn Write, records: &[R]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(sink);
    for r in records {
        if let Err(e) = writer.serialize(r) {
            return match e.into_kind() {
                csv::ErrorKind::Io(io) => io_result(Err(io)),
                other => Err(CliError::Io(format!("{other:?}"))),
            };
        }
    }
    io_result(writer.flush())
}

pub fn write_json<C: Serialize, R: Serialize>(
    sink: &mut dyn Write,
    command: &str,
    config: &C,
    records: &[R],
) -> Result<(), CliError> {
    let doc = Document {
        metadata: Metadata { artifact: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), command, config },
        records,
    };
    serde_json::to_writer_pretty(&mut *sink, &doc).map_err(io::Error::from).or_else(|e| io_result(Err(e)))?;
    io_result(writeln!(sink))
}
