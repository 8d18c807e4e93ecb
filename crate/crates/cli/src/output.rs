use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes rows as they arrive. CSV rows are flushed one by one so a run
/// cut short still leaves every finished row behind; JSON is buffered into
/// a single array and written by [`RowSink::finish`].
pub enum RowSink {
    Csv(csv::Writer<Box<dyn Write>>),
    Json {
        out: Box<dyn Write>,
        rows: Vec<serde_json::Value>,
    },
}

impl RowSink {
    pub fn open(out: Option<&Path>, format: Format) -> io::Result<Self> {
        let writer: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout()),
        };
        Ok(match format {
            Format::Csv => RowSink::Csv(csv::Writer::from_writer(writer)),
            Format::Json => RowSink::Json {
                out: writer,
                rows: Vec::new(),
            },
        })
    }

    pub fn push<T: Serialize>(&mut self, row: &T) -> io::Result<()> {
        match self {
            RowSink::Csv(w) => {
                w.serialize(row).map_err(io::Error::other)?;
                w.flush()
            }
            RowSink::Json { rows, .. } => {
                rows.push(serde_json::to_value(row).map_err(io::Error::other)?);
                Ok(())
            }
        }
    }

    pub fn finish(self) -> io::Result<()> {
        match self {
            RowSink::Csv(mut w) => w.flush(),
            RowSink::Json { mut out, rows } => {
                serde_json::to_writer_pretty(&mut out, &rows).map_err(io::Error::other)?;
                writeln!(out)?;
                out.flush()
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, F: Serialize> {
    pub subcommand: &'a str,
    pub flags: &'a F,
    pub config_digest: String,
    pub version: &'static str,
    pub timestamp: u64,
}

impl<'a, F: Serialize> RunManifest<'a, F> {
    /// `inputs` are extra bytes that determine the result, such as the
    /// checksums of the tables that were loaded.
    pub fn new(subcommand: &'a str, flags: &'a F, inputs: &[&[u8]]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(flags).expect("flags serialize"));
        for input in inputs {
            hasher.update(input);
        }
        RunManifest {
            subcommand,
            flags,
            config_digest: hex::encode(hasher.finalize()),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write_beside(&self, out: &Path) -> io::Result<PathBuf> {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, self).map_err(io::Error::other)?;
        writeln!(file)?;
        file.flush()?;
        Ok(path)
    }
}
