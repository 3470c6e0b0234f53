//! Run logs on disk: `log.csv` plus a `meta.json` sidecar.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::{EpisodeRecord, RunLog, RunMetadata};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["episode", "reward", "steps", "outcome", "epsilon_or_noise", "mean_loss"];
pub const LOG_FILE: &str = "log.csv";
pub const META_FILE: &str = "meta.json";

pub fn write_rows<W: Write>(rows: &[EpisodeRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn rows_to_csv(rows: &[EpisodeRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Parses a log; the header must match [`CSV_HEADER`] exactly.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<EpisodeRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format {
            kind: "csv",
            detail: format!("header `{}` does not match `{}`", header.iter().collect::<Vec<_>>().join(","), CSV_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: EpisodeRecord = rec?;
        if !row.reward.is_finite() || !row.epsilon_or_noise.is_finite() {
            return Err(Error::Format {
                kind: "csv",
                detail: format!("non-finite value in episode {}", row.episode),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetaFile {
    #[serde(flatten)]
    meta: RunMetadata,
    wall_clock_secs: Option<f64>,
}

pub fn save_run(log: &RunLog, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(LOG_FILE);
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_rows(log.rows(), std::io::BufWriter::new(file))?;
    let meta = MetaFile {
        meta: log.meta().clone(),
        wall_clock_secs: log.wall_clock_secs(),
    };
    let meta_path = dir.join(META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
}

/// Loads a run directory. Without `meta.json` the metadata is inferred from the directory name.
pub fn load_run(dir: impl AsRef<Path>) -> Result<RunLog> {
    let dir = dir.as_ref();
    let csv_path = dir.join(LOG_FILE);
    let file = std::fs::File::open(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let rows = read_rows(std::io::BufReader::new(file))?;
    let meta_path = dir.join(META_FILE);
    let meta = if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        serde_json::from_str::<MetaFile>(&text).map_err(|e| Error::Format {
            kind: "metadata",
            detail: e.to_string(),
        })?
    } else {
        MetaFile {
            meta: RunMetadata {
                algorithm: String::new(),
                environment: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                seed: 0,
                config: String::new(),
            },
            wall_clock_secs: None,
        }
    };
    let mut log = RunLog::from_rows(meta.meta, rows)?;
    if let Some(t) = meta.wall_clock_secs {
        log.finish(t);
    }
    Ok(log)
}
