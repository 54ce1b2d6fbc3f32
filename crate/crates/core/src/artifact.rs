//! Line-oriented artifact files: a JSON header line followed by one JSON
//! record per line, written atomically.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// First line of every file the toolkit writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    /// Format-specific header fields.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, serde_json::Value>,
}

impl Header {
    pub fn new(format: &str) -> Self {
        Header {
            format: format.to_string(),
            version: FORMAT_VERSION,
            seed: None,
            config_digest: None,
            fields: BTreeMap::new(),
        }
    }

    pub fn with_provenance(mut self, prov: &Provenance) -> Self {
        self.seed = prov.seed;
        self.config_digest = prov.config_digest.clone();
        self
    }

    pub fn field(mut self, key: &str, value: impl Serialize) -> Self {
        self.fields.insert(
            key.to_string(),
            serde_json::to_value(value).expect("header field serializes"),
        );
        self
    }
}

/// Seed and configuration digest stamped into artifact headers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_digest: Option<String>,
}

/// Write `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Serialize a header and records as JSON lines and write them atomically.
pub fn write_jsonl<T: Serialize>(path: &Path, header: &Header, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    serde_json::to_writer(&mut buf, header).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    buf.push(b'\n');
    for rec in records {
        serde_json::to_writer(&mut buf, rec).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

/// Read a JSON-lines artifact. The header must carry `format` and the
/// current version; blank lines are ignored anywhere after it.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, format: &str) -> Result<(Header, Vec<T>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header: Option<Header> = None;
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fmt_err = |message: String| Error::Format {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        match &header {
            None => {
                let h: Header = serde_json::from_str(&line)
                    .map_err(|e| fmt_err(format!("bad header: {e}")))?;
                if h.format != format {
                    return Err(fmt_err(format!(
                        "expected a `{format}` file, found `{}`",
                        h.format
                    )));
                }
                if h.version != FORMAT_VERSION {
                    return Err(Error::Version {
                        path: path.to_path_buf(),
                        found: h.version,
                        expected: FORMAT_VERSION,
                    });
                }
                header = Some(h);
            }
            Some(_) => {
                let rec = serde_json::from_str(&line).map_err(|e| fmt_err(e.to_string()))?;
                records.push(rec);
            }
        }
    }
    let header = header.ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        line: 0,
        message: "empty file, missing header".into(),
    })?;
    Ok((header, records))
}
