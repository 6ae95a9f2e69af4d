use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// One emitted CSV as listed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub description: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub file: String,
    pub point: Value,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: Option<u64>,
    pub boundary_convention: &'static str,
    pub files: Vec<FileEntry>,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

pub const BOUNDARY_CONVENTION: &str =
    "a point on a region boundary belongs to the lower region; ties are within 1e-12*max(1,|threshold|)";

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Manifest {
            command: command.into(),
            seed,
            boundary_convention: BOUNDARY_CONVENTION,
            files: Vec::new(),
            failures: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn flatten_into(prefix: &str, v: Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k } else { format!("{prefix}_{k}") };
                flatten_into(&key, v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.into_iter().enumerate() {
                flatten_into(&format!("{prefix}_{i}"), v, out);
            }
        }
        v => {
            out.insert(prefix.to_string(), v);
        }
    }
}

/// Serializes to a single-level map; nested fields are joined with `_`.
pub fn flat<T: Serialize>(row: &T) -> Result<Map<String, Value>> {
    let mut out = Map::new();
    flatten_into("", serde_json::to_value(row)?, &mut out);
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        v => v.to_string(),
    }
}

/// Writes rows as RFC 4180 CSV. Columns are the union of keys in order of
/// first appearance; missing values are left empty.
pub fn write_rows(dir: &Path, name: &str, description: &str, rows: &[Map<String, Value>]) -> Result<FileEntry> {
    let mut columns: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&columns)?;
    for r in rows {
        w.write_record(columns.iter().map(|c| r.get(c).map(cell).unwrap_or_default()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(FileEntry {
        path: name.into(),
        description: description.into(),
        rows: rows.len(),
        columns,
    })
}

pub fn modes_tag(m: f64) -> String {
    format!("m{m}")
}
