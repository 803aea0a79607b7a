//! Output envelopes and atomic file writes.
//!
//! JSON outputs are `{ "meta": …, "data": … }`. CSV outputs carry the same
//! metadata as a single `# meta {json}` comment line above the header row, so
//! every file is self-describing and reruns with the same parameters are
//! byte-identical (no timestamps, no host names).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};

/// `git describe` of the build, or the crate version outside a checkout.
pub fn git_describe() -> &'static str {
    env!("LOEWNER_LAB_GIT_DESCRIBE")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub git_describe: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: Value,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Meta {
    pub fn new(command: &str, params: Value) -> Self {
        Self {
            tool: "loewner-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            git_describe: git_describe().into(),
            command: command.into(),
            kappa: None,
            seed: None,
            params,
            notes: Vec::new(),
        }
    }

    pub fn kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub meta: &'a Meta,
    pub data: &'a T,
}

/// Pretty JSON envelope with a trailing newline.
pub fn to_json<T: Serialize>(meta: &Meta, data: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, data })?;
    s.push('\n');
    Ok(s)
}

/// Flat CSV of `rows` (header from the field names) under a `# meta` line.
pub fn to_csv<R: Serialize>(meta: &Meta, rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    writeln!(buf, "# meta {}", serde_json::to_string(meta)?)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row).map_err(|e| LabError::Parse(format!("csv: {e}")))?;
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| LabError::Parse(e.to_string()))
}

/// Render `data` as JSON or `rows` as CSV.
pub fn render<T: Serialize, R: Serialize>(
    format: OutputFormat,
    meta: &Meta,
    data: &T,
    rows: &[R],
) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(meta, data),
        OutputFormat::Csv => to_csv(meta, rows),
    }
}

/// Metadata line of a CSV written by [`to_csv`].
pub fn read_csv_meta(text: &str) -> Result<Meta> {
    let line = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# meta "))
        .ok_or_else(|| LabError::Parse("missing '# meta' line".into()))?;
    Ok(serde_json::from_str(line)?)
}

/// Write `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[derive(Serialize)]
    struct Row {
        alpha: f64,
        value: f64,
    }

    fn meta() -> Meta {
        Meta::new("spectrum", json!({"n_points": 3})).kappa(6.0).seed(7)
    }

    #[test]
    fn csv_has_meta_line_and_header() {
        let rows = [Row { alpha: 0.5, value: 1.0 }, Row { alpha: 1.0, value: 1.75 }];
        let text = to_csv(&meta(), &rows).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# meta {"));
        assert_eq!(lines.next().unwrap(), "alpha,value");
        assert_eq!(lines.next().unwrap(), "0.5,1.0");
        let back = read_csv_meta(&text).unwrap();
        assert_eq!(back, meta());
    }

    #[test]
    fn json_envelope_shape() {
        let text = to_json(&meta(), &vec![1.0, 2.0]).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["kappa"], 6.0);
        assert_eq!(v["meta"]["seed"], 7);
        assert_eq!(v["meta"]["git_describe"], git_describe());
        assert_eq!(v["data"][1], 2.0);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn rendering_is_deterministic() {
        let rows = [Row { alpha: 0.1, value: 0.2 }];
        let a = render(OutputFormat::Csv, &meta(), &(), &rows).unwrap();
        let b = render(OutputFormat::Csv, &meta(), &(), &rows).unwrap();
        assert_eq!(a, b);
    }
}
