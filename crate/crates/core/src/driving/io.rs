//! Path files: one `# {json header}` line, a `t,v` header row, then rows.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::DrivingPath;
use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathHeader {
    pub kappa: f64,
    pub dt: f64,
    pub seed: u64,
    pub generator_id: String,
}

impl DrivingPath {
    pub fn header(&self) -> PathHeader {
        PathHeader {
            kappa: self.kappa,
            dt: self.dt,
            seed: self.seed,
            generator_id: self.generator_id.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.header())?)?;
        writeln!(out, "t,v")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.time_at(k), v)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| LabError::Parse("empty path file".into()))??;
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| LabError::Parse("missing `#` header line".into()))?;
        let header: PathHeader = serde_json::from_str(json.trim())?;
        let cols = lines
            .next()
            .ok_or_else(|| LabError::Parse("missing column header".into()))??;
        if cols.trim() != "t,v" {
            return Err(LabError::Parse(format!("expected `t,v` columns, got `{cols}`")));
        }
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| LabError::Parse(format!("row {row}: expected two columns")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| LabError::Parse(format!("row {row}: {e}")))?;
            values.push(v);
        }
        DrivingPath::new(header.kappa, header.dt, values, header.seed, header.generator_id)
    }
}
