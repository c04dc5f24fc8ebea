use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{OutputKind, Report};
use crate::coeff::Level;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: impl ToString) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes the requested artifacts and returns their paths in writing order.
pub fn emit_report(report: &Report, out_dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let wants = |k| report.scenario.outputs.contains(&k);
    let mut written = Vec::new();
    if formats.contains(&Format::Json) && wants(OutputKind::Report) {
        let p = out_dir.join("report.json");
        fs::write(&p, report.to_json()).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    if !formats.contains(&Format::Csv) {
        return Ok(written);
    }
    let a = &report.artifacts;
    if wants(OutputKind::EigenTrack) && !a.eigen_track.is_empty() {
        let p = out_dir.join("eigen_track.csv");
        write_csv(
            &p,
            &["ell", "j", "m", "re", "im", "dist_to_Z"],
            a.eigen_track.iter().map(|(l, j, m, s, d)| {
                vec![l.to_string(), j.to_string(), m.to_string(), num(s.re), num(s.im), num(*d)]
            }),
        )?;
        written.push(p);
    }
    if wants(OutputKind::Series) && !a.series.is_empty() {
        let p = out_dir.join("series.csv");
        write_csv(
            &p,
            &["j", "m", "k", "re_coeff", "im_coeff"],
            a.series
                .iter()
                .map(|(j, m, k, c)| vec![j.to_string(), m.to_string(), k.to_string(), num(c.re), num(c.im)]),
        )?;
        written.push(p);
    }
    if let (true, Some(w)) = (wants(OutputKind::Witness), &a.witness) {
        let p = out_dir.join("witness.csv");
        let mut rows = Vec::new();
        for (field, table) in [("v", &w.v), ("g", &w.g)] {
            for (j, level) in table.levels() {
                if let Level::Modes { n_t, comps } = level {
                    for (k, comp) in comps.iter().enumerate() {
                        for (i, c) in comp.iter().enumerate() {
                            if c.norm() != 0.0 {
                                let n = i as i64 - *n_t as i64;
                                rows.push(vec![
                                    field.to_string(),
                                    j.to_string(),
                                    (k + 1).to_string(),
                                    n.to_string(),
                                    num(c.re),
                                    num(c.im),
                                ]);
                            }
                        }
                    }
                }
            }
        }
        write_csv(&p, &["field", "j", "k", "n", "re", "im"], rows.into_iter())?;
        written.push(p);
    }
    Ok(written)
}
