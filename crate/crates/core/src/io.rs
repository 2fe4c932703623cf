//! Points CSV, ranges JSON lines and run reports.
//!
//! Points CSV has the header `x0,...,x{d-1},color[,weight]`. Color labels
//! are arbitrary strings, mapped to dense group ids in order of first
//! appearance.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::ColoredPointSet;
use crate::range::{Range, RangeFamily};

pub fn read_points_csv<R: Read>(reader: R) -> Result<ColoredPointSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    let color_at = cols.iter().position(|&c| c == "color").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing 'color' column".into(),
    })?;
    let weighted = match &cols[color_at + 1..] {
        [] => false,
        ["weight"] => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected x0..x{d-1},color[,weight]".into(),
            })
        }
    };
    let dim = color_at;
    if dim == 0 || (0..dim).any(|a| cols[a] != format!("x{a}")) {
        return Err(Error::Parse {
            line: 1,
            message: "coordinate columns must be x0..x{d-1}".into(),
        });
    }

    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut coords = Vec::new();
    let mut colors = Vec::new();
    let mut weights = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if rec.len() != cols.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", cols.len(), rec.len()),
            });
        }
        for a in 0..dim {
            let v: f64 = rec[a].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad coordinate '{}'", &rec[a]),
            })?;
            coords.push(v);
        }
        let label = rec[color_at].to_string();
        let id = *ids.entry(label.clone()).or_insert_with(|| {
            labels.push(label);
            labels.len() - 1
        });
        colors.push(id);
        if weighted {
            let w: f64 = rec[color_at + 1].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight '{}'", &rec[color_at + 1]),
            })?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Parse {
                    line,
                    message: format!("weight {w} must be positive"),
                });
            }
            weights.push(w);
        }
    }
    let k = labels.len();
    // labels "0".."k-1" (as written for unlabeled sets) keep their numbers
    let numeric: Vec<usize> = labels.iter().filter_map(|l| l.parse().ok()).collect();
    if numeric.len() == k && numeric.iter().all(|&v| v < k) && labels.iter().all(|l| !l.starts_with('0') || l == "0") {
        for c in &mut colors {
            *c = numeric[*c];
        }
        labels = (0..k).map(|c| c.to_string()).collect();
    }
    ColoredPointSet::from_flat(dim, coords, colors, weighted.then_some(weights), k)?.with_labels(labels)
}

pub fn load_points_csv(path: impl AsRef<Path>) -> Result<ColoredPointSet> {
    read_points_csv(File::open(path)?)
}

pub fn write_points_csv<W: Write>(x: &ColoredPointSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..x.dim()).map(|a| format!("x{a}")).collect();
    header.push("color".into());
    if x.weights().is_some() {
        header.push("weight".into());
    }
    w.write_record(&header).map_err(csv_io)?;
    for i in 0..x.len() {
        let mut rec: Vec<String> = x.point(i).iter().map(|v| v.to_string()).collect();
        rec.push(x.labels()[x.color(i)].clone());
        if x.weights().is_some() {
            rec.push(x.weight(i).to_string());
        }
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_points_csv(x: &ColoredPointSet, path: impl AsRef<Path>) -> Result<()> {
    write_points_csv(x, BufWriter::new(File::create(path)?))
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One JSON object per line; blank lines are skipped.
pub fn read_ranges_jsonl<R: Read>(reader: R) -> Result<RangeFamily> {
    let mut ranges = Vec::new();
    for (row, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Range = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: row + 1,
            message: e.to_string(),
        })?;
        r.validate().map_err(|e| Error::Parse {
            line: row + 1,
            message: e.to_string(),
        })?;
        ranges.push(r);
    }
    Ok(RangeFamily::new(ranges))
}

pub fn load_ranges_jsonl(path: impl AsRef<Path>) -> Result<RangeFamily> {
    read_ranges_jsonl(File::open(path)?)
}

pub fn write_ranges_jsonl<W: Write>(family: &RangeFamily, mut writer: W) -> Result<()> {
    for r in family {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_ranges_jsonl(family: &RangeFamily, path: impl AsRef<Path>) -> Result<()> {
    write_ranges_jsonl(family, BufWriter::new(File::create(path)?))
}

/// Summary of one algorithm run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: String,
    pub params: serde_json::Value,
    pub output_indices: Vec<usize>,
    pub size: usize,
    pub f2: f64,
    pub finf: f64,
    pub valid: bool,
    pub runtime_ms: f64,
    pub seed: u64,
}

pub fn save_report(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let text = "x0,x1,color,weight\n0.5,1,red,2\n1.5,-1,blue,1\n2,0,red,0.5\n";
        let x = read_points_csv(text.as_bytes()).unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(x.colors(), &[0, 1, 0]);
        assert_eq!(x.labels(), &["red".to_string(), "blue".to_string()]);
        let mut buf = Vec::new();
        write_points_csv(&x, &mut buf).unwrap();
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn csv_errors_carry_lines() {
        let text = "x0,color\n1,a\nnope,b\n";
        assert!(matches!(read_points_csv(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_points_csv("y,color\n1,a\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn jsonl_round_trip() {
        let fam = RangeFamily::new(vec![
            Range::rect(vec![0.0], vec![1.0]).unwrap(),
            Range::ball(vec![0.0, 1.0], 0.5).unwrap(),
            Range::explicit(vec![3, 1]),
        ]);
        let mut buf = Vec::new();
        write_ranges_jsonl(&fam, &mut buf).unwrap();
        assert_eq!(read_ranges_jsonl(buf.as_slice()).unwrap(), fam);
        let bad = "{\"type\":\"rect\",\"lo\":[0],\"hi\":[1]}\n{\"type\":\"cone\"}\n";
        assert!(matches!(read_ranges_jsonl(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = RunReport {
            algo: "fmc".into(),
            params: serde_json::json!({"eps": 0.1}),
            output_indices: vec![1, 2],
            size: 2,
            f2: 0.0,
            finf: 0.0,
            valid: true,
            runtime_ms: 1.5,
            seed: 7,
        };
        save_report(&r, &path).unwrap();
        assert_eq!(load_report(&path).unwrap(), r);
    }
}
