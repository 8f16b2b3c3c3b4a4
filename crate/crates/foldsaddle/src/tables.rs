//! CSV and JSON output for diagrams and sphere sweeps.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use foldsaddle_core::bifurcation::{topological_class, CaseLabel, Diagram, SphereSample};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {what}")]
    Parse { line: usize, what: String },
}

pub const DIAGRAM_HEADER: &str = "lambda,beta,case,class";
pub const SPHERE_HEADER: &str = "lambda,mu,beta,case,class";

fn label_cell(l: Option<CaseLabel>) -> String {
    l.map(|l| l.to_string()).unwrap_or_default()
}

fn class_cell(l: Option<CaseLabel>) -> String {
    l.map(|l| topological_class(l).representative.to_string()).unwrap_or_default()
}

/// Row-major CSV; floats use the shortest decimal that round-trips.
pub fn write_csv<W: Write>(d: &Diagram, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{DIAGRAM_HEADER}")?;
    for c in &d.cells {
        writeln!(w, "{},{},{},{}", c.lambda, c.beta, label_cell(c.label), class_cell(c.label))?;
    }
    w.flush()
}

pub fn summary(d: &Diagram) -> Value {
    let hist: BTreeMap<String, usize> = d.histogram().into_iter().map(|(l, n)| (l.to_string(), n)).collect();
    let boundaries: Vec<Value> = d
        .polylines
        .iter()
        .map(|p| json!({ "name": p.name, "points": p.points.iter().map(|(l, b)| json!([l, b])).collect::<Vec<_>>() }))
        .collect();
    json!({
        "tau": d.tau.name(),
        "alpha": d.alpha,
        "lambda_range": [d.lambda_range.0, d.lambda_range.1],
        "beta_range": [d.beta_range.0, d.beta_range.1],
        "resolution": [d.resolution.0, d.resolution.1],
        "regime": d.regimes().iter().map(|r| r.name()).collect::<Vec<_>>(),
        "boundaries": boundaries,
        "histogram": hist,
        "unlabelled": d.cells.iter().filter(|c| c.label.is_none()).count(),
    })
}

pub fn write_json<W: Write>(d: &Diagram, mut w: W) -> Result<(), TableError> {
    serde_json::to_writer_pretty(&mut w, &summary(d))?;
    writeln!(w)?;
    Ok(())
}

/// Writes the CSV table and JSON summary of a diagram.
pub fn emit_tables(d: &Diagram, csv_path: &std::path::Path, json_path: &std::path::Path) -> Result<(), TableError> {
    write_csv(d, std::io::BufWriter::new(std::fs::File::create(csv_path)?))?;
    write_json(d, std::io::BufWriter::new(std::fs::File::create(json_path)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub lambda: f64,
    pub beta: f64,
    pub case: Option<CaseLabel>,
    pub class: Option<CaseLabel>,
}

fn parse_label(s: &str, line: usize) -> Result<Option<CaseLabel>, TableError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| TableError::Parse { line, what: format!("bad label `{s}`") })
}

fn parse_f64(s: &str, line: usize) -> Result<f64, TableError> {
    s.parse().map_err(|_| TableError::Parse { line, what: format!("bad number `{s}`") })
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<Row>, TableError> {
    let mut rows = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if n == 0 {
            if line != DIAGRAM_HEADER {
                return Err(TableError::Parse { line: 1, what: "unexpected header".into() });
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(TableError::Parse { line: n + 1, what: "expected 4 fields".into() });
        }
        rows.push(Row {
            lambda: parse_f64(f[0], n + 1)?,
            beta: parse_f64(f[1], n + 1)?,
            case: parse_label(f[2], n + 1)?,
            class: parse_label(f[3], n + 1)?,
        });
    }
    Ok(rows)
}

pub fn write_sphere_csv<W: Write>(samples: &[SphereSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SPHERE_HEADER}")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{}", s.lambda, s.alpha + 1.0, s.beta, label_cell(s.label), class_cell(s.label))?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use foldsaddle_core::bifurcation::sweep_grid;
    use foldsaddle_core::TauKind;

    #[test]
    fn csv_roundtrip_is_lossless() {
        let d = sweep_grid(TauKind::Vis, -0.5, (-0.9, 0.9), (-0.7, 0.7), (7, 5));
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let rows = read_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 35);
        for (r, c) in rows.iter().zip(&d.cells) {
            assert_eq!(r.lambda.to_bits(), c.lambda.to_bits());
            assert_eq!(r.beta.to_bits(), c.beta.to_bits());
            assert_eq!(r.case, c.label);
        }
    }

    #[test]
    fn summary_fields() {
        let d = sweep_grid(TauKind::Vis, -1.0, (-0.5, 0.5), (0.1, 0.6), (4, 2));
        let v = summary(&d);
        assert_eq!(v["regime"][0], "thm4");
        let total: u64 = v["histogram"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(total, 8);
    }
}
