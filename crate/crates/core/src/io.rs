//! Columnar text files for ball families and atomic measures.
//!
//! One record per line, whitespace or comma separated: the point coordinates
//! followed by a radius (balls) or a mass (measures). Blank lines and lines
//! starting with `#` are ignored. Numbers are written in Rust's shortest
//! round-trip form, so a write/read cycle is lossless.

use crate::covering::BallFamily;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::metric::{Ball, MetricSpec, Point};
use std::fmt::Write as _;
use std::path::Path;

fn rows(text: &str, width: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {width} columns, found {}", fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn split_row(line: usize, mut fields: Vec<f64>) -> Result<(Point, f64)> {
    let last = fields.pop().expect("width is at least two");
    let p = Point::new(fields).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })?;
    Ok((p, last))
}

pub fn parse_balls(text: &str, spec: &MetricSpec) -> Result<BallFamily> {
    let balls = rows(text, spec.dim() + 1)?
        .into_iter()
        .map(|(line, f)| {
            let (c, r) = split_row(line, f)?;
            Ball::new(c, r).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BallFamily::new(spec.clone(), balls)
}

pub fn parse_measure(text: &str, spec: &MetricSpec) -> Result<AtomicMeasure> {
    let atoms = rows(text, spec.dim() + 1)?
        .into_iter()
        .map(|(line, f)| split_row(line, f))
        .collect::<Result<Vec<_>>>()?;
    AtomicMeasure::new(spec.clone(), atoms)
}

fn format_rows<'a>(header: &str, rows: impl Iterator<Item = (&'a [f64], f64)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {header}");
    for (coords, last) in rows {
        for c in coords {
            let _ = write!(s, "{c:?} ");
        }
        let _ = writeln!(s, "{last:?}");
    }
    s
}

pub fn format_balls(family: &BallFamily) -> String {
    format_rows(
        "center coordinates, radius",
        family.balls.iter().map(|b| (b.center.coords(), b.radius)),
    )
}

pub fn format_measure(measure: &AtomicMeasure) -> String {
    format_rows(
        "point coordinates, mass",
        measure.atoms().map(|(p, m)| (p.coords(), m)),
    )
}

pub fn read_balls(path: &Path, spec: &MetricSpec) -> Result<BallFamily> {
    parse_balls(&std::fs::read_to_string(path)?, spec)
}

pub fn read_measure(path: &Path, spec: &MetricSpec) -> Result<AtomicMeasure> {
    parse_measure(&std::fs::read_to_string(path)?, spec)
}
