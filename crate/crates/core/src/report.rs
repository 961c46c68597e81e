//! Run reports and the per-metric summary tables built from them.
//!
//! Every command that is not a search writes a JSON [`RunReport`]; searches
//! write certificates. [`summarize`] reads any mix of both.

use crate::covering::{CoverFailure, ExtractionTrace, MultiplicityProfile};
use crate::error::{Error, Result};
use crate::measure::Weak11Row;
use crate::metric::MetricSpec;
use crate::wbcp::{read_certificate_unchecked, validate_config, Certificate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum RunReport {
    Cover {
        metric_spec: MetricSpec,
        algo: String,
        balls: usize,
        selected: Vec<usize>,
        tau: f64,
        multiplicity: MultiplicityProfile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        colors: Option<usize>,
        passed: bool,
        failures: Vec<CoverFailure>,
    },
    Extraction {
        metric_spec: MetricSpec,
        atoms: usize,
        balls: usize,
        disjoint: bool,
        decay_holds: bool,
        trace: ExtractionTrace,
    },
    Weak11 {
        metric_spec: MetricSpec,
        atoms: usize,
        functions: usize,
        max_ratio: f64,
        max_multiplicity: usize,
        bound_holds: bool,
        /// Rows of the function with the largest ratio.
        worst: Vec<Weak11Row>,
    },
    Density {
        metric_spec: MetricSpec,
        mu_atoms: usize,
        lambda_atoms: usize,
        absolutely_continuous_mass: f64,
        singular_mass: f64,
        /// Exact residual of the density representation, as a fraction.
        residual: String,
    },
}

impl RunReport {
    pub fn metric_spec(&self) -> &MetricSpec {
        match self {
            RunReport::Cover { metric_spec, .. }
            | RunReport::Extraction { metric_spec, .. }
            | RunReport::Weak11 { metric_spec, .. }
            | RunReport::Density { metric_spec, .. } => metric_spec,
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRow {
    pub metric: String,
    pub best_k: usize,
    pub margin: f64,
    pub valid: bool,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverRow {
    pub metric: String,
    pub algo: String,
    pub balls: usize,
    pub selected: usize,
    pub max_multiplicity: usize,
    pub colors: Option<usize>,
    pub passed: bool,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionRow {
    pub metric: String,
    pub atoms: usize,
    pub rounds: usize,
    pub q: usize,
    pub u: f64,
    pub final_residual: f64,
    pub decay_holds: bool,
    pub disjoint: bool,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Weak11SummaryRow {
    pub metric: String,
    pub atoms: usize,
    pub functions: usize,
    pub max_ratio: f64,
    pub max_multiplicity: usize,
    pub bound_holds: bool,
    pub source: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub families: Vec<FamilyRow>,
    pub covers: Vec<CoverRow>,
    pub extractions: Vec<ExtractionRow>,
    pub weak11: Vec<Weak11SummaryRow>,
    /// `(source, error)` for every input that could not be read.
    pub malformed: Vec<(String, String)>,
}

enum Input {
    Certificate(Box<Certificate>),
    Report(Box<RunReport>),
}

fn classify(text: &str) -> Result<Input> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("format_version").is_some() {
        let mut cert = read_certificate_unchecked(text)?;
        cert.margin = validate_config(&cert.config)?;
        Ok(Input::Certificate(Box::new(cert)))
    } else if value.get("report").is_some() {
        Ok(Input::Report(Box::new(serde_json::from_value(value)?)))
    } else {
        Err(Error::Format(
            "neither a certificate nor a run report".into(),
        ))
    }
}

/// Builds the summary tables from `(source name, file contents)` pairs.
///
/// Families keep one row per metric: the largest valid family (ties go to the
/// larger margin, then to the source name), or the best invalid one when no
/// valid certificate exists. Other tables keep every input. Rows are sorted
/// by metric label and source, so the output does not depend on input order.
pub fn summarize(inputs: &[(String, String)]) -> Summary {
    let mut summary = Summary::default();
    let mut best: BTreeMap<String, FamilyRow> = BTreeMap::new();
    for (source, text) in inputs {
        match classify(text) {
            Err(e) => summary.malformed.push((source.clone(), e.to_string())),
            Ok(Input::Certificate(cert)) => {
                let row = FamilyRow {
                    metric: cert.config.spec.label(),
                    best_k: cert.k(),
                    margin: cert.margin,
                    valid: cert.is_valid(),
                    restarts: cert.budget.restarts,
                    iterations: cert.budget.iterations,
                    seed: cert.seed,
                    source: source.clone(),
                };
                let key = |r: &FamilyRow| (r.valid, r.best_k, r.margin);
                let replace = match best.get(&row.metric) {
                    None => true,
                    Some(old) => match key(&row).partial_cmp(&key(old)) {
                        Some(std::cmp::Ordering::Greater) => true,
                        Some(std::cmp::Ordering::Equal) => row.source < old.source,
                        _ => false,
                    },
                };
                if replace {
                    best.insert(row.metric.clone(), row);
                }
            }
            Ok(Input::Report(report)) => {
                let metric = report.metric_spec().label();
                match *report {
                    RunReport::Cover {
                        algo,
                        balls,
                        selected,
                        multiplicity,
                        colors,
                        passed,
                        ..
                    } => summary.covers.push(CoverRow {
                        metric,
                        algo,
                        balls,
                        selected: selected.len(),
                        max_multiplicity: multiplicity.max,
                        colors,
                        passed,
                        source: source.clone(),
                    }),
                    RunReport::Extraction {
                        atoms,
                        disjoint,
                        decay_holds,
                        trace,
                        ..
                    } => summary.extractions.push(ExtractionRow {
                        metric,
                        atoms,
                        rounds: trace.rounds.len(),
                        q: trace.q,
                        u: trace.u,
                        final_residual: trace.final_residual(),
                        decay_holds,
                        disjoint,
                        source: source.clone(),
                    }),
                    RunReport::Weak11 {
                        atoms,
                        functions,
                        max_ratio,
                        max_multiplicity,
                        bound_holds,
                        ..
                    } => summary.weak11.push(Weak11SummaryRow {
                        metric,
                        atoms,
                        functions,
                        max_ratio,
                        max_multiplicity,
                        bound_holds,
                        source: source.clone(),
                    }),
                    RunReport::Density { .. } => {}
                }
            }
        }
    }
    summary.families = best.into_values().collect();
    summary
        .covers
        .sort_by(|a, b| (&a.metric, &a.source).cmp(&(&b.metric, &b.source)));
    summary
        .extractions
        .sort_by(|a, b| (&a.metric, &a.source).cmp(&(&b.metric, &b.source)));
    summary
        .weak11
        .sort_by(|a, b| (&a.metric, &a.source).cmp(&(&b.metric, &b.source)));
    summary.malformed.sort();
    summary
}

fn csv_table<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

impl Summary {
    /// `(file name, CSV contents)` for every table, in a fixed order.
    pub fn tables(&self) -> Result<Vec<(&'static str, String)>> {
        Ok(vec![
            (
                "families.csv",
                csv_table(
                    &[
                        "metric",
                        "best_k",
                        "margin",
                        "valid",
                        "restarts",
                        "iterations",
                        "seed",
                        "source",
                    ],
                    &self.families,
                )?,
            ),
            (
                "covers.csv",
                csv_table(
                    &[
                        "metric",
                        "algo",
                        "balls",
                        "selected",
                        "max_multiplicity",
                        "colors",
                        "passed",
                        "source",
                    ],
                    &self.covers,
                )?,
            ),
            (
                "extractions.csv",
                csv_table(
                    &[
                        "metric",
                        "atoms",
                        "rounds",
                        "q",
                        "u",
                        "final_residual",
                        "decay_holds",
                        "disjoint",
                        "source",
                    ],
                    &self.extractions,
                )?,
            ),
            (
                "weak11.csv",
                csv_table(
                    &[
                        "metric",
                        "atoms",
                        "functions",
                        "max_ratio",
                        "max_multiplicity",
                        "bound_holds",
                        "source",
                    ],
                    &self.weak11,
                )?,
            ),
            (
                "malformed.csv",
                csv_table(&["source", "error"], &self.malformed)?,
            ),
        ])
    }

    pub fn write_tables(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, text) in self.tables()? {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Point;
    use crate::wbcp::{export_certificate, BesicovitchConfig, SearchBudget, DEFAULT_PRECISION};

    fn cert(k: usize) -> String {
        let centers = (0..k)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                Point::new(vec![t.cos(), t.sin()]).unwrap()
            })
            .collect();
        let config = BesicovitchConfig::new(
            MetricSpec::Euclidean { n: 2 },
            Point::origin(2),
            centers,
            vec![1.01; k],
            None,
        )
        .unwrap();
        export_certificate(
            &Certificate::from_config(config, DEFAULT_PRECISION, SearchBudget::default()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn empty_input() {
        let s = summarize(&[]);
        assert!(s.families.is_empty());
        let tables = s.tables().unwrap();
        assert_eq!(
            tables[0].1,
            "metric,best_k,margin,valid,restarts,iterations,seed,source\n"
        );
    }

    #[test]
    fn keeps_largest_family_per_metric() {
        let inputs = vec![
            ("a.json".to_string(), cert(4)),
            ("b.json".to_string(), cert(5)),
        ];
        let s = summarize(&inputs);
        assert_eq!(s.families.len(), 1);
        assert_eq!(s.families[0].best_k, 5);
        assert_eq!(s.families[0].source, "b.json");
        let mut rev = inputs.clone();
        rev.reverse();
        assert_eq!(summarize(&rev), s);
    }

    #[test]
    fn malformed_inputs_are_listed() {
        let inputs = vec![
            ("bad.json".to_string(), "{".to_string()),
            ("odd.json".to_string(), "{}".to_string()),
            ("ok.json".to_string(), cert(3)),
        ];
        let s = summarize(&inputs);
        assert_eq!(s.families.len(), 1);
        assert_eq!(s.malformed.len(), 2);
        assert_eq!(s.malformed[0].0, "bad.json");
    }
}
