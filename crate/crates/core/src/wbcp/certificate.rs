//! Portable certificate files.
//!
//! The file is JSON. Coordinates, radii and the margin are written with 17
//! significant digits so that a replay sees exactly the same doubles.

use super::search::SearchBudget;
use super::{validate_config, BesicovitchConfig};
use crate::error::{Error, Result};
use crate::metric::{MetricSpec, Point};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use std::path::Path;

pub const CERTIFICATE_FORMAT_VERSION: u32 = 1;

/// Evaluation tolerance recorded in new certificates. A certificate is
/// accepted when its margin exceeds ten times its precision.
pub const DEFAULT_PRECISION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub config: BesicovitchConfig,
    pub margin: f64,
    pub precision: f64,
    pub seed: u64,
    pub budget: SearchBudget,
}

impl Certificate {
    /// Recomputes the margin of `config` and wraps it.
    pub fn from_config(
        config: BesicovitchConfig,
        precision: f64,
        budget: SearchBudget,
    ) -> Result<Self> {
        let margin = validate_config(&config)?;
        Ok(Certificate {
            config,
            margin,
            precision,
            seed: budget.seed,
            budget,
        })
    }

    pub fn k(&self) -> usize {
        self.config.len()
    }

    pub fn threshold(&self) -> f64 {
        10.0 * self.precision
    }

    pub fn is_valid(&self) -> bool {
        self.margin > self.threshold()
    }
}

/// A double written with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(transparent)]
struct Exact(f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!(
                "non-finite value {}",
                self.0
            )));
        }
        let raw =
            RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn exact_vec(v: &[f64]) -> Vec<Exact> {
    v.iter().copied().map(Exact).collect()
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    format_version: u32,
    metric_spec: MetricSpec,
    witness: Vec<Exact>,
    centers: Vec<Vec<Exact>>,
    radii: Vec<Exact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_cap: Option<Exact>,
    margin: Exact,
    precision: f64,
    seed: u64,
    budget: SearchBudget,
}

impl CertificateFile {
    fn from_cert(cert: &Certificate) -> Self {
        let c = &cert.config;
        CertificateFile {
            format_version: CERTIFICATE_FORMAT_VERSION,
            metric_spec: c.spec.clone(),
            witness: exact_vec(c.witness.coords()),
            centers: c.centers.iter().map(|p| exact_vec(p.coords())).collect(),
            radii: exact_vec(&c.radii),
            radius_cap: c.radius_cap.map(Exact),
            margin: Exact(cert.margin),
            precision: cert.precision,
            seed: cert.seed,
            budget: cert.budget.clone(),
        }
    }

    fn into_parts(self) -> Result<(BesicovitchConfig, f64, f64, u64, SearchBudget)> {
        if self.format_version != CERTIFICATE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let pt = |v: Vec<Exact>| Point::new(v.into_iter().map(|e| e.0).collect());
        let config = BesicovitchConfig::new(
            self.metric_spec,
            pt(self.witness)?,
            self.centers
                .into_iter()
                .map(pt)
                .collect::<Result<Vec<_>>>()?,
            self.radii.into_iter().map(|e| e.0).collect(),
            self.radius_cap.map(|e| e.0),
        )?;
        if !(self.precision > 0.0 && self.precision.is_finite()) {
            return Err(Error::Format(format!(
                "precision must be positive, got {}",
                self.precision
            )));
        }
        Ok((
            config,
            self.margin.0,
            self.precision,
            self.seed,
            self.budget,
        ))
    }
}

/// Serialises a certificate to its text form.
pub fn export_certificate(cert: &Certificate) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&CertificateFile::from_cert(cert))?;
    text.push('\n');
    Ok(text)
}

pub fn write_certificate(cert: &Certificate, path: &Path) -> Result<()> {
    std::fs::write(path, export_certificate(cert)?)?;
    Ok(())
}

/// Parses a certificate, keeping the margin stored in the file.
pub fn read_certificate_unchecked(text: &str) -> Result<Certificate> {
    let file: CertificateFile = serde_json::from_str(text)?;
    let (config, margin, precision, seed, budget) = file.into_parts()?;
    Ok(Certificate {
        config,
        margin,
        precision,
        seed,
        budget,
    })
}

/// Parses and re-validates a certificate. The margin is recomputed; if
/// `precision` is given it replaces the one stored in the file. Fails with
/// [`Error::ValidationFailed`] (carrying the recomputed margin) when the
/// configuration no longer clears the acceptance threshold.
pub fn parse_certificate(text: &str, precision: Option<f64>) -> Result<Certificate> {
    let mut cert = read_certificate_unchecked(text)?;
    if let Some(p) = precision {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "precision must be positive, got {p}"
            )));
        }
        cert.precision = p;
    }
    cert.margin = validate_config(&cert.config)?;
    if !cert.is_valid() {
        return Err(Error::ValidationFailed {
            margin: cert.margin,
            threshold: cert.threshold(),
        });
    }
    Ok(cert)
}

pub fn import_certificate(path: &Path, precision: Option<f64>) -> Result<Certificate> {
    parse_certificate(&std::fs::read_to_string(path)?, precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Certificate {
        let spec = MetricSpec::Euclidean { n: 2 };
        let centers = (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0 + 0.1;
                Point::new(vec![t.cos(), t.sin()]).unwrap()
            })
            .collect();
        let config =
            BesicovitchConfig::new(spec, Point::origin(2), centers, vec![1.05; 5], None).unwrap();
        Certificate::from_config(config, DEFAULT_PRECISION, SearchBudget::default()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cert = sample();
        let text = export_certificate(&cert).unwrap();
        let back = parse_certificate(&text, None).unwrap();
        assert_eq!(back.config, cert.config);
        assert_eq!(back.margin.to_bits(), cert.margin.to_bits());
        assert_eq!(export_certificate(&back).unwrap(), text);
    }

    #[test]
    fn numbers_carry_seventeen_digits() {
        let text = export_certificate(&sample()).unwrap();
        assert!(text.contains("\"format_version\": 1"));
        assert!(text.contains("1.0500000000000000e0"), "{text}");
    }

    #[test]
    fn tampered_radius_is_reported() {
        let cert = sample();
        let text = export_certificate(&cert).unwrap();
        let tampered = text.replacen("1.0500000000000000e0", "1.5000000000000000e0", 1);
        match parse_certificate(&tampered, None) {
            Err(Error::ValidationFailed { margin, .. }) => assert!(margin < 0.0),
            other => panic!("expected validation failure, got {other:?}"),
        }
        // the unchecked reader still keeps the stored margin
        let raw = read_certificate_unchecked(&tampered).unwrap();
        assert_eq!(raw.margin, cert.margin);
    }

    #[test]
    fn precision_override_changes_verdict() {
        let cert = sample();
        let text = export_certificate(&cert).unwrap();
        assert!(parse_certificate(&text, Some(1e-12)).is_ok());
        assert!(matches!(
            parse_certificate(&text, Some(1.0)),
            Err(Error::ValidationFailed { .. })
        ));
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(parse_certificate("{", None), Err(Error::Json(_))));
        let text = export_certificate(&sample())
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(
            parse_certificate(&text, None),
            Err(Error::Format(_))
        ));
    }
}
