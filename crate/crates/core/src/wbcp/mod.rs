//! Besicovitch families: validation, radius normalisation, certificates and
//! the numerical search for large families.
//!
//! A configuration is a witness `w`, centers `x_1..x_k` and radii `r_1..r_k`.
//! It is a Besicovitch family when every ball contains the witness and no
//! ball contains another center:
//!
//! ```text
//! d(w, x_i) ≤ r_i            for all i
//! d(x_j, x_i) > r_i          for all i ≠ j
//! ```
//!
//! The *margin* is the smallest slack over all of these constraints (and over
//! `radius_cap - r_i` when a cap is set). Positive margin means valid.

mod brute;
mod certificate;
mod search;

pub use brute::{brute_force_bound, BruteForceVerdict};
pub use certificate::{
    export_certificate, import_certificate, parse_certificate, read_certificate_unchecked,
    write_certificate, Certificate, CERTIFICATE_FORMAT_VERSION, DEFAULT_PRECISION,
};
pub use search::{
    grow_family, grow_family_with, search_max_family, search_max_family_with, search_target,
    SearchBudget,
};

use crate::error::{Error, Result};
use crate::metric::{MetricSpec, Point};

/// Default relative slack added to the witness distance by [`canonical_tighten`].
pub const DEFAULT_TIGHTEN_ETA: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BesicovitchConfig {
    pub spec: MetricSpec,
    pub witness: Point,
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    pub radius_cap: Option<f64>,
}

impl BesicovitchConfig {
    pub fn new(
        spec: MetricSpec,
        witness: Point,
        centers: Vec<Point>,
        radii: Vec<f64>,
        radius_cap: Option<f64>,
    ) -> Result<Self> {
        spec.validate()?;
        if centers.is_empty() {
            return Err(Error::InvalidArgument(
                "a configuration needs at least one center".into(),
            ));
        }
        if centers.len() != radii.len() {
            return Err(Error::InvalidArgument(format!(
                "{} centers but {} radii",
                centers.len(),
                radii.len()
            )));
        }
        spec.check_dim(&witness)?;
        for c in &centers {
            spec.check_dim(c)?;
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive and finite, got {r}"
            )));
        }
        if let Some(cap) = radius_cap {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "radius cap must be positive, got {cap}"
                )));
            }
        }
        Ok(BesicovitchConfig {
            spec,
            witness,
            centers,
            radii,
            radius_cap,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Drops center `i` (and its radius).
    pub fn without(&self, i: usize) -> Option<Self> {
        if self.len() <= 1 || i >= self.len() {
            return None;
        }
        let mut out = self.clone();
        out.centers.remove(i);
        out.radii.remove(i);
        Some(out)
    }
}

/// Slack of every constraint family, split out for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginBreakdown {
    /// `min_i (r_i - d(w, x_i))`.
    pub witness: f64,
    /// `min_{i≠j} (d(x_j, x_i) - r_i)`; `+∞` for a single ball.
    pub separation: f64,
    /// `min_i (cap - r_i)`; `+∞` without a cap.
    pub cap: f64,
}

impl MarginBreakdown {
    pub fn margin(&self) -> f64 {
        self.witness.min(self.separation).min(self.cap)
    }
}

pub fn margin_breakdown(config: &BesicovitchConfig) -> MarginBreakdown {
    let spec = &config.spec;
    let w = config.witness.coords();
    let mut witness = f64::INFINITY;
    let mut separation = f64::INFINITY;
    for (i, (xi, ri)) in config.centers.iter().zip(&config.radii).enumerate() {
        witness = witness.min(ri - spec.dist(w, xi.coords()));
        for (j, xj) in config.centers.iter().enumerate() {
            if i != j {
                separation = separation.min(spec.dist(xj.coords(), xi.coords()) - ri);
            }
        }
    }
    let cap = match config.radius_cap {
        Some(cap) => config
            .radii
            .iter()
            .map(|r| cap - r)
            .fold(f64::INFINITY, f64::min),
        None => f64::INFINITY,
    };
    MarginBreakdown {
        witness,
        separation,
        cap,
    }
}

/// Minimum slack over all Besicovitch constraints.
pub fn validate_config(config: &BesicovitchConfig) -> Result<f64> {
    config.spec.validate()?;
    config.spec.check_dim(&config.witness)?;
    for c in &config.centers {
        config.spec.check_dim(c)?;
    }
    Ok(margin_breakdown(config).margin())
}

/// The bare validity predicate, without margin or threshold: every ball
/// contains the witness, no ball contains another center, radii under the cap.
/// Ball membership goes through [`MetricSpec::within`].
pub fn is_besicovitch(config: &BesicovitchConfig) -> bool {
    let spec = &config.spec;
    let w = config.witness.coords();
    let n = config.len();
    (0..n).all(|i| {
        let (xi, ri) = (config.centers[i].coords(), config.radii[i]);
        spec.within(xi, w, ri)
            && config.radius_cap.is_none_or(|cap| ri < cap)
            && (0..n).all(|j| j == i || !spec.within(xi, config.centers[j].coords(), ri))
    })
}

/// Sets `r_i = d(w, x_i)·(1 + eta)`.
pub fn canonical_tighten(config: &BesicovitchConfig, eta: f64) -> Result<BesicovitchConfig> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    let mut out = config.clone();
    for (i, c) in config.centers.iter().enumerate() {
        let d = config.spec.distance(&config.witness, c)?;
        if d == 0.0 {
            return Err(Error::Precondition(format!(
                "witness coincides with center {i}"
            )));
        }
        out.radii[i] = d * (1.0 + eta);
    }
    Ok(out)
}

/// Places every radius halfway between the witness distance and the nearest
/// other center, which maximises the margin for fixed centers.
/// A lone ball gets radius `2·d(w, x)`. Radii are clipped under the cap.
pub fn polish_radii(config: &BesicovitchConfig) -> BesicovitchConfig {
    let spec = &config.spec;
    let w = config.witness.coords();
    let mut out = config.clone();
    for (i, xi) in config.centers.iter().enumerate() {
        let d = spec.dist(w, xi.coords());
        let sep = config
            .centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, xj)| spec.dist(xj.coords(), xi.coords()))
            .fold(f64::INFINITY, f64::min);
        let mut r = if sep.is_finite() {
            0.5 * (d + sep)
        } else {
            2.0 * d
        };
        if let Some(cap) = config.radius_cap {
            // keep the cap slack at least as large as the witness slack
            r = r.min(0.5 * (d + cap));
        }
        if r > 0.0 {
            out.radii[i] = r;
        }
    }
    out
}
