//! First Heisenberg group in exponential coordinates `(x, y, z)`.
//!
//! Group law: `(x,y,z)·(x',y',z') = (x+x', y+y', z+z'+(xy'-yx')/2)`.
//! All homogeneous gauges here are evaluated at `w = p⁻¹·q`, which makes the
//! induced distances left-invariant.

use super::Point;
use crate::error::{Error, Result};

fn check3(p: &Point) -> Result<()> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: p.dim(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn mul3(p: &[f64], q: &[f64]) -> [f64; 3] {
    [
        p[0] + q[0],
        p[1] + q[1],
        p[2] + q[2] + 0.5 * (p[0] * q[1] - p[1] * q[0]),
    ]
}

/// `p⁻¹·q` without allocating.
#[inline]
pub(crate) fn left_diff3(p: &[f64], q: &[f64]) -> [f64; 3] {
    [
        q[0] - p[0],
        q[1] - p[1],
        q[2] - p[2] - 0.5 * (p[0] * q[1] - p[1] * q[0]),
    ]
}

/// Korányi gauge `((x²+y²)² + 16z²)^{1/4}`.
#[inline]
pub(crate) fn koranyi_gauge(w: [f64; 3]) -> f64 {
    let rho2 = w[0] * w[0] + w[1] * w[1];
    rho2.hypot(4.0 * w[2]).sqrt()
}

/// Hebisch–Sikora gauge: the unique `r > 0` with `δ_{1/r}(w)` on the boundary of
/// the Euclidean ball of radius `gamma`.
///
/// Solving `ρ²/r² + z²/r⁴ = γ²` for `r²` gives `r² = (ρ² + √(ρ⁴ + 4γ²z²)) / (2γ²)`,
/// which is the rationalised form of `u^{-1}` with
/// `u = (−ρ² + √(ρ⁴ + 4z²γ²)) / (2z²)` and has no cancellation when `|z| ≪ ρ²`.
#[inline]
pub(crate) fn hs_gauge(gamma: f64, w: [f64; 3]) -> f64 {
    let rho2 = w[0] * w[0] + w[1] * w[1];
    if rho2 == 0.0 && w[2] == 0.0 {
        return 0.0;
    }
    if w[2] == 0.0 {
        return rho2.sqrt() / gamma;
    }
    let root = rho2.hypot(2.0 * gamma * w[2]);
    ((rho2 + root) / (2.0 * gamma * gamma)).sqrt()
}

/// `(ε(x²+y²) + d_K(0,w)²)^{1/2}`.
#[inline]
pub(crate) fn eps_gauge(eps: f64, w: [f64; 3]) -> f64 {
    let rho2 = w[0] * w[0] + w[1] * w[1];
    (eps * rho2 + rho2.hypot(4.0 * w[2])).sqrt()
}

/// `max(|x|, |y|^{1/α}, |z|^{1/(α+1)})`, homogeneous for `(rx, r^α y, r^{α+1} z)`.
#[inline]
pub(crate) fn nonstandard_gauge3(alpha: f64, w: [f64; 3]) -> f64 {
    w[0].abs()
        .max(w[1].abs().powf(1.0 / alpha))
        .max(w[2].abs().powf(1.0 / (alpha + 1.0)))
}

pub fn heis_mul(p: &Point, q: &Point) -> Result<Point> {
    check3(p)?;
    check3(q)?;
    Point::new(mul3(p.coords(), q.coords()).to_vec())
}

pub fn heis_inv(p: &Point) -> Result<Point> {
    check3(p)?;
    Point::new(p.coords().iter().map(|c| -c).collect())
}

/// Standard dilation `δ_r(x,y,z) = (rx, ry, r²z)`.
pub fn heis_dilate(r: f64, p: &Point) -> Result<Point> {
    check3(p)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dilation factor must be positive, got {r}"
        )));
    }
    let c = p.coords();
    Point::new(vec![r * c[0], r * c[1], r * r * c[2]])
}

/// Non-standard dilation `δ_r(x,y,z) = (rx, r^α y, r^{α+1} z)`.
pub fn nonstandard_dilate(alpha: f64, r: f64, p: &Point) -> Result<Point> {
    check3(p)?;
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "grading exponent must exceed 1, got {alpha}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dilation factor must be positive, got {r}"
        )));
    }
    let c = p.coords();
    Point::new(vec![
        r * c[0],
        r.powf(alpha) * c[1],
        r.powf(alpha + 1.0) * c[2],
    ])
}

pub fn koranyi_distance(p: &Point, q: &Point) -> Result<f64> {
    check3(p)?;
    check3(q)?;
    Ok(koranyi_gauge(left_diff3(p.coords(), q.coords())))
}

pub fn hs_distance(gamma: f64, p: &Point, q: &Point) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    check3(p)?;
    check3(q)?;
    Ok(hs_gauge(gamma, left_diff3(p.coords(), q.coords())))
}

pub fn eps_distance(eps: f64, p: &Point, q: &Point) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    check3(p)?;
    check3(q)?;
    Ok(eps_gauge(eps, left_diff3(p.coords(), q.coords())))
}

pub fn nonstandard_gauge(alpha: f64, p: &Point, q: &Point) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "grading exponent must exceed 1, got {alpha}"
        )));
    }
    check3(p)?;
    check3(q)?;
    Ok(nonstandard_gauge3(
        alpha,
        left_diff3(p.coords(), q.coords()),
    ))
}
