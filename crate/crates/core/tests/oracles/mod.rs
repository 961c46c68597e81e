//! Reference computations written independently of the library, straight from
//! the defining formulas. Slow and simple on purpose.
#![allow(dead_code)]

/// Heisenberg group law in exponential coordinates.
pub fn heis_mul(p: &[f64], q: &[f64]) -> [f64; 3] {
    [
        p[0] + q[0],
        p[1] + q[1],
        p[2] + q[2] + 0.5 * (p[0] * q[1] - p[1] * q[0]),
    ]
}

/// `p⁻¹ · q`.
pub fn heis_left_diff(p: &[f64], q: &[f64]) -> [f64; 3] {
    heis_mul(&[-p[0], -p[1], -p[2]], q)
}

/// `((x²+y²)² + 16 z²)^{1/4}`.
pub fn koranyi_gauge(w: &[f64]) -> f64 {
    let rho2 = w[0] * w[0] + w[1] * w[1];
    (rho2 * rho2 + 16.0 * w[2] * w[2]).powf(0.25)
}

/// Smallest `r > 0` with `δ_{1/r}(w)` in the Euclidean ball of radius `γ`,
/// found by bisection on the membership predicate.
pub fn hs_bisection(gamma: f64, w: &[f64]) -> f64 {
    let rho2 = w[0] * w[0] + w[1] * w[1];
    let z = w[2];
    if rho2 == 0.0 && z == 0.0 {
        return 0.0;
    }
    let inside = |r: f64| rho2 / (r * r) + (z / (r * r)) * (z / (r * r)) <= gamma * gamma;
    let (mut lo, mut hi) = (1e-9, 1e9);
    while inside(lo) {
        lo /= 2.0;
    }
    while !inside(hi) {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// `(r^{a} x, r^{b} y, r^{c} z)`.
pub fn dilate(weights: [f64; 3], r: f64, p: &[f64]) -> [f64; 3] {
    [
        r.powf(weights[0]) * p[0],
        r.powf(weights[1]) * p[1],
        r.powf(weights[2]) * p[2],
    ]
}

pub fn euclid(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
