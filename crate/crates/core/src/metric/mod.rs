//! Points, closed balls and the supported distances.

mod heisenberg;

pub use heisenberg::{
    eps_distance, heis_dilate, heis_inv, heis_mul, hs_distance, koranyi_distance,
    nonstandard_dilate, nonstandard_gauge,
};

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default gap used wherever the theory asks for a strict inequality.
pub const DEFAULT_STRICT_MARGIN: f64 = 1e-9;

/// A point of a finite-dimensional coordinate space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument(
                "point must have at least one coordinate".into(),
            ));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coordinate {c}")));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Closed ball `B(center, radius) = {y : d(center, y) ≤ radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    /// The concentric ball `τB`.
    pub fn scaled(&self, tau: f64) -> Result<Ball> {
        Ball::new(self.center.clone(), tau * self.radius)
    }
}

/// One of the supported distances (or quasi-distances).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Euclidean {
        n: usize,
    },
    PNorm {
        n: usize,
        p: f64,
    },
    /// `d^s` for `0 < s < 1`.
    Snowflake {
        base: Box<MetricSpec>,
        s: f64,
    },
    /// `max(d_X, d_Y)` on the concatenated coordinates.
    MaxProduct {
        left: Box<MetricSpec>,
        right: Box<MetricSpec>,
    },
    /// `(|x'-x|^p + |y'-y|^{p/s})^{1/p}` on `ℝ×ℝ`.
    LpMeanProduct {
        p: f64,
        s: f64,
    },
    Koranyi,
    HebischSikora {
        gamma: f64,
    },
    HeisenbergEps {
        eps: f64,
    },
    /// Homogeneous quasi-distance for the grading `(1, α, α+1)`.
    NonStandardGauge {
        alpha: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl MetricSpec {
    pub fn hebisch_sikora_default() -> Self {
        MetricSpec::HebischSikora { gamma: 2.0 }
    }

    pub fn snowflake(base: MetricSpec, s: f64) -> Self {
        MetricSpec::Snowflake {
            base: Box::new(base),
            s,
        }
    }

    pub fn max_product(left: MetricSpec, right: MetricSpec) -> Self {
        MetricSpec::MaxProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::Euclidean { n } => {
                if *n == 0 {
                    return Err(Error::InvalidSpec("dimension must be at least 1".into()));
                }
            }
            MetricSpec::PNorm { n, p } => {
                if *n == 0 {
                    return Err(Error::InvalidSpec("dimension must be at least 1".into()));
                }
                if !(*p >= 1.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!("p must be in [1, ∞), got {p}")));
                }
            }
            MetricSpec::Snowflake { base, s } => {
                base.validate()?;
                if !(*s > 0.0 && *s < 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "snowflake exponent must be in (0,1), got {s}"
                    )));
                }
            }
            MetricSpec::MaxProduct { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            MetricSpec::LpMeanProduct { p, s } => {
                if !(*p >= 1.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!("p must be in [1, ∞), got {p}")));
                }
                if !(*s > *p && s.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "s must exceed p, got s={s}, p={p}"
                    )));
                }
            }
            MetricSpec::Koranyi => {}
            MetricSpec::HebischSikora { gamma } => positive("gamma", *gamma)?,
            MetricSpec::HeisenbergEps { eps } => positive("epsilon", *eps)?,
            MetricSpec::NonStandardGauge { alpha } => {
                if !(*alpha > 1.0 && alpha.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "alpha must exceed 1, got {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ambient coordinate dimension.
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { n } | MetricSpec::PNorm { n, .. } => *n,
            MetricSpec::Snowflake { base, .. } => base.dim(),
            MetricSpec::MaxProduct { left, right } => left.dim() + right.dim(),
            MetricSpec::LpMeanProduct { .. } => 2,
            MetricSpec::Koranyi
            | MetricSpec::HebischSikora { .. }
            | MetricSpec::HeisenbergEps { .. }
            | MetricSpec::NonStandardGauge { .. } => 3,
        }
    }

    /// True when the triangle inequality only holds up to a constant.
    pub fn is_quasi(&self) -> bool {
        match self {
            MetricSpec::NonStandardGauge { .. } => true,
            MetricSpec::Snowflake { base, .. } => base.is_quasi(),
            MetricSpec::MaxProduct { left, right } => left.is_quasi() || right.is_quasi(),
            _ => false,
        }
    }

    /// Distances built on the Heisenberg group law.
    pub fn is_heisenberg(&self) -> bool {
        matches!(
            self,
            MetricSpec::Koranyi
                | MetricSpec::HebischSikora { .. }
                | MetricSpec::HeisenbergEps { .. }
                | MetricSpec::NonStandardGauge { .. }
        )
    }

    /// Short label used in file names and report tables.
    pub fn label(&self) -> String {
        match self {
            MetricSpec::Euclidean { n } => format!("euclidean{n}"),
            MetricSpec::PNorm { n, p } => format!("pnorm{n}-p{p}"),
            MetricSpec::Snowflake { base, s } => format!("snowflake{s}-{}", base.label()),
            MetricSpec::MaxProduct { left, right } => {
                format!("max({},{})", left.label(), right.label())
            }
            MetricSpec::LpMeanProduct { p, s } => format!("lpmean-p{p}-s{s}"),
            MetricSpec::Koranyi => "koranyi".to_string(),
            MetricSpec::HebischSikora { gamma } => format!("hebisch-sikora-g{gamma}"),
            MetricSpec::HeisenbergEps { eps } => format!("heisenberg-eps{eps}"),
            MetricSpec::NonStandardGauge { alpha } => format!("nonstandard-a{alpha}"),
        }
    }

    /// Checked distance.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate()?;
        self.check_dim(p)?;
        self.check_dim(q)?;
        Ok(self.dist(p.coords(), q.coords()))
    }

    pub fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }

    /// Distance on raw coordinates; callers guarantee a valid spec and dimensions.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            MetricSpec::Euclidean { .. } => p
                .iter()
                .zip(q)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt(),
            MetricSpec::PNorm { p: e, .. } => p
                .iter()
                .zip(q)
                .map(|(a, b)| (b - a).abs().powf(*e))
                .sum::<f64>()
                .powf(1.0 / e),
            MetricSpec::Snowflake { base, s } => base.dist(p, q).powf(*s),
            MetricSpec::MaxProduct { left, right } => {
                let k = left.dim();
                left.dist(&p[..k], &q[..k])
                    .max(right.dist(&p[k..], &q[k..]))
            }
            MetricSpec::LpMeanProduct { p: e, s } => {
                let dx = (q[0] - p[0]).abs();
                let dy = (q[1] - p[1]).abs();
                (dx.powf(*e) + dy.powf(e / s)).powf(1.0 / e)
            }
            MetricSpec::Koranyi => heisenberg::koranyi_gauge(heisenberg::left_diff3(p, q)),
            MetricSpec::HebischSikora { gamma } => {
                heisenberg::hs_gauge(*gamma, heisenberg::left_diff3(p, q))
            }
            MetricSpec::HeisenbergEps { eps } => {
                heisenberg::eps_gauge(*eps, heisenberg::left_diff3(p, q))
            }
            MetricSpec::NonStandardGauge { alpha } => {
                heisenberg::nonstandard_gauge3(*alpha, heisenberg::left_diff3(p, q))
            }
        }
    }

    /// Group translation `g·p`: the Heisenberg law for Heisenberg specs,
    /// coordinate addition otherwise. Every supported distance is invariant under it.
    pub fn translate(&self, g: &[f64], p: &[f64]) -> Vec<f64> {
        if self.is_heisenberg() {
            heisenberg::mul3(g, p).to_vec()
        } else {
            g.iter().zip(p).map(|(a, b)| a + b).collect()
        }
    }

    /// Per-coordinate exponents `w` such that `p ↦ (t^{w_c} p_c)` scales this distance by `t`.
    pub fn dilation_weights(&self) -> Vec<f64> {
        match self {
            MetricSpec::Euclidean { n } | MetricSpec::PNorm { n, .. } => vec![1.0; *n],
            MetricSpec::Snowflake { base, s } => {
                base.dilation_weights().iter().map(|w| w / s).collect()
            }
            MetricSpec::MaxProduct { left, right } => {
                let mut w = left.dilation_weights();
                w.extend(right.dilation_weights());
                w
            }
            MetricSpec::LpMeanProduct { s, .. } => vec![1.0, *s],
            MetricSpec::Koranyi
            | MetricSpec::HebischSikora { .. }
            | MetricSpec::HeisenbergEps { .. } => {
                vec![1.0, 1.0, 2.0]
            }
            MetricSpec::NonStandardGauge { alpha } => vec![1.0, *alpha, alpha + 1.0],
        }
    }

    /// Applies the homogeneous dilation of factor `t > 0`.
    pub fn dilate(&self, t: f64, p: &[f64]) -> Vec<f64> {
        self.dilation_weights()
            .iter()
            .zip(p)
            .map(|(w, c)| if *w == 1.0 { t * c } else { t.powf(*w) * c })
            .collect()
    }

    /// `d(p, q) ≤ r`. A snowflake compares its base distance with the mapped
    /// radius `r^{1/s}`, so its balls are literally the base balls.
    pub fn within(&self, p: &[f64], q: &[f64], r: f64) -> bool {
        match self {
            MetricSpec::Snowflake { base, s } => base.within(p, q, snowflake_radius(r, *s)),
            _ => self.dist(p, q) <= r,
        }
    }

    /// Membership in the closed ball, plus the signed slack `radius - d`.
    pub fn ball_contains(&self, ball: &Ball, p: &Point) -> Result<(bool, f64)> {
        let d = self.distance(&ball.center, p)?;
        Ok((
            self.within(ball.center.coords(), p.coords(), ball.radius),
            ball.radius - d,
        ))
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Radius of the base ball equal to the `d^s`-ball of radius `r`.
pub fn snowflake_radius(r: f64, s: f64) -> f64 {
    r.powf(1.0 / s)
}

/// `ball_contains` as a free function.
pub fn ball_contains(spec: &MetricSpec, ball: &Ball, p: &Point) -> Result<(bool, f64)> {
    spec.ball_contains(ball, p)
}

/// `distance` as a free function.
pub fn distance(spec: &MetricSpec, p: &Point, q: &Point) -> Result<f64> {
    spec.distance(p, q)
}

/// Samples a point whose coordinates are scaled to the spec's dilation weights,
/// so that typical distances are of order `scale`.
pub fn random_point<R: Rng + ?Sized>(spec: &MetricSpec, rng: &mut R, scale: f64) -> Vec<f64> {
    spec.dilation_weights()
        .iter()
        .map(|w| {
            let u: f64 = rng.random_range(-1.0..1.0);
            u * scale.powf(*w)
        })
        .collect()
}

/// Largest observed `d(p,r) / (d(p,q) + d(q,r))` over random triples.
/// Equals 1 (up to rounding) for genuine distances.
pub fn sampled_quasi_constant<R: Rng + ?Sized>(
    spec: &MetricSpec,
    rng: &mut R,
    samples: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let p = random_point(spec, rng, scale);
        let q = random_point(spec, rng, scale);
        let r = random_point(spec, rng, scale);
        let denom = spec.dist(&p, &q) + spec.dist(&q, &r);
        if denom > 0.0 {
            worst = worst.max(spec.dist(&p, &r) / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e2 = MetricSpec::Euclidean { n: 2 };
        assert_eq!(
            e2.distance(&pt(&[0.0, 0.0]), &pt(&[3.0, 4.0])).unwrap(),
            5.0
        );
        let sf = MetricSpec::snowflake(MetricSpec::Euclidean { n: 1 }, 0.5);
        assert_eq!(sf.distance(&pt(&[0.0]), &pt(&[4.0])).unwrap(), 2.0);
        let lp = MetricSpec::LpMeanProduct { p: 2.0, s: 3.0 };
        let d = lp.distance(&pt(&[0.0, 0.0]), &pt(&[1.0, 1.0])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let mp = MetricSpec::max_product(
            MetricSpec::Euclidean { n: 1 },
            MetricSpec::Euclidean { n: 2 },
        );
        assert_eq!(
            mp.distance(&pt(&[0.0, 0.0, 0.0]), &pt(&[1.0, 3.0, 4.0]))
                .unwrap(),
            5.0
        );
        let pn = MetricSpec::PNorm { n: 2, p: 1.0 };
        assert_eq!(
            pn.distance(&pt(&[0.0, 0.0]), &pt(&[1.0, -2.0])).unwrap(),
            3.0
        );
    }

    #[test]
    fn distance_errors() {
        let e2 = MetricSpec::Euclidean { n: 2 };
        assert!(matches!(
            e2.distance(&pt(&[0.0]), &pt(&[1.0, 1.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        let bad = MetricSpec::LpMeanProduct { p: 2.0, s: 1.5 };
        assert!(matches!(
            bad.distance(&pt(&[0.0, 0.0]), &pt(&[0.0, 0.0])),
            Err(Error::InvalidSpec(_))
        ));
        assert!(MetricSpec::snowflake(MetricSpec::Euclidean { n: 1 }, 1.0)
            .validate()
            .is_err());
        assert!(MetricSpec::PNorm { n: 2, p: 0.5 }.validate().is_err());
        assert!(MetricSpec::NonStandardGauge { alpha: 1.0 }
            .validate()
            .is_err());
        assert!(MetricSpec::HebischSikora { gamma: -1.0 }
            .validate()
            .is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn ball_contains_examples() {
        let e1 = MetricSpec::Euclidean { n: 1 };
        let b = Ball::new(pt(&[0.0]), 1.0).unwrap();
        assert_eq!(e1.ball_contains(&b, &pt(&[1.0])).unwrap(), (true, 0.0));
        let k = MetricSpec::Koranyi;
        let b = Ball::new(pt(&[0.0, 0.0, 0.0]), 2.0).unwrap();
        assert_eq!(
            k.ball_contains(&b, &pt(&[0.0, 0.0, 1.0])).unwrap(),
            (true, 0.0)
        );
        let e2 = MetricSpec::Euclidean { n: 2 };
        let b = Ball::new(pt(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(
            e2.ball_contains(&b, &pt(&[2.0, 0.0])).unwrap(),
            (false, -1.0)
        );
        assert!(Ball::new(pt(&[0.0]), 0.0).is_err());
    }

    #[test]
    fn snowflake_balls_are_base_balls() {
        let base = MetricSpec::Euclidean { n: 2 };
        let sf = MetricSpec::snowflake(base.clone(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let c = pt(&random_point(&base, &mut rng, 1.0));
            let p = pt(&random_point(&base, &mut rng, 1.0));
            let r: f64 = rng.random_range(0.1..1.5);
            let (a, _) = sf
                .ball_contains(&Ball::new(c.clone(), r).unwrap(), &p)
                .unwrap();
            let (b, _) = base
                .ball_contains(&Ball::new(c, snowflake_radius(r, 0.5)).unwrap(), &p)
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec = MetricSpec::snowflake(MetricSpec::Koranyi, 0.5);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            text,
            r#"{"kind":"snowflake","base":{"kind":"koranyi"},"s":0.5}"#
        );
        let back: MetricSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let hs: MetricSpec =
            serde_json::from_str(r#"{"kind":"hebisch_sikora","gamma":2.0}"#).unwrap();
        assert_eq!(hs, MetricSpec::hebisch_sikora_default());
    }

    #[test]
    fn nonstandard_quasi_constant_is_finite() {
        let spec = MetricSpec::NonStandardGauge { alpha: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = sampled_quasi_constant(&spec, &mut rng, 20_000);
        assert!(c.is_finite() && c >= 1.0, "quasi constant {c}");
        let e = sampled_quasi_constant(&MetricSpec::Euclidean { n: 3 }, &mut rng, 20_000);
        assert!(e <= 1.0 + 1e-12);
    }

    #[test]
    fn dilation_matches_group_dilations() {
        let p = pt(&[0.3, -0.2, 1.1]);
        let spec = MetricSpec::Koranyi;
        assert_eq!(
            spec.dilate(2.0, p.coords()),
            heis_dilate(2.0, &p).unwrap().into_coords()
        );
        let ns = MetricSpec::NonStandardGauge { alpha: 2.0 };
        assert_eq!(
            ns.dilate(2.0, p.coords()),
            nonstandard_dilate(2.0, 2.0, &p).unwrap().into_coords()
        );
    }
}
