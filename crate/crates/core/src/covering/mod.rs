//! Finite, constructive covering theorems.
//!
//! * [`greedy_5r_cover`]: disjoint subfamily whose 5-fold dilates cover the family.
//! * [`besicovitch_select`]: bounded-overlap cover of all centers in `ℝⁿ`.
//! * [`disjoint_color`]: split a selection into disjointed color classes.
//! * [`vitali_extract`]: iterated extraction of disjoint balls exhausting an
//!   atomic measure.
//!
//! Two closed balls are treated as disjoint when `d(c, c') > r + r' + δ`, with
//! `δ` the strictness margin; otherwise they meet.

mod vitali;

pub use vitali::{
    verify_extraction, vitali_extract, AdmissiblePolicy, ExtractionRound, ExtractionTrace,
};

use crate::error::{Error, Result};
use crate::metric::{Ball, MetricSpec, Point, DEFAULT_STRICT_MARGIN};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub spec: MetricSpec,
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(spec: MetricSpec, balls: Vec<Ball>) -> Result<Self> {
        spec.validate()?;
        if balls.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for b in &balls {
            spec.check_dim(&b.center)?;
        }
        Ok(BallFamily { spec, balls })
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    fn center_dist(&self, i: usize, j: usize) -> f64 {
        self.spec
            .dist(self.balls[i].center.coords(), self.balls[j].center.coords())
    }

    /// `d(c_i, c_j) > r_i + r_j + strict`.
    pub fn disjoint(&self, i: usize, j: usize, strict: f64) -> bool {
        self.center_dist(i, j) > self.balls[i].radius + self.balls[j].radius + strict
    }

    pub fn contains(&self, i: usize, p: &[f64]) -> bool {
        self.spec.dist(self.balls[i].center.coords(), p) <= self.balls[i].radius
    }

    /// Indices sorted by decreasing radius, ties by index.
    pub fn by_decreasing_radius(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.balls[b]
                .radius
                .total_cmp(&self.balls[a].radius)
                .then(a.cmp(&b))
        });
        order
    }

    pub fn max_radius(&self) -> f64 {
        self.balls.iter().map(|b| b.radius).fold(0.0, f64::max)
    }
}

/// How many selected balls contain each probe point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityProfile {
    pub max: usize,
    /// `histogram[c]` = number of probes covered exactly `c` times.
    pub histogram: Vec<usize>,
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    pub selected: Vec<usize>,
    /// Dilation factor under which the selection covers the family.
    pub tau: f64,
    pub multiplicity: MultiplicityProfile,
}

pub fn multiplicity_profile(
    family: &BallFamily,
    selected: &[usize],
    probes: &[Vec<f64>],
) -> MultiplicityProfile {
    let mut histogram = vec![0usize; 1];
    let mut max = 0;
    for p in probes {
        let c = selected.iter().filter(|&&i| family.contains(i, p)).count();
        if c >= histogram.len() {
            histogram.resize(c + 1, 0);
        }
        histogram[c] += 1;
        max = max.max(c);
    }
    MultiplicityProfile {
        max,
        histogram,
        probes: probes.len(),
    }
}

/// All family centers, plus every pairwise boundary intersection of the
/// selected balls when the spec is `Euclidean(2)`. For closed disks the
/// deepest point of the arrangement is among these, so the profile's maximum
/// is exact in that case.
pub fn arrangement_probes(family: &BallFamily, selected: &[usize]) -> Vec<Vec<f64>> {
    let mut probes: Vec<Vec<f64>> = family
        .balls
        .iter()
        .map(|b| b.center.coords().to_vec())
        .collect();
    if family.spec == (MetricSpec::Euclidean { n: 2 }) {
        for (a, &i) in selected.iter().enumerate() {
            for &j in &selected[a + 1..] {
                probes.extend(circle_intersections(&family.balls[i], &family.balls[j]));
            }
        }
    }
    probes
}

fn circle_intersections(a: &Ball, b: &Ball) -> Vec<Vec<f64>> {
    let (p, q) = (a.center.coords(), b.center.coords());
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let d = dx.hypot(dy);
    if d == 0.0 || d > a.radius + b.radius || d < (a.radius - b.radius).abs() {
        return Vec::new();
    }
    let along = (a.radius * a.radius - b.radius * b.radius + d * d) / (2.0 * d);
    let h = (a.radius * a.radius - along * along).max(0.0).sqrt();
    let (mx, my) = (p[0] + along * dx / d, p[1] + along * dy / d);
    // nudge inwards so rounding does not drop the point out of either disk
    let pull = |x: f64, y: f64| -> Vec<f64> {
        let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        let eps = 1e-12 * (1.0 + d);
        let (vx, vy) = (mid[0] - x, mid[1] - y);
        let n = vx.hypot(vy).max(f64::MIN_POSITIVE);
        vec![x + eps * vx / n, y + eps * vy / n]
    };
    vec![
        pull(mx + h * dy / d, my - h * dx / d),
        pull(mx - h * dy / d, my + h * dx / d),
    ]
}

/// Greedy disjoint selection by decreasing radius (Vitali's 5r lemma on a finite family).
pub fn greedy_5r_cover(family: &BallFamily) -> Result<CoverResult> {
    greedy_5r_cover_with(family, DEFAULT_STRICT_MARGIN)
}

pub fn greedy_5r_cover_with(family: &BallFamily, strict: f64) -> Result<CoverResult> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut selected: Vec<usize> = Vec::new();
    for i in family.by_decreasing_radius() {
        if selected.iter().all(|&s| family.disjoint(i, s, strict)) {
            selected.push(i);
        }
    }
    let probes: Vec<Vec<f64>> = family
        .balls
        .iter()
        .map(|b| b.center.coords().to_vec())
        .collect();
    let multiplicity = multiplicity_profile(family, &selected, &probes);
    Ok(CoverResult {
        selected,
        tau: 5.0,
        multiplicity,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum CoverFailure {
    InvalidIndex { index: usize },
    DuplicateIndex { index: usize },
    Disjointness { a: usize, b: usize },
    HalfRadius { ball: usize },
    Containment { ball: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverVerification {
    pub failures: Vec<CoverFailure>,
}

impl CoverVerification {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&CoverFailure) -> bool) -> bool {
        self.failures.iter().any(pred)
    }
}

/// Replays the three 5r-cover guarantees:
///
/// * selected balls pairwise disjoint (`d > r + r' + δ`);
/// * each input ball meets a selected ball at least half as large
///   (`r' ≥ r/2` and `d ≤ r + r' + δ`);
/// * each input ball lies in some `τB'`, via `d(c, c') + r ≤ τ r'`.
pub fn verify_5r_cover(family: &BallFamily, result: &CoverResult) -> CoverVerification {
    verify_5r_cover_with(family, result, DEFAULT_STRICT_MARGIN)
}

pub fn verify_5r_cover_with(
    family: &BallFamily,
    result: &CoverResult,
    strict: f64,
) -> CoverVerification {
    let mut failures = Vec::new();
    let mut seen = vec![false; family.len()];
    let mut sel = Vec::new();
    for &i in &result.selected {
        if i >= family.len() {
            failures.push(CoverFailure::InvalidIndex { index: i });
        } else if seen[i] {
            failures.push(CoverFailure::DuplicateIndex { index: i });
        } else {
            seen[i] = true;
            sel.push(i);
        }
    }
    for (a, &i) in sel.iter().enumerate() {
        for &j in &sel[a + 1..] {
            if !family.disjoint(i, j, strict) {
                failures.push(CoverFailure::Disjointness {
                    a: i.min(j),
                    b: i.max(j),
                });
            }
        }
    }
    for b in 0..family.len() {
        let r = family.balls[b].radius;
        let mut half = false;
        let mut contained = false;
        for &s in &sel {
            let rs = family.balls[s].radius;
            let d = family.center_dist(b, s);
            if rs >= 0.5 * r && d <= r + rs + strict {
                half = true;
            }
            if d + r <= result.tau * rs {
                contained = true;
            }
            if half && contained {
                break;
            }
        }
        if !half {
            failures.push(CoverFailure::HalfRadius { ball: b });
        }
        if !contained {
            failures.push(CoverFailure::Containment { ball: b });
        }
    }
    CoverVerification { failures }
}

fn require_normed(spec: &MetricSpec) -> Result<()> {
    match spec {
        MetricSpec::Euclidean { .. } | MetricSpec::PNorm { .. } => Ok(()),
        other => Err(Error::UnsupportedSpec(format!(
            "Besicovitch selection needs a finite-dimensional norm, got {other}"
        ))),
    }
}

/// Greedy Besicovitch selection: by decreasing radius, keep a ball whenever its
/// center is not covered by an already kept ball. The result covers every
/// center; its multiplicity is probed with [`arrangement_probes`].
pub fn besicovitch_select(family: &BallFamily) -> Result<CoverResult> {
    let mut result = besicovitch_select_only(family)?;
    let probes = arrangement_probes(family, &result.selected);
    result.multiplicity = multiplicity_profile(family, &result.selected, &probes);
    Ok(result)
}

/// Selection without the multiplicity audit (the profile is left empty).
pub fn besicovitch_select_only(family: &BallFamily) -> Result<CoverResult> {
    require_normed(&family.spec)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut selected: Vec<usize> = Vec::new();
    for i in family.by_decreasing_radius() {
        let c = family.balls[i].center.coords();
        if !selected.iter().any(|&s| family.contains(s, c)) {
            selected.push(i);
        }
    }
    Ok(CoverResult {
        selected,
        tau: 1.0,
        multiplicity: MultiplicityProfile::default(),
    })
}

/// Centers of the family not covered by the selection.
pub fn uncovered_centers(family: &BallFamily, selected: &[usize]) -> Vec<usize> {
    (0..family.len())
        .filter(|&i| {
            let c = family.balls[i].center.coords();
            !selected.iter().any(|&s| family.contains(s, c))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointColoring {
    /// Ball indices, in the order they were colored.
    pub balls: Vec<usize>,
    /// `colors[i]` in `1..=q` is the color of `balls[i]`.
    pub colors: Vec<usize>,
    pub q: usize,
}

impl DisjointColoring {
    pub fn class(&self, color: usize) -> Vec<usize> {
        self.balls
            .iter()
            .zip(&self.colors)
            .filter(|(_, c)| **c == color)
            .map(|(b, _)| *b)
            .collect()
    }

    /// True when every color class is pairwise disjoint.
    pub fn verify(&self, family: &BallFamily, strict: f64) -> bool {
        (1..=self.q).all(|c| {
            let cls = self.class(c);
            cls.iter()
                .enumerate()
                .all(|(a, &i)| cls[a + 1..].iter().all(|&j| family.disjoint(i, j, strict)))
        })
    }
}

/// Greedy coloring of the intersection graph of the selected balls, processed
/// by decreasing radius; each ball takes the smallest color not used by a ball it meets.
pub fn disjoint_color(family: &BallFamily, selected: &CoverResult) -> Result<DisjointColoring> {
    disjoint_color_with(family, &selected.selected, DEFAULT_STRICT_MARGIN)
}

pub fn disjoint_color_with(
    family: &BallFamily,
    selected: &[usize],
    strict: f64,
) -> Result<DisjointColoring> {
    if let Some(&bad) = selected.iter().find(|&&i| i >= family.len()) {
        return Err(Error::InvalidArgument(format!(
            "selected index {bad} out of range"
        )));
    }
    let mut order = selected.to_vec();
    order.sort_by(|&a, &b| {
        family.balls[b]
            .radius
            .total_cmp(&family.balls[a].radius)
            .then(a.cmp(&b))
    });
    order.dedup();
    let mut colors: Vec<usize> = Vec::with_capacity(order.len());
    let mut q = 0;
    for (pos, &i) in order.iter().enumerate() {
        let mut used = vec![false; q + 2];
        for (prev, &j) in order[..pos].iter().enumerate() {
            if !family.disjoint(i, j, strict) {
                used[colors[prev]] = true;
            }
        }
        let c = (1..used.len()).find(|&c| !used[c]).unwrap_or(q + 1);
        q = q.max(c);
        colors.push(c);
    }
    Ok(DisjointColoring {
        balls: order,
        colors,
        q,
    })
}

/// Convenience constructor for balls given as `(center coords, radius)`.
pub fn family_from_rows(spec: MetricSpec, rows: &[(Vec<f64>, f64)]) -> Result<BallFamily> {
    let balls = rows
        .iter()
        .map(|(c, r)| Ball::new(Point::new(c.clone())?, *r))
        .collect::<Result<Vec<_>>>()?;
    BallFamily::new(spec, balls)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2(rows: &[([f64; 2], f64)]) -> BallFamily {
        let rows: Vec<(Vec<f64>, f64)> = rows.iter().map(|(c, r)| (c.to_vec(), *r)).collect();
        family_from_rows(MetricSpec::Euclidean { n: 2 }, &rows).unwrap()
    }

    #[test]
    fn single_and_disjoint_balls() {
        let f = e2(&[([0.0, 0.0], 1.0)]);
        let r = greedy_5r_cover(&f).unwrap();
        assert_eq!(r.selected, vec![0]);
        assert!(verify_5r_cover(&f, &r).passed());

        let f = e2(&[([0.0, 0.0], 1.0), ([5.0, 0.0], 1.0)]);
        let r = greedy_5r_cover(&f).unwrap();
        assert_eq!(r.selected.len(), 2);
        assert!(verify_5r_cover(&f, &r).passed());
    }

    #[test]
    fn empty_family_is_rejected() {
        assert!(matches!(
            BallFamily::new(MetricSpec::Euclidean { n: 2 }, vec![]),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn overlapping_selection_fails_disjointness() {
        let f = e2(&[([0.0, 0.0], 1.0), ([1.0, 0.0], 1.0)]);
        let bogus = CoverResult {
            selected: vec![0, 1],
            tau: 5.0,
            multiplicity: Default::default(),
        };
        let v = verify_5r_cover(&f, &bogus);
        assert!(v.has(|f| matches!(f, CoverFailure::Disjointness { a: 0, b: 1 })));
    }

    #[test]
    fn missing_half_radius_witness() {
        // ball 2 (radius 1) only meets ball 1 (radius 0.3 < 1/2); ball 0 is far away
        let f = e2(&[([10.0, 0.0], 2.0), ([0.0, 0.0], 0.3), ([1.2, 0.0], 1.0)]);
        let bogus = CoverResult {
            selected: vec![0, 1],
            tau: 5.0,
            multiplicity: Default::default(),
        };
        let v = verify_5r_cover(&f, &bogus);
        assert!(v.has(|f| matches!(f, CoverFailure::HalfRadius { ball: 2 })));
        assert!(!v.has(|f| matches!(f, CoverFailure::Disjointness { .. })));
        // the greedy answer on the same family is fine
        assert!(verify_5r_cover(&f, &greedy_5r_cover(&f).unwrap()).passed());
    }

    #[test]
    fn invalid_and_duplicate_indices() {
        let f = e2(&[([0.0, 0.0], 1.0)]);
        let bogus = CoverResult {
            selected: vec![0, 0, 7],
            tau: 5.0,
            multiplicity: Default::default(),
        };
        let v = verify_5r_cover(&f, &bogus);
        assert!(v.has(|f| matches!(f, CoverFailure::DuplicateIndex { index: 0 })));
        assert!(v.has(|f| matches!(f, CoverFailure::InvalidIndex { index: 7 })));
    }

    #[test]
    fn besicovitch_examples() {
        let f = e2(&[([0.0, 0.0], 1.0), ([5.0, 0.0], 1.0), ([0.0, 5.0], 0.5)]);
        assert_eq!(besicovitch_select(&f).unwrap().selected.len(), 3);

        let f = e2(&[([1.0, 1.0], 1.0), ([1.0, 1.0], 1.0)]);
        let r = besicovitch_select(&f).unwrap();
        assert_eq!(r.selected, vec![0]);
        assert!(uncovered_centers(&f, &r.selected).is_empty());

        let heis = family_from_rows(MetricSpec::Koranyi, &[(vec![0.0; 3], 1.0)]).unwrap();
        assert!(matches!(
            besicovitch_select(&heis),
            Err(Error::UnsupportedSpec(_))
        ));
    }

    #[test]
    fn coloring_examples() {
        let f = e2(&[([0.0, 0.0], 1.0), ([5.0, 0.0], 1.0)]);
        let sel = besicovitch_select(&f).unwrap();
        let c = disjoint_color(&f, &sel).unwrap();
        assert_eq!(c.q, 1);

        // three mutually intersecting balls, none containing another's center
        let f = e2(&[([0.0, 0.0], 0.9), ([1.0, 0.0], 0.9), ([0.5, 0.8], 0.9)]);
        let sel = besicovitch_select(&f).unwrap();
        assert_eq!(sel.selected.len(), 3);
        let c = disjoint_color(&f, &sel).unwrap();
        assert_eq!(c.q, 3);
        assert!(c.verify(&f, DEFAULT_STRICT_MARGIN));
    }

    #[test]
    fn circle_intersections_lie_on_both_boundaries() {
        let a = Ball::new(Point::new(vec![0.0, 0.0]).unwrap(), 1.0).unwrap();
        let b = Ball::new(Point::new(vec![1.0, 0.0]).unwrap(), 1.0).unwrap();
        let pts = circle_intersections(&a, &b);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-9);
            assert!(((p[0] - 1.0).hypot(p[1]) - 1.0).abs() < 1e-9);
            assert!(p[0].hypot(p[1]) <= 1.0 && (p[0] - 1.0).hypot(p[1]) <= 1.0);
        }
    }
}
