//! Finite atomic measures and the differentiation harness.
//!
//! "Grid-Lebesgue" below means the uniform atomic measure on a regular grid of
//! the unit cube; it stands in for Lebesgue measure up to discretisation.
//! Identities that should hold exactly are evaluated in rational arithmetic
//! (every finite double converts to a rational without loss).

mod maximal;

pub use maximal::{
    alpha_grid, maximal_function, random_grid_functions, select_atoms_generic, weak11_check,
    MaximalOperator, Weak11Report, Weak11Row,
};

use crate::error::{Error, Result};
use crate::metric::{MetricSpec, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Bit pattern of a point, with `-0.0` folded onto `0.0`, for exact lookups.
fn key(p: &[f64]) -> Vec<u64> {
    p.iter()
        .map(|&c| if c == 0.0 { 0 } else { c.to_bits() })
        .collect()
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub spec: MetricSpec,
    points: Vec<Point>,
    masses: Vec<f64>,
    #[serde(skip)]
    index: HashMap<Vec<u64>, usize>,
}

impl PartialEq for AtomicMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.points == other.points && self.masses == other.masses
    }
}

impl AtomicMeasure {
    pub fn new(spec: MetricSpec, atoms: Vec<(Point, f64)>) -> Result<Self> {
        spec.validate()?;
        let mut points = Vec::with_capacity(atoms.len());
        let mut masses = Vec::with_capacity(atoms.len());
        let mut index = HashMap::with_capacity(atoms.len());
        for (p, m) in atoms {
            spec.check_dim(&p)?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "atom mass must be positive and finite, got {m}"
                )));
            }
            if index.insert(key(p.coords()), points.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate atom at {p}")));
            }
            points.push(p);
            masses.push(m);
        }
        Ok(AtomicMeasure {
            spec,
            points,
            masses,
            index,
        })
    }

    pub fn zero(spec: MetricSpec) -> Self {
        AtomicMeasure {
            spec,
            points: Vec::new(),
            masses: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Uniform measure of total mass 1 on the `m^n` cell centres `(i + 1/2)/m` of `[0,1]^n`.
    pub fn grid_lebesgue(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one cell per axis".into(),
            ));
        }
        Self::uniform_grid(n, m, |i| (i as f64 + 0.5) / m as f64)
    }

    /// Uniform measure of total mass 1 on the tensor grid `linspace(0, 1, m)^n`.
    pub fn linspace_grid(n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(
                "linspace grid needs at least two points per axis".into(),
            ));
        }
        Self::uniform_grid(n, m, |i| i as f64 / (m - 1) as f64)
    }

    fn uniform_grid(n: usize, m: usize, coord: impl Fn(usize) -> f64) -> Result<Self> {
        let total = m
            .checked_pow(n as u32)
            .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
        let mass = 1.0 / total as f64;
        let atoms = (0..total)
            .map(|mut idx| {
                let mut c = vec![0.0; n];
                for slot in c.iter_mut() {
                    *slot = coord(idx % m);
                    idx /= m;
                }
                Ok((Point::new(c)?, mass))
            })
            .collect::<Result<Vec<_>>>()?;
        AtomicMeasure::new(MetricSpec::Euclidean { n }, atoms)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().zip(self.masses.iter().copied())
    }

    pub fn index_of(&self, p: &[f64]) -> Option<usize> {
        if self.index.len() != self.points.len() {
            // deserialised measures arrive without the index
            return self.points.iter().position(|q| key(q.coords()) == key(p));
        }
        self.index.get(&key(p)).copied()
    }

    /// `μ({p})`.
    pub fn mass_at(&self, p: &[f64]) -> f64 {
        self.index_of(p).map_or(0.0, |i| self.masses[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass of the closed ball `B(x, r)`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.masses)
            .filter(|(p, _)| self.spec.dist(x, p.coords()) <= r)
            .map(|(_, m)| m)
            .sum()
    }

    /// Exact mass of a set of points.
    pub fn mass_of_exact(&self, set: &[Point]) -> BigRational {
        set.iter().map(|p| rational(self.mass_at(p.coords()))).sum()
    }

    fn same_spec(&self, other: &AtomicMeasure) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidArgument(format!(
                "measures live on different spaces: {} vs {}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    /// Atomwise sum.
    pub fn plus(&self, other: &AtomicMeasure) -> Result<AtomicMeasure> {
        self.same_spec(other)?;
        let mut atoms: Vec<(Point, f64)> = self.atoms().map(|(p, m)| (p.clone(), m)).collect();
        for (p, m) in other.atoms() {
            match self.index_of(p.coords()) {
                Some(i) => atoms[i].1 += m,
                None => atoms.push((p.clone(), m)),
            }
        }
        AtomicMeasure::new(self.spec.clone(), atoms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub absolutely_continuous: AtomicMeasure,
    pub singular: AtomicMeasure,
}

/// Splits `μ` into the part carried by atoms of `λ` and the rest.
pub fn lebesgue_decompose(mu: &AtomicMeasure, lambda: &AtomicMeasure) -> Result<Decomposition> {
    mu.same_spec(lambda)?;
    let (on, off): (Vec<_>, Vec<_>) = mu
        .atoms()
        .map(|(p, m)| (p.clone(), m))
        .partition(|(p, _)| lambda.index_of(p.coords()).is_some());
    Ok(Decomposition {
        absolutely_continuous: AtomicMeasure::new(mu.spec.clone(), on)?,
        singular: AtomicMeasure::new(mu.spec.clone(), off)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub point: Point,
    pub upper: f64,
    pub lower: f64,
    /// Decreasing radii at which the ratio was evaluated.
    pub radii: Vec<f64>,
    /// Ratio `μ(B(x,r))/λ(B(x,r))` at each radius.
    pub ratios: Vec<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        // 0/0 is read as 0; a positive mass over an empty λ-ball is +∞
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Sorted distinct distances from `x` to the atoms of the given measures,
/// largest first, followed by half the smallest positive one (or by `1` when
/// every atom sits at `x`).
pub fn breakpoint_schedule(x: &[f64], measures: &[&AtomicMeasure]) -> Vec<f64> {
    let mut d: Vec<f64> = measures
        .iter()
        .flat_map(|m| m.points.iter().map(|p| m.spec.dist(x, p.coords())))
        .filter(|&d| d > 0.0)
        .collect();
    d.sort_by(|a, b| b.total_cmp(a));
    d.dedup();
    let last = d.last().map_or(1.0, |&s| s / 2.0);
    d.push(last);
    d
}

/// Upper and lower derivative estimates of `μ` with respect to `λ` at `x`,
/// taken over the trailing quarter of the schedule (at least one radius).
pub fn derivative_at(
    mu: &AtomicMeasure,
    lambda: &AtomicMeasure,
    x: &Point,
    schedule: Option<&[f64]>,
) -> Result<DensityEstimate> {
    mu.same_spec(lambda)?;
    mu.spec.check_dim(x)?;
    let radii = match schedule {
        Some(s) => {
            if s.is_empty() || s.windows(2).any(|w| w[1] >= w[0]) || !s.iter().all(|&r| r > 0.0) {
                return Err(Error::InvalidArgument(
                    "schedule must be positive and strictly decreasing".into(),
                ));
            }
            s.to_vec()
        }
        None => breakpoint_schedule(x.coords(), &[mu, lambda]),
    };
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| ratio(mu.ball_mass(x.coords(), r), lambda.ball_mass(x.coords(), r)))
        .collect();
    let tail = &ratios[ratios.len() - (ratios.len() / 4).max(1)..];
    let upper = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DensityEstimate {
        point: x.clone(),
        upper,
        lower,
        radii,
        ratios,
    })
}

/// `D(μ, λ, x)` in exact arithmetic: the ratio of closed-ball masses below the
/// isolation radius of `x`, which for finite atomic measures is `μ({x})/λ({x})`.
/// Returns `None` when `λ({x}) = 0` and `μ({x}) > 0`.
pub fn exact_derivative(
    mu: &AtomicMeasure,
    lambda: &AtomicMeasure,
    x: &[f64],
) -> Option<BigRational> {
    let r = *breakpoint_schedule(x, &[mu, lambda])
        .last()
        .expect("schedule is never empty");
    let ball = |m: &AtomicMeasure| -> BigRational {
        m.atoms()
            .filter(|(p, _)| m.spec.dist(x, p.coords()) <= r)
            .map(|(_, w)| rational(w))
            .sum()
    };
    let (num, den) = (ball(mu), ball(lambda));
    if den.is_zero() {
        num.is_zero().then(BigRational::zero)
    } else {
        Some(num / den)
    }
}

/// `|μ_λ(A) − Σ_{x∈A} D(μ,λ,x) λ({x})|` over atoms `A`, exactly.
pub fn density_representation_check(
    mu: &AtomicMeasure,
    lambda: &AtomicMeasure,
    set: &[Point],
) -> Result<BigRational> {
    let dec = lebesgue_decompose(mu, lambda)?;
    let lhs = dec.absolutely_continuous.mass_of_exact(set);
    let mut rhs = BigRational::zero();
    for x in set {
        let lx = rational(lambda.mass_at(x.coords()));
        if lx.is_zero() {
            continue;
        }
        let d = exact_derivative(mu, lambda, x.coords()).expect("λ has an atom here");
        rhs += d * lx;
    }
    Ok((lhs - rhs).abs())
}

/// Outcome of the two density comparison inequalities for a threshold `c` on a set `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityComparison {
    /// `D < c` on `A` was observed.
    pub below_applies: bool,
    /// `μ_λ(A) ≤ c λ(A)`.
    pub below_holds: bool,
    /// `D > c` on `A` was observed.
    pub above_applies: bool,
    /// `μ_λ(A) ≥ c λ(A)`.
    pub above_holds: bool,
}

impl DensityComparison {
    pub fn consistent(&self) -> bool {
        (!self.below_applies || self.below_holds) && (!self.above_applies || self.above_holds)
    }
}

/// Checks both density comparison inequalities on `A` for threshold `c`,
/// exactly. On finite atomic measures upper and lower derivatives coincide.
pub fn density_comparison_check(
    mu: &AtomicMeasure,
    lambda: &AtomicMeasure,
    set: &[Point],
    c: f64,
) -> Result<DensityComparison> {
    let dec = lebesgue_decompose(mu, lambda)?;
    let c = rational(c);
    let mu_a = dec.absolutely_continuous.mass_of_exact(set);
    let lambda_a = lambda.mass_of_exact(set);
    let ds: Vec<Option<BigRational>> = set
        .iter()
        .map(|x| exact_derivative(mu, lambda, x.coords()))
        .collect();
    // an undefined derivative (μ-atom off λ) counts as +∞
    let below_applies = ds.iter().all(|d| matches!(d, Some(v) if *v < c));
    let above_applies = ds.iter().all(|d| d.as_ref().is_none_or(|v| *v > c));
    Ok(DensityComparison {
        below_applies,
        below_holds: mu_a <= c.clone() * lambda_a.clone(),
        above_applies,
        above_holds: mu_a >= c * lambda_a,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentiationRow {
    pub point: Point,
    pub value: f64,
    pub average: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentiationReport {
    pub radius: f64,
    pub tolerance: f64,
    pub rows: Vec<DifferentiationRow>,
}

impl DifferentiationReport {
    pub fn non_convergent(&self) -> Vec<&Point> {
        self.rows
            .iter()
            .filter(|r| !r.converged)
            .map(|r| &r.point)
            .collect()
    }
}

/// Compares the `λ`-average of `f` on `B(x, r_min)` with `f(x)` at each sample,
/// `r_min` being the last radius of the schedule. A sample converges when the
/// difference is within `tolerance`.
pub fn differentiation_check(
    f: &dyn Fn(&[f64]) -> f64,
    lambda: &AtomicMeasure,
    samples: &[Point],
    schedule: &[f64],
    tolerance: f64,
) -> Result<DifferentiationReport> {
    let radius = *schedule
        .last()
        .ok_or_else(|| Error::InvalidArgument("schedule must not be empty".into()))?;
    let values: Vec<f64> = lambda.points.iter().map(|p| f(p.coords())).collect();
    let mut rows = Vec::with_capacity(samples.len());
    for x in samples {
        lambda.spec.check_dim(x)?;
        let (mut num, mut den) = (0.0, 0.0);
        for ((p, m), v) in lambda.atoms().zip(&values) {
            if lambda.spec.dist(x.coords(), p.coords()) <= radius {
                num += v * m;
                den += m;
            }
        }
        let average = ratio(num, den);
        let value = f(x.coords());
        let error = (average - value).abs();
        rows.push(DifferentiationRow {
            point: x.clone(),
            value,
            average,
            error,
            converged: error <= tolerance,
        });
    }
    Ok(DifferentiationReport {
        radius,
        tolerance,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingAudit {
    pub worst_ratio: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
    pub balls_checked: usize,
}

/// Largest `λ(B(x,2r))/λ(B(x,r))` over balls centered at atoms, for the given radii.
pub fn doubling_audit(lambda: &AtomicMeasure, radii: &[f64]) -> Result<DoublingAudit> {
    if lambda.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut audit = DoublingAudit {
        worst_ratio: 0.0,
        worst_center: 0,
        worst_radius: 0.0,
        balls_checked: 0,
    };
    for (i, x) in lambda.points.iter().enumerate() {
        for &r in radii {
            let q = lambda.ball_mass(x.coords(), 2.0 * r) / lambda.ball_mass(x.coords(), r);
            audit.balls_checked += 1;
            if q > audit.worst_ratio {
                audit.worst_ratio = q;
                audit.worst_center = i;
                audit.worst_radius = r;
            }
        }
    }
    Ok(audit)
}
