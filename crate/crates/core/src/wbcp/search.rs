//! Multi-start simulated annealing over center positions.
//!
//! The witness is pinned at the origin (every supported distance is invariant
//! under its group translations) and radii are kept tight, so a configuration
//! is described by its centers alone. For tight radii the constraint set
//! reduces to `d(x_i, x_j) > d(0, x_i)`; the annealer maximises
//!
//! ```text
//! min_i ( min_{j≠i} d(x_i, x_j) − d(0, x_i) ) / max_i d(0, x_i)
//! ```
//!
//! which is invariant under the spec's dilations. Halving this gap is exactly
//! the margin obtained after [`polish_radii`] at unit scale.

use super::certificate::{Certificate, DEFAULT_PRECISION};
use super::{polish_radii, validate_config, BesicovitchConfig};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed, Execution};
use crate::metric::{random_point, MetricSpec, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub target_k: usize,
    pub seed: u64,
    /// Initial Gaussian step, relative to each center's own scale.
    pub step_start: f64,
    pub step_end: f64,
    /// Annealing temperature as a multiple of the current step.
    pub temperature: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 64,
            iterations: 20_000,
            target_k: 8,
            seed: 0,
            step_start: 0.3,
            step_end: 1e-4,
            temperature: 0.02,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_target(mut self, k: usize) -> Self {
        self.target_k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 || self.target_k == 0 {
            return Err(Error::InvalidArgument(
                "restarts, iterations and target k must be positive".into(),
            ));
        }
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.step_start)
            || !ok(self.step_end)
            || self.step_end > self.step_start
            || !ok(self.temperature)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid cooling schedule {} -> {} at temperature {}",
                self.step_start, self.step_end, self.temperature
            )));
        }
        Ok(())
    }
}

/// Share of the iterations spent on the scale-relative score before switching
/// to the true margin.
const EXPLORE_FRACTION: f64 = 0.7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Explore,
    Refine,
}

struct Annealer<'a> {
    spec: &'a MetricSpec,
    weights: Vec<f64>,
    dim: usize,
    k: usize,
    origin: Vec<f64>,
    /// Flattened centers, `k × dim`.
    x: Vec<f64>,
    /// `d(0, x_i)`.
    norm: Vec<f64>,
    /// `pair[i*k + j] = d(x_i, x_j)`.
    pair: Vec<f64>,
}

impl<'a> Annealer<'a> {
    fn new(spec: &'a MetricSpec, x: Vec<f64>) -> Self {
        let dim = spec.dim();
        let k = x.len() / dim;
        let mut a = Annealer {
            spec,
            weights: spec.dilation_weights(),
            dim,
            k,
            origin: vec![0.0; dim],
            x,
            norm: vec![0.0; k],
            pair: vec![0.0; k * k],
        };
        a.recompute_all();
        a
    }

    fn center(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    fn recompute_all(&mut self) {
        for i in 0..self.k {
            self.refresh(i);
        }
    }

    fn refresh(&mut self, i: usize) {
        let k = self.k;
        self.norm[i] = self.spec.dist(&self.origin, self.center(i));
        for j in 0..k {
            if j != i {
                let dij = self.spec.dist(self.center(i), self.center(j));
                let dji = self.spec.dist(self.center(j), self.center(i));
                self.pair[i * k + j] = dij;
                self.pair[j * k + i] = dji;
            }
        }
    }

    /// Smallest tight-radius slack over the largest witness distance.
    fn objective(&self) -> f64 {
        let k = self.k;
        let max_norm = self.norm.iter().cloned().fold(0.0, f64::max);
        if max_norm <= 0.0 || !max_norm.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut worst = f64::INFINITY;
        for i in 0..k {
            let mut sep = f64::INFINITY;
            for j in 0..k {
                if j != i {
                    sep = sep.min(self.pair[i * k + j]);
                }
            }
            let gap = if sep.is_finite() {
                sep - self.norm[i]
            } else {
                self.norm[i]
            };
            worst = worst.min(gap);
        }
        worst / max_norm
    }

    /// Every slack measured against the smaller of the two witness distances
    /// involved. A center collapsing onto the witness no longer drives this
    /// towards zero, which removes the degenerate attractor of [`objective`].
    fn pair_relative_objective(&self) -> f64 {
        let k = self.k;
        if !self.norm.iter().all(|&d| d > 0.0) {
            return f64::NEG_INFINITY;
        }
        if k == 1 {
            return 1.0;
        }
        let mut worst = f64::INFINITY;
        for i in 0..k {
            for j in 0..k {
                if j != i {
                    let gap = self.pair[i * k + j] - self.norm[i];
                    worst = worst.min(gap / self.norm[i].min(self.norm[j]));
                }
            }
        }
        worst
    }

    fn score(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Explore => self.pair_relative_objective(),
            Phase::Refine => self.objective(),
        }
    }

    fn normalize(&mut self, target: f64) {
        let max_norm = self.norm.iter().cloned().fold(0.0, f64::max);
        if !(max_norm > 0.0 && max_norm.is_finite()) {
            return;
        }
        let t = target / max_norm;
        for i in 0..self.k {
            let scaled = self.spec.dilate(t, self.center(i));
            self.x[i * self.dim..(i + 1) * self.dim].copy_from_slice(&scaled);
        }
        self.recompute_all();
    }

    fn propose<R: Rng>(&mut self, i: usize, step: f64, rng: &mut R) {
        let dim = self.dim;
        let scale = self.norm[i].max(1e-300);
        let move_kind: f64 = rng.random();
        if move_kind < 0.04 {
            // jump: fresh point at a random scale
            let max_norm = self.norm.iter().cloned().fold(0.0, f64::max).max(1e-300);
            let t = max_norm * rng.random_range((0.02f64).ln()..0.0).exp();
            let fresh = random_point(self.spec, rng, t);
            self.x[i * dim..(i + 1) * dim].copy_from_slice(&fresh);
        } else if move_kind < 0.06 {
            // jump: group inverse (x ↦ -x in these coordinates)
            for c in &mut self.x[i * dim..(i + 1) * dim] {
                *c = -*c;
            }
        } else if move_kind < 0.18 {
            let g: f64 = rng.sample(StandardNormal);
            let scaled = self.spec.dilate((step * g).exp(), self.center(i));
            self.x[i * dim..(i + 1) * dim].copy_from_slice(&scaled);
        } else {
            for c in 0..dim {
                let g: f64 = rng.sample(StandardNormal);
                let w = self.weights[c];
                let s = if w == 1.0 { scale } else { scale.powf(w) };
                self.x[i * dim + c] += step * g * s;
            }
        }
        self.refresh(i);
    }

    fn anneal(&mut self, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = self.k;
        let dim = self.dim;
        let ratio = budget.step_end / budget.step_start;
        let denom = (budget.iterations.max(2) - 1) as f64;
        let explore_iters = (budget.iterations as f64 * EXPLORE_FRACTION) as usize;

        let mut phase = Phase::Explore;
        let mut current = self.score(phase);
        let mut best = current;
        let mut best_x = self.x.clone();

        let mut saved_x = vec![0.0; dim];
        let mut saved_row = vec![0.0; k];
        let mut saved_col = vec![0.0; k];

        for it in 0..budget.iterations {
            if it == explore_iters {
                // continue from the best explored state, now scoring the true margin
                self.x.copy_from_slice(&best_x);
                self.recompute_all();
                phase = Phase::Refine;
                current = self.score(phase);
                best = current;
            }
            let step = budget.step_start * ratio.powf(it as f64 / denom);
            let temp = budget.temperature * step;
            let i = rng.random_range(0..k);

            saved_x.copy_from_slice(self.center(i));
            let saved_norm = self.norm[i];
            for j in 0..k {
                saved_row[j] = self.pair[i * k + j];
                saved_col[j] = self.pair[j * k + i];
            }

            self.propose(i, step, rng);
            let candidate = if self.norm[i] > 0.0 {
                self.score(phase)
            } else {
                f64::NEG_INFINITY
            };
            let delta = candidate - current;
            let accept = candidate.is_finite()
                && (delta >= 0.0 || rng.random::<f64>() < (delta / temp).exp());
            if accept {
                current = candidate;
                if current > best {
                    best = current;
                    best_x.copy_from_slice(&self.x);
                }
            } else {
                self.x[i * dim..(i + 1) * dim].copy_from_slice(&saved_x);
                self.norm[i] = saved_norm;
                for j in 0..k {
                    self.pair[i * k + j] = saved_row[j];
                    self.pair[j * k + i] = saved_col[j];
                }
            }
            if it % 1024 == 1023 {
                // keep coordinates O(1); both scores are scale free
                self.normalize(1.0);
                current = self.score(phase);
            }
        }
        best_x
    }
}

fn cold_start(spec: &MetricSpec, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = Vec::with_capacity(k * spec.dim());
    for _ in 0..k {
        loop {
            let t = (rng.random_range((0.02f64).ln()..0.0)).exp();
            let p = random_point(spec, rng, t);
            if p.iter().any(|c| *c != 0.0) {
                x.extend(p);
                break;
            }
        }
    }
    x
}

fn warm_start(
    spec: &MetricSpec,
    seed_centers: &[Point],
    extra: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut x: Vec<f64> = seed_centers
        .iter()
        .flat_map(|p| p.coords().iter().copied())
        .collect();
    let max_norm = seed_centers
        .iter()
        .map(|p| spec.dist(&vec![0.0; spec.dim()], p.coords()))
        .fold(0.0, f64::max);
    if max_norm > 0.0 {
        let t = 1.0 / max_norm;
        x = x
            .chunks(spec.dim())
            .flat_map(|c| spec.dilate(t, c))
            .collect();
    }
    x.extend(cold_start(spec, extra, rng));
    x
}

/// Deterministic total order used to break margin ties between restarts.
fn config_key(cert: &Certificate) -> Vec<u64> {
    cert.config
        .centers
        .iter()
        .flat_map(|p| p.coords().iter().map(|c| c.to_bits()))
        .collect()
}

fn better(a: &Certificate, b: &Certificate) -> Ordering {
    a.margin
        .total_cmp(&b.margin)
        .then_with(|| config_key(b).cmp(&config_key(a)))
}

/// Best certificate for a fixed family size `k`.
///
/// When `seed_centers` is given every restart starts from those centers plus
/// `k - seed_centers.len()` random new ones.
pub fn search_target(
    spec: &MetricSpec,
    k: usize,
    budget: &SearchBudget,
    radius_cap: Option<f64>,
    seed_centers: Option<&[Point]>,
    exec: Execution,
) -> Result<Certificate> {
    spec.validate()?;
    budget.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "family size must be positive".into(),
        ));
    }
    if let Some(seed) = seed_centers {
        if seed.len() > k {
            return Err(Error::InvalidArgument(
                "more seed centers than target size".into(),
            ));
        }
        for p in seed {
            spec.check_dim(p)?;
        }
    }
    let scale = match radius_cap {
        Some(cap) if cap > 0.0 && cap.is_finite() => 0.5 * cap,
        Some(cap) => {
            return Err(Error::InvalidArgument(format!(
                "radius cap must be positive, got {cap}"
            )))
        }
        None => 1.0,
    };
    let warm = seed_centers.is_some() as u64;

    let results = map_indexed(exec, budget.restarts, |restart| -> Result<Certificate> {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, &[k as u64, restart as u64, warm]));
        let x0 = match seed_centers {
            Some(seed) => warm_start(spec, seed, k - seed.len(), &mut rng),
            None => cold_start(spec, k, &mut rng),
        };
        let mut annealer = Annealer::new(spec, x0);
        let best = annealer.anneal(budget, &mut rng);
        let mut final_state = Annealer::new(spec, best);
        final_state.normalize(scale);
        let centers = (0..k)
            .map(|i| Point::new(final_state.center(i).to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let radii = final_state
            .norm
            .iter()
            .map(|d| d.max(f64::MIN_POSITIVE))
            .collect();
        let config = BesicovitchConfig::new(
            spec.clone(),
            Point::origin(spec.dim()),
            centers,
            radii,
            radius_cap,
        )?;
        let config = polish_radii(&config);
        let margin = validate_config(&config)?;
        Ok(Certificate {
            config,
            margin,
            precision: DEFAULT_PRECISION,
            seed: budget.seed,
            budget: budget.clone(),
        })
    });

    let mut best: Option<Certificate> = None;
    for r in results {
        let cert = r?;
        best = match best {
            Some(b) if better(&b, &cert) != Ordering::Less => Some(b),
            _ => Some(cert),
        };
    }
    best.ok_or_else(|| Error::InvalidArgument("no restarts".into()))
}

/// Best certificate found for every `k = 1..=budget.target_k`. Entries whose
/// margin does not clear the acceptance threshold mean "not found".
pub fn search_max_family(spec: &MetricSpec, budget: &SearchBudget) -> Result<Vec<Certificate>> {
    search_max_family_with(spec, budget, None, Execution::default())
}

pub fn search_max_family_with(
    spec: &MetricSpec,
    budget: &SearchBudget,
    radius_cap: Option<f64>,
    exec: Execution,
) -> Result<Vec<Certificate>> {
    (1..=budget.target_k)
        .map(|k| search_target(spec, k, budget, radius_cap, None, exec))
        .collect()
}

/// Tries to add one ball to a valid certificate while re-optimising all
/// centers. Returns the input unchanged when no larger valid family is found.
pub fn grow_family(cert: &Certificate, budget: &SearchBudget) -> Result<Certificate> {
    grow_family_with(cert, budget, Execution::default())
}

pub fn grow_family_with(
    cert: &Certificate,
    budget: &SearchBudget,
    exec: Execution,
) -> Result<Certificate> {
    if !cert.is_valid() {
        return Err(Error::Precondition(format!(
            "cannot grow an invalid certificate (margin {:e})",
            cert.margin
        )));
    }
    let spec = &cert.config.spec;
    // move the witness to the origin; both group laws invert as g ↦ -g
    let w_inv: Vec<f64> = cert.config.witness.coords().iter().map(|c| -c).collect();
    let seed: Vec<Point> = cert
        .config
        .centers
        .iter()
        .map(|c| Point::new(spec.translate(&w_inv, c.coords())))
        .collect::<Result<_>>()?;
    let mut grown = search_target(
        spec,
        cert.k() + 1,
        budget,
        cert.config.radius_cap,
        Some(&seed),
        exec,
    )?;
    grown.precision = cert.precision;
    if grown.is_valid() {
        Ok(grown)
    } else {
        Ok(cert.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_budget(seed: u64) -> SearchBudget {
        SearchBudget {
            restarts: 8,
            iterations: 4000,
            target_k: 3,
            seed,
            ..SearchBudget::default()
        }
    }

    #[test]
    fn line_admits_two_but_not_three() {
        let spec = MetricSpec::Euclidean { n: 1 };
        let found = search_max_family(&spec, &small_budget(1)).unwrap();
        assert!(found[0].is_valid());
        assert!(found[1].is_valid());
        assert!(!found[2].is_valid(), "margin {}", found[2].margin);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = MetricSpec::Euclidean { n: 2 };
        let a = search_target(
            &spec,
            4,
            &small_budget(5),
            None,
            None,
            Execution::Sequential,
        )
        .unwrap();
        let b = search_target(&spec, 4, &small_budget(5), None, None, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn radius_cap_is_respected() {
        let spec = MetricSpec::Euclidean { n: 2 };
        let c = search_target(
            &spec,
            3,
            &small_budget(2),
            Some(0.25),
            None,
            Execution::Sequential,
        )
        .unwrap();
        assert!(c.is_valid());
        assert!(c.config.radii.iter().all(|r| *r < 0.25));
    }

    #[test]
    fn grow_rejects_invalid_input() {
        let spec = MetricSpec::Euclidean { n: 1 };
        let found = search_max_family(&spec, &small_budget(1)).unwrap();
        assert!(matches!(
            grow_family(&found[2], &small_budget(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn budget_validation() {
        assert!(SearchBudget::default().validate().is_ok());
        assert!(SearchBudget {
            restarts: 0,
            ..SearchBudget::default()
        }
        .validate()
        .is_err());
        assert!(SearchBudget {
            step_end: 1.0,
            ..SearchBudget::default()
        }
        .validate()
        .is_err());
    }
}
