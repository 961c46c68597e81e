//! Maximal function and the weak (1,1) audit.
//!
//! Ball averages of `|f|` around `x` only change at the distances from `x` to
//! atoms, so a supremum over those breakpoints is the supremum over all radii.

use super::AtomicMeasure;
use crate::covering::{besicovitch_select_only, multiplicity_profile, BallFamily};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed, Execution};
use crate::metric::Ball;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn check_values(f: &[f64], lambda: &AtomicMeasure) -> Result<()> {
    if f.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            got: f.len(),
        });
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "function values must be finite".into(),
        ));
    }
    Ok(())
}

/// Distances closer than this (relatively) are one breakpoint; grid points
/// at equal true distance often differ in the last few bits.
const TIE: f64 = 1e-12;

fn same_breakpoint(d: f64, next: f64) -> bool {
    next <= d * (1.0 + TIE)
}

/// `Mf(x)` for `f` given by its values on the atoms of `λ`. With no schedule
/// the supremum runs over every breakpoint radius; with one it runs over the
/// listed radii only. Empty balls contribute 0.
pub fn maximal_function(
    f: &[f64],
    lambda: &AtomicMeasure,
    x: &[f64],
    schedule: Option<&[f64]>,
) -> Result<f64> {
    check_values(f, lambda)?;
    let mut by_dist: Vec<(f64, f64, f64)> = lambda
        .atoms()
        .zip(f)
        .map(|((p, m), v)| (lambda.spec.dist(x, p.coords()), v.abs() * m, m))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = 0.0f64;
    match schedule {
        None => {
            let (mut num, mut den) = (0.0, 0.0);
            for (k, &(d, fm, m)) in by_dist.iter().enumerate() {
                num += fm;
                den += m;
                if by_dist.get(k + 1).is_none_or(|n| !same_breakpoint(d, n.0)) {
                    best = best.max(num / den);
                }
            }
        }
        Some(radii) => {
            for &r in radii {
                let (num, den) = by_dist
                    .iter()
                    .take_while(|e| e.0 <= r)
                    .fold((0.0, 0.0), |(a, b), e| (a + e.1, b + e.2));
                if den > 0.0 {
                    best = best.max(num / den);
                }
            }
        }
    }
    Ok(best)
}

const GROUP_END: u32 = 1 << 31;

/// Precomputed neighbour orders for evaluating `Mf` at every atom of `λ`.
///
/// Memory is quadratic in the number of atoms (4 bytes per pair).
pub struct MaximalOperator<'a> {
    lambda: &'a AtomicMeasure,
    /// Row `i` lists atom indices by distance from atom `i`; the top bit marks
    /// the last atom at a given distance.
    orders: Vec<Vec<u32>>,
    exec: Execution,
}

impl<'a> MaximalOperator<'a> {
    pub fn new(lambda: &'a AtomicMeasure, exec: Execution) -> Result<Self> {
        if lambda.len() >= GROUP_END as usize {
            return Err(Error::InvalidArgument("too many atoms".into()));
        }
        let pts = lambda.points();
        let orders = map_indexed(exec, pts.len(), |i| {
            let x = pts[i].coords();
            let mut row: Vec<(f64, u32)> = pts
                .iter()
                .enumerate()
                .map(|(j, p)| (lambda.spec.dist(x, p.coords()), j as u32))
                .collect();
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            (0..row.len())
                .map(|k| {
                    let end = row
                        .get(k + 1)
                        .is_none_or(|n| !same_breakpoint(row[k].0, n.0));
                    row[k].1 | if end { GROUP_END } else { 0 }
                })
                .collect()
        });
        Ok(MaximalOperator {
            lambda,
            orders,
            exec,
        })
    }

    pub fn measure(&self) -> &AtomicMeasure {
        self.lambda
    }

    /// `(Mf(x_i), ρ_i)` at each atom. The closed ball `B(x_i, ρ_i)` attains the
    /// supremum; `ρ_i` sits halfway between the smallest maximising breakpoint
    /// and the next one, so containment tests on it are not decided by rounding.
    pub fn evaluate_with_radii(&self, f: &[f64]) -> Result<Vec<(f64, f64)>> {
        check_values(f, self.lambda)?;
        let masses = self.lambda.masses();
        let weighted: Vec<f64> = f.iter().zip(masses).map(|(v, m)| v.abs() * m).collect();
        let pts = self.lambda.points();
        Ok(map_indexed(self.exec, self.orders.len(), |i| {
            let (mut num, mut den) = (0.0, 0.0);
            let (mut best, mut best_at) = (0.0f64, 0usize);
            for (k, &e) in self.orders[i].iter().enumerate() {
                let j = (e & !GROUP_END) as usize;
                num += weighted[j];
                den += masses[j];
                if e & GROUP_END != 0 && num / den > best {
                    best = num / den;
                    best_at = k;
                }
            }
            let row = &self.orders[i];
            let at = |k: usize| {
                self.lambda.spec.dist(
                    pts[i].coords(),
                    pts[(row[k] & !GROUP_END) as usize].coords(),
                )
            };
            let rho = at(best_at);
            let radius = if best_at + 1 < row.len() {
                0.5 * (rho + at(best_at + 1))
            } else {
                2.0 * rho + 1.0
            };
            (best, radius)
        }))
    }

    pub fn evaluate(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .evaluate_with_radii(f)?
            .into_iter()
            .map(|(v, _)| v)
            .collect())
    }

    /// Atoms of `λ` in the closed ball `B(x_i, r)`: a prefix of row `i`.
    fn members(&self, i: usize, r: f64) -> impl Iterator<Item = usize> + '_ {
        let pts = self.lambda.points();
        let x = pts[i].coords();
        self.orders[i]
            .iter()
            .map(|&e| (e & !GROUP_END) as usize)
            .take_while(move |&j| self.lambda.spec.dist(x, pts[j].coords()) <= r)
    }

    /// Besicovitch selection over balls `B(x_i, radius_i)` centered at atoms,
    /// returning the selected atoms and the overlap count at every atom.
    ///
    /// Same rule and order as [`besicovitch_select_only`] (decreasing radius,
    /// ties by atom index), but coverage is tracked through the neighbour
    /// orders so the cost is proportional to the total overlap.
    pub fn select_atoms(&self, centers: &[usize], radius: &[f64]) -> (Vec<usize>, Vec<u32>) {
        let mut order: Vec<usize> = centers.to_vec();
        order.sort_by(|&a, &b| radius[b].total_cmp(&radius[a]).then(a.cmp(&b)));
        let mut covered = vec![false; self.lambda.len()];
        let mut overlap = vec![0u32; self.lambda.len()];
        let mut selected = Vec::new();
        for i in order {
            if covered[i] {
                continue;
            }
            selected.push(i);
            for j in self.members(i, radius[i]) {
                covered[j] = true;
                overlap[j] += 1;
            }
        }
        (selected, overlap)
    }

    /// Weak (1,1) audit for `f` at the given levels.
    ///
    /// For each `α` the superlevel atoms are covered by balls on which the
    /// average of `|f|` exceeds `α`; a Besicovitch selection of those balls
    /// gives a cover whose overlap `N_α` (measured at the atoms of `λ`) bounds
    /// the ratio `α λ{Mf > α} / ‖f‖₁`.
    pub fn weak11(&self, f: &[f64], alphas: &[f64]) -> Result<Weak11Report> {
        let mf = self.evaluate_with_radii(f)?;
        let radius: Vec<f64> = mf.iter().map(|m| m.1).collect();
        let norm: f64 = f
            .iter()
            .zip(self.lambda.masses())
            .map(|(v, m)| v.abs() * m)
            .sum();
        let mut rows = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "levels must be positive, got {alpha}"
                )));
            }
            let level: Vec<usize> = (0..mf.len()).filter(|&i| mf[i].0 > alpha).collect();
            let superlevel_mass: f64 = level.iter().map(|&i| self.lambda.masses()[i]).sum();
            let ratio = if norm == 0.0 {
                0.0
            } else {
                alpha * superlevel_mass / norm
            };
            let (selected, overlap) = self.select_atoms(&level, &radius);
            let multiplicity = overlap.iter().copied().max().unwrap_or(0) as usize;
            rows.push(Weak11Row {
                alpha,
                superlevel_mass,
                ratio,
                multiplicity,
                cover_size: selected.len(),
            });
        }
        Ok(Weak11Report { norm, rows })
    }
}

/// Besicovitch selection over the balls `B(x_i, radius_i)`, `i ∈ centers`,
/// through the general [`BallFamily`] path. Returns selected atom indices and
/// the largest overlap at an atom of `λ`.
pub fn select_atoms_generic(
    lambda: &AtomicMeasure,
    centers: &[usize],
    radius: &[f64],
) -> Result<(Vec<usize>, usize)> {
    let balls = centers
        .iter()
        .map(|&i| Ball::new(lambda.points()[i].clone(), radius[i]))
        .collect::<Result<Vec<_>>>()?;
    let family = BallFamily::new(lambda.spec.clone(), balls)?;
    let cover = besicovitch_select_only(&family)?;
    let probes: Vec<Vec<f64>> = lambda
        .points()
        .iter()
        .map(|p| p.coords().to_vec())
        .collect();
    let max = multiplicity_profile(&family, &cover.selected, &probes).max;
    Ok((cover.selected.iter().map(|&k| centers[k]).collect(), max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weak11Row {
    pub alpha: f64,
    pub superlevel_mass: f64,
    pub ratio: f64,
    /// Overlap of the selected cover of the superlevel set.
    pub multiplicity: usize,
    pub cover_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weak11Report {
    pub norm: f64,
    pub rows: Vec<Weak11Row>,
}

impl Weak11Report {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn max_multiplicity(&self) -> usize {
        self.rows.iter().map(|r| r.multiplicity).max().unwrap_or(0)
    }

    /// Every row satisfies `ratio ≤ N_α + tol`.
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.ratio <= r.multiplicity as f64 + tol)
    }
}

/// Levels just below evenly spaced quantiles of the positive values of `mf`;
/// `α λ{Mf > α}` is largest as `α` approaches a value of `Mf` from below.
pub fn alpha_grid(mf: &[f64], count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = mf.iter().copied().filter(|&x| x > 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.is_empty() || count == 0 {
        return Vec::new();
    }
    let last = v.len() - 1;
    let mut out: Vec<f64> = (0..count)
        .map(|q| {
            if count == 1 {
                last
            } else {
                q * last / (count - 1)
            }
        })
        .map(|i| v[i] * (1.0 - 1e-12))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Random nonnegative functions on the cell centres of a `side × side` grid
/// (in the order of [`AtomicMeasure::grid_lebesgue`]): a mix of dense noise, sparse spikes and bumps on random discs.
pub fn random_grid_functions(side: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[j as u64]));
            let len = side * side;
            match j % 3 {
                0 => (0..len).map(|_| rng.random::<f64>()).collect(),
                1 => (0..len)
                    .map(|_| {
                        if rng.random::<f64>() < 0.03 {
                            10.0 * rng.random::<f64>()
                        } else {
                            0.0
                        }
                    })
                    .collect(),
                _ => {
                    let (cx, cy, r, h) = (
                        rng.random::<f64>(),
                        rng.random::<f64>(),
                        0.05 + 0.3 * rng.random::<f64>(),
                        1.0 + rng.random::<f64>(),
                    );
                    (0..len)
                        .map(|i| {
                            let x = ((i % side) as f64 + 0.5) / side as f64;
                            let y = ((i / side) as f64 + 0.5) / side as f64;
                            if (x - cx).hypot(y - cy) <= r {
                                h
                            } else {
                                0.0
                            }
                        })
                        .collect()
                }
            }
        })
        .collect()
}

/// One-shot weak (1,1) audit; builds a [`MaximalOperator`] internally.
pub fn weak11_check(
    f: &[f64],
    lambda: &AtomicMeasure,
    alphas: &[f64],
    exec: Execution,
) -> Result<Weak11Report> {
    MaximalOperator::new(lambda, exec)?.weak11(f, alphas)
}
