//! Iterated disjoint extraction over an atomic measure.
//!
//! Each round restricts the family to balls centered at atoms not yet covered
//! and disjoint from everything kept so far, runs a Besicovitch selection,
//! colors it, and keeps the color class that captures the most remaining mass.
//! Mass bookkeeping is done atom by atom, so the decay bound can be checked
//! exactly round by round.

use super::{besicovitch_select_only, disjoint_color_with, BallFamily};
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::metric::{Point, DEFAULT_STRICT_MARGIN};
use serde::{Deserialize, Serialize};

/// Which balls around a remaining atom may enter a round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissiblePolicy {
    /// Every admissible ball.
    Full,
    /// Only the smallest admissible ball per atom. A finite family stands in
    /// for a fine one this way: large balls cannot strand their neighbours.
    #[default]
    Finest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRound {
    /// Family indices kept in this round; pairwise disjoint.
    pub kept: Vec<usize>,
    /// Colors used by the round's coloring.
    pub q: usize,
    pub captured: f64,
    /// Mass of `A` not yet covered after the round.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionTrace {
    pub policy: AdmissiblePolicy,
    pub initial_mass: f64,
    pub rounds: Vec<ExtractionRound>,
    /// Largest coloring bound used over the run.
    pub q: usize,
    /// `1 - 1/(4Q)`.
    pub u: f64,
    /// Points of `A` with positive mass that no admissible ball could reach.
    pub stranded: Vec<usize>,
}

impl ExtractionTrace {
    pub fn final_residual(&self) -> f64 {
        self.rounds.last().map_or(self.initial_mass, |r| r.residual)
    }

    pub fn kept(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .flat_map(|r| r.kept.iter().copied())
            .collect()
    }

    /// `residual(m) ≤ u^m λ(A)` for every round `m`, up to rounding in the sums.
    pub fn decay_holds(&self) -> bool {
        self.rounds.iter().enumerate().all(|(m, r)| {
            let bound = self.u.powi(m as i32 + 1) * self.initial_mass;
            r.residual <= bound * (1.0 + 1e-12)
        })
    }

    pub fn residuals_non_increasing(&self) -> bool {
        let mut prev = self.initial_mass;
        self.rounds.iter().all(|r| {
            let ok = r.residual <= prev;
            prev = r.residual;
            ok
        })
    }
}

/// Runs the extraction for the points `set` (whose mass is read from `λ`).
pub fn vitali_extract(
    lambda: &AtomicMeasure,
    set: &[Point],
    family: &BallFamily,
    policy: AdmissiblePolicy,
) -> Result<ExtractionTrace> {
    vitali_extract_with(lambda, set, family, policy, DEFAULT_STRICT_MARGIN)
}

pub fn vitali_extract_with(
    lambda: &AtomicMeasure,
    set: &[Point],
    family: &BallFamily,
    policy: AdmissiblePolicy,
    strict: f64,
) -> Result<ExtractionTrace> {
    if lambda.spec != family.spec {
        return Err(Error::InvalidArgument(
            "measure and family live on different spaces".into(),
        ));
    }
    let masses: Vec<f64> = set.iter().map(|p| lambda.mass_at(p.coords())).collect();
    // balls centered at each point of the set, exact coordinate match
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); set.len()];
    for (b, ball) in family.balls.iter().enumerate() {
        for (a, p) in set.iter().enumerate() {
            if ball.center == *p {
                around[a].push(b);
            }
        }
    }
    if let Some(a) = around.iter().position(Vec::is_empty) {
        return Err(Error::Precondition(format!(
            "point {} is not the center of any ball",
            set[a]
        )));
    }

    let initial_mass: f64 = masses.iter().sum();
    let mut remaining: Vec<bool> = vec![true; set.len()];
    let mut kept: Vec<usize> = Vec::new();
    let mut rounds = Vec::new();
    let mut q_max = 1;
    let residual_of = |remaining: &[bool]| -> f64 {
        masses
            .iter()
            .zip(remaining)
            .filter(|(_, r)| **r)
            .map(|(m, _)| m)
            .sum::<f64>()
            + 0.0
    };

    loop {
        if residual_of(&remaining) == 0.0 {
            break;
        }
        let mut admissible: Vec<usize> = Vec::new();
        for a in (0..set.len()).filter(|&a| remaining[a]) {
            let ok = around[a]
                .iter()
                .copied()
                .filter(|&b| kept.iter().all(|&k| family.disjoint(b, k, strict)));
            match policy {
                AdmissiblePolicy::Full => admissible.extend(ok),
                AdmissiblePolicy::Finest => admissible.extend(ok.min_by(|&x, &y| {
                    family.balls[x]
                        .radius
                        .total_cmp(&family.balls[y].radius)
                        .then(x.cmp(&y))
                })),
            }
        }
        admissible.sort_unstable();
        admissible.dedup();
        if admissible.is_empty() {
            break;
        }

        let sub = BallFamily::new(
            family.spec.clone(),
            admissible
                .iter()
                .map(|&b| family.balls[b].clone())
                .collect(),
        )?;
        let selection = besicovitch_select_only(&sub)?;
        let coloring = disjoint_color_with(&sub, &selection.selected, strict)?;
        q_max = q_max.max(coloring.q);

        let captured_by = |class: &[usize]| -> (f64, Vec<usize>) {
            let hit: Vec<usize> = (0..set.len())
                .filter(|&a| {
                    remaining[a] && class.iter().any(|&i| sub.contains(i, set[a].coords()))
                })
                .collect();
            (hit.iter().map(|&a| masses[a]).sum(), hit)
        };
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        for c in 1..=coloring.q {
            let class = coloring.class(c);
            let (mass, hit) = captured_by(&class);
            if best.as_ref().is_none_or(|(m, _, _)| mass > *m) {
                best = Some((mass, class, hit));
            }
        }
        let (captured, class, hit) = best.expect("coloring has at least one class");
        for a in hit {
            remaining[a] = false;
        }
        let mut round_kept: Vec<usize> = class.iter().map(|&i| admissible[i]).collect();
        round_kept.sort_unstable();
        kept.extend(&round_kept);
        rounds.push(ExtractionRound {
            kept: round_kept,
            q: coloring.q,
            captured,
            residual: residual_of(&remaining),
        });
    }

    let stranded = (0..set.len())
        .filter(|&a| remaining[a] && masses[a] > 0.0)
        .collect();
    Ok(ExtractionTrace {
        policy,
        initial_mass,
        rounds,
        q: q_max,
        u: 1.0 - 1.0 / (4.0 * q_max as f64),
        stranded,
    })
}

/// Replays the disjointness of every kept ball across all rounds.
pub fn verify_extraction(family: &BallFamily, trace: &ExtractionTrace, strict: f64) -> bool {
    let kept = trace.kept();
    kept.iter().all(|&i| i < family.len())
        && kept.iter().enumerate().all(|(a, &i)| {
            kept[a + 1..]
                .iter()
                .all(|&j| i != j && family.disjoint(i, j, strict))
        })
}
