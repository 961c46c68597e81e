//! Exhaustive grid oracle for Besicovitch families on the line and the plane.
//!
//! Works with tight families (witness at the origin, `r_i = |x_i|`), where the
//! constraints become `|x_i - x_j| > max(|x_i|, |x_j|)`. The largest center is
//! normalised to `e_1` (scale and rotation/reflection invariance); the others
//! range over a polar grid. A depth-first clique search over the pairwise
//! compatibility graph then decides whether `k` centers fit.

use super::{polish_radii, validate_config, BesicovitchConfig};
use crate::error::{Error, Result};
use crate::metric::{MetricSpec, Point, DEFAULT_STRICT_MARGIN};

const MAX_NODES: u64 = 50_000_000;

#[derive(Clone, Debug)]
pub struct BruteForceVerdict {
    pub k: usize,
    pub resolution: usize,
    pub feasible: bool,
    /// A valid configuration when `feasible`.
    pub witness_config: Option<BesicovitchConfig>,
    pub candidates: usize,
    pub nodes: u64,
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn compatible(a: &[f64], b: &[f64]) -> bool {
    let d = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    d - norm(a).max(norm(b)) > DEFAULT_STRICT_MARGIN
}

fn grid(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    match dim {
        1 => {
            // magnitudes 8^{-a/res} in (1/8, 1], both signs
            for a in 0..=resolution {
                let m = 8f64.powf(-(a as f64) / resolution as f64);
                out.push(vec![m]);
                out.push(vec![-m]);
            }
        }
        _ => {
            let levels = (resolution / 12).max(2);
            for b in 0..resolution {
                let t = 2.0 * std::f64::consts::PI * b as f64 / resolution as f64;
                for a in 0..=levels {
                    let m = 4f64.powf(-(a as f64) / levels as f64);
                    out.push(vec![m * t.cos(), m * t.sin()]);
                }
            }
        }
    }
    out
}

struct Clique<'a> {
    adj: &'a [Vec<bool>],
    nodes: u64,
}

impl Clique<'_> {
    fn extend(&mut self, chosen: &mut Vec<usize>, cands: &[usize], need: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            return Err(Error::ResourceLimit { nodes: self.nodes });
        }
        if need == 0 {
            return Ok(true);
        }
        if cands.len() < need {
            return Ok(false);
        }
        for (pos, &c) in cands.iter().enumerate() {
            if cands.len() - pos < need {
                break;
            }
            let next: Vec<usize> = cands[pos + 1..]
                .iter()
                .copied()
                .filter(|&o| self.adj[c][o])
                .collect();
            chosen.push(c);
            if self.extend(chosen, &next, need - 1)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

/// Decides at the given grid resolution whether a Besicovitch family of `k`
/// balls exists for `Euclidean(1)` or `Euclidean(2)`.
pub fn brute_force_bound(
    spec: &MetricSpec,
    k: usize,
    resolution: usize,
) -> Result<BruteForceVerdict> {
    let dim = match spec {
        MetricSpec::Euclidean { n } if *n == 1 || *n == 2 => *n,
        other => {
            return Err(Error::UnsupportedSpec(format!(
                "brute force supports euclidean1/2 only, got {other}"
            )))
        }
    };
    if k == 0 || k > 7 {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..=7, got {k}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 2".into(),
        ));
    }
    let anchor = {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v
    };
    let pts = grid(dim, resolution);
    let adj: Vec<Vec<bool>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| compatible(a, b)).collect())
        .collect();
    let first: Vec<usize> = (0..pts.len())
        .filter(|&i| compatible(&anchor, &pts[i]))
        .collect();

    let mut search = Clique {
        adj: &adj,
        nodes: 0,
    };
    let mut chosen = Vec::new();
    let feasible = search.extend(&mut chosen, &first, k - 1)?;

    let witness_config = if feasible {
        let mut centers = vec![Point::new(anchor.clone())?];
        for &c in &chosen {
            centers.push(Point::new(pts[c].clone())?);
        }
        let radii = centers.iter().map(|c| norm(c.coords())).collect();
        let config = polish_radii(&BesicovitchConfig::new(
            spec.clone(),
            Point::origin(dim),
            centers,
            radii,
            None,
        )?);
        debug_assert!(validate_config(&config)? > 0.0);
        Some(config)
    } else {
        None
    };
    Ok(BruteForceVerdict {
        k,
        resolution,
        feasible,
        witness_config,
        candidates: pts.len(),
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_caps_at_two() {
        let e1 = MetricSpec::Euclidean { n: 1 };
        assert!(brute_force_bound(&e1, 2, 32).unwrap().feasible);
        for res in [4, 16, 64] {
            assert!(!brute_force_bound(&e1, 3, res).unwrap().feasible);
        }
    }

    #[test]
    fn plane_caps_at_five() {
        let e2 = MetricSpec::Euclidean { n: 2 };
        let v = brute_force_bound(&e2, 5, 60).unwrap();
        assert!(v.feasible);
        let cfg = v.witness_config.unwrap();
        assert_eq!(cfg.len(), 5);
        assert!(validate_config(&cfg).unwrap() > 0.0);
        for res in [12, 36, 72] {
            assert!(
                !brute_force_bound(&e2, 6, res).unwrap().feasible,
                "res {res}"
            );
        }
    }

    #[test]
    fn rejects_other_specs() {
        assert!(matches!(
            brute_force_bound(&MetricSpec::Koranyi, 3, 10),
            Err(Error::UnsupportedSpec(_))
        ));
        assert!(brute_force_bound(&MetricSpec::Euclidean { n: 2 }, 8, 10).is_err());
    }
}
