//! Rank argument for `q`-query codes, the covered-direction sampling
//! experiment and the resulting length bound.

use nalgebra::DMatrix;
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{span_weight, CodeConfig, Tuple};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

const UNIT_TOL: f64 = 1e-10;
const CHAIN_TOL: f64 = 1e-6;

/// Directions with at least one tuple lying entirely inside `subset`.
pub fn covered_directions(code: &CodeConfig, subset: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; code.n()];
    subset.iter().for_each(|&j| inside[j] = true);
    (0..code.d())
        .filter(|&i| {
            code.matching(i)
                .iter()
                .any(|t| t.indices().iter().all(|&j| inside[j]))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessMatrix {
    pub alpha: f64,
    /// Covered directions `i_1 < ... < i_k`.
    pub directions: Vec<usize>,
    /// Tuple used for each direction (largest span weight inside the subset).
    pub tuples: Vec<Tuple>,
    /// Full unit rows `u_m` in `R^d`.
    pub rows: Vec<Vec<f64>>,
    /// `k x k` restriction `U_{m,l} = (u_m)_{i_l}`, row-major.
    pub matrix: Vec<Vec<f64>>,
}

impl WitnessMatrix {
    pub fn k(&self) -> usize {
        self.directions.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let k = self.k();
        DMatrix::from_fn(k, k, |r, c| self.matrix[r][c])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.k()).map(|m| self.matrix[m][m]).collect()
    }

    /// Rows unit within `1e-10`, diagonal at least `alpha - 1e-10`.
    pub fn validate(&self) -> Result<()> {
        for (m, (row, &i)) in self.rows.iter().zip(&self.directions).enumerate() {
            if (linalg::norm(row) - 1.0).abs() > UNIT_TOL {
                return Err(Error::Precondition(format!("witness row {m} is not a unit vector")));
            }
            if row[i] < self.alpha - UNIT_TOL {
                return Err(Error::Precondition(format!(
                    "witness row {m} has coordinate {} < alpha = {} in direction {i}",
                    row[i], self.alpha
                )));
            }
        }
        Ok(())
    }
}

/// One unit vector per covered direction: the normalized projection of
/// `e_i` onto the span of a covered tuple, whose `i`-th coordinate equals
/// the span weight.
pub fn witness_matrix(code: &CodeConfig, subset: &[usize], alpha: f64) -> Result<WitnessMatrix> {
    if let Some(&j) = subset.iter().find(|&&j| j >= code.n()) {
        return Err(Error::InvalidParameter(format!("subset index {j} out of range for n = {}", code.n())));
    }
    let directions = covered_directions(code, subset);
    if directions.is_empty() {
        return Err(Error::EmptyWitness);
    }
    let mut inside = vec![false; code.n()];
    subset.iter().for_each(|&j| inside[j] = true);
    let d = code.d();
    let mut tuples = Vec::new();
    let mut rows = Vec::new();
    for &i in &directions {
        let best = code
            .matching(i)
            .iter()
            .filter(|t| t.indices().iter().all(|&j| inside[j]))
            .map(|t| (span_weight(code, t, i).value, t))
            .fold(None, |acc: Option<(f64, &Tuple)>, cur| match acc {
                Some(a) if a.0 >= cur.0 => Some(a),
                _ => Some(cur),
            })
            .expect("direction is covered");
        let vectors: Vec<&[f64]> = best.1.indices().iter().map(|&j| code.point(j)).collect();
        let basis = linalg::orthonormal_basis(&vectors);
        let p = linalg::project_basis_vector(&basis, i, d);
        let len = linalg::norm(&p);
        if len == 0.0 {
            return Err(Error::Precondition(format!("tuple for direction {i} spans nothing along e_{i}")));
        }
        rows.push(p.iter().map(|x| x / len).collect::<Vec<f64>>());
        tuples.push(best.1.clone());
    }
    let matrix = rows
        .iter()
        .map(|row| directions.iter().map(|&i| row[i]).collect())
        .collect();
    let w = WitnessMatrix {
        alpha,
        directions,
        tuples,
        rows,
        matrix,
    };
    w.validate()?;
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankCheck {
    pub k: usize,
    pub rank: usize,
    pub alpha: f64,
    /// `alpha^2 k`.
    pub required: f64,
    pub trace: f64,
    pub singular_sum: f64,
    pub frobenius_sq: f64,
    /// `tr(U)^2 <= (sum sigma)^2 <= r ||U||_F^2 <= r k`, each within `1e-6` relative.
    pub chain: [bool; 3],
    pub holds: bool,
}

fn le_rel(a: f64, b: f64) -> bool {
    a <= b + CHAIN_TOL * b.abs().max(1.0)
}

/// Numerical rank of `U` against `alpha^2 k`, with the trace chain
/// recomputed from the singular values.
pub fn rank_bound_check(u: &WitnessMatrix) -> Result<RankCheck> {
    u.validate()?;
    let k = u.k();
    let m = u.to_matrix();
    let sigma = linalg::real_singular_values(&m)?;
    let rank = linalg::numerical_rank(&sigma, k, k);
    let trace = m.trace();
    let singular_sum: f64 = sigma.iter().sum();
    let frobenius_sq = m.norm_squared();
    let r = rank as f64;
    let chain = [
        le_rel(trace * trace, singular_sum * singular_sum),
        le_rel(singular_sum * singular_sum, r * frobenius_sq),
        le_rel(r * frobenius_sq, r * k as f64),
    ];
    let required = u.alpha * u.alpha * k as f64;
    Ok(RankCheck {
        k,
        rank,
        alpha: u.alpha,
        required,
        trace,
        singular_sum,
        frobenius_sq,
        chain,
        holds: r >= required - 1e-9,
    })
}

/// Uniform `m`-subset of `0..n` drawn from `seed`.
pub fn sample_subset(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("sample size must lie in [1, {n}], got {m}")));
    }
    let mut rng = rng::stream(seed, 0);
    let mut s = index::sample(&mut rng, n, m).into_vec();
    s.sort_unstable();
    Ok(s)
}

/// Number of directions covered by a uniform `m`-subset.
pub fn subset_direction_count(code: &CodeConfig, m: usize, seed: u64) -> Result<usize> {
    let s = sample_subset(code.n(), m, seed)?;
    Ok(covered_directions(code, &s).len())
}

/// `ceil(delta^{-1/q} n^{(q-1)/q})`, clamped to `[1, n]`.
pub fn default_sample_size(delta: f64, n: usize, q: usize) -> usize {
    let q = q.max(1) as f64;
    let m = (delta.powf(-1.0 / q) * (n as f64).powf((q - 1.0) / q)).ceil();
    if m.is_finite() {
        (m as usize).clamp(1, n)
    } else {
        n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageTrial {
    pub seed: u64,
    pub covered: usize,
    pub rank: Option<usize>,
    pub required: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageExperiment {
    pub m: usize,
    pub trials: Vec<CoverageTrial>,
    pub mean_covered: f64,
    pub all_hold: bool,
}

/// Repeated subset sampling with a rank check per trial. Trial `r` uses
/// seed `derive(seed, r)`.
pub fn coverage_experiment(code: &CodeConfig, m: usize, alpha: f64, trials: usize, seed: u64) -> Result<CoverageExperiment> {
    let trials = (0..trials)
        .into_par_iter()
        .map(|r| {
            let s = rng::derive(seed, r as u64);
            let subset = sample_subset(code.n(), m, s)?;
            match witness_matrix(code, &subset, alpha) {
                Ok(w) => {
                    let check = rank_bound_check(&w)?;
                    Ok(CoverageTrial {
                        seed: s,
                        covered: check.k,
                        rank: Some(check.rank),
                        required: Some(check.required),
                        holds: check.holds && check.rank <= m,
                    })
                }
                Err(Error::EmptyWitness) => Ok(CoverageTrial {
                    seed: s,
                    covered: 0,
                    rank: None,
                    required: None,
                    holds: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_covered = if trials.is_empty() {
        0.0
    } else {
        trials.iter().map(|t| t.covered as f64).sum::<f64>() / trials.len() as f64
    };
    let all_hold = trials.iter().all(|t| t.holds);
    Ok(CoverageExperiment {
        m,
        trials,
        mean_covered,
        all_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QQueryBound {
    pub alpha: f64,
    pub delta: f64,
    pub d: usize,
    pub q: usize,
    /// `alpha^2 delta^{1/q} d`.
    pub base: f64,
    /// `q / (q - 1)`.
    pub exponent: f64,
    pub bound: f64,
}

/// `n >= (alpha^2 delta^{1/q} d)^{q/(q-1)}` with constant 1.
pub fn qquery_bound(alpha: f64, delta: f64, d: usize, q: usize) -> Result<QQueryBound> {
    if q == 1 {
        return Err(Error::OneQueryRedirect);
    }
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 2".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha and delta must lie in (0, 1], got {alpha}, {delta}"
        )));
    }
    let qf = q as f64;
    let base = alpha * alpha * delta.powf(1.0 / qf) * d as f64;
    let exponent = qf / (qf - 1.0);
    Ok(QQueryBound {
        alpha,
        delta,
        d,
        q,
        base,
        exponent,
        bound: base.powf(exponent),
    })
}
