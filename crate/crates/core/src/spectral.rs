//! Fourier–Hermite matrices of the decoding characters, Schatten-norm
//! certificates and the trace-norm bound chain for 2-bounded simple codes.
//!
//! Logarithms are natural throughout.

use std::f64::consts::E;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{simple_alpha, verify, CodeConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::rng;

fn check_direction(code: &CodeConfig, i: usize) -> Result<()> {
    if i >= code.d() {
        return Err(Error::DirectionOutOfRange { direction: i, d: code.d() });
    }
    Ok(())
}

/// `i F̂(e_i)`, the real antisymmetric matrix with entries
/// `(v_s - v_t)_i exp(-||v_s - v_t||^2 / 2)`. It has the singular values
/// of `F̂(e_i)`.
pub fn fourier_matrix_real(code: &CodeConfig, i: usize) -> Result<DMatrix<f64>> {
    check_direction(code, i)?;
    let n = code.n();
    let mut m = DMatrix::zeros(n, n);
    for s in 0..n {
        for t in s + 1..n {
            let delta = linalg::sub(code.point(s), code.point(t));
            let r2 = linalg::dot(&delta, &delta);
            let v = delta[i] * (-r2 / 2.0).exp();
            m[(s, t)] = v;
            m[(t, s)] = -v;
        }
    }
    Ok(m)
}

/// `F̂(e_i) = E[x_i F(x)]`, entrywise `-i (v_s - v_t)_i exp(-||v_s - v_t||^2 / 2)`.
pub fn fourier_matrix(code: &CodeConfig, i: usize) -> Result<ComplexMatrix> {
    Ok(fourier_matrix_real(code, i)?.map(|v| Complex64::new(0.0, -v)))
}

/// `F(x)_{s,t} = exp(-i <x, v_s - v_t>)`.
pub fn character_matrix(code: &CodeConfig, x: &[f64]) -> Result<ComplexMatrix> {
    if x.len() != code.d() {
        return Err(Error::InvalidParameter(format!(
            "evaluation point has length {}, expected {}",
            x.len(),
            code.d()
        )));
    }
    let phase: Vec<Complex64> = code
        .points()
        .iter()
        .map(|v| Complex64::from_polar(1.0, -linalg::dot(x, v)))
        .collect();
    let n = code.n();
    Ok(ComplexMatrix::from_fn(n, n, |s, t| phase[s] * phase[t].conj()))
}

pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(linalg::complex_singular_values(a)?.iter().sum())
}

pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(linalg::complex_singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn real_trace_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(linalg::real_singular_values(a)?.iter().sum())
}

/// `<A, X> = sum_{s,t} A_{s,t} X_{s,t}`.
pub fn pairing(a: &ComplexMatrix, x: &ComplexMatrix) -> Complex64 {
    a.iter().zip(x.iter()).map(|(p, q)| p * q).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessBound {
    pub direction: usize,
    pub pairs: usize,
    pub alpha: f64,
    /// `<F̂(e_i), X>` for the phase witness `X`.
    pub witness_value: f64,
    pub witness_spectral_norm: f64,
    pub trace_norm: f64,
    /// `(alpha / e) |M_i|`.
    pub target: f64,
    /// Smallest `|F̂_{s,t}|` over matched pairs.
    pub min_entry: Option<f64>,
    /// `alpha min_{r in [1, c]} r exp(-r^2/2)`, the per-entry guarantee for
    /// a simple `c`-bounded code. It reaches `alpha / e` only while
    /// `c <~ 1.77`.
    pub entry_bound: f64,
    pub certified: bool,
}

const CERT_TOL: f64 = 1e-9;

/// Lower-bounds `||F̂(e_i)||_{S1}` through the dual witness carrying unit
/// phases conjugate to `F̂` on both `(s,t)` and `(t,s)` of every matched
/// pair. Disjointness of the matching makes `||X||_{S∞} = 1`.
pub fn matching_witness_bound(code: &CodeConfig, i: usize, alpha: f64) -> Result<WitnessBound> {
    check_direction(code, i)?;
    code.require_pairs()?;
    let pairs = code.matching(i);
    let mut c = 1.0f64;
    for t in pairs {
        let (a, b) = (t.indices()[0], t.indices()[1]);
        let diff = linalg::sub(code.point(b), code.point(a));
        let len = linalg::norm(&diff);
        if !(1.0 - CERT_TOL..=2.0 + CERT_TOL).contains(&len) {
            return Err(Error::Precondition(format!(
                "pair ({a}, {b}) in direction {i} has length {len}, outside [1, 2]"
            )));
        }
        if crate::code::weight(&diff, i)? < alpha - CERT_TOL {
            return Err(Error::Precondition(format!(
                "pair ({a}, {b}) in direction {i} is not simple at alpha = {alpha}"
            )));
        }
        c = c.max(len);
    }
    let f = fourier_matrix(code, i)?;
    let n = code.n();
    let mut x = ComplexMatrix::zeros(n, n);
    let mut min_entry: Option<f64> = None;
    for t in pairs {
        let (a, b) = (t.indices()[0], t.indices()[1]);
        for (s, u) in [(a, b), (b, a)] {
            let entry = f[(s, u)];
            let mag = entry.norm();
            if mag > 0.0 {
                x[(s, u)] = entry.conj() / mag;
            }
            min_entry = Some(min_entry.map_or(mag, |m| m.min(mag)));
        }
    }
    let witness_value = pairing(&f, &x).re;
    let witness_spectral_norm = spectral_norm(&x)?;
    let trace = trace_norm(&f)?;
    let target = alpha / E * pairs.len() as f64;
    let entry_bound = alpha * (1.0f64 * (-0.5f64).exp()).min(c * (-c * c / 2.0).exp());
    let certified = witness_spectral_norm <= 1.0 + CERT_TOL
        && trace >= witness_value - CERT_TOL
        && witness_value >= target - CERT_TOL;
    Ok(WitnessBound {
        direction: i,
        pairs: pairs.len(),
        alpha,
        witness_value,
        witness_spectral_norm,
        trace_norm: trace,
        target,
        min_entry,
        entry_bound,
        certified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub d: usize,
    pub alpha: Option<f64>,
    pub delta: f64,
    pub trace_norms: Vec<f64>,
    /// `(alpha / e) |M_i|` per direction.
    pub witness_targets: Vec<f64>,
    pub lhs: f64,
    /// `2 ln(2 e n) n^2`.
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    /// `(alpha / e)^2 sum_i |M_i|^2`, below `lhs` whenever every witness certifies.
    pub witness_lhs: Option<f64>,
    /// `alpha^2 delta^2 d / (2 e^2)`.
    pub exponent: Option<f64>,
    /// `exp(exponent) / (2e)`, from `alpha delta sqrt(d) n / e <= sqrt(2 ln(2en)) n`.
    pub implied_bound: Option<f64>,
}

/// Lower bound on `n` for a 2-bounded simple code at `(alpha, delta)`.
pub fn simple_code_bound(alpha: f64, delta: f64, d: usize) -> (f64, f64) {
    let exponent = alpha * alpha * delta * delta * d as f64 / (2.0 * E * E);
    (exponent, exponent.exp() / (2.0 * E))
}

/// Both sides of `sum_i ||F̂(e_i)||_{S1}^2 <= 2 ln(2en) n^2`, the latter from
/// `||F(x)||_{S1} = n`. `alpha` defaults to the code's simple alpha.
pub fn trace_inequality_check(code: &CodeConfig, alpha: Option<f64>) -> Result<SpectralReport> {
    code.require_pairs()?;
    let n = code.n();
    let d = code.d();
    let trace_norms = (0..d)
        .into_par_iter()
        .map(|i| real_trace_norm(&fourier_matrix_real(code, i)?))
        .collect::<Result<Vec<f64>>>()?;
    let lhs: f64 = trace_norms.iter().map(|t| t * t).sum();
    let nf = n as f64;
    let rhs = 2.0 * (2.0 * E * nf).ln() * nf * nf;
    let alpha = match alpha {
        Some(a) => Some(a),
        None => simple_alpha(code)?,
    };
    let delta = code.density();
    let sizes: Vec<f64> = code.matchings().iter().map(|m| m.tuples.len() as f64).collect();
    let witness_targets = sizes
        .iter()
        .map(|&m| alpha.map_or(0.0, |a| a / E * m))
        .collect();
    let witness_lhs = alpha.map(|a| (a / E).powi(2) * sizes.iter().map(|m| m * m).sum::<f64>());
    let bound = alpha.map(|a| simple_code_bound(a, delta, d));
    Ok(SpectralReport {
        n,
        d,
        alpha,
        delta,
        trace_norms,
        witness_targets,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
        slack: rhs - lhs,
        witness_lhs,
        exponent: bound.map(|b| b.0),
        implied_bound: bound.map(|b| b.1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NckReport {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub estimate: f64,
    pub standard_error: f64,
    /// `2 ln(2en) ||sum_i A_i^2||_{S∞}`.
    pub bound: f64,
    pub holds: bool,
}

const HERMITIAN_TOL: f64 = 1e-10;

fn hermitian_spectral_norm(m: &ComplexMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Monte Carlo estimate of `E ||sum_i x_i A_i||_{S∞}^2` for standard
/// Gaussian `x`, against the non-commutative Khintchine bound. Sample `s`
/// draws from seed `derive(seed, s)`.
pub fn nck_montecarlo(matrices: &[ComplexMatrix], samples: usize, seed: u64) -> Result<NckReport> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one matrix".into()))?;
    let n = first.nrows();
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    for (k, a) in matrices.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidParameter(format!("matrix {k} is not {n}x{n}")));
        }
        if (a - a.adjoint()).norm() > HERMITIAN_TOL {
            return Err(Error::Precondition(format!("matrix {k} is not Hermitian")));
        }
    }
    let squares = matrices
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, a| acc + a * a);
    let nf = n as f64;
    let bound = 2.0 * (2.0 * E * nf).ln() * hermitian_spectral_norm(&squares);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::stream(rng::derive(seed, s as u64), 0);
            let mut sum = ComplexMatrix::zeros(n, n);
            for a in matrices {
                let x: f64 = rng.sample(StandardNormal);
                sum += a * Complex64::new(x, 0.0);
            }
            hermitian_spectral_norm(&sum).powi(2)
        })
        .collect();
    let m = samples as f64;
    let estimate = values.iter().sum::<f64>() / m;
    let standard_error = if samples > 1 {
        let var = values.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(NckReport {
        n,
        d: matrices.len(),
        samples,
        estimate,
        standard_error,
        bound,
        holds: estimate <= bound + 3.0 * standard_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneQueryBound {
    pub alpha: f64,
    pub delta: f64,
    pub d: usize,
    /// Present when checked against an actual code.
    pub achieved_alpha: Option<f64>,
    pub verifies: Option<bool>,
    /// `e / (alpha^2 delta)`; infinite when `delta = 0`.
    pub bound: f64,
    pub holds: bool,
}

/// `d <= e / (alpha^2 delta)` for a 1-query code with the given parameters.
pub fn one_query_bound(alpha: f64, delta: f64, d: usize) -> Result<OneQueryBound> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1] and delta in [0, 1], got {alpha}, {delta}"
        )));
    }
    let bound = if delta > 0.0 { E / (alpha * alpha * delta) } else { f64::INFINITY };
    Ok(OneQueryBound {
        alpha,
        delta,
        d,
        achieved_alpha: None,
        verifies: None,
        bound,
        holds: d as f64 <= bound,
    })
}

/// For a 1-query code: `d <= e / (alpha^2 delta)`.
pub fn one_query_bound_check(code: &CodeConfig, alpha: f64) -> Result<OneQueryBound> {
    if code.q() != 1 {
        return Err(Error::UnsupportedQueryCount { expected: 1, got: code.q() });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let report = verify(code, alpha);
    let mut out = one_query_bound(alpha, report.density, code.d())?;
    out.achieved_alpha = Some(report.achieved_alpha);
    out.verifies = Some(report.verified);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedCodeBound {
    pub alpha: f64,
    pub delta: f64,
    pub c: f64,
    pub d: usize,
    /// `max(1, ceil(log2 c))`.
    pub buckets: usize,
    /// `delta / buckets`.
    pub delta_prime: f64,
    pub exponent: f64,
    pub bound: f64,
}

/// `n >= exp(alpha^2 delta'^2 d / (2e^2)) / (2e)` with `delta' = delta / max(1, ceil(log2 c))`.
pub fn bounded_code_bound(alpha: f64, delta: f64, c: f64, d: usize) -> Result<BoundedCodeBound> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha and delta must lie in (0, 1], got {alpha}, {delta}"
        )));
    }
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::InvalidParameter(format!("c must be at least 1, got {c}")));
    }
    let buckets = (c.log2().ceil() as usize).max(1);
    let delta_prime = delta / buckets as f64;
    let (exponent, bound) = simple_code_bound(alpha, delta_prime, d);
    Ok(BoundedCodeBound {
        alpha,
        delta,
        c,
        d,
        buckets,
        delta_prime,
        exponent,
        bound,
    })
}
