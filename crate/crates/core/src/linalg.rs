//! Small dense helpers: vector arithmetic, rank-revealing orthonormalization
//! and singular values (backed by `nalgebra`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative threshold below which a residual column is considered dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

const SVD_MAX_ITERATIONS: usize = 10_000;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt with column
/// pivoting and one reorthogonalization pass.
///
/// A residual is dropped once its norm falls below
/// `RANK_TOLERANCE * max_j ||vectors[j]||`. Returns an empty basis when every
/// input is zero.
pub fn orthonormal_basis(vectors: &[&[f64]]) -> Vec<Vec<f64>> {
    let max_norm = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let threshold = RANK_TOLERANCE * max_norm;
    let mut residual: Vec<Vec<f64>> = vectors.iter().map(|v| v.to_vec()).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();

    while !residual.is_empty() {
        let (pivot, pivot_norm) = residual
            .iter()
            .enumerate()
            .map(|(j, r)| (j, norm(r)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_norm <= threshold {
            break;
        }
        let mut q = residual.swap_remove(pivot);
        // second pass cleans up cancellation from the first
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&q, b);
                q.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let qn = norm(&q);
        if qn <= threshold {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= qn);
        for r in residual.iter_mut() {
            let c = dot(r, &q);
            r.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
        }
        basis.push(q);
    }
    basis
}

/// Orthogonal projection of the standard basis vector `e_i` onto the span of
/// an orthonormal `basis`.
pub fn project_basis_vector(basis: &[Vec<f64>], i: usize, dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; dim];
    for b in basis {
        let c = b[i];
        p.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
    }
    p
}

pub fn real_singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdNonConvergence)?;
    Ok(sorted_desc(svd.singular_values))
}

pub fn complex_singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdNonConvergence)?;
    Ok(sorted_desc(svd.singular_values))
}

fn sorted_desc(v: DVector<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values below `max(rows, cols) * eps * sigma_max` count as zero.
pub fn rank_threshold(singular_values: &[f64], rows: usize, cols: usize) -> f64 {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    rows.max(cols) as f64 * f64::EPSILON * smax
}

pub fn numerical_rank(singular_values: &[f64], rows: usize, cols: usize) -> usize {
    let tol = rank_threshold(singular_values, rows, cols);
    singular_values.iter().filter(|&&s| s > tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_of_dependent_columns_has_rank_one() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 4.0, 6.0];
        let basis = orthonormal_basis(&[&a, &b]);
        assert_eq!(basis.len(), 1);
        assert!((norm(&basis[0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_of_zero_vectors_is_empty() {
        let z = [0.0; 4];
        assert!(orthonormal_basis(&[&z, &z]).is_empty());
    }

    #[test]
    fn basis_is_orthonormal() {
        let a = [1.0, 1.0, 0.0, 2.0];
        let b = [1.0, 0.0, 1.0, -1.0];
        let c = [0.5, 3.0, 1.0, 0.0];
        let basis = orthonormal_basis(&[&a, &b, &c]);
        assert_eq!(basis.len(), 3);
        for (x, u) in basis.iter().enumerate() {
            for (y, w) in basis.iter().enumerate() {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((dot(u, w) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_singular_values() {
        let m = DMatrix::<f64>::identity(5, 5);
        let s = real_singular_values(&m).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-14));
        assert_eq!(numerical_rank(&s, 5, 5), 5);
    }
}
