//! Reference and randomized code generators.
//!
//! Randomized generators draw from [`crate::rng`]: point sampling uses stream
//! 0 of the given seed, so equal seeds give bitwise-equal codes.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::code::{span_weight_of, weight, CodeConfig, DirectionMatching, RealVec, Tuple};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

pub const MAX_HYPERCUBE_DIM: usize = 24;

/// The boolean cube `{0,1}^d`; `M_i` pairs the points differing only in
/// coordinate `i`. Point `j` has coordinate `c` equal to bit `c` of `j`.
pub fn hypercube(d: usize) -> Result<CodeConfig> {
    if d == 0 || d > MAX_HYPERCUBE_DIM {
        return Err(Error::InvalidParameter(format!(
            "hypercube dimension must lie in [1, {MAX_HYPERCUBE_DIM}], got {d}"
        )));
    }
    let n = 1usize << d;
    let points = (0..n)
        .map(|j| RealVec::new((0..d).map(|c| ((j >> c) & 1) as f64).collect()))
        .collect();
    let matchings = (0..d)
        .map(|i| {
            let bit = 1usize << i;
            let tuples = (0..n)
                .filter(|j| j & bit == 0)
                .map(|j| Tuple::pair(j, j | bit).expect("distinct"))
                .collect();
            DirectionMatching::new(i, tuples)
        })
        .collect();
    CodeConfig::new(d, 2, points, matchings)
}

/// `hypercube(d)` with i.i.d. `N(0, sigma^2)` noise on every coordinate.
pub fn perturbed_hypercube(d: usize, sigma: f64, seed: u64) -> Result<CodeConfig> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite and nonnegative, got {sigma}"
        )));
    }
    let cube = hypercube(d)?;
    let mut rng = rng::stream(seed, 0);
    let points = cube
        .points()
        .iter()
        .map(|p| {
            RealVec::new(
                p.iter()
                    .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
        })
        .collect();
    CodeConfig::new(d, 2, points, cube.matchings().to_vec())
}

/// `V = {e_1, ..., e_d}` with `M_i = {{i}}` (a 1-query code).
pub fn basis_code(d: usize) -> Result<CodeConfig> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let points = (0..d).map(|i| RealVec::basis(d, i)).collect();
    let matchings = (0..d)
        .map(|i| DirectionMatching::new(i, vec![Tuple::new(vec![i]).expect("singleton")]))
        .collect();
    CodeConfig::new(d, 1, points, matchings)
}

fn sphere_points(d: usize, n: usize, seed: u64) -> Vec<RealVec> {
    let mut rng = rng::stream(seed, 0);
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let len = linalg::norm(&v);
            if len > 0.0 {
                break RealVec::new(v.into_iter().map(|x| x / len).collect());
            }
        })
        .collect()
}

fn gaussian_points(d: usize, n: usize, seed: u64) -> Vec<RealVec> {
    let mut rng = rng::stream(seed, 0);
    (0..n)
        .map(|_| RealVec::new((0..d).map(|_| rng.sample(StandardNormal)).collect()))
        .collect()
}

/// Greedy lexicographic scan over the `q`-subsets of `0..n`, accepting a
/// tuple when it is disjoint from the accepted ones and `accept` holds.
fn greedy_matching(n: usize, q: usize, mut accept: impl FnMut(&[usize]) -> bool) -> Vec<Tuple> {
    let mut used = vec![false; n];
    let mut out = Vec::new();
    if q > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..q).collect();
    loop {
        if idx.iter().all(|&j| !used[j]) && accept(&idx) {
            idx.iter().for_each(|&j| used[j] = true);
            out.push(Tuple::new(idx.clone()).expect("strictly increasing"));
        }
        // next combination in lexicographic order
        let mut pos = q;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < n - q + pos {
                break;
            }
        }
        idx[pos] += 1;
        for p in pos + 1..q {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// `n` uniform points on the unit sphere; each `M_i` is filled greedily with
/// disjoint tuples whose span weight for `i` is at least `alpha_target`.
pub fn random_code(d: usize, n: usize, q: usize, alpha_target: f64, seed: u64) -> Result<CodeConfig> {
    if q == 0 || n < q || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "random_code needs d >= 1 and n >= q >= 1 (d={d}, n={n}, q={q})"
        )));
    }
    let points = sphere_points(d, n, seed);
    let matchings = (0..d)
        .map(|i| {
            let tuples = greedy_matching(n, q, |idx| {
                let vs: Vec<&[f64]> = idx.iter().map(|&j| &*points[j]).collect();
                let sw = span_weight_of(&vs, i);
                !sw.degenerate && sw.value >= alpha_target
            });
            DirectionMatching::new(i, tuples)
        })
        .collect();
    CodeConfig::new(d, q, points, matchings)
}

/// `n` standard Gaussian points; each `M_i` greedily collects disjoint pairs
/// whose raw difference has `weight_i >= alpha`. The result is simple at
/// `alpha` by construction.
pub fn random_simple_code(d: usize, n: usize, alpha: f64, seed: u64) -> Result<CodeConfig> {
    if d == 0 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "random_simple_code needs d >= 1 and n >= 2 (d={d}, n={n})"
        )));
    }
    let points = gaussian_points(d, n, seed);
    let matchings = (0..d)
        .map(|i| {
            let tuples = greedy_matching(n, 2, |idx| {
                let diff = linalg::sub(&points[idx[1]], &points[idx[0]]);
                weight(&diff, i).map(|w| w >= alpha).unwrap_or(false)
            });
            DirectionMatching::new(i, tuples)
        })
        .collect();
    CodeConfig::new(d, 2, points, matchings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{boundedness, is_simple, verify};

    #[test]
    fn hypercube_counts() {
        let c = hypercube(3).unwrap();
        assert_eq!(c.n(), 8);
        assert_eq!(c.total_tuples(), 12);
        assert_eq!(c.density(), 0.5);
        let c = hypercube(1).unwrap();
        assert_eq!((c.n(), c.total_tuples()), (2, 1));
        assert_eq!(c.density(), 0.5);
        assert_eq!(hypercube(8).unwrap().total_tuples(), 1024);
        assert!(hypercube(0).is_err());
        assert!(hypercube(25).is_err());
    }

    #[test]
    fn hypercube_is_simple_and_one_bounded() {
        for d in 1..=9 {
            let c = hypercube(d).unwrap();
            assert!(is_simple(&c, 1.0).unwrap());
            assert_eq!(boundedness(&c).unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn perturbed_hypercube_contract() {
        assert_eq!(perturbed_hypercube(5, 0.0, 3).unwrap(), hypercube(5).unwrap());
        let a = perturbed_hypercube(6, 0.05, 11).unwrap();
        let b = perturbed_hypercube(6, 0.05, 11).unwrap();
        assert_eq!(a, b);
        let bits = |c: &CodeConfig| -> Vec<u64> {
            c.points().iter().flat_map(|p| p.iter().map(|x| x.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        let r = verify(&a, 0.0);
        assert!(r.achieved_alpha > 0.0 && r.achieved_alpha < 1.0);
        assert!(perturbed_hypercube(3, -0.1, 0).is_err());
    }

    #[test]
    fn basis_code_contract() {
        let c = basis_code(4).unwrap();
        assert_eq!((c.n(), c.density()), (4, 0.25));
        let c = basis_code(1).unwrap();
        assert_eq!((c.n(), c.density()), (1, 1.0));
        for d in 1..10 {
            assert_eq!(verify(&basis_code(d).unwrap(), 1.0).achieved_alpha, 1.0);
        }
    }

    #[test]
    fn random_code_threshold_extremes() {
        let c = random_code(5, 11, 2, 0.0, 1).unwrap();
        for i in 0..5 {
            assert_eq!(c.matching(i).len(), 11 / 2);
        }
        let c = random_code(4, 9, 3, 0.0, 1).unwrap();
        assert!((0..4).all(|i| c.matching(i).len() == 3));
        let c = random_code(5, 12, 2, 1.0 + 1e-9, 1).unwrap();
        assert_eq!(c.total_tuples(), 0);
    }

    #[test]
    fn random_code_meets_target() {
        let c = random_code(10, 100, 2, 0.3, 42).unwrap();
        assert!(c.total_tuples() > 0);
        assert!(verify(&c, 0.3).achieved_alpha >= 0.3);
        assert_eq!(c, random_code(10, 100, 2, 0.3, 42).unwrap());
    }

    #[test]
    fn random_simple_code_is_simple() {
        let c = random_simple_code(8, 60, 0.6, 5).unwrap();
        assert!(c.total_tuples() > 0);
        assert!(is_simple(&c, 0.6).unwrap());
    }

    #[test]
    fn greedy_is_lexicographic() {
        let got = greedy_matching(5, 2, |_| true);
        let want: Vec<Tuple> = vec![Tuple::pair(0, 1).unwrap(), Tuple::pair(2, 3).unwrap()];
        assert_eq!(got, want);
        let got = greedy_matching(5, 2, |t| t[0] + t[1] == 4);
        assert_eq!(got, vec![Tuple::pair(0, 4).unwrap(), Tuple::pair(1, 3).unwrap()]);
    }
}
