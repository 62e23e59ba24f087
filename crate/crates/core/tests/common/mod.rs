#![allow(dead_code)]

use aldc::code::{DirectionMatching, RealVec, Tuple};
use aldc::CodeConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Classical Gram-Schmidt on two vectors; `None` if both vanish.
fn two_basis(a: &[f64], b: &[f64]) -> Option<Vec<Vec<f64>>> {
    let nrm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (first, second) = if nrm(a) >= nrm(b) { (a, b) } else { (b, a) };
    let n1 = nrm(first);
    if n1 == 0.0 {
        return None;
    }
    let w1: Vec<f64> = first.iter().map(|x| x / n1).collect();
    let c: f64 = w1.iter().zip(second).map(|(x, y)| x * y).sum();
    let r: Vec<f64> = second.iter().zip(&w1).map(|(y, x)| y - c * x).collect();
    let nr = nrm(&r);
    if nr <= 1e-10 * n1 {
        return Some(vec![w1]);
    }
    Some(vec![w1, r.iter().map(|x| x / nr).collect()])
}

/// Max of `|u_i|` over unit `u = cos(t) w1 + sin(t) w2` in span{a, b},
/// scanning `steps` angles in `[0, pi)`.
pub fn angle_grid_span_weight(a: &[f64], b: &[f64], i: usize, steps: usize) -> f64 {
    let Some(basis) = two_basis(a, b) else {
        return 0.0;
    };
    if basis.len() == 1 {
        return basis[0][i].abs();
    }
    let (p, q) = (basis[0][i], basis[1][i]);
    (0..steps)
        .map(|s| {
            let t = std::f64::consts::PI * s as f64 / steps as f64;
            (p * t.cos() + q * t.sin()).abs()
        })
        .fold(0.0, f64::max)
}

pub struct MonteCarlo {
    pub mean: (f64, f64),
    pub se: (f64, f64),
}

/// Sample mean of `x_i exp(-i <x, delta>)` over standard Gaussian `x`,
/// split into real and imaginary parts.
pub fn gaussian_fourier_estimate(delta: &[f64], i: usize, samples: usize, seed: u64) -> MonteCarlo {
    let mut r = rng(seed);
    let (mut sr, mut si, mut qr, mut qi) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = gaussian(&mut r, delta.len());
        let phase: f64 = x.iter().zip(delta).map(|(a, b)| a * b).sum();
        let re = x[i] * phase.cos();
        let im = -x[i] * phase.sin();
        sr += re;
        si += im;
        qr += re * re;
        qi += im * im;
    }
    let m = samples as f64;
    let (mr, mi) = (sr / m, si / m);
    let se = |q: f64, mean: f64| ((q / m - mean * mean) * m / (m - 1.0) / m).sqrt();
    MonteCarlo {
        mean: (mr, mi),
        se: (se(qr, mr), se(qi, mi)),
    }
}

/// `{0,1}^m` on `m` random coordinates of `R^d`, perturbed by `sigma` noise
/// and with every point rescaled by a factor in `[0.5, 2]`. Scaling keeps
/// spans (so span weights stay high) but breaks simplicity. Tuples whose
/// span weight drops below `alpha` are dropped.
pub fn scaled_subcube_code(d: usize, m: usize, sigma: f64, alpha: f64, seed: u64) -> CodeConfig {
    let mut r = rng(seed);
    let mut coords: Vec<usize> = (0..d).collect();
    for k in 0..m {
        let j = r.random_range(k..d);
        coords.swap(k, j);
    }
    let coords = &coords[..m];
    let n = 1usize << m;
    let points: Vec<RealVec> = (0..n)
        .map(|z| {
            let mut v: Vec<f64> = gaussian(&mut r, d).into_iter().map(|g| sigma * g).collect();
            for (b, &c) in coords.iter().enumerate() {
                v[c] += ((z >> b) & 1) as f64;
            }
            let s: f64 = r.random_range(0.5..2.0);
            RealVec::new(v.into_iter().map(|x| s * x).collect())
        })
        .collect();
    let mut matchings = Vec::new();
    for (b, &c) in coords.iter().enumerate() {
        let mut tuples = Vec::new();
        for z in 0..n {
            if z & (1 << b) == 0 {
                let t = Tuple::pair(z, z | (1 << b)).unwrap();
                let vs: Vec<&[f64]> = t.indices().iter().map(|&j| points[j].as_slice()).collect();
                if aldc::code::span_weight_of(&vs, c).value >= alpha {
                    tuples.push(t);
                }
            }
        }
        matchings.push(DirectionMatching::new(c, tuples));
    }
    CodeConfig::new(d, 2, points, matchings).unwrap()
}

/// Axis-aligned grid code: `{0,1}^d` with axis `i` stretched by `scales[i]`,
/// so matched pairs along different axes fall on different length levels.
pub fn stretched_cube(scales: &[f64], jitter: f64, seed: u64) -> CodeConfig {
    let d = scales.len();
    let cube = aldc::constructions::hypercube(d).unwrap();
    let mut r = rng(seed);
    let points = cube
        .points()
        .iter()
        .map(|p| {
            RealVec::new(
                p.iter()
                    .zip(scales)
                    .map(|(x, s)| x * s + jitter * r.random_range(-1.0..1.0))
                    .collect(),
            )
        })
        .collect();
    CodeConfig::new(d, 2, points, cube.matchings().to_vec()).unwrap()
}

/// Edges of `edges` with exactly one endpoint in `side`.
pub fn recount_cut(edges: &[(usize, usize)], s1: &[usize], s2: &[usize]) -> usize {
    let in1: std::collections::HashSet<_> = s1.iter().collect();
    let in2: std::collections::HashSet<_> = s2.iter().collect();
    edges
        .iter()
        .filter(|(a, b)| (in1.contains(a) && in2.contains(b)) || (in1.contains(b) && in2.contains(a)))
        .count()
}

pub fn random_subset(r: &mut ChaCha8Rng, n: usize, min: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
        if s.len() >= min {
            return s;
        }
    }
}
