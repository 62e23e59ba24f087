mod common;

use std::f64::consts::E;

use aldc::code::simple_alpha;
use aldc::constructions::{hypercube, perturbed_hypercube, random_simple_code};
use aldc::io::{parse, read_code, render, write_code};
use aldc::linalg::ComplexMatrix;
use aldc::partition::{general_bound, recursive_cut_certificate};
use aldc::qquery::{coverage_experiment, subset_direction_count};
use aldc::reduction::{bucket_to_2bounded, reduce_to_simple};
use aldc::spectral::{matching_witness_bound, nck_montecarlo, trace_inequality_check};
use aldc::tiling::large_alpha_certificate;
use aldc::{boundedness, is_simple, verify};
use common::*;
use num_complex::Complex64;

#[test]
fn file_round_trip_through_disk() {
    let dir = std::env::temp_dir().join(format!("aldc-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let code = perturbed_hypercube(3, 0.1, 1).unwrap();
    let written = write_code(&code, &dir.join("cube3")).unwrap();
    assert!(written.to_string_lossy().ends_with(".aldc.json"));
    assert_eq!(read_code(&dir.join("cube3")).unwrap(), code);
    assert_eq!(read_code(&written).unwrap(), code);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn general_code_to_certified_spectral_bound() {
    let code = scaled_subcube_code(12, 6, 0.05, 0.6, 21);
    let r = verify(&code, 0.6);
    assert!(r.verified);
    assert!(!is_simple(&code, 0.6).unwrap());

    let (simple, trace) = reduce_to_simple(&code, 0.6, None).unwrap();
    assert!(simple.total_tuples() > 0);
    assert!(is_simple(&simple, trace.alpha_out - 1e-9).unwrap());
    let (bounded, bt) = bucket_to_2bounded(&simple).unwrap();
    let (lo, hi) = boundedness(&bounded).unwrap();
    assert!((lo - 1.0).abs() < 1e-12 && hi <= 2.0 + 1e-12);
    assert!(bounded.total_tuples() * bt.buckets >= simple.total_tuples());

    let alpha = simple_alpha(&bounded).unwrap().unwrap();
    for i in 0..bounded.d() {
        assert!(matching_witness_bound(&bounded, i, alpha).unwrap().certified);
    }
    let rep = trace_inequality_check(&bounded, None).unwrap();
    assert!(rep.holds);
    assert!(rep.witness_lhs.unwrap() <= rep.lhs);
}

#[test]
fn perturbed_hypercube_certificates() {
    let code = perturbed_hypercube(6, 0.05, 3).unwrap();
    let cert = recursive_cut_certificate(&code, None, None, 3).unwrap();
    assert!(cert.verified);
    assert_eq!(cert.total_edges, 6 * 32);
    let alpha = simple_alpha(&code).unwrap().unwrap();
    let b = general_bound(alpha, code.density(), 6, true);
    assert!(b.bound <= code.n() as f64);
}

#[test]
fn stretched_cube_large_alpha_certificate() {
    let code = stretched_cube(&[1.0, 1.0, 1.0, 1.0], 0.0, 0);
    let r = large_alpha_certificate(&code, Some(1.0), 0.01, 500, None, 20, 7).unwrap();
    assert!(r.probability_bound > 0.0, "{}", r.probability_bound);
    assert!(r.fraction_met && r.verified);
    let cert = r.certificate.as_ref().unwrap();
    assert_eq!(cert.total_edges, r.good_edges);
    assert!(cert.total_edges as f64 <= cert.edge_bound + 1e-9);
    // the certificate's own density bound can never exceed the true size
    assert!(r.implied_bound <= code.n() as f64 + 1e-9);
}

#[test]
fn good_fraction_meets_probability_bound_on_average() {
    let code = stretched_cube(&[1.0, 1.0], 0.0, 0);
    let mut total = 0.0;
    let trials = 1000;
    let mut p = 0.0;
    for s in 0..trials {
        let r = large_alpha_certificate(&code, Some(1.0), 0.01, 500, None, 1, s).unwrap();
        total += r.best_fraction;
        p = r.probability_bound;
    }
    assert!(p > 0.0);
    assert!(total / trials as f64 >= p, "{} < {p}", total / trials as f64);
}

/// P(an m-subset of n points contains one of `pairs` disjoint pairs), by
/// inclusion-exclusion.
fn cover_probability(n: usize, pairs: usize, m: usize) -> f64 {
    let ln_choose = |a: usize, b: usize| -> f64 {
        if b > a {
            return f64::NEG_INFINITY;
        }
        (1..=b).map(|k| ((a - b + k) as f64).ln() - (k as f64).ln()).sum()
    };
    let mut none = 0.0;
    for j in 0..=pairs.min(m / 2) {
        let term = (ln_choose(pairs, j) + ln_choose(n - 2 * j, m - 2 * j) - ln_choose(n, m)).exp();
        none += if j % 2 == 0 { term } else { -term };
    }
    1.0 - none
}

#[test]
fn subset_coverage_matches_exact_expectation() {
    let cube = hypercube(6).unwrap();
    let trials = 1000;
    let mut means = Vec::new();
    for m in [8, 16, 32, 48] {
        let counts: Vec<f64> = (0..trials)
            .map(|s| subset_direction_count(&cube, m, s).unwrap() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt().max(1e-9);
        let exact = 6.0 * cover_probability(64, 32, m);
        assert!((mean - exact).abs() <= 4.0 * se + 1e-6, "m = {m}: {mean} vs {exact}");
        means.push(mean);
    }
    assert!(means.windows(2).all(|w| w[1] >= w[0]));
    let exp = coverage_experiment(&cube, 16, 1.0, 200, 5).unwrap();
    assert!(exp.all_hold);
}

#[test]
fn diagonal_khintchine_matches_gaussian_maximum() {
    for n in [8usize, 32] {
        let mats: Vec<ComplexMatrix> = (0..n)
            .map(|i| {
                let mut m = ComplexMatrix::zeros(n, n);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                m
            })
            .collect();
        let r = nck_montecarlo(&mats, 20_000, n as u64).unwrap();
        // E max of n chi-square(1) variables, by direct sampling
        let mut g = rng(99);
        let direct: f64 = (0..20_000)
            .map(|_| gaussian(&mut g, n).iter().map(|x| x * x).fold(0.0, f64::max))
            .sum::<f64>()
            / 20_000.0;
        assert!((r.estimate - direct).abs() < 0.1 * direct, "{} vs {direct}", r.estimate);
        assert!(r.holds);
        assert!((r.bound - 2.0 * (2.0 * E * n as f64).ln()).abs() < 1e-12);
    }
}

#[test]
fn simple_random_codes_survive_io_and_certify() {
    for seed in 0..5 {
        let code = random_simple_code(8, 40, 0.45, seed).unwrap();
        let back = parse(&render(&code)).unwrap();
        let a = recursive_cut_certificate(&code, None, None, seed).unwrap();
        let b = recursive_cut_certificate(&back, None, None, seed).unwrap();
        assert_eq!(a, b);
        assert!(a.verified);
    }
}
