//! Approximate locally decodable codes over the reals.
//!
//! A code is a multiset of points in `R^d` together with one `q`-matching per
//! coordinate direction. This crate builds such configurations, checks the
//! approximate decoding property exactly, runs the constructive reductions
//! (general to simple, `c`-bounded to 2-bounded), produces cut certificates
//! from random axis cuts and from randomly shifted tilings, evaluates the
//! trace-norm machinery built from Gaussian Fourier coefficients, and runs the
//! rank/sampling experiment for `q`-query codes. Every length lower bound is
//! exposed with its explicit constant chain.

pub mod code;
pub mod constructions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod partition;
pub mod qquery;
pub mod reduction;
pub mod rng;
pub mod spectral;
pub mod tiling;

pub use code::{
    boundedness, is_simple, span_weight, verify, weight, CodeConfig, DirectionMatching, RealVec,
    SpanWeight, Tuple, VerificationReport,
};
pub use error::{Error, Result};
