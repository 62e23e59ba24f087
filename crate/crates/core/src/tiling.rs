//! Randomized tilings of `R^d`, level bucketing of edge lengths, good-edge
//! classification and the deterministic tiled cut.
//!
//! Tilings are consumed through [`Rounding`], which exposes the integer cell
//! index of a point. The built-in [`CubeTiling`] is the axis-aligned grid of
//! spacing `g` under a uniformly random shift; it satisfies shift invariance
//! exactly and separates `x, y` with probability at most
//! `sum_i |x_i - y_i| / g <= sqrt(d) ||x - y|| / g`, i.e. tiling constant
//! `kappa = sqrt(d)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::code::{simple_alpha, CodeConfig, DirectionMatching};
use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::{assemble_cut, balanced_split, build_certificate, CodeGraph, Cut, CutCertificate, Edge};
use crate::rng;

pub type CellId = Vec<i64>;

/// A partition of `R^d` into cells indexed by `Z^d` with
/// `cell(x + g z) = cell(x) + z`.
pub trait Rounding: Send + Sync {
    fn grid(&self) -> f64;
    fn cell(&self, x: &[f64]) -> CellId;
    /// Representative point of the cell containing `x`.
    fn round(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeTiling {
    pub g: f64,
    /// Uniform in `[0, g)^d`.
    pub shift: Vec<f64>,
}

impl CubeTiling {
    pub fn new(g: f64, shift: Vec<f64>) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {g}")));
        }
        Ok(CubeTiling { g, shift })
    }
}

impl Rounding for CubeTiling {
    fn grid(&self) -> f64 {
        self.g
    }

    fn cell(&self, x: &[f64]) -> CellId {
        x.iter()
            .zip(&self.shift)
            .map(|(xi, bi)| ((xi - bi) / self.g).floor() as i64)
            .collect()
    }

    /// Cell centers; the corner `g floor((x - b)/g) + b` lies on a wall and
    /// does not round back to itself reliably in floating point.
    fn round(&self, x: &[f64]) -> Vec<f64> {
        self.cell(x)
            .iter()
            .zip(&self.shift)
            .map(|(&m, bi)| self.g * (m as f64 + 0.5) + bi)
            .collect()
    }
}

/// Cube tiling of spacing `g` with a uniform random shift.
pub fn cube_tiling(g: f64, d: usize, seed: u64) -> Result<CubeTiling> {
    let mut rng = rng::stream(seed, 0);
    let shift = (0..d).map(|_| rng.random::<f64>() * g).collect();
    CubeTiling::new(g, shift)
}

/// `(residue j, level k)` with `length in [(1+eps)^{kt+j}, (1+eps)^{kt+j+1})`.
pub fn edge_level(length: f64, eps: f64, t: usize) -> Result<(usize, i64)> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!("edge length must be positive, got {length}")));
    }
    check_eps_t(eps, t)?;
    let base = 1.0 + eps;
    let mut p = (length.ln() / base.ln()).floor() as i64;
    while base.powi((p + 1) as i32) <= length {
        p += 1;
    }
    while base.powi(p as i32) > length {
        p -= 1;
    }
    let t = t as i64;
    Ok((p.rem_euclid(t) as usize, p.div_euclid(t)))
}

fn check_eps_t(eps: f64, t: usize) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSchedule {
    pub alpha: f64,
    pub eps: f64,
    pub t: usize,
    /// Most populous residue class (ties to the smallest).
    pub residue: usize,
    pub residue_counts: Vec<usize>,
    pub k_min: i64,
    pub k_max: i64,
}

impl LevelSchedule {
    /// `g_k = (2 + eps)(1 + eps)^{kt + j*} / (2 alpha)`: the midpoint of the
    /// level's length interval divided by `alpha`.
    pub fn grid(&self, k: i64) -> f64 {
        let p = k * self.t as i64 + self.residue as i64;
        (2.0 + self.eps) * (1.0 + self.eps).powi(p as i32) / (2.0 * self.alpha)
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }
}

const MAX_LEVELS: i64 = 100_000;

/// Keeps the edges of the most populous residue class `I_{j*}`.
pub fn level_bucket(code: &CodeConfig, alpha: f64, eps: f64, t: usize) -> Result<(CodeConfig, LevelSchedule)> {
    code.require_pairs()?;
    check_eps_t(eps, t)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let mut levels = Vec::new();
    for (i, a, b) in code.pairs() {
        let len = linalg::norm(&linalg::sub(code.point(b), code.point(a)));
        if len == 0.0 {
            return Err(Error::DegeneratePair { direction: i, a, b });
        }
        levels.push(edge_level(len, eps, t)?);
    }
    if levels.is_empty() {
        return Err(Error::EmptyCode);
    }
    let mut counts = vec![0usize; t];
    levels.iter().for_each(|&(j, _)| counts[j] += 1);
    let residue = counts
        .iter()
        .enumerate()
        .fold(0, |best, (j, &c)| if c > counts[best] { j } else { best });

    let mut keep = levels.iter().map(|&(j, _)| j == residue);
    let matchings: Vec<DirectionMatching> = code
        .matchings()
        .iter()
        .map(|m| {
            let tuples = m.tuples.iter().filter(|_| keep.next().unwrap()).cloned().collect();
            DirectionMatching::new(m.direction, tuples)
        })
        .collect();
    let kept_levels: Vec<i64> = levels.iter().filter(|l| l.0 == residue).map(|l| l.1).collect();
    let k_min = *kept_levels.iter().min().expect("argmax class is nonempty");
    let k_max = *kept_levels.iter().max().expect("argmax class is nonempty");
    if k_max - k_min >= MAX_LEVELS {
        return Err(Error::InvalidParameter(format!(
            "edge lengths span {} levels; increase t or eps",
            k_max - k_min + 1
        )));
    }
    let out = CodeConfig::new(code.d(), 2, code.points().to_vec(), matchings)?;
    let schedule = LevelSchedule {
        alpha,
        eps,
        t,
        residue,
        residue_counts: counts,
        k_min,
        k_max,
    };
    Ok((out, schedule))
}

/// One tiling per level `k_min..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelTilings<T> {
    pub k_min: i64,
    pub tilings: Vec<T>,
}

impl<T: Rounding> LevelTilings<T> {
    pub fn get(&self, k: i64) -> Option<&T> {
        usize::try_from(k - self.k_min).ok().and_then(|o| self.tilings.get(o))
    }
}

/// Independent cube tilings with spacing `g_k`; level `k` draws from stream
/// `k - k_min` of `seed`.
pub fn sample_level_tilings(d: usize, schedule: &LevelSchedule, seed: u64) -> LevelTilings<CubeTiling> {
    let tilings = schedule
        .levels()
        .map(|k| {
            let mut rng = rng::stream(seed, (k - schedule.k_min) as u64);
            let g = schedule.grid(k);
            let shift = (0..d).map(|_| rng.random::<f64>() * g).collect();
            CubeTiling { g, shift }
        })
        .collect();
    LevelTilings {
        k_min: schedule.k_min,
        tilings,
    }
}

/// Edge oriented so that `<v_to - v_from, e_direction> > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrientedEdge {
    pub from: usize,
    pub to: usize,
    pub direction: usize,
    pub level: i64,
}

pub fn orient_edges(code: &CodeConfig, schedule: &LevelSchedule) -> Result<Vec<OrientedEdge>> {
    code.pairs()
        .map(|(i, a, b)| {
            let delta = code.point(b)[i] - code.point(a)[i];
            let (from, to) = if delta > 0.0 {
                (a, b)
            } else if delta < 0.0 {
                (b, a)
            } else {
                return Err(Error::Precondition(format!(
                    "pair ({a}, {b}) in direction {i} has no component along its direction"
                )));
            };
            let len = linalg::norm(&linalg::sub(code.point(b), code.point(a)));
            let (_, level) = edge_level(len, schedule.eps, schedule.t)?;
            Ok(OrientedEdge {
                from,
                to,
                direction: i,
                level,
            })
        })
        .collect()
}

/// Both good-edge properties for one oriented edge.
///
/// At its own level the cells must be axis neighbours,
/// `cell_k(v_to) = cell_k(v_from) + e_dir`, which equals
/// `cell_k(v_from + g_k e_dir) = cell_k(v_to)` by shift invariance; at every
/// higher level both ends must share a cell.
pub fn is_good<T: Rounding>(
    code: &CodeConfig,
    edge: &OrientedEdge,
    schedule: &LevelSchedule,
    tilings: &LevelTilings<T>,
) -> Result<bool> {
    let own = tilings
        .get(edge.level)
        .ok_or(Error::MissingTiling { level: edge.level })?;
    let mut expect = own.cell(code.point(edge.from));
    expect[edge.direction] += 1;
    if own.cell(code.point(edge.to)) != expect {
        return Ok(false);
    }
    for k in edge.level + 1..=schedule.k_max {
        let tiling = tilings.get(k).ok_or(Error::MissingTiling { level: k })?;
        if tiling.cell(code.point(edge.from)) != tiling.cell(code.point(edge.to)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub edges: Vec<OrientedEdge>,
    /// Indices into `edges` of the good ones.
    pub good: Vec<usize>,
}

impl Classification {
    pub fn fraction(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.good.len() as f64 / self.edges.len() as f64
        }
    }

    /// Multigraph of the good edges with their levels, in orientation order.
    pub fn good_graph(&self, n: usize) -> (CodeGraph, Vec<i64>) {
        let edges = self
            .good
            .iter()
            .map(|&e| {
                let oe = &self.edges[e];
                Edge {
                    a: oe.from,
                    b: oe.to,
                    direction: oe.direction,
                }
            })
            .collect();
        let levels = self.good.iter().map(|&e| self.edges[e].level).collect();
        (CodeGraph { n, edges }, levels)
    }
}

pub fn classify_good_edges<T: Rounding>(
    code: &CodeConfig,
    schedule: &LevelSchedule,
    tilings: &LevelTilings<T>,
) -> Result<Classification> {
    let edges = orient_edges(code, schedule)?;
    let mut good = Vec::new();
    for (e, oe) in edges.iter().enumerate() {
        if is_good(code, oe, schedule, tilings)? {
            good.push(e);
        }
    }
    Ok(Classification { edges, good })
}

/// Lower bound on the probability that an edge is good, with tiling constant
/// `kappa` (`2 pi` for the sphere-like tilings, `sqrt(d)` for cubes):
///
/// `1 - kappa sqrt(1 - a^2 + (a eps/(2+eps))^2) - 2 kappa a (1+eps) / ((2+eps)((1+eps)^t - 1))`.
///
/// Negative values are vacuous.
pub fn good_edge_probability_bound(alpha: f64, eps: f64, t: usize, kappa: f64) -> f64 {
    let near = (1.0 - alpha * alpha + (alpha * eps / (2.0 + eps)).powi(2)).max(0.0).sqrt();
    let far = 2.0 * alpha * (1.0 + eps) / ((2.0 + eps) * ((1.0 + eps).powi(t as i32) - 1.0));
    1.0 - kappa * (near + far)
}

/// Threshold `alpha_0 = sqrt(1 - 1/kappa^2)` above which the bound can be
/// made positive.
pub fn alpha_threshold(kappa: f64) -> f64 {
    (1.0 - 1.0 / (kappa * kappa)).max(0.0).sqrt()
}

/// Separation constant of the randomized tilings with spherical cells.
pub const SPHERE_KAPPA: f64 = 2.0 * PI;

/// Deterministic cut from a maximum-level good edge `e` (direction `i0`,
/// level `k`): `S1` holds the points whose level-`k` cell index along `i0`
/// is at most that of `v_from`. Every cut edge then has direction `i0`.
pub fn tiled_cut<T: Rounding>(
    good: &CodeGraph,
    levels: &[i64],
    tilings: &LevelTilings<T>,
    code: &CodeConfig,
    subset: &[usize],
) -> Result<Cut> {
    let mask = good.mask(subset);
    let internal = good.internal_edges(&mask);
    let mut top = None;
    for &e in &internal {
        if top.is_none_or(|b: usize| levels[e] > levels[b]) {
            top = Some(e);
        }
    }
    let Some(top) = top else {
        return Ok(balanced_split(good, subset));
    };
    let edge = good.edges[top];
    let k = levels[top];
    let tiling = tilings.get(k).ok_or(Error::MissingTiling { level: k })?;
    let i0 = edge.direction;
    let wall = tiling.cell(code.point(edge.a))[i0];
    Ok(assemble_cut(
        good,
        subset,
        |v| tiling.cell(code.point(v))[i0] <= wall,
        Some(i0),
        Some(tiling.grid() * (wall as f64 + 1.0)),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LargeAlphaBound {
    pub alpha: f64,
    pub delta: f64,
    pub d: usize,
    pub eps: f64,
    pub t: usize,
    pub kappa: f64,
    pub probability_bound: f64,
    /// `probability_bound * delta / t`: one residue class keeps `delta / t`,
    /// a fixed tiling family keeps a `probability_bound` share of it.
    pub delta_good: f64,
    /// `2 delta_good d`.
    pub exponent: f64,
    /// `2^exponent`; 1 when the probability bound is not positive.
    pub bound: f64,
    pub vacuous: bool,
}

/// `n >= 2^{2 p delta d / t}` for simple codes at `alpha > alpha_threshold(kappa)`,
/// where `p` is [`good_edge_probability_bound`].
pub fn large_alpha_bound(alpha: f64, delta: f64, d: usize, eps: f64, t: usize, kappa: f64) -> Result<LargeAlphaBound> {
    check_eps_t(eps, t)?;
    if !(alpha > 0.0 && alpha <= 1.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha and delta must lie in (0, 1], got {alpha}, {delta}"
        )));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let p = good_edge_probability_bound(alpha, eps, t, kappa);
    let vacuous = p <= 0.0;
    let delta_good = if vacuous { 0.0 } else { p * delta / t as f64 };
    let exponent = 2.0 * delta_good * d as f64;
    Ok(LargeAlphaBound {
        alpha,
        delta,
        d,
        eps,
        t,
        kappa,
        probability_bound: p,
        delta_good,
        exponent,
        bound: exponent.exp2(),
        vacuous,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LargeAlphaReport {
    pub alpha: f64,
    pub kappa: f64,
    pub schedule: LevelSchedule,
    pub probability_bound: f64,
    pub rounds: usize,
    pub fraction_met: bool,
    pub good_fraction: f64,
    pub best_fraction: f64,
    pub tiling_seed: Option<u64>,
    pub bucketed_edges: usize,
    pub good_edges: usize,
    pub delta_in: f64,
    pub delta_bucketed: f64,
    pub delta_good: f64,
    /// `max(probability_bound, 0) * delta_in / t`, the expected-density chain.
    pub delta_chain: f64,
    /// `2 delta_good d`, from `delta_good d n <= (1/2) n log2 n`.
    pub implied_exponent: f64,
    pub implied_bound: f64,
    pub certificate: Option<CutCertificate>,
    pub verified: bool,
}

/// Level bucketing, tiling resampling until the good fraction reaches the
/// probability bound, then a recursive certificate with `c = 1` built from
/// [`tiled_cut`].
#[allow(clippy::too_many_arguments)]
pub fn large_alpha_certificate(
    code: &CodeConfig,
    alpha: Option<f64>,
    eps: f64,
    t: usize,
    kappa: Option<f64>,
    retries: usize,
    seed: u64,
) -> Result<LargeAlphaReport> {
    let alpha = match alpha {
        Some(a) => a,
        None => simple_alpha(code)?.ok_or(Error::EmptyCode)?,
    };
    let d = code.d();
    let n = code.n();
    let kappa = kappa.unwrap_or((d as f64).sqrt());
    let (bucketed, schedule) = level_bucket(code, alpha, eps, t)?;
    let p = good_edge_probability_bound(alpha, eps, t, kappa);

    let mut best: Option<(f64, u64, Classification, LevelTilings<CubeTiling>)> = None;
    let mut rounds = 0;
    let mut met = false;
    for r in 0..retries.max(1) {
        rounds = r + 1;
        let round_seed = rng::derive(seed, r as u64);
        let tilings = sample_level_tilings(d, &schedule, round_seed);
        let cls = classify_good_edges(&bucketed, &schedule, &tilings)?;
        let f = cls.fraction();
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, round_seed, cls, tilings));
        }
        if f >= p {
            met = true;
            break;
        }
    }
    let (best_fraction, round_seed, cls, tilings) = best.expect("at least one round");
    let bucketed_edges = bucketed.total_tuples();
    let delta_in = code.density();
    let delta_bucketed = bucketed.density();

    let (certificate, good_edges) = if met {
        let (graph, levels) = cls.good_graph(n);
        let split = |subset: &[usize], _seed: u64| {
            tiled_cut(&graph, &levels, &tilings, &bucketed, subset).map_err(|e| {
                crate::partition::CutSearchFailure {
                    subset: subset.to_vec(),
                    internal_edges: 0,
                    samples: 0,
                    best_ratio: None,
                    reason: e.to_string(),
                }
            })
        };
        let cert = build_certificate(n, graph.edges.len(), 1.0, seed, &split);
        (Some(cert), graph.edges.len())
    } else {
        (None, cls.good.len())
    };
    let delta_good = good_edges as f64 / (d as f64 * n as f64);
    let implied_exponent = 2.0 * delta_good * d as f64;
    let verified = met && certificate.as_ref().is_some_and(|c| c.verified);
    Ok(LargeAlphaReport {
        alpha,
        kappa,
        schedule,
        probability_bound: p,
        rounds,
        fraction_met: met,
        good_fraction: if met { best_fraction } else { 0.0 },
        best_fraction,
        tiling_seed: met.then_some(round_seed),
        bucketed_edges,
        good_edges,
        delta_in,
        delta_bucketed,
        delta_good,
        delta_chain: p.max(0.0) * delta_in / t as f64,
        implied_exponent,
        implied_bound: implied_exponent.exp2(),
        certificate,
        verified,
    })
}
