//! Constructive reductions: general 2-query codes to simple codes, and
//! `c`-bounded simple codes to 2-bounded ones by dyadic length bucketing.

use serde::Serialize;

use crate::code::{verify, weight, CodeConfig, DirectionMatching, RealVec, Tuple};
use crate::error::{Error, Result};
use crate::linalg;

/// Coordinates of `v` ranked by `(|entry| desc, index asc)`; the first
/// `k - 1` of them are heavy.
pub fn heavy_coordinates(v: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    order.truncate(k.saturating_sub(1));
    order
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeavyRemoval {
    pub code: CodeConfig,
    pub removed: usize,
}

/// Drops every pair of `M_i` in which coordinate `i` is among the `k - 1`
/// largest-magnitude entries of either endpoint.
pub fn remove_heavy_pairs(code: &CodeConfig, k: usize) -> Result<HeavyRemoval> {
    code.require_pairs()?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let heavy: Vec<Vec<usize>> = code
        .points()
        .iter()
        .map(|p| heavy_coordinates(p, k))
        .collect();
    let mut removed = 0;
    let matchings = code
        .matchings()
        .iter()
        .map(|m| {
            let i = m.direction;
            let tuples: Vec<Tuple> = m
                .tuples
                .iter()
                .filter(|t| {
                    let drop = t.indices().iter().any(|&j| heavy[j].contains(&i));
                    removed += drop as usize;
                    !drop
                })
                .cloned()
                .collect();
            DirectionMatching::new(i, tuples)
        })
        .collect();
    let code = CodeConfig::new(code.d(), 2, code.points().to_vec(), matchings)?;
    Ok(HeavyRemoval { code, removed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignChoice {
    pub direction: usize,
    /// Endpoints as indices into the input code.
    pub pair: (usize, usize),
    /// `+1` keeps `{v1, v2}, {-v1, -v2}`; `-1` uses `{v1, -v2}, {-v1, v2}`.
    pub sign: i8,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub k: usize,
    pub default_k: bool,
    pub alpha_in: f64,
    pub delta_in: f64,
    pub n_in: usize,
    pub pairs_removed_step1: usize,
    pub removal_limit: usize,
    pub zero_points_discarded: usize,
    /// Pairs lost to zero points after step 1; zero whenever `alpha^2 k > 1`.
    pub pairs_dropped_zero: usize,
    pub sign_choices: Vec<SignChoice>,
    /// Guaranteed `sqrt(alpha^2 - 1/k)`.
    pub alpha_out: f64,
    /// Minimum oriented-difference weight actually achieved.
    pub alpha_achieved: Option<f64>,
    pub delta_out: f64,
    /// Guaranteed `delta - k/d` (may be negative, hence vacuous).
    pub delta_guarantee: f64,
    pub n_out: usize,
    pub warnings: Vec<String>,
}

/// Default `k = ceil(2 / alpha^2)`.
pub fn default_k(alpha: f64) -> usize {
    (2.0 / (alpha * alpha)).ceil() as usize
}

/// General 2-query code to simple code.
///
/// Steps: heavy-pair removal, normalization with zero-point discard,
/// symmetrization (`-v` added for every `v`), and per-pair sign orientation
/// picking `s` that maximizes `weight_i(v_{j1} - s v_{j2})`. The output is
/// simple at `sqrt(alpha^2 - 1/k)` with at most `2n` points.
pub fn reduce_to_simple(
    code: &CodeConfig,
    alpha: f64,
    k: Option<usize>,
) -> Result<(CodeConfig, ReductionTrace)> {
    code.require_pairs()?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let default = k.is_none();
    let k = k.unwrap_or_else(|| default_k(alpha));
    if (k as f64) * alpha * alpha <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must exceed 1/alpha^2 = {}",
            1.0 / (alpha * alpha)
        )));
    }
    let report = verify(code, alpha);
    if report.achieved_alpha < alpha - 1e-12 {
        return Err(Error::Precondition(format!(
            "code verifies only at alpha = {}, below the supplied {alpha}",
            report.achieved_alpha
        )));
    }
    let d = code.d();
    let n = code.n();
    let delta = code.density();
    let mut warnings = Vec::new();
    if default && (d as f64) < 6.0 / (alpha * alpha * delta) {
        warnings.push(format!(
            "d = {d} is below 6/(alpha^2 delta) = {:.3}; the alpha/sqrt(2), delta/2 guarantee needs it",
            6.0 / (alpha * alpha * delta)
        ));
    }

    // step 1
    let HeavyRemoval { code: pruned, removed } = remove_heavy_pairs(code, k)?;

    // step 2
    let mut new_index = vec![None; n];
    let mut unit: Vec<Vec<f64>> = Vec::new();
    for (j, p) in pruned.points().iter().enumerate() {
        let len = linalg::norm(p);
        if len > 0.0 {
            new_index[j] = Some(unit.len());
            unit.push(p.iter().map(|x| x / len).collect());
        }
    }
    let zero_points_discarded = n - unit.len();
    let m = unit.len();
    if m == 0 {
        return Err(Error::Precondition("every point is the zero vector".into()));
    }

    // step 3
    let mut points: Vec<RealVec> = unit.iter().cloned().map(RealVec::new).collect();
    points.extend(unit.iter().map(|v| RealVec::new(v.iter().map(|x| -x).collect())));

    let mut pairs_dropped_zero = 0;
    let mut sign_choices = Vec::new();
    let mut matchings = Vec::with_capacity(d);
    for mi in pruned.matchings() {
        let i = mi.direction;
        let mut tuples = Vec::with_capacity(2 * mi.tuples.len());
        for t in &mi.tuples {
            let (a, b) = (t.indices()[0], t.indices()[1]);
            let (Some(pa), Some(pb)) = (new_index[a], new_index[b]) else {
                pairs_dropped_zero += 1;
                continue;
            };
            let w_same = weight(&linalg::sub(&unit[pa], &unit[pb]), i).unwrap_or(0.0);
            let w_flip = weight(&linalg::add(&unit[pa], &unit[pb]), i).unwrap_or(0.0);
            let (sign, w) = if w_same >= w_flip { (1, w_same) } else { (-1, w_flip) };
            if sign == 1 {
                tuples.push(Tuple::pair(pa, pb).expect("distinct"));
                tuples.push(Tuple::pair(pa + m, pb + m).expect("distinct"));
            } else {
                tuples.push(Tuple::pair(pa, pb + m).expect("distinct"));
                tuples.push(Tuple::pair(pa + m, pb).expect("distinct"));
            }
            sign_choices.push(SignChoice {
                direction: i,
                pair: (a, b),
                sign,
                weight: w,
            });
        }
        matchings.push(DirectionMatching::new(i, tuples));
    }
    let out = CodeConfig::new(d, 2, points, matchings)?;
    let alpha_achieved = sign_choices.iter().map(|s| s.weight).reduce(f64::min);
    let trace = ReductionTrace {
        k,
        default_k: default,
        alpha_in: alpha,
        delta_in: delta,
        n_in: n,
        pairs_removed_step1: removed,
        removal_limit: k * n,
        zero_points_discarded,
        pairs_dropped_zero,
        sign_choices,
        alpha_out: (alpha * alpha - 1.0 / k as f64).sqrt(),
        alpha_achieved,
        delta_out: out.density(),
        delta_guarantee: delta - k as f64 / d as f64,
        n_out: out.n(),
        warnings,
    };
    Ok((out, trace))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketTrace {
    pub min_length: f64,
    /// Ratio of the longest to the shortest matched pair.
    pub c: f64,
    /// `max(1, ceil(log2 c))`.
    pub buckets: usize,
    pub counts: Vec<usize>,
    pub chosen: usize,
    pub kept: usize,
    pub scale: f64,
}

/// Dyadic bucket of a normalized length `r >= 1`; the last bucket is closed.
pub fn dyadic_bucket(r: f64, buckets: usize) -> usize {
    let j = r.log2().floor().max(0.0) as usize;
    j.min(buckets - 1)
}

/// Keeps the matched pairs of the most populous dyadic length class (ties to
/// the shortest class) and rescales so the survivors have lengths in `[1, 2]`.
pub fn bucket_to_2bounded(code: &CodeConfig) -> Result<(CodeConfig, BucketTrace)> {
    code.require_pairs()?;
    let (min_len, max_len) = crate::code::boundedness(code)?;
    let c = max_len / min_len;
    let buckets = (c.log2().ceil() as usize).max(1);
    let length = |a: usize, b: usize| linalg::norm(&linalg::sub(code.point(b), code.point(a)));

    let mut counts = vec![0usize; buckets];
    for (_, a, b) in code.pairs() {
        counts[dyadic_bucket(length(a, b) / min_len, buckets)] += 1;
    }
    let chosen = counts
        .iter()
        .enumerate()
        .fold(0, |best, (j, &cnt)| if cnt > counts[best] { j } else { best });

    let mut kept_min = f64::INFINITY;
    let matchings: Vec<DirectionMatching> = code
        .matchings()
        .iter()
        .map(|m| {
            let tuples = m
                .tuples
                .iter()
                .filter(|t| {
                    let (a, b) = (t.indices()[0], t.indices()[1]);
                    let len = length(a, b);
                    let keep = dyadic_bucket(len / min_len, buckets) == chosen;
                    if keep {
                        kept_min = kept_min.min(len);
                    }
                    keep
                })
                .cloned()
                .collect();
            DirectionMatching::new(m.direction, tuples)
        })
        .collect();
    let scale = 1.0 / kept_min;
    let points = code
        .points()
        .iter()
        .map(|p| RealVec::new(p.iter().map(|x| x * scale).collect()))
        .collect();
    let out = CodeConfig::new(code.d(), 2, points, matchings)?;
    let trace = BucketTrace {
        min_length: min_len,
        c,
        buckets,
        kept: counts[chosen],
        counts,
        chosen,
        scale,
    };
    Ok((out, trace))
}
