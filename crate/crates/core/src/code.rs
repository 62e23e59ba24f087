//! Domain types for approximate LDC configurations and exact verification of
//! the decoding property.

use std::collections::HashSet;
use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// A point of `R^d`. Entries are always finite.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealVec(Vec<f64>);

impl RealVec {
    pub fn new(entries: Vec<f64>) -> Self {
        RealVec(entries)
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        RealVec(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RealVec {
    fn from(v: Vec<f64>) -> Self {
        RealVec(v)
    }
}

/// Sorted, duplicate-free point indices forming one query set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Tuple(Vec<usize>);

impl Tuple {
    /// Sorts `indices`; `None` if an index repeats.
    pub fn new(mut indices: Vec<usize>) -> Option<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Tuple(indices))
    }

    pub fn pair(a: usize, b: usize) -> Option<Self> {
        Tuple::new(vec![a, b])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionMatching {
    pub direction: usize,
    pub tuples: Vec<Tuple>,
}

impl DirectionMatching {
    pub fn new(direction: usize, tuples: Vec<Tuple>) -> Self {
        DirectionMatching { direction, tuples }
    }
}

/// Points `V` (a multiset, duplicates kept as distinct indices) and one
/// `q`-matching per direction. Directions without tuples hold an empty
/// matching.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeConfig {
    d: usize,
    q: usize,
    points: Vec<RealVec>,
    matchings: Vec<DirectionMatching>,
}

impl CodeConfig {
    /// Validates every invariant: `d, q, n >= 1`, point dimensions, finite
    /// entries, tuple sizes, index ranges and disjointness per direction.
    pub fn new(
        d: usize,
        q: usize,
        points: Vec<RealVec>,
        matchings: Vec<DirectionMatching>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
        }
        if q == 0 {
            return Err(Error::InvalidParameter("query count q must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidParameter("code needs at least one point".into()));
        }
        for (j, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    point: j,
                    expected: d,
                    got: p.len(),
                });
            }
            if let Some(entry) = p.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { point: j, entry });
            }
        }
        let n = points.len();
        let mut slots: Vec<Option<DirectionMatching>> = vec![None; d];
        for m in matchings {
            if m.direction >= d {
                return Err(Error::DirectionOutOfRange {
                    direction: m.direction,
                    d,
                });
            }
            validate_matching(&m, q, n)?;
            let slot = &mut slots[m.direction];
            if slot.is_some() {
                return Err(Error::DuplicateDirection {
                    direction: m.direction,
                });
            }
            *slot = Some(m);
        }
        let matchings = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.unwrap_or_else(|| DirectionMatching::new(i, Vec::new())))
            .collect();
        Ok(CodeConfig {
            d,
            q,
            points,
            matchings,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[RealVec] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    /// All `d` matchings, indexed by direction.
    pub fn matchings(&self) -> &[DirectionMatching] {
        &self.matchings
    }

    pub fn matching(&self, i: usize) -> &[Tuple] {
        &self.matchings[i].tuples
    }

    pub fn total_tuples(&self) -> usize {
        self.matchings.iter().map(|m| m.tuples.len()).sum()
    }

    /// `(sum_i |M_i|) / (d n)`.
    pub fn density(&self) -> f64 {
        self.total_tuples() as f64 / (self.d as f64 * self.n() as f64)
    }

    /// Every matched pair as `(direction, j1, j2)` with `j1 < j2`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.matchings.iter().flat_map(|m| {
            m.tuples
                .iter()
                .filter(|t| t.len() == 2)
                .map(move |t| (m.direction, t.0[0], t.0[1]))
        })
    }

    /// The same code with every point multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<CodeConfig> {
        let points = self
            .points
            .iter()
            .map(|p| RealVec(p.iter().map(|x| x * factor).collect()))
            .collect();
        CodeConfig::new(self.d, self.q, points, self.matchings.clone())
    }

    fn require_q(&self, q: usize) -> Result<()> {
        if self.q != q {
            return Err(Error::UnsupportedQueryCount {
                expected: q,
                got: self.q,
            });
        }
        Ok(())
    }

    pub(crate) fn require_pairs(&self) -> Result<()> {
        self.require_q(2)
    }
}

fn validate_matching(m: &DirectionMatching, q: usize, n: usize) -> Result<()> {
    let mut used = HashSet::new();
    for t in &m.tuples {
        if t.len() != q {
            return Err(Error::TupleSize {
                direction: m.direction,
                expected: q,
                got: t.len(),
            });
        }
        if t.0.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::RepeatedIndex {
                direction: m.direction,
            });
        }
        for &j in &t.0 {
            if j >= n {
                return Err(Error::IndexOutOfRange {
                    direction: m.direction,
                    index: j,
                    n,
                });
            }
            if !used.insert(j) {
                return Err(Error::NotDisjoint {
                    direction: m.direction,
                    index: j,
                });
            }
        }
    }
    Ok(())
}

/// `|u_i| / ||u||_2`.
pub fn weight(u: &[f64], i: usize) -> Result<f64> {
    let len = linalg::norm(u);
    if len == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((u[i].abs() / len).min(1.0))
}

/// Largest `weight_i(u)` over nonzero `u` in a tuple's span.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpanWeight {
    pub value: f64,
    /// Set when every vector of the tuple is zero; `value` is then 0.
    pub degenerate: bool,
}

/// Maximum of `weight_i` over the span of `vectors`.
///
/// For a subspace `S`, `max_{u in S} |<u, e_i>| / ||u||` is the norm of the
/// orthogonal projection of `e_i` onto `S`.
pub fn span_weight_of(vectors: &[&[f64]], i: usize) -> SpanWeight {
    let basis = linalg::orthonormal_basis(vectors);
    if basis.is_empty() {
        return SpanWeight {
            value: 0.0,
            degenerate: true,
        };
    }
    let p2: f64 = basis.iter().map(|b| b[i] * b[i]).sum();
    // near 1 the residual `e_i - P e_i` is the accurate quantity
    let value = if p2 > 0.5 {
        let mut r = linalg::project_basis_vector(&basis, i, vectors[0].len());
        r.iter_mut().for_each(|x| *x = -*x);
        r[i] += 1.0;
        (1.0 - linalg::dot(&r, &r)).max(0.0).sqrt()
    } else {
        p2.sqrt()
    };
    SpanWeight {
        value,
        degenerate: false,
    }
}

pub fn span_weight(code: &CodeConfig, t: &Tuple, i: usize) -> SpanWeight {
    let vectors: Vec<&[f64]> = t.indices().iter().map(|&j| code.point(j)).collect();
    span_weight_of(&vectors, i)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleDiagnostic {
    pub direction: usize,
    pub tuple: Tuple,
    pub span_weight: f64,
    pub degenerate: bool,
    pub below_claim: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub d: usize,
    pub n: usize,
    pub q: usize,
    pub alpha_claim: f64,
    /// Minimum span weight over matched tuples; 1 when there are none.
    pub achieved_alpha: f64,
    pub total_tuples: usize,
    pub density: f64,
    /// Simplicity at `alpha_claim`; always false unless `q = 2`.
    pub simple: bool,
    pub length_min: Option<f64>,
    pub length_max: Option<f64>,
    pub flagged: usize,
    pub verified: bool,
    pub per_tuple: Vec<TupleDiagnostic>,
}

/// Checks the approximate decoding property tuple by tuple.
pub fn verify(code: &CodeConfig, alpha_claim: f64) -> VerificationReport {
    let mut per_tuple = Vec::with_capacity(code.total_tuples());
    for m in code.matchings() {
        for t in &m.tuples {
            let sw = span_weight(code, t, m.direction);
            per_tuple.push(TupleDiagnostic {
                direction: m.direction,
                tuple: t.clone(),
                span_weight: sw.value,
                degenerate: sw.degenerate,
                below_claim: sw.value < alpha_claim,
            });
        }
    }
    let achieved_alpha = per_tuple
        .iter()
        .map(|t| t.span_weight)
        .fold(1.0, f64::min);
    let flagged = per_tuple.iter().filter(|t| t.below_claim).count();

    let (simple, length_min, length_max) = if code.q() == 2 {
        let simple = is_simple(code, alpha_claim).unwrap_or(false);
        let lengths = pair_lengths(code);
        let min = lengths.iter().copied().reduce(f64::min);
        let max = lengths.iter().copied().reduce(f64::max);
        (simple, min, max)
    } else {
        (false, None, None)
    };

    VerificationReport {
        d: code.d(),
        n: code.n(),
        q: code.q(),
        alpha_claim,
        achieved_alpha,
        total_tuples: code.total_tuples(),
        density: code.density(),
        simple,
        length_min,
        length_max,
        flagged,
        verified: flagged == 0,
        per_tuple,
    }
}

fn pair_lengths(code: &CodeConfig) -> Vec<f64> {
    code.pairs()
        .map(|(_, a, b)| linalg::norm(&linalg::sub(code.point(b), code.point(a))))
        .collect()
}

/// `weight_i(v_{j2} - v_{j1})` for a matched pair; 0 when the points coincide.
pub fn difference_weight(code: &CodeConfig, i: usize, a: usize, b: usize) -> f64 {
    weight(&linalg::sub(code.point(b), code.point(a)), i).unwrap_or(0.0)
}

/// True iff every matched difference has `weight_i >= alpha`.
pub fn is_simple(code: &CodeConfig, alpha: f64) -> Result<bool> {
    code.require_pairs()?;
    Ok(code
        .pairs()
        .all(|(i, a, b)| difference_weight(code, i, a, b) >= alpha))
}

/// Largest `alpha` at which the code is simple (minimum difference weight);
/// `None` without matched pairs.
pub fn simple_alpha(code: &CodeConfig) -> Result<Option<f64>> {
    code.require_pairs()?;
    Ok(code
        .pairs()
        .map(|(i, a, b)| difference_weight(code, i, a, b))
        .reduce(f64::min))
}

/// Extremes of the matched-pair lengths `||v_{j2} - v_{j1}||_2`.
pub fn boundedness(code: &CodeConfig) -> Result<(f64, f64)> {
    code.require_pairs()?;
    let mut range: Option<(f64, f64)> = None;
    for (i, a, b) in code.pairs() {
        let len = linalg::norm(&linalg::sub(code.point(b), code.point(a)));
        if len == 0.0 {
            return Err(Error::DegeneratePair {
                direction: i,
                a,
                b,
            });
        }
        range = Some(match range {
            None => (len, len),
            Some((lo, hi)) => (lo.min(len), hi.max(len)),
        });
    }
    range.ok_or(Error::EmptyCode)
}
