//! Labeled code graph, random axis-aligned cuts and recursive cut
//! certificates.
//!
//! A certificate splits the vertex set recursively down to singletons. Every
//! internal node records a nontrivial cut `(S1, S2)` with
//! `|edg(S1, S2)| <= c * min(|S1|, |S2|)`; summed over the tree this bounds
//! the edge count by `(c/2) n log2 n`.

use rand::Rng;
use serde::Serialize;

use crate::code::{simple_alpha, CodeConfig};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub direction: usize,
}

/// Multigraph on the point indices with one labeled edge per matched pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

pub fn build_graph(code: &CodeConfig) -> Result<CodeGraph> {
    code.require_pairs()?;
    let edges = code
        .pairs()
        .map(|(direction, a, b)| Edge { a, b, direction })
        .collect();
    Ok(CodeGraph { n: code.n(), edges })
}

impl CodeGraph {
    /// Indices of edges with both endpoints in the subset described by `mask`.
    pub fn internal_edges(&self, mask: &[bool]) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| mask[self.edges[e].a] && mask[self.edges[e].b])
            .collect()
    }

    pub fn mask(&self, subset: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.n];
        subset.iter().for_each(|&v| m[v] = true);
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    /// Axis of the cutting plane; `None` for an arbitrary split.
    pub direction: Option<usize>,
    pub threshold: Option<f64>,
    /// Graph edge indices with one endpoint on each side.
    pub cut_edges: Vec<usize>,
    pub right_direction_count: usize,
}

impl Cut {
    pub fn is_nontrivial(&self) -> bool {
        !self.s1.is_empty() && !self.s2.is_empty()
    }

    pub fn min_side(&self) -> usize {
        self.s1.len().min(self.s2.len())
    }

    pub fn satisfies(&self, c_param: f64) -> bool {
        self.is_nontrivial() && self.cut_edges.len() as f64 <= c_param * self.min_side() as f64
    }
}

/// Builds the cut from a side assignment (`true` = `S1`).
pub(crate) fn assemble_cut(
    graph: &CodeGraph,
    subset: &[usize],
    side: impl Fn(usize) -> bool,
    direction: Option<usize>,
    threshold: Option<f64>,
) -> Cut {
    let (s1, s2): (Vec<usize>, Vec<usize>) = subset.iter().partition(|&&v| side(v));
    let mut in_s1 = vec![None; graph.n];
    s1.iter().for_each(|&v| in_s1[v] = Some(true));
    s2.iter().for_each(|&v| in_s1[v] = Some(false));
    let cut_edges: Vec<usize> = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!((in_s1[e.a], in_s1[e.b]), (Some(x), Some(y)) if x != y))
        .map(|(k, _)| k)
        .collect();
    let right_direction_count = match direction {
        Some(i) => cut_edges.iter().filter(|&&e| graph.edges[e].direction == i).count(),
        None => 0,
    };
    Cut {
        s1,
        s2,
        direction,
        threshold,
        cut_edges,
        right_direction_count,
    }
}

/// Splits by the plane `x_direction = threshold`; points on the plane go to
/// `S1`.
pub fn cut_along(
    graph: &CodeGraph,
    code: &CodeConfig,
    subset: &[usize],
    direction: usize,
    threshold: f64,
) -> Cut {
    assemble_cut(
        graph,
        subset,
        |v| code.point(v)[direction] <= threshold,
        Some(direction),
        Some(threshold),
    )
}

/// First half / second half of `subset` in the given order.
pub fn balanced_split(graph: &CodeGraph, subset: &[usize]) -> Cut {
    let half = subset.len() / 2;
    let mut first = vec![false; graph.n];
    subset[..half].iter().for_each(|&v| first[v] = true);
    assemble_cut(graph, subset, |v| first[v], None, None)
}

/// Coordinate range of `subset` along `direction`.
pub fn subset_interval(code: &CodeConfig, subset: &[usize], direction: usize) -> (f64, f64) {
    subset
        .iter()
        .map(|&v| code.point(v)[direction])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

pub fn sample_axis_cut_with<R: Rng>(
    graph: &CodeGraph,
    code: &CodeConfig,
    subset: &[usize],
    rng: &mut R,
) -> Cut {
    let direction = rng.random_range(0..code.d());
    let (lo, hi) = subset_interval(code, subset, direction);
    let threshold = lo + rng.random::<f64>() * (hi - lo);
    cut_along(graph, code, subset, direction, threshold)
}

/// Uniform direction, then a uniform threshold inside the subset's tight
/// bounding interval along that direction.
pub fn sample_axis_cut(graph: &CodeGraph, code: &CodeConfig, subset: &[usize], seed: u64) -> Cut {
    let mut rng = rng::stream(seed, 0);
    sample_axis_cut_with(graph, code, subset, &mut rng)
}

/// `ceil(64 d log2(|subset| + 1))` draws.
pub fn default_budget(d: usize, subset_len: usize) -> usize {
    (64.0 * d as f64 * ((subset_len + 1) as f64).log2()).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutSearchFailure {
    pub subset: Vec<usize>,
    pub internal_edges: usize,
    pub samples: usize,
    /// Smallest `|edg(S1,S2)| / min(|S1|,|S2|)` over nontrivial sampled cuts.
    pub best_ratio: Option<f64>,
    pub reason: String,
}

/// Rejection-samples axis cuts until one is nontrivial, cuts at least one
/// edge in the right direction and satisfies `|edg| <= c * min side`.
pub fn find_good_cut(
    graph: &CodeGraph,
    code: &CodeConfig,
    subset: &[usize],
    c_param: f64,
    budget: usize,
    seed: u64,
) -> std::result::Result<Cut, CutSearchFailure> {
    let mask = graph.mask(subset);
    let internal = graph.internal_edges(&mask).len();
    if internal == 0 {
        return Ok(balanced_split(graph, subset));
    }
    let mut rng = rng::stream(seed, 0);
    let mut best_ratio: Option<f64> = None;
    for _ in 0..budget {
        let cut = sample_axis_cut_with(graph, code, subset, &mut rng);
        if !cut.is_nontrivial() {
            continue;
        }
        let ratio = cut.cut_edges.len() as f64 / cut.min_side() as f64;
        best_ratio = Some(best_ratio.map_or(ratio, |b: f64| b.min(ratio)));
        if cut.right_direction_count >= 1 && cut.satisfies(c_param) {
            return Ok(cut);
        }
    }
    Err(CutSearchFailure {
        subset: subset.to_vec(),
        internal_edges: internal,
        samples: budget,
        best_ratio,
        reason: format!("no cut within c = {c_param} found in {budget} samples"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub size: usize,
    pub direction: Option<usize>,
    pub s1: usize,
    pub s2: usize,
    pub cut_edges: usize,
    pub right_direction: usize,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutCertificate {
    pub n: usize,
    pub c_param: f64,
    /// Internal nodes in preorder.
    pub nodes: Vec<CertNode>,
    /// Sum of `|edg(S1, S2)|` over the nodes.
    pub total_edges: usize,
    pub graph_edges: usize,
    /// `(c/2) n log2 n`.
    pub edge_bound: f64,
    pub verified: bool,
    pub failure: Option<CutSearchFailure>,
}

struct Subtree {
    size: usize,
    cut: Cut,
    children: Vec<Subtree>,
}

type Splitter<'a> = dyn Fn(&[usize], u64) -> std::result::Result<Cut, CutSearchFailure> + Sync + 'a;

const PARALLEL_MIN: usize = 256;

fn grow(subset: Vec<usize>, seed: u64, split: &Splitter<'_>) -> std::result::Result<Option<Subtree>, CutSearchFailure> {
    if subset.len() < 2 {
        return Ok(None);
    }
    let cut = split(&subset, seed)?;
    if !cut.is_nontrivial() {
        return Err(CutSearchFailure {
            subset,
            internal_edges: 0,
            samples: 0,
            best_ratio: None,
            reason: "splitter returned a trivial cut".into(),
        });
    }
    let (left, right) = (cut.s1.clone(), cut.s2.clone());
    let (ls, rs) = (rng::derive(seed, 1), rng::derive(seed, 2));
    let (l, r) = if subset.len() >= PARALLEL_MIN {
        rayon::join(|| grow(left, ls, split), || grow(right, rs, split))
    } else {
        (grow(left, ls, split), grow(right, rs, split))
    };
    let children = [l?, r?].into_iter().flatten().collect();
    Ok(Some(Subtree {
        size: subset.len(),
        cut,
        children,
    }))
}

fn flatten(tree: &Subtree, parent: Option<usize>, depth: usize, c_param: f64, out: &mut Vec<CertNode>) {
    let id = out.len();
    out.push(CertNode {
        id,
        parent,
        depth,
        size: tree.size,
        direction: tree.cut.direction,
        s1: tree.cut.s1.len(),
        s2: tree.cut.s2.len(),
        cut_edges: tree.cut.cut_edges.len(),
        right_direction: tree.cut.right_direction_count,
        within_bound: tree.cut.satisfies(c_param),
    });
    for child in &tree.children {
        flatten(child, Some(id), depth + 1, c_param, out);
    }
}

/// Runs `split` recursively from the full vertex set and checks the
/// node-wise bound, the edge accounting and the aggregate bound.
pub fn build_certificate(
    n: usize,
    graph_edges: usize,
    c_param: f64,
    seed: u64,
    split: &Splitter<'_>,
) -> CutCertificate {
    let edge_bound = if n > 1 {
        c_param / 2.0 * n as f64 * (n as f64).log2()
    } else {
        0.0
    };
    let root: Vec<usize> = (0..n).collect();
    let mut nodes = Vec::new();
    let failure = match grow(root, rng::derive(seed, 0), split) {
        Ok(Some(tree)) => {
            flatten(&tree, None, 0, c_param, &mut nodes);
            None
        }
        Ok(None) => None,
        Err(f) => Some(f),
    };
    let total_edges = nodes.iter().map(|v| v.cut_edges).sum();
    let verified = failure.is_none()
        && nodes.iter().all(|v| v.within_bound)
        && total_edges == graph_edges
        && total_edges as f64 <= edge_bound + 1e-9;
    CutCertificate {
        n,
        c_param,
        nodes,
        total_edges,
        graph_edges,
        edge_bound,
        verified,
        failure,
    }
}

/// Certificate for a simple code with `c = 2 sqrt(d) / alpha`.
///
/// `alpha` defaults to the code's minimum difference weight. `budget_per_node`
/// defaults to [`default_budget`].
pub fn recursive_cut_certificate(
    code: &CodeConfig,
    alpha: Option<f64>,
    budget_per_node: Option<usize>,
    seed: u64,
) -> Result<CutCertificate> {
    let graph = build_graph(code)?;
    let alpha = match alpha {
        Some(a) => a,
        None => simple_alpha(code)?.unwrap_or(1.0),
    };
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!(
            "cut certificates need a simple code with alpha in (0, 1], got {alpha}"
        )));
    }
    let d = code.d();
    let c_param = 2.0 * (d as f64).sqrt() / alpha;
    let split = |subset: &[usize], node_seed: u64| {
        let budget = budget_per_node.unwrap_or_else(|| default_budget(d, subset.len()));
        find_good_cut(&graph, code, subset, c_param, budget, node_seed)
    };
    Ok(build_certificate(code.n(), graph.edges.len(), c_param, seed, &split))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralBound {
    pub alpha: f64,
    pub delta: f64,
    pub d: usize,
    /// Whether the general-to-simple losses were applied first.
    pub via_simple_reduction: bool,
    pub alpha_used: f64,
    pub delta_used: f64,
    /// `alpha_used * delta_used * sqrt(d)`.
    pub exponent: f64,
    /// `2^exponent`.
    pub bound: f64,
}

/// `n >= 2^{alpha delta sqrt(d)}` for simple codes (constant 1 in the
/// exponent). For general codes pass `simple = false` to first apply the
/// reduction losses `alpha -> alpha/sqrt(2)`, `delta -> delta/2`.
pub fn general_bound(alpha: f64, delta: f64, d: usize, simple: bool) -> GeneralBound {
    let (alpha_used, delta_used) = if simple {
        (alpha, delta)
    } else {
        (alpha / 2f64.sqrt(), delta / 2.0)
    };
    let exponent = alpha_used * delta_used * (d as f64).sqrt();
    GeneralBound {
        alpha,
        delta,
        d,
        via_simple_reduction: !simple,
        alpha_used,
        delta_used,
        exponent,
        bound: exponent.exp2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{CodeConfig, DirectionMatching, RealVec, Tuple};
    use crate::constructions::hypercube;

    fn two_point(d: usize) -> CodeConfig {
        let mut b = vec![0.0; d];
        b[0] = 1.0;
        CodeConfig::new(
            d,
            2,
            vec![RealVec::new(vec![0.0; d]), RealVec::new(b)],
            vec![DirectionMatching::new(0, vec![Tuple::pair(0, 1).unwrap()])],
        )
        .unwrap()
    }

    #[test]
    fn graph_examples() {
        let g = build_graph(&hypercube(3).unwrap()).unwrap();
        assert_eq!(g.edges.len(), 12);
        for i in 0..3 {
            assert_eq!(g.edges.iter().filter(|e| e.direction == i).count(), 4);
        }
        let empty = CodeConfig::new(2, 2, vec![RealVec::new(vec![0.0, 0.0])], vec![]).unwrap();
        assert!(build_graph(&empty).unwrap().edges.is_empty());

        let pts = vec![RealVec::new(vec![0.0, 0.0]), RealVec::new(vec![1.0, 1.0])];
        let m = vec![
            DirectionMatching::new(0, vec![Tuple::pair(0, 1).unwrap()]),
            DirectionMatching::new(1, vec![Tuple::pair(0, 1).unwrap()]),
        ];
        let g = build_graph(&CodeConfig::new(2, 2, pts, m).unwrap()).unwrap();
        assert_eq!(g.edges.len(), 2);
        assert_ne!(g.edges[0].direction, g.edges[1].direction);
    }

    #[test]
    fn forced_direction_separates_pair() {
        let code = two_point(3);
        let g = build_graph(&code).unwrap();
        for t in [0.0, 0.3, 0.999] {
            let cut = cut_along(&g, &code, &[0, 1], 0, t);
            assert_eq!(cut.cut_edges.len(), 1);
            assert_eq!(cut.right_direction_count, 1);
        }
    }

    #[test]
    fn degenerate_plane_cuts_nothing() {
        let code = two_point(3);
        let g = build_graph(&code).unwrap();
        let (lo, hi) = subset_interval(&code, &[0, 1], 2);
        assert_eq!((lo, hi), (0.0, 0.0));
        let cut = cut_along(&g, &code, &[0, 1], 2, lo);
        assert!(cut.s2.is_empty());
        assert!(cut.cut_edges.is_empty());
    }

    #[test]
    fn right_direction_frequency_on_hypercube() {
        let code = hypercube(4).unwrap();
        let g = build_graph(&code).unwrap();
        let all: Vec<usize> = (0..code.n()).collect();
        let mut rng = rng::stream(5, 0);
        let trials = 10_000;
        let mut cut = vec![0usize; g.edges.len()];
        let mut right = vec![0usize; g.edges.len()];
        for _ in 0..trials {
            let c = sample_axis_cut_with(&g, &code, &all, &mut rng);
            for &e in &c.cut_edges {
                cut[e] += 1;
                right[e] += (Some(g.edges[e].direction) == c.direction) as usize;
            }
        }
        // an axis edge of the unit cube is cut only along its own axis,
        // with probability 1/d
        for e in 0..g.edges.len() {
            assert_eq!(cut[e], right[e]);
            let p = cut[e] as f64 / trials as f64;
            assert!((p - 0.25).abs() < 0.02, "edge {e}: {p}");
            assert!(right[e] as f64 >= 0.5 * cut[e] as f64);
        }
    }

    #[test]
    fn good_cut_examples() {
        let code = two_point(4);
        let g = build_graph(&code).unwrap();
        let cut = find_good_cut(&g, &code, &[0, 1], 4.0, 1000, 1).unwrap();
        assert_eq!((cut.s1.len(), cut.s2.len(), cut.cut_edges.len()), (1, 1, 1));

        let edgeless = CodeConfig::new(
            2,
            2,
            (0..5).map(|j| RealVec::new(vec![j as f64, 0.0])).collect(),
            vec![],
        )
        .unwrap();
        let g = build_graph(&edgeless).unwrap();
        let cut = find_good_cut(&g, &edgeless, &[0, 1, 2, 3, 4], 1.0, 0, 1).unwrap();
        assert!(cut.is_nontrivial());
        assert!(cut.cut_edges.is_empty());

        let cube = hypercube(6).unwrap();
        let g = build_graph(&cube).unwrap();
        let all: Vec<usize> = (0..64).collect();
        let c = 2.0 * 6f64.sqrt();
        let cut = find_good_cut(&g, &cube, &all, c, default_budget(6, 64), 3).unwrap();
        assert!(cut.satisfies(c));
        assert!(cut.right_direction_count >= 1);
    }

    #[test]
    fn budget_exhaustion_reports_diagnostics() {
        let code = two_point(4);
        let g = build_graph(&code).unwrap();
        // c below 1 cannot be met by a cut of one edge between singletons
        let err = find_good_cut(&g, &code, &[0, 1], 0.5, 50, 1).unwrap_err();
        assert_eq!(err.samples, 50);
        assert_eq!(err.internal_edges, 1);
        assert_eq!(err.best_ratio, Some(1.0));
    }

    #[test]
    fn hypercube_certificate() {
        let cert = recursive_cut_certificate(&hypercube(8).unwrap(), None, None, 7).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.total_edges, 1024);
        assert!((cert.edge_bound - 8f64.sqrt() * 256.0 * 8.0).abs() < 1e-9);
        assert_eq!(cert.nodes.len(), 255);
    }

    #[test]
    fn single_point_certificate_is_empty() {
        let code = CodeConfig::new(3, 2, vec![RealVec::new(vec![1.0, 2.0, 3.0])], vec![]).unwrap();
        let cert = recursive_cut_certificate(&code, None, None, 0).unwrap();
        assert!(cert.nodes.is_empty());
        assert_eq!(cert.total_edges, 0);
        assert!(cert.verified);
    }

    #[test]
    fn failed_certificate_names_subset() {
        let code = two_point(4);
        let cert = recursive_cut_certificate(&code, Some(1.0), Some(0), 0).unwrap();
        assert!(!cert.verified);
        assert_eq!(cert.failure.unwrap().subset, vec![0, 1]);
    }

    #[test]
    fn general_bound_examples() {
        let b = general_bound(1.0, 0.5, 64, true);
        assert_eq!(b.bound, 16.0);
        assert!(hypercube(20).unwrap().n() as f64 >= general_bound(1.0, 0.5, 20, true).bound);
        assert_eq!(general_bound(1.0, 0.0, 50, true).bound, 1.0);
        assert_eq!(general_bound(1.0, 1.0, 100, true).bound, 1024.0);
        let g = general_bound(1.0, 1.0, 100, false);
        assert!((g.exponent - 10.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    }
}
