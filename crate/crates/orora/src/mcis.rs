//! Inlier selection by maximum clique over a pairwise-consistency graph.
//!
//! Two correspondences are mutually consistent when the distance between
//! their source points matches the distance between their destination points
//! up to the measurement uncertainty; rigid motion preserves distances, so
//! inliers form a near-complete subgraph while outliers connect only by
//! chance. The largest clique is found with a branch-and-bound search and
//! its members are kept as inliers.

use std::time::{Duration, Instant};

use crate::types::CorrespondenceSet;
use crate::uncertainty::{uncertainty_radius, NoiseParams};
use crate::{Error, Result};

/// Parameters of the inlier-selection stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McisConfig {
    /// Scale applied to the pairwise uncertainty bound; larger admits more
    /// edges.
    pub cbar: f64,
    /// Cap on clique-search time. On expiry the best clique found so far is
    /// returned and marked inexact.
    pub time_budget: Duration,
}

impl Default for McisConfig {
    fn default() -> Self {
        McisConfig {
            cbar: 0.75,
            time_budget: Duration::from_millis(100),
        }
    }
}

/// Fixed-size bitset over vertex indices, one u64 per 64 vertices.
#[derive(Debug, Clone, PartialEq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn zeros(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    fn intersect(&mut self, other: &BitSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set index at or above `from`, if any.
    fn next_at_or_after(&self, from: usize) -> Option<usize> {
        let mut word_idx = from / 64;
        if word_idx >= self.words.len() {
            return None;
        }
        let mut word = self.words[word_idx] & (u64::MAX << (from % 64));
        loop {
            if word != 0 {
                return Some(word_idx * 64 + word.trailing_zeros() as usize);
            }
            word_idx += 1;
            if word_idx == self.words.len() {
                return None;
            }
            word = self.words[word_idx];
        }
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

/// Undirected consistency graph stored as bitset adjacency rows.
#[derive(Debug, Clone)]
pub struct ConsistencyGraph {
    n: usize,
    adjacency: Vec<BitSet>,
}

impl ConsistencyGraph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        ConsistencyGraph {
            n,
            adjacency: (0..n).map(|_| BitSet::zeros(n)).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Adds the undirected edge `{i, j}`; self-loops are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.adjacency[i].insert(j);
        self.adjacency[j].insert(i);
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adjacency[i].contains(j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|row| row.count()).sum::<usize>() / 2
    }
}

/// Result of the clique search.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxClique {
    /// Member vertices in increasing order.
    pub vertices: Vec<usize>,
    /// False when the search hit its time budget before proving optimality.
    pub exact: bool,
}

/// Builds the consistency graph for a correspondence set.
///
/// Correspondences `m` and `n` are joined when
///
/// ```text
/// | ||p_m - p_n|| - ||q_m - q_n|| |  <=  cbar * (delta_m + delta_n)
/// ```
///
/// where `delta_m` sums the scalar uncertainty radii of both points of
/// correspondence `m`. The bound is what a pair of inliers can deviate by
/// when every return errs by at most its radius.
pub fn build_consistency_graph(
    corr: &CorrespondenceSet,
    noise: &NoiseParams,
    cbar: f64,
) -> Result<ConsistencyGraph> {
    if !cbar.is_finite() || cbar <= 0.0 {
        return Err(Error::invalid(format!("cbar must be positive, got {cbar}")));
    }
    let n = corr.len();
    let mut graph = ConsistencyGraph::empty(n);
    let pairs = corr.pairs();
    let deltas: Vec<f64> = pairs
        .iter()
        .map(|c| uncertainty_radius(&c.src, noise) + uncertainty_radius(&c.dst, noise))
        .collect();
    for m in 0..n {
        let pm = pairs[m].src.position();
        let qm = pairs[m].dst.position();
        for k in (m + 1)..n {
            let src_dist = (pm - pairs[k].src.position()).norm();
            let dst_dist = (qm - pairs[k].dst.position()).norm();
            if (src_dist - dst_dist).abs() <= cbar * (deltas[m] + deltas[k]) {
                graph.add_edge(m, k);
            }
        }
    }
    Ok(graph)
}

struct CliqueSearch<'a> {
    graph: &'a ConsistencyGraph,
    best: Vec<usize>,
    deadline: Instant,
    timed_out: bool,
    nodes: u64,
    color_buf: Vec<BitSet>,
}

impl<'a> CliqueSearch<'a> {
    fn new(graph: &'a ConsistencyGraph, budget: Duration) -> Self {
        CliqueSearch {
            graph,
            best: Vec::new(),
            deadline: Instant::now() + budget,
            timed_out: false,
            nodes: 0,
            color_buf: Vec::new(),
        }
    }

    /// Greedy-coloring upper bound on the clique number within `candidates`:
    /// a clique needs one color per vertex, so the number of color classes
    /// bounds any clique inside the set.
    fn color_bound(&mut self, candidates: &BitSet) -> usize {
        self.color_buf.clear();
        let n = self.graph.n;
        for v in candidates.iter_ones() {
            let row = &self.graph.adjacency[v];
            match self
                .color_buf
                .iter_mut()
                .find(|class| class.words.iter().zip(&row.words).all(|(c, r)| c & r == 0))
            {
                Some(class) => class.insert(v),
                None => {
                    let mut class = BitSet::zeros(n);
                    class.insert(v);
                    self.color_buf.push(class);
                }
            }
        }
        self.color_buf.len()
    }

    /// Expands cliques in lexicographic order. `current` is the clique built
    /// so far; `candidates` holds vertices adjacent to all of it and larger
    /// than its last member, so each clique is visited exactly once and the
    /// first maximum clique encountered is the lexicographically smallest.
    fn expand(&mut self, current: &mut Vec<usize>, candidates: &BitSet) {
        self.nodes += 1;
        if self.nodes % 1024 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if current.len() > self.best.len() {
            self.best = current.clone();
        }
        let mut remaining = candidates.count();
        if current.len() + remaining <= self.best.len() {
            return;
        }
        if remaining > 8 && current.len() + self.color_bound(candidates) <= self.best.len() {
            return;
        }
        let mut pool = candidates.clone();
        let mut v = match pool.next_at_or_after(0) {
            Some(v) => v,
            None => return,
        };
        loop {
            if current.len() + remaining <= self.best.len() {
                return;
            }
            pool.remove(v);
            remaining -= 1;
            let mut next = pool.clone();
            next.intersect(&self.graph.adjacency[v]);
            current.push(v);
            self.expand(current, &next);
            current.pop();
            if self.timed_out {
                return;
            }
            v = match pool.next_at_or_after(v + 1) {
                Some(v) => v,
                None => return,
            };
        }
    }
}

/// Finds a maximum clique by branch-and-bound with a greedy-coloring bound.
///
/// Ties between maximum cliques resolve to the lexicographically smallest
/// vertex list, making the result deterministic. If the time budget expires
/// the largest clique found so far is returned with `exact` false.
pub fn max_clique(graph: &ConsistencyGraph, budget: Duration) -> MaxClique {
    let mut search = CliqueSearch::new(graph, budget);
    let mut all = BitSet::zeros(graph.n);
    for v in 0..graph.n {
        all.insert(v);
    }
    let mut current = Vec::new();
    if graph.n > 0 {
        search.expand(&mut current, &all);
    }
    MaxClique {
        vertices: search.best,
        exact: !search.timed_out,
    }
}

/// Outcome of inlier selection.
#[derive(Debug, Clone)]
pub struct PruneResult {
    /// Correspondences that survived, in their original relative order.
    pub inliers: CorrespondenceSet,
    /// Positions (into the input set) of the rejected correspondences.
    pub outlier_indices: Vec<usize>,
    /// False when the clique search was cut off by its time budget.
    pub clique_exact: bool,
}

/// Keeps the maximum-clique correspondences and rejects the rest.
///
/// A clique of fewer than two correspondences cannot constrain a rigid
/// motion and is reported as degenerate.
pub fn prune(corr: &CorrespondenceSet, noise: &NoiseParams, cfg: &McisConfig) -> Result<PruneResult> {
    let graph = build_consistency_graph(corr, noise, cfg.cbar)?;
    let clique = max_clique(&graph, cfg.time_budget);
    if clique.vertices.len() < 2 {
        return Err(Error::Degenerate(
            "consistency graph has no clique of two or more correspondences",
        ));
    }
    let member: Vec<bool> = {
        let mut m = vec![false; corr.len()];
        for &v in &clique.vertices {
            m[v] = true;
        }
        m
    };
    let outlier_indices = (0..corr.len()).filter(|&i| !member[i]).collect();
    Ok(PruneResult {
        inliers: corr.subset(&clique.vertices),
        outlier_indices,
        clique_exact: clique.exact,
    })
}
