//! Signal-subgraph estimators: incoherent (top-s edges) and coherent
//! (top-s edges incident to m signal-vertices), plus the coherogram.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_slots, EdgeId};
use crate::stats::{SignificanceScore, TestStatisticKind};

/// Per-edge significance scores aligned with the linear edge index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    n_vertices: usize,
    kind: Option<TestStatisticKind>,
    scores: Vec<SignificanceScore>,
}

impl SignificanceMatrix {
    pub fn new(n_vertices: usize, kind: Option<TestStatisticKind>, scores: Vec<SignificanceScore>) -> Result<Self> {
        if n_vertices < 2 {
            return Err(Error::VTooSmall(n_vertices));
        }
        if scores.len() != edge_slots(n_vertices) {
            return Err(Error::LengthMismatch(format!(
                "{} scores for {} edge slots",
                scores.len(),
                edge_slots(n_vertices)
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.score.is_finite()) {
            return Err(Error::InvalidArgument(format!("score of edge slot {i} is not finite")));
        }
        Ok(SignificanceMatrix { n_vertices, kind, scores })
    }

    /// Bare scores without p-values.
    pub fn from_scores(n_vertices: usize, scores: impl IntoIterator<Item = f64>) -> Result<Self> {
        SignificanceMatrix::new(n_vertices, None, scores.into_iter().map(SignificanceScore::from_score).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn kind(&self) -> Option<TestStatisticKind> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[SignificanceScore] {
        &self.scores
    }

    pub fn score(&self, e: EdgeId) -> f64 {
        self.scores[e.index(self.n_vertices)].score
    }

    /// Edge slots from most to least significant.
    pub fn ranking(&self, ties: TieBreak) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        match ties {
            TieBreak::Lexicographic => {
                order.sort_by(|&a, &b| self.scores[b].score.total_cmp(&self.scores[a].score).then(a.cmp(&b)));
            }
            TieBreak::Shuffled { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                order.shuffle(&mut rng);
                // Stable sort keeps the shuffled order inside each tie class.
                order.sort_by(|&a, &b| self.scores[b].score.total_cmp(&self.scores[a].score));
            }
        }
        order
    }

    /// Distinct score values, strictest first.
    pub fn levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = self.scores.iter().map(|s| s.score).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        levels
    }
}

/// How equally significant edges (and vertices) are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TieBreak {
    /// Lower edge index / vertex index first.
    #[default]
    Lexicographic,
    /// Uniformly random order within ties, reproducible from the seed.
    Shuffled { seed: u64 },
}

/// An estimated (or planted) signal-subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSubgraph {
    n_vertices: usize,
    /// Sorted by linear index.
    edges: Vec<EdgeId>,
    m: Option<usize>,
    vertices: Option<Vec<usize>>,
}

impl SignalSubgraph {
    /// Validates and canonicalizes an edge set, with an optional covering vertex set.
    pub fn new(
        n_vertices: usize,
        edges: impl IntoIterator<Item = EdgeId>,
        m: Option<usize>,
        vertices: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut edges: Vec<EdgeId> = edges.into_iter().collect();
        for e in &edges {
            if e.u >= e.v || e.v >= n_vertices {
                return Err(Error::EdgeOutOfRange { u: e.u, v: e.v, n_vertices });
            }
        }
        edges.sort();
        edges.dedup();
        if edges.is_empty() {
            return Err(Error::EmptyTruth);
        }
        let vertices = vertices.map(|mut vs| {
            vs.sort_unstable();
            vs.dedup();
            vs
        });
        if let Some(vs) = &vertices {
            if let Some(&bad) = vs.iter().find(|&&v| v >= n_vertices) {
                return Err(Error::InvalidArgument(format!("signal vertex {bad} out of range")));
            }
            if let Some(m) = m {
                if vs.len() > m {
                    return Err(Error::InvalidArgument(format!("{} signal vertices exceed m={m}", vs.len())));
                }
            }
            if let Some(e) = edges.iter().find(|e| vs.binary_search(&e.u).is_err() && vs.binary_search(&e.v).is_err())
            {
                return Err(Error::InvalidArgument(format!("edge ({e}) is not incident to a signal vertex")));
            }
        }
        Ok(SignalSubgraph { n_vertices, edges, m, vertices })
    }

    /// The whole edge set; plugging this in gives the naïve Bayes classifier.
    pub fn whole(n_vertices: usize) -> Result<Self> {
        let edges = crate::graph::edge_index(n_vertices)?;
        Ok(SignalSubgraph { n_vertices, edges, m: None, vertices: None })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// Edge budget; equals the number of edges.
    pub fn s(&self) -> usize {
        self.edges.len()
    }

    pub fn m(&self) -> Option<usize> {
        self.m
    }

    pub fn vertices(&self) -> Option<&[usize]> {
        self.vertices.as_deref()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Linear indices of the edges, ascending.
    pub fn slots(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.index(self.n_vertices)).collect()
    }
}

/// Most edges that can be incident to some set of `m` vertices.
pub fn coherent_capacity(n_vertices: usize, m: usize) -> usize {
    let m = m.min(n_vertices);
    m * (n_vertices - 1) - m * m.saturating_sub(1) / 2
}

fn check_s(t: &SignificanceMatrix, s: usize) -> Result<()> {
    if s == 0 || s > t.len() {
        return Err(Error::SOutOfRange { s, max: t.len() });
    }
    Ok(())
}

/// The `s` most significant edges.
pub fn incoherent_estimate(t: &SignificanceMatrix, s: usize) -> Result<SignalSubgraph> {
    incoherent_estimate_with(t, s, TieBreak::Lexicographic)
}

pub fn incoherent_estimate_with(t: &SignificanceMatrix, s: usize, ties: TieBreak) -> Result<SignalSubgraph> {
    check_s(t, s)?;
    Ok(incoherent_from_ranking(t, &t.ranking(ties), s))
}

pub(crate) fn incoherent_from_ranking(t: &SignificanceMatrix, ranking: &[usize], s: usize) -> SignalSubgraph {
    let n = t.n_vertices;
    let mut edges: Vec<EdgeId> = ranking[..s].iter().map(|&i| EdgeId::from_index(i, n)).collect();
    edges.sort();
    SignalSubgraph { n_vertices: n, edges, m: None, vertices: None }
}

/// The `s` most significant edges incident to `m` signal-vertices chosen
/// at the strictest feasible significance level.
pub fn coherent_estimate(t: &SignificanceMatrix, s: usize, m: usize) -> Result<SignalSubgraph> {
    coherent_estimate_with(t, s, m, TieBreak::Lexicographic)
}

pub fn coherent_estimate_with(t: &SignificanceMatrix, s: usize, m: usize, ties: TieBreak) -> Result<SignalSubgraph> {
    CoherentSweep::new(t, m, ties)?.estimate(s)
}

/// The level sweep of the coherent estimator for a fixed vertex budget `m`,
/// reusable across edge budgets.
#[derive(Debug, Clone)]
pub struct CoherentSweep<'a> {
    matrix: &'a SignificanceMatrix,
    m: usize,
    ranking: Vec<usize>,
    vertex_order: Vec<usize>,
    /// Position in `ranking` one past the end of each level.
    level_ends: Vec<usize>,
    /// Sum of the `m` largest vertex counts after each level.
    top_sums: Vec<usize>,
}

impl<'a> CoherentSweep<'a> {
    pub fn new(matrix: &'a SignificanceMatrix, m: usize, ties: TieBreak) -> Result<Self> {
        let n = matrix.n_vertices;
        if m == 0 || m > n {
            return Err(Error::MOutOfRange { m, max: n });
        }
        let ranking = matrix.ranking(ties);
        // Vertex tie order: rank of each vertex when counts are equal.
        let vertex_order: Vec<usize> = match ties {
            TieBreak::Lexicographic => (0..n).collect(),
            TieBreak::Shuffled { seed } => {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15));
                let mut order = vec![0; n];
                for (rank, &v) in perm.iter().enumerate() {
                    order[v] = rank;
                }
                order
            }
        };
        let mut level_ends = Vec::new();
        let mut top_sums = Vec::new();
        let mut counts = vec![0usize; n];
        let mut scratch: Vec<usize> = (0..n).collect();
        let mut pos = 0;
        while pos < ranking.len() {
            let level = matrix.scores[ranking[pos]].score;
            while pos < ranking.len() && matrix.scores[ranking[pos]].score == level {
                let e = EdgeId::from_index(ranking[pos], n);
                counts[e.u] += 1;
                counts[e.v] += 1;
                pos += 1;
            }
            level_ends.push(pos);
            top_sums.push(top_m(&counts, &vertex_order, &mut scratch, m).iter().map(|&v| counts[v]).sum());
        }
        Ok(CoherentSweep { matrix, m, ranking, vertex_order, level_ends, top_sums })
    }

    /// Index of the strictest level at which the top-`m` vertices carry at
    /// least `s` incident significant edges.
    pub fn stopping_level(&self, s: usize) -> Option<usize> {
        let level = self.top_sums.partition_point(|&sum| sum < s);
        (level < self.top_sums.len()).then_some(level)
    }

    pub fn estimate(&self, s: usize) -> Result<SignalSubgraph> {
        let t = self.matrix;
        let n = t.n_vertices;
        check_s(t, s)?;
        let capacity = coherent_capacity(n, self.m);
        if s > capacity {
            return Err(Error::Infeasible { s, m: self.m, capacity });
        }
        let level = self.stopping_level(s).ok_or(Error::Infeasible { s, m: self.m, capacity })?;
        let mut counts = vec![0usize; n];
        for &slot in &self.ranking[..self.level_ends[level]] {
            let e = EdgeId::from_index(slot, n);
            counts[e.u] += 1;
            counts[e.v] += 1;
        }
        let mut scratch: Vec<usize> = (0..n).collect();
        let mut signal_vertices = top_m(&counts, &self.vertex_order, &mut scratch, self.m).to_vec();
        signal_vertices.sort_unstable();
        let mut is_signal = vec![false; n];
        for &v in &signal_vertices {
            is_signal[v] = true;
        }
        let mut edges: Vec<EdgeId> = self
            .ranking
            .iter()
            .map(|&slot| EdgeId::from_index(slot, n))
            .filter(|e| is_signal[e.u] || is_signal[e.v])
            .take(s)
            .collect();
        edges.sort();
        Ok(SignalSubgraph { n_vertices: n, edges, m: Some(self.m), vertices: Some(signal_vertices) })
    }
}

/// The `m` vertices with the largest counts (ties by `order`), in rank order.
fn top_m<'s>(counts: &[usize], order: &[usize], scratch: &'s mut [usize], m: usize) -> &'s [usize] {
    let cmp = |a: &usize, b: &usize| counts[*b].cmp(&counts[*a]).then(order[*a].cmp(&order[*b]));
    if m < scratch.len() {
        scratch.select_nth_unstable_by(m - 1, cmp);
    }
    scratch[..m].sort_by(cmp);
    &scratch[..m]
}

/// Vertex × level counts of incident edges at least as significant as the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherogram {
    /// Distinct scores, strictest first.
    pub levels: Vec<f64>,
    /// `counts[v][c]` = number of edges at vertex `v` with score ≥ `levels[c]`.
    pub counts: Vec<Vec<u32>>,
}

impl Coherogram {
    pub fn n_vertices(&self) -> usize {
        self.counts.len()
    }

    /// Vertices ordered by count at level `c`, largest first (ties by index).
    pub fn ranked_vertices(&self, c: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = (0..self.counts.len()).collect();
        vs.sort_by(|&a, &b| match self.counts[b][c].cmp(&self.counts[a][c]) {
            Ordering::Equal => a.cmp(&b),
            o => o,
        });
        vs
    }
}

pub fn coherogram(t: &SignificanceMatrix) -> Coherogram {
    let n = t.n_vertices;
    let ranking = t.ranking(TieBreak::Lexicographic);
    let levels = t.levels();
    let mut counts = vec![Vec::with_capacity(levels.len()); n];
    let mut running = vec![0u32; n];
    let mut pos = 0;
    for &level in &levels {
        while pos < ranking.len() && t.scores[ranking[pos]].score >= level {
            let e = EdgeId::from_index(ranking[pos], n);
            running[e.u] += 1;
            running[e.v] += 1;
            pos += 1;
        }
        for (row, &w) in counts.iter_mut().zip(&running) {
            row.push(w);
        }
    }
    Coherogram { levels, counts }
}
