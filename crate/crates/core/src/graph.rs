//! Graph and dataset types shared by every estimator.
//!
//! Graphs are simple: undirected, binary, no self-loops. Vertices are
//! 0-indexed and the `V(V-1)/2` possible edges are numbered in lexicographic
//! `(u, v)` order with `u < v`.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of possible edges in a simple graph on `n_vertices` vertices.
pub fn edge_slots(n_vertices: usize) -> usize {
    n_vertices * n_vertices.saturating_sub(1) / 2
}

/// An undirected vertex pair with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub u: usize,
    pub v: usize,
}

impl EdgeId {
    /// Builds the canonical pair from two distinct vertices in either order.
    ///
    /// Panics if `a == b`.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "self-loops are not edges of a simple graph");
        if a < b {
            EdgeId { u: a, v: b }
        } else {
            EdgeId { u: b, v: a }
        }
    }

    /// Like [`EdgeId::new`] but checked against a vertex count.
    pub fn checked(a: usize, b: usize, n_vertices: usize) -> Result<Self> {
        if a == b || a >= n_vertices || b >= n_vertices {
            return Err(Error::EdgeOutOfRange { u: a, v: b, n_vertices });
        }
        Ok(EdgeId::new(a, b))
    }

    /// Linear index in lexicographic order.
    pub fn index(self, n_vertices: usize) -> usize {
        debug_assert!(self.u < self.v && self.v < n_vertices);
        self.u * (2 * n_vertices - self.u - 1) / 2 + (self.v - self.u - 1)
    }

    /// Inverse of [`EdgeId::index`].
    pub fn from_index(index: usize, n_vertices: usize) -> Self {
        debug_assert!(index < edge_slots(n_vertices));
        let mut u = 0;
        let mut start = 0;
        loop {
            let row = n_vertices - 1 - u;
            if index < start + row {
                return EdgeId { u, v: u + 1 + (index - start) };
            }
            start += row;
            u += 1;
        }
    }

    pub fn is_incident_to(self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.u, self.v)
    }
}

/// All edge slots of a `n_vertices`-vertex simple graph in index order.
pub fn edge_index(n_vertices: usize) -> Result<Vec<EdgeId>> {
    if n_vertices < 2 {
        return Err(Error::VTooSmall(n_vertices));
    }
    Ok((0..n_vertices)
        .flat_map(|u| (u + 1..n_vertices).map(move |v| EdgeId { u, v }))
        .collect())
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ClassLabel {
    Zero,
    One,
}

impl ClassLabel {
    pub const BOTH: [ClassLabel; 2] = [ClassLabel::Zero, ClassLabel::One];

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Zero => 0,
            ClassLabel::One => 1,
        }
    }
}

impl From<ClassLabel> for u8 {
    fn from(y: ClassLabel) -> u8 {
        y.index() as u8
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        match value {
            0 => Ok(ClassLabel::Zero),
            1 => Ok(ClassLabel::One),
            other => Err(format!("class label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A simple graph stored as a bit per edge slot.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n_vertices: usize,
    bits: FixedBitSet,
}

impl fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdjacencyMatrix")
            .field("n_vertices", &self.n_vertices)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl AdjacencyMatrix {
    /// Validates a dense integer matrix.
    ///
    /// Entries are scanned row-major; the first offending entry is reported.
    /// Asymmetry is reported at the lower-triangle position.
    pub fn validate<R: AsRef<[i64]>>(raw: &[R]) -> Result<Self> {
        let n = raw.len();
        for (row, r) in raw.iter().enumerate() {
            if r.as_ref().len() != n {
                return Err(Error::NotSquare { row, len: r.as_ref().len(), expected: n });
            }
        }
        if n == 0 {
            return Err(Error::VTooSmall(0));
        }
        let mut bits = FixedBitSet::with_capacity(edge_slots(n));
        for (i, r) in raw.iter().enumerate() {
            for (j, &value) in r.as_ref().iter().enumerate() {
                if value != 0 && value != 1 {
                    return Err(Error::NotBinary { row: i, col: j, value });
                }
                if i == j && value != 0 {
                    return Err(Error::NonzeroDiagonal { index: i });
                }
                if i > j && value != raw[j].as_ref()[i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                if i < j && value == 1 {
                    bits.insert(EdgeId { u: i, v: j }.index(n));
                }
            }
        }
        Ok(AdjacencyMatrix { n_vertices: n, bits })
    }

    pub fn empty(n_vertices: usize) -> Self {
        AdjacencyMatrix { n_vertices, bits: FixedBitSet::with_capacity(edge_slots(n_vertices)) }
    }

    pub fn from_edges(n_vertices: usize, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut g = AdjacencyMatrix::empty(n_vertices);
        for e in edges {
            if e.u >= e.v || e.v >= n_vertices {
                return Err(Error::EdgeOutOfRange { u: e.u, v: e.v, n_vertices });
            }
            g.bits.insert(e.index(n_vertices));
        }
        Ok(g)
    }

    /// Builds a graph from one flag per edge slot, in index order.
    pub fn from_slots(n_vertices: usize, slots: impl IntoIterator<Item = bool>) -> Self {
        let mut g = AdjacencyMatrix::empty(n_vertices);
        for (i, present) in slots.into_iter().enumerate().take(edge_slots(n_vertices)) {
            if present {
                g.bits.insert(i);
            }
        }
        g
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_slots(&self) -> usize {
        edge_slots(self.n_vertices)
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones(..)
    }

    /// Entry `a_uv` of the adjacency matrix.
    pub fn get(&self, u: usize, v: usize) -> bool {
        u != v && self.has_edge(EdgeId::new(u, v))
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.bits.contains(e.index(self.n_vertices))
    }

    pub fn has_slot(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    /// Linear indices of present edges, ascending.
    pub fn present_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let n = self.n_vertices;
        self.bits.ones().map(move |i| EdgeId::from_index(i, n))
    }

    /// Copy of this graph with one edge flipped.
    pub fn toggled(&self, e: EdgeId) -> Self {
        let mut g = self.clone();
        g.bits.toggle(e.index(self.n_vertices));
        g
    }

    /// Number of edge slots where the two graphs differ.
    pub fn hamming(&self, other: &AdjacencyMatrix) -> usize {
        self.bits.symmetric_difference_count(&other.bits)
    }

    /// Frobenius norm of the difference of the two adjacency matrices.
    pub fn frobenius_distance(&self, other: &AdjacencyMatrix) -> f64 {
        (2.0 * self.hamming(other) as f64).sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.n_vertices;
        let mut rows = vec![vec![0u8; n]; n];
        for e in self.edges() {
            rows[e.u][e.v] = 1;
            rows[e.v][e.u] = 1;
        }
        rows
    }
}

/// Validates a raw integer matrix as a simple graph.
pub fn validate_graph<R: AsRef<[i64]>>(raw: &[R]) -> Result<AdjacencyMatrix> {
    AdjacencyMatrix::validate(raw)
}

/// Counts for one edge: presence per class and class sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub k0: usize,
    pub k1: usize,
    pub n0: usize,
    pub n1: usize,
}

impl ContingencyTable {
    pub fn new(k0: usize, k1: usize, n0: usize, n1: usize) -> Result<Self> {
        if k0 > n0 || k1 > n1 {
            return Err(Error::InvalidArgument(format!(
                "contingency counts ({k0},{k1}) exceed class sizes ({n0},{n1})"
            )));
        }
        Ok(ContingencyTable { k0, k1, n0, n1 })
    }

    pub fn total(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn edge_total(&self) -> usize {
        self.k0 + self.k1
    }

    /// The same table with the class columns swapped.
    pub fn mirrored(&self) -> Self {
        ContingencyTable { k0: self.k1, k1: self.k0, n0: self.n1, n1: self.n0 }
    }
}

/// Graphs with binary labels, all on the same vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    graphs: Vec<AdjacencyMatrix>,
    labels: Vec<ClassLabel>,
}

impl LabeledDataset {
    pub fn new(graphs: Vec<AdjacencyMatrix>, labels: Vec<ClassLabel>) -> Result<Self> {
        if graphs.len() != labels.len() {
            return Err(Error::LabelCountMismatch { graphs: graphs.len(), labels: labels.len() });
        }
        let Some(first) = graphs.first() else {
            return Err(Error::EmptyDataset);
        };
        let n_vertices = first.n_vertices();
        if let Some(g) = graphs.iter().find(|g| g.n_vertices() != n_vertices) {
            return Err(Error::DimensionMismatch { expected: n_vertices, found: g.n_vertices() });
        }
        Ok(LabeledDataset { graphs, labels })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.graphs[0].n_vertices()
    }

    pub fn graphs(&self) -> &[AdjacencyMatrix] {
        &self.graphs
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AdjacencyMatrix, ClassLabel)> {
        self.graphs.iter().zip(self.labels.iter().copied())
    }

    /// `[n_0, n_1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&y| y == ClassLabel::One).count();
        [self.len() - ones, ones]
    }

    /// Errors with `EmptyClass` unless both classes are represented.
    pub fn require_both_classes(&self) -> Result<[usize; 2]> {
        let counts = self.class_counts();
        for y in ClassLabel::BOTH {
            if counts[y.index()] == 0 {
                return Err(Error::EmptyClass(y.into()));
            }
        }
        Ok(counts)
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        LabeledDataset::new(
            indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    pub fn with_labels(&self, labels: Vec<ClassLabel>) -> Result<Self> {
        LabeledDataset::new(self.graphs.clone(), labels)
    }
}

/// Per-edge presence counts for both classes; every contingency table at once.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCounts {
    n_vertices: usize,
    class_sizes: [usize; 2],
    present: [Vec<u32>; 2],
}

impl EdgeCounts {
    pub fn from_dataset(ds: &LabeledDataset) -> Self {
        Self::from_samples(ds.n_vertices(), ds.iter())
    }

    /// Counts over the samples at `indices` only.
    pub fn from_indices(ds: &LabeledDataset, indices: &[usize]) -> Self {
        Self::from_samples(ds.n_vertices(), indices.iter().map(|&i| (&ds.graphs[i], ds.labels[i])))
    }

    fn from_samples<'a>(n_vertices: usize, samples: impl Iterator<Item = (&'a AdjacencyMatrix, ClassLabel)>) -> Self {
        let slots = edge_slots(n_vertices);
        let mut present = [vec![0u32; slots], vec![0u32; slots]];
        let mut class_sizes = [0usize; 2];
        for (g, y) in samples {
            class_sizes[y.index()] += 1;
            let counts = &mut present[y.index()];
            for i in g.present_slots() {
                counts[i] += 1;
            }
        }
        EdgeCounts { n_vertices, class_sizes, present }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn class_sizes(&self) -> [usize; 2] {
        self.class_sizes
    }

    pub fn total(&self) -> usize {
        self.class_sizes[0] + self.class_sizes[1]
    }

    pub fn present(&self, y: ClassLabel, slot: usize) -> usize {
        self.present[y.index()][slot] as usize
    }

    pub fn table(&self, slot: usize) -> ContingencyTable {
        ContingencyTable {
            k0: self.present[0][slot] as usize,
            k1: self.present[1][slot] as usize,
            n0: self.class_sizes[0],
            n1: self.class_sizes[1],
        }
    }

    pub fn slots(&self) -> usize {
        self.present[0].len()
    }
}

/// Contingency table of one edge over a dataset.
pub fn contingency_table(ds: &LabeledDataset, e: EdgeId) -> Result<ContingencyTable> {
    let n = ds.n_vertices();
    if e.u >= e.v || e.v >= n {
        return Err(Error::EdgeOutOfRange { u: e.u, v: e.v, n_vertices: n });
    }
    let [n0, n1] = ds.class_counts();
    let mut k = [0usize; 2];
    for (g, y) in ds.iter() {
        if g.has_edge(e) {
            k[y.index()] += 1;
        }
    }
    Ok(ContingencyTable { k0: k[0], k1: k[1], n0, n1 })
}
