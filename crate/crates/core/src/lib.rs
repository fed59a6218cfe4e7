//! Signal-subgraph estimation and graph classification.
//!
//! Graphs are simple, undirected and binary on a fixed vertex set. Edges are
//! ranked by a per-edge two-sample test of class difference; a classifier
//! uses only the most significant edges, optionally constrained to touch a
//! small set of signal vertices.

pub mod classify;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod sim;
pub mod stats;
pub mod subgraph;

pub use classify::{fit, fit_with, knn_frobenius_classify, EtaBasis, FittedModel, Prediction};
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    cross_validated_error, hyperparameter_search, train, CvScheme, EvaluationReport, HyperGrid, SubgraphRule,
    TrainingConfig,
};
pub use graph::{edge_index, AdjacencyMatrix, ClassLabel, ContingencyTable, EdgeId, LabeledDataset};
pub use sim::{sample_homogeneous, HomogeneousModelSpec, SamplingMode};
pub use stats::{significance_matrix, TestStatisticKind};
pub use subgraph::{
    coherent_estimate, coherogram, incoherent_estimate, Coherogram, SignalSubgraph, SignificanceMatrix, TieBreak,
};
