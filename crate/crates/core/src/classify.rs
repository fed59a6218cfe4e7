//! Smoothed likelihood and prior estimates, the Bayes plug-in classifier and
//! a Frobenius-distance nearest-neighbour baseline.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, ClassLabel, EdgeCounts, EdgeId, LabeledDataset};
use crate::stats::TestStatisticKind;
use crate::subgraph::SignalSubgraph;

/// Which sample size enters the smoothing constant `η = 1/(10 n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaBasis {
    /// Total training size `n`.
    #[default]
    Total,
    /// Class size `n_y`.
    PerClass,
}

impl EtaBasis {
    pub fn eta(self, class_sizes: [usize; 2]) -> [f64; 2] {
        match self {
            EtaBasis::Total => {
                let eta = 1.0 / (10.0 * (class_sizes[0] + class_sizes[1]) as f64);
                [eta, eta]
            }
            EtaBasis::PerClass => class_sizes.map(|n| 1.0 / (10.0 * n as f64)),
        }
    }
}

/// `[p̂_{e|0}, p̂_{e|1}]` for every edge of the subgraph, in subgraph order.
pub fn estimate_likelihoods(ds: &LabeledDataset, sg: &SignalSubgraph, basis: EtaBasis) -> Result<Vec<[f64; 2]>> {
    likelihoods_from_counts(&EdgeCounts::from_dataset(ds), sg, basis)
}

pub fn likelihoods_from_counts(counts: &EdgeCounts, sg: &SignalSubgraph, basis: EtaBasis) -> Result<Vec<[f64; 2]>> {
    let sizes = counts.class_sizes();
    for y in ClassLabel::BOTH {
        if sizes[y.index()] == 0 {
            return Err(Error::EmptyClass(y.into()));
        }
    }
    if sg.n_vertices() != counts.n_vertices() {
        return Err(Error::DimensionMismatch { expected: counts.n_vertices(), found: sg.n_vertices() });
    }
    let eta = basis.eta(sizes);
    Ok(sg
        .slots()
        .into_iter()
        .map(|slot| {
            ClassLabel::BOTH.map(|y| {
                let (k, n) = (counts.present(y, slot), sizes[y.index()]);
                if k == 0 {
                    eta[y.index()]
                } else if k == n {
                    1.0 - eta[y.index()]
                } else {
                    k as f64 / n as f64
                }
            })
        })
        .collect())
}

/// Class frequencies `[n_0/n, n_1/n]`.
pub fn estimate_priors(ds: &LabeledDataset) -> Result<[f64; 2]> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let [n0, n1] = ds.class_counts();
    let n = (n0 + n1) as f64;
    Ok([n0 as f64 / n, n1 as f64 / n])
}

/// Everything the plug-in classifier needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelDocument", try_from = "ModelDocument")]
pub struct FittedModel {
    subgraph: SignalSubgraph,
    likelihoods: Vec<[f64; 2]>,
    priors: [f64; 2],
    n: usize,
    eta: [f64; 2],
    eta_basis: EtaBasis,
    statistic: Option<TestStatisticKind>,
    /// Per edge: `[ln p̂_0, ln p̂_1]` and `[ln(1-p̂_0), ln(1-p̂_1)]`.
    log_present: Vec<[f64; 2]>,
    log_absent: Vec<[f64; 2]>,
    slots: Vec<usize>,
}

/// Result of classifying one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ClassLabel,
    /// `log posterior(1) - log posterior(0)`, up to the shared evidence term.
    pub margin: f64,
}

impl FittedModel {
    /// Assembles a model from explicit parameters, e.g. the true parameters
    /// of a simulation.
    pub fn from_parameters(
        subgraph: SignalSubgraph,
        likelihoods: Vec<[f64; 2]>,
        priors: [f64; 2],
        n: usize,
        eta: [f64; 2],
        eta_basis: EtaBasis,
        statistic: Option<TestStatisticKind>,
    ) -> Result<Self> {
        if likelihoods.len() != subgraph.len() {
            return Err(Error::LengthMismatch(format!(
                "{} likelihood pairs for {} subgraph edges",
                likelihoods.len(),
                subgraph.len()
            )));
        }
        if let Some(p) = likelihoods.iter().flatten().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidArgument(format!("likelihood {p} is not strictly inside (0,1)")));
        }
        if priors.iter().any(|p| !(0.0..=1.0).contains(p)) || (priors[0] + priors[1] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("priors {priors:?} are not a distribution")));
        }
        let log_present = likelihoods.iter().map(|l| l.map(f64::ln)).collect();
        let log_absent = likelihoods.iter().map(|l| l.map(|p| (1.0 - p).ln())).collect();
        let slots = subgraph.slots();
        Ok(FittedModel { subgraph, likelihoods, priors, n, eta, eta_basis, statistic, log_present, log_absent, slots })
    }

    pub fn subgraph(&self) -> &SignalSubgraph {
        &self.subgraph
    }

    pub fn likelihoods(&self) -> &[[f64; 2]] {
        &self.likelihoods
    }

    pub fn likelihood(&self, e: EdgeId) -> Option<[f64; 2]> {
        self.subgraph.edges().binary_search(&e).ok().map(|i| self.likelihoods[i])
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> [f64; 2] {
        self.eta
    }

    pub fn statistic(&self) -> Option<TestStatisticKind> {
        self.statistic
    }

    pub fn n_vertices(&self) -> usize {
        self.subgraph.n_vertices()
    }

    /// Unnormalized log posteriors `[ln π̂_0 + ..., ln π̂_1 + ...]`.
    pub fn log_scores(&self, g: &AdjacencyMatrix) -> Result<[f64; 2]> {
        if g.n_vertices() != self.n_vertices() {
            return Err(Error::DimensionMismatch { expected: self.n_vertices(), found: g.n_vertices() });
        }
        let mut scores = self.priors.map(f64::ln);
        for (i, &slot) in self.slots.iter().enumerate() {
            let terms = if g.has_slot(slot) { self.log_present[i] } else { self.log_absent[i] };
            scores[0] += terms[0];
            scores[1] += terms[1];
        }
        Ok(scores)
    }

    pub fn classify(&self, g: &AdjacencyMatrix) -> Result<Prediction> {
        let [s0, s1] = self.log_scores(g)?;
        let label = if s1 > s0 { ClassLabel::One } else { ClassLabel::Zero };
        Ok(Prediction { label, margin: s1 - s0 })
    }
}

/// Fits likelihoods and priors for a given subgraph.
pub fn fit(ds: &LabeledDataset, sg: &SignalSubgraph) -> Result<FittedModel> {
    fit_with(ds, sg, EtaBasis::Total, None)
}

pub fn fit_with(
    ds: &LabeledDataset,
    sg: &SignalSubgraph,
    basis: EtaBasis,
    statistic: Option<TestStatisticKind>,
) -> Result<FittedModel> {
    fit_from_counts(&EdgeCounts::from_dataset(ds), sg, basis, statistic)
}

pub fn fit_from_counts(
    counts: &EdgeCounts,
    sg: &SignalSubgraph,
    basis: EtaBasis,
    statistic: Option<TestStatisticKind>,
) -> Result<FittedModel> {
    let likelihoods = likelihoods_from_counts(counts, sg, basis)?;
    let sizes = counts.class_sizes();
    let n = counts.total();
    let priors = sizes.map(|k| k as f64 / n as f64);
    FittedModel::from_parameters(sg.clone(), likelihoods, priors, n, basis.eta(sizes), basis, statistic)
}

/// Classifies one graph with a fitted model.
pub fn classify(model: &FittedModel, g: &AdjacencyMatrix) -> Result<Prediction> {
    model.classify(g)
}

/// k-nearest-neighbour vote under the Frobenius distance between adjacency matrices.
pub fn knn_frobenius_classify(train: &LabeledDataset, g: &AdjacencyMatrix, k: usize) -> Result<ClassLabel> {
    if k == 0 || k > train.len() {
        return Err(Error::KOutOfRange { k, n: train.len() });
    }
    if g.n_vertices() != train.n_vertices() {
        return Err(Error::DimensionMismatch { expected: train.n_vertices(), found: g.n_vertices() });
    }
    // Frobenius distance is monotone in the Hamming distance; compare integers.
    let mut neighbours: Vec<(usize, usize)> =
        train.graphs().iter().enumerate().map(|(i, h)| (h.hamming(g), i)).collect();
    neighbours.sort_unstable();
    let nearest = &neighbours[..k];
    let ones = nearest.iter().filter(|&&(_, i)| train.labels()[i] == ClassLabel::One).count();
    Ok(match (2 * ones).cmp(&k) {
        std::cmp::Ordering::Greater => ClassLabel::One,
        std::cmp::Ordering::Less => ClassLabel::Zero,
        std::cmp::Ordering::Equal => train.labels()[nearest[0].1],
    })
}

/// On-disk JSON layout of a [`FittedModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelDocument {
    n_vertices: usize,
    subgraph: SubgraphDocument,
    /// Keyed by `"u,v"`.
    likelihoods: IndexMap<String, [f64; 2]>,
    priors: [f64; 2],
    n: usize,
    eta: [f64; 2],
    eta_basis: EtaBasis,
    statistic: Option<TestStatisticKind>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SubgraphDocument {
    s: usize,
    m: Option<usize>,
    vertices: Option<Vec<usize>>,
}

impl From<FittedModel> for ModelDocument {
    fn from(model: FittedModel) -> Self {
        let likelihoods =
            model.subgraph.edges().iter().zip(&model.likelihoods).map(|(e, &l)| (e.to_string(), l)).collect();
        ModelDocument {
            n_vertices: model.n_vertices(),
            subgraph: SubgraphDocument {
                s: model.subgraph.s(),
                m: model.subgraph.m(),
                vertices: model.subgraph.vertices().map(<[usize]>::to_vec),
            },
            likelihoods,
            priors: model.priors,
            n: model.n,
            eta: model.eta,
            eta_basis: model.eta_basis,
            statistic: model.statistic,
        }
    }
}

impl TryFrom<ModelDocument> for FittedModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let mut pairs = Vec::with_capacity(doc.likelihoods.len());
        for (key, lik) in doc.likelihoods {
            let parsed = key
                .split_once(',')
                .and_then(|(u, v)| Some((u.trim().parse::<usize>().ok()?, v.trim().parse::<usize>().ok()?)));
            let Some((u, v)) = parsed else {
                return Err(Error::InvalidArgument(format!("bad edge key {key:?}")));
            };
            pairs.push((EdgeId::checked(u, v, doc.n_vertices)?, lik));
        }
        pairs.sort_by_key(|&(e, _)| e);
        let sg = SignalSubgraph::new(doc.n_vertices, pairs.iter().map(|&(e, _)| e), doc.subgraph.m, doc.subgraph.vertices)?;
        if sg.s() != doc.subgraph.s || sg.len() != pairs.len() {
            return Err(Error::InvalidArgument("subgraph size does not match likelihood table".into()));
        }
        FittedModel::from_parameters(
            sg,
            pairs.into_iter().map(|(_, l)| l).collect(),
            doc.priors,
            doc.n,
            doc.eta,
            doc.eta_basis,
            doc.statistic,
        )
    }
}
