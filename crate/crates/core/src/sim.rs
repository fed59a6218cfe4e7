//! Samplers for the homogeneous two-class model and for data regenerated
//! from a fitted model, plus signal-subgraph counting.
//!
//! Random streams come from ChaCha8 seeded with a `u64`. Independent streams
//! (trials, permutations, folds) derive their seeds with [`split_seed`], so a
//! run is reproducible from one base seed regardless of how work is scheduled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::classify::{EtaBasis, FittedModel};
use crate::error::{Error, Result};
use crate::graph::{edge_index, edge_slots, AdjacencyMatrix, ClassLabel, EdgeId, LabeledDataset};
use crate::subgraph::{coherent_capacity, SignalSubgraph};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `stream`-th child of `seed`: the SplitMix64 finalizer applied
/// to `seed + (stream + 1) * 0x9E3779B97F4A7C15` (wrapping).
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Where the planted signal-subgraph sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Placement {
    /// Signal-vertices `0..m`, first `s` incident edges in index order.
    #[default]
    Lexicographic,
    /// The lexicographic layout under a random vertex relabelling.
    Random { seed: u64 },
}

/// The homogeneous model: class 0 is Erdős–Rényi(`p`); class 1 raises the
/// `s` planted edges (incident to `m` signal-vertices) to probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousModelSpec {
    pub n_vertices: usize,
    pub m: usize,
    pub s: usize,
    /// Prior of class 0.
    pub pi: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub placement: Placement,
}

impl HomogeneousModelSpec {
    pub fn new(n_vertices: usize, m: usize, s: usize, pi: f64, p: f64, q: f64) -> Result<Self> {
        let spec = HomogeneousModelSpec { n_vertices, m, s, pi, p, q, placement: Placement::Lexicographic };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleSpec(msg));
        if self.n_vertices < 2 {
            return bad(format!("V={} is too small", self.n_vertices));
        }
        if !(self.p > 0.0 && self.p < 1.0 && self.q > 0.0 && self.q < 1.0) {
            return bad(format!("p={} and q={} must lie strictly inside (0,1)", self.p, self.q));
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return bad(format!("pi={} is not a probability", self.pi));
        }
        if self.m == 0 || self.m > self.n_vertices {
            return bad(format!("m={} is outside 1..={}", self.m, self.n_vertices));
        }
        let capacity = coherent_capacity(self.n_vertices, self.m);
        if self.s == 0 || self.s > capacity {
            return bad(format!("s={} is outside 1..={capacity} for m={}", self.s, self.m));
        }
        Ok(())
    }

    /// Whether the two classes actually differ.
    pub fn has_signal(&self) -> bool {
        self.p != self.q
    }

    /// The planted edge set.
    pub fn signal_subgraph(&self) -> Result<SignalSubgraph> {
        self.validate()?;
        let relabel: Vec<usize> = match self.placement {
            Placement::Lexicographic => (0..self.n_vertices).collect(),
            Placement::Random { seed } => {
                let mut perm: Vec<usize> = (0..self.n_vertices).collect();
                perm.shuffle(&mut rng_from_seed(seed));
                perm
            }
        };
        let edges = edge_index(self.n_vertices)?
            .into_iter()
            .filter(|e| e.u < self.m)
            .take(self.s)
            .map(|e| EdgeId::new(relabel[e.u], relabel[e.v]));
        let vertices = (0..self.m).map(|v| relabel[v]).collect();
        SignalSubgraph::new(self.n_vertices, edges, Some(self.m), Some(vertices))
    }

    /// The true parameters as a plug-in model.
    pub fn true_model(&self) -> Result<FittedModel> {
        let truth = self.signal_subgraph()?;
        let likelihoods = vec![[self.p, self.q]; truth.len()];
        FittedModel::from_parameters(truth, likelihoods, [self.pi, 1.0 - self.pi], 0, [0.0; 2], EtaBasis::Total, None)
    }

    /// Per-slot edge probabilities for class 0 and class 1.
    fn slot_probabilities(&self, truth: &SignalSubgraph) -> [Vec<f64>; 2] {
        let slots = edge_slots(self.n_vertices);
        let class0 = vec![self.p; slots];
        let mut class1 = class0.clone();
        for slot in truth.slots() {
            class1[slot] = self.q;
        }
        [class0, class1]
    }
}

/// How class labels are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SamplingMode {
    /// Each label is an independent draw from the prior.
    PriorSampled,
    /// Exactly `n0` class-0 graphs followed by `n1` class-1 graphs.
    ClassConditioned { n0: usize, n1: usize },
}

impl SamplingMode {
    /// Class-conditioned split of `n` following the prior, rounding class 0 to nearest.
    pub fn balanced(n: usize, pi: f64) -> Self {
        let n0 = ((n as f64) * pi).round() as usize;
        SamplingMode::ClassConditioned { n0: n0.min(n), n1: n - n0.min(n) }
    }
}

fn sample_graph(n_vertices: usize, probabilities: &[f64], rng: &mut SimRng) -> AdjacencyMatrix {
    AdjacencyMatrix::from_slots(n_vertices, probabilities.iter().map(|&p| rng.random::<f64>() < p))
}

/// Draws a labeled dataset and returns it with the planted truth.
///
/// For each sample in order: the label is drawn (prior mode only), then every
/// edge slot in index order.
pub fn sample_homogeneous(
    spec: &HomogeneousModelSpec,
    n: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<(LabeledDataset, SignalSubgraph)> {
    let truth = spec.signal_subgraph()?;
    let labels: Vec<Option<ClassLabel>> = match mode {
        SamplingMode::PriorSampled => vec![None; n],
        SamplingMode::ClassConditioned { n0, n1 } => {
            if n0 + n1 != n {
                return Err(Error::InvalidArgument(format!("class sizes {n0}+{n1} do not sum to n={n}")));
            }
            std::iter::repeat_n(Some(ClassLabel::Zero), n0).chain(std::iter::repeat_n(Some(ClassLabel::One), n1)).collect()
        }
    };
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let probabilities = spec.slot_probabilities(&truth);
    let mut rng = rng_from_seed(seed);
    let mut graphs = Vec::with_capacity(n);
    let mut drawn = Vec::with_capacity(n);
    for fixed in labels {
        let y = fixed.unwrap_or_else(|| {
            if rng.random::<f64>() < spec.pi {
                ClassLabel::Zero
            } else {
                ClassLabel::One
            }
        });
        graphs.push(sample_graph(spec.n_vertices, &probabilities[y.index()], &mut rng));
        drawn.push(y);
    }
    Ok((LabeledDataset::new(graphs, drawn)?, truth))
}

/// Pooled per-edge frequencies `p̂_uv` over all samples, by slot.
pub fn pooled_edge_frequencies(ds: &LabeledDataset) -> Vec<f64> {
    let mut counts = vec![0usize; edge_slots(ds.n_vertices())];
    for g in ds.graphs() {
        for slot in g.present_slots() {
            counts[slot] += 1;
        }
    }
    counts.into_iter().map(|k| k as f64 / ds.len() as f64).collect()
}

/// Regenerates data from a fitted model: subgraph edges class-conditionally
/// from the model likelihoods, every other edge from `nuisance` (indexed by
/// slot) in both classes. Produces `n0` class-0 then `n1` class-1 graphs.
pub fn sample_from_fitted(model: &FittedModel, nuisance: &[f64], n0: usize, n1: usize, seed: u64) -> Result<LabeledDataset> {
    let n_vertices = model.n_vertices();
    let slots = edge_slots(n_vertices);
    if nuisance.len() != slots {
        return Err(Error::MissingNuisance { expected: slots, found: nuisance.len() });
    }
    if let Some(p) = nuisance.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("nuisance probability {p} is not in [0,1]")));
    }
    let mut probabilities = [nuisance.to_vec(), nuisance.to_vec()];
    for (e, lik) in model.subgraph().edges().iter().zip(model.likelihoods()) {
        let slot = e.index(n_vertices);
        probabilities[0][slot] = lik[0];
        probabilities[1][slot] = lik[1];
    }
    let mut rng = rng_from_seed(seed);
    let mut graphs = Vec::with_capacity(n0 + n1);
    let mut labels = Vec::with_capacity(n0 + n1);
    for (y, count) in [(ClassLabel::Zero, n0), (ClassLabel::One, n1)] {
        for _ in 0..count {
            graphs.push(sample_graph(n_vertices, &probabilities[y.index()], &mut rng));
            labels.push(y);
        }
    }
    LabeledDataset::new(graphs, labels)
}

/// Vertex constraint for [`subgraph_count_log2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgraphCountConstraint {
    /// Every subset of the edge set.
    Unconstrained,
    /// Exactly `s` edges.
    Edges { s: usize },
    /// `s` edges all incident to one chosen vertex. Counts ordered
    /// (vertex, edge set) choices, an upper bound on distinct subgraphs.
    SingleVertex { s: usize },
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / std::f64::consts::LN_2
}

/// `log2` of the number of candidate signal-subgraphs.
pub fn subgraph_count_log2(n_vertices: usize, constraint: SubgraphCountConstraint) -> Result<f64> {
    if n_vertices < 2 {
        return Err(Error::VTooSmall(n_vertices));
    }
    let d = edge_slots(n_vertices);
    match constraint {
        SubgraphCountConstraint::Unconstrained => Ok(d as f64),
        SubgraphCountConstraint::Edges { s } => {
            if s > d {
                return Err(Error::SOutOfRange { s, max: d });
            }
            Ok(log2_binomial(d, s))
        }
        SubgraphCountConstraint::SingleVertex { s } => {
            if s > n_vertices - 1 {
                return Err(Error::SOutOfRange { s, max: n_vertices - 1 });
            }
            Ok((n_vertices as f64).log2() + log2_binomial(n_vertices - 1, s))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_model() -> HomogeneousModelSpec {
        HomogeneousModelSpec::new(70, 1, 20, 0.5, 0.1, 0.3).unwrap()
    }

    #[test]
    fn planted_truth_is_a_star_on_vertex_zero() {
        let truth = paper_model().signal_subgraph().unwrap();
        assert_eq!(truth.len(), 20);
        assert!(truth.edges().iter().all(|e| e.u == 0));
        assert_eq!(truth.vertices(), Some(&[0][..]));
        let random = paper_model().with_placement(Placement::Random { seed: 5 }).signal_subgraph().unwrap();
        assert_eq!(random.len(), 20);
        let hub = random.vertices().unwrap()[0];
        assert!(random.edges().iter().all(|e| e.is_incident_to(hub)));
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        assert!(HomogeneousModelSpec::new(5, 1, 5, 0.5, 0.1, 0.3).is_err());
        assert!(HomogeneousModelSpec::new(5, 2, 7, 0.5, 0.1, 0.3).is_ok());
        assert!(HomogeneousModelSpec::new(5, 1, 2, 0.5, 0.0, 0.3).is_err());
        assert!(HomogeneousModelSpec::new(5, 1, 2, 1.5, 0.1, 0.3).is_err());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let spec = paper_model();
        let a = sample_homogeneous(&spec, 12, SamplingMode::PriorSampled, 42).unwrap();
        let b = sample_homogeneous(&spec, 12, SamplingMode::PriorSampled, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_homogeneous(&spec, 12, SamplingMode::PriorSampled, 43).unwrap();
        assert_ne!(a.0, c.0);
        let (ds, _) = sample_homogeneous(&spec, 10, SamplingMode::ClassConditioned { n0: 6, n1: 4 }, 1).unwrap();
        assert_eq!(ds.class_counts(), [6, 4]);
    }

    #[test]
    fn split_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| split_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn subgraph_counts() {
        assert_eq!(subgraph_count_log2(70, SubgraphCountConstraint::Unconstrained).unwrap(), 2415.0);
        assert!((subgraph_count_log2(3, SubgraphCountConstraint::Edges { s: 1 }).unwrap() - 3f64.log2()).abs() < 1e-12);
        // 5 choices of hub times C(4,2) = 6 edge pairs.
        let enumerated = (0..5).map(|_| (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).count()).sum::<usize>();
        assert_eq!(enumerated, 30);
        let got = subgraph_count_log2(5, SubgraphCountConstraint::SingleVertex { s: 2 }).unwrap();
        assert!((got - (enumerated as f64).log2()).abs() < 1e-12);
        assert!(subgraph_count_log2(5, SubgraphCountConstraint::SingleVertex { s: 5 }).is_err());
        assert!(subgraph_count_log2(3, SubgraphCountConstraint::Edges { s: 4 }).is_err());
    }

    #[test]
    fn fitted_sampler_checks_nuisance_length() {
        let model = paper_model().true_model().unwrap();
        assert!(matches!(
            sample_from_fitted(&model, &[0.1; 10], 2, 2, 0),
            Err(Error::MissingNuisance { expected: 2415, found: 10 })
        ));
        let ds = sample_from_fitted(&model, &vec![0.2; 2415], 25, 24, 3).unwrap();
        assert_eq!(ds.class_counts(), [25, 24]);
    }
}
