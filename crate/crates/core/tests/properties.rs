use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigsub_core::classify::fit;
use sigsub_core::eval::{
    cross_validated_error, fold_models, hyperparameter_search, mcnemar_pvalue, permutation_test_pvalue, CvScheme,
    HyperGrid, SubgraphRule, TrainingConfig,
};
use sigsub_core::graph::{edge_slots, AdjacencyMatrix, ClassLabel, EdgeCounts, EdgeId, LabeledDataset};
use sigsub_core::sim::{sample_homogeneous, HomogeneousModelSpec, SamplingMode};
use sigsub_core::subgraph::{coherent_estimate, incoherent_estimate, SignificanceMatrix};

fn random_matrix(n: usize, seed: u64, distinct_levels: u32) -> SignificanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores: Vec<f64> = (0..edge_slots(n)).map(|_| f64::from(rng.random_range(0..distinct_levels))).collect();
    SignificanceMatrix::from_scores(n, scores).unwrap()
}

fn dataset(v: usize, n: usize, seed: u64) -> LabeledDataset {
    let spec = HomogeneousModelSpec::new(v, 1, 3, 0.5, 0.2, 0.7).unwrap();
    sample_homogeneous(&spec, n, SamplingMode::balanced(n, 0.5), seed).unwrap().0
}

/// Keep everything above the s-th largest score, then fill from the tied
/// level in index order.
fn threshold_scan(scores: &[f64], s: usize) -> Vec<usize> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let tau = sorted[s - 1];
    let mut chosen: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > tau).collect();
    chosen.extend((0..scores.len()).filter(|&i| scores[i] == tau).take(s - chosen.len()));
    chosen.sort_unstable();
    chosen
}

/// Single-vertex estimator by direct search over levels and vertices.
fn star_oracle(t: &SignificanceMatrix, s: usize) -> Vec<usize> {
    let n = t.n_vertices();
    let scores: Vec<f64> = t.scores().iter().map(|x| x.score).collect();
    let mut levels = scores.clone();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    for level in levels {
        let degree = |v: usize| {
            (0..scores.len()).filter(|&i| scores[i] >= level && EdgeId::from_index(i, n).is_incident_to(v)).count()
        };
        let best = (0..n).max_by(|&a, &b| degree(a).cmp(&degree(b)).then(b.cmp(&a))).unwrap();
        if degree(best) >= s {
            let mut incident: Vec<usize> =
                (0..scores.len()).filter(|&i| EdgeId::from_index(i, n).is_incident_to(best)).collect();
            incident.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let mut chosen = incident[..s].to_vec();
            chosen.sort_unstable();
            return chosen;
        }
    }
    unreachable!("the loosest level admits every edge")
}

fn slots(sg: &sigsub_core::SignalSubgraph) -> Vec<usize> {
    sg.slots()
}

#[test]
fn incoherent_matches_threshold_scan() {
    for seed in 0..200 {
        let n = 3 + (seed as usize % 12);
        let t = random_matrix(n, seed, 1 + (seed % 7) as u32);
        let scores: Vec<f64> = t.scores().iter().map(|x| x.score).collect();
        for s in [1, t.len() / 2, t.len()] {
            let s = s.max(1);
            assert_eq!(slots(&incoherent_estimate(&t, s).unwrap()), threshold_scan(&scores, s), "seed {seed}, s {s}");
        }
    }
}

#[test]
fn coherent_single_vertex_matches_direct_search() {
    for seed in 0..300 {
        let n = 3 + (seed as usize % 6);
        let t = random_matrix(n, 1000 + seed, 2 + (seed % 5) as u32);
        for s in 1..n {
            assert_eq!(slots(&coherent_estimate(&t, s, 1).unwrap()), star_oracle(&t, s), "seed {seed}, s {s}");
        }
    }
}

proptest! {
    #[test]
    fn coherent_with_every_vertex_is_incoherent(n in 2usize..25, seed in any::<u64>(), levels in 1u32..10, frac in 0.0f64..1.0) {
        let t = random_matrix(n, seed, levels);
        let s = 1 + ((t.len() - 1) as f64 * frac) as usize;
        let coh = coherent_estimate(&t, s, n).unwrap();
        let inc = incoherent_estimate(&t, s).unwrap();
        prop_assert_eq!(coh.edges(), inc.edges());
    }

    #[test]
    fn coherent_estimate_respects_budgets(n in 3usize..20, seed in any::<u64>(), m in 1usize..4, frac in 0.0f64..1.0) {
        let m = m.min(n);
        let t = random_matrix(n, seed, 6);
        let cap = sigsub_core::subgraph::coherent_capacity(n, m);
        let s = 1 + ((cap - 1) as f64 * frac) as usize;
        let sg = coherent_estimate(&t, s, m).unwrap();
        prop_assert_eq!(sg.len(), s);
        let vs = sg.vertices().unwrap();
        prop_assert!(vs.len() <= m);
        prop_assert!(sg.edges().iter().all(|e| vs.contains(&e.u) || vs.contains(&e.v)));
    }

    #[test]
    fn edge_index_round_trips(n in 2usize..200, frac in 0.0f64..1.0) {
        let idx = ((edge_slots(n) - 1) as f64 * frac) as usize;
        let e = EdgeId::from_index(idx, n);
        prop_assert!(e.u < e.v && e.v < n);
        prop_assert_eq!(e.index(n), idx);
    }

    #[test]
    fn flipping_nuisance_edges_never_matters(seed in any::<u64>(), probe_seed in any::<u64>()) {
        let ds = dataset(9, 30, seed);
        let t = sigsub_core::significance_matrix(&ds, sigsub_core::TestStatisticKind::FisherExact).unwrap();
        let model = fit(&ds, &coherent_estimate(&t, 4, 1).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(probe_seed);
        let probe = AdjacencyMatrix::from_slots(9, (0..edge_slots(9)).map(|_| rng.random::<bool>()));
        let base = model.classify(&probe).unwrap();
        for e in sigsub_core::edge_index(9).unwrap() {
            if !model.subgraph().contains(e) {
                prop_assert_eq!(model.classify(&probe.toggled(e)).unwrap(), base);
            }
        }
    }

    #[test]
    fn counts_split_by_class(seed in any::<u64>(), n in 2usize..40) {
        let ds = dataset(6, n, seed);
        let counts = EdgeCounts::from_dataset(&ds);
        for y in ClassLabel::BOTH {
            let present: usize = (0..counts.slots()).map(|i| counts.present(y, i)).sum();
            let edges: usize = ds.iter().filter(|(_, l)| *l == y).map(|(g, _)| g.edge_count()).sum();
            prop_assert_eq!(present, edges);
        }
    }

    #[test]
    fn kfold_partitions(n in 2usize..200, folds in 2usize..12, seed in any::<u64>()) {
        prop_assume!(folds <= n);
        let parts = CvScheme::KFold { folds, seed }.folds(n).unwrap();
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn mcnemar_is_a_probability(bits in proptest::collection::vec(0u8..8, 1..60)) {
        let label = |b: u8| ClassLabel::try_from(b & 1).unwrap();
        let a: Vec<ClassLabel> = bits.iter().map(|&b| label(b)).collect();
        let b: Vec<ClassLabel> = bits.iter().map(|&b| label(b >> 1)).collect();
        let t: Vec<ClassLabel> = bits.iter().map(|&b| label(b >> 2)).collect();
        let p = mcnemar_pvalue(&a, &b, &t).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
    }
}

#[test]
fn leave_one_out_is_kfold_with_n_folds() {
    let ds = dataset(8, 24, 5);
    let cfg = TrainingConfig::default();
    for rule in [SubgraphRule::NaiveBayes, SubgraphRule::Incoherent { s: 4 }, SubgraphRule::Coherent { s: 4, m: 1 }] {
        let loo = cross_validated_error(&ds, &CvScheme::LeaveOneOut, &cfg, rule).unwrap();
        let kfold = cross_validated_error(&ds, &CvScheme::KFold { folds: 24, seed: 77 }, &cfg, rule).unwrap();
        assert_eq!(loo.predictions, kfold.predictions);
        assert!((loo.error - kfold.error).abs() < 1e-15);
        let wrong = loo.predictions.iter().zip(&loo.truth).filter(|(p, y)| p != y).count();
        assert!((loo.error - wrong as f64 / 24.0).abs() < 1e-15);
    }
}

#[test]
fn held_out_graphs_never_reach_their_fold() {
    let ds = dataset(8, 30, 11);
    let scheme = CvScheme::KFold { folds: 5, seed: 3 };
    let cfg = TrainingConfig::default();
    let rule = SubgraphRule::Coherent { s: 5, m: 1 };
    let before = fold_models(&ds, &scheme, &cfg, rule).unwrap();
    let folds = scheme.folds(ds.len()).unwrap();
    for (c, fold) in folds.iter().enumerate() {
        let mut graphs = ds.graphs().to_vec();
        for &i in fold {
            graphs[i] = AdjacencyMatrix::from_slots(8, (0..edge_slots(8)).map(|_| true));
        }
        let mutated = LabeledDataset::new(graphs, ds.labels().to_vec()).unwrap();
        let after = fold_models(&mutated, &scheme, &cfg, rule).unwrap();
        assert_eq!(before[c], after[c], "fold {c} saw its held-out graphs");
    }
}

#[test]
fn single_point_search_equals_cross_validation() {
    let ds = dataset(8, 30, 2);
    let scheme = CvScheme::KFold { folds: 5, seed: 1 };
    let cfg = TrainingConfig::default();
    let search = hyperparameter_search(&ds, &scheme, &cfg, &HyperGrid::new(vec![4], vec![1]).unwrap()).unwrap();
    let direct = cross_validated_error(&ds, &scheme, &cfg, SubgraphRule::Coherent { s: 4, m: 1 }).unwrap();
    assert_eq!(search.report.error, direct.error);
    assert_eq!(search.report.predictions, direct.predictions);
    assert_eq!(search.report.rule, direct.rule);
}

#[test]
fn search_skips_infeasible_cells() {
    let ds = dataset(6, 30, 4);
    let grid = HyperGrid::new(vec![3, 5, 9], vec![1, 2]).unwrap();
    let out = hyperparameter_search(&ds, &CvScheme::LeaveOneOut, &TrainingConfig::default(), &grid).unwrap();
    let surface = out.report.surface.unwrap();
    // One vertex covers at most 5 of the 15 edges, two cover 9.
    assert!(surface.errors[2][0].is_none());
    assert!(surface.errors[2][1].is_some());
    assert!(surface.errors[0].iter().all(Option::is_some));
}

#[test]
fn permutation_pvalue_is_add_one() {
    let ds = dataset(8, 40, 8);
    let scheme = CvScheme::KFold { folds: 5, seed: 0 };
    let out = permutation_test_pvalue(&ds, &scheme, &TrainingConfig::default(), 19, 1).unwrap();
    let as_good = out.null_errors.iter().filter(|&&e| e <= out.observed_error).count();
    assert_eq!(out.pvalue, (1 + as_good) as f64 / 20.0);
    assert!(out.pvalue > 0.0 && out.pvalue <= 1.0);
    assert!(permutation_test_pvalue(&ds, &scheme, &TrainingConfig::default(), 18, 1).is_err());
}

#[test]
fn degenerate_folds_are_reported() {
    let mut labels = vec![ClassLabel::Zero; 10];
    labels[0] = ClassLabel::One;
    let ds = LabeledDataset::new(dataset(6, 10, 1).graphs().to_vec(), labels).unwrap();
    let err = cross_validated_error(&ds, &CvScheme::LeaveOneOut, &TrainingConfig::default(), SubgraphRule::NaiveBayes)
        .unwrap_err();
    assert!(matches!(err, sigsub_core::Error::DegenerateFold { fold: 0, class: 1 }), "{err}");
}
