//! Cross-validation, hyper-parameter search, estimator-quality metrics and
//! classifier significance tests.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::classify::{fit_from_counts, EtaBasis, FittedModel};
use crate::error::{Error, Result};
use crate::graph::{edge_slots, AdjacencyMatrix, ClassLabel, EdgeCounts, LabeledDataset};
use crate::sim::{rng_from_seed, sample_homogeneous, split_seed, HomogeneousModelSpec, SamplingMode};
use crate::stats::{significance_from_counts, TestStatisticKind};
use crate::subgraph::{coherent_capacity, incoherent_from_ranking, CoherentSweep, SignalSubgraph, TieBreak};

/// How the data is split for error estimation.
#[derive(Debug, Clone, PartialEq)]
pub enum CvScheme {
    /// `folds` near-equal folds of a seeded shuffle.
    KFold { folds: usize, seed: u64 },
    /// One fold per sample, in dataset order.
    LeaveOneOut,
    /// Train on everything, test on a separate dataset.
    HeldOut(LabeledDataset),
}

impl fmt::Display for CvScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CvScheme::KFold { folds, seed } => write!(f, "kfold:{folds}:{seed}"),
            CvScheme::LeaveOneOut => f.write_str("loo"),
            CvScheme::HeldOut(test) => write!(f, "heldout:{}", test.len()),
        }
    }
}

impl CvScheme {
    /// Held-out index sets of a dataset of `n` samples.
    pub fn folds(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        match *self {
            CvScheme::LeaveOneOut => Ok((0..n).map(|i| vec![i]).collect()),
            CvScheme::KFold { folds, seed } => {
                if folds < 2 || folds > n {
                    return Err(Error::InvalidArgument(format!("cannot split {n} samples into {folds} folds")));
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng_from_seed(seed));
                let (base, extra) = (n / folds, n % folds);
                let mut start = 0;
                Ok((0..folds)
                    .map(|c| {
                        let len = base + usize::from(c < extra);
                        let mut fold = order[start..start + len].to_vec();
                        fold.sort_unstable();
                        start += len;
                        fold
                    })
                    .collect())
            }
            CvScheme::HeldOut(_) => Ok(vec![]),
        }
    }
}

/// Which signal-subgraph estimator a classifier plugs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubgraphRule {
    /// The whole edge set.
    NaiveBayes,
    Incoherent { s: usize },
    Coherent { s: usize, m: usize },
}

impl SubgraphRule {
    /// `m = None` selects the incoherent estimator.
    pub fn from_budget(s: usize, m: Option<usize>) -> Self {
        match m {
            Some(m) => SubgraphRule::Coherent { s, m },
            None => SubgraphRule::Incoherent { s },
        }
    }

    pub fn s(&self) -> Option<usize> {
        match *self {
            SubgraphRule::NaiveBayes => None,
            SubgraphRule::Incoherent { s } | SubgraphRule::Coherent { s, .. } => Some(s),
        }
    }

    pub fn m(&self) -> Option<usize> {
        match *self {
            SubgraphRule::Coherent { m, .. } => Some(m),
            _ => None,
        }
    }

    /// Budget check that does not depend on the data.
    pub fn check(&self, n_vertices: usize) -> Result<()> {
        let d = edge_slots(n_vertices);
        match *self {
            SubgraphRule::NaiveBayes => Ok(()),
            SubgraphRule::Incoherent { s } => {
                if s == 0 || s > d {
                    return Err(Error::SOutOfRange { s, max: d });
                }
                Ok(())
            }
            SubgraphRule::Coherent { s, m } => {
                if s == 0 || s > d {
                    return Err(Error::SOutOfRange { s, max: d });
                }
                if m == 0 || m > n_vertices {
                    return Err(Error::MOutOfRange { m, max: n_vertices });
                }
                let capacity = coherent_capacity(n_vertices, m);
                if s > capacity {
                    return Err(Error::Infeasible { s, m, capacity });
                }
                Ok(())
            }
        }
    }
}

/// Training options shared by every fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub statistic: TestStatisticKind,
    pub eta_basis: EtaBasis,
    pub ties: TieBreak,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            statistic: TestStatisticKind::FisherExact,
            eta_basis: EtaBasis::Total,
            ties: TieBreak::Lexicographic,
        }
    }
}

impl TrainingConfig {
    pub fn with_statistic(statistic: TestStatisticKind) -> Self {
        TrainingConfig { statistic, ..Self::default() }
    }
}

/// Everything learned from one training split that does not depend on the budget.
struct Trainer<'a> {
    counts: EdgeCounts,
    cfg: &'a TrainingConfig,
    significance: Option<crate::subgraph::SignificanceMatrix>,
    ranking: Vec<usize>,
}

impl<'a> Trainer<'a> {
    fn new(counts: EdgeCounts, cfg: &'a TrainingConfig, needs_significance: bool) -> Result<Self> {
        for y in ClassLabel::BOTH {
            if counts.class_sizes()[y.index()] == 0 {
                return Err(Error::EmptyClass(y.into()));
            }
        }
        let (significance, ranking) = if needs_significance {
            let t = significance_from_counts(&counts, cfg.statistic)?;
            let ranking = t.ranking(cfg.ties);
            (Some(t), ranking)
        } else {
            (None, Vec::new())
        };
        Ok(Trainer { counts, cfg, significance, ranking })
    }

    fn model(&self, sg: &SignalSubgraph) -> Result<FittedModel> {
        let statistic = self.significance.as_ref().map(|_| self.cfg.statistic);
        fit_from_counts(&self.counts, sg, self.cfg.eta_basis, statistic)
    }

    /// Fits every rule; coherent rules sharing `m` share one level sweep.
    fn models(&self, rules: &[SubgraphRule]) -> Result<Vec<FittedModel>> {
        let n_vertices = self.counts.n_vertices();
        let mut sweeps: HashMap<usize, CoherentSweep<'_>> = HashMap::new();
        rules
            .iter()
            .map(|rule| {
                rule.check(n_vertices)?;
                let sg = match *rule {
                    SubgraphRule::NaiveBayes => SignalSubgraph::whole(n_vertices)?,
                    SubgraphRule::Incoherent { s } => {
                        let t = self.significance.as_ref().expect("significance computed for estimators");
                        incoherent_from_ranking(t, &self.ranking, s)
                    }
                    SubgraphRule::Coherent { s, m } => {
                        let t = self.significance.as_ref().expect("significance computed for estimators");
                        let sweep = match sweeps.entry(m) {
                            Entry::Occupied(e) => e.into_mut(),
                            Entry::Vacant(e) => e.insert(CoherentSweep::new(t, m, self.cfg.ties)?),
                        };
                        sweep.estimate(s)?
                    }
                };
                self.model(&sg)
            })
            .collect()
    }
}

fn needs_significance(rules: &[SubgraphRule]) -> bool {
    rules.iter().any(|r| !matches!(r, SubgraphRule::NaiveBayes))
}

/// Trains a classifier on the whole dataset.
pub fn train(ds: &LabeledDataset, cfg: &TrainingConfig, rule: SubgraphRule) -> Result<FittedModel> {
    let trainer = Trainer::new(EdgeCounts::from_dataset(ds), cfg, needs_significance(&[rule]))?;
    Ok(trainer.models(&[rule])?.remove(0))
}

/// One train/test split resolved against a dataset.
struct Split<'d> {
    train: EdgeCounts,
    test: Vec<(&'d AdjacencyMatrix, ClassLabel)>,
    /// Dataset positions of the test samples (None for a separate test set).
    positions: Option<Vec<usize>>,
}

fn splits<'d>(ds: &'d LabeledDataset, scheme: &'d CvScheme) -> Result<Vec<Split<'d>>> {
    if let CvScheme::HeldOut(test) = scheme {
        if test.n_vertices() != ds.n_vertices() {
            return Err(Error::DimensionMismatch { expected: ds.n_vertices(), found: test.n_vertices() });
        }
        return Ok(vec![Split { train: EdgeCounts::from_dataset(ds), test: test.iter().collect(), positions: None }]);
    }
    let folds = scheme.folds(ds.len())?;
    let mut held_out = vec![false; ds.len()];
    folds
        .into_iter()
        .enumerate()
        .map(|(c, fold)| {
            held_out.iter_mut().for_each(|h| *h = false);
            fold.iter().for_each(|&i| held_out[i] = true);
            let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| !held_out[i]).collect();
            let train = EdgeCounts::from_indices(ds, &train_idx);
            for y in ClassLabel::BOTH {
                if train.class_sizes()[y.index()] == 0 {
                    return Err(Error::DegenerateFold { fold: c, class: y.into() });
                }
            }
            let test = fold.iter().map(|&i| (&ds.graphs()[i], ds.labels()[i])).collect();
            Ok(Split { train, test, positions: Some(fold) })
        })
        .collect()
}

/// Cross-validated misclassification: the held-out error of each fold,
/// averaged over folds. A held-out scheme has a single fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scheme: String,
    pub statistic: Option<TestStatisticKind>,
    pub rule: SubgraphRule,
    pub error: f64,
    pub fold_errors: Vec<f64>,
    /// Predicted labels in dataset order (test-set order for held-out).
    pub predictions: Vec<ClassLabel>,
    pub truth: Vec<ClassLabel>,
    /// Error surface over the grid, when produced by a search.
    pub surface: Option<ErrorSurface>,
    /// Subgraph estimated from all training data at the reported budget.
    pub subgraph: Option<SignalSubgraph>,
    pub missed_edge_rate: Option<f64>,
}

impl EvaluationReport {
    /// Fills the missed-edge rate of the report's subgraph against a known truth.
    pub fn with_truth(mut self, truth: &SignalSubgraph) -> Result<Self> {
        if let Some(sg) = &self.subgraph {
            self.missed_edge_rate = Some(missed_edge_rate(truth, sg)?);
        }
        Ok(self)
    }
}

struct RuleOutcome {
    fold_errors: Vec<f64>,
    predictions: Vec<ClassLabel>,
    truth: Vec<ClassLabel>,
}

impl RuleOutcome {
    fn error(&self) -> f64 {
        self.fold_errors.iter().sum::<f64>() / self.fold_errors.len() as f64
    }
}

/// Runs every rule over every split; folds run in parallel.
fn run_rules(ds: &LabeledDataset, scheme: &CvScheme, cfg: &TrainingConfig, rules: &[SubgraphRule]) -> Result<Vec<RuleOutcome>> {
    for rule in rules {
        rule.check(ds.n_vertices())?;
    }
    let splits = splits(ds, scheme)?;
    let per_split: Vec<Vec<Vec<ClassLabel>>> = splits
        .par_iter()
        .map(|split| {
            let trainer = Trainer::new(split.train.clone(), cfg, needs_significance(rules))?;
            trainer
                .models(rules)?
                .iter()
                .map(|model| split.test.iter().map(|(g, _)| model.classify(g).map(|p| p.label)).collect())
                .collect::<Result<Vec<Vec<ClassLabel>>>>()
        })
        .collect::<Result<_>>()?;

    let n_out = match scheme {
        CvScheme::HeldOut(test) => test.len(),
        _ => ds.len(),
    };
    Ok((0..rules.len())
        .map(|r| {
            let mut predictions = vec![ClassLabel::Zero; n_out];
            let mut truth = vec![ClassLabel::Zero; n_out];
            let mut fold_errors = Vec::with_capacity(splits.len());
            for (split, preds) in splits.iter().zip(&per_split) {
                let preds = &preds[r];
                let wrong = preds.iter().zip(&split.test).filter(|(p, (_, y))| *p != y).count();
                fold_errors.push(wrong as f64 / preds.len() as f64);
                for (j, (&p, &(_, y))) in preds.iter().zip(&split.test).enumerate() {
                    let pos = split.positions.as_ref().map_or(j, |ps| ps[j]);
                    predictions[pos] = p;
                    truth[pos] = y;
                }
            }
            RuleOutcome { fold_errors, predictions, truth }
        })
        .collect())
}

/// Cross-validated error of one classifier.
pub fn cross_validated_error(
    ds: &LabeledDataset,
    scheme: &CvScheme,
    cfg: &TrainingConfig,
    rule: SubgraphRule,
) -> Result<EvaluationReport> {
    let outcome = run_rules(ds, scheme, cfg, &[rule])?.remove(0);
    let subgraph = match rule {
        SubgraphRule::NaiveBayes => None,
        _ => Some(train(ds, cfg, rule)?.subgraph().clone()),
    };
    Ok(EvaluationReport {
        scheme: scheme.to_string(),
        statistic: (!matches!(rule, SubgraphRule::NaiveBayes)).then_some(cfg.statistic),
        rule,
        error: outcome.error(),
        fold_errors: outcome.fold_errors,
        predictions: outcome.predictions,
        truth: outcome.truth,
        surface: None,
        subgraph,
        missed_edge_rate: None,
    })
}

/// The models trained for each fold (for a held-out scheme, the single
/// model trained on all of `ds`).
pub fn fold_models(ds: &LabeledDataset, scheme: &CvScheme, cfg: &TrainingConfig, rule: SubgraphRule) -> Result<Vec<FittedModel>> {
    splits(ds, scheme)?
        .into_iter()
        .map(|split| Trainer::new(split.train, cfg, needs_significance(&[rule]))?.models(&[rule]).map(|mut v| v.remove(0)))
        .collect()
}

/// Candidate budgets. An `m` equal to the vertex count means the incoherent estimator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperGrid {
    s_values: Vec<usize>,
    m_values: Vec<usize>,
}

impl HyperGrid {
    pub fn new(mut s_values: Vec<usize>, mut m_values: Vec<usize>) -> Result<Self> {
        s_values.sort_unstable();
        s_values.dedup();
        m_values.sort_unstable();
        m_values.dedup();
        if s_values.is_empty() || m_values.is_empty() || s_values[0] == 0 || m_values[0] == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(HyperGrid { s_values, m_values })
    }

    /// Incoherent-only grid for graphs on `n_vertices` vertices.
    pub fn incoherent(s_values: Vec<usize>, n_vertices: usize) -> Result<Self> {
        HyperGrid::new(s_values, vec![n_vertices])
    }

    pub fn s_values(&self) -> &[usize] {
        &self.s_values
    }

    pub fn m_values(&self) -> &[usize] {
        &self.m_values
    }

    fn rule(s: usize, m: usize, n_vertices: usize) -> SubgraphRule {
        if m >= n_vertices {
            SubgraphRule::Incoherent { s }
        } else {
            SubgraphRule::Coherent { s, m }
        }
    }
}

/// Cross-validated error at every grid point; `None` marks infeasible budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSurface {
    pub s_values: Vec<usize>,
    pub m_values: Vec<usize>,
    /// `errors[i][j]` is the error at `(s_values[i], m_values[j])`.
    pub errors: Vec<Vec<Option<f64>>>,
}

impl ErrorSurface {
    /// CSV with one row per `s` and one column per `m`; infeasible cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for m in &self.m_values {
            out.push_str(&format!(",m={m}"));
        }
        out.push('\n');
        for (s, row) in self.s_values.iter().zip(&self.errors) {
            out.push_str(&s.to_string());
            for e in row {
                out.push(',');
                if let Some(e) = e {
                    out.push_str(&e.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Smallest error, ties toward smaller `s` then smaller `m`.
    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, &s) in self.s_values.iter().enumerate() {
            for (j, &m) in self.m_values.iter().enumerate() {
                if let Some(e) = self.errors[i][j] {
                    if best.is_none_or(|(_, _, b)| e < b) {
                        best = Some((s, m, e));
                    }
                }
            }
        }
        best
    }
}

/// Result of a hyper-parameter search: the report at the chosen budget and
/// the final model refit on all training data.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub report: EvaluationReport,
    pub model: FittedModel,
}

/// Evaluates every feasible grid point and refits at the best one.
pub fn hyperparameter_search(
    ds: &LabeledDataset,
    scheme: &CvScheme,
    cfg: &TrainingConfig,
    grid: &HyperGrid,
) -> Result<SearchOutcome> {
    let n_vertices = ds.n_vertices();
    let mut cells = Vec::new();
    let mut rules = Vec::new();
    for (i, &s) in grid.s_values.iter().enumerate() {
        for (j, &m) in grid.m_values.iter().enumerate() {
            let rule = HyperGrid::rule(s, m.min(n_vertices), n_vertices);
            if rule.check(n_vertices).is_ok() {
                cells.push((i, j));
                rules.push(rule);
            }
        }
    }
    if rules.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let outcomes = run_rules(ds, scheme, cfg, &rules)?;
    let mut errors = vec![vec![None; grid.m_values.len()]; grid.s_values.len()];
    for (&(i, j), outcome) in cells.iter().zip(&outcomes) {
        errors[i][j] = Some(outcome.error());
    }
    let surface = ErrorSurface { s_values: grid.s_values.clone(), m_values: grid.m_values.clone(), errors };
    let (s, m, _) = surface.argmin().expect("at least one feasible cell");
    let best = cells
        .iter()
        .position(|&(i, j)| grid.s_values[i] == s && grid.m_values[j] == m)
        .expect("argmin is a feasible cell");
    let rule = rules[best];
    let outcome = &outcomes[best];
    let model = train(ds, cfg, rule)?;
    let report = EvaluationReport {
        scheme: scheme.to_string(),
        statistic: Some(cfg.statistic),
        rule,
        error: outcome.error(),
        fold_errors: outcome.fold_errors.clone(),
        predictions: outcome.predictions.clone(),
        truth: outcome.truth.clone(),
        surface: Some(surface),
        subgraph: Some(model.subgraph().clone()),
        missed_edge_rate: None,
    };
    Ok(SearchOutcome { report, model })
}

/// Fraction of true signal-edges absent from the estimate.
pub fn missed_edge_rate(truth: &SignalSubgraph, estimate: &SignalSubgraph) -> Result<f64> {
    if truth.n_vertices() != estimate.n_vertices() {
        return Err(Error::DimensionMismatch { expected: truth.n_vertices(), found: estimate.n_vertices() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let missed = truth.edges().iter().filter(|&&e| !estimate.contains(e)).count();
    Ok(missed as f64 / truth.len() as f64)
}

/// `(1 - r_inc) / (1 - r_coh)`.
pub fn relative_rate(r_inc: f64, r_coh: f64) -> Result<f64> {
    for r in [r_inc, r_coh] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("rate {r} is not in [0,1]")));
        }
    }
    if r_coh >= 1.0 {
        return Err(Error::DivisionDegenerate);
    }
    Ok((1.0 - r_inc) / (1.0 - r_coh))
}

/// Running minimum, so a noisy rate curve becomes non-increasing.
fn monotone(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut best = f64::INFINITY;
    curve
        .iter()
        .map(|&(n, r)| {
            best = best.min(r);
            (n, best)
        })
        .collect()
}

/// Rate of a non-increasing curve at `n`, linearly interpolated.
fn rate_at(curve: &[(f64, f64)], n: f64) -> f64 {
    let j = curve.partition_point(|&(x, _)| x < n);
    if j == 0 {
        return curve[0].1;
    }
    if j == curve.len() {
        return curve[j - 1].1;
    }
    let ((n0, r0), (n1, r1)) = (curve[j - 1], curve[j]);
    if n1 == n {
        return r1;
    }
    r0 + (r1 - r0) * (n - n0) / (n1 - n0)
}

/// Smallest (interpolated) sample size at which a non-increasing curve reaches `target`.
fn first_reaching(curve: &[(f64, f64)], target: f64) -> f64 {
    let Some(j) = curve.iter().position(|&(_, r)| r <= target) else {
        return f64::INFINITY;
    };
    if j == 0 {
        return curve[0].0;
    }
    let ((n0, r0), (n1, r1)) = (curve[j - 1], curve[j]);
    n0 + (r0 - target) * (n1 - n0) / (r0 - r1)
}

/// Samples the coherent estimator needs to match the incoherent estimator's
/// missed-edge rate at `n`, relative to the samples the incoherent estimator
/// itself needs for that rate. `+inf` when the coherent curve never gets there.
///
/// Both curves are made non-increasing by a running minimum first.
pub fn relative_efficiency(rate_curve_inc: &[(f64, f64)], rate_curve_coh: &[(f64, f64)], n: f64) -> Result<f64> {
    if rate_curve_inc.is_empty()
        || rate_curve_inc.len() != rate_curve_coh.len()
        || rate_curve_inc.iter().zip(rate_curve_coh).any(|(a, b)| a.0 != b.0)
        || rate_curve_inc.windows(2).any(|w| w[0].0 >= w[1].0)
    {
        return Err(Error::GridMismatch);
    }
    let (first, last) = (rate_curve_inc[0].0, rate_curve_inc[rate_curve_inc.len() - 1].0);
    if !(first..=last).contains(&n) {
        return Err(Error::GridMismatch);
    }
    let inc = monotone(rate_curve_inc);
    let coh = monotone(rate_curve_coh);
    let target = rate_at(&inc, n);
    Ok(first_reaching(&coh, target) / first_reaching(&inc, target))
}

/// Outcome of a label-permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub pvalue: f64,
    pub observed_error: f64,
    pub null_errors: Vec<f64>,
}

/// Compares the naïve Bayes cross-validated error on the true labels with
/// its distribution under `n_mc` seeded label permutations:
/// `p = (1 + #{permuted error ≤ observed}) / (n_mc + 1)`.
pub fn permutation_test_pvalue(
    ds: &LabeledDataset,
    scheme: &CvScheme,
    cfg: &TrainingConfig,
    n_mc: usize,
    seed: u64,
) -> Result<PermutationTest> {
    if n_mc < 19 {
        return Err(Error::InvalidArgument(format!("need at least 19 permutations, got {n_mc}")));
    }
    let observed_error = cross_validated_error(ds, scheme, cfg, SubgraphRule::NaiveBayes)?.error;
    let null_errors: Vec<f64> = (0..n_mc as u64)
        .into_par_iter()
        .map(|r| {
            let mut labels = ds.labels().to_vec();
            labels.shuffle(&mut rng_from_seed(split_seed(seed, r)));
            let permuted = ds.with_labels(labels)?;
            Ok(run_rules(&permuted, scheme, cfg, &[SubgraphRule::NaiveBayes])?.remove(0).error())
        })
        .collect::<Result<_>>()?;
    let as_good = null_errors.iter().filter(|&&e| e <= observed_error).count();
    Ok(PermutationTest { pvalue: (1 + as_good) as f64 / (n_mc + 1) as f64, observed_error, null_errors })
}

/// Exact two-sided McNemar test of two classifiers' paired predictions.
pub fn mcnemar_pvalue(preds_a: &[ClassLabel], preds_b: &[ClassLabel], truth: &[ClassLabel]) -> Result<f64> {
    if preds_a.len() != truth.len() || preds_b.len() != truth.len() {
        return Err(Error::LengthMismatch(format!(
            "{} and {} predictions for {} labels",
            preds_a.len(),
            preds_b.len(),
            truth.len()
        )));
    }
    let (mut b, mut c) = (0u64, 0u64);
    for ((a, bb), y) in preds_a.iter().zip(preds_b).zip(truth) {
        match (a == y, bb == y) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    let n = b + c;
    if n == 0 {
        return Ok(1.0);
    }
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let tail: f64 = (0..=b.min(c)).map(|i| (ln_binomial(n, i) + ln_half_n).exp()).sum();
    Ok((2.0 * tail).min(1.0))
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl MonteCarloEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        MonteCarloEstimate { mean, std_error: (var / n).sqrt(), trials: xs.len() }
    }
}

/// Error of the Bayes-optimal classifier, estimated by classifying `n_mc`
/// fresh draws with the true parameters.
pub fn bayes_error_mc(spec: &HomogeneousModelSpec, n_mc: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if n_mc == 0 {
        return Err(Error::EmptyInput);
    }
    let model = spec.true_model()?;
    let (ds, _) = sample_homogeneous(spec, n_mc, SamplingMode::PriorSampled, seed)?;
    let losses: Vec<f64> = ds
        .iter()
        .map(|(g, y)| model.classify(g).map(|p| f64::from(u8::from(p.label != y))))
        .collect::<Result<_>>()?;
    Ok(MonteCarloEstimate::from_samples(&losses))
}

/// Pearson correlation between the indicator columns of the subgraph's edges.
/// Constant columns correlate 0 with everything, themselves included.
pub fn edge_correlation_matrix(ds: &LabeledDataset, sg: &SignalSubgraph) -> Result<Vec<Vec<f64>>> {
    if ds.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: ds.len() });
    }
    if sg.n_vertices() != ds.n_vertices() {
        return Err(Error::DimensionMismatch { expected: ds.n_vertices(), found: sg.n_vertices() });
    }
    let n = ds.len() as f64;
    let columns: Vec<Vec<f64>> = sg
        .slots()
        .into_iter()
        .map(|slot| ds.graphs().iter().map(|g| f64::from(u8::from(g.has_slot(slot)))).collect())
        .collect();
    let centered: Vec<(Vec<f64>, f64)> = columns
        .into_iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / n;
            let c: Vec<f64> = col.into_iter().map(|x| x - mean).collect();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            (c, norm)
        })
        .collect();
    let k = centered.len();
    let mut corr = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let ((a, na), (b, nb)) = (&centered[i], &centered[j]);
            let r = if *na == 0.0 || *nb == 0.0 {
                0.0
            } else if i == j {
                1.0
            } else {
                a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
            };
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    Ok(corr)
}

/// Strict upper triangle of a square matrix, row-major.
pub fn off_diagonal(matrix: &[Vec<f64>]) -> Vec<f64> {
    matrix.iter().enumerate().flat_map(|(i, row)| row[i + 1..].iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    fn labels(bits: &[u8]) -> Vec<ClassLabel> {
        bits.iter().map(|&b| ClassLabel::try_from(b).unwrap()).collect()
    }

    #[test]
    fn kfold_partitions_evenly() {
        let folds = CvScheme::KFold { folds: 4, seed: 3 }.folds(10).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(CvScheme::KFold { folds: 11, seed: 0 }.folds(10).is_err());
    }

    #[test]
    fn missed_edges() {
        let truth = SignalSubgraph::new(4, [EdgeId::new(0, 1), EdgeId::new(0, 2)], None, None).unwrap();
        let disjoint = SignalSubgraph::new(4, [EdgeId::new(2, 3)], None, None).unwrap();
        let half = SignalSubgraph::new(4, [EdgeId::new(0, 1), EdgeId::new(2, 3)], None, None).unwrap();
        assert_eq!(missed_edge_rate(&truth, &truth).unwrap(), 0.0);
        assert_eq!(missed_edge_rate(&truth, &disjoint).unwrap(), 1.0);
        assert_eq!(missed_edge_rate(&truth, &half).unwrap(), 0.5);
    }

    #[test]
    fn relative_rates() {
        assert_eq!(relative_rate(0.3, 0.3).unwrap(), 1.0);
        assert!((relative_rate(0.5, 0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(relative_rate(0.5, 1.0), Err(Error::DivisionDegenerate)));
    }

    #[test]
    fn relative_efficiency_shapes() {
        let inc = [(8.0, 0.9), (16.0, 0.6), (32.0, 0.3), (64.0, 0.0), (128.0, 0.0)];
        for &(n, _) in &inc {
            assert_eq!(relative_efficiency(&inc, &inc, n).unwrap(), 1.0);
        }
        let coh = [(8.0, 0.8), (16.0, 0.4), (32.0, 0.1), (64.0, 0.0), (128.0, 0.0)];
        assert!(relative_efficiency(&inc, &coh, 16.0).unwrap() < 1.0);
        // Coherent reaches 0.6 halfway between 8 and 16.
        assert!((relative_efficiency(&inc, &coh, 16.0).unwrap() - 12.0 / 16.0).abs() < 1e-12);
        let never = [(8.0, 1.0), (16.0, 1.0), (32.0, 1.0), (64.0, 1.0), (128.0, 1.0)];
        assert!(relative_efficiency(&inc, &never, 32.0).unwrap().is_infinite());
        assert!(matches!(relative_efficiency(&inc, &coh[..3], 16.0), Err(Error::GridMismatch)));
    }

    #[test]
    fn mcnemar_examples() {
        let y = labels(&[1; 10]);
        assert_eq!(mcnemar_pvalue(&y, &y, &y).unwrap(), 1.0);
        // b = 1 (A right, B wrong), c = 5.
        let a = labels(&[1, 0, 0, 0, 0, 0]);
        let b = labels(&[0, 1, 1, 1, 1, 1]);
        let t = labels(&[1; 6]);
        assert!((mcnemar_pvalue(&a, &b, &t).unwrap() - 14.0 / 64.0).abs() < 1e-12);
        let a = labels(&[0; 10]);
        assert!((mcnemar_pvalue(&a, &y, &y).unwrap() - 2.0 / 1024.0).abs() < 1e-12);
        assert!(matches!(mcnemar_pvalue(&a, &y[..3], &y), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn correlation_of_constant_and_repeated_columns() {
        let e = EdgeId::new(0, 1);
        let f = EdgeId::new(1, 2);
        let graphs = vec![
            AdjacencyMatrix::from_edges(3, [e]).unwrap(),
            AdjacencyMatrix::empty(3),
            AdjacencyMatrix::from_edges(3, [e]).unwrap(),
        ];
        let ds = LabeledDataset::new(graphs, labels(&[0, 1, 0])).unwrap();
        let sg = SignalSubgraph::new(3, [e, f], None, None).unwrap();
        let c = edge_correlation_matrix(&ds, &sg).unwrap();
        assert_eq!(c[0][0], 1.0);
        assert_eq!(c[1][1], 0.0);
        assert_eq!(c[0][1], 0.0);
        assert!(matches!(edge_correlation_matrix(&ds.subset(&[0]).unwrap(), &sg), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn grid_normalizes() {
        let g = HyperGrid::new(vec![5, 1, 5, 3], vec![2, 1]).unwrap();
        assert_eq!(g.s_values(), &[1, 3, 5]);
        assert_eq!(g.m_values(), &[1, 2]);
        assert!(matches!(HyperGrid::new(vec![], vec![1]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn surface_argmin_prefers_small_budgets() {
        let surface = ErrorSurface {
            s_values: vec![1, 2, 3],
            m_values: vec![1, 2],
            errors: vec![vec![Some(0.4), None], vec![Some(0.2), Some(0.2)], vec![Some(0.2), Some(0.1)]],
        };
        assert_eq!(surface.argmin(), Some((3, 2, 0.1)));
        let tied = ErrorSurface { errors: vec![vec![Some(0.4), None], vec![Some(0.2), Some(0.2)], vec![Some(0.2), Some(0.2)]], ..surface };
        assert_eq!(tied.argmin(), Some((2, 1, 0.2)));
        assert_eq!(tied.to_csv().lines().next(), Some("s,m=1,m=2"));
        assert_eq!(tied.to_csv().lines().nth(1), Some("1,0.4,"));
    }
}
