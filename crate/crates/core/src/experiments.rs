//! Scaled simulation studies behind each reproducible figure.
//!
//! Every driver is a pure function of its config and seed. Trials fan out
//! over rayon with per-trial seeds from [`split_seed`], and results are
//! collected in trial order, so output does not depend on the worker count.
//!
//! Budgets:
//!
//! | figure | desk | full |
//! |---|---|---|
//! | 1 | V = 5..=100 step 5 | V = 2..=200 |
//! | 3 | n ∈ {16,32,64,100,128,256,512,1024}, 100 trials, 100 test, 10⁴ Bayes draws | n up to 2048, 500 trials, 500 test, 10⁵ draws |
//! | 4 | n ∈ {8,…,2048} doubling, 100 trials | 1000 trials |
//! | 5 | s ∈ 1..=60 ∪ coarse tail, m ∈ {1,2,3,4,5,10,20} | every s, every m |
//! | 6 | n ∈ {10,…,100}, 50 trials, 200 test | 200 trials, 1000 test |

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{fit_with, EtaBasis, FittedModel};
use crate::error::{Error, Result};
use crate::eval::{
    bayes_error_mc, edge_correlation_matrix, hyperparameter_search, missed_edge_rate, off_diagonal, relative_efficiency,
    relative_rate, CvScheme, ErrorSurface, HyperGrid, MonteCarloEstimate, SubgraphRule, TrainingConfig,
};
use crate::graph::{edge_slots, LabeledDataset};
use crate::io::to_json_string;
use crate::sim::{
    pooled_edge_frequencies, sample_from_fitted, sample_homogeneous, split_seed, subgraph_count_log2,
    HomogeneousModelSpec, Placement, SamplingMode, SubgraphCountConstraint,
};
use crate::stats::{ks_two_sample, significance_matrix, KsResult, TestStatisticKind};
use crate::subgraph::{coherent_estimate_with, incoherent_estimate_with, SignalSubgraph, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    #[default]
    Desk,
    Full,
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Budget::Desk),
            "full" => Ok(Budget::Full),
            other => Err(Error::InvalidArgument(format!("unknown budget {other:?}"))),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Budget::Desk => "desk",
            Budget::Full => "full",
        })
    }
}

/// The reference model: 70 vertices, one signal-vertex, 20 signal-edges.
pub fn reference_model() -> HomogeneousModelSpec {
    HomogeneousModelSpec::new(70, 1, 20, 0.5, 0.1, 0.3).expect("reference model is feasible")
}

/// The small model used for relative efficiency.
pub fn small_model() -> HomogeneousModelSpec {
    HomogeneousModelSpec::new(30, 1, 5, 0.5, 0.1, 0.2).expect("small model is feasible")
}

/// A named CSV or JSON artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact { name: name.to_owned(), contents }
    }
}

fn push_estimate(out: &mut String, e: &MonteCarloEstimate) {
    write!(out, ",{},{}", e.mean, e.std_error).expect("write to String");
}

fn summarize(xs: impl Iterator<Item = f64>) -> MonteCarloEstimate {
    MonteCarloEstimate::from_samples(&xs.collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// Figure 1

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Config {
    pub v_values: Vec<usize>,
    pub s: usize,
}

impl Figure1Config {
    pub fn for_budget(budget: Budget) -> Self {
        let v_values = match budget {
            Budget::Desk => (1..=20).map(|k| 5 * k).collect(),
            Budget::Full => (2..=200).collect(),
        };
        Figure1Config { v_values, s: 20 }
    }
}

/// `log2` subgraph counts per V; cells where `s` does not fit are empty.
pub fn figure1(cfg: &Figure1Config) -> Result<Vec<Artifact>> {
    let mut out = format!("V,unconstrained,edges_s{0},single_vertex_s{0}_upper_bound\n", cfg.s);
    for &v in &cfg.v_values {
        let cell = |c| subgraph_count_log2(v, c).map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{v},{},{},{}",
            subgraph_count_log2(v, SubgraphCountConstraint::Unconstrained)?,
            cell(SubgraphCountConstraint::Edges { s: cfg.s }),
            cell(SubgraphCountConstraint::SingleVertex { s: cfg.s })
        )
        .expect("write to String");
    }
    Ok(vec![Artifact::new("figure1_counts.csv", out)])
}

// ---------------------------------------------------------------------------
// Figures 3 and 4: estimator and classifier performance against n

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub spec: HomogeneousModelSpec,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    /// Test-set size; `None` skips classification.
    pub n_test: Option<usize>,
    pub statistic: TestStatisticKind,
}

impl ConvergenceConfig {
    pub fn figure3(budget: Budget) -> Self {
        let (n_grid, trials, n_test) = match budget {
            Budget::Desk => (vec![16, 32, 64, 100, 128, 256, 512, 1024], 100, 100),
            Budget::Full => (vec![16, 32, 64, 100, 128, 256, 512, 1024, 2048], 500, 500),
        };
        ConvergenceConfig {
            spec: reference_model(),
            n_grid,
            trials,
            n_test: Some(n_test),
            statistic: TestStatisticKind::FisherExact,
        }
    }

    pub fn figure4(budget: Budget) -> Self {
        ConvergenceConfig {
            spec: small_model(),
            n_grid: (3..=11).map(|k| 1 << k).collect(),
            trials: match budget {
                Budget::Desk => 100,
                Budget::Full => 1000,
            },
            n_test: None,
            statistic: TestStatisticKind::FisherExact,
        }
    }
}

/// One trial at one training size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub missed_inc: f64,
    pub missed_coh: f64,
    /// Test error of naïve Bayes, incoherent and coherent classifiers.
    pub errors: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub n: usize,
    pub trials: Vec<TrialOutcome>,
}

impl StudyPoint {
    pub fn missed_inc(&self) -> MonteCarloEstimate {
        summarize(self.trials.iter().map(|t| t.missed_inc))
    }

    pub fn missed_coh(&self) -> MonteCarloEstimate {
        summarize(self.trials.iter().map(|t| t.missed_coh))
    }

    /// Mean test error of classifier `k` (0 = naïve Bayes, 1 = incoherent, 2 = coherent).
    pub fn error(&self, k: usize) -> Option<MonteCarloEstimate> {
        let xs: Option<Vec<f64>> = self.trials.iter().map(|t| t.errors.map(|e| e[k])).collect();
        xs.map(|xs| MonteCarloEstimate::from_samples(&xs))
    }

    /// Mean and standard error of the per-trial difference `error(a) - error(b)`.
    pub fn paired_gap(&self, a: usize, b: usize) -> Option<MonteCarloEstimate> {
        let xs: Option<Vec<f64>> = self.trials.iter().map(|t| t.errors.map(|e| e[a] - e[b])).collect();
        xs.map(|xs| MonteCarloEstimate::from_samples(&xs))
    }
}

fn test_error(model: &FittedModel, test: &LabeledDataset) -> Result<f64> {
    let mut wrong = 0usize;
    for (g, y) in test.iter() {
        wrong += usize::from(model.classify(g)?.label != y);
    }
    Ok(wrong as f64 / test.len() as f64)
}

/// The study's model with its planted subgraph moved by a seeded vertex
/// relabelling, so tie order among equal scores carries no information.
fn relabelled(spec: &HomogeneousModelSpec, seed: u64) -> HomogeneousModelSpec {
    spec.with_placement(Placement::Random { seed })
}

fn run_trial(cfg: &ConvergenceConfig, n: usize, seed: u64) -> Result<TrialOutcome> {
    let spec = &relabelled(&cfg.spec, split_seed(seed, 2));
    let (train, truth) = sample_homogeneous(spec, n, SamplingMode::balanced(n, spec.pi), split_seed(seed, 0))?;
    let t = significance_matrix(&train, cfg.statistic)?;
    let ties = TieBreak::Lexicographic;
    let inc = incoherent_estimate_with(&t, spec.s, ties)?;
    let coh = coherent_estimate_with(&t, spec.s, spec.m, ties)?;
    let missed_inc = missed_edge_rate(&truth, &inc)?;
    let missed_coh = missed_edge_rate(&truth, &coh)?;
    let errors = match cfg.n_test {
        None => None,
        Some(n_test) => {
            let (test, _) = sample_homogeneous(spec, n_test, SamplingMode::balanced(n_test, spec.pi), split_seed(seed, 1))?;
            let stat = Some(cfg.statistic);
            let nb = fit_with(&train, &SignalSubgraph::whole(spec.n_vertices)?, EtaBasis::Total, None)?;
            let inc = fit_with(&train, &inc, EtaBasis::Total, stat)?;
            let coh = fit_with(&train, &coh, EtaBasis::Total, stat)?;
            Some([test_error(&nb, &test)?, test_error(&inc, &test)?, test_error(&coh, &test)?])
        }
    };
    Ok(TrialOutcome { missed_inc, missed_coh, errors })
}

/// Runs every (n, trial) pair; trial `t` at grid position `i` uses seed
/// `split_seed(split_seed(seed, i), t)`.
pub fn convergence_study(cfg: &ConvergenceConfig, seed: u64) -> Result<Vec<StudyPoint>> {
    cfg.spec.validate()?;
    if cfg.trials == 0 || cfg.n_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.n_grid.len()).flat_map(|i| (0..cfg.trials).map(move |t| (i, t))).collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(i, t)| run_trial(cfg, cfg.n_grid[i], split_seed(split_seed(seed, i as u64), t as u64)))
        .collect::<Result<_>>()?;
    Ok(cfg
        .n_grid
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&n, chunk)| StudyPoint { n, trials: chunk.to_vec() })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Outcome {
    pub points: Vec<StudyPoint>,
    pub bayes: MonteCarloEstimate,
    pub chance: f64,
}

impl Figure3Outcome {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,missed_inc,missed_inc_se,missed_coh,missed_coh_se,err_nb,err_nb_se,err_inc,err_inc_se,err_coh,err_coh_se,bayes,bayes_se,chance\n",
        );
        for p in &self.points {
            out.push_str(&p.n.to_string());
            push_estimate(&mut out, &p.missed_inc());
            push_estimate(&mut out, &p.missed_coh());
            for k in 0..3 {
                push_estimate(&mut out, &p.error(k).expect("classification enabled"));
            }
            push_estimate(&mut out, &self.bayes);
            writeln!(out, ",{}", self.chance).expect("write to String");
        }
        out
    }
}

pub fn figure3(cfg: &ConvergenceConfig, bayes_draws: usize, seed: u64) -> Result<Figure3Outcome> {
    if cfg.n_test.is_none() {
        return Err(Error::InvalidArgument("classifier comparison needs a test-set size".into()));
    }
    let points = convergence_study(cfg, split_seed(seed, 0))?;
    let bayes = bayes_error_mc(&cfg.spec, bayes_draws, split_seed(seed, 1))?;
    Ok(Figure3Outcome { points, bayes, chance: cfg.spec.pi.min(1.0 - cfg.spec.pi) })
}

pub fn figure3_bayes_draws(budget: Budget) -> usize {
    match budget {
        Budget::Desk => 10_000,
        Budget::Full => 100_000,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure4Outcome {
    pub points: Vec<StudyPoint>,
    /// `(1 - R_inc) / (1 - R_coh)` of the mean rates; NaN where undefined.
    pub relative_rate: Vec<f64>,
    pub relative_efficiency: Vec<f64>,
}

impl Figure4Outcome {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("n,missed_inc,missed_inc_se,missed_coh,missed_coh_se,relative_rate,relative_efficiency\n");
        for ((p, rr), re) in self.points.iter().zip(&self.relative_rate).zip(&self.relative_efficiency) {
            out.push_str(&p.n.to_string());
            push_estimate(&mut out, &p.missed_inc());
            push_estimate(&mut out, &p.missed_coh());
            writeln!(out, ",{rr},{re}").expect("write to String");
        }
        out
    }
}

pub fn figure4(cfg: &ConvergenceConfig, seed: u64) -> Result<Figure4Outcome> {
    let points = convergence_study(cfg, seed)?;
    let inc: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.missed_inc().mean)).collect();
    let coh: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.missed_coh().mean)).collect();
    let relative_rate = inc.iter().zip(&coh).map(|(a, b)| relative_rate(a.1, b.1).unwrap_or(f64::NAN)).collect();
    let relative_efficiency =
        inc.iter().map(|&(n, _)| relative_efficiency(&inc, &coh, n)).collect::<Result<Vec<_>>>()?;
    Ok(Figure4Outcome { points, relative_rate, relative_efficiency })
}

// ---------------------------------------------------------------------------
// Figure 5: hyper-parameter search on held-out data

#[derive(Debug, Clone, PartialEq)]
pub struct Figure5Config {
    pub spec: HomogeneousModelSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub s_values: Vec<usize>,
    /// Coherent `m` candidates; the incoherent search is the `m = V` column.
    pub m_values: Vec<usize>,
    pub training: TrainingConfig,
}

impl Figure5Config {
    pub fn for_budget(budget: Budget) -> Self {
        let spec = reference_model();
        let d = edge_slots(spec.n_vertices);
        let (s_values, m_values) = match budget {
            Budget::Desk => {
                let mut s: Vec<usize> = (1..=60).collect();
                s.extend([70, 80, 90, 100, 125, 150, 200, 300, 500, 1000, d]);
                (s, vec![1, 2, 3, 4, 5, 10, 20])
            }
            Budget::Full => ((1..=d).collect(), (1..spec.n_vertices).collect()),
        };
        Figure5Config { spec, n_train: 200, n_test: 500, s_values, m_values, training: TrainingConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure5Summary {
    pub s_inc: usize,
    pub error_inc: f64,
    pub s_coh: usize,
    pub m_coh: usize,
    pub error_coh: f64,
    pub missed_inc: f64,
    pub missed_coh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure5Outcome {
    pub incoherent: ErrorSurface,
    pub coherent: ErrorSurface,
    pub summary: Figure5Summary,
}

pub fn figure5(cfg: &Figure5Config, seed: u64) -> Result<Figure5Outcome> {
    let spec = &relabelled(&cfg.spec, split_seed(seed, 2));
    let (train, truth) =
        sample_homogeneous(spec, cfg.n_train, SamplingMode::balanced(cfg.n_train, spec.pi), split_seed(seed, 0))?;
    let (test, _) =
        sample_homogeneous(spec, cfg.n_test, SamplingMode::balanced(cfg.n_test, spec.pi), split_seed(seed, 1))?;
    let scheme = CvScheme::HeldOut(test);
    let inc = hyperparameter_search(
        &train,
        &scheme,
        &cfg.training,
        &HyperGrid::incoherent(cfg.s_values.clone(), spec.n_vertices)?,
    )?;
    let coh = hyperparameter_search(&train, &scheme, &cfg.training, &HyperGrid::new(cfg.s_values.clone(), cfg.m_values.clone())?)?;
    let rate = |o: &crate::eval::SearchOutcome| missed_edge_rate(&truth, o.model.subgraph());
    let summary = Figure5Summary {
        s_inc: inc.report.rule.s().expect("estimator rule"),
        error_inc: inc.report.error,
        s_coh: coh.report.rule.s().expect("estimator rule"),
        m_coh: coh.report.rule.m().unwrap_or(spec.n_vertices),
        error_coh: coh.report.error,
        missed_inc: rate(&inc)?,
        missed_coh: rate(&coh)?,
    };
    Ok(Figure5Outcome {
        incoherent: inc.report.surface.expect("search produces a surface"),
        coherent: coh.report.surface.expect("search produces a surface"),
        summary,
    })
}

// ---------------------------------------------------------------------------
// Figure 6: synthetic data regenerated from a fit

#[derive(Debug, Clone, PartialEq)]
pub struct Figure6Config {
    /// Stand-in for the unavailable 49-subject data.
    pub source: HomogeneousModelSpec,
    pub n0: usize,
    pub n1: usize,
    pub s_values: Vec<usize>,
    /// Grid `m` values; `V` selects the incoherent estimator.
    pub m_values: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub n_test: usize,
    pub training: TrainingConfig,
}

impl Figure6Config {
    pub fn for_budget(budget: Budget) -> Self {
        let source = HomogeneousModelSpec::new(70, 12, 360, 25.0 / 49.0, 0.3, 0.4).expect("source model is feasible");
        let (s_values, m_values, trials, n_test) = match budget {
            Budget::Desk => (
                vec![10, 20, 50, 100, 150, 200, 250, 300, 360, 400, 500, 700, 1000, 1500, 2415],
                vec![1, 2, 4, 8, 12, 16, 24, 32, 70],
                50,
                200,
            ),
            Budget::Full => ((1..=2415).collect(), (1..=70).collect(), 200, 1000),
        };
        Figure6Config {
            source,
            n0: 25,
            n1: 24,
            s_values,
            m_values,
            n_grid: (1..=10).map(|k| 10 * k).collect(),
            trials,
            n_test,
            training: TrainingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure6Summary {
    pub s_hat: usize,
    pub m_hat: Option<usize>,
    pub loo_error: f64,
    /// Off-diagonal edge correlations of the source data against one synthetic draw.
    pub correlation_ks: Option<KsResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure6Outcome {
    pub loo_surface: ErrorSurface,
    pub model: FittedModel,
    /// Per n: test errors of naïve Bayes, incoherent and coherent classifiers at the fitted budget.
    pub curve: Vec<(usize, [MonteCarloEstimate; 3])>,
    pub summary: Figure6Summary,
}

impl Figure6Outcome {
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("n,err_nb,err_nb_se,err_inc,err_inc_se,err_coh,err_coh_se\n");
        for (n, errs) in &self.curve {
            out.push_str(&n.to_string());
            for e in errs {
                push_estimate(&mut out, e);
            }
            out.push('\n');
        }
        out
    }
}

fn synthetic_trial(
    cfg: &Figure6Config,
    model: &FittedModel,
    nuisance: &[f64],
    n: usize,
    seed: u64,
) -> Result<[f64; 3]> {
    let split = |n: usize| {
        let n0 = ((n as f64) * model.priors()[0]).round() as usize;
        (n0, n - n0)
    };
    let (n0, n1) = split(n);
    let train = sample_from_fitted(model, nuisance, n0, n1, split_seed(seed, 0))?;
    let (t0, t1) = split(cfg.n_test);
    let test = sample_from_fitted(model, nuisance, t0, t1, split_seed(seed, 1))?;
    let s = model.subgraph().s();
    let n_vertices = model.n_vertices();
    let coherent = match model.subgraph().m() {
        Some(m) if m < n_vertices => SubgraphRule::Coherent { s, m },
        _ => SubgraphRule::Incoherent { s },
    };
    let mut errs = [0.0; 3];
    for (k, rule) in [SubgraphRule::NaiveBayes, SubgraphRule::Incoherent { s }, coherent].into_iter().enumerate() {
        let fitted = crate::eval::train(&train, &cfg.training, rule)?;
        errs[k] = test_error(&fitted, &test)?;
    }
    Ok(errs)
}

pub fn figure6(cfg: &Figure6Config, seed: u64) -> Result<Figure6Outcome> {
    let source = &relabelled(&cfg.source, split_seed(seed, 3));
    let mode = SamplingMode::ClassConditioned { n0: cfg.n0, n1: cfg.n1 };
    let (real, _) = sample_homogeneous(source, cfg.n0 + cfg.n1, mode, split_seed(seed, 0))?;
    let grid = HyperGrid::new(cfg.s_values.clone(), cfg.m_values.clone())?;
    let search = hyperparameter_search(&real, &CvScheme::LeaveOneOut, &cfg.training, &grid)?;
    let model = search.model;
    let nuisance = pooled_edge_frequencies(&real);

    let jobs: Vec<(usize, usize)> = (0..cfg.n_grid.len()).flat_map(|i| (0..cfg.trials).map(move |t| (i, t))).collect();
    let trial_seed = split_seed(seed, 1);
    let outcomes: Vec<[f64; 3]> = jobs
        .par_iter()
        .map(|&(i, t)| {
            synthetic_trial(cfg, &model, &nuisance, cfg.n_grid[i], split_seed(split_seed(trial_seed, i as u64), t as u64))
        })
        .collect::<Result<_>>()?;
    let curve = cfg
        .n_grid
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&n, chunk)| (n, [0, 1, 2].map(|k| summarize(chunk.iter().map(|e| e[k])))))
        .collect();

    let synthetic = sample_from_fitted(&model, &nuisance, cfg.n0, cfg.n1, split_seed(seed, 2))?;
    let correlation_ks = if model.subgraph().len() >= 2 {
        let a = off_diagonal(&edge_correlation_matrix(&real, model.subgraph())?);
        let b = off_diagonal(&edge_correlation_matrix(&synthetic, model.subgraph())?);
        Some(ks_two_sample(&a, &b)?)
    } else {
        None
    };
    let summary = Figure6Summary {
        s_hat: model.subgraph().s(),
        m_hat: search.report.rule.m(),
        loo_error: search.report.error,
        correlation_ks,
    };
    Ok(Figure6Outcome { loo_surface: search.report.surface.expect("search produces a surface"), model, curve, summary })
}

// ---------------------------------------------------------------------------

/// Runs one figure's study at a budget and renders its artifacts.
pub fn reproduce(figure: u8, budget: Budget, seed: u64) -> Result<Vec<Artifact>> {
    match figure {
        1 => figure1(&Figure1Config::for_budget(budget)),
        3 => {
            let out = figure3(&ConvergenceConfig::figure3(budget), figure3_bayes_draws(budget), seed)?;
            Ok(vec![Artifact::new("figure3_performance.csv", out.to_csv())])
        }
        4 => {
            let out = figure4(&ConvergenceConfig::figure4(budget), seed)?;
            Ok(vec![Artifact::new("figure4_relative.csv", out.to_csv())])
        }
        5 => {
            let out = figure5(&Figure5Config::for_budget(budget), seed)?;
            Ok(vec![
                Artifact::new("figure5_incoherent_surface.csv", out.incoherent.to_csv()),
                Artifact::new("figure5_coherent_surface.csv", out.coherent.to_csv()),
                Artifact::new("figure5_summary.json", to_json_string(&out.summary)?),
            ])
        }
        6 => {
            let out = figure6(&Figure6Config::for_budget(budget), seed)?;
            Ok(vec![
                Artifact::new("figure6_loo_surface.csv", out.loo_surface.to_csv()),
                Artifact::new("figure6_synthetic_curve.csv", out.curve_csv()),
                Artifact::new("figure6_model.json", to_json_string(&out.model)?),
                Artifact::new("figure6_summary.json", to_json_string(&out.summary)?),
            ])
        }
        other => Err(Error::InvalidArgument(format!("figure {other} is not reproducible; choose 1, 3, 4, 5 or 6"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_reference_cells() {
        let cfg = Figure1Config { v_values: vec![5, 70], s: 20 };
        let csv = &figure1(&cfg).unwrap()[0].contents;
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[1], "5,10,,");
        assert!(rows[2].starts_with("70,2415,"));
    }

    #[test]
    fn convergence_is_independent_of_scheduling() {
        let cfg = ConvergenceConfig {
            spec: HomogeneousModelSpec::new(12, 1, 4, 0.5, 0.1, 0.5).unwrap(),
            n_grid: vec![10, 20],
            trials: 6,
            n_test: Some(10),
            statistic: TestStatisticKind::FisherExact,
        };
        let a = convergence_study(&cfg, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| convergence_study(&cfg, 9).unwrap());
        assert_eq!(a, b);
        assert_eq!(a[1].trials.len(), 6);
    }

    #[test]
    fn unknown_figure_is_rejected() {
        assert!(matches!(reproduce(2, Budget::Desk, 0), Err(Error::InvalidArgument(_))));
    }
}
