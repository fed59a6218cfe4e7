//! Per-edge two-class tests and the two-sample Kolmogorov–Smirnov test.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{ContingencyTable, EdgeCounts, LabeledDataset};
use crate::subgraph::SignificanceMatrix;

/// p-values are floored here before taking `-ln p`.
pub const PVALUE_FLOOR: f64 = 1e-300;

/// Log-probability slack when deciding that a table is "as extreme" as the observed one.
pub const FISHER_TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStatisticKind {
    FisherExact,
    ChiSquared,
    MleAbsDiff,
}

impl fmt::Display for TestStatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestStatisticKind::FisherExact => "fisher",
            TestStatisticKind::ChiSquared => "chi2",
            TestStatisticKind::MleAbsDiff => "mle",
        })
    }
}

impl FromStr for TestStatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fisher" | "fisher_exact" => Ok(TestStatisticKind::FisherExact),
            "chi2" | "chi_squared" | "chisq" => Ok(TestStatisticKind::ChiSquared),
            "mle" | "mle_abs_diff" => Ok(TestStatisticKind::MleAbsDiff),
            other => Err(Error::InvalidArgument(format!(
                "unknown test statistic {other:?}, expected fisher, chi2 or mle"
            ))),
        }
    }
}

/// Significance of one edge. Larger scores are more significant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceScore {
    pub score: f64,
    pub pvalue: Option<f64>,
}

impl SignificanceScore {
    pub fn from_pvalue(p: f64) -> Self {
        SignificanceScore { score: 0.0 - p.max(PVALUE_FLOOR).ln(), pvalue: Some(p) }
    }

    pub fn from_score(score: f64) -> Self {
        SignificanceScore { score, pvalue: None }
    }
}

/// Cached `ln k!` for repeated hypergeometric evaluations.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn up_to(n: usize) -> Self {
        LogFactorials { table: (0..=n).map(|k| ln_factorial(k as u64)).collect() }
    }

    fn get(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `ln a! + ln b!` summed in a canonical order so that mirrored
    /// arguments give bit-identical results.
    fn pair(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.get(lo) + self.get(hi)
    }
}

/// Two-sided Fisher exact test, minimum-likelihood rule.
#[derive(Debug, Clone)]
pub struct FisherExact {
    lf: LogFactorials,
}

impl FisherExact {
    /// Supports tables with up to `max_total` samples.
    pub fn new(max_total: usize) -> Self {
        FisherExact { lf: LogFactorials::up_to(max_total) }
    }

    pub fn pvalue(&self, t: &ContingencyTable) -> f64 {
        let n = t.total();
        let k = t.edge_total();
        if t.n0 == 0 || t.n1 == 0 || k == 0 || k == n {
            return 1.0;
        }
        assert!(n < self.lf.table.len(), "table total {n} exceeds the factorial cache");
        let lo = k.saturating_sub(t.n1);
        let hi = k.min(t.n0);
        // ln P(X = x) with X = class-0 edge count, margins fixed.
        let constant = self.lf.get(t.n0) + self.lf.get(t.n1) + self.lf.pair(k, n - k) - self.lf.get(n);
        let log_prob = |x: usize| {
            constant - self.lf.pair(x, k - x) - self.lf.pair(t.n0 - x, t.n1 + x - k)
        };
        let observed = log_prob(t.k0) + FISHER_TIE_SLACK;
        let mut terms: Vec<f64> = (lo..=hi)
            .map(log_prob)
            .filter(|&lp| lp <= observed)
            .map(f64::exp)
            .collect();
        if terms.len() == hi - lo + 1 {
            return 1.0;
        }
        // Ascending summation: order-independent under column mirroring, and tighter.
        terms.sort_by(f64::total_cmp);
        terms.iter().sum::<f64>().clamp(0.0, 1.0)
    }
}

/// Two-sided Fisher exact p-value of one table.
pub fn fisher_exact_pvalue(t: &ContingencyTable) -> f64 {
    FisherExact::new(t.total()).pvalue(t)
}

/// Pearson chi-squared statistic of a 2×2 table, without continuity correction.
///
/// Returns `None` when some expected cell count is zero.
pub fn chi_squared_statistic(t: &ContingencyTable) -> Option<f64> {
    let n = t.total();
    let k = t.edge_total();
    if t.n0 == 0 || t.n1 == 0 || k == 0 || k == n {
        return None;
    }
    let (a, b) = (t.k0 as f64, t.k1 as f64);
    let (c, d) = ((t.n0 - t.k0) as f64, (t.n1 - t.k1) as f64);
    let det = a * d - b * c;
    Some(n as f64 * det * det / (k as f64 * (n - k) as f64 * t.n0 as f64 * t.n1 as f64))
}

/// Chi-squared p-value with one degree of freedom.
pub fn chi_squared_pvalue(t: &ContingencyTable) -> f64 {
    match chi_squared_statistic(t) {
        Some(stat) if stat > 0.0 => erfc((stat / 2.0).sqrt()).clamp(0.0, 1.0),
        _ => 1.0,
    }
}

/// `|k0/n0 - k1/n1|`.
pub fn mle_abs_diff(t: &ContingencyTable) -> Result<f64> {
    if t.n0 == 0 {
        return Err(Error::EmptyClass(0));
    }
    if t.n1 == 0 {
        return Err(Error::EmptyClass(1));
    }
    Ok((t.k0 as f64 / t.n0 as f64 - t.k1 as f64 / t.n1 as f64).abs())
}

/// Scores every edge of a dataset.
pub fn significance_matrix(ds: &LabeledDataset, kind: TestStatisticKind) -> Result<SignificanceMatrix> {
    significance_from_counts(&EdgeCounts::from_dataset(ds), kind)
}

/// Scores every edge from precomputed counts.
///
/// Edges sharing a contingency table share the computation.
pub fn significance_from_counts(counts: &EdgeCounts, kind: TestStatisticKind) -> Result<SignificanceMatrix> {
    let [n0, n1] = counts.class_sizes();
    if n0 == 0 {
        return Err(Error::EmptyClass(0));
    }
    if n1 == 0 {
        return Err(Error::EmptyClass(1));
    }
    let fisher = matches!(kind, TestStatisticKind::FisherExact).then(|| FisherExact::new(n0 + n1));
    let mut memo: HashMap<(usize, usize), SignificanceScore> = HashMap::new();
    let mut scores = Vec::with_capacity(counts.slots());
    for slot in 0..counts.slots() {
        let t = counts.table(slot);
        let score = match memo.get(&(t.k0, t.k1)) {
            Some(&s) => s,
            None => {
                let s = match kind {
                    TestStatisticKind::FisherExact => {
                        SignificanceScore::from_pvalue(fisher.as_ref().expect("fisher cache").pvalue(&t))
                    }
                    TestStatisticKind::ChiSquared => SignificanceScore::from_pvalue(chi_squared_pvalue(&t)),
                    TestStatisticKind::MleAbsDiff => SignificanceScore::from_score(mle_abs_diff(&t)?),
                };
                memo.insert((t.k0, t.k1), s);
                s
            }
        };
        scores.push(score);
    }
    SignificanceMatrix::new(counts.n_vertices(), Some(kind), scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// `sup |F_x - F_y|`.
    pub statistic: f64,
    pub pvalue: f64,
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ (-1)^(k-1) exp(-2 k² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    // The alternating series is useless near zero, where Q is 1 to double precision.
    if lambda < 0.2 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (a * kf * kf).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value and the
/// `(√n_e + 0.12 + 0.11/√n_e)` effective-size correction.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = if xs[i].total_cmp(&ys[j]).is_le() { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    let ne = (nx * ny / (nx + ny)).sqrt();
    let pvalue = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    Ok(KsResult { statistic: d, pvalue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AdjacencyMatrix, ClassLabel, EdgeId};

    fn table(k0: usize, k1: usize, n0: usize, n1: usize) -> ContingencyTable {
        ContingencyTable::new(k0, k1, n0, n1).unwrap()
    }

    #[test]
    fn fisher_small_tables() {
        assert_eq!(fisher_exact_pvalue(&table(0, 0, 5, 5)), 1.0);
        assert!((fisher_exact_pvalue(&table(2, 0, 2, 2)) - 1.0 / 3.0).abs() < 1e-12);
        let t = table(7, 2, 10, 12);
        assert_eq!(fisher_exact_pvalue(&t), fisher_exact_pvalue(&t.mirrored()));
    }

    #[test]
    fn fisher_handles_large_samples() {
        let p = fisher_exact_pvalue(&table(30_000, 29_000, 60_000, 60_000));
        assert!(p > 0.0 && p < 1e-3, "p = {p}");
        let p = fisher_exact_pvalue(&table(50_000, 50_000, 100_000, 100_000));
        assert!((p - 1.0).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn chi_squared_examples() {
        let t = table(1, 1, 2, 2);
        assert_eq!(chi_squared_statistic(&t), Some(0.0));
        assert_eq!(chi_squared_pvalue(&t), 1.0);
        let t = table(2, 0, 2, 2);
        assert!((chi_squared_statistic(&t).unwrap() - 4.0).abs() < 1e-12);
        // Regularized upper incomplete gamma Q(1/2, x/2), via a separate series.
        let oracle = statrs::function::gamma::gamma_ur(0.5, 2.0);
        assert!((chi_squared_pvalue(&t) - oracle).abs() < 1e-9, "{} vs {oracle}", chi_squared_pvalue(&t));
        assert!((chi_squared_pvalue(&t) - 0.0455).abs() < 1e-4);
        assert_eq!(chi_squared_pvalue(&table(1, 0, 3, 0)), 1.0);
    }

    #[test]
    fn mle_diff_examples() {
        assert_eq!(mle_abs_diff(&table(2, 0, 2, 2)).unwrap(), 1.0);
        assert_eq!(mle_abs_diff(&table(1, 1, 2, 2)).unwrap(), 0.0);
        let expected = (10.0 / 25.0 - 4.0 / 24.0f64).abs();
        assert!((mle_abs_diff(&table(10, 4, 25, 24)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.2333).abs() < 1e-4);
        assert!(matches!(mle_abs_diff(&table(1, 0, 2, 0)), Err(Error::EmptyClass(1))));
    }

    #[test]
    fn score_is_negative_log_p() {
        let s = SignificanceScore::from_pvalue(0.5);
        assert!((s.score - 2f64.ln()).abs() < 1e-15);
        assert_eq!(SignificanceScore::from_pvalue(0.0).score, -PVALUE_FLOOR.ln());
        assert_eq!(SignificanceScore::from_pvalue(1.0).score, 0.0);
    }

    #[test]
    fn identical_classes_give_unit_pvalues() {
        let g = AdjacencyMatrix::from_edges(4, [EdgeId::new(0, 1), EdgeId::new(1, 3)]).unwrap();
        let h = AdjacencyMatrix::from_edges(4, [EdgeId::new(2, 3)]).unwrap();
        let ds = LabeledDataset::new(
            vec![g.clone(), h.clone(), g, h],
            vec![ClassLabel::Zero, ClassLabel::Zero, ClassLabel::One, ClassLabel::One],
        )
        .unwrap();
        let t = significance_matrix(&ds, TestStatisticKind::FisherExact).unwrap();
        assert!(t.scores().iter().all(|s| s.pvalue == Some(1.0)), "{:?}", t.scores());
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn ks_examples() {
        let xs = [0.3, 0.1, 0.7, 0.2];
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.pvalue, 1.0);
        let r = ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(matches!(ks_two_sample(&[], &[1.0]), Err(Error::EmptyInput)));
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Q(1.36) ≈ 0.049 and Q(1.63) ≈ 0.010 are the classic 5% and 1% points.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-3);
    }
}
