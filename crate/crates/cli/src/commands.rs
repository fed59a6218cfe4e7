use std::path::{Path, PathBuf};

use serde::Serialize;
use sigsub_core::eval::{
    cross_validated_error, hyperparameter_search, mcnemar_pvalue, permutation_test_pvalue, train, CvScheme,
    HyperGrid, SubgraphRule, TrainingConfig,
};
use sigsub_core::experiments::{reproduce, Budget};
use sigsub_core::io::{
    coherogram_to_csv, read_dataset, read_experiment, read_graph, read_labels, read_model, read_predictions,
    significance_to_csv, subgraph_to_csv, to_json_string, write_dataset, TRUTH_CSV,
};
use sigsub_core::sim::{sample_homogeneous, split_seed};
use sigsub_core::stats::significance_matrix;
use sigsub_core::{coherogram, EtaBasis, Error, LabeledDataset, Result, TestStatisticKind, TieBreak};

use crate::output::Outputs;
use crate::{Command, TrainArgs};

fn usage(message: impl Into<String>) -> Error {
    Error::InvalidArgument(message.into())
}

fn parse_ties(raw: &str) -> Result<TieBreak> {
    match raw.split_once(':') {
        None if raw == "lexicographic" => Ok(TieBreak::Lexicographic),
        Some(("shuffled", seed)) => {
            seed.parse().map(|seed| TieBreak::Shuffled { seed }).map_err(|_| usage(format!("bad tie seed {seed:?}")))
        }
        _ => Err(usage(format!("unknown tie rule {raw:?}, expected lexicographic or shuffled:SEED"))),
    }
}

fn parse_eta(raw: &str) -> Result<EtaBasis> {
    match raw {
        "total" => Ok(EtaBasis::Total),
        "per_class" => Ok(EtaBasis::PerClass),
        other => Err(usage(format!("unknown smoothing basis {other:?}, expected total or per_class"))),
    }
}

impl TrainArgs {
    fn config(&self) -> Result<TrainingConfig> {
        Ok(TrainingConfig {
            statistic: self.stat.parse()?,
            eta_basis: parse_eta(&self.eta)?,
            ties: parse_ties(&self.ties)?,
        })
    }
}

fn parse_scheme(raw: &str) -> Result<CvScheme> {
    let parts: Vec<&str> = raw.splitn(3, ':').collect();
    let number = |s: &str| s.parse::<u64>().map_err(|_| usage(format!("bad number {s:?} in scheme {raw:?}")));
    match parts.as_slice() {
        ["loo"] => Ok(CvScheme::LeaveOneOut),
        ["kfold", c] => Ok(CvScheme::KFold { folds: number(c)? as usize, seed: 0 }),
        ["kfold", c, seed] => Ok(CvScheme::KFold { folds: number(c)? as usize, seed: number(seed)? }),
        ["heldout", rest @ ..] if !rest.is_empty() => Ok(CvScheme::HeldOut(read_dataset(Path::new(&rest.join(":")))?)),
        _ => Err(usage(format!("unknown scheme {raw:?}, expected loo, kfold:C[:SEED] or heldout:PATH"))),
    }
}

/// Parses `A:B`, `A:B:STEP` and single values, comma-separated.
fn parse_grid(raw: &str) -> Result<Vec<usize>> {
    let number = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("bad grid value {s:?} in {raw:?}")));
    let mut values = Vec::new();
    for item in raw.split(',').filter(|s| !s.trim().is_empty()) {
        let bounds: Vec<&str> = item.split(':').collect();
        match bounds.as_slice() {
            [v] => values.push(number(v)?),
            [a, b] => values.extend(number(a)?..=number(b)?),
            [a, b, step] => {
                let step = number(step)?;
                if step == 0 {
                    return Err(usage(format!("zero step in {raw:?}")));
                }
                values.extend((number(a)?..=number(b)?).step_by(step));
            }
            _ => return Err(usage(format!("bad grid item {item:?}"))),
        }
    }
    Ok(values)
}

/// `m` at or above V selects the incoherent estimator, as in a search grid.
fn rule_for(s: Option<usize>, m: Option<usize>, n_vertices: usize) -> Result<SubgraphRule> {
    match (s, m) {
        (None, None) => Ok(SubgraphRule::NaiveBayes),
        (None, Some(_)) => Err(usage("--m needs --s")),
        (Some(s), Some(m)) if m < n_vertices => Ok(SubgraphRule::Coherent { s, m }),
        (Some(s), Some(m)) if m == n_vertices => Ok(SubgraphRule::Incoherent { s }),
        (Some(_), Some(m)) => Err(Error::MOutOfRange { m, max: n_vertices }),
        (Some(s), None) => Ok(SubgraphRule::Incoherent { s }),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print!("{}", to_json_string(value)?);
    Ok(())
}

pub fn run(command: Command) -> Result<()> {
    let mut out = Outputs::new();
    match command {
        Command::Simulate { spec, out: dir } => simulate(&spec, &dir, &mut out)?,
        Command::Fit { data, s, m, train: args, out: path, subgraph_out, significance_out } => {
            let cfg = args.config()?;
            let ds = read_dataset(&data)?;
            let rule = rule_for(Some(s), m, ds.n_vertices())?;
            rule.check(ds.n_vertices())?;
            let model = train(&ds, &cfg, rule)?;
            out.write(&path, to_json_string(&model)?)?;
            if let Some(p) = subgraph_out {
                write_subgraph(&mut out, &p, model.subgraph())?;
            }
            if let Some(p) = significance_out {
                out.write(&p, significance_to_csv(&significance_matrix(&ds, cfg.statistic)?))?;
            }
        }
        Command::Classify { model, graph } => {
            let model = read_model(&model)?;
            let g = read_graph(&graph)?;
            println!("{}", serde_json::to_string(&model.classify(&g)?)?);
        }
        Command::Xval { data, scheme, s, m, train: args, out: path } => {
            let cfg = args.config()?;
            let scheme = parse_scheme(&scheme)?;
            let ds = read_dataset(&data)?;
            let rule = rule_for(s, m, ds.n_vertices())?;
            let report = cross_validated_error(&ds, &scheme, &cfg, rule)?;
            if let Some(p) = path {
                out.write(&p, to_json_string(&report)?)?;
            }
            print_json(&report)?;
        }
        Command::Search { data, s_grid, m_grid, scheme, train: args, out: path, surface_out, model_out } => {
            let cfg = args.config()?;
            let scheme = parse_scheme(&scheme)?;
            let s_values = parse_grid(&s_grid)?;
            let ds = read_dataset(&data)?;
            let m_values = match m_grid {
                Some(raw) => parse_grid(&raw)?,
                None => vec![ds.n_vertices()],
            };
            let grid = HyperGrid::new(s_values, m_values)?;
            let outcome = hyperparameter_search(&ds, &scheme, &cfg, &grid)?;
            let surface = outcome.report.surface.as_ref().expect("search produces a surface").to_csv();
            out.write(&path, to_json_string(&outcome.report)?)?;
            out.write(&surface_out.unwrap_or_else(|| path.with_extension("csv")), surface)?;
            if let Some(p) = model_out {
                out.write(&p, to_json_string(&outcome.model)?)?;
            }
        }
        Command::Permtest { data, nmc, seed, scheme, out: path } => {
            let scheme = parse_scheme(&scheme)?;
            let ds = read_dataset(&data)?;
            let result = permutation_test_pvalue(&ds, &scheme, &TrainingConfig::default(), nmc, seed)?;
            let summary = serde_json::json!({
                "pvalue": result.pvalue,
                "observed_error": result.observed_error,
                "n_mc": nmc,
                "seed": seed,
                "scheme": scheme.to_string(),
            });
            if let Some(p) = path {
                out.write(&p, to_json_string(&result)?)?;
            }
            print_json(&summary)?;
        }
        Command::Compare { preds_a, preds_b, truth } => {
            let a = read_predictions(&preds_a)?;
            let b = read_predictions(&preds_b)?;
            let truth = read_labels(&truth)?;
            let p = mcnemar_pvalue(&a, &b, &truth)?;
            println!("{}", serde_json::json!({ "pvalue": p, "n": truth.len() }));
        }
        Command::Coherogram { data, stat, out: path } => {
            let kind: TestStatisticKind = stat.parse()?;
            let ds = read_dataset(&data)?;
            out.write(&path, coherogram_to_csv(&coherogram(&significance_matrix(&ds, kind)?)))?;
        }
        Command::Reproduce { figure, budget, seed, out: dir } => {
            let budget: Budget = budget.parse()?;
            let artifacts = reproduce(figure, budget, seed)?;
            out.dir(&dir)?;
            for a in artifacts {
                out.write(&dir.join(&a.name), a.contents)?;
            }
        }
    }
    out.commit();
    Ok(())
}

fn write_subgraph(out: &mut Outputs, path: &Path, sg: &sigsub_core::SignalSubgraph) -> Result<()> {
    let sidecar = sigsub_core::io::SubgraphSidecar {
        n_vertices: sg.n_vertices(),
        s: sg.s(),
        m: sg.m(),
        vertices: sg.vertices().map(<[usize]>::to_vec),
    };
    out.write(path, subgraph_to_csv(sg))?;
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".json");
    out.write(&PathBuf::from(sidecar_path), to_json_string(&sidecar)?)
}

fn write_data(out: &mut Outputs, dir: &Path, ds: &LabeledDataset, truth: &sigsub_core::SignalSubgraph) -> Result<()> {
    out.dir(dir)?;
    write_dataset(dir, ds)?;
    write_subgraph(out, &dir.join(TRUTH_CSV), truth)
}

/// One dataset at `dir`, or `dir/trial-NNN` per trial with seeds split from the base seed.
fn simulate(spec_path: &Path, dir: &Path, out: &mut Outputs) -> Result<()> {
    let spec = read_experiment(spec_path)?;
    let model = spec.model()?;
    if spec.trials == 1 {
        let (ds, truth) = sample_homogeneous(&model, spec.n, spec.sampling_mode(), spec.seed)?;
        return write_data(out, dir, &ds, &truth);
    }
    let draws = (0..spec.trials)
        .map(|t| sample_homogeneous(&model, spec.n, spec.sampling_mode(), split_seed(spec.seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    out.dir(dir)?;
    for (t, (ds, truth)) in draws.iter().enumerate() {
        write_data(out, &dir.join(format!("trial-{t:03}")), ds, truth)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:3,7,10:20:5").unwrap(), vec![1, 2, 3, 7, 10, 15, 20]);
        assert!(parse_grid("1:x").is_err());
        assert!(parse_grid("1:9:0").is_err());
    }

    #[test]
    fn schemes() {
        assert_eq!(parse_scheme("loo").unwrap(), CvScheme::LeaveOneOut);
        assert_eq!(parse_scheme("kfold:5").unwrap(), CvScheme::KFold { folds: 5, seed: 0 });
        assert_eq!(parse_scheme("kfold:5:9").unwrap(), CvScheme::KFold { folds: 5, seed: 9 });
        assert!(parse_scheme("bootstrap").is_err());
    }

    #[test]
    fn rules() {
        assert_eq!(rule_for(None, None, 10).unwrap(), SubgraphRule::NaiveBayes);
        assert_eq!(rule_for(Some(3), Some(10), 10).unwrap(), SubgraphRule::Incoherent { s: 3 });
        assert_eq!(rule_for(Some(3), Some(2), 10).unwrap(), SubgraphRule::Coherent { s: 3, m: 2 });
        assert!(rule_for(Some(3), Some(11), 10).is_err());
        assert_eq!(parse_ties("shuffled:4").unwrap(), TieBreak::Shuffled { seed: 4 });
    }
}
