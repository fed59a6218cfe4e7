use std::path::Path;

use sigsub_core::eval::{train, SubgraphRule, TrainingConfig};
use sigsub_core::io::{
    read_dataset, read_model, read_subgraph, significance_to_csv, write_dataset, write_json, write_subgraph,
};
use sigsub_core::sim::{sample_homogeneous, HomogeneousModelSpec, SamplingMode};
use sigsub_core::stats::{significance_matrix, TestStatisticKind};
use sigsub_core::{Error, ErrorClass};

fn data() -> sigsub_core::LabeledDataset {
    let spec = HomogeneousModelSpec::new(9, 1, 4, 0.5, 0.2, 0.7).unwrap();
    sample_homogeneous(&spec, 20, SamplingMode::balanced(20, 0.5), 1).unwrap().0
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = data();
    write_dataset(dir.path(), &ds).unwrap();
    assert_eq!(read_dataset(dir.path()).unwrap(), ds);
    assert_eq!(read_dataset(&dir.path().join("manifest.csv")).unwrap(), ds);
}

#[test]
fn model_file_classifies_like_the_original() {
    let dir = tempfile::tempdir().unwrap();
    let ds = data();
    for rule in [SubgraphRule::NaiveBayes, SubgraphRule::Incoherent { s: 5 }, SubgraphRule::Coherent { s: 4, m: 1 }] {
        let model = train(&ds, &TrainingConfig::default(), rule).unwrap();
        let path = dir.path().join("model.json");
        write_json(&path, &model).unwrap();
        let loaded = read_model(&path).unwrap();
        assert_eq!(loaded, model);
        for g in ds.graphs() {
            assert_eq!(loaded.classify(g).unwrap(), model.classify(g).unwrap());
        }
    }
}

#[test]
fn subgraph_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(&data(), &TrainingConfig::default(), SubgraphRule::Coherent { s: 4, m: 1 }).unwrap();
    let path = dir.path().join("sg.csv");
    write_subgraph(&path, model.subgraph()).unwrap();
    assert_eq!(&read_subgraph(&path).unwrap(), model.subgraph());
}

#[test]
fn mle_significance_has_no_pvalues() {
    let t = significance_matrix(&data(), TestStatisticKind::MleAbsDiff).unwrap();
    let csv = significance_to_csv(&t);
    assert_eq!(csv.lines().count(), 1 + 36);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn malformed_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("manifest.csv"), "graph_path,label\ng.csv,0\n").unwrap();
    std::fs::write(root.join("g.csv"), "0,1\n0,0\n").unwrap();
    let err = read_dataset(root).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Data);
    assert!(err.to_string().contains("g.csv"), "{err}");
    std::fs::write(root.join("manifest.csv"), "graph_path,label\ng.csv,2\n").unwrap();
    assert!(matches!(read_dataset(root), Err(Error::Parse { .. })));
    assert!(matches!(read_dataset(Path::new("/nonexistent/place")), Err(Error::Io { .. })));
}
