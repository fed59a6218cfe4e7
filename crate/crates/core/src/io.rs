//! On-disk formats: dataset manifests and graph CSVs, significance and
//! coherogram CSVs, subgraphs with a JSON sidecar, models, reports and
//! experiment specs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::FittedModel;
use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, ClassLabel, EdgeId, LabeledDataset};
use crate::sim::{HomogeneousModelSpec, Placement, SamplingMode};
use crate::subgraph::{Coherogram, SignalSubgraph, SignificanceMatrix};

pub const MANIFEST: &str = "manifest.csv";
pub const TRUTH_CSV: &str = "truth.csv";

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(headers).trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn parse_label(raw: &str, path: &Path) -> Result<ClassLabel> {
    match raw.trim() {
        "0" => Ok(ClassLabel::Zero),
        "1" => Ok(ClassLabel::One),
        other => Err(Error::parse(path, format!("label {other:?} is not 0 or 1"))),
    }
}

/// Parses a V×V comma-separated 0/1 matrix.
pub fn parse_graph(text: &str, path: &Path) -> Result<AdjacencyMatrix> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (i, record) in csv_reader(text, false).records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<i64>().map_err(|_| Error::parse(path, format!("row {i}, column {j}: {cell:?} is not an integer")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    AdjacencyMatrix::validate(&rows).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn read_graph(path: &Path) -> Result<AdjacencyMatrix> {
    parse_graph(&read_to_string(path)?, path)
}

pub fn graph_to_csv(g: &AdjacencyMatrix) -> String {
    let mut out = String::with_capacity(2 * g.n_vertices() * g.n_vertices());
    for row in g.to_dense() {
        let cells: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Loads a dataset from a manifest file, or from `manifest.csv` inside a directory.
/// Graph paths are relative to the manifest.
pub fn read_dataset(path: &Path) -> Result<LabeledDataset> {
    let manifest = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = read_to_string(&manifest)?;
    let mut reader = csv_reader(&text, true);
    let headers = reader.headers().map_err(|e| Error::parse(&manifest, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["graph_path", "label"] {
        return Err(Error::parse(&manifest, "header must be graph_path,label"));
    }
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(&manifest, e.to_string()))?;
        graphs.push(read_graph(&base.join(&record[0]))?);
        labels.push(parse_label(&record[1], &manifest)?);
    }
    LabeledDataset::new(graphs, labels)
}

/// Writes `manifest.csv` and `graphs/gNNNNN.csv` under `dir`.
pub fn write_dataset(dir: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut manifest = String::from("graph_path,label\n");
    for (i, (g, y)) in ds.iter().enumerate() {
        let rel = format!("graphs/g{i:05}.csv");
        write_file(&dir.join(&rel), graph_to_csv(g))?;
        writeln!(manifest, "{rel},{y}").expect("write to String");
    }
    write_file(&dir.join(MANIFEST), manifest)
}

pub fn significance_to_csv(t: &SignificanceMatrix) -> String {
    let mut out = String::from("u,v,score,pvalue\n");
    for (i, s) in t.scores().iter().enumerate() {
        let e = EdgeId::from_index(i, t.n_vertices());
        let p = s.pvalue.map(|p| p.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{p}", e.u, e.v, s.score).expect("write to String");
    }
    out
}

/// Sidecar describing a subgraph CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSidecar {
    pub n_vertices: usize,
    pub s: usize,
    pub m: Option<usize>,
    pub vertices: Option<Vec<usize>>,
}

pub fn subgraph_to_csv(sg: &SignalSubgraph) -> String {
    let mut out = String::from("u,v\n");
    for e in sg.edges() {
        writeln!(out, "{},{}", e.u, e.v).expect("write to String");
    }
    out
}

/// Writes `<path>` as `u,v` rows and `<path>.json` as the sidecar.
pub fn write_subgraph(path: &Path, sg: &SignalSubgraph) -> Result<()> {
    write_file(path, subgraph_to_csv(sg))?;
    let sidecar = SubgraphSidecar {
        n_vertices: sg.n_vertices(),
        s: sg.s(),
        m: sg.m(),
        vertices: sg.vertices().map(<[usize]>::to_vec),
    };
    write_json(&sidecar_path(path), &sidecar)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn read_subgraph(path: &Path) -> Result<SignalSubgraph> {
    let sidecar: SubgraphSidecar = read_json(&sidecar_path(path))?;
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for record in csv_reader(&text, true).records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let field = |k: usize| record[k].parse::<usize>().map_err(|_| Error::parse(path, format!("bad vertex {:?}", &record[k])));
        edges.push(EdgeId::checked(field(0)?, field(1)?, sidecar.n_vertices)?);
    }
    SignalSubgraph::new(sidecar.n_vertices, edges, sidecar.m, sidecar.vertices)
}

/// Header `vertex,<level>,...` (strictest level first), then one row per vertex.
pub fn coherogram_to_csv(c: &Coherogram) -> String {
    let mut out = String::from("vertex");
    for level in &c.levels {
        write!(out, ",{level}").expect("write to String");
    }
    out.push('\n');
    for (v, row) in c.counts.iter().enumerate() {
        out.push_str(&v.to_string());
        for count in row {
            write!(out, ",{count}").expect("write to String");
        }
        out.push('\n');
    }
    out
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, to_json_string(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn read_model(path: &Path) -> Result<FittedModel> {
    read_json(path)
}

/// One label per line; a non-numeric first line is taken as a header.
pub fn read_labels(path: &Path) -> Result<Vec<ClassLabel>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    if lines.peek().is_some_and(|l| l.parse::<u8>().is_err()) {
        lines.next();
    }
    lines.map(|l| parse_label(l, path)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PredictionsDocument {
    Labels(Vec<ClassLabel>),
    Report { predictions: Vec<ClassLabel> },
}

/// Reads a JSON label array, or the `predictions` of a JSON report.
pub fn read_predictions(path: &Path) -> Result<Vec<ClassLabel>> {
    Ok(match read_json(path)? {
        PredictionsDocument::Labels(v) | PredictionsDocument::Report { predictions: v } => v,
    })
}

/// Label assignment of an experiment file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    /// Labels drawn from the prior.
    #[default]
    Prior,
    /// Class sizes fixed at the rounded prior split.
    Balanced,
    Fixed { n0: usize, n1: usize },
}

/// `{V, m, s, pi, p, q, n, mode, seed, trials}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(rename = "V")]
    pub n_vertices: usize,
    pub m: usize,
    pub s: usize,
    pub pi: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    #[serde(default)]
    pub mode: ExperimentMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub placement: Placement,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn model(&self) -> Result<HomogeneousModelSpec> {
        HomogeneousModelSpec::new(self.n_vertices, self.m, self.s, self.pi, self.p, self.q)
            .map(|m| m.with_placement(self.placement))
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        match self.mode {
            ExperimentMode::Prior => SamplingMode::PriorSampled,
            ExperimentMode::Balanced => SamplingMode::balanced(self.n, self.pi),
            ExperimentMode::Fixed { n0, n1 } => SamplingMode::ClassConditioned { n0, n1 },
        }
    }
}

pub fn read_experiment(path: &Path) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = read_json(path)?;
    spec.model()?;
    if spec.n == 0 || spec.trials == 0 {
        return Err(Error::parse(path, "n and trials must be positive"));
    }
    Ok(spec)
}
