//! On-disk formats.
//!
//! * Graph JSON: `{"n": N, "edges": [[i, j, w], ...]}`, the weight optional.
//! * Sampler JSON: `{"n": N, "selected": [i, ...]}`.
//! * AR scheme JSON: `{"core": [...], "P": p, "levels": [[...], ...]}`.
//! * Design report JSON: `{"selected", "objective_trace", "valid", "min_singular"}`.
//! * Estimation report JSON: `{"method", "theta", "residual", "cond", "p"}`.
//! * Snapshot CSV: header `node_<i>` per observed node, one row per snapshot.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ar::ArScheme;
use crate::design::{Design, Validity};
use crate::error::{Error, Result};
use crate::estimators::EstimationResult;
use crate::graph::Graph;
use crate::models::Subsampler;
use crate::stationary::SnapshotMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeJson {
    Weighted(usize, usize, f64),
    Unweighted(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<EdgeJson>,
}

pub fn graph_to_json(graph: &Graph) -> String {
    let doc = GraphJson {
        n: graph.n_nodes(),
        edges: graph
            .edges()
            .iter()
            .map(|&(i, j, w)| EdgeJson::Weighted(i, j, w))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    let doc: GraphJson = serde_json::from_str(text)?;
    let edges = doc
        .edges
        .into_iter()
        .map(|e| match e {
            EdgeJson::Weighted(i, j, w) => (i, j, w),
            EdgeJson::Unweighted(i, j) => (i, j, 1.0),
        })
        .collect();
    Graph::new(doc.n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SamplerJson {
    n: usize,
    selected: Vec<usize>,
}

pub fn sampler_to_json(sampler: &Subsampler) -> String {
    serde_json::to_string_pretty(&SamplerJson {
        n: sampler.n_nodes(),
        selected: sampler.selected().to_vec(),
    })
    .expect("sampler serializes")
}

pub fn sampler_from_json(text: &str) -> Result<Subsampler> {
    let doc: SamplerJson = serde_json::from_str(text)?;
    Subsampler::new(doc.n, doc.selected)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArSchemeJson {
    pub core: Vec<usize>,
    #[serde(rename = "P")]
    pub order: usize,
    pub levels: Vec<Vec<usize>>,
}

pub fn ar_scheme_to_json(scheme: &ArScheme) -> String {
    serde_json::to_string_pretty(&ArSchemeJson {
        core: scheme.core().to_vec(),
        order: scheme.order(),
        levels: scheme.levels().to_vec(),
    })
    .expect("scheme serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub selected: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub valid: bool,
    pub min_singular: f64,
}

impl DesignReport {
    pub fn new(design: &Design, validity: &Validity) -> Self {
        DesignReport {
            selected: design.sampler.selected().to_vec(),
            objective_trace: design.objective_trace.clone(),
            valid: validity.valid,
            min_singular: validity.min_singular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub method: String,
    pub theta: Vec<f64>,
    pub residual: f64,
    /// `null` when the model is singular.
    pub cond: Option<f64>,
    /// Reconstructed power spectrum.
    pub p: Vec<f64>,
}

impl EstimationReport {
    pub fn new(result: &EstimationResult, p: &[f64]) -> Self {
        EstimationReport {
            method: result.method.as_str().to_string(),
            theta: result.theta.iter().copied().collect(),
            residual: result.residual_norm,
            cond: result
                .condition_number
                .is_finite()
                .then_some(result.condition_number),
            p: p.to_vec(),
        }
    }
}

pub fn write_snapshots_csv<W: Write>(snapshots: &SnapshotMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(snapshots.node_indices().iter().map(|i| format!("node_{i}")))?;
    let data = snapshots.data();
    for t in 0..data.ncols() {
        w.write_record(data.column(t).iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots_csv<R: Read>(input: R) -> Result<SnapshotMatrix> {
    let mut r = csv::Reader::from_reader(input);
    let nodes = r
        .headers()?
        .iter()
        .map(|h| {
            h.trim()
                .strip_prefix("node_")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| {
                    Error::invalid(format!("bad snapshot header '{h}', expected node_<i>"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        if record.len() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: record.len(),
            });
        }
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad number '{field}' in snapshot file")))?;
            values.push(v);
        }
        rows += 1;
    }
    // Rows are snapshots; the matrix stores snapshots as columns.
    let data = DMatrix::from_row_slice(rows, nodes.len(), &values).transpose();
    SnapshotMatrix::new(data, nodes)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut s)?;
    Ok(s)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;

    #[test]
    fn graph_json_accepts_missing_weights() {
        let g = graph_from_json(r#"{"n": 3, "edges": [[0, 1], [1, 2, 0.5]]}"#).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 0.5)]);
        let back = graph_from_json(&graph_to_json(&g)).unwrap();
        assert_eq!(back, g);
        assert!(graph_from_json(r#"{"n": 2, "edges": [[0, 5]]}"#).is_err());
    }

    #[test]
    fn sampler_json_validates() {
        let s = sampler_from_json(r#"{"n": 10, "selected": [9, 0, 4]}"#).unwrap();
        assert_eq!(s.selected(), &[0, 4, 9]);
        assert!(sampler_from_json(r#"{"n": 3, "selected": [3]}"#).is_err());
    }

    #[test]
    fn snapshot_csv_layout() {
        let y = SnapshotMatrix::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            vec![3, 7],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_snapshots_csv(&y, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node_3,node_7\n"));
        assert_eq!(text.lines().count(), 4);
        let back = read_snapshots_csv(buf.as_slice()).unwrap();
        assert_eq!(back, y);
        assert!(read_snapshots_csv("x,y\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn ar_scheme_json_uses_capital_p() {
        let s = crate::graph::build_shift(
            &generators::cycle(6).unwrap(),
            crate::graph::ShiftKind::Adjacency,
        )
        .unwrap();
        let scheme = crate::ar::build_ar_scheme(&s, &[0], 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&ar_scheme_to_json(&scheme)).unwrap();
        assert_eq!(v["P"], 1);
        assert_eq!(v["levels"][1], serde_json::json!([1, 5]));
    }
}
