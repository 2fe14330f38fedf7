use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ipr::IprScores;
use crate::scores::{Evaluation, StageTimings};

/// Per-component entry for the largest components of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrillEntry {
    pub id: usize,
    pub size: u64,
    pub c: f64,
    pub q: f64,
    /// "mixed", "pure-R" or "pure-E".
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// One value per sweep axis.
    pub coords: Vec<f64>,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub network_consistency: f64,
    pub network_quality: f64,
    #[serde(rename = "n_R")]
    pub n_r: usize,
    #[serde(rename = "n_E")]
    pub n_e: usize,
    #[serde(rename = "n_R_sparse")]
    pub n_r_sparse: usize,
    #[serde(rename = "n_E_sparse")]
    pub n_e_sparse: usize,
    pub num_components: usize,
    pub num_edges: u64,
    /// Components with more than the experiment's size threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_components: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipr: Option<IprScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drilldown: Option<Vec<DrillEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
}

impl SweepRow {
    pub fn from_evaluation(coords: Vec<f64>, ev: &Evaluation) -> Self {
        Self {
            coords,
            epsilon: ev.params.epsilon,
            delta: ev.params.delta,
            precision: ev.pr.precision,
            recall: ev.pr.recall,
            network_consistency: ev.network.consistency,
            network_quality: ev.network.quality,
            n_r: ev.n_r,
            n_e: ev.n_e,
            n_r_sparse: ev.n_r_sparse(),
            n_e_sparse: ev.n_e_sparse(),
            num_components: ev.graph.components().len(),
            num_edges: ev.graph.num_edges(),
            large_components: None,
            ipr: None,
            drilldown: None,
            timings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub axes: Vec<String>,
    /// Rows in strictly increasing lexicographic order of `coords`.
    pub rows: Vec<SweepRow>,
    pub checks: Vec<SweepCheck>,
}

impl SweepResult {
    pub fn new(experiment: &str, axes: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            axes: axes.iter().map(|a| a.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.checks.push(SweepCheck {
            name: name.to_string(),
            holds,
            detail: detail.into(),
        });
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn row_at(&self, coords: &[f64]) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.coords == coords)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serialization is infallible")
    }

    /// Flat CSV, one row per axis value. Absent optional values are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.axes.clone();
        header.extend(
            [
                "epsilon",
                "delta",
                "precision",
                "recall",
                "network_consistency",
                "network_quality",
                "n_R",
                "n_E",
                "n_R_sparse",
                "n_E_sparse",
                "num_components",
                "num_edges",
                "large_components",
                "ipr_precision",
                "ipr_recall",
                "sparsify_ms",
                "graph_ms",
            ]
            .map(String::from),
        );
        w.write_record(&header)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for row in &self.rows {
            let mut rec: Vec<String> = row.coords.iter().map(f64::to_string).collect();
            rec.extend([
                row.epsilon.to_string(),
                opt(row.delta.map(|d| d.to_string())),
                row.precision.to_string(),
                row.recall.to_string(),
                row.network_consistency.to_string(),
                row.network_quality.to_string(),
                row.n_r.to_string(),
                row.n_e.to_string(),
                row.n_r_sparse.to_string(),
                row.n_e_sparse.to_string(),
                row.num_components.to_string(),
                row.num_edges.to_string(),
                opt(row.large_components.map(|c| c.to_string())),
                opt(row.ipr.map(|s| s.precision.to_string())),
                opt(row.ipr.map(|s| s.recall.to_string())),
                opt(row.timings.map(|t| t.sparsify_ms.to_string())),
                opt(row.timings.map(|t| t.graph_ms.to_string())),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
