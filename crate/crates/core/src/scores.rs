//! Local and global scores over the components of an epsilon-graph.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::epsgraph::{
    build_epsilon_graph_with, ComponentStats, Counts, EpsilonGraph, GraphOptions,
};
use crate::error::{GeomcaError, Result};
use crate::pointset::PointSet;
use crate::report::{GeomcaReport, ReportOptions};
use crate::sparsify::{sparsify, SparsifyResult};

/// `1 - |v_R - v_E| / v_total`.
pub fn consistency(counts: &Counts) -> f64 {
    let total = counts.v_total();
    if total == 0 {
        return 0.0;
    }
    1.0 - counts.v_r.abs_diff(counts.v_e) as f64 / total as f64
}

/// `1 - (e_RR + e_EE) / e_total`, or 0 for an edgeless subgraph.
pub fn quality(counts: &Counts) -> f64 {
    let total = counts.e_total();
    if total == 0 {
        return 0.0;
    }
    1.0 - (counts.e_rr + counts.e_ee) as f64 / total as f64
}

pub fn component_consistency(stats: &ComponentStats) -> f64 {
    consistency(&stats.counts)
}

pub fn component_quality(stats: &ComponentStats) -> f64 {
    quality(&stats.counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScore {
    pub consistency: f64,
    pub quality: f64,
}

/// Consistency and quality of every component, indexed by component id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalScores {
    pub scores: Vec<ComponentScore>,
}

impl LocalScores {
    pub fn from_components(components: &[ComponentStats]) -> Self {
        Self {
            scores: components
                .iter()
                .map(|c| ComponentScore {
                    consistency: component_consistency(c),
                    quality: component_quality(c),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkScores {
    pub consistency: f64,
    pub quality: f64,
}

/// Consistency and quality of the whole graph taken as one component.
pub fn network_scores(g: &EpsilonGraph) -> NetworkScores {
    let totals = g.totals();
    NetworkScores {
        consistency: consistency(&totals),
        quality: quality(&totals),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// Ids of the components that passed both thresholds.
    pub selected: Vec<usize>,
}

fn check_threshold(name: &str, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(GeomcaError::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {eta}"
        )));
    }
    Ok(())
}

/// Precision and recall over the components whose consistency exceeds
/// `eta_c` and whose quality exceeds `eta_q` (both strict).
pub fn precision_recall(
    g: &EpsilonGraph,
    local: &LocalScores,
    eta_c: f64,
    eta_q: f64,
) -> Result<PrecisionRecall> {
    precision_recall_over(g.components(), local, eta_c, eta_q)
}

pub fn precision_recall_over(
    components: &[ComponentStats],
    local: &LocalScores,
    eta_c: f64,
    eta_q: f64,
) -> Result<PrecisionRecall> {
    check_threshold("eta_c", eta_c)?;
    check_threshold("eta_q", eta_q)?;
    if local.len() != components.len() {
        return Err(GeomcaError::InvalidParameter(format!(
            "{} local scores for {} components",
            local.len(),
            components.len()
        )));
    }
    let mut total = Counts::default();
    let mut inside = Counts::default();
    let mut selected = Vec::new();
    for (comp, score) in components.iter().zip(&local.scores) {
        total.add(&comp.counts);
        if score.consistency > eta_c && score.quality > eta_q {
            inside.add(&comp.counts);
            selected.push(comp.comp_id);
        }
    }
    if total.v_e == 0 {
        return Err(GeomcaError::EmptySide("evaluation"));
    }
    if total.v_r == 0 {
        return Err(GeomcaError::EmptySide("reference"));
    }
    Ok(PrecisionRecall {
        precision: inside.v_e as f64 / total.v_e as f64,
        recall: inside.v_r as f64 / total.v_r as f64,
        selected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomcaParams {
    pub epsilon: f64,
    /// Sparsification distance applied to `R` and `E` separately.
    pub delta: Option<f64>,
    pub eta_c: f64,
    pub eta_q: f64,
}

impl GeomcaParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            delta: None,
            eta_c: 0.0,
            eta_q: 0.0,
        }
    }
}

/// Everything computed by one evaluation run.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub params: GeomcaParams,
    pub n_r: usize,
    pub n_e: usize,
    /// Sparsification of `R` and `E`, when a delta was given.
    pub sparsified: Option<(SparsifyResult, SparsifyResult)>,
    pub graph: EpsilonGraph,
    pub local: LocalScores,
    pub network: NetworkScores,
    pub pr: PrecisionRecall,
    pub timings: StageTimings,
}

/// Wall-clock time of the two expensive stages, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub sparsify_ms: f64,
    pub graph_ms: f64,
}

impl Evaluation {
    pub fn n_r_sparse(&self) -> usize {
        self.sparsified
            .as_ref()
            .map_or(self.n_r, |(r, _)| r.num_kept())
    }

    pub fn n_e_sparse(&self) -> usize {
        self.sparsified
            .as_ref()
            .map_or(self.n_e, |(_, e)| e.num_kept())
    }

    /// Maps a graph-level `R` id back to its id in the unsparsified input.
    pub fn original_r_id(&self, id: usize) -> usize {
        self.sparsified.as_ref().map_or(id, |(r, _)| r.kept[id])
    }

    pub fn original_e_id(&self, id: usize) -> usize {
        self.sparsified.as_ref().map_or(id, |(_, e)| e.kept[id])
    }

    pub fn report(&self, opts: &ReportOptions) -> GeomcaReport {
        GeomcaReport::from_evaluation(self, opts)
    }
}

/// Full pipeline: optional separate sparsification of `R` and `E`, graph
/// construction, local scores, then network scores and precision/recall.
pub fn evaluate(
    r: &PointSet,
    e: &PointSet,
    params: &GeomcaParams,
    graph_opts: &GraphOptions,
) -> Result<Evaluation> {
    check_threshold("eta_c", params.eta_c)?;
    check_threshold("eta_q", params.eta_q)?;
    let clock = Instant::now();
    let sparsified = match params.delta {
        Some(delta) => Some((sparsify(r, delta)?, sparsify(e, delta)?)),
        None => None,
    };
    let sparsify_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = Instant::now();
    let graph = match &sparsified {
        Some((rs, es)) => build_epsilon_graph_with(
            &r.select(&rs.kept)?,
            &e.select(&es.kept)?,
            params.epsilon,
            graph_opts,
        )?,
        None => build_epsilon_graph_with(r, e, params.epsilon, graph_opts)?,
    };
    let graph_ms = clock.elapsed().as_secs_f64() * 1e3;
    let local = LocalScores::from_components(graph.components());
    let network = network_scores(&graph);
    let pr = precision_recall(&graph, &local, params.eta_c, params.eta_q)?;
    Ok(Evaluation {
        params: *params,
        n_r: r.len(),
        n_e: e.len(),
        sparsified,
        graph,
        local,
        network,
        pr,
        timings: StageTimings {
            sparsify_ms,
            graph_ms,
        },
    })
}

/// Runs the pipeline and returns the report.
pub fn run_geomca(
    r: &PointSet,
    e: &PointSet,
    params: &GeomcaParams,
    opts: &ReportOptions,
) -> Result<GeomcaReport> {
    let graph_opts = GraphOptions {
        keep_edges: false,
        ..GraphOptions::default()
    };
    Ok(evaluate(r, e, params, &graph_opts)?.report(opts))
}
