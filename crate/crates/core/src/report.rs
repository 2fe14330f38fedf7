//! The versioned JSON report produced by an evaluation run.

use serde::{Deserialize, Serialize};

use crate::ipr::IprScores;
use crate::pointset::{EpsilonEstimate, Metric};
use crate::scores::Evaluation;
use crate::sparsify::GREEDY_ORDER;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Include per-component member id lists.
    pub include_members: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub eta_c: f64,
    pub eta_q: f64,
    pub seed: Option<u64>,
    pub metric: Metric,
    pub sparsify_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_estimate: Option<EpsilonEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalScores {
    pub precision: f64,
    pub recall: f64,
    pub network_consistency: f64,
    pub network_quality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    #[serde(rename = "n_R")]
    pub n_r: usize,
    #[serde(rename = "n_E")]
    pub n_e: usize,
    #[serde(rename = "n_R_sparse")]
    pub n_r_sparse: usize,
    #[serde(rename = "n_E_sparse")]
    pub n_e_sparse: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub num_components: usize,
    pub num_edges: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub id: usize,
    #[serde(rename = "v_R")]
    pub v_r: u64,
    #[serde(rename = "v_E")]
    pub v_e: u64,
    #[serde(rename = "e_RR")]
    pub e_rr: u64,
    #[serde(rename = "e_EE")]
    pub e_ee: u64,
    pub e_het: u64,
    pub c: f64,
    pub q: f64,
    /// Ids in the original (unsparsified) `R`.
    #[serde(rename = "members_R", default, skip_serializing_if = "Option::is_none")]
    pub members_r: Option<Vec<usize>>,
    #[serde(rename = "members_E", default, skip_serializing_if = "Option::is_none")]
    pub members_e: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomcaReport {
    pub version: u32,
    pub params: ReportParams,
    pub global: GlobalScores,
    pub sizes: Sizes,
    pub graph: GraphSummary,
    pub components: Vec<ComponentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipr: Option<IprScores>,
}

impl GeomcaReport {
    pub fn from_evaluation(ev: &Evaluation, opts: &ReportOptions) -> Self {
        let components = ev
            .graph
            .components()
            .iter()
            .zip(&ev.local.scores)
            .map(|(comp, score)| ComponentEntry {
                id: comp.comp_id,
                v_r: comp.counts.v_r,
                v_e: comp.counts.v_e,
                e_rr: comp.counts.e_rr,
                e_ee: comp.counts.e_ee,
                e_het: comp.counts.e_het,
                c: score.consistency,
                q: score.quality,
                members_r: opts.include_members.then(|| {
                    comp.members_r.iter().map(|&i| ev.original_r_id(i)).collect()
                }),
                members_e: opts.include_members.then(|| {
                    comp.members_e.iter().map(|&i| ev.original_e_id(i)).collect()
                }),
            })
            .collect();
        Self {
            version: REPORT_VERSION,
            params: ReportParams {
                epsilon: ev.params.epsilon,
                delta: ev.params.delta,
                eta_c: ev.params.eta_c,
                eta_q: ev.params.eta_q,
                seed: None,
                metric: Metric::Euclidean,
                sparsify_order: GREEDY_ORDER.to_string(),
                epsilon_estimate: None,
            },
            global: GlobalScores {
                precision: ev.pr.precision,
                recall: ev.pr.recall,
                network_consistency: ev.network.consistency,
                network_quality: ev.network.quality,
            },
            sizes: Sizes {
                n_r: ev.n_r,
                n_e: ev.n_e,
                n_r_sparse: ev.n_r_sparse(),
                n_e_sparse: ev.n_e_sparse(),
            },
            graph: GraphSummary {
                num_components: ev.graph.components().len(),
                num_edges: ev.graph.num_edges(),
            },
            components,
            ipr: None,
        }
    }

    /// Attaches the estimate that produced epsilon, recording its seed.
    pub fn with_epsilon_estimate(mut self, estimate: EpsilonEstimate) -> Self {
        self.params.seed = Some(estimate.seed);
        self.params.epsilon_estimate = Some(estimate);
        self
    }

    pub fn with_ipr(mut self, ipr: IprScores) -> Self {
        self.ipr = Some(ipr);
        self
    }

    /// The global score vector `[P, R, c(G), q(G)]`.
    pub fn global_vector(&self) -> [f64; 4] {
        [
            self.global.precision,
            self.global.recall,
            self.global.network_consistency,
            self.global.network_quality,
        ]
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
