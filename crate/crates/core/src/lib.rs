//! Geometric component analysis of two sets of representations.
//!
//! A reference set `R` and an evaluation set `E` are joined into one
//! epsilon-threshold graph. Its connected components are scored locally by
//! how balanced they are between `R` and `E` (consistency) and by how many of
//! their edges join the two sets (quality). Globally, the whole graph gets the
//! same two scores plus precision and recall over the components that pass
//! both thresholds.
//!
//! ```
//! use geomca::{run_geomca, GeomcaParams, PointSet, ReportOptions, SetLabel};
//!
//! let r = PointSet::from_rows(&[[0.0], [1.0]], SetLabel::Reference).unwrap();
//! let e = PointSet::from_rows(&[[0.4]], SetLabel::Evaluation).unwrap();
//! let params = GeomcaParams { epsilon: 0.5, delta: None, eta_c: 0.5, eta_q: 0.5 };
//! let report = run_geomca(&r, &e, &params, &ReportOptions::default()).unwrap();
//! assert_eq!(report.global_vector()[..2], [1.0, 0.5]);
//! ```

pub mod epsgraph;
pub mod error;
pub mod harness;
pub mod ipr;
pub mod pointset;
pub mod report;
pub mod scores;
pub mod sparsify;
mod union_find;

pub use epsgraph::{
    build_epsilon_graph, build_epsilon_graph_with, get_connected_components, ComponentStats,
    Counts, Edge, EdgeKind, EpsilonGraph, GraphOptions, DEFAULT_MAX_EDGES,
};
pub use error::{GeomcaError, Result};
pub use ipr::{ipr, IprScores};
pub use pointset::{
    distance, estimate_epsilon, load_pointset, EpsilonEstimate, FileFormat, Metric, PointSet,
    SetLabel,
};
pub use report::{GeomcaReport, ReportOptions, REPORT_VERSION};
pub use scores::{
    component_consistency, component_quality, evaluate, network_scores, precision_recall,
    run_geomca, Evaluation, GeomcaParams, LocalScores, NetworkScores, PrecisionRecall,
};
pub use sparsify::{sparsify, SparsifyResult};
