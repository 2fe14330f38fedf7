//! Fixtures shared by the benchmarks.

use geomca::harness::{generate_clusters, ClusterSpec};
use geomca::PointSet;

/// `(R, E)` drawn from `classes` Gaussian classes of `per_class` points each.
pub fn fixture(classes: usize, dim: usize, per_class: usize, seed: u64) -> (PointSet, PointSet) {
    let spec = ClusterSpec::uniform(classes, dim, per_class, per_class, 1.0, 10.0, seed);
    let data = generate_clusters(&spec).expect("valid fixture spec");
    (data.train.points, data.holdout.points)
}
