//! Greedy geometric sparsification: a subset whose pairwise distances all
//! exceed `delta`, with every dropped point covered by a keeper within
//! `delta`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomcaError, Result};
use crate::pointset::{squared_distance, PointSet, RadiusTest};

/// Name of the visiting order, recorded in reports.
pub const GREEDY_ORDER: &str = "ascending-id";

// Below this many keepers the scan stays serial.
const PAR_SCAN_MIN: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyResult {
    /// Kept ids in ascending order.
    pub kept: Vec<usize>,
    /// Dropped id to the first kept id found within `delta`.
    pub cover: BTreeMap<usize, usize>,
    pub delta: f64,
}

impl SparsifyResult {
    pub fn num_kept(&self) -> usize {
        self.kept.len()
    }
}

/// Visits points in ascending id order and keeps a point iff it is farther
/// than `delta` from every point kept so far.
pub fn sparsify(w: &PointSet, delta: f64) -> Result<SparsifyResult> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(GeomcaError::InvalidParameter(format!(
            "sparsification delta must be finite and >= 0, got {delta}"
        )));
    }
    let test = RadiusTest::new(delta);
    let mut kept: Vec<usize> = Vec::new();
    let mut cover = BTreeMap::new();

    for id in 0..w.len() {
        let p = w.row(id);
        let covers = |&k: &usize| test.within(squared_distance(p, w.row(k)));
        let keeper = if kept.len() >= PAR_SCAN_MIN {
            kept.par_iter().position_first(covers).map(|pos| kept[pos])
        } else {
            kept.iter().position(covers).map(|pos| kept[pos])
        };
        match keeper {
            Some(k) => {
                cover.insert(id, k);
            }
            None => kept.push(id),
        }
    }
    Ok(SparsifyResult { kept, cover, delta })
}
