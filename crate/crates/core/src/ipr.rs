//! Improved precision and recall: each set's manifold is approximated by
//! balls around its points whose radii are the distance to the k-th nearest
//! neighbour within the same set. Precision is the fraction of `E` inside
//! some `R` ball, recall the fraction of `R` inside some `E` ball. Balls are
//! closed and never pruned.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomcaError, Result};
use crate::pointset::{squared_distance, PointSet};

const BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IprScores {
    pub precision: f64,
    pub recall: f64,
    pub k: usize,
    /// Points per set after balancing.
    pub n_balanced: usize,
    pub seed: u64,
}

/// Balances both sets to `min(|R|, |E|)` points by seeded subsampling of the
/// larger one, then scores them.
pub fn ipr(r: &PointSet, e: &PointSet, k: usize, seed: u64) -> Result<IprScores> {
    if k == 0 {
        return Err(GeomcaError::InvalidParameter("k must be at least 1".into()));
    }
    if r.dim() != e.dim() {
        return Err(GeomcaError::DimensionMismatch {
            row: 0,
            expected: r.dim(),
            found: e.dim(),
        });
    }
    for (set, n) in [("reference", r.len()), ("evaluation", e.len())] {
        if n <= k {
            return Err(GeomcaError::TooFewForNeighbors {
                set,
                n,
                k,
                required: k + 1,
            });
        }
    }
    let (r_bal, e_bal) = balance(r, e, seed)?;
    let (precision, recall) = ipr_unbalanced(&r_bal, &e_bal, k);
    Ok(IprScores {
        precision,
        recall,
        k,
        n_balanced: r_bal.len(),
        seed,
    })
}

/// Subsamples the larger set (without replacement, ids kept in ascending
/// order) down to the size of the smaller one.
pub fn balance(r: &PointSet, e: &PointSet, seed: u64) -> Result<(PointSet, PointSet)> {
    let m = r.len().min(e.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shrink = |w: &PointSet| -> Result<PointSet> {
        if w.len() == m {
            return Ok(w.clone());
        }
        let mut ids = index::sample(&mut rng, w.len(), m).into_vec();
        ids.sort_unstable();
        w.select(&ids)
    };
    let r_bal = shrink(r)?;
    let e_bal = shrink(e)?;
    Ok((r_bal, e_bal))
}

/// Scores two sets as given, without balancing. Requires more than `k`
/// points in each.
pub fn ipr_unbalanced(r: &PointSet, e: &PointSet, k: usize) -> (f64, f64) {
    let r_radii = knn_radii(r, k);
    let e_radii = knn_radii(e, k);
    (coverage(r, &r_radii, e), coverage(e, &e_radii, r))
}

/// Distance from each point to its k-th nearest neighbour in the same set,
/// the point itself excluded.
pub fn knn_radii(points: &PointSet, k: usize) -> Vec<f64> {
    let n = points.len();
    assert!(k >= 1 && n > k, "need more than k = {k} points, have {n}");
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(n);
            // per row: k smallest squared distances, ascending
            let mut best = vec![vec![f64::INFINITY; k]; end - start];
            let mut col = 0;
            while col < n {
                let col_end = (col + BLOCK).min(n);
                for i in start..end {
                    let a = points.row(i);
                    let heap = &mut best[i - start];
                    for j in col..col_end {
                        if j == i {
                            continue;
                        }
                        let sq = squared_distance(a, points.row(j));
                        if sq < heap[k - 1] {
                            let pos = heap.partition_point(|&x| x <= sq);
                            heap.insert(pos, sq);
                            heap.pop();
                        }
                    }
                }
                col = col_end;
            }
            best.into_iter().map(move |h| h[k - 1].sqrt())
        })
        .collect()
}

/// Fraction of `queries` lying in at least one closed ball
/// `B(centers[i], radii[i])`.
pub fn coverage(centers: &PointSet, radii: &[f64], queries: &PointSet) -> f64 {
    assert_eq!(centers.len(), radii.len());
    if queries.is_empty() {
        return 0.0;
    }
    let sq_bounds: Vec<f64> = radii.iter().map(|r| r * r * (1.0 + 1e-9)).collect();
    let covered: usize = (0..queries.len())
        .into_par_iter()
        .with_min_len(BLOCK)
        .filter(|&q| {
            let x = queries.row(q);
            (0..centers.len()).any(|i| {
                let sq = squared_distance(x, centers.row(i));
                sq <= sq_bounds[i] && sq.sqrt() <= radii[i]
            })
        })
        .count();
    covered as f64 / queries.len() as f64
}
