#![allow(dead_code)]

use std::collections::BTreeSet;

use geomca::{distance, PointSet, SetLabel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn d(a: &[f64], b: &[f64]) -> f64 {
    distance(a, b).unwrap()
}

/// Mixed-origin fixture with `n_r + n_e <= max_points`, dims 1 to 16. Half
/// of the fixtures sit on an integer grid so that exact distance ties occur.
pub fn random_fixture(rng: &mut ChaCha8Rng, max_points: usize) -> (PointSet, PointSet) {
    let dim = rng.random_range(1..=16);
    let total = rng.random_range(2..=max_points);
    let n_r = rng.random_range(1..total);
    let n_e = total - n_r;
    let grid = rng.random_bool(0.5);
    let blobs: Vec<Vec<f64>> = (0..rng.random_range(1..=4))
        .map(|_| (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    let draw = |n: usize, label: SetLabel, rng: &mut ChaCha8Rng| {
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let c = &blobs[rng.random_range(0..blobs.len())];
            for &x in c {
                let v = if grid {
                    rng.random_range(-2i32..=2) as f64 + x.round()
                } else {
                    let z: f64 = StandardNormal.sample(rng);
                    x + z
                };
                data.push(v);
            }
        }
        PointSet::from_flat(data, dim, label).unwrap()
    };
    let r = draw(n_r, SetLabel::Reference, rng);
    let e = draw(n_e, SetLabel::Evaluation, rng);
    (r, e)
}

/// Either an existing pairwise distance (so ties at epsilon happen) or a
/// uniform draw below the largest one.
pub fn random_epsilon(rng: &mut ChaCha8Rng, r: &PointSet, e: &PointSet) -> f64 {
    let all = r.concat(e).unwrap();
    let n = all.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    let pick = d(all.row(a), all.row(b));
    let eps = if rng.random_bool(0.5) {
        pick
    } else {
        rng.random_range(0.0..=1.0) * pick.max(1.0) * 1.5
    };
    eps.max(1e-3)
}

/// Greedy cover in index order, written directly from the definition.
pub fn oracle_sparsify(w: &PointSet, delta: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..w.len() {
        if kept.iter().all(|&k| d(w.row(i), w.row(k)) > delta) {
            kept.push(i);
        }
    }
    kept
}

/// Reachability closure of a symmetric adjacency matrix, one bitset per
/// vertex, reflexive.
pub fn closure(adj: &[Vec<bool>]) -> Vec<Vec<u64>> {
    let n = adj.len();
    let words = n.div_ceil(64);
    let mut reach = vec![vec![0u64; words]; n];
    for i in 0..n {
        reach[i][i / 64] |= 1 << (i % 64);
        for j in 0..n {
            if adj[i][j] {
                reach[i][j / 64] |= 1 << (j % 64);
            }
        }
    }
    for k in 0..n {
        let row_k = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k / 64] >> (k % 64) & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&row_k) {
                    *x |= y;
                }
            }
        }
    }
    reach
}

/// Equivalence classes of the closure, as sorted vertex lists.
pub fn closure_classes(adj: &[Vec<bool>]) -> BTreeSet<Vec<usize>> {
    let reach = closure(adj);
    let n = adj.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| reach[i][j / 64] >> (j % 64) & 1 == 1)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComponent {
    /// Original (pre-sparsification) ids.
    pub members_r: Vec<usize>,
    pub members_e: Vec<usize>,
    pub e_rr: u64,
    pub e_ee: u64,
    pub e_het: u64,
    pub c: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct Oracle {
    pub components: Vec<OracleComponent>,
    pub network_c: f64,
    pub network_q: f64,
    pub precision: f64,
    pub recall: f64,
    pub num_edges: u64,
}

fn scores(v_r: u64, v_e: u64, e_rr: u64, e_ee: u64, e_het: u64) -> (f64, f64) {
    let v = v_r + v_e;
    let c = 1.0 - v_r.abs_diff(v_e) as f64 / v as f64;
    let e = e_rr + e_ee + e_het;
    let q = if e == 0 {
        0.0
    } else {
        1.0 - (e_rr + e_ee) as f64 / e as f64
    };
    (c, q)
}

/// Dense-matrix pipeline: sparsify, full distance matrix, closure
/// components, then the scores from their counting definitions.
pub fn oracle_pipeline(
    r: &PointSet,
    e: &PointSet,
    epsilon: f64,
    delta: Option<f64>,
    eta_c: f64,
    eta_q: f64,
) -> Oracle {
    let kept_r = delta.map_or_else(|| (0..r.len()).collect(), |dl| oracle_sparsify(r, dl));
    let kept_e = delta.map_or_else(|| (0..e.len()).collect(), |dl| oracle_sparsify(e, dl));
    let mut verts: Vec<(bool, usize, &[f64])> = Vec::new();
    verts.extend(kept_r.iter().map(|&i| (true, i, r.row(i))));
    verts.extend(kept_e.iter().map(|&i| (false, i, e.row(i))));
    let n = verts.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            adj[i][j] = i != j && d(verts[i].2, verts[j].2) < epsilon;
        }
    }
    let mut components = Vec::new();
    let (mut tot_rr, mut tot_ee, mut tot_het) = (0u64, 0u64, 0u64);
    let (mut in_r, mut in_e) = (0u64, 0u64);
    for class in closure_classes(&adj) {
        let (mut e_rr, mut e_ee, mut e_het) = (0u64, 0u64, 0u64);
        for (a, &i) in class.iter().enumerate() {
            for &j in &class[a + 1..] {
                if adj[i][j] {
                    match (verts[i].0, verts[j].0) {
                        (true, true) => e_rr += 1,
                        (false, false) => e_ee += 1,
                        _ => e_het += 1,
                    }
                }
            }
        }
        let members_r: Vec<usize> = class.iter().filter(|&&i| verts[i].0).map(|&i| verts[i].1).collect();
        let members_e: Vec<usize> = class.iter().filter(|&&i| !verts[i].0).map(|&i| verts[i].1).collect();
        let (c, q) = scores(members_r.len() as u64, members_e.len() as u64, e_rr, e_ee, e_het);
        if c > eta_c && q > eta_q {
            in_r += members_r.len() as u64;
            in_e += members_e.len() as u64;
        }
        tot_rr += e_rr;
        tot_ee += e_ee;
        tot_het += e_het;
        components.push(OracleComponent {
            members_r,
            members_e,
            e_rr,
            e_ee,
            e_het,
            c,
            q,
        });
    }
    let (network_c, network_q) = scores(
        kept_r.len() as u64,
        kept_e.len() as u64,
        tot_rr,
        tot_ee,
        tot_het,
    );
    Oracle {
        components,
        network_c,
        network_q,
        precision: in_e as f64 / kept_e.len() as f64,
        recall: in_r as f64 / kept_r.len() as f64,
        num_edges: tot_rr + tot_ee + tot_het,
    }
}

/// k-th nearest neighbour radius by sorting every distance.
pub fn oracle_radii(w: &PointSet, k: usize) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let mut ds: Vec<f64> = (0..w.len())
                .filter(|&j| j != i)
                .map(|j| d(w.row(i), w.row(j)))
                .collect();
            ds.sort_by(f64::total_cmp);
            ds[k - 1]
        })
        .collect()
}

/// Unbalanced improved precision and recall by exhaustive ball tests.
pub fn oracle_ipr(r: &PointSet, e: &PointSet, k: usize) -> (f64, f64) {
    let covered = |centers: &PointSet, queries: &PointSet| {
        let radii = oracle_radii(centers, k);
        let hits = queries
            .rows()
            .filter(|q| (0..centers.len()).any(|i| d(q, centers.row(i)) <= radii[i]))
            .count();
        hits as f64 / queries.len() as f64
    };
    (covered(r, e), covered(e, r))
}
