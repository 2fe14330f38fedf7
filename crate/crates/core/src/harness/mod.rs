//! Synthetic experiments on seeded Gaussian classes: mode truncation,
//! class separability over epsilon, threshold sweeps, delta/epsilon sweeps
//! and sample-size robustness.

mod clusters;
mod sweep;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use clusters::{
    generate_clusters, ClusterData, ClusterSpec, LabeledSet, BOX_HOLDOUT, BOX_TRAIN,
};
pub use sweep::{DrillEntry, SweepCheck, SweepResult, SweepRow};

use crate::epsgraph::GraphOptions;
use crate::error::{GeomcaError, Result};
use crate::ipr::ipr;
use crate::pointset::{estimate_epsilon, EpsilonEstimate, PointSet};
use crate::scores::{evaluate, precision_recall, Evaluation, GeomcaParams};

fn streaming() -> GraphOptions {
    GraphOptions {
        keep_edges: false,
        ..GraphOptions::default()
    }
}

fn strictly_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(GeomcaError::InvalidParameter(format!("{what} is empty")));
    }
    if values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(GeomcaError::InvalidParameter(format!(
            "{what} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Estimates epsilon on `r`, shrinking the sample size to fit if needed.
pub fn estimate_on(r: &PointSet, percentile: f64, k: usize, seed: u64) -> Result<EpsilonEstimate> {
    let k = k.min(r.len() / 2).max(1);
    estimate_epsilon(r, percentile, k, seed)
}

fn subsample(points: &PointSet, size: usize, rng: &mut ChaCha8Rng) -> Result<PointSet> {
    if size == points.len() {
        return Ok(points.clone());
    }
    let mut ids = index::sample(rng, points.len(), size).into_vec();
    ids.sort_unstable();
    points.select(&ids)
}

fn drilldown(ev: &Evaluation, min_size: u64) -> Vec<DrillEntry> {
    ev.graph
        .components()
        .iter()
        .zip(&ev.local.scores)
        .take_while(|(c, _)| c.v_total() > min_size)
        .map(|(c, s)| DrillEntry {
            id: c.comp_id,
            size: c.v_total(),
            c: s.consistency,
            q: s.quality,
            origin: match (c.counts.v_r > 0, c.counts.v_e > 0) {
                (true, true) => "mixed",
                (true, false) => "pure-R",
                _ => "pure-E",
            }
            .to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTruncationConfig {
    /// `R` holds the training points of classes `0..reference_classes`.
    pub reference_classes: usize,
    /// `E_t` holds the holdout points of classes `0..=t` for `t = 0..=t_max`.
    pub t_max: usize,
    pub percentile: f64,
    pub sample_k: usize,
    pub eps_seed: u64,
    /// Sparsification distance as a multiple of epsilon.
    pub delta_factor: Option<f64>,
    pub eta_c: f64,
    pub eta_q: f64,
    /// Neighbourhood size for the IPR baseline; `None` skips it.
    pub ipr_k: Option<usize>,
    pub ipr_seed: u64,
    /// Components larger than this are listed per row.
    pub drilldown_min_size: u64,
    /// When set, each class added after the first contributes a random-size
    /// subset of its holdout points, drawn with this seed.
    pub corrupt_seed: Option<u64>,
}

impl Default for ModeTruncationConfig {
    fn default() -> Self {
        Self {
            reference_classes: 7,
            t_max: 11,
            percentile: 1.0,
            sample_k: 1000,
            eps_seed: 0,
            delta_factor: Some(0.5),
            eta_c: 0.75,
            eta_q: 0.45,
            ipr_k: Some(3),
            ipr_seed: 0,
            drilldown_min_size: 100,
            corrupt_seed: None,
        }
    }
}

/// The reference set and the nested evaluation sets of a truncation run.
#[derive(Debug, Clone)]
pub struct TruncationSets {
    pub reference: PointSet,
    /// `evaluation[t]` is `E_t`.
    pub evaluation: Vec<PointSet>,
    pub estimate: EpsilonEstimate,
}

impl TruncationSets {
    pub fn params(&self, cfg: &ModeTruncationConfig) -> GeomcaParams {
        let epsilon = self.estimate.epsilon;
        GeomcaParams {
            epsilon,
            delta: cfg.delta_factor.map(|f| f * epsilon),
            eta_c: cfg.eta_c,
            eta_q: cfg.eta_q,
        }
    }
}

pub fn truncation_sets(spec: &ClusterSpec, cfg: &ModeTruncationConfig) -> Result<TruncationSets> {
    let classes = spec.num_classes();
    if classes < cfg.t_max + 1 || classes < cfg.reference_classes || cfg.reference_classes == 0 {
        return Err(GeomcaError::InvalidParameter(format!(
            "{classes} classes cannot cover t_max = {} with {} reference classes",
            cfg.t_max, cfg.reference_classes
        )));
    }
    let data = generate_clusters(spec)?;
    let reference = data
        .train
        .filter_classes(|c| c < cfg.reference_classes)?
        .points;
    let estimate = estimate_on(&reference, cfg.percentile, cfg.sample_k, cfg.eps_seed)?;

    let mut rng = cfg.corrupt_seed.map(ChaCha8Rng::seed_from_u64);
    let mut chosen: Vec<usize> = Vec::new();
    let mut evaluation = Vec::with_capacity(cfg.t_max + 1);
    for t in 0..=cfg.t_max {
        let ids = data.holdout.ids_of(t);
        match rng.as_mut() {
            Some(rng) if t > 0 => {
                let size = rng.random_range(1..=ids.len());
                let mut picks = index::sample(rng, ids.len(), size).into_vec();
                picks.sort_unstable();
                chosen.extend(picks.into_iter().map(|p| ids[p]));
            }
            _ => chosen.extend(ids),
        }
        evaluation.push(data.holdout.points.select(&chosen)?);
    }
    Ok(TruncationSets {
        reference,
        evaluation,
        estimate,
    })
}

/// Scores `R` against every `E_t`, with epsilon estimated once on `R`.
pub fn mode_truncation(spec: &ClusterSpec, cfg: &ModeTruncationConfig) -> Result<SweepResult> {
    let sets = truncation_sets(spec, cfg)?;
    let params = sets.params(cfg);
    let mut out = SweepResult::new("mode-truncation", &["t"]);
    for (t, e_t) in sets.evaluation.iter().enumerate() {
        let ev = evaluate(&sets.reference, e_t, &params, &streaming())?;
        let mut row = SweepRow::from_evaluation(vec![t as f64], &ev);
        row.drilldown = Some(drilldown(&ev, cfg.drilldown_min_size));
        if let Some(k) = cfg.ipr_k {
            row.ipr = Some(ipr(&sets.reference, e_t, k, cfg.ipr_seed)?);
        }
        out.rows.push(row);
    }

    let collapse: Vec<f64> = out
        .rows
        .iter()
        .take(cfg.reference_classes)
        .map(|r| r.recall)
        .collect();
    out.check(
        "recall non-decreasing while E_t covers a subset of R's classes",
        collapse.windows(2).all(|w| w[0] <= w[1]),
        format!("{collapse:?}"),
    );
    let matched = cfg.reference_classes - 1;
    if cfg.t_max > matched {
        let p_match = out.rows[matched].precision;
        let p_last = out.rows[cfg.t_max].precision;
        out.check(
            "precision drops once E_t adds classes absent from R",
            p_last < p_match,
            format!("P(t={matched}) = {p_match}, P(t={}) = {p_last}", cfg.t_max),
        );
    }
    Ok(out)
}

/// Counts components with more than `min_component_size` vertices as epsilon
/// grows, on the train (`R`) and holdout (`E`) points of every class.
pub fn separability_sweep(
    spec: &ClusterSpec,
    eps_values: &[f64],
    min_component_size: u64,
) -> Result<SweepResult> {
    strictly_increasing(eps_values, "epsilon values")?;
    let data = generate_clusters(spec)?;
    let mut out = SweepResult::new("eps-sweep", &["epsilon"]);
    for &epsilon in eps_values {
        let params = GeomcaParams::new(epsilon);
        let ev = evaluate(&data.train.points, &data.holdout.points, &params, &streaming())?;
        let mut row = SweepRow::from_evaluation(vec![epsilon], &ev);
        row.large_components = Some(
            ev.graph
                .components()
                .iter()
                .filter(|c| c.v_total() > min_component_size)
                .count(),
        );
        out.rows.push(row);
    }
    Ok(out)
}

/// Precision and recall of a fixed graph over a grid of thresholds, with
/// monotonicity checks along both axes.
pub fn eta_sweep(ev: &Evaluation, eta_c_grid: &[f64], eta_q_grid: &[f64]) -> Result<SweepResult> {
    strictly_increasing(eta_c_grid, "eta_c grid")?;
    strictly_increasing(eta_q_grid, "eta_q grid")?;
    let mut out = SweepResult::new("eta-sweep", &["eta_c", "eta_q"]);
    let mut grid = vec![vec![(0.0, 0.0); eta_q_grid.len()]; eta_c_grid.len()];
    for (a, &eta_c) in eta_c_grid.iter().enumerate() {
        for (b, &eta_q) in eta_q_grid.iter().enumerate() {
            let pr = precision_recall(&ev.graph, &ev.local, eta_c, eta_q)?;
            grid[a][b] = (pr.precision, pr.recall);
            let mut row = SweepRow::from_evaluation(vec![eta_c, eta_q], ev);
            row.precision = pr.precision;
            row.recall = pr.recall;
            out.rows.push(row);
        }
    }
    let le = |x: (f64, f64), y: (f64, f64)| x.0 <= y.0 && x.1 <= y.1;
    let along_c = (1..eta_c_grid.len())
        .all(|a| (0..eta_q_grid.len()).all(|b| le(grid[a][b], grid[a - 1][b])));
    let along_q = (0..eta_c_grid.len())
        .all(|a| (1..eta_q_grid.len()).all(|b| le(grid[a][b], grid[a][b - 1])));
    out.check("P and R non-increasing in eta_c", along_c, "");
    out.check("P and R non-increasing in eta_q", along_q, "");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEpsConfig {
    /// Delta as a multiple of epsilon, each in (0, 1].
    pub delta_factors: Vec<f64>,
    pub eps_percentiles: Vec<f64>,
    pub sample_k: usize,
    pub eps_seed: u64,
    pub eta_c: f64,
    pub eta_q: f64,
}

impl Default for DeltaEpsConfig {
    fn default() -> Self {
        Self {
            delta_factors: vec![0.6, 0.8, 1.0],
            eps_percentiles: vec![10.0, 20.0, 30.0],
            sample_k: 1000,
            eps_seed: 0,
            eta_c: 0.0,
            eta_q: 0.0,
        }
    }
}

/// Runs every `(percentile, delta factor)` cell on `R` = train, `E` =
/// holdout.
pub fn delta_eps_sweep(spec: &ClusterSpec, cfg: &DeltaEpsConfig) -> Result<SweepResult> {
    strictly_increasing(&cfg.eps_percentiles, "epsilon percentiles")?;
    strictly_increasing(&cfg.delta_factors, "delta factors")?;
    if cfg.delta_factors.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(GeomcaError::InvalidParameter(
            "delta factors must lie in (0, 1]".into(),
        ));
    }
    let data = generate_clusters(spec)?;
    let (r, e) = (&data.train.points, &data.holdout.points);
    let mut out = SweepResult::new("delta-eps-sweep", &["eps_percentile", "delta_factor"]);
    for &p in &cfg.eps_percentiles {
        let epsilon = estimate_on(r, p, cfg.sample_k, cfg.eps_seed)?.epsilon;
        for &f in &cfg.delta_factors {
            let params = GeomcaParams {
                epsilon,
                delta: Some(f * epsilon),
                eta_c: cfg.eta_c,
                eta_q: cfg.eta_q,
            };
            let ev = evaluate(r, e, &params, &streaming())?;
            out.rows.push(SweepRow::from_evaluation(vec![p, f], &ev));
        }
    }

    for &p in &cfg.eps_percentiles {
        let Some(full) = out.row_at(&[p, 1.0]).cloned() else {
            continue;
        };
        out.check(
            &format!("p={p}: delta = eps gives network quality 1"),
            full.num_edges == 0 || full.network_quality == 1.0,
            format!("q = {}, edges = {}", full.network_quality, full.num_edges),
        );
        for &f in cfg.delta_factors.iter().filter(|&&f| f < 1.0) {
            let cell = out.row_at(&[p, f]).cloned().unwrap();
            out.check(
                &format!("p={p}: delta = {f} eps keeps P, R at or above delta = eps"),
                cell.precision >= full.precision && cell.recall >= full.recall,
                format!(
                    "P {} vs {}, R {} vs {}",
                    cell.precision, full.precision, cell.recall, full.recall
                ),
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeConfig {
    pub sizes: Vec<usize>,
    pub percentile: f64,
    pub sample_k: usize,
    pub eps_seed: u64,
    pub subsample_seed: u64,
    pub delta_factor: Option<f64>,
    pub eta_c: f64,
    pub eta_q: f64,
}

impl Default for SampleSizeConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100, 500, 1000, 2500, 5000],
            percentile: 10.0,
            sample_k: 1000,
            eps_seed: 0,
            subsample_seed: 0,
            delta_factor: Some(1.0),
            eta_c: 0.0,
            eta_q: 0.0,
        }
    }
}

/// Subsamples `R` = train and `E` = holdout to each size and reruns the
/// pipeline with epsilon fixed from the full `R`. Rows are in ascending size
/// order and carry stage timings.
pub fn sample_size_sweep(spec: &ClusterSpec, cfg: &SampleSizeConfig) -> Result<SweepResult> {
    let data = generate_clusters(spec)?;
    let (r, e) = (&data.train.points, &data.holdout.points);
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let max = r.len().min(e.len());
    if sizes.is_empty() || sizes[0] == 0 || *sizes.last().unwrap() > max {
        return Err(GeomcaError::InvalidParameter(format!(
            "sample sizes must lie in 1..={max}"
        )));
    }
    let epsilon = estimate_on(r, cfg.percentile, cfg.sample_k, cfg.eps_seed)?.epsilon;
    let params = GeomcaParams {
        epsilon,
        delta: cfg.delta_factor.map(|f| f * epsilon),
        eta_c: cfg.eta_c,
        eta_q: cfg.eta_q,
    };
    let mut out = SweepResult::new("size-sweep", &["size"]);
    for &size in &sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.subsample_seed);
        rng.set_stream(size as u64);
        let r_s = subsample(r, size.min(r.len()), &mut rng)?;
        let e_s = subsample(e, size.min(e.len()), &mut rng)?;
        let ev = evaluate(&r_s, &e_s, &params, &streaming())?;
        let mut row = SweepRow::from_evaluation(vec![size as f64], &ev);
        row.timings = Some(ev.timings);
        out.rows.push(row);
    }
    Ok(out)
}
