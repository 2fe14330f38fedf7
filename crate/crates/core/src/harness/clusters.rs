use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GeomcaError, Result};
use crate::pointset::{PointSet, SetLabel};

/// Train/holdout class sizes of the twelve-class box-arrangement data used
/// for the mode truncation experiment.
pub const BOX_TRAIN: [usize; 12] = [670, 690, 395, 706, 349, 409, 295, 296, 292, 311, 258, 331];
pub const BOX_HOLDOUT: [usize; 12] = [666, 625, 373, 684, 429, 377, 309, 312, 310, 293, 279, 345];

/// Isotropic Gaussian classes with pairwise-equidistant centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub dim: usize,
    /// Distance between any two class centers (along a line when
    /// `dim < num_classes`, in which case only neighbours are this far apart).
    pub separation: f64,
    /// Per-class standard deviation.
    pub stds: Vec<f64>,
    pub train_counts: Vec<usize>,
    pub holdout_counts: Vec<usize>,
    pub seed: u64,
}

impl ClusterSpec {
    /// `num_classes` classes of equal size and spread.
    pub fn uniform(
        num_classes: usize,
        dim: usize,
        train_per_class: usize,
        holdout_per_class: usize,
        std: f64,
        separation: f64,
        seed: u64,
    ) -> Self {
        Self {
            dim,
            separation,
            stds: vec![std; num_classes],
            train_counts: vec![train_per_class; num_classes],
            holdout_counts: vec![holdout_per_class; num_classes],
            seed,
        }
    }

    /// Twelve classes in twelve dimensions with the box-arrangement class
    /// sizes multiplied by `scale` (rounded, at least 1).
    pub fn boxes(scale: f64, std: f64, separation: f64, seed: u64) -> Self {
        let scaled = |c: &usize| ((*c as f64 * scale).round() as usize).max(1);
        Self {
            dim: 12,
            separation,
            stds: vec![std; 12],
            train_counts: BOX_TRAIN.iter().map(scaled).collect(),
            holdout_counts: BOX_HOLDOUT.iter().map(scaled).collect(),
            seed,
        }
    }

    /// Keeps only the first `n` classes.
    pub fn truncated(mut self, n: usize) -> Self {
        self.stds.truncate(n);
        self.train_counts.truncate(n);
        self.holdout_counts.truncate(n);
        self
    }

    pub fn num_classes(&self) -> usize {
        self.stds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_classes();
        let bad = |msg: String| Err(GeomcaError::InvalidParameter(msg));
        if k == 0 {
            return bad("cluster spec has no classes".into());
        }
        if self.dim == 0 {
            return bad("cluster dimension must be at least 1".into());
        }
        if self.train_counts.len() != k || self.holdout_counts.len() != k {
            return bad(format!(
                "{k} classes but {} train and {} holdout counts",
                self.train_counts.len(),
                self.holdout_counts.len()
            ));
        }
        if self.train_counts.iter().chain(&self.holdout_counts).any(|&c| c == 0) {
            return bad("class counts must be at least 1".into());
        }
        if !self.separation.is_finite() || self.separation <= 0.0 {
            return bad(format!("separation must be > 0, got {}", self.separation));
        }
        if self.stds.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("class standard deviations must be finite and >= 0".into());
        }
        Ok(())
    }

    /// Class centers: scaled basis vectors when there is room (every pair
    /// exactly `separation` apart), otherwise evenly spaced on the first axis.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let k = self.num_classes();
        (0..k)
            .map(|c| {
                let mut v = vec![0.0; self.dim];
                if self.dim >= k {
                    v[c] = self.separation / std::f64::consts::SQRT_2;
                } else {
                    v[0] = c as f64 * self.separation;
                }
                v
            })
            .collect()
    }
}

/// Points with their class labels, stored class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub points: PointSet,
    pub classes: Vec<usize>,
}

impl LabeledSet {
    /// Points whose class satisfies `keep`, in stored order.
    pub fn filter_classes(&self, keep: impl Fn(usize) -> bool) -> Result<LabeledSet> {
        let ids: Vec<usize> = (0..self.classes.len())
            .filter(|&i| keep(self.classes[i]))
            .collect();
        self.select(&ids)
    }

    pub fn select(&self, ids: &[usize]) -> Result<LabeledSet> {
        Ok(LabeledSet {
            points: self.points.select(ids)?,
            classes: ids.iter().map(|&i| self.classes[i]).collect(),
        })
    }

    /// Ids of the points of class `class`.
    pub fn ids_of(&self, class: usize) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| self.classes[i] == class)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterData {
    /// Labelled as the reference set.
    pub train: LabeledSet,
    /// Labelled as the evaluation set.
    pub holdout: LabeledSet,
}

/// Seeded Gaussian samples: all train classes first, then all holdout
/// classes, each class-major.
pub fn generate_clusters(spec: &ClusterSpec) -> Result<ClusterData> {
    spec.validate()?;
    let centers = spec.centers();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sample = |counts: &[usize], label: SetLabel| -> Result<LabeledSet> {
        let total: usize = counts.iter().sum();
        let mut data = Vec::with_capacity(total * spec.dim);
        let mut classes = Vec::with_capacity(total);
        for (class, &count) in counts.iter().enumerate() {
            let std = spec.stds[class];
            for _ in 0..count {
                for &c in &centers[class] {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data.push(c + std * z);
                }
                classes.push(class);
            }
        }
        Ok(LabeledSet {
            points: PointSet::from_flat(data, spec.dim, label)?,
            classes,
        })
    };
    let train = sample(&spec.train_counts, SetLabel::Reference)?;
    let holdout = sample(&spec.holdout_counts, SetLabel::Evaluation)?;
    Ok(ClusterData { train, holdout })
}
