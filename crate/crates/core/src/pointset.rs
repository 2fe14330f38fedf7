//! Point sets, file ingestion, the distance metric, and percentile-based
//! estimation of the graph radius.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomcaError, Result};

/// Identifier of the sampler used by [`estimate_epsilon`], recorded in reports.
pub const SAMPLER_ID: &str = "chacha8rng/rand-index-sample";

const GCPC_MAGIC: &[u8; 4] = b"GCPC";
const GCPC_VERSION: u32 = 1;
const GCPC_HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetLabel {
    Reference,
    Evaluation,
}

impl SetLabel {
    pub fn short(self) -> &'static str {
        match self {
            SetLabel::Reference => "R",
            SetLabel::Evaluation => "E",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    Csv,
    GcpcBinary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

/// An indexed collection of equal-dimension finite vectors, stored row-major
/// in `f64`. Point ids are the row indices `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
    label: SetLabel,
}

impl PointSet {
    /// Builds a point set from a flat row-major buffer.
    pub fn from_flat(data: Vec<f64>, dim: usize, label: SetLabel) -> Result<Self> {
        if data.is_empty() {
            return Err(GeomcaError::Empty);
        }
        if dim == 0 {
            return Err(GeomcaError::InvalidParameter(
                "point dimension must be at least 1".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(GeomcaError::DimensionMismatch {
                row: data.len() / dim,
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(GeomcaError::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { data, dim, label })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], label: SetLabel) -> Result<Self> {
        let first = rows.first().ok_or(GeomcaError::Empty)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(GeomcaError::DimensionMismatch {
                    row: i,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim, label)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> SetLabel {
        self.label
    }

    pub fn with_label(mut self, label: SetLabel) -> Self {
        self.label = label;
        self
    }

    #[inline]
    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// New point set holding the given rows, in the given order. Ids of the
    /// result are renumbered `0..ids.len()`.
    ///
    /// Panics if any id is out of range.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for &id in ids {
            data.extend_from_slice(self.row(id));
        }
        Self::from_flat(data, self.dim, self.label)
    }

    /// Concatenates two point sets of equal dimension, keeping `self`'s label.
    pub fn concat(&self, other: &PointSet) -> Result<Self> {
        if self.dim != other.dim {
            return Err(GeomcaError::DimensionMismatch {
                row: self.len(),
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::from_flat(data, self.dim, self.label)
    }
}

/// Reads a point set from disk. Row order is preserved.
pub fn load_pointset(path: &Path, format: FileFormat, label: SetLabel) -> Result<PointSet> {
    let bytes = fs::read(path).map_err(|source| GeomcaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        FileFormat::Csv => parse_csv(&bytes, label),
        FileFormat::GcpcBinary => parse_gcpc(&bytes, label),
    }
}

pub fn parse_csv(bytes: &[u8], label: SetLabel) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut data = Vec::new();
    let mut dim = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| GeomcaError::Parse {
            line: row + 1,
            message: e.to_string(),
        })?;
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(GeomcaError::DimensionMismatch {
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| GeomcaError::Parse {
                line: row + 1,
                message: format!("column {col}: `{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(GeomcaError::NonFinite { row, col });
            }
            data.push(value);
        }
    }
    match dim {
        None => Err(GeomcaError::Empty),
        Some(dim) => PointSet::from_flat(data, dim, label),
    }
}

pub fn parse_gcpc(bytes: &[u8], label: SetLabel) -> Result<PointSet> {
    if bytes.is_empty() {
        return Err(GeomcaError::Empty);
    }
    if bytes.len() < GCPC_HEADER_LEN {
        return Err(GeomcaError::Format(format!(
            "header needs {GCPC_HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    if &bytes[..4] != GCPC_MAGIC {
        return Err(GeomcaError::Format("bad magic, expected \"GCPC\"".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != GCPC_VERSION {
        return Err(GeomcaError::Format(format!(
            "unsupported version {version}"
        )));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let dim = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if n == 0 {
        return Err(GeomcaError::Empty);
    }
    if dim == 0 {
        return Err(GeomcaError::Format("dimension is zero".into()));
    }
    let payload_len = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| GeomcaError::Format("n * dim overflows".into()))?;
    let payload = &bytes[GCPC_HEADER_LEN..];
    if payload.len() < payload_len {
        return Err(GeomcaError::Format(format!(
            "expected {payload_len} payload bytes, found {}",
            payload.len()
        )));
    }
    if payload.len() > payload_len {
        return Err(GeomcaError::Format(format!(
            "{} trailing bytes after payload",
            payload.len() - payload_len
        )));
    }
    let dim = dim as usize;
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    PointSet::from_flat(data, dim, label)
}

/// Encodes a point set as GCPC (coordinates narrowed to `f32`).
pub fn encode_gcpc(points: &PointSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(GCPC_HEADER_LEN + points.as_flat().len() * 4);
    out.extend_from_slice(GCPC_MAGIC);
    out.extend_from_slice(&GCPC_VERSION.to_le_bytes());
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    out.extend_from_slice(&(points.dim() as u64).to_le_bytes());
    for &v in points.as_flat() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn write_gcpc(path: &Path, points: &PointSet) -> Result<()> {
    let io_err = |source| GeomcaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&encode_gcpc(points)).map_err(io_err)
}

/// Squared Euclidean distance. Callers guarantee equal lengths.
///
/// Four independent accumulators let the compiler vectorize the loop; every
/// distance in the crate goes through this function so results agree bit for
/// bit regardless of which code path computed them.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail_a = chunks_a.remainder();
    let tail_b = chunks_b.remainder();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for lane in 0..4 {
            let d = ca[lane] - cb[lane];
            acc[lane] += d * d;
        }
    }
    for (x, y) in tail_a.iter().zip(tail_b) {
        let d = x - y;
        acc[0] += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Euclidean distance between two vectors.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(GeomcaError::DimensionMismatch {
            row: 1,
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Strict `d(a, b) < radius` test, with the square root taken only near the
/// boundary so the answer matches `distance(a, b) < radius` exactly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadiusTest {
    radius: f64,
    sq_upper: f64,
}

impl RadiusTest {
    pub(crate) fn new(radius: f64) -> Self {
        Self {
            radius,
            sq_upper: radius * radius * (1.0 + 1e-9),
        }
    }

    /// Returns the distance when it is strictly below the radius.
    #[inline]
    pub(crate) fn below(&self, sq: f64) -> Option<f64> {
        if sq >= self.sq_upper {
            return None;
        }
        let d = sq.sqrt();
        (d < self.radius).then_some(d)
    }

    /// Returns true when the distance is at most the radius.
    #[inline]
    pub(crate) fn within(&self, sq: f64) -> bool {
        sq <= self.sq_upper && sq.sqrt() <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub percentile: f64,
    pub sample_size: usize,
    pub seed: u64,
    pub num_distances: usize,
    pub sampler: String,
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn nearest_rank_percentile(values: &mut [f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(GeomcaError::Empty);
    }
    check_percentile(p)?;
    let n = values.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    let rank = rank.clamp(1, n);
    let (_, value, _) = values.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*value)
}

fn check_percentile(p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 || p > 100.0 {
        return Err(GeomcaError::InvalidParameter(format!(
            "percentile must lie in (0, 100], got {p}"
        )));
    }
    Ok(())
}

/// Estimates the graph radius as the `p`-th percentile of the `k * k`
/// distances between two disjoint random halves of a `2k` sample of `r`.
pub fn estimate_epsilon(r: &PointSet, p: f64, k: usize, seed: u64) -> Result<EpsilonEstimate> {
    check_percentile(p)?;
    if k == 0 {
        return Err(GeomcaError::InvalidParameter("k must be at least 1".into()));
    }
    let required = k.checked_mul(2).ok_or_else(|| {
        GeomcaError::InvalidParameter(format!("k = {k} is too large"))
    })?;
    if r.len() < required {
        return Err(GeomcaError::TooFewForSample {
            n: r.len(),
            k,
            required,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = index::sample(&mut rng, r.len(), required).into_vec();
    let (first, second) = sample.split_at(k);
    let epsilon = epsilon_from_indices(r, p, first, second)?;
    Ok(EpsilonEstimate {
        epsilon,
        percentile: p,
        sample_size: k,
        seed,
        num_distances: k * k,
        sampler: SAMPLER_ID.to_string(),
    })
}

/// Percentile of the cross distances `d(r[i], r[j])` for `i` in `first` and
/// `j` in `second`.
pub fn epsilon_from_indices(
    r: &PointSet,
    p: f64,
    first: &[usize],
    second: &[usize],
) -> Result<f64> {
    let mut dists = Vec::with_capacity(first.len() * second.len());
    for &i in first {
        let a = r.row(i);
        for &j in second {
            dists.push(squared_distance(a, r.row(j)).sqrt());
        }
    }
    nearest_rank_percentile(&mut dists, p)
}
