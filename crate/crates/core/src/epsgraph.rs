//! The epsilon-threshold graph on `R ∪ E` and its connected components.
//!
//! Vertices are numbered with all of `R` first (`0..n_R`) followed by all of
//! `E` (`n_R..n_R + n_E`). Two vertices are adjacent iff their Euclidean
//! distance is strictly below `epsilon`.
//!
//! Distances are streamed tile by tile: a batch of row blocks is scanned in
//! parallel, each block yielding its qualifying edges in `(i, j)` order, and
//! the batch is then folded into a union-find serially in block order. The
//! dense distance matrix never exists, and the result does not depend on the
//! number of worker threads.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomcaError, Result};
use crate::pointset::{squared_distance, PointSet, RadiusTest, SetLabel};
use crate::union_find::UnionFind;

pub const DEFAULT_MAX_EDGES: usize = 500_000_000;

const BLOCK: usize = 64;
const BATCH_BLOCKS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "RR")]
    RR,
    #[serde(rename = "EE")]
    EE,
    #[serde(rename = "het")]
    Het,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOptions {
    /// Retain the edge list. Component counts are available either way.
    pub keep_edges: bool,
    /// Upper bound on retained edges.
    pub max_edges: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            keep_edges: true,
            max_edges: DEFAULT_MAX_EDGES,
        }
    }
}

/// Vertex and edge counts of a subgraph, split by origin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub v_r: u64,
    pub v_e: u64,
    pub e_rr: u64,
    pub e_ee: u64,
    pub e_het: u64,
}

impl Counts {
    pub fn v_total(&self) -> u64 {
        self.v_r + self.v_e
    }

    pub fn e_total(&self) -> u64 {
        self.e_rr + self.e_ee + self.e_het
    }

    pub fn add(&mut self, other: &Counts) {
        self.v_r += other.v_r;
        self.v_e += other.v_e;
        self.e_rr += other.e_rr;
        self.e_ee += other.e_ee;
        self.e_het += other.e_het;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    /// Position in canonical order; 0 is the largest component.
    pub comp_id: usize,
    pub counts: Counts,
    /// Ids within `R` of the member points, ascending.
    pub members_r: Vec<usize>,
    /// Ids within `E` of the member points, ascending.
    pub members_e: Vec<usize>,
}

impl ComponentStats {
    pub fn v_total(&self) -> u64 {
        self.counts.v_total()
    }

    pub fn e_total(&self) -> u64 {
        self.counts.e_total()
    }

    /// Smallest vertex index in the component.
    pub fn min_vertex(&self, n_r: usize) -> usize {
        match (self.members_r.first(), self.members_e.first()) {
            (Some(&r), _) => r,
            (None, Some(&e)) => n_r + e,
            (None, None) => unreachable!("components are never empty"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpsilonGraph {
    epsilon: f64,
    n_r: usize,
    n_e: usize,
    edges: Option<Vec<Edge>>,
    components: Vec<ComponentStats>,
    component_of: Vec<u32>,
}

impl EpsilonGraph {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn num_vertices(&self) -> usize {
        self.n_r + self.n_e
    }

    pub fn origin(&self, vertex: usize) -> SetLabel {
        if vertex < self.n_r {
            SetLabel::Reference
        } else {
            SetLabel::Evaluation
        }
    }

    /// Id of the vertex within its own set.
    pub fn source_id(&self, vertex: usize) -> usize {
        if vertex < self.n_r {
            vertex
        } else {
            vertex - self.n_r
        }
    }

    pub fn edge_kind(&self, i: usize, j: usize) -> EdgeKind {
        edge_kind(self.n_r, i as u32, j as u32)
    }

    /// The edge list, sorted by `(i, j)`, when it was retained.
    pub fn edges(&self) -> Option<&[Edge]> {
        self.edges.as_deref()
    }

    pub fn num_edges(&self) -> u64 {
        self.components.iter().map(|c| c.e_total()).sum()
    }

    /// Components in canonical order: descending size, then ascending
    /// smallest vertex index.
    pub fn components(&self) -> &[ComponentStats] {
        &self.components
    }

    pub fn component_of(&self, vertex: usize) -> usize {
        self.component_of[vertex] as usize
    }

    /// Counts of the whole graph treated as a single subgraph.
    pub fn totals(&self) -> Counts {
        let mut total = Counts::default();
        for c in &self.components {
            total.add(&c.counts);
        }
        total
    }

    /// Writes one JSON object per edge: `{"i", "j", "d", "kind"}`.
    pub fn write_edges_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        #[derive(Serialize)]
        struct Line {
            i: u32,
            j: u32,
            d: f64,
            kind: EdgeKind,
        }
        let Some(edges) = &self.edges else {
            return Err(io::Error::other("edge list was not retained"));
        };
        for e in edges {
            let line = Line {
                i: e.i,
                j: e.j,
                d: e.length,
                kind: edge_kind(self.n_r, e.i, e.j),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[inline]
fn edge_kind(n_r: usize, i: u32, j: u32) -> EdgeKind {
    let n_r = n_r as u32;
    match (i < n_r, j < n_r) {
        (true, true) => EdgeKind::RR,
        (false, false) => EdgeKind::EE,
        _ => EdgeKind::Het,
    }
}

/// Builds the graph with the edge list retained and the default edge cap.
pub fn build_epsilon_graph(r: &PointSet, e: &PointSet, epsilon: f64) -> Result<EpsilonGraph> {
    build_epsilon_graph_with(r, e, epsilon, &GraphOptions::default())
}

pub fn build_epsilon_graph_with(
    r: &PointSet,
    e: &PointSet,
    epsilon: f64,
    opts: &GraphOptions,
) -> Result<EpsilonGraph> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(GeomcaError::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon}"
        )));
    }
    if r.dim() != e.dim() {
        return Err(GeomcaError::DimensionMismatch {
            row: 0,
            expected: r.dim(),
            found: e.dim(),
        });
    }
    let n_r = r.len();
    let n = n_r + e.len();
    if n > u32::MAX as usize {
        return Err(GeomcaError::InvalidParameter(format!(
            "{n} vertices exceed the supported maximum"
        )));
    }
    let row = |v: usize| if v < n_r { r.row(v) } else { e.row(v - n_r) };
    let test = RadiusTest::new(epsilon);

    let scan_block = |block: usize| -> Vec<Edge> {
        let start = block * BLOCK;
        let end = (start + BLOCK).min(n);
        let mut out = Vec::new();
        let mut col = start;
        while col < n {
            let col_end = (col + BLOCK).min(n);
            for i in start..end {
                let a = row(i);
                for j in col.max(i + 1)..col_end {
                    if let Some(length) = test.below(squared_distance(a, row(j))) {
                        out.push(Edge {
                            i: i as u32,
                            j: j as u32,
                            length,
                        });
                    }
                }
            }
            col = col_end;
        }
        out.sort_unstable_by_key(|edge| (edge.i, edge.j));
        out
    };

    let mut uf = UnionFind::new(n);
    let mut kept: Vec<Edge> = Vec::new();
    let num_blocks = n.div_ceil(BLOCK);
    for batch_start in (0..num_blocks).step_by(BATCH_BLOCKS) {
        let batch_end = (batch_start + BATCH_BLOCKS).min(num_blocks);
        let batch: Vec<Vec<Edge>> = (batch_start..batch_end)
            .into_par_iter()
            .map(scan_block)
            .collect();
        for block_edges in batch {
            for edge in &block_edges {
                uf.add_edge(edge.i, edge.j, edge_kind(n_r, edge.i, edge.j));
            }
            if opts.keep_edges {
                if kept.len() + block_edges.len() > opts.max_edges {
                    return Err(GeomcaError::EdgeCapExceeded {
                        cap: opts.max_edges,
                    });
                }
                kept.extend_from_slice(&block_edges);
            }
        }
    }

    let (components, component_of) = canonical_components(&mut uf, n_r);
    Ok(EpsilonGraph {
        epsilon,
        n_r,
        n_e: n - n_r,
        edges: opts.keep_edges.then_some(kept),
        components,
        component_of,
    })
}

fn canonical_components(uf: &mut UnionFind, n_r: usize) -> (Vec<ComponentStats>, Vec<u32>) {
    let n = uf.len();
    const UNSEEN: u32 = u32::MAX;
    let mut slot_of_root = vec![UNSEEN; n];
    let mut slots: Vec<ComponentStats> = Vec::new();
    let mut slot_of_vertex = vec![0u32; n];

    // Slots are opened in ascending order of each component's smallest vertex.
    for (v, vertex_slot) in slot_of_vertex.iter_mut().enumerate() {
        let root = uf.find(v as u32) as usize;
        if slot_of_root[root] == UNSEEN {
            slot_of_root[root] = slots.len() as u32;
            let tally = uf.tally_of_root(root as u32);
            slots.push(ComponentStats {
                comp_id: 0,
                counts: Counts {
                    e_rr: tally.rr,
                    e_ee: tally.ee,
                    e_het: tally.het,
                    ..Counts::default()
                },
                members_r: Vec::new(),
                members_e: Vec::new(),
            });
        }
        let slot = slot_of_root[root];
        *vertex_slot = slot;
        let comp = &mut slots[slot as usize];
        if v < n_r {
            comp.counts.v_r += 1;
            comp.members_r.push(v);
        } else {
            comp.counts.v_e += 1;
            comp.members_e.push(v - n_r);
        }
    }

    let mut order: Vec<usize> = (0..slots.len()).collect();
    order.sort_by_key(|&s| std::cmp::Reverse(slots[s].v_total()));
    let mut rank_of_slot = vec![0u32; slots.len()];
    for (rank, &s) in order.iter().enumerate() {
        rank_of_slot[s] = rank as u32;
    }
    let mut taken: Vec<Option<ComponentStats>> = slots.into_iter().map(Some).collect();
    let components = order
        .iter()
        .enumerate()
        .map(|(rank, &s)| {
            let mut c = taken[s].take().unwrap();
            c.comp_id = rank;
            c
        })
        .collect();
    let component_of = slot_of_vertex
        .into_iter()
        .map(|s| rank_of_slot[s as usize])
        .collect();
    (components, component_of)
}

/// Per-component statistics in canonical order.
pub fn get_connected_components(g: &EpsilonGraph) -> Vec<ComponentStats> {
    g.components.clone()
}
