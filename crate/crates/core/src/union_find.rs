//! Disjoint-set forest with union by size and path compression. Each root
//! also carries the edge tallies of its component so they can be merged as
//! edges stream in.

use crate::epsgraph::EdgeKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct EdgeTally {
    pub rr: u64,
    pub ee: u64,
    pub het: u64,
}

impl EdgeTally {
    fn absorb(&mut self, other: EdgeTally) {
        self.rr += other.rr;
        self.ee += other.ee;
        self.het += other.het;
    }

    pub fn add(&mut self, kind: EdgeKind) {
        match kind {
            EdgeKind::RR => self.rr += 1,
            EdgeKind::EE => self.ee += 1,
            EdgeKind::Het => self.het += 1,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    tally: Vec<EdgeTally>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "too many vertices for u32 ids");
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            tally: vec![EdgeTally::default(); n],
        }
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b` and returns the surviving root.
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return ra;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        let moved = std::mem::take(&mut self.tally[rb as usize]);
        self.tally[ra as usize].absorb(moved);
        ra
    }

    /// Unions the endpoints and counts the edge against their component.
    pub fn add_edge(&mut self, a: u32, b: u32, kind: EdgeKind) {
        let root = self.union(a, b);
        self.tally[root as usize].add(kind);
    }

    pub fn tally_of_root(&self, root: u32) -> EdgeTally {
        self.tally[root as usize]
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }
}
