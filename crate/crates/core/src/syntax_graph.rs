//! Rectangle-space accessibility graph.
//!
//! Nodes are the greedy-cover rectangles of every room core. Edges come from
//! three sources: same-room proximity, bridges that restore intra-room
//! connectivity, and door components that touch two or more room cores.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::mask_io::{room_cores, DerivedMasks, LayoutMask, RoomCore};
use crate::rect_cover::{greedy_cover, Rect, DEFAULT_MIN_RECT_AREA};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("no rectangle survived decomposition")]
    EmptyPlan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParams {
    pub min_rect_area: usize,
    /// Max Chebyshev gap (empty pixels) for a same-room proximity edge.
    pub touch_dist: usize,
    /// Max Chebyshev distance from a door pixel to a room core pixel.
    pub door_reach: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            min_rect_area: DEFAULT_MIN_RECT_AREA,
            touch_dist: 2,
            door_reach: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    WithinRoom,
    Bridge,
    CrossRoom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectNode {
    pub node_id: usize,
    pub rect: Rect,
    pub instance_id: u8,
    pub room_type: u8,
}

/// Undirected edge with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

/// One room pair linked by a door; `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DoorPair {
    pub a: u8,
    pub b: u8,
    /// First door component (1-based label) linking the pair.
    pub component: u32,
}

/// Room pairs linked through a door component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoorAdjacency {
    /// Sorted by `(a, b)`.
    pub pairs: Vec<DoorPair>,
    pub components: u32,
    /// Door components that reached fewer than two rooms.
    pub dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectGraph {
    pub nodes: Vec<RectNode>,
    pub edges: Vec<Edge>,
    pub doors: DoorAdjacency,
    /// Door pairs where one of the rooms has no rectangle.
    pub skipped_door_pairs: usize,
}

/// Finds door components and the rooms each one reaches. Components touching
/// three or more rooms yield every pair among them.
pub fn door_adjacency(d: &DerivedMasks, cores: &[RoomCore], reach: usize) -> DoorAdjacency {
    assert!(reach >= 1, "door reach must be at least 1");
    let (w, h) = d.door.dims();
    let mut owner = Grid::filled(w, h, 0u8);
    for c in cores {
        for (x, y, &on) in c.core.iter_xy() {
            if on {
                owner.set(x, y, c.instance_id);
            }
        }
    }
    let (labels, n) = d.door.label_components();
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n as usize];
    for (x, y, &l) in labels.iter_xy() {
        if l > 0 {
            members[l as usize - 1].push((x, y));
        }
    }

    let mut out = DoorAdjacency {
        components: n,
        ..Default::default()
    };
    let mut pairs: BTreeMap<(u8, u8), u32> = BTreeMap::new();
    for (ci, pixels) in members.iter().enumerate() {
        let mut rooms = BTreeSet::new();
        for &(x, y) in pixels {
            for ny in y.saturating_sub(reach)..(y + reach + 1).min(h) {
                for nx in x.saturating_sub(reach)..(x + reach + 1).min(w) {
                    let o = *owner.get(nx, ny);
                    if o > 0 {
                        rooms.insert(o);
                    }
                }
            }
        }
        if rooms.len() < 2 {
            out.dropped += 1;
            continue;
        }
        let rooms: Vec<u8> = rooms.into_iter().collect();
        for (i, &a) in rooms.iter().enumerate() {
            for &b in &rooms[i + 1..] {
                pairs.entry((a, b)).or_insert(ci as u32 + 1);
            }
        }
    }
    out.pairs = pairs
        .into_iter()
        .map(|((a, b), component)| DoorPair { a, b, component })
        .collect();
    out
}

impl DoorAdjacency {
    pub fn room_pairs(&self) -> Vec<(u8, u8)> {
        self.pairs.iter().map(|p| (p.a, p.b)).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.0[hi] = lo;
        true
    }
}

/// Closest node pair between two node sets: smallest gap, then smallest
/// `(min id, max id)` pair.
fn nearest_pair(nodes: &[RectNode], xs: &[usize], ys: &[usize]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for &i in xs {
        for &j in ys {
            let key = (nodes[i].rect.gap(&nodes[j].rect), i.min(j), i.max(j));
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, a, b)| (a, b))
}

/// Builds the graph from every instance in the mask.
pub fn build_graph(m: &LayoutMask, d: &DerivedMasks, params: &GraphParams) -> Result<RectGraph, GraphError> {
    build_graph_from_cores(&room_cores(m, d), d, params)
}

/// Builds the graph from a chosen set of room cores (e.g. with structural
/// instances already filtered out).
pub fn build_graph_from_cores(
    cores: &[RoomCore],
    d: &DerivedMasks,
    params: &GraphParams,
) -> Result<RectGraph, GraphError> {
    let mut nodes = Vec::new();
    let mut by_room: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for core in cores {
        let ids = by_room.entry(core.instance_id).or_default();
        for rect in greedy_cover(&core.core, params.min_rect_area) {
            let node_id = nodes.len();
            ids.push(node_id);
            nodes.push(RectNode {
                node_id,
                rect,
                instance_id: core.instance_id,
                room_type: core.room_type,
            });
        }
    }
    if nodes.is_empty() {
        return Err(GraphError::EmptyPlan);
    }

    let mut edges = Vec::new();
    let mut uf = UnionFind::new(nodes.len());
    for ids in by_room.values() {
        for (k, &i) in ids.iter().enumerate() {
            for &j in &ids[k + 1..] {
                if nodes[i].rect.gap(&nodes[j].rect) <= params.touch_dist {
                    edges.push(Edge {
                        a: i,
                        b: j,
                        kind: EdgeKind::WithinRoom,
                    });
                    uf.union(i, j);
                }
            }
        }
        loop {
            let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &i in ids {
                comps.entry(uf.find(i)).or_default().push(i);
            }
            if comps.len() <= 1 {
                break;
            }
            let comps: Vec<Vec<usize>> = comps.into_values().collect();
            let mut best: Option<(usize, usize, usize)> = None;
            for (ci, xs) in comps.iter().enumerate() {
                for ys in &comps[ci + 1..] {
                    if let Some((a, b)) = nearest_pair(&nodes, xs, ys) {
                        let key = (nodes[a].rect.gap(&nodes[b].rect), a, b);
                        if best.is_none_or(|bk| key < bk) {
                            best = Some(key);
                        }
                    }
                }
            }
            let (_, a, b) = best.expect("at least two components");
            edges.push(Edge {
                a,
                b,
                kind: EdgeKind::Bridge,
            });
            uf.union(a, b);
        }
    }

    let doors = door_adjacency(d, cores, params.door_reach);
    let mut skipped = 0;
    let empty = Vec::new();
    for &DoorPair { a: ra, b: rb, .. } in &doors.pairs {
        let xs = by_room.get(&ra).unwrap_or(&empty);
        let ys = by_room.get(&rb).unwrap_or(&empty);
        match nearest_pair(&nodes, xs, ys) {
            Some((a, b)) => edges.push(Edge {
                a,
                b,
                kind: EdgeKind::CrossRoom,
            }),
            None => skipped += 1,
        }
    }
    edges.sort();
    edges.dedup_by_key(|e| (e.a, e.b));

    Ok(RectGraph {
        nodes,
        edges,
        doors,
        skipped_door_pairs: skipped,
    })
}

impl RectGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    /// Node ids per room instance, ascending.
    pub fn room_nodes(&self) -> BTreeMap<u8, Vec<usize>> {
        let mut m: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for n in &self.nodes {
            m.entry(n.instance_id).or_default().push(n.node_id);
        }
        m
    }

    /// Debug dump: nodes and tagged edges as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}
