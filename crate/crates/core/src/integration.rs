//! Depth-based integration on the rectangle-space graph.
//!
//! Total depth `TD_i` is the sum of unit-weight shortest-path distances from
//! node `i`. HH integration inverts the (normalized) relative asymmetry:
//!
//! ```text
//! MD_i  = TD_i / (k - 1)
//! RA_i  = 2 (MD_i - 1) / (k - 2)
//! RRA_i = RA_i / D_k            (or RA_i with raw normalization)
//! I_i   = 1 / max(RRA_i, eps)
//! ```
//!
//! Closeness is `(k - 1) / TD_i`.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax_graph::RectGraph;

/// Clamp applied to RRA before inversion.
pub const RA_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntegrationError {
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("{method:?} integration needs at least {need} nodes, got {k}")]
    TooFewNodes { method: Method, need: usize, k: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Hh,
    Closeness,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hh" => Ok(Self::Hh),
            "closeness" => Ok(Self::Closeness),
            other => Err(format!("unknown integration method {other:?}")),
        }
    }
}

/// How RA is normalized before inversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaNormalization {
    /// Divide by the diamond value `D_k`.
    #[default]
    Diamond,
    /// Use RA as is.
    Raw,
}

/// Total depth for the analyzed node subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthTable {
    /// Graph node ids covered by the table, ascending.
    pub nodes: Vec<usize>,
    /// `td[i]` is the total depth of `nodes[i]`.
    pub td: Vec<u64>,
    /// True when the graph was disconnected and only the largest component is kept.
    pub restricted: bool,
}

impl DepthTable {
    pub fn k(&self) -> usize {
        self.nodes.len()
    }
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut q = VecDeque::new();
    dist[src] = Some(0);
    q.push_back(src);
    while let Some(v) = q.pop_front() {
        let dv = dist[v].expect("queued nodes have a distance");
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                q.push_back(w);
            }
        }
    }
    dist
}

/// Connected components, each sorted; ordered by their smallest node id.
fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        let mut comp: Vec<usize> = bfs(adj, s)
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|_| i))
            .collect();
        comp.sort_unstable();
        for &i in &comp {
            seen[i] = true;
        }
        out.push(comp);
    }
    out
}

/// Unit-weight BFS from every node. A disconnected graph is an error in
/// strict mode; otherwise the largest component (ties: lowest node id) is used.
pub fn all_pairs_depth(g: &RectGraph, strict: bool) -> Result<DepthTable, IntegrationError> {
    depth_from_adjacency(&g.adjacency(), strict)
}

pub fn depth_from_adjacency(adj: &[Vec<usize>], strict: bool) -> Result<DepthTable, IntegrationError> {
    let comps = components(adj);
    let restricted = comps.len() > 1;
    if restricted && strict {
        return Err(IntegrationError::Disconnected {
            components: comps.len(),
        });
    }
    // max_by_key keeps the last maximum, so scan in reverse to prefer the lowest ids
    let nodes = comps.into_iter().rev().max_by_key(|c| c.len()).unwrap_or_default();
    let td = nodes
        .par_iter()
        .map(|&s| bfs(adj, s).iter().filter_map(|d| d.map(u64::from)).sum::<u64>())
        .collect();
    Ok(DepthTable { nodes, td, restricted })
}

/// Space-syntax diamond value `D_k` for a k-node graph (k >= 3).
pub fn diamond_value(k: usize) -> f64 {
    let k = k as f64;
    2.0 * (k * (((k + 2.0) / 3.0).log2() - 1.0) + 1.0) / ((k - 1.0) * (k - 2.0))
}

/// Per-node score, aligned with [`DepthTable::nodes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeScores {
    pub method: Method,
    pub nodes: Vec<usize>,
    pub scores: Vec<f64>,
}

impl NodeScores {
    pub fn get(&self, node: usize) -> Option<f64> {
        self.nodes.binary_search(&node).ok().map(|i| self.scores[i])
    }
}

/// Relative asymmetry of each node.
pub fn relative_asymmetry(dt: &DepthTable) -> Vec<f64> {
    let k = dt.k() as f64;
    dt.td
        .iter()
        .map(|&td| {
            let md = td as f64 / (k - 1.0);
            2.0 * (md - 1.0) / (k - 2.0)
        })
        .collect()
}

pub fn node_integration(
    dt: &DepthTable,
    method: Method,
    norm: RaNormalization,
) -> Result<NodeScores, IntegrationError> {
    let k = dt.k();
    let scores = match method {
        Method::Hh => {
            if k < 3 {
                return Err(IntegrationError::TooFewNodes { method, need: 3, k });
            }
            let dk = match norm {
                RaNormalization::Diamond => diamond_value(k),
                RaNormalization::Raw => 1.0,
            };
            relative_asymmetry(dt)
                .into_iter()
                .map(|ra| 1.0 / (ra / dk).max(RA_EPSILON))
                .collect()
        }
        Method::Closeness => {
            if k < 2 {
                return Err(IntegrationError::TooFewNodes { method, need: 2, k });
            }
            dt.td.iter().map(|&td| (k - 1) as f64 / td as f64).collect()
        }
    };
    Ok(NodeScores {
        method,
        nodes: dt.nodes.clone(),
        scores,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomScore {
    pub instance_id: u8,
    pub room_type: u8,
    /// Scored member nodes.
    pub nodes: Vec<usize>,
    pub mean: f64,
}

/// Room-instance mean integration, keyed by instance id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoomScores {
    pub rooms: BTreeMap<u8, RoomScore>,
    /// Instances with rectangles but no scored node.
    pub unscored: Vec<u8>,
}

/// Averages node scores per room instance. Rooms whose nodes all fell outside
/// the scored subset are listed in `unscored`.
pub fn room_mean_integration(ns: &NodeScores, g: &RectGraph) -> RoomScores {
    let mut out = RoomScores::default();
    for (id, nodes) in g.room_nodes() {
        let scored: Vec<(usize, f64)> = nodes.iter().filter_map(|&n| ns.get(n).map(|s| (n, s))).collect();
        if scored.is_empty() {
            out.unscored.push(id);
            continue;
        }
        let mean = scored.iter().map(|(_, s)| s).sum::<f64>() / scored.len() as f64;
        out.rooms.insert(
            id,
            RoomScore {
                instance_id: id,
                room_type: g.nodes[nodes[0]].room_type,
                nodes: scored.into_iter().map(|(n, _)| n).collect(),
                mean,
            },
        );
    }
    out
}

/// Graph-level integration: mean node score.
pub fn plan_integration(ns: &NodeScores) -> f64 {
    assert!(!ns.scores.is_empty(), "plan integration needs at least one node");
    ns.scores.iter().sum::<f64>() / ns.scores.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(k: usize) -> Vec<Vec<usize>> {
        (0..k)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < k {
                    v.push(i + 1);
                }
                v
            })
            .collect()
    }

    fn star(k: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); k];
        for i in 1..k {
            adj[0].push(i);
            adj[i].push(0);
        }
        adj
    }

    #[test]
    fn path_depths() {
        let dt = depth_from_adjacency(&path(4), true).unwrap();
        assert_eq!(dt.td, vec![6, 4, 4, 6]);
    }

    #[test]
    fn star_center_depth() {
        let dt = depth_from_adjacency(&star(5), true).unwrap();
        assert_eq!(dt.td[0], 4);
    }

    #[test]
    fn path_relative_asymmetry() {
        let dt = depth_from_adjacency(&path(4), true).unwrap();
        let ra = relative_asymmetry(&dt);
        assert!((ra[0] - 1.0).abs() < 1e-12);
        assert!((ra[1] - 1.0 / 3.0).abs() < 1e-12);
        for norm in [RaNormalization::Diamond, RaNormalization::Raw] {
            let s = node_integration(&dt, Method::Hh, norm).unwrap().scores;
            assert!((s[1] / s[0] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn star_center_is_clamped() {
        let dt = depth_from_adjacency(&star(5), true).unwrap();
        let s = node_integration(&dt, Method::Hh, RaNormalization::Diamond).unwrap();
        assert!(s.scores[0].is_finite());
        assert!((s.scores[0] - 1.0 / RA_EPSILON).abs() < 1e-6);
        assert!(s.scores[1..].iter().all(|&x| x > 0.0 && x < s.scores[0]));
    }

    #[test]
    fn hh_needs_three_nodes() {
        let dt = depth_from_adjacency(&path(2), true).unwrap();
        assert!(matches!(
            node_integration(&dt, Method::Hh, RaNormalization::Diamond),
            Err(IntegrationError::TooFewNodes { k: 2, .. })
        ));
        assert!(node_integration(&dt, Method::Closeness, RaNormalization::Diamond).is_ok());
    }

    #[test]
    fn disconnected_strict_and_lenient() {
        let mut adj = path(3);
        adj.extend(vec![vec![4], vec![3]]);
        assert_eq!(
            depth_from_adjacency(&adj, true),
            Err(IntegrationError::Disconnected { components: 2 })
        );
        let dt = depth_from_adjacency(&adj, false).unwrap();
        assert!(dt.restricted);
        assert_eq!(dt.nodes, vec![0, 1, 2]);
    }

    #[test]
    fn diamond_value_small_k() {
        assert!((diamond_value(4) - 1.0 / 3.0).abs() < 1e-12);
        assert!(diamond_value(3) > 0.0);
    }

    #[test]
    fn plan_mean() {
        let ns = NodeScores {
            method: Method::Hh,
            nodes: vec![0, 1, 2],
            scores: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(plan_integration(&ns), 2.0);
    }
}
