//! Reciprocal-mention graph and degrees of separation between users.

mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::stats::{bootstrap_ci, derive_seed, mean, Estimate};

pub use io::{read_graph, read_mention_events, write_distance_bins, write_graph};

pub const DEFAULT_MAX_DEPTH: u32 = 6;
pub const DEFAULT_MAX_FOLLOWERS: u64 = 5000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("source and target are the same node {0:?}")]
    SameNode(String),
    #[error("bad graph file: {0}")]
    Format(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionEvent {
    pub from: String,
    pub to: String,
    pub timestamp: Option<String>,
}

impl MentionEvent {
    pub fn new(from: &str, to: &str) -> Self {
        Self {
            from: from.to_string(),
            to: to.to_string(),
            timestamp: None,
        }
    }
}

/// Undirected graph with an edge wherever two users mentioned each other.
/// Every user seen in any event is a node, even without edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MutualGraph {
    names: Vec<String>,
    index: HashMap<String, u32>,
    adj: Vec<Vec<u32>>,
    edges: usize,
}

impl MutualGraph {
    /// Builds from interned names and sorted, symmetric adjacency lists.
    pub(crate) fn from_parts(names: Vec<String>, adj: Vec<Vec<u32>>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Self {
            names,
            index,
            adj,
            edges,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges
    }

    pub fn node(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, node: u32) -> &str {
        &self.names[node as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adj[node as usize]
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.node(a), self.node(b)) {
            (Some(a), Some(b)) => self.adj[a as usize].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    /// Undirected edges as name pairs, each once with the smaller node id first.
    pub fn edge_list(&self) -> impl Iterator<Item = (&str, &str)> {
        self.adj.iter().enumerate().flat_map(move |(u, ns)| {
            ns.iter()
                .filter(move |&&v| (u as u32) < v)
                .map(move |&v| (self.names[u].as_str(), self.name(v)))
        })
    }
}

pub fn build_mutual_graph(events: &[MentionEvent]) -> MutualGraph {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, u32> = HashMap::new();
    let mut directed: HashSet<(u32, u32)> = HashSet::new();
    for e in events {
        let a = intern(&e.from, &mut index, &mut names);
        let b = intern(&e.to, &mut index, &mut names);
        if a != b {
            directed.insert((a, b));
        }
    }
    let mut adj = vec![Vec::new(); names.len()];
    for &(a, b) in &directed {
        if a < b && directed.contains(&(b, a)) {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
    }
    adj.iter_mut().for_each(|ns| ns.sort_unstable());
    MutualGraph::from_parts(names, adj)
}

fn intern<'a>(s: &'a str, index: &mut HashMap<&'a str, u32>, names: &mut Vec<String>) -> u32 {
    *index.entry(s).or_insert_with(|| {
        names.push(s.to_string());
        (names.len() - 1) as u32
    })
}

/// Degrees of separation: 0 for a direct mutual edge, path length − 1 in general.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Distance {
    Degree(u32),
    /// No path of degree ≤ max_depth.
    Unreachable,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Degree(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("unreachable"),
        }
    }
}

pub fn degree_of_separation(graph: &MutualGraph, u: &str, v: &str, max_depth: u32) -> Result<Distance, GraphError> {
    let a = graph.node(u).ok_or_else(|| GraphError::UnknownNode(u.to_string()))?;
    let b = graph.node(v).ok_or_else(|| GraphError::UnknownNode(v.to_string()))?;
    if a == b {
        return Err(GraphError::SameNode(u.to_string()));
    }
    Ok(match shortest_path_len(graph, a, b, max_depth + 1) {
        Some(len) => Distance::Degree(len - 1),
        None => Distance::Unreachable,
    })
}

/// Bidirectional BFS, expanding the smaller frontier one full level at a
/// time. Returns the edge count of a shortest path if it is ≤ `limit`.
fn shortest_path_len(g: &MutualGraph, a: u32, b: u32, limit: u32) -> Option<u32> {
    let mut dist = [HashMap::from([(a, 0u32)]), HashMap::from([(b, 0u32)])];
    let mut frontier = [vec![a], vec![b]];
    let mut depth = [0u32, 0u32];
    while !frontier[0].is_empty() && !frontier[1].is_empty() {
        if depth[0] + depth[1] + 1 > limit {
            return None;
        }
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        let other = 1 - side;
        let mut best: Option<u32> = None;
        let mut next = Vec::new();
        for &u in &frontier[side] {
            for &w in g.neighbors(u) {
                if let Some(&dw) = dist[other].get(&w) {
                    let len = depth[side] + 1 + dw;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
                if !dist[side].contains_key(&w) {
                    dist[side].insert(w, depth[side] + 1);
                    next.push(w);
                }
            }
        }
        if let Some(len) = best {
            return (len <= limit).then_some(len);
        }
        depth[side] += 1;
        frontier[side] = next;
    }
    None
}

/// A question between two users with its z-scored intimacy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceQuestion<T> {
    pub asker: String,
    pub recipient: String,
    pub z: T,
    pub recipient_followers: u64,
    pub recipient_verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceFilter {
    /// Recipients with at least this many followers are dropped.
    pub max_followers: u64,
    pub drop_verified: bool,
    pub max_depth: u32,
}

impl Default for DistanceFilter {
    fn default() -> Self {
        Self {
            max_followers: DEFAULT_MAX_FOLLOWERS,
            drop_verified: true,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl DistanceFilter {
    pub fn keeps<T>(&self, q: &DistanceQuestion<T>) -> bool {
        q.recipient_followers < self.max_followers && !(self.drop_verified && q.recipient_verified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin<T> {
    pub distance: Distance,
    pub n: usize,
    pub mean: Estimate<T>,
}

/// Mean z-intimacy per degree of separation, unreachable pairs in their own
/// (last) bin. Users absent from the graph count as unreachable; questions a
/// user addresses to themself are skipped.
pub fn intimacy_by_distance<T: Scalar>(
    questions: &[DistanceQuestion<T>],
    graph: &MutualGraph,
    filter: &DistanceFilter,
    bootstrap_n: usize,
    seed: u64,
) -> Vec<DistanceBin<T>> {
    let located: Vec<(Distance, T)> = questions
        .par_iter()
        .filter(|q| filter.keeps(q) && q.asker != q.recipient)
        .map(|q| {
            let d =
                degree_of_separation(graph, &q.asker, &q.recipient, filter.max_depth).unwrap_or(Distance::Unreachable);
            (d, q.z)
        })
        .collect();
    let mut bins: std::collections::BTreeMap<Distance, Vec<T>> = Default::default();
    for (d, z) in located {
        bins.entry(d).or_default().push(z);
    }
    bins.into_iter()
        .enumerate()
        .map(|(i, (distance, zs))| DistanceBin {
            distance,
            n: zs.len(),
            mean: bootstrap_ci(&zs, bootstrap_n, derive_seed(seed, i as u64), |s| mean(s)),
        })
        .collect()
}
