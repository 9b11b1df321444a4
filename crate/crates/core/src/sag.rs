//! Semantic association graph construction.
//!
//! Nodes are one video's comments in `(t, input order)` order; a directed
//! edge runs from an earlier comment to a later one with weight
//! `cosine(sentence vectors) * exp(-gamma_t * dt)`. Non-positive weights are
//! never stored, so the graph is a DAG whose topological order is the id
//! order.

use serde::{Deserialize, Serialize};

use crate::corpus::Comment;
use crate::embedding::{cosine, SentenceVector};

/// Algorithm hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Per-second decay rate of comment association.
    pub gamma_t: f64,
    /// Merge threshold on intra-cluster edge density (dialogue clustering).
    pub rho_d: f64,
    /// Merge threshold on set affinity (topic-center clustering).
    pub rho_c: f64,
    /// Iteration turns for the influence fixed point.
    pub turns: usize,
    /// Pairs whose decay factor alone falls below this are skipped during
    /// graph construction, bounding the pair scan to a time window of width
    /// `ln(1/eps)/gamma_t`.
    pub edge_cutoff_eps: f64,
}

/// Validated operating point for the dialogue path.
pub const GAMMA_DIALOGUE: f64 = 0.12;
/// Validated operating point for the topic-center path.
pub const GAMMA_TOPIC_CENTER: f64 = 0.13;

impl Default for Params {
    fn default() -> Self {
        Params {
            gamma_t: GAMMA_DIALOGUE,
            rho_d: 0.34,
            rho_c: 0.38,
            turns: 50,
            edge_cutoff_eps: 1e-4,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma_t >= 0.0 && self.gamma_t.is_finite()) {
            return Err(format!("gamma_t must be finite and >= 0, got {}", self.gamma_t));
        }
        for (name, v) in [("rho_d", self.rho_d), ("rho_c", self.rho_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if self.turns == 0 {
            return Err("turns must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.edge_cutoff_eps) {
            return Err(format!(
                "edge_cutoff_eps must be in [0, 1), got {}",
                self.edge_cutoff_eps
            ));
        }
        Ok(())
    }
}

/// Exponential time decay `exp(-gamma_t * dt)`.
///
/// Panics if `dt` is negative.
pub fn decay(dt: f64, gamma_t: f64) -> f64 {
    assert!(dt >= 0.0, "decay over negative interval {dt}");
    (-gamma_t * dt).exp()
}

/// Directed edge from comment `x` (earlier) to `y` (later), weight in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub x: usize,
    pub y: usize,
    pub w: f64,
}

/// The semantic association graph of one video.
#[derive(Debug, Clone)]
pub struct Sag {
    n: usize,
    edges: Vec<Edge>,
    /// Outgoing edge indices per node, ascending by target id.
    out: Vec<Vec<usize>>,
    /// Incoming edge indices per node, ascending by source id.
    incoming: Vec<Vec<usize>>,
}

impl Sag {
    pub fn new(n: usize, edges: Vec<Edge>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            assert!(e.x < e.y && e.y < n, "edge ({}, {}) out of order", e.x, e.y);
            assert!(e.w > 0.0, "non-positive edge weight {}", e.w);
            out[e.x].push(idx);
            incoming[e.y].push(idx);
        }
        Sag {
            n,
            edges,
            out,
            incoming,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> Edge {
        self.edges[idx]
    }

    /// Indices of edges leaving `node`.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    /// Indices of edges entering `node`.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// All edge indices touching `node`.
    pub fn incident_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[node].iter().chain(&self.incoming[node]).copied()
    }

    pub fn to_dump(&self) -> SagDump {
        SagDump {
            n: self.n,
            edges: self.edges.clone(),
        }
    }
}

/// JSON-serializable graph dump `{n, edges:[{x,y,w}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SagDump {
    pub n: usize,
    pub edges: Vec<Edge>,
}

/// Build the graph over every ordered comment pair.
///
/// An edge is stored iff its weight is positive and the decay factor alone is
/// at least `edge_cutoff_eps`; comments with zero sentence vectors get no
/// edges by the zero-norm cosine convention.
pub fn build_sag(comments: &[Comment], vectors: &[SentenceVector], params: &Params) -> Sag {
    assert_eq!(comments.len(), vectors.len());
    let n = comments.len();
    let mut edges = Vec::new();
    for u in 0..n {
        if vectors[u].is_zero() {
            continue;
        }
        for v in u + 1..n {
            let dt = comments[v].t - comments[u].t;
            debug_assert!(dt >= 0.0, "comments not sorted");
            let delay = decay(dt, params.gamma_t);
            if delay < params.edge_cutoff_eps {
                // dt only grows with v, so no later pair qualifies either.
                break;
            }
            if vectors[v].is_zero() {
                continue;
            }
            let w = cosine(&vectors[u].values, &vectors[v].values) * delay;
            if w > 0.0 {
                edges.push(Edge { x: u, y: v, w });
            }
        }
    }
    Sag::new(n, edges)
}
