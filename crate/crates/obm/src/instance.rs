//! Instance data model, degree-bound validation, and the offline optimum.
//!
//! Servers and requests are dense 0-based integers; the arrival order of
//! requests is the order of the `requests` vector. An instance declares the
//! bounds `(k, d)` it claims to satisfy: every server has degree at least
//! `k` and every request degree at most `d`.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// An ordered online bipartite-matching input.
///
/// The JSON file format is exactly this struct:
/// `{"label": ..., "d": ..., "k": ..., "server_count": ..., "requests": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub label: String,
    /// Request-degree cap.
    pub d: usize,
    /// Server-degree floor.
    pub k: usize,
    pub server_count: usize,
    /// Neighbor sets in arrival order; entries are server indices.
    pub requests: Vec<Vec<usize>>,
}

impl Instance {
    pub fn request_count(&self) -> usize {
        self.requests.len()
    }

    /// Per-server degrees over the whole arrival sequence.
    pub fn server_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.server_count];
        for nbrs in &self.requests {
            for &s in nbrs {
                if s < self.server_count {
                    deg[s] += 1;
                }
            }
        }
        deg
    }

    pub fn max_server_degree(&self) -> usize {
        self.server_degrees().into_iter().max().unwrap_or(0)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json_string()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// One violated instance invariant; violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A request has an empty neighbor set.
    RequestEmpty { request: usize },
    /// A request exceeds the declared degree cap `d`.
    RequestDegreeExceedsCap { request: usize, degree: usize, cap: usize },
    /// A request lists the same server twice.
    RequestDuplicateNeighbor { request: usize, server: usize },
    /// A neighbor index is outside `[0, server_count)`.
    RequestNeighborOutOfRange { request: usize, server: usize },
    /// A server appears in fewer than `k` neighbor sets.
    ServerDegreeBelowFloor { server: usize, degree: usize, floor: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RequestEmpty { request } => {
                write!(f, "request {request} has an empty neighbor set")
            }
            Violation::RequestDegreeExceedsCap { request, degree, cap } => {
                write!(f, "request {request} has degree {degree} > d = {cap}")
            }
            Violation::RequestDuplicateNeighbor { request, server } => {
                write!(f, "request {request} lists server {server} more than once")
            }
            Violation::RequestNeighborOutOfRange { request, server } => {
                write!(f, "request {request} references server {server} out of range")
            }
            Violation::ServerDegreeBelowFloor { server, degree, floor } => {
                write!(f, "server {server} has degree {degree} < k = {floor}")
            }
        }
    }
}

/// Checks every instance invariant and reports each offender.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut deg = vec![0usize; inst.server_count];
    for (r, nbrs) in inst.requests.iter().enumerate() {
        if nbrs.is_empty() {
            out.push(Violation::RequestEmpty { request: r });
        }
        if nbrs.len() > inst.d {
            out.push(Violation::RequestDegreeExceedsCap {
                request: r,
                degree: nbrs.len(),
                cap: inst.d,
            });
        }
        let mut seen = vec![false; inst.server_count];
        for &s in nbrs {
            if s >= inst.server_count {
                out.push(Violation::RequestNeighborOutOfRange { request: r, server: s });
                continue;
            }
            if seen[s] {
                out.push(Violation::RequestDuplicateNeighbor { request: r, server: s });
            }
            seen[s] = true;
            deg[s] += 1;
        }
    }
    for (s, &degree) in deg.iter().enumerate() {
        if degree < inst.k {
            out.push(Violation::ServerDegreeBelowFloor {
                server: s,
                degree,
                floor: inst.k,
            });
        }
    }
    out
}

/// The assignment produced by one run of an online algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingOutcome {
    /// Per-request matched server, `None` for unmatched.
    pub assignment: Vec<Option<usize>>,
    pub matched_count: usize,
    pub server_matched: Vec<bool>,
}

impl MatchingOutcome {
    /// Derives the counters from a raw assignment.
    pub fn from_assignment(server_count: usize, assignment: Vec<Option<usize>>) -> Self {
        let mut server_matched = vec![false; server_count];
        let mut matched_count = 0;
        for &a in &assignment {
            if let Some(s) = a {
                debug_assert!(!server_matched[s], "server {s} matched twice");
                server_matched[s] = true;
                matched_count += 1;
            }
        }
        MatchingOutcome {
            assignment,
            matched_count,
            server_matched,
        }
    }

    /// Checks the outcome invariants against its instance; for tests.
    pub fn check(&self, inst: &Instance) -> std::result::Result<(), String> {
        if self.assignment.len() != inst.request_count() {
            return Err("assignment length != request count".into());
        }
        if self.server_matched.len() != inst.server_count {
            return Err("server_matched length != server count".into());
        }
        let mut used = vec![false; inst.server_count];
        let mut count = 0;
        for (r, &a) in self.assignment.iter().enumerate() {
            if let Some(s) = a {
                if s >= inst.server_count {
                    return Err(format!("request {r} assigned out-of-range server {s}"));
                }
                if !inst.requests[r].contains(&s) {
                    return Err(format!("request {r} assigned non-neighbor {s}"));
                }
                if used[s] {
                    return Err(format!("server {s} assigned twice"));
                }
                used[s] = true;
                count += 1;
            }
        }
        if count != self.matched_count {
            return Err("matched_count mismatch".into());
        }
        if used != self.server_matched {
            return Err("server_matched flags mismatch".into());
        }
        Ok(())
    }
}

/// Maximum-cardinality matching size, by Hopcroft–Karp.
///
/// Requests are the left side, servers the right. On any `d`-regular
/// generated instance this equals `min(server_count, request_count)`.
pub fn offline_optimum(inst: &Instance) -> usize {
    hopcroft_karp(&inst.requests, inst.server_count)
}

const UNMATCHED: usize = usize::MAX;

fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> usize {
    let left = adj.len();
    let mut match_l = vec![UNMATCHED; left];
    let mut match_r = vec![UNMATCHED; right];
    let mut size = 0;
    loop {
        // BFS layering from free left vertices.
        let mut dist = vec![usize::MAX; left];
        let mut queue: VecDeque<usize> = (0..left).filter(|&u| match_l[u] == UNMATCHED).collect();
        for &u in &queue {
            dist[u] = 0;
        }
        let mut reachable_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r.get(v) {
                    Some(&UNMATCHED) => reachable_free = true,
                    Some(&u2) if dist[u2] == usize::MAX => {
                        dist[u2] = dist[u] + 1;
                        queue.push_back(u2);
                    }
                    _ => {}
                }
            }
        }
        if !reachable_free {
            return size;
        }
        // DFS along the layering.
        for u in 0..left {
            if match_l[u] == UNMATCHED && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    let d = std::mem::replace(&mut dist[u], usize::MAX);
    for &v in &adj[u] {
        if v >= match_r.len() {
            continue;
        }
        let u2 = match_r[v];
        if u2 == UNMATCHED || (dist[u2] == d + 1 && augment(u2, adj, match_l, match_r, dist)) {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    false
}
