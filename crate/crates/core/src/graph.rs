//! Statement dependency graph built from term introduction and use.

use crate::ingest::{StatementKind, StatementRecord};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub via_term: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub kind: StatementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptGraph {
    /// Node ids in document order.
    pub nodes: Vec<String>,
    /// Sorted and deduplicated.
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub info: BTreeMap<String, NodeInfo>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("statement id `{0}` occurs more than once")]
    DuplicateStatementId(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

pub fn build_graph(stmts: &[StatementRecord]) -> Result<ConceptGraph, GraphError> {
    let mut seen = BTreeSet::new();
    for s in stmts {
        if !seen.insert(s.stmt_id.as_str()) {
            return Err(GraphError::DuplicateStatementId(s.stmt_id.clone()));
        }
    }
    let mut edges = BTreeSet::new();
    for a in stmts {
        for b in stmts {
            if a.stmt_id == b.stmt_id {
                continue;
            }
            for term in &b.used_terms {
                if a.introduced_terms.contains(term) {
                    edges.insert(Edge {
                        from: a.stmt_id.clone(),
                        to: b.stmt_id.clone(),
                        via_term: term.clone(),
                    });
                }
            }
        }
    }
    Ok(ConceptGraph {
        nodes: stmts.iter().map(|s| s.stmt_id.clone()).collect(),
        edges: edges.into_iter().collect(),
        info: stmts
            .iter()
            .map(|s| {
                (
                    s.stmt_id.clone(),
                    NodeInfo {
                        kind: s.kind,
                        label: s.label.clone(),
                        term: s.canonical_term().map(str::to_owned),
                    },
                )
            })
            .collect(),
    })
}

impl ConceptGraph {
    fn index(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
    }

    /// Successor lists by node index, deduplicated across terms.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let idx = self.index();
        let mut adj = vec![BTreeSet::new(); self.nodes.len()];
        for e in &self.edges {
            if let (Some(&f), Some(&t)) = (idx.get(e.from.as_str()), idx.get(e.to.as_str())) {
                adj[f].insert(t);
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Kahn's algorithm, always taking the earliest ready node in document
    /// order.
    pub fn topo_order(&self) -> Result<Vec<String>, GraphError> {
        let adj = self.adjacency();
        let mut indegree = vec![0usize; self.nodes.len()];
        for succ in &adj {
            for &t in succ {
                indegree[t] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop_first() {
            order.push(self.nodes[i].clone());
            for &t in &adj[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        if order.len() == self.nodes.len() {
            return Ok(order);
        }
        let stuck: Vec<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] > 0).collect();
        Err(GraphError::CycleDetected(self.shortest_cycle(&adj, &stuck)))
    }

    /// Shortest cycle through any of `candidates`, rotated to start at its
    /// earliest node.
    fn shortest_cycle(&self, adj: &[Vec<usize>], candidates: &[usize]) -> Vec<String> {
        let mut best: Option<Vec<usize>> = None;
        for &start in candidates {
            // BFS from start back to itself.
            let mut prev = vec![usize::MAX; self.nodes.len()];
            let mut queue = VecDeque::from([start]);
            let mut found = None;
            'bfs: while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if v == start {
                        found = Some(u);
                        break 'bfs;
                    }
                    if prev[v] == usize::MAX {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            let Some(mut u) = found else { continue };
            let mut cycle = vec![u];
            while u != start {
                u = prev[u];
                cycle.push(u);
            }
            cycle.reverse();
            if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
                best = Some(cycle);
            }
        }
        let mut cycle = best.unwrap_or_default();
        if let Some(pos) = cycle.iter().enumerate().min_by_key(|(_, &n)| n).map(|(p, _)| p) {
            cycle.rotate_left(pos);
        }
        cycle.into_iter().map(|i| self.nodes[i].clone()).collect()
    }

    /// All nodes with a path to `id`, excluding `id`, in document order.
    pub fn ancestors(&self, id: &str) -> Result<BTreeSet<String>, GraphError> {
        if !self.nodes.iter().any(|n| n == id) {
            return Err(GraphError::UnknownNode(id.to_owned()));
        }
        let mut preds: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in &self.edges {
            preds.entry(e.to.as_str()).or_default().push(e.from.as_str());
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            for &p in preds.get(n).map(Vec::as_slice).unwrap_or_default() {
                if p != id && out.insert(p.to_owned()) {
                    stack.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Ancestors ordered by document position.
    pub fn ancestors_in_order(&self, id: &str) -> Result<Vec<String>, GraphError> {
        let set = self.ancestors(id)?;
        Ok(self.nodes.iter().filter(|n| set.contains(*n)).cloned().collect())
    }

    pub fn edges_between(&self, from: &str, to: &str) -> impl Iterator<Item = &Edge> {
        let (from, to) = (from.to_owned(), to.to_owned());
        self.edges.iter().filter(move |e| e.from == from && e.to == to)
    }

    /// Graphviz DOT export.
    pub fn to_dot(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph concepts {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let (kind, label) = match self.info.get(n) {
                Some(i) => (
                    i.kind.env_name(),
                    match (&i.label, &i.term) {
                        (Some(l), Some(t)) => format!("{l}\\n{t}"),
                        (Some(l), None) => l.clone(),
                        (None, Some(t)) => t.clone(),
                        (None, None) => n.clone(),
                    },
                ),
                None => ("statement", n.clone()),
            };
            let _ = writeln!(out, "  {} [kind={}, label={}];", quote(n), quote(kind), quote(&label).replace("\\\\n", "\\n"));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {} -> {} [label={}];", quote(&e.from), quote(&e.to), quote(&e.via_term));
        }
        out.push_str("}\n");
        out
    }
}
