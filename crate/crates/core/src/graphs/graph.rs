//! Finite graphs with oriented edges and half-edge paths.
//!
//! Edge `e` is stored as `(tail, head)`. Half-edge `2e` leaves the tail along
//! the positive direction, `2e + 1` leaves the head against it.

use crate::error::{OslError, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub type HalfEdge = usize;
pub type Path = Vec<HalfEdge>;

pub fn pos(e: usize) -> HalfEdge {
    2 * e
}

pub fn neg(e: usize) -> HalfEdge {
    2 * e + 1
}

pub fn edge_of(h: HalfEdge) -> usize {
    h / 2
}

pub fn rev(h: HalfEdge) -> HalfEdge {
    h ^ 1
}

pub fn is_positive_half(h: HalfEdge) -> bool {
    h % 2 == 0
}

pub fn invert_path(p: &[HalfEdge]) -> Path {
    p.iter().rev().map(|&h| rev(h)).collect()
}

/// Cancels backtracks `h, rev(h)`.
pub fn reduce_path(p: &[HalfEdge]) -> Path {
    let mut out: Path = Vec::with_capacity(p.len());
    for &h in p {
        if out.last() == Some(&rev(h)) {
            out.pop();
        } else {
            out.push(h);
        }
    }
    out
}

pub fn is_reduced(p: &[HalfEdge]) -> bool {
    p.windows(2).all(|w| w[1] != rev(w[0]))
}

pub fn is_cyclically_reduced(p: &[HalfEdge]) -> bool {
    is_reduced(p) && (p.len() < 2 || p[0] != rev(p[p.len() - 1]))
}

pub fn is_positive_path(p: &[HalfEdge]) -> bool {
    p.iter().all(|&h| is_positive_half(h))
}

/// `+k` for the positive half-edge of edge `k`, `-k` for the negative one.
pub fn format_half_edge(h: HalfEdge) -> String {
    format!("{}{}", if is_positive_half(h) { '+' } else { '-' }, edge_of(h))
}

pub fn parse_half_edge(s: &str) -> Result<HalfEdge> {
    let t = s.trim();
    let bad = || OslError::Parse(format!("bad half-edge token {s:?}; expected +k or -k"));
    let (negative, digits) = match t.chars().next() {
        Some('+') => (false, &t[1..]),
        Some('-') => (true, &t[1..]),
        _ => (false, t),
    };
    let e: usize = digits.parse().map_err(|_| bad())?;
    Ok(if negative { neg(e) } else { pos(e) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Turn {
    pub a: HalfEdge,
    pub b: HalfEdge,
}

impl Turn {
    pub fn new(a: HalfEdge, b: HalfEdge) -> Self {
        Turn { a, b }
    }

    pub fn parse(s: &str) -> Result<Turn> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(OslError::Parse(format!("turn {s:?} must be two comma-separated half-edges")));
        }
        Ok(Turn::new(parse_half_edge(parts[0])?, parse_half_edge(parts[1])?))
    }

    pub fn is_direction_matching(&self) -> bool {
        is_positive_half(self.a) == is_positive_half(self.b)
    }

    pub fn contains(&self, h: HalfEdge) -> bool {
        self.a == h || self.b == h
    }

    pub fn same_as(&self, other: &Turn) -> bool {
        (self.a == other.a && self.b == other.b) || (self.a == other.b && self.b == other.a)
    }
}

impl std::fmt::Display for Turn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", format_half_edge(self.a), format_half_edge(self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= vertices || b >= vertices) {
            return Err(OslError::InvalidGraph(format!("edge ({a}, {b}) uses a missing vertex")));
        }
        Ok(Graph { vertices, edges })
    }

    /// One vertex with `r` loops.
    pub fn rose(r: usize) -> Graph {
        Graph { vertices: 1, edges: vec![(0, 0); r] }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_half_edges(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn origin(&self, h: HalfEdge) -> usize {
        let (t, hd) = self.edges[edge_of(h)];
        if is_positive_half(h) {
            t
        } else {
            hd
        }
    }

    pub fn terminus(&self, h: HalfEdge) -> usize {
        self.origin(rev(h))
    }

    pub fn half_edges_at(&self, v: usize) -> Vec<HalfEdge> {
        (0..self.num_half_edges()).filter(|&h| self.origin(h) == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn is_loop_edge(&self, e: usize) -> bool {
        self.edges[e].0 == self.edges[e].1
    }

    pub fn is_rose(&self) -> bool {
        self.vertices == 1
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.vertices).all(|v| self.valence(v) == 3)
    }

    /// First Betti number, assuming connectivity.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices.min(self.edges.len() + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(None)
    }

    fn is_connected_without(&self, skip: Option<usize>) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertices];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if Some(e) != skip {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True iff removing some edge disconnects the graph.
    pub fn has_separating_edge(&self) -> bool {
        (0..self.edges.len()).any(|e| !self.is_loop_edge(e) && !self.is_connected_without(Some(e)))
    }

    /// Strong connectivity of the directed graph `tail → head`.
    pub fn is_transitive(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let reach = |forward: bool| {
            let mut adj = vec![Vec::new(); self.vertices];
            for &(a, b) in &self.edges {
                if forward {
                    adj[a].push(b);
                } else {
                    adj[b].push(a);
                }
            }
            let mut seen = vec![false; self.vertices];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    pub fn is_path(&self, p: &[HalfEdge]) -> bool {
        p.iter().all(|&h| h < self.num_half_edges()) && p.windows(2).all(|w| self.terminus(w[0]) == self.origin(w[1]))
    }

    pub fn is_closed_path(&self, p: &[HalfEdge]) -> bool {
        self.is_path(p) && !p.is_empty() && self.terminus(p[p.len() - 1]) == self.origin(p[0])
    }

    /// Loop whose vertices (other than the repeated endpoint) are distinct.
    pub fn is_embedded_loop(&self, p: &[HalfEdge]) -> bool {
        if !self.is_closed_path(p) {
            return false;
        }
        let mut seen = vec![false; self.vertices];
        for &h in p {
            let v = self.origin(h);
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    pub fn check_turn(&self, t: &Turn) -> Result<()> {
        let n = self.num_half_edges();
        if t.a >= n || t.b >= n || t.a == t.b || self.origin(t.a) != self.origin(t.b) {
            return Err(OslError::InvalidTurn(t.to_string()));
        }
        Ok(())
    }

    /// Reverses the orientation of edge `e`.
    pub fn flip_edge(&mut self, e: usize) {
        let (a, b) = self.edges[e];
        self.edges[e] = (b, a);
    }

    /// Basic validity for points of reduced Outer Space.
    pub fn check_reduced(&self) -> Result<()> {
        if !self.is_connected() {
            return Err(OslError::Disconnected);
        }
        if self.has_separating_edge() {
            return Err(OslError::SeparatingEdge);
        }
        Ok(())
    }
}

/// Rewrites a path through `flip`: every half-edge of edge `e` swaps parity.
pub fn flip_in_path(p: &[HalfEdge], e: usize) -> Path {
    p.iter().map(|&h| if edge_of(h) == e { rev(h) } else { h }).collect()
}
