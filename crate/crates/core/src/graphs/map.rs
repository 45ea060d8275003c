//! Regular maps between graphs: transition matrices, gates and legality.

use super::graph::{edge_of, invert_path, is_cyclically_reduced, is_positive_half, pos, reduce_path, rev, Graph, HalfEdge, Path, Turn};
use crate::error::{OslError, Result};
use crate::matrices::IntMatrix;
use num::BigInt;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMap {
    pub source: Graph,
    pub target: Graph,
    pub vertex_images: Vec<usize>,
    /// Image of the positive half-edge of each source edge.
    pub edge_images: Vec<Path>,
}

impl GraphMap {
    pub fn identity(g: &Graph) -> GraphMap {
        GraphMap {
            source: g.clone(),
            target: g.clone(),
            vertex_images: (0..g.vertices).collect(),
            edge_images: (0..g.num_edges()).map(|e| vec![pos(e)]).collect(),
        }
    }

    pub fn image(&self, h: HalfEdge) -> Path {
        let p = &self.edge_images[edge_of(h)];
        if is_positive_half(h) {
            p.clone()
        } else {
            invert_path(p)
        }
    }

    /// Reduced image of a path.
    pub fn image_path(&self, p: &[HalfEdge]) -> Path {
        let mut out = Vec::new();
        for &h in p {
            out.extend(self.image(h));
        }
        reduce_path(&out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &GraphMap) -> Result<GraphMap> {
        if self.target != next.source {
            return Err(OslError::InvalidGraph("maps do not compose".into()));
        }
        Ok(GraphMap {
            source: self.source.clone(),
            target: next.target.clone(),
            vertex_images: self.vertex_images.iter().map(|&v| next.vertex_images[v]).collect(),
            edge_images: self.edge_images.iter().map(|p| next.image_path(p)).collect(),
        })
    }

    /// Checks that images are paths between the images of the endpoints.
    pub fn is_regular(&self) -> bool {
        self.source.edges.iter().zip(&self.edge_images).all(|(&(a, b), p)| {
            let (va, vb) = (self.vertex_images[a], self.vertex_images[b]);
            if p.is_empty() {
                return va == vb;
            }
            self.target.is_path(p) && self.target.origin(p[0]) == va && self.target.terminus(p[p.len() - 1]) == vb
        })
    }

    /// Row `i` counts how often the image of edge `i` crosses each target edge.
    pub fn crossing_counts(&self) -> Vec<Vec<usize>> {
        self.edge_images
            .iter()
            .map(|p| {
                let mut row = vec![0; self.target.num_edges()];
                for &h in p {
                    row[edge_of(h)] += 1;
                }
                row
            })
            .collect()
    }

    pub fn transition_matrix(&self) -> Result<IntMatrix> {
        let rows = self.crossing_counts();
        if self.source.num_edges() != self.target.num_edges() {
            return Err(OslError::DimensionMismatch { expected: self.source.num_edges(), found: self.target.num_edges() });
        }
        IntMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    }

    /// First half-edge of the image of `h`, if the image is nonempty.
    pub fn direction_image(&self, h: HalfEdge) -> Option<HalfEdge> {
        self.image(h).first().copied()
    }

    /// Gates at each source vertex: directions grouped by the first edge of their image.
    pub fn gates(&self) -> Vec<Vec<Vec<HalfEdge>>> {
        (0..self.source.vertices)
            .map(|v| {
                let mut groups: Vec<(Option<HalfEdge>, Vec<HalfEdge>)> = Vec::new();
                for h in self.source.half_edges_at(v) {
                    let key = self.direction_image(h);
                    match groups.iter_mut().find(|(k, _)| *k == key && key.is_some()) {
                        Some((_, g)) => g.push(h),
                        None => groups.push((key, vec![h])),
                    }
                }
                groups.into_iter().map(|(_, g)| g).collect()
            })
            .collect()
    }

    /// Vertices with fewer than two gates.
    pub fn single_gate_vertices(&self) -> Vec<usize> {
        self.gates().iter().enumerate().filter(|(_, g)| g.len() < 2).map(|(v, _)| v).collect()
    }

    pub fn is_illegal_turn(&self, t: &Turn) -> bool {
        match (self.direction_image(t.a), self.direction_image(t.b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Illegal turns as unordered pairs `(a, b)` with `a < b`.
    pub fn illegal_turns(&self) -> Vec<Turn> {
        let mut out = Vec::new();
        for gate_set in self.gates() {
            for gate in gate_set {
                for (k, &a) in gate.iter().enumerate() {
                    for &b in &gate[k + 1..] {
                        out.push(Turn::new(a.min(b), a.max(b)));
                    }
                }
            }
        }
        out
    }

    /// Index of the first illegal turn crossed cyclically by `loop_path`.
    pub fn first_illegal_crossing(&self, loop_path: &[HalfEdge]) -> Result<Option<usize>> {
        if !is_cyclically_reduced(loop_path) || (!loop_path.is_empty() && !self.source.is_closed_path(loop_path)) {
            return Err(OslError::InvalidTurn("loop is not a cyclically reduced closed path".into()));
        }
        let n = loop_path.len();
        if n == 0 {
            return Ok(None);
        }
        for k in 0..n {
            let incoming = rev(loop_path[k]);
            let outgoing = loop_path[(k + 1) % n];
            if n == 1 && incoming == outgoing {
                continue;
            }
            if self.is_illegal_turn(&Turn::new(incoming, outgoing)) {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    pub fn is_legal_loop(&self, loop_path: &[HalfEdge]) -> Result<bool> {
        Ok(self.first_illegal_crossing(loop_path)?.is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::graph::neg;

    fn rose_fold() -> GraphMap {
        // fold e1 over e0 on the 2-rose: e1 -> e0 e1
        let g = Graph::rose(2);
        GraphMap { source: g.clone(), target: g, vertex_images: vec![0], edge_images: vec![vec![pos(0)], vec![pos(0), pos(1)]] }
    }

    #[test]
    fn identity_has_singleton_gates() {
        let g = Graph::rose(2);
        let id = GraphMap::identity(&g);
        assert!(id.gates()[0].iter().all(|gate| gate.len() == 1));
        assert_eq!(id.transition_matrix().unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn fold_gate_and_legality() {
        let f = rose_fold();
        assert!(f.is_regular());
        assert_eq!(f.transition_matrix().unwrap(), IntMatrix::from_i64(&[&[1, 0], &[1, 1]]));
        assert_eq!(f.illegal_turns(), vec![Turn::new(pos(0), pos(1))]);
        assert!(f.is_legal_loop(&[pos(0), pos(1)]).unwrap());
        // e0^{-1} e1 crosses the turn {+0, +1}.
        assert!(!f.is_legal_loop(&[neg(0), pos(1)]).unwrap());
        assert!(f.is_legal_loop(&[]).unwrap());
        assert!(f.is_legal_loop(&[pos(0)]).unwrap());
    }
}
