//! Combinatorial folds and subdivisions as quotient maps of graphs.

use super::graph::{edge_of, is_positive_half, neg, pos, rev, Graph, HalfEdge, Turn};
use super::map::GraphMap;
use crate::error::{OslError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    /// `t.b` is folded entirely into an initial segment of `t.a`.
    ProperFull,
    /// `t.a` and `t.b` are identified entirely.
    Full,
    /// Initial segments of both edges are identified, leaving a new vertex.
    Partial,
}

fn move_end(g: &mut Graph, h: HalfEdge, to: usize) {
    let e = edge_of(h);
    if is_positive_half(h) {
        g.edges[e].0 = to;
    } else {
        g.edges[e].1 = to;
    }
}

/// Image of the positive half-edge of `edge_of(h)` when `h ↦ [prefix, h]`.
fn prefixed_image(h: HalfEdge, prefix: HalfEdge) -> Vec<HalfEdge> {
    if is_positive_half(h) {
        vec![prefix, h]
    } else {
        vec![rev(h), rev(prefix)]
    }
}

fn check_distinct(g: &Graph, t: &Turn) -> Result<()> {
    g.check_turn(t)?;
    if edge_of(t.a) == edge_of(t.b) {
        return Err(OslError::InvalidTurn(format!("{t}: both directions belong to one edge")));
    }
    Ok(())
}

/// Folds all of `short` into `long`: the end of `long` at the common vertex
/// moves to the terminus of `short`, and `long ↦ short · long`.
pub fn fold_proper_full(g: &Graph, long: HalfEdge, short: HalfEdge) -> Result<(Graph, GraphMap)> {
    check_distinct(g, &Turn::new(long, short))?;
    let mut out = g.clone();
    move_end(&mut out, long, g.terminus(short));
    let mut images: Vec<Vec<HalfEdge>> = (0..g.num_edges()).map(|e| vec![pos(e)]).collect();
    images[edge_of(long)] = prefixed_image(long, short);
    let map = GraphMap { source: g.clone(), target: out.clone(), vertex_images: (0..g.vertices).collect(), edge_images: images };
    Ok((out, map))
}

/// Identifies initial segments of `a` and `b`. A new vertex (last id) and a new
/// edge `c` (last id) appear; `c` is oriented so that a direction-matching
/// turn keeps positive edges positive.
pub fn fold_partial(g: &Graph, a: HalfEdge, b: HalfEdge) -> Result<(Graph, GraphMap)> {
    check_distinct(g, &Turn::new(a, b))?;
    let u = g.origin(a);
    let p = g.vertices;
    let c = g.num_edges();
    let mut out = g.clone();
    out.vertices += 1;
    let hc = if is_positive_half(a) {
        out.edges.push((u, p));
        pos(c)
    } else {
        out.edges.push((p, u));
        neg(c)
    };
    move_end(&mut out, a, p);
    move_end(&mut out, b, p);
    let mut images: Vec<Vec<HalfEdge>> = (0..g.num_edges()).map(|e| vec![pos(e)]).collect();
    images[edge_of(a)] = prefixed_image(a, hc);
    images[edge_of(b)] = prefixed_image(b, hc);
    let map = GraphMap { source: g.clone(), target: out.clone(), vertex_images: (0..g.vertices).collect(), edge_images: images };
    Ok((out, map))
}

/// Identifies `drop` with `keep` entirely. The edge of `drop` disappears and
/// the terminus of `drop` merges into the terminus of `keep`; ids above the
/// removed edge and vertex shift down by one.
pub fn fold_identify(g: &Graph, keep: HalfEdge, drop: HalfEdge) -> Result<(Graph, GraphMap)> {
    check_distinct(g, &Turn::new(keep, drop))?;
    let dropped = edge_of(drop);
    let wk = g.terminus(keep);
    let wd = g.terminus(drop);
    let vmap: Vec<usize> = (0..g.vertices)
        .map(|v| {
            let v = if v == wd { wk } else { v };
            if wd != wk && v > wd {
                v - 1
            } else {
                v
            }
        })
        .collect();
    let emap = |e: usize| if e > dropped { e - 1 } else { e };
    let remap_half = |h: HalfEdge| 2 * emap(edge_of(h)) + h % 2;
    let edges: Vec<(usize, usize)> =
        g.edges.iter().enumerate().filter(|&(e, _)| e != dropped).map(|(_, &(a, b))| (vmap[a], vmap[b])).collect();
    let vertices = if wd != wk { g.vertices - 1 } else { g.vertices };
    let out = Graph { vertices, edges };
    let images = (0..g.num_edges())
        .map(|e| {
            if e == dropped {
                let k = remap_half(keep);
                if is_positive_half(drop) {
                    vec![k]
                } else {
                    vec![rev(k)]
                }
            } else {
                vec![pos(emap(e))]
            }
        })
        .collect();
    let map = GraphMap { source: g.clone(), target: out.clone(), vertex_images: vmap, edge_images: images };
    Ok((out, map))
}

/// Splits edge `e`; the first part keeps id `e` and ends at the new vertex,
/// the second part is a new edge with the last id.
pub fn subdivide(g: &Graph, e: usize) -> (Graph, GraphMap) {
    let p = g.vertices;
    let n = g.num_edges();
    let mut out = g.clone();
    out.vertices += 1;
    let (tail, head) = g.edges[e];
    out.edges[e] = (tail, p);
    out.edges.push((p, head));
    let mut images: Vec<Vec<HalfEdge>> = (0..g.num_edges()).map(|k| vec![pos(k)]).collect();
    images[e] = vec![pos(e), pos(n)];
    let map = GraphMap { source: g.clone(), target: out.clone(), vertex_images: (0..g.vertices).collect(), edge_images: images };
    (out, map)
}

/// Purely combinatorial fold of the turn `{t.a, t.b}`.
pub fn combinatorial_fold(g: &Graph, t: &Turn, kind: FoldKind) -> Result<(Graph, GraphMap)> {
    match kind {
        FoldKind::ProperFull => fold_proper_full(g, t.a, t.b),
        FoldKind::Full => fold_identify(g, t.a, t.b),
        FoldKind::Partial => fold_partial(g, t.a, t.b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::IntMatrix;

    #[test]
    fn rose_proper_full_is_unfold_matrix() {
        let g = Graph::rose(2);
        let (h, f) = fold_proper_full(&g, pos(0), pos(1)).unwrap();
        assert!(h.is_rose());
        assert!(f.is_regular());
        assert_eq!(f.transition_matrix().unwrap(), IntMatrix::from_i64(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn partial_fold_gives_theta() {
        let g = Graph::rose(2);
        let (h, f) = fold_partial(&g, pos(0), pos(1)).unwrap();
        assert_eq!(h.vertices, 2);
        assert_eq!(h.num_edges(), 3);
        assert!(h.is_trivalent());
        assert!(h.is_transitive());
        assert!(f.is_regular());
        assert_eq!(h.rank(), 2);
    }

    #[test]
    fn negative_partial_fold_keeps_orientation() {
        let g = Graph::rose(2);
        let (h, f) = fold_partial(&g, neg(0), neg(1)).unwrap();
        assert!(h.is_transitive());
        assert!(f.edge_images.iter().all(|p| p.iter().all(|&x| is_positive_half(x))));
    }

    #[test]
    fn identify_with_same_terminus_drops_rank() {
        let g = Graph::rose(2);
        let (h, f) = fold_identify(&g, pos(0), pos(1)).unwrap();
        assert_eq!(h.rank(), 1);
        assert!(f.is_regular());
    }

    #[test]
    fn subdivision_is_regular() {
        let g = Graph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let (h, f) = subdivide(&g, 1);
        assert_eq!(h.valence(2), 2);
        assert!(f.is_regular());
    }
}
