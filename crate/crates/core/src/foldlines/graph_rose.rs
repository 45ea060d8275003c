//! Folding a transitive graph down to a rose with direction-matching proper
//! full folds: path pairs first, then wrap-and-fold on gear graphs.

use crate::error::{OslError, Result};
use crate::graphs::graph::{edge_of, format_half_edge, invert_path, is_positive_half, neg, pos, Graph, HalfEdge, Path, Turn};
use crate::graphs::point::Point;
use crate::matrices::IntMatrix;
use crate::numeric::Q;
use num::BigInt;
use serde::{Deserialize, Serialize};

const FOLD_CAP: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldStage {
    /// Folding two embedded directed paths with common endpoints.
    Pair,
    /// Wrapping part of a circle of a gear graph around another circle.
    Wrap,
    /// Folding the rest of the wrapped circle back onto the other one.
    Close,
}

/// A proper full fold of `short` into `long`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFold {
    pub long: HalfEdge,
    pub short: HalfEdge,
    pub stage: FoldStage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Complexity {
    /// Number of embedded directed paths between distinct vertices.
    Paths(usize),
    /// `(branch vertices, least branch valence)` of a gear graph.
    Gear(usize, usize),
}

#[derive(Clone, Debug)]
pub struct GraphToRose {
    pub start: Point,
    pub folds: Vec<GraphFold>,
    /// `points[k]` is the point after the first `k + 1` folds.
    pub points: Vec<Point>,
    /// Last folded graph, before valence-2 vertices are erased.
    pub folded: Point,
    /// The rose, with its marking normalized.
    pub terminal: Point,
    /// Edge `j` of the rose as a path in `folded`.
    pub edge_paths: Vec<Path>,
    /// Images of the marking petals of `start` as positive loops in the rose.
    pub tracks: Vec<Path>,
    /// Complexity before each unforced move, and at the end of each pair phase.
    pub descent: Vec<Complexity>,
    /// Path counts before and after the pair fold that starts with the
    /// requested turn. No pair through the turn need lower the count.
    pub forced: Option<(usize, usize)>,
}

impl GraphToRose {
    /// `H[i][j]` = number of times track `i` crosses rose edge `j`, so that
    /// petal lengths of `start` are `H · ℓ(terminal)`.
    pub fn change_of_metric(&self) -> IntMatrix {
        let r = self.tracks.len();
        let mut rows = vec![vec![BigInt::from(0); r]; r];
        for (i, t) in self.tracks.iter().enumerate() {
            for &h in t {
                rows[i][edge_of(h)] += 1;
            }
        }
        IntMatrix::from_rows(rows).expect("square by construction")
    }

    /// Edge length vectors along the sequence, starting with `start`.
    pub fn length_vectors(&self) -> Vec<Vec<Q>> {
        std::iter::once(self.start.lengths.clone()).chain(self.points.iter().map(|p| p.lengths.clone())).collect()
    }
}

/// Embedded paths from `u` following `forward` (positive) or backward
/// (negative) half-edges.
fn embedded_paths(g: &Graph, u: usize, forward: bool) -> Vec<Path> {
    let mut out = Vec::new();
    let mut visited = vec![false; g.vertices];
    visited[u] = true;
    let mut path = Vec::new();
    walk(g, u, forward, &mut visited, &mut path, &mut out);
    out
}

fn walk(g: &Graph, v: usize, forward: bool, visited: &mut Vec<bool>, path: &mut Path, out: &mut Vec<Path>) {
    for h in g.half_edges_at(v) {
        if is_positive_half(h) != forward {
            continue;
        }
        let w = g.terminus(h);
        if visited[w] {
            continue;
        }
        visited[w] = true;
        path.push(h);
        out.push(path.clone());
        walk(g, w, forward, visited, path, out);
        path.pop();
        visited[w] = false;
    }
}

fn interior(g: &Graph, p: &[HalfEdge]) -> Vec<usize> {
    p[..p.len() - 1].iter().map(|&h| g.terminus(h)).collect()
}

pub fn path_count(g: &Graph) -> usize {
    (0..g.vertices).map(|u| embedded_paths(g, u, true).len()).sum()
}

fn pair_key(a: &Path, b: &Path) -> (usize, Path, Path) {
    (a.len() + b.len(), a.clone(), b.clone())
}

/// Pairs of embedded paths from a common vertex to a common distinct vertex
/// with disjoint interiors, least first. With `first`, the paths must start
/// with the two directions of the turn.
fn path_pairs(g: &Graph, first: Option<&Turn>) -> Vec<(Path, Path)> {
    let (starts, forward): (Vec<usize>, bool) = match first {
        Some(t) => (vec![g.origin(t.a)], is_positive_half(t.a)),
        None => ((0..g.vertices).collect(), true),
    };
    let mut out: Vec<(usize, Path, Path)> = Vec::new();
    for u in starts {
        let paths = embedded_paths(g, u, forward);
        for (i, a) in paths.iter().enumerate() {
            if let Some(t) = first {
                if a[0] != t.a {
                    continue;
                }
            }
            let end = g.terminus(a[a.len() - 1]);
            let inner_a = interior(g, a);
            for (j, b) in paths.iter().enumerate() {
                if i == j || g.terminus(b[b.len() - 1]) != end || edge_of(a[0]) == edge_of(b[0]) {
                    continue;
                }
                match first {
                    Some(t) if b[0] != t.b => continue,
                    None if b > a => continue,
                    _ => {}
                }
                if interior(g, b).iter().any(|v| inner_a.contains(v)) {
                    continue;
                }
                out.push(pair_key(a, b));
            }
        }
    }
    out.sort();
    out.into_iter().map(|(_, a, b)| (a, b)).collect()
}

/// Circle of a gear graph through the directed edge `h`.
fn circle_through(g: &Graph, h: HalfEdge) -> Option<Path> {
    let (from, to) = (g.terminus(h), g.origin(h));
    if from == to {
        return Some(vec![h]);
    }
    embedded_paths(g, from, true)
        .into_iter()
        .filter(|p| g.terminus(p[p.len() - 1]) == to)
        .min_by_key(|p| (p.len(), p.clone()))
        .map(|p| [vec![h], p].concat())
}

fn branch_vertices(g: &Graph) -> Vec<usize> {
    (0..g.vertices).filter(|&v| g.valence(v) > 2).collect()
}

fn gear_complexity(g: &Graph) -> Complexity {
    let vs = branch_vertices(g);
    let m = vs.iter().map(|&v| g.valence(v)).min().unwrap_or(0);
    Complexity::Gear(vs.len(), m)
}

#[derive(Clone)]
struct Folder {
    point: Point,
    folds: Vec<GraphFold>,
    points: Vec<Point>,
}

impl Folder {
    /// Folds the shorter of the two leading edges into the longer, maps every
    /// path in `others`, and strips the now common leading edge from `a`, `b`.
    fn step(&mut self, a: &mut Path, b: &mut Path, others: &mut [&mut Path], stage: FoldStage) -> Result<()> {
        if self.folds.len() >= FOLD_CAP {
            return Err(OslError::FoldStalled(format!("more than {FOLD_CAP} folds")));
        }
        let (ha, hb) = (a[0], b[0]);
        let (la, lb) = (self.point.length(ha), self.point.length(hb));
        let (long, short) = match la.cmp(lb) {
            std::cmp::Ordering::Less => (hb, ha),
            std::cmp::Ordering::Greater => (ha, hb),
            std::cmp::Ordering::Equal => {
                return Err(OslError::NotProper(format!("{} and {} have equal length", format_half_edge(ha), format_half_edge(hb))))
            }
        };
        let (next, map) = self.point.fold_proper_full(long, short)?;
        for p in [&mut *a, &mut *b] {
            *p = map.image_path(p);
            if p.first() != Some(&short) {
                return Err(OslError::FoldStalled("folded paths lost their common edge".into()));
            }
            p.remove(0);
        }
        for p in others.iter_mut() {
            **p = map.image_path(p);
        }
        self.folds.push(GraphFold { long, short, stage });
        self.points.push(next.clone());
        self.point = next;
        Ok(())
    }

    /// The fold of the least path pair that lowers the path count, or of
    /// the least pair if none does; `None` once no pair is left.
    fn descending_pair(&self, first: Option<&Turn>) -> Result<Option<Folder>> {
        let pairs = path_pairs(&self.point.graph, first);
        let Some(least) = pairs.first().cloned() else { return Ok(None) };
        let count = path_count(&self.point.graph);
        for (a, b) in pairs {
            let mut trial = self.clone();
            if trial.fold_pair(a, b).is_ok() && path_count(&trial.point.graph) < count {
                return Ok(Some(trial));
            }
        }
        let mut trial = self.clone();
        trial.fold_pair(least.0, least.1)?;
        Ok(Some(trial))
    }

    fn fold_pair(&mut self, mut a: Path, mut b: Path) -> Result<()> {
        while !a.is_empty() && !b.is_empty() {
            self.step(&mut a, &mut b, &mut [], FoldStage::Pair)?;
        }
        Ok(())
    }

    /// Wraps `beta` (from `w` to `v`) around the circle `gamma1` at `w` until
    /// it is used up, then folds the reversed `alpha` (from `v` to `w`) onto
    /// the reversed rest of the circle.
    fn wrap_and_close(&mut self, mut alpha: Path, mut beta: Path, mut gamma1: Path) -> Result<()> {
        let mut q: Path = Vec::new();
        while !beta.is_empty() {
            if q.is_empty() {
                q = gamma1.clone();
            }
            self.step(&mut beta, &mut q, &mut [&mut gamma1, &mut alpha], FoldStage::Wrap)?;
        }
        let mut a = invert_path(&alpha);
        let mut c = invert_path(&q);
        while !a.is_empty() && !c.is_empty() {
            self.step(&mut a, &mut c, &mut [], FoldStage::Close)?;
        }
        Ok(())
    }

    /// One gear move at a branch vertex `w` of least valence: `β` runs along
    /// a circle from `w` to the next branch vertex `v` and is wrapped around
    /// the longest other circle at `w`, moving two units of valence from `w`
    /// to `v`. Returns `false` when at most one branch vertex is left.
    fn gear_move(&mut self) -> Result<bool> {
        let g = self.point.graph.clone();
        let base = self.point.marking.base;
        let vs = branch_vertices(&g);
        if vs.len() <= 1 {
            return Ok(false);
        }
        let w = *vs.iter().min_by_key(|&&v| (g.valence(v), v == base, v)).expect("nonempty");
        let mut circles: Vec<Path> = Vec::new();
        for h in g.half_edges_at(w) {
            if !is_positive_half(h) || circles.iter().any(|c| c.contains(&h)) {
                continue;
            }
            let c = circle_through(&g, h).ok_or_else(|| OslError::FoldStalled("graph is not a gear graph".into()))?;
            circles.push(c);
        }
        let mut best: Option<(Q, Path, Path, Path)> = None;
        for (k, c2) in circles.iter().enumerate() {
            let Some(cut) = (1..c2.len()).find(|&i| g.valence(g.origin(c2[i])) > 2) else { continue };
            let Some(c1) = circles
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .max_by(|a, b| self.point.path_length(a.1).cmp(&self.point.path_length(b.1)))
                .map(|(_, c)| c.clone())
            else {
                continue;
            };
            let laps = self.point.path_length(&c2[..cut]) / self.point.path_length(&c1);
            if best.as_ref().is_none_or(|b| laps < b.0) {
                best = Some((laps, c2[cut..].to_vec(), c2[..cut].to_vec(), c1));
            }
        }
        let (_, alpha, beta, gamma1) = best.ok_or_else(|| OslError::FoldStalled("no gear move applies".into()))?;
        self.wrap_and_close(alpha, beta, gamma1)?;
        Ok(true)
    }
}

/// Folds `x` (edges oriented transitively) to a rose. When `x` is trivalent
/// and `first` is given, the first fold folds that turn.
pub fn graph_to_rose(x: &Point, first: Option<&Turn>) -> Result<GraphToRose> {
    if !x.graph.is_transitive() {
        return Err(OslError::NonTransitive);
    }
    let mut f = Folder { point: x.clone(), folds: Vec::new(), points: Vec::new() };
    let mut descent = Vec::new();
    let mut forced = None;
    if let Some(t) = first.filter(|_| x.graph.is_trivalent()) {
        x.graph.check_turn(t)?;
        if !t.is_direction_matching() {
            return Err(OslError::InvalidTurn(format!("{t} is not direction matching")));
        }
        let before = path_count(&x.graph);
        f = f.descending_pair(Some(t))?.ok_or_else(|| OslError::FoldStalled(format!("no path pair starts with {t}")))?;
        forced = Some((before, path_count(&f.point.graph)));
    }
    loop {
        while let Some(next) = f.descending_pair(None)? {
            descent.push(Complexity::Paths(path_count(&f.point.graph)));
            f = next;
        }
        descent.push(Complexity::Paths(path_count(&f.point.graph)));
        descent.push(gear_complexity(&f.point.graph));
        if !f.gear_move()? {
            break;
        }
    }
    let folded = f.point.clone();
    let unsub = folded.unsubdivide(&[])?;
    if !unsub.point.graph.is_rose() {
        return Err(OslError::FoldStalled("terminal graph is not a rose".into()));
    }
    let tracks = unsub.point.marking.petals.clone();
    let positive = |ps: &[Path]| ps.iter().all(|t| t.iter().all(|&h| is_positive_half(h)));
    if positive(&x.marking.petals) && !positive(&tracks) {
        return Err(OslError::FoldStalled("petal images are not positive".into()));
    }
    let mut terminal = unsub.point;
    terminal.normalize_rose_marking();
    Ok(GraphToRose { start: x.clone(), folds: f.folds, points: f.points, folded, terminal, edge_paths: unsub.edge_paths, tracks, descent, forced })
}

/// Replays a combinatorial fold sequence on `x`, failing at the first fold
/// that is not proper.
pub fn replay(x: &Point, folds: &[GraphFold]) -> Result<GraphToRose> {
    let mut point = x.clone();
    let mut points = Vec::with_capacity(folds.len());
    for (k, f) in folds.iter().enumerate() {
        let (next, _) = point.fold_proper_full(f.long, f.short).map_err(|e| match e {
            OslError::NotProper(_) => OslError::OutsideNeighborhood { fold: k },
            other => other,
        })?;
        points.push(next.clone());
        point = next;
    }
    let unsub = point.unsubdivide(&[])?;
    if !unsub.point.graph.is_rose() {
        return Err(OslError::FoldStalled("replayed sequence does not end at a rose".into()));
    }
    let tracks = unsub.point.marking.petals.clone();
    let mut terminal = unsub.point;
    terminal.normalize_rose_marking();
    Ok(GraphToRose { start: x.clone(), folds: folds.to_vec(), points, folded: point, terminal, edge_paths: unsub.edge_paths, tracks, descent: Vec::new(), forced: None })
}

/// The rose turn `{−i, −j}` or `{+i, +j}` as a turn of a graph whose edges
/// `i`, `j` end (or start) at a common vertex.
pub fn incoming_turn(i: usize, j: usize) -> Turn {
    Turn::new(neg(i), neg(j))
}

pub fn outgoing_turn(i: usize, j: usize) -> Turn {
    Turn::new(pos(i), pos(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::point::Marking;
    use crate::numeric::q;

    fn theta() -> Point {
        // loops a·b and a·c at vertex 0, a: 0 → 1, b, c: 1 → 0
        let g = Graph::new(2, vec![(0, 1), (1, 0), (1, 0)]).unwrap();
        Point::new(g.clone(), vec![q(3, 10), q(7, 10), q(1, 2)], Marking::spanning_tree(&g, 0)).unwrap()
    }

    #[test]
    fn rose_is_already_done() {
        let x = Point::rose(vec![q(1, 2), q(1, 3)]).unwrap();
        let out = graph_to_rose(&x, None).unwrap();
        assert!(out.folds.is_empty());
        assert_eq!(out.terminal.lengths, x.lengths);
    }

    #[test]
    fn theta_folds_turn_first() {
        let x = theta();
        let t = incoming_turn(1, 2);
        let out = graph_to_rose(&x, Some(&t)).unwrap();
        let f = out.folds[0];
        assert_eq!((f.long, f.short), (neg(1), neg(2)));
        assert!(out.terminal.graph.is_rose());
        let h = out.change_of_metric();
        assert!(h.is_nonnegative());
        assert_eq!(h.determinant().magnitude(), &num::BigUint::from(1u8));
    }

    #[test]
    fn chain_of_circles_uses_gear_moves() {
        // petal at 0, circle 0 → 1 → 0, petal at 1
        let g = Graph::new(2, vec![(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let petals = vec![vec![pos(0)], vec![pos(1), pos(2)], vec![pos(1), pos(3), pos(2)]];
        let marking = Marking { word: crate::graphs::automorphism::AutomorphismWord::identity(3), base: 0, petals };
        let x = Point::new(g, vec![q(1, 3), q(1, 5), q(2, 7), q(1, 11)], marking).unwrap();
        let out = graph_to_rose(&x, None).unwrap();
        assert!(out.folds.iter().any(|f| f.stage == FoldStage::Wrap));
        let h = out.change_of_metric();
        let lz = h.apply_rationals(&out.terminal.lengths).unwrap();
        let lx: Vec<Q> = x.marking.petals.iter().map(|p| x.path_length(p)).collect();
        assert_eq!(lz, lx);
        assert!(out.terminal.graph.is_rose());
        let gear: Vec<Complexity> = out.descent.iter().copied().filter(|c| matches!(c, Complexity::Gear(..))).collect();
        assert!(gear.windows(2).all(|w| w[1] < w[0]));
    }
}
