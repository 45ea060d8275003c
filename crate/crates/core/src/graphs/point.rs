//! Marked metric graphs.
//!
//! A marking is kept as a rose-level automorphism word `μ` together with the
//! images of the reference rose petals in the graph (loops at a base vertex).
//! The marking sends `X_k` to `μ(X_k)` with each petal letter replaced by its
//! loop.

use super::automorphism::{gen, AutLetter, AutomorphismWord, FreeWord};
use super::fold;
use super::graph::{edge_of, invert_path, is_positive_half, pos, reduce_path, rev, Graph, HalfEdge, Path, Turn};
use super::map::GraphMap;
use crate::error::{OslError, Result};
use crate::matrices::IntMatrix;
use crate::numeric::{self, Q};
use num::{BigInt, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    pub word: AutomorphismWord,
    pub base: usize,
    pub petals: Vec<Path>,
}

impl Marking {
    pub fn identity_rose(r: usize) -> Marking {
        Marking { word: AutomorphismWord::identity(r), base: 0, petals: (0..r).map(|e| vec![pos(e)]).collect() }
    }

    pub fn rank(&self) -> usize {
        self.petals.len()
    }

    /// Identity word with the standard basis of a breadth-first spanning tree
    /// at `base`: one loop per non-tree edge, in edge order.
    pub fn spanning_tree(g: &Graph, base: usize) -> Marking {
        let mut parent: Vec<Option<HalfEdge>> = vec![None; g.vertices];
        let mut seen = vec![false; g.vertices];
        seen[base] = true;
        let mut in_tree = vec![false; g.num_edges()];
        let mut queue = std::collections::VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for h in g.half_edges_at(v) {
                let w = g.terminus(h);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(h);
                    in_tree[edge_of(h)] = true;
                    queue.push_back(w);
                }
            }
        }
        let to_vertex = |v: usize| -> Path {
            let mut p = Vec::new();
            let mut x = v;
            while let Some(h) = parent[x] {
                p.push(h);
                x = g.origin(h);
            }
            p.reverse();
            p
        };
        let petals: Vec<Path> = (0..g.num_edges())
            .filter(|&e| !in_tree[e])
            .map(|e| {
                let (a, b) = g.edges[e];
                [to_vertex(a), vec![pos(e)], invert_path(&to_vertex(b))].concat()
            })
            .collect();
        Marking { word: AutomorphismWord::identity(petals.len()), base, petals }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub graph: Graph,
    pub lengths: Vec<Q>,
    pub marking: Marking,
}

/// Result of erasing valence-2 vertices: the new point, rewritten tracked
/// paths, and for each new edge the old half-edge path it replaces.
#[derive(Clone, Debug)]
pub struct Unsubdivision {
    pub point: Point,
    pub paths: Vec<Path>,
    pub edge_paths: Vec<Path>,
}

impl Point {
    pub fn new(graph: Graph, lengths: Vec<Q>, marking: Marking) -> Result<Point> {
        if lengths.len() != graph.num_edges() {
            return Err(OslError::DimensionMismatch { expected: graph.num_edges(), found: lengths.len() });
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(OslError::NonPositive);
        }
        if !graph.is_connected() {
            return Err(OslError::Disconnected);
        }
        if marking.base >= graph.vertices {
            return Err(OslError::InvalidGraph("base vertex out of range".into()));
        }
        for p in &marking.petals {
            if !p.is_empty() && (!graph.is_closed_path(p) || graph.origin(p[0]) != marking.base) {
                return Err(OslError::InvalidGraph("petal image is not a loop at the base vertex".into()));
            }
        }
        if marking.word.rank != marking.petals.len() {
            return Err(OslError::DimensionMismatch { expected: marking.petals.len(), found: marking.word.rank });
        }
        Ok(Point { graph, lengths, marking })
    }

    /// Rose with the identity marking.
    pub fn rose(lengths: Vec<Q>) -> Result<Point> {
        let r = lengths.len();
        Point::new(Graph::rose(r), lengths, Marking::identity_rose(r))
    }

    pub fn rank(&self) -> usize {
        self.marking.rank()
    }

    pub fn volume(&self) -> Q {
        numeric::sum(&self.lengths)
    }

    pub fn is_normalized(&self) -> bool {
        self.volume() == Q::from_integer(BigInt::from(1))
    }

    pub fn normalized(&self) -> Point {
        let v = self.volume();
        let mut out = self.clone();
        out.lengths = self.lengths.iter().map(|l| l / &v).collect();
        out
    }

    pub fn scaled(&self, c: &Q) -> Point {
        let mut out = self.clone();
        out.lengths = self.lengths.iter().map(|l| l * c).collect();
        out
    }

    pub fn length(&self, h: HalfEdge) -> &Q {
        &self.lengths[edge_of(h)]
    }

    pub fn path_length(&self, p: &[HalfEdge]) -> Q {
        p.iter().fold(Q::zero(), |acc, &h| acc + self.length(h))
    }

    /// Precomposes the marking with `w`; graph and lengths are untouched.
    pub fn act(&self, w: &AutomorphismWord) -> Point {
        let mut out = self.clone();
        out.marking.word = w.then(&self.marking.word);
        out
    }

    /// Full fold of `t.b` into `t.a`: `ℓ(a) ≥ ℓ(b)`, strictly when the two
    /// edges end at the same vertex.
    pub fn is_allowable(&self, t: &Turn) -> bool {
        if self.graph.check_turn(t).is_err() || edge_of(t.a) == edge_of(t.b) {
            return false;
        }
        let (la, lb) = (self.length(t.a), self.length(t.b));
        if self.graph.terminus(t.a) == self.graph.terminus(t.b) {
            la > lb
        } else {
            la >= lb
        }
    }

    fn mapped(&self, graph: Graph, lengths: Vec<Q>, map: &GraphMap) -> Point {
        Point {
            graph,
            lengths,
            marking: Marking {
                word: self.marking.word.clone(),
                base: map.vertex_images[self.marking.base],
                petals: self.marking.petals.iter().map(|p| map.image_path(p)).collect(),
            },
        }
    }

    /// Folds all of `short` into `long`; requires `ℓ(short) < ℓ(long)`.
    pub fn fold_proper_full(&self, long: HalfEdge, short: HalfEdge) -> Result<(Point, GraphMap)> {
        let (ll, ls) = (self.length(long), self.length(short));
        if ll <= ls {
            return Err(OslError::NotProper(format!(
                "{} is not longer than {}",
                super::graph::format_half_edge(long),
                super::graph::format_half_edge(short)
            )));
        }
        let (g, map) = fold::fold_proper_full(&self.graph, long, short)?;
        let mut lengths = self.lengths.clone();
        lengths[edge_of(long)] = ll - ls;
        Ok((self.mapped(g, lengths, &map), map))
    }

    /// Identifies initial segments of length `t`, `0 < t < min(ℓ(a), ℓ(b))`.
    pub fn fold_partial(&self, a: HalfEdge, b: HalfEdge, t: &Q) -> Result<(Point, GraphMap)> {
        if !t.is_positive() || t >= self.length(a) || t >= self.length(b) {
            return Err(OslError::OutOfDomain(format!("partial fold amount {} out of range", numeric::format_rational(t))));
        }
        let (g, map) = fold::fold_partial(&self.graph, a, b)?;
        let mut lengths = self.lengths.clone();
        lengths[edge_of(a)] -= t;
        lengths[edge_of(b)] -= t;
        lengths.push(t.clone());
        Ok((self.mapped(g, lengths, &map), map))
    }

    /// Identifies two edges of equal length entirely. Fails with `NotAPath`
    /// when they end at the same vertex, since the rank would drop.
    pub fn fold_identify(&self, keep: HalfEdge, drop: HalfEdge) -> Result<(Point, GraphMap)> {
        if self.length(keep) != self.length(drop) {
            return Err(OslError::NotProper("identified edges differ in length".into()));
        }
        if self.graph.terminus(keep) == self.graph.terminus(drop) {
            return Err(OslError::NotAPath);
        }
        let (g, map) = fold::fold_identify(&self.graph, keep, drop)?;
        let lengths = self.lengths.iter().enumerate().filter(|&(e, _)| e != edge_of(drop)).map(|(_, l)| l.clone()).collect();
        Ok((self.mapped(g, lengths, &map), map))
    }

    /// Splits the edge of `h` at distance `t` from the origin of `h`. Returns
    /// the point, the map, and the new half-edge of length `t` leaving `origin(h)`.
    pub fn subdivide(&self, h: HalfEdge, t: &Q) -> Result<(Point, GraphMap, HalfEdge)> {
        let e = edge_of(h);
        let l = &self.lengths[e];
        if !t.is_positive() || t >= l {
            return Err(OslError::OutOfDomain("subdivision point outside the edge".into()));
        }
        let from_tail = if is_positive_half(h) { t.clone() } else { l - t };
        let (g, map) = fold::subdivide(&self.graph, e);
        let n = self.graph.num_edges();
        let mut lengths = self.lengths.clone();
        lengths[e] = from_tail.clone();
        lengths.push(l - &from_tail);
        let first = if is_positive_half(h) { pos(e) } else { rev(pos(n)) };
        Ok((self.mapped(g, lengths, &map), map, first))
    }

    /// Erases every valence-2 vertex, rewriting `paths` (which must not start
    /// or end at such a vertex). A base vertex of valence 2 is moved first by
    /// conjugating the petals.
    pub fn unsubdivide(&self, paths: &[Path]) -> Result<Unsubdivision> {
        let mut point = self.clone();
        let mut paths: Vec<Path> = paths.to_vec();
        let mut edge_paths: Vec<Path> = (0..self.graph.num_edges()).map(|e| vec![pos(e)]).collect();
        loop {
            let g = &point.graph;
            let candidate = (0..g.vertices).find(|&v| {
                let hs = g.half_edges_at(v);
                hs.len() == 2 && edge_of(hs[0]) != edge_of(hs[1])
            });
            let Some(v) = candidate else { break };
            let hs = g.half_edges_at(v);
            let (h1, h2) = (hs[0], hs[1]);
            if paths.iter().any(|p| !p.is_empty() && (g.origin(p[0]) == v || g.terminus(p[p.len() - 1]) == v)) {
                return Err(OslError::InvalidGraph("tracked path ends at a valence-2 vertex".into()));
            }
            if point.marking.base == v {
                point.marking.base = g.terminus(h2);
                point.marking.petals =
                    point.marking.petals.iter().map(|p| reduce_path(&[vec![rev(h2)], p.clone(), vec![h2]].concat())).collect();
            }
            let (e1, e2) = (edge_of(h1), edge_of(h2));
            let (keep, drop) = (e1.min(e2), e1.max(e2));
            // combined path through v: rev(h1) then h2
            let through = [rev(h1), h2];
            let keep_half = if keep == e1 { through[0] } else { through[1] };
            let forward = is_positive_half(keep_half);
            let positive_path: Path = if forward { through.to_vec() } else { invert_path(&through) };
            let tail = g.origin(positive_path[0]);
            let head = g.terminus(positive_path[1]);
            let new_len = &point.lengths[e1] + &point.lengths[e2];
            // renumber
            let emap = |e: usize| if e > drop { e - 1 } else { e };
            let vmap = |u: usize| if u > v { u - 1 } else { u };
            let rewrite = |p: &Path| -> Path {
                let mut out = Vec::with_capacity(p.len());
                let mut k = 0;
                while k < p.len() {
                    if k + 1 < p.len() && p[k] == positive_path[0] && p[k + 1] == positive_path[1] {
                        out.push(pos(emap(keep)));
                        k += 2;
                    } else if k + 1 < p.len() && p[k] == rev(positive_path[1]) && p[k + 1] == rev(positive_path[0]) {
                        out.push(rev(pos(emap(keep))));
                        k += 2;
                    } else {
                        let h = p[k];
                        out.push(2 * emap(edge_of(h)) + h % 2);
                        k += 1;
                    }
                }
                out
            };
            let mut edges = g.edges.clone();
            edges[keep] = (tail, head);
            edges.remove(drop);
            let edges = edges.into_iter().map(|(a, b)| (vmap(a), vmap(b))).collect();
            let mut lengths = point.lengths.clone();
            lengths[keep] = new_len;
            lengths.remove(drop);
            let merged = [edge_paths[edge_of(positive_path[0])].clone(), edge_paths[edge_of(positive_path[1])].clone()];
            let orient = |h: HalfEdge, p: &Path| if is_positive_half(h) { p.clone() } else { invert_path(p) };
            let combined = [orient(positive_path[0], &merged[0]), orient(positive_path[1], &merged[1])].concat();
            let petals = point.marking.petals.iter().map(&rewrite).collect();
            paths = paths.iter().map(&rewrite).collect();
            edge_paths[keep] = combined;
            edge_paths.remove(drop);
            point = Point {
                graph: Graph { vertices: g.vertices - 1, edges },
                lengths,
                marking: Marking { word: point.marking.word.clone(), base: vmap(point.marking.base), petals },
            };
        }
        Ok(Unsubdivision { point, paths, edge_paths })
    }

    /// On a rose, absorbs the petal words into the marking word so that petal
    /// `k` becomes edge `k`.
    pub fn normalize_rose_marking(&mut self) {
        if !self.graph.is_rose() {
            return;
        }
        let words: Vec<FreeWord> = self.marking.petals.iter().map(|p| path_to_word(p)).collect();
        let r = words.len();
        if let Some(letter) = letter_from_images(&words, r) {
            self.marking.word.push(letter);
        }
        self.marking.petals = (0..r).map(|e| vec![pos(e)]).collect();
        self.marking.base = 0;
    }

    /// Signed `rank × |E|` matrix of the marking: row `k` abelianizes the
    /// loop representing `X_k`.
    pub fn marking_abelianization(&self) -> Vec<Vec<BigInt>> {
        let petal: Vec<Vec<BigInt>> = self
            .marking
            .petals
            .iter()
            .map(|p| {
                let mut row = vec![BigInt::zero(); self.graph.num_edges()];
                for &h in p {
                    row[edge_of(h)] += if is_positive_half(h) { 1 } else { -1 };
                }
                row
            })
            .collect();
        let mu = self.marking.word.abelianization();
        (0..self.rank())
            .map(|i| {
                (0..self.graph.num_edges())
                    .map(|j| (0..self.rank()).fold(BigInt::zero(), |acc, k| acc + mu.get(i, k) * &petal[k][j]))
                    .collect()
            })
            .collect()
    }

    /// Unsigned counts of petal images over edges, for square cases.
    pub fn petal_transition(&self) -> Result<IntMatrix> {
        let rows = self
            .marking
            .petals
            .iter()
            .map(|p| {
                let mut row = vec![BigInt::zero(); self.graph.num_edges()];
                for &h in p {
                    row[edge_of(h)] += 1;
                }
                row
            })
            .collect();
        IntMatrix::from_rows(rows)
    }
}

pub fn path_to_word(p: &[HalfEdge]) -> FreeWord {
    p.iter().map(|&h| if is_positive_half(h) { gen(edge_of(h)) } else { -gen(edge_of(h)) }).collect()
}

/// The most specific letter with the given generator images, or `None` for the identity.
pub fn letter_from_images(words: &[FreeWord], r: usize) -> Option<AutLetter> {
    let single: Vec<Option<i32>> = words.iter().map(|w| if w.len() == 1 { Some(w[0]) } else { None }).collect();
    if single.iter().enumerate().all(|(k, s)| *s == Some(gen(k))) {
        return None;
    }
    if single.iter().all(|s| s.is_some_and(|l| l > 0)) {
        let perm: Vec<usize> = single.iter().map(|s| (s.unwrap() - 1) as usize).collect();
        let mut seen = vec![false; r];
        if perm.iter().all(|&p| p < r && !std::mem::replace(&mut seen[p], true)) {
            return Some(AutLetter::Permutation { perm });
        }
    }
    let changed: Vec<usize> = (0..r).filter(|&k| single[k] != Some(gen(k))).collect();
    if changed.len() == 1 {
        let i = changed[0];
        let w = &words[i];
        if w.len() == 2 && w[1] == gen(i) && w[0].unsigned_abs() as usize != i + 1 {
            return Some(AutLetter::Fold { i, j: (w[0].unsigned_abs() - 1) as usize, inverse: w[0] < 0 });
        }
    }
    Some(AutLetter::Substitution { images: words.to_vec() })
}
