//! Good rooted spanning trees and decompositions of trivalent graphs into
//! positive embedded loops through a base vertex.

use crate::error::{OslError, Result};
use crate::graphs::graph::{edge_of, neg, pos, rev, Graph, HalfEdge, Path, Turn};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub root: usize,
    pub edges: Vec<usize>,
    /// `(parent vertex, tree edge)` for every vertex but the root.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
}

impl RootedTree {
    /// Builds parent links from a spanning edge set.
    pub fn from_edges(g: &Graph, root: usize, edges: &[usize]) -> Result<RootedTree> {
        let mut in_tree = vec![false; g.num_edges()];
        for &e in edges {
            in_tree[e] = true;
        }
        let mut parent = vec![None; g.vertices];
        let mut depth = vec![usize::MAX; g.vertices];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for h in g.half_edges_at(v) {
                let e = edge_of(h);
                if !in_tree[e] {
                    continue;
                }
                let w = g.terminus(h);
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        if depth.contains(&usize::MAX) || edges.len() + 1 != g.vertices {
            return Err(OslError::InvalidGraph("edge set is not a spanning tree".into()));
        }
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        Ok(RootedTree { root, edges: sorted, parent, depth })
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// `a ≤_T b`: `a` lies on the tree path from the root to `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        loop {
            if x == a {
                return true;
            }
            match self.parent[x] {
                Some((p, _)) => x = p,
                None => return false,
            }
        }
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        let (mut x, mut y) = (a, b);
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap().0;
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap().0;
        }
        while x != y {
            x = self.parent[x].unwrap().0;
            y = self.parent[y].unwrap().0;
        }
        x
    }

    /// Tree edges on the path from `v` up to its ancestor `a`, starting at `v`.
    pub fn edges_up_to(&self, v: usize, a: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut x = v;
        while x != a {
            let (p, e) = self.parent[x].expect("a is an ancestor of v");
            out.push(e);
            x = p;
        }
        out
    }

    pub fn root_degree(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some_and(|(v, _)| v == self.root)).count()
    }

    /// Endpoint of `e` nearer the root, and the farther one.
    pub fn lower_upper(&self, g: &Graph, e: usize) -> (usize, usize) {
        let (a, b) = g.edges[e];
        if self.depth[a] <= self.depth[b] {
            (a, b)
        } else {
            (b, a)
        }
    }
}

fn is_bad(g: &Graph, t: &RootedTree, e: usize) -> Option<usize> {
    let (v, w) = g.edges[e];
    let q = t.lca(v, w);
    if q != v && q != w {
        Some(t.depth[q])
    } else {
        None
    }
}

/// Edges whose endpoints are incomparable in the tree order.
pub fn bad_edge_count(g: &Graph, t: &RootedTree) -> usize {
    (0..g.num_edges()).filter(|&e| is_bad(g, t, e).is_some()).count()
}

/// `(n(T), m(T))`; `None` stands for a good tree.
fn complexity(g: &Graph, t: &RootedTree) -> Option<(i64, usize)> {
    let ds: Vec<usize> = (0..g.num_edges()).filter_map(|e| is_bad(g, t, e)).collect();
    let min = *ds.iter().min()?;
    Some((-(min as i64), ds.iter().filter(|&&d| d == min).count()))
}

#[derive(Clone, Debug)]
pub struct GoodTree {
    pub tree: RootedTree,
    /// Complexity before each swap.
    pub descent: Vec<(i64, usize)>,
}

/// Rooted spanning tree with no bad edges, containing `e` and rooted at the
/// endpoint `root` of `e`. The initial tree is `e` plus a search tree of
/// `G − root`, so the root has tree degree one when that graph is connected.
pub fn good_spanning_tree(g: &Graph, e: usize, root: usize) -> Result<GoodTree> {
    if e >= g.num_edges() || (g.edges[e].0 != root && g.edges[e].1 != root) {
        return Err(OslError::InvalidGraph(format!("vertex {root} is not an endpoint of edge {e}")));
    }
    if g.is_loop_edge(e) {
        return Err(OslError::LoopEdge(e));
    }
    if !g.is_connected() {
        return Err(OslError::Disconnected);
    }
    let v1 = if g.edges[e].0 == root { g.edges[e].1 } else { g.edges[e].0 };
    let mut edges = vec![e];
    let mut seen = vec![false; g.vertices];
    seen[root] = true;
    let grow = |start: usize, seen: &mut Vec<bool>, edges: &mut Vec<usize>| {
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for h in g.half_edges_at(v) {
                let w = g.terminus(h);
                if !seen[w] {
                    seen[w] = true;
                    edges.push(edge_of(h));
                    queue.push_back(w);
                }
            }
        }
    };
    grow(v1, &mut seen, &mut edges);
    while let Some(h) = g.half_edges_at(root).into_iter().find(|&h| !seen[g.terminus(h)]) {
        edges.push(edge_of(h));
        grow(g.terminus(h), &mut seen, &mut edges);
    }
    let mut tree = RootedTree::from_edges(g, root, &edges)?;
    let mut descent = Vec::new();
    let cap = g.num_edges() * g.vertices + 1;
    while let Some(c) = complexity(g, &tree) {
        if descent.len() > cap {
            return Err(OslError::DecompositionFailed("tree descent did not terminate".into()));
        }
        descent.push(c);
        let (_, bad) = (0..g.num_edges())
            .filter_map(|f| is_bad(g, &tree, f).map(|d| (d, f)))
            .min()
            .expect("a bad edge exists");
        let (a, b) = g.edges[bad];
        let q = tree.lca(a, b);
        let mut next = None;
        for v in [a, b] {
            let path = tree.edges_up_to(v, q);
            let e2 = *path.last().expect("v differs from q");
            if e2 == e {
                continue;
            }
            let mut swapped: Vec<usize> = tree.edges.iter().copied().filter(|&f| f != e2).collect();
            swapped.push(bad);
            let candidate = RootedTree::from_edges(g, root, &swapped)?;
            let better = match complexity(g, &candidate) {
                None => true,
                Some(c2) => c2 < c,
            };
            if better {
                next = Some(candidate);
                break;
            }
        }
        tree = next.ok_or_else(|| OslError::DecompositionFailed("tree swap did not lower the complexity".into()))?;
    }
    Ok(GoodTree { tree, descent })
}

/// Non-tree edges other than `skip`, by depth of the lower endpoint then id.
pub fn ordered_non_tree_edges(g: &Graph, t: &RootedTree, skip: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..g.num_edges()).filter(|&e| e != skip && !t.contains_edge(e)).collect();
    out.sort_by_key(|&e| (t.depth[t.lower_upper(g, e).0], e));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopDecomposition {
    /// Host graph, reoriented so that every loop is positive.
    pub graph: Graph,
    pub base: usize,
    /// The turn `{E, E'}` at the base, as directions leaving it.
    pub turn: Turn,
    /// Loops as positive half-edge paths starting at the base.
    pub loops: Vec<Path>,
    /// `true` where an edge was reversed relative to the input graph.
    pub flipped: Vec<bool>,
}

struct Search<'a> {
    g: &'a Graph,
    v0: usize,
    dir: Vec<Option<HalfEdge>>,
    in_s: Vec<bool>,
    loops: Vec<Path>,
    preferred: Vec<usize>,
    budget: usize,
}

const EAR_CANDIDATE_CAP: usize = 4000;
const SEARCH_BUDGET: usize = 200_000;

impl Search<'_> {
    fn oriented_count(&self) -> usize {
        self.dir.iter().filter(|d| d.is_some()).count()
    }

    fn apply(&mut self, cycle: &[HalfEdge]) -> Vec<usize> {
        let mut added = Vec::new();
        for &h in cycle {
            let e = edge_of(h);
            if self.dir[e].is_none() {
                self.dir[e] = Some(h);
                added.push(e);
            }
            let v = self.g.origin(h);
            self.in_s[v] = true;
        }
        self.loops.push(rotate_to(self.g, cycle, self.v0));
        added
    }

    fn undo(&mut self, added: &[usize]) {
        self.loops.pop();
        for &e in added {
            self.dir[e] = None;
        }
        self.in_s = vec![false; self.g.vertices];
        for l in &self.loops {
            for &h in l {
                self.in_s[self.g.origin(h)] = true;
            }
        }
    }

    /// Directed embedded paths in the oriented subgraph from `a` to `b` through `v0`.
    fn arcs(&self, a: usize, b: usize) -> Vec<Path> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.g.vertices];
        let mut path = Vec::new();
        visited[a] = true;
        self.arc_dfs(a, b, a == self.v0, &mut visited, &mut path, &mut out);
        out
    }

    fn arc_dfs(&self, u: usize, b: usize, through: bool, visited: &mut [bool], path: &mut Path, out: &mut Vec<Path>) {
        if out.len() > EAR_CANDIDATE_CAP {
            return;
        }
        if u == b {
            if through {
                out.push(path.clone());
            }
            return;
        }
        for h in self.g.half_edges_at(u) {
            if self.dir[edge_of(h)] != Some(h) {
                continue;
            }
            let w = self.g.terminus(h);
            if visited[w] {
                continue;
            }
            visited[w] = true;
            path.push(h);
            self.arc_dfs(w, b, through || w == self.v0, visited, path, out);
            path.pop();
            visited[w] = false;
        }
    }

    /// Paths of unoriented edges from `b ∈ S` to `a ∈ S`, `a ≠ b`, with interior outside `S`.
    fn ears(&self) -> Vec<(usize, usize, Path)> {
        let mut out = Vec::new();
        for b in 0..self.g.vertices {
            if !self.in_s[b] || b == self.v0 {
                continue;
            }
            for h in self.g.half_edges_at(b) {
                if self.dir[edge_of(h)].is_some() {
                    continue;
                }
                let mut visited = vec![false; self.g.vertices];
                visited[b] = true;
                let mut path = vec![h];
                self.ear_dfs(b, h, &mut visited, &mut path, &mut out);
            }
        }
        out
    }

    fn ear_dfs(&self, b: usize, last: HalfEdge, visited: &mut [bool], path: &mut Path, out: &mut Vec<(usize, usize, Path)>) {
        if out.len() > EAR_CANDIDATE_CAP {
            return;
        }
        let u = self.g.terminus(last);
        if self.in_s[u] {
            if u != b {
                out.push((b, u, path.clone()));
            }
            return;
        }
        if visited[u] {
            return;
        }
        visited[u] = true;
        for h in self.g.half_edges_at(u) {
            if h == rev(last) || self.dir[edge_of(h)].is_some() || path.iter().any(|&x| edge_of(x) == edge_of(h)) {
                continue;
            }
            path.push(h);
            self.ear_dfs(b, h, visited, path, out);
            path.pop();
        }
        visited[u] = false;
    }

    fn candidates(&self) -> Vec<Path> {
        let next = self.preferred.iter().copied().find(|&e| self.dir[e].is_none());
        let mut scored: Vec<((usize, usize, usize, Vec<usize>), Path)> = Vec::new();
        for (b, a, q) in self.ears() {
            let q_edges: Vec<usize> = q.iter().map(|&h| edge_of(h)).collect();
            let has_next = next.is_some_and(|e| q_edges.contains(&e));
            let non_tree = q_edges.iter().filter(|e| self.preferred.contains(e)).count();
            for arc in self.arcs(a, b) {
                let mut cycle = arc.clone();
                cycle.extend_from_slice(&q);
                let key = (usize::from(!has_next), non_tree, cycle.len(), cycle.clone());
                scored.push((key, cycle));
            }
        }
        scored.sort();
        scored.into_iter().map(|(_, c)| c).collect()
    }

    fn run(&mut self) -> bool {
        if self.oriented_count() == self.g.num_edges() {
            return realizable_by_prefixes(self.g, &self.loops);
        }
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        for cycle in self.candidates() {
            let added = self.apply(&cycle);
            if self.run() {
                return true;
            }
            self.undo(&added);
            if self.budget == 0 {
                return false;
            }
        }
        false
    }
}

fn rotate_to(g: &Graph, cycle: &[HalfEdge], v: usize) -> Path {
    let k = cycle.iter().position(|&h| g.origin(h) == v).unwrap_or(0);
    let mut out = cycle[k..].to_vec();
    out.extend_from_slice(&cycle[..k]);
    out
}

/// Orientation and positive embedded loops `α_1, …, α_r` based at the common
/// vertex of the turn, with each loop meeting the earlier ones in a connected
/// arc through the base and both turn edges pointing into the base.
pub fn loop_decomposition(g: &Graph, turn: &Turn) -> Result<LoopDecomposition> {
    g.check_turn(turn)?;
    if !g.is_connected() {
        return Err(OslError::Disconnected);
    }
    if g.is_rose() {
        return Ok(LoopDecomposition {
            graph: g.clone(),
            base: 0,
            turn: *turn,
            loops: (0..g.num_edges()).map(|e| vec![pos(e)]).collect(),
            flipped: vec![false; g.num_edges()],
        });
    }
    if let Some(e) = (0..g.num_edges()).find(|&e| g.is_loop_edge(e)) {
        return Err(OslError::LoopEdge(e));
    }
    if !g.is_trivalent() {
        return Err(OslError::NotTrivalent);
    }
    if g.has_separating_edge() {
        return Err(OslError::SeparatingEdge);
    }
    let v0 = g.origin(turn.a);
    let big_e = edge_of(turn.a);
    let big_e2 = edge_of(turn.b);
    let h1 = g.half_edges_at(v0).into_iter().find(|&h| h != turn.a && h != turn.b).expect("trivalent base");
    let e1 = edge_of(h1);
    let good = good_spanning_tree(g, big_e, v0)?;
    let tree = good.tree;
    let preferred = ordered_non_tree_edges(g, &tree, e1);

    // α_1: e_1 followed by the tree path back to the base (it enters through E).
    let mut first_loops: Vec<Path> = Vec::new();
    let t1 = g.terminus(h1);
    let mut tree_path = Vec::new();
    let mut x = t1;
    while x != v0 {
        let (p, e) = tree.parent[x].expect("tree path to root");
        let h = if g.origin(pos(e)) == x { pos(e) } else { neg(e) };
        tree_path.push(h);
        x = p;
    }
    first_loops.push([vec![h1], tree_path].concat());

    let mut search = Search {
        g,
        v0,
        dir: vec![None; g.num_edges()],
        in_s: vec![false; g.vertices],
        loops: Vec::new(),
        preferred,
        budget: SEARCH_BUDGET,
    };
    // Alternatives for α_1 if the tree loop admits no completion.
    for alt in all_loops_through(g, h1, big_e, big_e2) {
        if !first_loops.contains(&alt) {
            first_loops.push(alt);
        }
    }
    for alpha1 in first_loops {
        let added = search.apply(&alpha1);
        if search.run() {
            return finish(g, v0, turn, &search);
        }
        search.undo(&added);
        search.budget = SEARCH_BUDGET;
    }
    Err(OslError::DecompositionFailed("no admissible sequence of loops found".into()))
}

/// Embedded loops starting with `h1` and returning to its origin along `e`, avoiding `avoid`.
fn all_loops_through(g: &Graph, h1: HalfEdge, e: usize, avoid: usize) -> Vec<Path> {
    let v0 = g.origin(h1);
    let mut out = Vec::new();
    let mut visited = vec![false; g.vertices];
    visited[v0] = true;
    fn dfs(g: &Graph, u: usize, v0: usize, e: usize, avoid: usize, visited: &mut [bool], path: &mut Path, out: &mut Vec<Path>) {
        if out.len() > EAR_CANDIDATE_CAP {
            return;
        }
        for h in g.half_edges_at(u) {
            let f = edge_of(h);
            if f == avoid || path.iter().any(|&x| edge_of(x) == f) {
                continue;
            }
            let w = g.terminus(h);
            if w == v0 {
                if f == e {
                    path.push(h);
                    out.push(path.clone());
                    path.pop();
                }
                continue;
            }
            if visited[w] {
                continue;
            }
            visited[w] = true;
            path.push(h);
            dfs(g, w, v0, e, avoid, visited, path, out);
            path.pop();
            visited[w] = false;
        }
    }
    let t = g.terminus(h1);
    visited[t] = true;
    let mut path = vec![h1];
    dfs(g, t, v0, e, avoid, &mut visited, &mut path, &mut out);
    out.sort_by_key(|p| p.len());
    out
}

fn finish(g: &Graph, v0: usize, turn: &Turn, s: &Search) -> Result<LoopDecomposition> {
    let mut graph = g.clone();
    let mut flipped = vec![false; g.num_edges()];
    for e in 0..g.num_edges() {
        let h = s.dir[e].expect("all edges oriented");
        if h % 2 == 1 {
            graph.flip_edge(e);
            flipped[e] = true;
        }
    }
    let loops = s.loops.iter().map(|l| l.iter().map(|&h| pos(edge_of(h))).collect()).collect();
    let new_turn = Turn::new(neg(edge_of(turn.a)), neg(edge_of(turn.b)));
    let d = LoopDecomposition { graph, base: v0, turn: new_turn, loops, flipped };
    if !verify_decomposition(&d) {
        return Err(OslError::DecompositionFailed("constructed loops failed verification".into()));
    }
    Ok(d)
}

/// Checks positivity, embeddedness, coverage, the connected-arc condition
/// and that both turn edges end at the base.
pub fn verify_decomposition(d: &LoopDecomposition) -> bool {
    let g = &d.graph;
    if d.base >= g.vertices || d.loops.len() != g.rank() {
        return false;
    }
    let mut covered = vec![false; g.num_edges()];
    let mut in_union_v = vec![false; g.vertices];
    for (i, l) in d.loops.iter().enumerate() {
        if l.is_empty() || !g.is_embedded_loop(l) || !l.iter().all(|&h| h % 2 == 0) {
            return false;
        }
        if !l.iter().any(|&h| g.origin(h) == d.base) {
            return false;
        }
        if i > 0 {
            // cyclic sequence vertex_0, edge_0, vertex_1, edge_1, ...
            let items: Vec<bool> = l
                .iter()
                .flat_map(|&h| [in_union_v[g.origin(h)], covered[edge_of(h)]])
                .collect();
            if !is_single_cyclic_run(&items) {
                return false;
            }
            if !in_union_v[d.base] {
                return false;
            }
        }
        for &h in l {
            covered[edge_of(h)] = true;
            in_union_v[g.origin(h)] = true;
        }
    }
    if !covered.iter().all(|&c| c) {
        return false;
    }
    if !realizable_by_prefixes(g, &d.loops) {
        return false;
    }
    if g.is_rose() {
        return true;
    }
    if g.check_turn(&d.turn).is_err() || g.origin(d.turn.a) != d.base {
        return false;
    }
    g.terminus(pos(edge_of(d.turn.a))) == d.base && g.terminus(pos(edge_of(d.turn.b))) == d.base
}

/// Common initial and terminal edge counts of two loops based at one vertex.
pub fn common_prefix_suffix(a: &[HalfEdge], b: &[HalfEdge]) -> (usize, usize) {
    let cp = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let cs = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let cap = a.len().min(b.len());
    (cp.min(cap), cs.min(cap - cp.min(cap)))
}

/// Identifying common prefixes and common suffixes of every pair of loops
/// generates the identification of the wedge of loops onto the graph: all
/// occurrences of each edge end up in one class.
pub fn realizable_by_prefixes(g: &Graph, loops: &[Path]) -> bool {
    let offsets: Vec<usize> = loops.iter().scan(0, |acc, l| {
        let o = *acc;
        *acc += l.len();
        Some(o)
    }).collect();
    let total: usize = loops.iter().map(Vec::len).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        parent[ra] = rb;
    };
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            let (a, b) = (&loops[i], &loops[j]);
            let (cp, cs) = common_prefix_suffix(a, b);
            for k in 0..cp {
                union(&mut parent, offsets[i] + k, offsets[j] + k);
            }
            for t in 0..cs {
                union(&mut parent, offsets[i] + a.len() - 1 - t, offsets[j] + b.len() - 1 - t);
            }
        }
    }
    let mut class_of_edge: Vec<Option<usize>> = vec![None; g.num_edges()];
    for (i, l) in loops.iter().enumerate() {
        for (k, &h) in l.iter().enumerate() {
            let c = find(&mut parent, offsets[i] + k);
            match class_of_edge[edge_of(h)] {
                None => class_of_edge[edge_of(h)] = Some(c),
                Some(c0) if find(&mut parent, c0) == c => {}
                Some(_) => return false,
            }
        }
    }
    true
}

/// True iff the `true` entries form one nonempty proper contiguous cyclic run.
fn is_single_cyclic_run(items: &[bool]) -> bool {
    let n = items.len();
    let count = items.iter().filter(|&&b| b).count();
    if count == 0 || count == n {
        return false;
    }
    let starts = (0..n).filter(|&k| items[k] && !items[(k + n - 1) % n]).count();
    starts == 1
}
