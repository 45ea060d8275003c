//! Simultaneous folding of a rose into a graph, its inverse, and the linear
//! length formulas on a combinatorial type.

use crate::decompose::{common_prefix_suffix, LoopDecomposition};
use crate::error::{OslError, Result};
use crate::graphs::automorphism::{invert_images, substitute, FreeWord};
use crate::graphs::fold::FoldKind;
use crate::graphs::graph::{edge_of, flip_in_path, invert_path, is_positive_half, neg, pos, Graph, HalfEdge, Path, Turn};
use crate::graphs::iso::match_along_paths;
use crate::graphs::map::GraphMap;
use crate::graphs::point::{letter_from_images, Marking, Point};
use crate::numeric::{format_rational, Q};
use num::{Signed, Zero};
use std::collections::VecDeque;

/// Integer coefficients over the parameters `(ℓ(x₀)_1, …, ℓ(x₀)_r, s_1, …, s_K)`.
pub type LinearForm = Vec<i64>;

/// The `r(r−1)` turns of the rose: positive pairs `{+i, +j}` for `i < j` in
/// lexicographic order, then the negative pairs `{−i, −j}` in the same order.
pub fn rose_turns(r: usize) -> Vec<Turn> {
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    let positive = pairs.iter().map(|&(i, j)| Turn::new(pos(i), pos(j)));
    let negative = pairs.iter().map(|&(i, j)| Turn::new(neg(i), neg(j)));
    positive.chain(negative).collect()
}

/// `(i, j, negative)` of the `k`-th rose turn.
pub fn turn_petals(r: usize, k: usize) -> (usize, usize, bool) {
    let t = rose_turns(r)[k];
    (edge_of(t.a), edge_of(t.b), !is_positive_half(t.a))
}

#[derive(Clone, Debug)]
pub struct FoldRecord {
    /// Index of the rose turn being folded.
    pub turn: usize,
    pub start: Point,
    /// `(long, short)` for proper full folds, `(keep, drop)` for full ones.
    pub a: HalfEdge,
    pub b: HalfEdge,
    pub kind: FoldKind,
    pub t_start: Q,
    pub amount: Q,
    pub after: Point,
}

#[derive(Clone, Debug)]
pub struct RoseToGraphLine {
    /// Initial rose, with its marking normalized so petal `i` is edge `i`.
    pub x0: Point,
    pub s: Vec<Q>,
    pub records: Vec<FoldRecord>,
    /// Endpoint after erasing valence-2 vertices; its marking petals are the
    /// images of the petals of `x0`.
    pub endpoint: Point,
    /// Endpoint edge lengths as linear forms in `(ℓ(x₀), s)`.
    pub forms: Vec<LinearForm>,
}

fn unit(dim: usize, k: usize) -> LinearForm {
    let mut f = vec![0; dim];
    f[k] = 1;
    f
}

fn sub_form(a: &LinearForm, b: &LinearForm) -> LinearForm {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_form(a: &LinearForm, b: &LinearForm) -> LinearForm {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn eval_form(f: &LinearForm, params: &[Q]) -> Q {
    f.iter().zip(params).fold(Q::zero(), |acc, (&c, p)| acc + p * Q::from_integer(c.into()))
}

struct State {
    point: Point,
    forms: Vec<LinearForm>,
}

impl State {
    fn apply(&mut self, kind: FoldKind, a: HalfEdge, b: HalfEdge, amount: &Q, amount_form: &LinearForm) -> Result<GraphMap> {
        let (next, map) = match kind {
            FoldKind::ProperFull => self.point.fold_proper_full(a, b)?,
            FoldKind::Full => self.point.fold_identify(a, b)?,
            FoldKind::Partial => self.point.fold_partial(a, b, amount)?,
        };
        match kind {
            FoldKind::ProperFull => {
                let short = self.forms[edge_of(b)].clone();
                self.forms[edge_of(a)] = sub_form(&self.forms[edge_of(a)], &short);
            }
            FoldKind::Full => {
                self.forms.remove(edge_of(b));
            }
            FoldKind::Partial => {
                for h in [a, b] {
                    self.forms[edge_of(h)] = sub_form(&self.forms[edge_of(h)], amount_form);
                }
                self.forms.push(amount_form.clone());
            }
        }
        self.point = next;
        Ok(map)
    }
}

/// Folds initial segments of length `s_k` of the images of the two petals of
/// each rose turn, turn by turn, then erases valence-2 vertices.
pub fn rose_to_graph(x0: &Point, s: &[Q]) -> Result<RoseToGraphLine> {
    if !x0.graph.is_rose() {
        return Err(OslError::InvalidGraph("initial point is not a rose".into()));
    }
    let r = x0.rank();
    let turns = rose_turns(r);
    if s.len() != turns.len() {
        return Err(OslError::DimensionMismatch { expected: turns.len(), found: s.len() });
    }
    for (k, sk) in s.iter().enumerate() {
        let (i, j, _) = turn_petals(r, k);
        let bound = x0.lengths[i].clone().min(x0.lengths[j].clone());
        if sk.is_negative() || *sk > bound {
            return Err(OslError::BoundViolated { turn: k, amount: format_rational(sk), bound: format_rational(&bound) });
        }
    }
    let mut start = x0.clone();
    start.normalize_rose_marking();
    let dim = r + turns.len();
    let mut state = State { point: start.clone(), forms: (0..r).map(|i| unit(dim, i)).collect() };
    let mut records = Vec::new();
    let mut clock = Q::zero();
    for (k, sk) in s.iter().enumerate() {
        let (i, j, negative) = turn_petals(r, k);
        let s_form = unit(dim, r + k);
        loop {
            let read = |p: &Path| if negative { invert_path(p) } else { p.clone() };
            let p1 = read(&state.point.marking.petals[i]);
            let p2 = read(&state.point.marking.petals[j]);
            let c = p1.iter().zip(&p2).take_while(|(x, y)| x == y).count();
            let common: Q = state.point.path_length(&p1[..c]);
            let common_form = p1[..c].iter().fold(vec![0; dim], |acc, &h| add_form(&acc, &state.forms[edge_of(h)]));
            let remaining = sk - &common;
            if !remaining.is_positive() {
                break;
            }
            if c == p1.len() || c == p2.len() {
                return Err(OslError::NotAPath);
            }
            let (h1, h2) = (p1[c], p2[c]);
            let (l1, l2) = (state.point.length(h1).clone(), state.point.length(h2).clone());
            let remaining_form = sub_form(&s_form, &common_form);
            let (kind, a, b, amount, amount_form) = if remaining >= l1 && l1 == l2 {
                (FoldKind::Full, h1, h2, l1, state.forms[edge_of(h1)].clone())
            } else if remaining >= l1 && l1 < l2 {
                (FoldKind::ProperFull, h2, h1, l1, state.forms[edge_of(h1)].clone())
            } else if remaining >= l2 && l2 < l1 {
                (FoldKind::ProperFull, h1, h2, l2, state.forms[edge_of(h2)].clone())
            } else {
                (FoldKind::Partial, h1, h2, remaining, remaining_form)
            };
            let before = state.point.clone();
            state.apply(kind, a, b, &amount, &amount_form)?;
            records.push(FoldRecord {
                turn: k,
                start: before,
                a,
                b,
                kind,
                t_start: &clock + &common,
                amount,
                after: state.point.clone(),
            });
        }
        clock += sk;
    }
    let unsub = state.point.unsubdivide(&[])?;
    let forms = unsub
        .edge_paths
        .iter()
        .map(|p| p.iter().fold(vec![0; dim], |acc, &h| add_form(&acc, &state.forms[edge_of(h)])))
        .collect();
    if unsub.point.graph.rank() != r {
        return Err(OslError::NotAPath);
    }
    Ok(RoseToGraphLine { x0: start, s: s.to_vec(), records, endpoint: unsub.point, forms })
}

impl RoseToGraphLine {
    pub fn extent(&self) -> Q {
        crate::numeric::sum(&self.s)
    }

    /// Parameter vector `(ℓ(x₀), s)`.
    pub fn params(&self) -> Vec<Q> {
        self.x0.lengths.iter().chain(&self.s).cloned().collect()
    }

    /// The point at time `t ∈ [0, Σ s]`, valence-2 vertices erased.
    pub fn eval(&self, t: &Q) -> Result<Point> {
        if t.is_negative() || *t > self.extent() {
            return Err(OslError::TimeOutOfRange(format_rational(t)));
        }
        let mut current = self.x0.clone();
        for rec in &self.records {
            if rec.t_start >= *t {
                break;
            }
            let tau = t - &rec.t_start;
            if tau >= rec.amount {
                current = rec.after.clone();
                continue;
            }
            let (p, _) = rec.start.fold_partial(rec.a, rec.b, &tau)?;
            current = p;
            break;
        }
        Ok(current.unsubdivide(&[])?.point)
    }

    /// Unprojectivized volume at time `t`: the initial volume minus the
    /// length folded so far.
    pub fn volume_at(&self, t: &Q) -> Result<Q> {
        Ok(self.eval(t)?.volume())
    }
}

/// Rose data `(x₀, s)` whose simultaneous fold ends at `x`, read off a loop
/// decomposition of the graph of `x`.
#[derive(Clone, Debug)]
pub struct RoseRecovery {
    pub x0: Point,
    pub s: Vec<Q>,
    /// `x` with its edges reoriented as in the decomposition and its marking
    /// rewritten with the loops as petal images.
    pub top: Point,
}

/// Reorients `x` to the orientation of `d` (edges flagged in `d.flipped`).
pub fn reorient(x: &Point, d: &LoopDecomposition) -> Result<Point> {
    let mut out = x.clone();
    for (e, &f) in d.flipped.iter().enumerate() {
        if f {
            out.graph.flip_edge(e);
            out.marking.petals = out.marking.petals.iter().map(|p| flip_in_path(p, e)).collect();
        }
    }
    if out.graph != d.graph {
        return Err(OslError::DecompositionFailed("decomposition does not belong to this graph".into()));
    }
    Ok(out)
}

/// Words of closed paths at `base` in the free basis given by the non-tree
/// edges of a breadth-first spanning tree.
fn tree_coordinates(g: &Graph, base: usize, paths: &[Path]) -> Vec<FreeWord> {
    let mut in_tree = vec![false; g.num_edges()];
    let mut seen = vec![false; g.vertices];
    seen[base] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for h in g.half_edges_at(v) {
            let w = g.terminus(h);
            if !seen[w] {
                seen[w] = true;
                in_tree[edge_of(h)] = true;
                queue.push_back(w);
            }
        }
    }
    let index: Vec<Option<i32>> = {
        let mut k = 0;
        (0..g.num_edges())
            .map(|e| {
                if in_tree[e] {
                    None
                } else {
                    k += 1;
                    Some(k)
                }
            })
            .collect()
    };
    paths
        .iter()
        .map(|p| {
            let w: FreeWord = p
                .iter()
                .filter_map(|&h| index[edge_of(h)].map(|l| if is_positive_half(h) { l } else { -l }))
                .collect();
            crate::graphs::automorphism::reduce(&w)
        })
        .collect()
}

/// Words of the marking loops of `x` in terms of the loops of `d`.
pub fn marking_in_loops(x: &Point, loops: &[Path], base: usize) -> Result<Vec<FreeWord>> {
    let alpha = tree_coordinates(&x.graph, base, loops);
    let beta = invert_images(&alpha, loops.len()).map_err(|_| OslError::DecompositionFailed("loops are not a free basis".into()))?;
    let petals = tree_coordinates(&x.graph, base, &x.marking.petals);
    Ok(petals.iter().map(|w| substitute(w, &beta)).collect())
}

pub fn recover_rose(x: &Point, d: &LoopDecomposition) -> Result<RoseRecovery> {
    let top = reorient(x, d)?;
    let r = d.loops.len();
    if r != x.rank() {
        return Err(OslError::DecompositionFailed("number of loops differs from the rank".into()));
    }
    let lengths: Vec<Q> = d.loops.iter().map(|l| top.path_length(l)).collect();
    let s: Vec<Q> = (0..r * (r - 1))
        .map(|k| {
            let (i, j, negative) = turn_petals(r, k);
            let (a, b) = (&d.loops[i], &d.loops[j]);
            let (cp, cs) = common_prefix_suffix(a, b);
            if negative {
                top.path_length(&a[a.len() - cs..])
            } else {
                top.path_length(&a[..cp])
            }
        })
        .collect();
    let words = marking_in_loops(&top, &d.loops, d.base)?;
    let mut word = top.marking.word.clone();
    if let Some(letter) = letter_from_images(&words, r) {
        word.push(letter);
    }
    let x0 = Point::new(Graph::rose(r), lengths, Marking { word: word.clone(), base: 0, petals: (0..r).map(|e| vec![pos(e)]).collect() })?;
    let top = Point { marking: Marking { word, base: d.base, petals: d.loops.clone() }, ..top };
    Ok(RoseRecovery { x0, s, top })
}

/// Edge map from the endpoint of `line` onto `top`, matching the petal images
/// with the petal loops of `top`.
pub fn endpoint_matching(line: &RoseToGraphLine, top: &Point) -> Option<Vec<HalfEdge>> {
    let end = &line.endpoint;
    match_along_paths(&end.graph, &end.marking.petals, &top.graph, &top.marking.petals)
}

/// True iff the endpoint of `line` is `top` up to relabelling, with exactly
/// equal edge lengths.
pub fn endpoint_equals(line: &RoseToGraphLine, top: &Point) -> bool {
    match endpoint_matching(line, top) {
        Some(m) => m.iter().enumerate().all(|(e, &h)| line.endpoint.lengths[e] == top.lengths[edge_of(h)]),
        None => false,
    }
}

/// Linear length formulas of one combinatorial type.
#[derive(Clone, Debug)]
pub struct TypeForms {
    pub decomposition: LoopDecomposition,
    /// Per edge of the decomposed graph, a form in `(ℓ(x₀), s)`.
    pub forms: Vec<LinearForm>,
}

impl TypeForms {
    pub fn new(d: &LoopDecomposition) -> Result<TypeForms> {
        let g = &d.graph;
        let unit_point = Point::new(
            g.clone(),
            vec![Q::from_integer(1.into()); g.num_edges()],
            Marking { word: crate::graphs::automorphism::AutomorphismWord::identity(d.loops.len()), base: d.base, petals: d.loops.clone() },
        )?;
        let rec = recover_rose(&unit_point, &identity_orientation(d))?;
        let line = rose_to_graph(&rec.x0, &rec.s)?;
        let m = endpoint_matching(&line, &rec.top)
            .ok_or_else(|| OslError::DecompositionFailed("simultaneous fold does not reproduce the graph".into()))?;
        let mut forms = vec![Vec::new(); g.num_edges()];
        for (e, &h) in m.iter().enumerate() {
            forms[edge_of(h)] = line.forms[e].clone();
        }
        Ok(TypeForms { decomposition: d.clone(), forms })
    }

    /// Index of the first edge whose form is not positive at `params`.
    pub fn region_violation(&self, params: &[Q]) -> Option<(usize, Q)> {
        self.forms.iter().enumerate().find_map(|(e, f)| {
            let v = eval_form(f, params);
            (!v.is_positive()).then_some((e, v))
        })
    }

    pub fn in_region(&self, params: &[Q]) -> bool {
        self.region_violation(params).is_none()
    }
}

/// `d` for a graph that is already oriented as `d.graph`.
pub fn identity_orientation(d: &LoopDecomposition) -> LoopDecomposition {
    LoopDecomposition { flipped: vec![false; d.graph.num_edges()], ..d.clone() }
}

/// Edge lengths of the decomposed graph for rose lengths `x0` and fold amounts `s`.
pub fn lengths_from_params(forms: &TypeForms, x0: &[Q], s: &[Q]) -> Result<Vec<Q>> {
    let params: Vec<Q> = x0.iter().chain(s).cloned().collect();
    let dim = forms.forms.first().map_or(0, Vec::len);
    if params.len() != dim {
        return Err(OslError::DimensionMismatch { expected: dim, found: params.len() });
    }
    if let Some((edge, value)) = forms.region_violation(&params) {
        return Err(OslError::SimplexExit { edge, value: format_rational(&value) });
    }
    Ok(forms.forms.iter().map(|f| eval_form(f, &params)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::loop_decomposition;
    use crate::numeric::q;

    fn theta_line() -> RoseToGraphLine {
        let x0 = Point::rose(vec![q(1, 1), q(4, 5)]).unwrap();
        rose_to_graph(&x0, &[q(3, 10), q(0, 1)]).unwrap()
    }

    #[test]
    fn zero_amounts_fix_the_rose() {
        let x0 = Point::rose(vec![q(1, 1), q(4, 5)]).unwrap();
        let line = rose_to_graph(&x0, &[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(line.endpoint, x0);
    }

    #[test]
    fn theta_example() {
        let line = theta_line();
        assert_eq!(line.endpoint.graph.num_edges(), 3);
        let mut ls = line.endpoint.lengths.clone();
        ls.sort();
        assert_eq!(ls, vec![q(3, 10), q(1, 2), q(7, 10)]);
        assert_eq!(line.endpoint.volume(), q(9, 5) - q(3, 10));
        assert_eq!(line.eval(&q(1, 10)).unwrap().volume(), q(9, 5) - q(1, 10));
    }

    #[test]
    fn bound_is_enforced() {
        let x0 = Point::rose(vec![q(1, 1), q(4, 5)]).unwrap();
        assert!(matches!(rose_to_graph(&x0, &[q(9, 10), q(0, 1)]), Err(OslError::BoundViolated { .. })));
    }

    #[test]
    fn theta_recovery() {
        let line = theta_line();
        let x = &line.endpoint;
        let d = loop_decomposition(&x.graph, &Turn::new(neg(0), neg(1))).unwrap();
        let rec = recover_rose(x, &d).unwrap();
        let mut l0 = rec.x0.lengths.clone();
        l0.sort();
        assert_eq!(l0, vec![q(4, 5), q(1, 1)]);
        assert_eq!(rec.s.iter().filter(|v| !v.is_zero()).cloned().collect::<Vec<_>>(), vec![q(3, 10)]);
        let again = rose_to_graph(&rec.x0, &rec.s).unwrap();
        assert!(endpoint_equals(&again, &rec.top));
    }

    #[test]
    fn theta_forms() {
        let line = theta_line();
        let d = loop_decomposition(&line.endpoint.graph, &Turn::new(neg(0), neg(1))).unwrap();
        let forms = TypeForms::new(&d).unwrap();
        let rec = recover_rose(&line.endpoint, &d).unwrap();
        let lengths = lengths_from_params(&forms, &rec.x0.lengths, &rec.s).unwrap();
        assert_eq!(lengths, rec.top.lengths);
        let boundary: Vec<Q> = vec![rec.x0.lengths[0].clone(), rec.x0.lengths[1].clone()];
        let mut s = rec.s.clone();
        let k = s.iter().position(|v| !v.is_zero()).unwrap();
        s[k] = boundary[0].clone().min(boundary[1].clone());
        assert!(matches!(lengths_from_params(&forms, &boundary, &s), Err(OslError::SimplexExit { .. })));
    }
}
