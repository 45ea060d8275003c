//! Simplicial distance and the search for ray segments near a target.

use super::build::{relabel_half_edge, Ray};
use crate::error::{OslError, Result};
use crate::foldlines::line::squared_distance;
use crate::graphs::automorphism::AutomorphismWord;
use crate::graphs::graph::{edge_of, rev, Graph, HalfEdge, Turn};
use crate::graphs::iso::isomorphisms;
use crate::graphs::point::Point;
use crate::matrices::normalize_entries;
use crate::numeric::{self, format_rational, rational_to_f64, Float, Q};
use num::{One, Signed, Zero};
use std::collections::HashMap;

/// A point together with the turn folded first by the germ of a fold line
/// leaving it.
#[derive(Clone, Debug)]
pub struct TangentDatum {
    pub point: Point,
    pub next_turn: Turn,
}

impl TangentDatum {
    pub fn new(point: Point, next_turn: Turn) -> Result<TangentDatum> {
        point.graph.check_turn(&next_turn)?;
        if edge_of(next_turn.a) == edge_of(next_turn.b) {
            return Err(OslError::InvalidTurn(format!("{next_turn}: both directions belong to one edge")));
        }
        Ok(TangentDatum { point, next_turn })
    }
}

#[derive(Clone, Debug)]
pub enum Target {
    Point(Point),
    Tangent(TangentDatum),
}

impl Target {
    pub fn point(&self) -> &Point {
        match self {
            Target::Point(p) => p,
            Target::Tangent(t) => &t.point,
        }
    }

    fn turn(&self) -> Option<&Turn> {
        match self {
            Target::Point(_) => None,
            Target::Tangent(t) => Some(&t.next_turn),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchHit {
    /// Fold whose segment comes close, or `None` for a milestone.
    pub fold: Option<usize>,
    /// Milestone whose frame the hit is read in.
    pub frame: usize,
    pub time: Q,
    /// `Ψ`: the marking of that milestone; the hit translated by `Ψ⁻¹` is
    /// compared with the target.
    pub translation: AutomorphismWord,
    /// Normalized ray lengths, relabelled onto the target's edges.
    pub lengths: Vec<Q>,
    pub squared_distance: Q,
    pub distance: f64,
    /// Segments scanned, this one included.
    pub scanned: usize,
}

/// Euclidean distance of the volume-one length vectors.
pub fn simplicial_distance_lengths(a: &[Q], b: &[Q]) -> Result<Float> {
    if a.len() != b.len() {
        return Err(OslError::DifferentSimplices);
    }
    let bits = numeric::default_precision();
    Ok(numeric::rational_to_float(&squared_distance(a, b), bits).sqrt())
}

/// Distance of two points of one simplex: same graph and same marking.
pub fn simplicial_distance(x: &Point, y: &Point) -> Result<Float> {
    let same_marking = x.marking.petals == y.marking.petals
        && x.marking.base == y.marking.base
        && x.marking.word.abelianization() == y.marking.word.abelianization();
    if x.graph != y.graph || !same_marking {
        return Err(OslError::DifferentSimplices);
    }
    simplicial_distance_lengths(&x.lengths, &y.lengths)
}

/// Closest point to `t` on the segment `[p, q]`: `(λ, squared distance)`.
fn closest_on_segment(p: &[Q], q: &[Q], t: &[Q]) -> (Q, Q) {
    let d: Vec<Q> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let dd: Q = d.iter().map(|x| x * x).sum();
    let lambda = if dd.is_zero() {
        Q::zero()
    } else {
        let proj: Q = t.iter().zip(p).zip(&d).map(|((a, b), c)| (a - b) * c).sum();
        (proj / dd).max(Q::zero()).min(Q::one())
    };
    let d2 = p.iter().zip(&d).zip(t).map(|((a, c), b)| {
        let x = a + &lambda * c - b;
        &x * &x
    });
    (lambda.clone(), d2.sum())
}

fn closest_f64(p: &[f64], q: &[f64], t: &[f64]) -> f64 {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let dd: f64 = d.iter().map(|x| x * x).sum();
    let lambda = if dd == 0.0 { 0.0 } else { (t.iter().zip(p).zip(&d).map(|((a, b), c)| (a - b) * c).sum::<f64>() / dd).clamp(0.0, 1.0) };
    p.iter().zip(&d).zip(t).map(|((a, c), b)| (a + lambda * c - b).powi(2)).sum()
}

fn permute(v: &[Q], iso: &[HalfEdge]) -> Vec<Q> {
    let mut out = vec![Q::zero(); v.len()];
    for (e, &h) in iso.iter().enumerate() {
        out[edge_of(h)] = v[e].clone();
    }
    out
}

fn map_half_edge(iso: &[HalfEdge], h: HalfEdge) -> HalfEdge {
    let image = iso[edge_of(h)];
    if h & 1 == 0 {
        image
    } else {
        rev(image)
    }
}

struct Searcher<'a> {
    ray: &'a Ray,
    target: &'a Target,
    graph: Graph,
    normalized: Vec<Q>,
    normalized_f64: Vec<f64>,
    eps2: Q,
    eps_f64: f64,
    isos: HashMap<Graph, Vec<Vec<HalfEdge>>>,
    best: Option<Q>,
}

/// A candidate: `(λ along the segment, squared distance, lengths in target labels)`.
type Candidate = (Q, Q, Vec<Q>);

impl Searcher<'_> {
    fn isos_for(&mut self, g: &Graph) -> Vec<Vec<HalfEdge>> {
        if g.num_edges() != self.graph.num_edges() || g.vertices != self.graph.vertices {
            return Vec::new();
        }
        let target = &self.graph;
        self.isos.entry(g.clone()).or_insert_with(|| isomorphisms(g, target)).clone()
    }

    /// Closest approach of the normalized segment `[p0, p1]` over every
    /// relabelling onto the target, exact once the float screen passes.
    fn compare(&mut self, p0: &[Q], p1: &[Q], isos: &[Vec<HalfEdge>], turn_ok: impl Fn(&[HalfEdge]) -> bool) -> Option<Candidate> {
        let f0: Vec<f64> = p0.iter().map(rational_to_f64).collect();
        let f1: Vec<f64> = p1.iter().map(rational_to_f64).collect();
        let mut found: Option<Candidate> = None;
        for iso in isos {
            let perm = |v: &[f64]| {
                let mut out = vec![0.0; v.len()];
                for (e, &h) in iso.iter().enumerate() {
                    out[edge_of(h)] = v[e];
                }
                out
            };
            let approx = closest_f64(&perm(&f0), &perm(&f1), &self.normalized_f64);
            let screen = self.eps_f64 * (1.0 + 1e-6) + 1e-12;
            let tracking = self.best.as_ref().is_none_or(|b| approx < rational_to_f64(b) * (1.0 + 1e-6) + 1e-15);
            if approx > screen * screen && !tracking {
                continue;
            }
            let (q0, q1) = (permute(p0, iso), permute(p1, iso));
            let (lambda, d2) = closest_on_segment(&q0, &q1, &self.normalized);
            if self.best.as_ref().is_none_or(|b| d2 < *b) {
                self.best = Some(d2.clone());
            }
            if d2 < self.eps2 && turn_ok(iso) && found.as_ref().is_none_or(|f| d2 < f.1) {
                let lengths = q0.iter().zip(&q1).map(|(a, b)| a + &lambda * (b - a)).collect();
                found = Some((lambda, d2, lengths));
            }
        }
        found
    }

    fn milestone(&mut self, l: usize) -> Result<Option<Candidate>> {
        if self.graph.vertices != 1 {
            return Ok(None);
        }
        let w = normalize_entries(&self.ray.milestones[l])?;
        let isos = self.isos_for(&Graph::rose(self.ray.rank));
        Ok(self.compare(&w, &w, &isos, |_| true))
    }

    /// The open segment of fold `k`: lengths are affine in the folded
    /// amount, so the normalized points run along a straight segment.
    fn segment(&mut self, k: usize) -> Result<Option<(Q, Candidate)>> {
        let f = &self.ray.folds[k];
        let three = Q::from_integer(3.into());
        let (t1, t2) = (&f.amount / &three, &f.amount * Q::from_integer(2.into()) / &three);
        let u1 = f.partial(&t1)?.unsubdivide(&[])?;
        let isos = self.isos_for(&u1.point.graph);
        if isos.is_empty() {
            return Ok(None);
        }
        let u2 = f.partial(&t2)?.unsubdivide(&[])?;
        let at = |tau: &Q| -> Vec<Q> {
            let s = (tau - &t1) / (&t2 - &t1);
            u1.point.lengths.iter().zip(&u2.point.lengths).map(|(a, b)| a + &s * (b - a)).collect()
        };
        let (l0, l1) = (at(&Q::zero()), at(&f.amount));
        let (v0, v1) = (numeric::sum(&l0), numeric::sum(&l1));
        let p0: Vec<Q> = l0.iter().map(|x| x / &v0).collect();
        let p1: Vec<Q> = l1.iter().map(|x| x / &v1).collect();
        let want = self.target.turn().copied();
        let next = (relabel_half_edge(&u1.edge_paths, f.a), relabel_half_edge(&u1.edge_paths, f.b));
        let turn_ok = |iso: &[HalfEdge]| match (want, next) {
            (None, _) => true,
            (Some(t), (Some(a), Some(b))) => Turn::new(map_half_edge(iso, a), map_half_edge(iso, b)).same_as(&t),
            _ => false,
        };
        let Some((lambda, d2, lengths)) = self.compare(&p0, &p1, &isos, turn_ok) else { return Ok(None) };
        if want.is_some() && lambda.is_one() {
            return Ok(None);
        }
        // λ on the normalized segment ↦ fraction s of the fold
        let s = &lambda * &v0 / (&v1 + &lambda * (&v0 - &v1));
        Ok(Some((&f.time + s * &f.amount, (lambda, d2, lengths))))
    }
}

/// Scans milestones and fold segments in ray order, up to `budget`
/// segments, for a point whose translate by `Ψ⁻¹` lies within `eps` of the
/// target in simplicial distance, after relabelling by a graph isomorphism.
/// With a tangent datum, the fold leaving the point must fold the target turn.
pub fn density_search(ray: &Ray, target: &Target, eps: &Q, budget: usize) -> Result<SearchHit> {
    let tp = target.point();
    if !eps.is_positive() {
        return Err(OslError::OutOfDomain("eps must be positive".into()));
    }
    if (0..tp.graph.vertices).any(|v| tp.graph.valence(v) < 3) {
        return Err(OslError::InvalidGraph("target has a vertex of valence below 3".into()));
    }
    let normalized = normalize_entries(&tp.lengths)?;
    let mut s = Searcher {
        ray,
        target,
        graph: tp.graph.clone(),
        normalized_f64: normalized.iter().map(rational_to_f64).collect(),
        normalized,
        eps2: eps * eps,
        eps_f64: rational_to_f64(eps),
        isos: HashMap::new(),
        best: None,
    };
    let hit = |fold: Option<usize>, frame: usize, time: Q, c: Candidate, scanned: usize| SearchHit {
        fold,
        frame,
        time,
        translation: ray.translation(frame),
        distance: rational_to_f64(&c.1).sqrt(),
        squared_distance: c.1,
        lengths: c.2,
        scanned,
    };
    let mut scanned = 0;
    for l in 0..=ray.blocks.len() {
        if target.turn().is_none() {
            if let Some(c) = s.milestone(l)? {
                return Ok(hit(None, l, ray.milestone_time(l), c, scanned));
            }
        }
        let Some(block) = ray.blocks.get(l) else { break };
        for k in block.folds.clone() {
            if scanned == budget {
                return Err(not_found(budget, &s.best));
            }
            scanned += 1;
            if let Some((time, c)) = s.segment(k)? {
                return Ok(hit(Some(k), l, time, c, scanned));
            }
        }
    }
    Err(not_found(scanned, &s.best))
}

fn not_found(budget: usize, best: &Option<Q>) -> OslError {
    let best = match best {
        Some(d2) => format!("{:.6}", rational_to_f64(d2).sqrt()),
        None => "none".into(),
    };
    OslError::NotFound { budget, best }
}

/// The hit translated by `Ψ⁻¹` has an identity-abelianized marking and the
/// same graph and lengths as the ray point read in its milestone frame.
pub fn translation_identity(ray: &Ray, hit: &SearchHit) -> Result<bool> {
    let global = ray.eval(&hit.time)?;
    let (frame, local) = ray.eval_local(&hit.time)?;
    let back = global.act(&hit.translation.inverse()?);
    Ok(frame == hit.frame && back.marking.word.is_identity_abelianization() && back.lengths == local.lengths && back.graph == local.graph)
}

/// Formats a hit's distance and time for reports.
pub fn describe(hit: &SearchHit) -> String {
    format!("fold {:?} frame {} time {} distance {:.6}", hit.fold, hit.frame, format_rational(&hit.time), hit.distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::q;

    #[test]
    fn distance_examples() {
        let x = Point::rose(vec![q(3, 5), q(2, 5)]).unwrap();
        let y = Point::rose(vec![q(1, 2), q(1, 2)]).unwrap();
        let d = numeric::float_to_f64(&simplicial_distance(&x, &y).unwrap());
        assert!((d - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(simplicial_distance(&y, &x).unwrap(), simplicial_distance(&x, &y).unwrap());
        assert!(simplicial_distance(&x, &x).unwrap() == numeric::float_zero(numeric::default_precision()));
    }

    #[test]
    fn segment_projection() {
        let (lambda, d2) = closest_on_segment(&[q(1, 1), q(0, 1)], &[q(0, 1), q(1, 1)], &[q(1, 1), q(1, 1)]);
        assert_eq!(lambda, q(1, 2));
        assert_eq!(d2, q(1, 2));
    }
}
