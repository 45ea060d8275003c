//! Full rose-to-rose fold lines through a trivalent point.

use super::graph_rose::{graph_to_rose, replay, GraphToRose};
use super::rose_graph::{endpoint_equals, identity_orientation, recover_rose, rose_to_graph, RoseToGraphLine};
use crate::decompose::{loop_decomposition, LoopDecomposition};
use crate::error::{OslError, Result};
use crate::graphs::automorphism::AutomorphismWord;
use crate::graphs::graph::{edge_of, Turn};
use crate::graphs::point::{letter_from_images, path_to_word, Point};
use crate::matrices::IntMatrix;
use crate::numeric::{self, format_rational, Q};
use num::{One, Signed, Zero};

const DITHER_ATTEMPTS: usize = 64;

#[derive(Clone, Debug)]
pub struct RoseToRoseLine {
    pub rose_to_graph: RoseToGraphLine,
    pub decomposition: LoopDecomposition,
    /// The trivalent point, oriented as in the decomposition, marked by its loops.
    pub top: Point,
    pub graph_to_rose: GraphToRose,
    pub terminal: Point,
    /// `ℓ(x₀) = H · ℓ(terminal)`.
    pub change_of_metric: IntMatrix,
    /// Positive automorphism sending petal `i` to track `i`.
    pub automorphism: AutomorphismWord,
}

impl RoseToRoseLine {
    pub fn x0(&self) -> &Point {
        &self.rose_to_graph.x0
    }

    /// Time at which the top point is reached.
    pub fn top_time(&self) -> Q {
        self.rose_to_graph.extent()
    }

    /// Lengths folded by each graph-to-rose fold.
    pub fn fold_amounts(&self) -> Vec<Q> {
        let g = &self.graph_to_rose;
        std::iter::once(&g.start).chain(&g.points).zip(&g.folds).map(|(p, f)| p.length(f.short).clone()).collect()
    }

    pub fn extent(&self) -> Q {
        self.top_time() + numeric::sum(&self.fold_amounts())
    }

    /// True iff every graph-to-rose fold folds a strictly shorter edge.
    pub fn is_proper(&self) -> bool {
        let g = &self.graph_to_rose;
        std::iter::once(&g.start).chain(&g.points).zip(&g.folds).all(|(p, f)| p.length(f.long) > p.length(f.short))
    }

    /// Every ratio of lengths is rational on this backend.
    pub fn is_rational(&self) -> bool {
        true
    }

    /// The point at time `t`, with valence-2 vertices erased.
    pub fn eval(&self, t: &Q) -> Result<Point> {
        if t.is_negative() || *t > self.extent() {
            return Err(OslError::TimeOutOfRange(format_rational(t)));
        }
        let top_time = self.top_time();
        if *t <= top_time {
            return self.rose_to_graph.eval(t);
        }
        let mut clock = top_time;
        let g = &self.graph_to_rose;
        let mut current = &g.start;
        for (k, (f, amount)) in g.folds.iter().zip(self.fold_amounts()).enumerate() {
            let tau = t - &clock;
            if tau < amount {
                let (p, _) = current.fold_partial(f.long, f.short, &tau)?;
                return Ok(p.unsubdivide(&[])?.point);
            }
            clock += amount;
            current = &g.points[k];
        }
        Ok(self.terminal.clone())
    }

    /// Re-checks the defining identities of the line exactly.
    pub fn verify(&self) -> Result<()> {
        let h = &self.change_of_metric;
        let fail = |what: &str| Err(OslError::FoldStalled(what.into()));
        if !endpoint_equals(&self.rose_to_graph, &self.top) {
            return fail("rose-to-graph endpoint differs from the top point");
        }
        if !h.is_nonnegative() || !h.determinant().abs().is_one() {
            return fail("change of metric is not a nonnegative unimodular matrix");
        }
        if h.apply_rationals(&self.terminal.lengths)? != self.x0().lengths {
            return fail("petal lengths differ from H times the terminal lengths");
        }
        if self.automorphism.abelianization() != *h {
            return fail("change of metric is not the abelianized change of marking");
        }
        let t = &self.decomposition.turn;
        match self.graph_to_rose.folds.first() {
            Some(f) if Turn::new(f.long, f.short).same_as(t) => Ok(()),
            _ => fail("first graph-to-rose fold does not fold the requested turn"),
        }
    }
}

fn assemble(rose_to_graph: RoseToGraphLine, decomposition: LoopDecomposition, top: Point, g2r: GraphToRose) -> Result<RoseToRoseLine> {
    let r = top.rank();
    let words: Vec<_> = g2r.tracks.iter().map(|t| path_to_word(t)).collect();
    let automorphism = match letter_from_images(&words, r) {
        Some(l) => AutomorphismWord::from_letter(r, l),
        None => AutomorphismWord::identity(r),
    };
    let line = RoseToRoseLine {
        rose_to_graph,
        decomposition,
        top,
        change_of_metric: g2r.change_of_metric(),
        terminal: g2r.terminal.clone(),
        graph_to_rose: g2r,
        automorphism,
    };
    line.verify()?;
    Ok(line)
}

/// The rose-to-rose line through the trivalent point `x` whose first fold
/// after `x` folds `turn`.
pub fn rose_to_rose(x: &Point, turn: &Turn) -> Result<RoseToRoseLine> {
    let d = loop_decomposition(&x.graph, turn)?;
    let rec = recover_rose(x, &d)?;
    let r2g = rose_to_graph(&rec.x0, &rec.s)?;
    let g2r = graph_to_rose(&rec.top, Some(&d.turn))?;
    assemble(r2g, d, rec.top, g2r)
}

/// Same line with the top point moved so that the folds end at the rose
/// lengths `w`: `w` is spread over the edges of each petal in the proportions
/// of the terminal, the folds are undone, and everything is rebuilt.
pub fn retarget_lengths(line: &RoseToRoseLine, w: &[Q]) -> Result<RoseToRoseLine> {
    let g = &line.graph_to_rose;
    if w.len() != line.terminal.lengths.len() {
        return Err(OslError::DimensionMismatch { expected: line.terminal.lengths.len(), found: w.len() });
    }
    if w.iter().any(|l| !l.is_positive()) {
        return Err(OslError::NonPositive);
    }
    let mut lengths = vec![Q::zero(); g.folded.lengths.len()];
    for (j, p) in g.edge_paths.iter().enumerate() {
        let ratio = &w[j] / &line.terminal.lengths[j];
        for &h in p {
            lengths[edge_of(h)] = &g.folded.lengths[edge_of(h)] * &ratio;
        }
    }
    for f in g.folds.iter().rev() {
        let short = lengths[edge_of(f.short)].clone();
        lengths[edge_of(f.long)] += short;
    }
    let y = Point { lengths, ..line.top.clone() };
    let d = identity_orientation(&line.decomposition);
    let rec = recover_rose(&y, &d)?;
    let r2g = rose_to_graph(&rec.x0, &rec.s)?;
    let g2r = replay(&rec.top, &g.folds)?;
    let out = assemble(r2g, line.decomposition.clone(), rec.top, g2r)?;
    if out.change_of_metric != line.change_of_metric {
        return Err(OslError::FoldStalled("retargeted line changed its matrix".into()));
    }
    Ok(out)
}

/// Retargets to the rose point `w`, which must carry the marking of the terminal.
pub fn retarget(line: &RoseToRoseLine, w: &Point) -> Result<RoseToRoseLine> {
    let mut w = w.clone();
    w.normalize_rose_marking();
    if !w.graph.is_rose() || w.marking.word.abelianization() != line.terminal.marking.word.abelianization() {
        return Err(OslError::InvalidGraph("target is not in the simplex of the terminal rose".into()));
    }
    retarget_lengths(line, &w.lengths)
}

/// Squared simplicial distance of the volume-one representatives.
pub fn squared_distance(a: &[Q], b: &[Q]) -> Q {
    let (va, vb) = (numeric::sum(a), numeric::sum(b));
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| {
        let d = x / &va - y / &vb;
        acc + &d * &d
    })
}

/// A point in the simplex of `x` within `eps` of it through which a proper
/// rose-to-rose line folding `turn` exists, with that line. `x` itself is
/// returned when no length ties occur.
pub fn rationalize(x: &Point, turn: &Turn, eps: &Q) -> Result<(Point, RoseToRoseLine)> {
    let mut last = None;
    for attempt in 0..=DITHER_ATTEMPTS {
        let candidate = if attempt == 0 {
            x.clone()
        } else {
            let base = crate::matrices::normalize_entries(&x.lengths)?;
            let scale = eps / Q::from_integer(4.into());
            let lengths = crate::brun::dither(&base, &scale, attempt);
            Point { lengths, ..x.clone() }
        };
        if squared_distance(&x.lengths, &candidate.lengths) >= eps * eps {
            continue;
        }
        match rose_to_rose(&candidate, turn) {
            Ok(line) => return Ok((candidate, line)),
            Err(e @ OslError::NotProper(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| OslError::NotProper("no dithered point within eps".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::graph::neg;
    use crate::numeric::q;

    fn theta_top() -> Point {
        let x0 = Point::rose(vec![q(1, 1), q(4, 5)]).unwrap();
        rose_to_graph(&x0, &[q(3, 10), q(0, 1)]).unwrap().endpoint
    }

    #[test]
    fn theta_line() {
        let x = theta_top();
        let line = rose_to_rose(&x, &Turn::new(neg(0), neg(1))).unwrap();
        assert_eq!(line.change_of_metric.dim(), 2);
        assert!(line.is_proper() && line.is_rational());
        let h = &line.change_of_metric;
        assert_eq!(h.apply_rationals(&line.terminal.lengths).unwrap(), line.x0().lengths);
        let end = line.eval(&line.extent()).unwrap();
        assert_eq!(end.lengths, line.terminal.lengths);
        let mid = line.eval(&line.top_time()).unwrap();
        assert_eq!(mid.volume(), line.top.volume());
    }

    #[test]
    fn retarget_to_same_and_nearby() {
        let line = rose_to_rose(&theta_top(), &Turn::new(neg(0), neg(1))).unwrap();
        let same = retarget(&line, &line.terminal).unwrap();
        assert_eq!(same.x0().lengths, line.x0().lengths);
        assert_eq!(same.top.lengths, line.top.lengths);
        let scaled = retarget_lengths(&line, &line.terminal.scaled(&q(3, 1)).lengths).unwrap();
        assert_eq!(scaled.graph_to_rose.folds, line.graph_to_rose.folds);
        let mut w = line.terminal.lengths.clone();
        w[0] += q(1, 1000);
        let moved = retarget_lengths(&line, &w).unwrap();
        assert_eq!(moved.terminal.lengths, w);
        assert_eq!(moved.change_of_metric, line.change_of_metric);
    }

    #[test]
    fn rationalize_keeps_generic_points() {
        let x = theta_top();
        let (y, _) = rationalize(&x, &Turn::new(neg(0), neg(1)), &q(1, 10000)).unwrap();
        assert_eq!(y, x);
    }
}
