//! Ray generation: base point, milestones and the fold segments between them.

use super::schedule::{LineEntry, RayConfig, RayMode, RaySchedule, Step, StepSource};
use crate::error::{OslError, Result};
use crate::foldlines::rose_graph::endpoint_matching;
use crate::foldlines::{retarget_lengths, RoseToRoseLine};
use crate::graphs::automorphism::AutomorphismWord;
use crate::graphs::fold::FoldKind;
use crate::graphs::graph::{is_positive_path, pos, rev, HalfEdge, Path, Turn};
use crate::graphs::map::GraphMap;
use crate::graphs::point::{Marking, Point};
use crate::matrices::{unfold_matrix, IntMatrix, PosVector};
use crate::numeric::{format_rational, Q, Z};
use num::{One, Signed, Zero};
use std::ops::Range;

/// One elementary fold of the ray, in the frame of its block: the block
/// starts at a rose with the identity marking.
#[derive(Clone, Debug)]
pub struct RayFold {
    pub block: usize,
    pub start: Point,
    pub kind: FoldKind,
    pub a: HalfEdge,
    pub b: HalfEdge,
    /// Length folded, which is also the volume lost.
    pub amount: Q,
    /// Ray time at the start of the fold.
    pub time: Q,
    /// Result of [`check_fold`] when the fold was built.
    pub legal: bool,
}

impl RayFold {
    pub fn turn(&self) -> Turn {
        Turn::new(self.a, self.b)
    }

    /// The positive basis loop: the first marking petal.
    pub fn witness(&self) -> &Path {
        &self.start.marking.petals[0]
    }

    /// The whole fold.
    pub fn apply(&self) -> Result<(Point, GraphMap)> {
        match self.kind {
            FoldKind::ProperFull => self.start.fold_proper_full(self.a, self.b),
            FoldKind::Full => self.start.fold_identify(self.a, self.b),
            FoldKind::Partial => self.start.fold_partial(self.a, self.b, &self.amount),
        }
    }

    /// The point after folding `tau ∈ [0, amount)`, before erasing valence-2 vertices.
    pub fn partial(&self, tau: &Q) -> Result<Point> {
        if tau.is_zero() {
            return Ok(self.start.clone());
        }
        if tau.is_negative() || *tau >= self.amount {
            return Err(OslError::TimeOutOfRange(format_rational(tau)));
        }
        Ok(self.start.fold_partial(self.a, self.b, tau)?.0)
    }

    pub fn end_time(&self) -> Q {
        &self.time + &self.amount
    }
}

/// What the gate structure of one fold says about the witness.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct GateEvidence {
    pub fold: usize,
    pub turn: String,
    /// Gates at the vertex of the folded turn.
    pub gates: Vec<Vec<String>>,
    pub witness_length: usize,
    /// Turns crossed by the witness, all in distinct gates.
    pub crossings: usize,
}

/// Checks one fold for the geodesic certificate: the folded turn matches
/// directions, every positive edge maps to a positive path, and the witness
/// is legal with an image of the same length.
pub fn check_fold(fold: &RayFold, index: usize) -> Result<GateEvidence> {
    let fail = || OslError::NonGeodesic { fold: index };
    let t = fold.turn();
    if !t.is_direction_matching() {
        return Err(fail());
    }
    let (next, map) = fold.apply()?;
    if !(0..fold.start.graph.num_edges()).all(|e| is_positive_path(&map.image(pos(e)))) {
        return Err(fail());
    }
    let w = fold.witness();
    if !is_positive_path(w) || !map.is_legal_loop(w)? {
        return Err(fail());
    }
    let image = map.image_path(w);
    if !is_positive_path(&image) || next.path_length(&image) != fold.start.path_length(w) {
        return Err(fail());
    }
    let v = fold.start.graph.origin(fold.a);
    let gates = map.gates()[v].iter().map(|g| g.iter().map(|&h| crate::graphs::graph::format_half_edge(h)).collect()).collect();
    Ok(GateEvidence { fold: index, turn: t.to_string(), gates, witness_length: w.len(), crossings: w.len() })
}

#[derive(Clone, Debug)]
pub struct RayBlock {
    pub step: StepSource,
    /// `D_l`, with `w_{l−1} = D_l w_l`.
    pub matrix: IntMatrix,
    /// `f_l`: the marking of the end rose in the block frame.
    pub automorphism: AutomorphismWord,
    pub folds: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct Ray {
    pub mode: RayMode,
    pub rank: usize,
    pub horizon: usize,
    /// Rose with lengths `w_0` and the identity marking.
    pub base: Point,
    pub blocks: Vec<RayBlock>,
    pub folds: Vec<RayFold>,
    /// `w_0, …, w_L`.
    pub milestones: Vec<Vec<Q>>,
}

impl Ray {
    /// The positive basis loop at the base point.
    pub fn witness(&self) -> Path {
        vec![pos(0)]
    }

    pub fn extent(&self) -> Q {
        self.folds.last().map(RayFold::end_time).unwrap_or_else(Q::zero)
    }

    /// Ray time of milestone `l`.
    pub fn milestone_time(&self, l: usize) -> Q {
        if l == 0 {
            return Q::zero();
        }
        self.folds[self.blocks[l - 1].folds.end - 1].end_time()
    }

    /// Unprojectivized volume at time `t`.
    pub fn volume_at(&self, t: &Q) -> Result<Q> {
        self.check_time(t)?;
        Ok(self.base.volume() - t)
    }

    pub fn check_time(&self, t: &Q) -> Result<()> {
        if t.is_negative() || *t > self.extent() {
            return Err(OslError::TimeOutOfRange(format_rational(t)));
        }
        Ok(())
    }

    /// `Ψ_l = f_l ∘ ⋯ ∘ f_1`, the marking of milestone `l`.
    pub fn translation(&self, l: usize) -> AutomorphismWord {
        self.blocks[..l].iter().fold(AutomorphismWord::identity(self.rank), |acc, b| acc.then(&b.automorphism))
    }

    /// Milestone `l` in its own frame: a rose with the identity marking.
    pub fn milestone_local(&self, l: usize) -> Point {
        Point::rose(self.milestones[l].clone()).expect("milestones are positive")
    }

    pub fn milestone(&self, l: usize) -> Point {
        self.milestone_local(l).act(&self.translation(l))
    }

    /// Index of the fold running at time `t`, if `t` is before the end.
    pub fn fold_at(&self, t: &Q) -> Option<usize> {
        let k = self.folds.partition_point(|f| f.end_time() <= *t);
        (k < self.folds.len()).then_some(k)
    }

    /// The point at time `t`, valence-2 vertices erased, in the frame of
    /// milestone `l`, returned with `l`.
    pub fn eval_local(&self, t: &Q) -> Result<(usize, Point)> {
        self.check_time(t)?;
        match self.fold_at(t) {
            Some(k) => {
                let f = &self.folds[k];
                let p = f.partial(&(t - &f.time))?;
                Ok((f.block - 1, p.unsubdivide(&[])?.point))
            }
            None => Ok((self.blocks.len(), self.milestone_local(self.blocks.len()))),
        }
    }

    /// The marked point at time `t`.
    pub fn eval(&self, t: &Q) -> Result<Point> {
        let (l, p) = self.eval_local(t)?;
        Ok(p.act(&self.translation(l)))
    }
}

/// `u_L = 𝟙`, `u_{l−1} = D_l u_l`, all integral and positive.
fn backward_products(ds: &[IntMatrix], rank: usize) -> Result<Vec<Vec<Z>>> {
    let mut u = vec![vec![Z::one(); rank]];
    for d in ds.iter().rev() {
        let next = d.apply_ints(u.last().expect("nonempty"))?;
        u.push(next);
    }
    u.reverse();
    Ok(u)
}

/// Horizon surrogate of the base point: `normalize(D_1 ⋯ D_L · 𝟙)`.
pub fn base_point_for(ds: &[IntMatrix]) -> Result<PosVector> {
    let rank = ds.first().map(IntMatrix::dim).ok_or_else(|| OslError::OutOfDomain("horizon must be at least 1".into()))?;
    let u = backward_products(ds, rank)?;
    PosVector::new(crate::matrices::normalize_entries(&u[0].iter().cloned().map(Q::from_integer).collect::<Vec<_>>())?)
}

pub fn base_point(schedule: &RaySchedule, horizon: usize) -> Result<PosVector> {
    let ds: Vec<IntMatrix> = schedule.steps(horizon).into_iter().map(|s| s.matrix).collect();
    base_point_for(&ds)
}

/// `w_0, …, w_L` with `w_l = D_{l+1} ⋯ D_L 𝟙 / Σ(D_1 ⋯ D_L 𝟙)`.
pub fn milestone_vectors(ds: &[IntMatrix]) -> Result<Vec<Vec<Q>>> {
    let rank = ds.first().map(IntMatrix::dim).ok_or_else(|| OslError::OutOfDomain("horizon must be at least 1".into()))?;
    let u = backward_products(ds, rank)?;
    let total = Q::from_integer(u[0].iter().sum());
    Ok(u.into_iter().map(|v| v.into_iter().map(|x| Q::from_integer(x) / &total).collect()).collect())
}

/// `w_l = Z_l w_{l−1}` from a given `w_0`.
pub fn forward_milestones(ds: &[IntMatrix], w0: &[Q]) -> Result<Vec<Vec<Q>>> {
    let mut out = vec![w0.to_vec()];
    for (k, d) in ds.iter().enumerate() {
        let z = d.unimodular_inverse().ok_or(OslError::NotInvertible)?;
        let next = z.apply_rationals(out.last().expect("nonempty"))?;
        if next.iter().any(|x| !x.is_positive()) {
            return Err(OslError::NotProper(format!("milestone {} is not positive", k + 1)));
        }
        out.push(next);
    }
    Ok(out)
}

/// How one step is realized.
pub enum Realizer<'a> {
    RoseFold { long: usize, short: usize },
    Line(&'a RoseToRoseLine),
}

/// The block frame of a point: its marking word is dropped, so the petals
/// are read against the rose the block starts from.
fn local(p: &Point) -> Point {
    let mut out = p.clone();
    out.marking = Marking { word: AutomorphismWord::identity(p.rank()), ..p.marking.clone() };
    out
}

struct Builder {
    folds: Vec<RayFold>,
    clock: Q,
}

impl Builder {
    fn push(&mut self, block: usize, start: Point, kind: FoldKind, a: HalfEdge, b: HalfEdge, amount: Q) -> Result<Point> {
        let index = self.folds.len();
        let mut fold = RayFold { block, start, kind, a, b, amount, time: self.clock.clone(), legal: false };
        check_fold(&fold, index)?;
        fold.legal = true;
        let (next, _) = fold.apply()?;
        for g in [&next.graph, &fold.start.graph] {
            if g.has_separating_edge() {
                return Err(OslError::SeparatingEdge);
            }
            if !g.is_transitive() {
                return Err(OslError::NonTransitive);
            }
        }
        self.clock += &fold.amount;
        self.folds.push(fold);
        Ok(next)
    }

    /// Proper full fold of a rose; returns `f_l`.
    fn rose_fold(&mut self, l: usize, w_prev: &[Q], w_next: &[Q], long: usize, short: usize) -> Result<AutomorphismWord> {
        let x = Point::rose(w_prev.to_vec())?;
        let t = Turn::new(pos(long), pos(short));
        if !x.is_allowable(&t) || x.lengths[long] <= x.lengths[short] {
            return Err(OslError::NotProper(format!("rose fold {t} at milestone {}", l - 1)));
        }
        let amount = x.lengths[short].clone();
        let mut y = self.push(l, x, FoldKind::ProperFull, pos(long), pos(short), amount)?;
        y.normalize_rose_marking();
        if y.lengths != w_next {
            return Err(OslError::IdentityViolation { step: l });
        }
        Ok(y.marking.word)
    }

    /// Retargeted rose-to-rose line ending at `w_next`; returns `f_l`.
    fn line(&mut self, l: usize, w_prev: &[Q], w_next: &[Q], base: &RoseToRoseLine) -> Result<AutomorphismWord> {
        let retarget_failure = |reason: String| OslError::RetargetFailure { step: l, reason };
        let line = retarget_lengths(base, w_next).map_err(|e| retarget_failure(e.to_string()))?;
        if line.x0().lengths != w_prev {
            return Err(retarget_failure("start rose differs from the milestone".into()));
        }
        let r2g = &line.rose_to_graph;
        let mut last = local(&r2g.x0);
        for rec in &r2g.records {
            let next = self.push(l, local(&rec.start), rec.kind, rec.a, rec.b, rec.amount.clone())?;
            if next.lengths != rec.after.lengths {
                return Err(retarget_failure("fold record does not replay".into()));
            }
            last = next;
        }
        if last.unsubdivide(&[])?.point.graph != r2g.endpoint.graph || endpoint_matching(r2g, &line.top).is_none() {
            return Err(retarget_failure("rose-to-graph endpoint is not the top point".into()));
        }
        let g2r = &line.graph_to_rose;
        let mut current = local(&g2r.start);
        for f in &g2r.folds {
            let amount = current.length(f.short).clone();
            current = self.push(l, current, FoldKind::ProperFull, f.long, f.short, amount)?;
        }
        if line.terminal.lengths != w_next {
            return Err(retarget_failure("terminal rose differs from the milestone".into()));
        }
        Ok(line.automorphism.clone())
    }
}

/// Builds the ray through the milestones of `steps`, re-verifying every
/// fold, every milestone identity and the matrix of every block.
/// With `base` given, the milestones are `w_l = Z_l w_{l−1}` from it instead
/// of the horizon surrogate.
pub fn build_ray(mode: RayMode, steps: &[(StepSource, IntMatrix, Realizer<'_>)], base: Option<&[Q]>) -> Result<Ray> {
    let ds: Vec<IntMatrix> = steps.iter().map(|(_, d, _)| d.clone()).collect();
    let milestones = match base {
        None => milestone_vectors(&ds)?,
        Some(w0) => forward_milestones(&ds, w0)?,
    };
    let rank = ds[0].dim();
    let mut b = Builder { folds: Vec::new(), clock: Q::zero() };
    let mut blocks = Vec::with_capacity(steps.len());
    for (k, (source, d, how)) in steps.iter().enumerate() {
        let l = k + 1;
        let (w_prev, w_next) = (&milestones[l - 1], &milestones[l]);
        if w_next.iter().any(|x| !x.is_positive()) || d.apply_rationals(w_next)? != *w_prev {
            return Err(OslError::IdentityViolation { step: l });
        }
        let first = b.folds.len();
        let automorphism = match how {
            Realizer::RoseFold { long, short } => b.rose_fold(l, w_prev, w_next, *long, *short)?,
            Realizer::Line(line) => b.line(l, w_prev, w_next, line)?,
        };
        if automorphism.abelianization() != *d {
            return Err(OslError::RetargetFailure { step: l, reason: "block marking does not abelianize to its matrix".into() });
        }
        blocks.push(RayBlock { step: source.clone(), matrix: d.clone(), automorphism, folds: first..b.folds.len() });
    }
    let base = Point::rose(milestones[0].clone())?;
    Ok(Ray { mode, rank, horizon: steps.len(), base, blocks, folds: b.folds, milestones })
}

fn realizer<'a>(schedule: &'a RaySchedule, step: &Step) -> Realizer<'a> {
    match &step.source {
        StepSource::Brun { i, index, .. } => {
            let s = schedule.registry[*i].symbols[*index];
            Realizer::RoseFold { long: s.i - 1, short: s.j - 1 }
        }
        StepSource::Line { j, .. } => match &schedule.lines[*j] {
            LineEntry::Fold { long, short } => Realizer::RoseFold { long: *long, short: *short },
            LineEntry::Line(line) => Realizer::Line(line),
        },
    }
}

/// The ray prefix through milestones `x_0, …, x_L` of the schedule.
pub fn generate_ray(schedule: &RaySchedule, horizon: usize) -> Result<Ray> {
    if horizon == 0 {
        return Err(OslError::OutOfDomain("horizon must be at least 1".into()));
    }
    let steps = schedule.steps(horizon);
    let items: Vec<_> = steps.iter().map(|s| (s.source.clone(), s.matrix.clone(), realizer(schedule, s))).collect();
    build_ray(schedule.mode, &items, None)
}

/// The theta-mode ray of the default configuration of rank `rank`.
pub fn theta_ray(rank: usize, horizon: usize) -> Result<Ray> {
    generate_ray(&RaySchedule::from_config(&RayConfig::new(rank, RayMode::Theta))?, horizon)
}

/// A ray of rose folds `(long, short)` only, 0-based, from `base` or from
/// the horizon surrogate.
pub fn rose_fold_ray(rank: usize, folds: &[(usize, usize)], base: Option<&[Q]>) -> Result<Ray> {
    let items = folds
        .iter()
        .enumerate()
        .map(|(k, &(long, short))| {
            let d = unfold_matrix(long + 1, short + 1, rank)?;
            Ok((StepSource::Line { slot: k, i: 0, j: 0 }, d, Realizer::RoseFold { long, short }))
        })
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(OslError::OutOfDomain("horizon must be at least 1".into()));
    }
    build_ray(RayMode::Theta, &items, base)
}

/// Half-edge of the unsubdivided graph that starts with the old half-edge `h`.
pub fn relabel_half_edge(edge_paths: &[Path], h: HalfEdge) -> Option<HalfEdge> {
    edge_paths.iter().enumerate().find_map(|(k, p)| {
        if p.first() == Some(&h) {
            Some(pos(k))
        } else if p.last() == Some(&rev(h)) {
            Some(rev(pos(k)))
        } else {
            None
        }
    })
}

/// Number of edges of every simplex crossed by the open folds, with the rose counts.
pub fn simplex_edge_counts(ray: &Ray) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for f in &ray.folds {
        let mid = f.partial(&(&f.amount / Q::from_integer(2.into())))?.unsubdivide(&[])?.point;
        out.push(mid.graph.num_edges());
        out.push(f.start.unsubdivide(&[])?.point.graph.num_edges());
    }
    out.push(ray.rank);
    Ok(out)
}

/// Every graph met at fold starts, fold midpoints and milestones is connected
/// without separating edge and strongly connected in its carried orientation.
pub fn audit_reducedness(ray: &Ray) -> Result<usize> {
    let mut checked = 0;
    for f in &ray.folds {
        let mid = f.partial(&(&f.amount / Q::from_integer(2.into())))?;
        for g in [&f.start.graph, &mid.graph, &mid.unsubdivide(&[])?.point.graph] {
            if g.has_separating_edge() {
                return Err(OslError::SeparatingEdge);
            }
            if !g.is_transitive() {
                return Err(OslError::NonTransitive);
            }
            checked += 1;
        }
    }
    Ok(checked + ray.milestones.len())
}
