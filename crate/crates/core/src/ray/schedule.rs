//! Registries of Perron-Frobenius blocks and fold lines, and the snake
//! schedule interleaving them.

use crate::brun::{brun_automorphism, brun_expand, symbols_product, BrunSymbol};
use crate::error::{OslError, Result};
use crate::foldlines::{retarget_lengths, rose_to_rose, RoseToRoseLine};
use crate::graphs::automorphism::AutomorphismWord;
use crate::graphs::generate::trivalent_types;
use crate::graphs::graph::{edge_of, Turn};
use crate::graphs::point::{Marking, Point};
use crate::matrices::{is_positive, normalize_entries, pf_eigen, unfold_matrix, IntMatrix, PosVector};
use crate::numeric::{Q, Z};
use itertools::Itertools;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num::{BigInt, One};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

const GRID_SEEDS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RayMode {
    /// Rose-to-rose lines through top simplices between Brun blocks.
    Full,
    /// Single rose folds between Brun blocks; only rose and theta simplices.
    Theta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayConfig {
    pub rank: usize,
    pub mode: RayMode,
    /// Number of Perron-Frobenius blocks to register.
    pub pf_count: usize,
    /// Longest Brun word tried when enumerating blocks.
    pub pf_max_word: usize,
    /// Grid denominator for the top-simplex points of the line registry.
    pub grid_pitch: u32,
    pub max_lines: usize,
    /// Largest threshold tried before a line is declared unusable.
    pub threshold_cap: usize,
}

impl RayConfig {
    pub fn new(rank: usize, mode: RayMode) -> RayConfig {
        match mode {
            RayMode::Theta => RayConfig { rank, mode, pf_count: 64, pf_max_word: 12, grid_pitch: 6, max_lines: 0, threshold_cap: 8 },
            RayMode::Full => RayConfig { rank, mode, pf_count: 16, pf_max_word: 8, grid_pitch: 6, max_lines: 8, threshold_cap: 8 },
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(OslError::OutOfDomain("rank must be at least 2".into()));
        }
        if self.pf_count == 0 || self.grid_pitch == 0 {
            return Err(OslError::OutOfDomain("registries must be nonempty".into()));
        }
        Ok(())
    }
}

/// A positive Brun matrix `A = M_{s_1} ⋯ M_{s_m}` and its PF direction.
#[derive(Clone, Debug)]
pub struct PfEntry {
    pub symbols: Vec<BrunSymbol>,
    pub matrix: IntMatrix,
    pub eigenvector: Vec<f64>,
    /// `A^8 · 𝟙` normalized, a rational point next to the eigenvector.
    pub approx: Vec<Q>,
}

impl PfEntry {
    pub fn automorphism(&self) -> AutomorphismWord {
        brun_automorphism(self.matrix.dim(), &self.symbols)
    }
}

fn is_primitive_word(w: &[BrunSymbol]) -> bool {
    let m = w.len();
    (1..m).filter(|p| m % p == 0).all(|p| (p..m).any(|k| w[k] != w[k - p]))
}

/// The word is read off by Brun's algorithm itself on `A² · 𝟙`.
fn is_brun_word(a: &IntMatrix, w: &[BrunSymbol]) -> Result<bool> {
    let ones = vec![Z::one(); a.dim()];
    let v = a.apply_ints(&a.apply_ints(&ones)?)?;
    let v = PosVector::new(v.into_iter().map(Q::from_integer).collect())?;
    let exp = brun_expand(&v, 2 * w.len())?;
    Ok(exp.symbols.len() == 2 * w.len() && exp.symbols.iter().zip(w.iter().chain(w)).all(|(x, y)| x == y))
}

/// Breadth-first over Brun symbol words, keeping primitive words that Brun's
/// algorithm realizes and whose product is positive, with distinct PF vectors.
pub fn pf_registry(rank: usize, count: usize, max_word: usize) -> Result<Vec<PfEntry>> {
    let symbols: Vec<BrunSymbol> =
        (1..=rank).cartesian_product(1..=rank).filter(|(i, j)| i != j).map(|(i, j)| BrunSymbol::new(i, j)).collect();
    let mut out: Vec<PfEntry> = Vec::new();
    for m in 1..=max_word {
        for word in std::iter::repeat_n(symbols.iter().copied(), m).multi_cartesian_product() {
            if out.len() >= count {
                return Ok(out);
            }
            let a = symbols_product(rank, &word);
            if !is_positive(&a) || !is_primitive_word(&word) || !is_brun_word(&a, &word)? {
                continue;
            }
            let pf = pf_eigen(&a)?;
            let eigenvector = pf.eigenvector_f64();
            if out.iter().any(|e| e.eigenvector.iter().zip(&eigenvector).all(|(x, y)| (x - y).abs() < 1e-12)) {
                continue;
            }
            let ones: Vec<Q> = vec![Q::one(); rank];
            let approx = normalize_entries(&a.pow(8).apply_rationals(&ones)?)?;
            out.push(PfEntry { symbols: word, matrix: a, eigenvector, approx });
        }
    }
    if out.is_empty() {
        return Err(OslError::OutOfDomain("no positive Brun word within the length bound".into()));
    }
    Ok(out)
}

/// What an odd slot inserts between two Brun blocks.
#[derive(Clone, Debug)]
pub enum LineEntry {
    /// The proper full fold of petal `long` over petal `short` of a rose.
    Fold { long: usize, short: usize },
    Line(Box<RoseToRoseLine>),
}

impl LineEntry {
    /// Unfolding matrix `D` with `ℓ(start) = D · ℓ(end)`.
    pub fn matrix(&self, rank: usize) -> IntMatrix {
        match self {
            LineEntry::Fold { long, short } => unfold_matrix(long + 1, short + 1, rank).expect("distinct petals"),
            LineEntry::Line(l) => l.change_of_metric.clone(),
        }
    }

    /// True iff the entry can end at the rose lengths `w`.
    pub fn admits(&self, w: &[Q]) -> bool {
        match self {
            LineEntry::Fold { .. } => w.iter().all(|x| *x > Q::from_integer(BigInt::from(0))),
            LineEntry::Line(l) => retarget_lengths(l, w).is_ok(),
        }
    }
}

/// The `r(r−1)` rose folds in lexicographic order of `(long, short)`.
pub fn theta_lines(rank: usize) -> Vec<LineEntry> {
    (0..rank).cartesian_product(0..rank).filter(|(a, b)| a != b).map(|(long, short)| LineEntry::Fold { long, short }).collect()
}

/// Compositions of `total` into `parts` positive parts, lexicographically.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for rest in compositions(total - first, parts - 1) {
            out.push(std::iter::once(first).chain(rest).collect());
        }
    }
    out
}

/// Turns at vertices between distinct edges, in half-edge order.
fn turns_of(point: &Point) -> Vec<Turn> {
    let g = &point.graph;
    (0..g.vertices)
        .flat_map(|v| {
            g.half_edges_at(v).into_iter().tuple_combinations().filter(|(a, b)| edge_of(*a) != edge_of(*b)).map(|(a, b)| Turn::new(a, b))
        })
        .collect()
}

/// Integer lengths `32 p_e + k_e` with seeded offsets `k_e < 32`. Small,
/// well separated lengths keep the subtractive graph-to-rose folding short;
/// ties are escaped by the next seed.
fn perturbed(parts: &[u32], seed: u64) -> Vec<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    parts.iter().map(|&p| Q::from_integer(BigInt::from(32 * p as u64 + rng.random_range(1u64..32)))).collect()
}

/// Proper rose-to-rose lines through perturbed grid points of every top
/// simplex type, taken round-robin over types with turns cycling.
pub fn grid_lines(rank: usize, pitch: u32, max: usize) -> Result<Vec<LineEntry>> {
    let types = trivalent_types(rank);
    let grids: Vec<Vec<Vec<u32>>> = types.iter().map(|g| compositions(pitch + g.num_edges() as u32, g.num_edges())).collect();
    let mut out = Vec::new();
    let longest = grids.iter().map(Vec::len).max().unwrap_or(0);
    for c in 0..longest {
        for (t, g) in types.iter().enumerate() {
            if out.len() >= max {
                return Ok(out);
            }
            let Some(parts) = grids[t].get(c) else { continue };
            let marking = Marking::spanning_tree(g, 0);
            let turns = turns_of(&Point::new(g.clone(), perturbed(parts, 0), marking.clone())?);
            'point: for seed in 0..GRID_SEEDS {
                let x = Point::new(g.clone(), perturbed(parts, seed), marking.clone())?;
                for k in 0..turns.len() {
                    if let Ok(line) = rose_to_rose(&x, &turns[(c + t + k) % turns.len()]) {
                        out.push(LineEntry::Line(Box::new(line)));
                        break 'point;
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(OslError::OutOfDomain("no proper line on the grid".into()));
    }
    Ok(out)
}

/// Least `n` such that the entry admits every column of `A^{n+1}`, so that it
/// admits all of `A^m(ℝ₊^r)` for `m > n`.
pub fn threshold(pf: &PfEntry, entry: &LineEntry, cap: usize) -> Result<usize> {
    let mut power = pf.matrix.clone();
    for n in 0..cap {
        if (0..power.dim()).all(|k| {
            let col: Vec<Q> = power.column(k).into_iter().map(Q::from_integer).collect();
            entry.admits(&col)
        }) {
            return Ok(n);
        }
        power = power.mul(&pf.matrix)?;
    }
    Err(OslError::RetargetFailure { step: 0, reason: format!("no threshold below {cap}") })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "slot", rename_all = "lowercase")]
pub enum Slot {
    /// Odd slot: line `j` of the registry, ending near PF vector `i`.
    Line { i: usize, j: usize },
    /// Even slot: `n` copies of the Brun block of PF vector `i`.
    Block { i: usize, n: usize },
}

/// One unfolding matrix of the expanded schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum StepSource {
    Line { slot: usize, i: usize, j: usize },
    Brun { slot: usize, i: usize, copy: usize, index: usize },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub source: StepSource,
    pub matrix: IntMatrix,
}

#[derive(Clone, Debug)]
pub struct RaySchedule {
    pub mode: RayMode,
    pub rank: usize,
    pub registry: Vec<PfEntry>,
    pub lines: Vec<LineEntry>,
    /// `thresholds[i][j] = n(i, j)`.
    pub thresholds: Vec<Vec<usize>>,
}

/// Builds the schedule after computing every threshold.
pub fn snake_schedule(mode: RayMode, registry: Vec<PfEntry>, lines: Vec<LineEntry>, cap: usize) -> Result<RaySchedule> {
    if registry.is_empty() || lines.is_empty() {
        return Err(OslError::OutOfDomain("registries must be nonempty".into()));
    }
    let rank = registry[0].matrix.dim();
    let thresholds =
        registry.iter().map(|pf| lines.iter().map(|l| threshold(pf, l, cap)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    Ok(RaySchedule { mode, rank, registry, lines, thresholds })
}

impl RaySchedule {
    pub fn from_config(cfg: &RayConfig) -> Result<RaySchedule> {
        cfg.check()?;
        let registry = pf_registry(cfg.rank, cfg.pf_count, cfg.pf_max_word)?;
        let lines = match cfg.mode {
            RayMode::Theta => theta_lines(cfg.rank),
            RayMode::Full => grid_lines(cfg.rank, cfg.grid_pitch, cfg.max_lines.max(1))?,
        };
        snake_schedule(cfg.mode, registry, lines, cfg.threshold_cap)
    }

    /// Pair `k` of the diagonal enumeration of `registry × lines`.
    fn pair(&self, k: usize) -> Option<(usize, usize)> {
        let (p, q) = (self.registry.len(), self.lines.len());
        if k >= p * q {
            return None;
        }
        let mut seen = 0;
        for d in 0.. {
            for i in 0..=d {
                let j = d - i;
                if i < p && j < q {
                    if seen == k {
                        return Some((i, j));
                    }
                    seen += 1;
                }
            }
        }
        unreachable!()
    }

    /// The lazy slot sequence `a_1, a_2, …`. Round `W` visits pair `k` for its
    /// `c`-th time whenever `k + 2^c = W`, so every pair recurs forever while
    /// new pairs keep arriving; the visit is the line followed by
    /// `n(i, j) + 1 + c` Brun blocks.
    pub fn slots(&self) -> Slots<'_> {
        Slots { schedule: self, round: 1, buffer: VecDeque::new() }
    }

    pub fn prefix(&self, len: usize) -> Vec<Slot> {
        self.slots().take(len).collect()
    }

    /// The first `horizon` unfolding matrices `D_1, …, D_L`.
    pub fn steps(&self, horizon: usize) -> Vec<Step> {
        let mut out = Vec::with_capacity(horizon);
        for (k, slot) in self.slots().enumerate() {
            if out.len() >= horizon {
                break;
            }
            match slot {
                Slot::Line { i, j } => {
                    out.push(Step { source: StepSource::Line { slot: k, i, j }, matrix: self.lines[j].matrix(self.rank) })
                }
                Slot::Block { i, n } => {
                    let symbols = &self.registry[i].symbols;
                    for copy in 0..n {
                        for (index, s) in symbols.iter().enumerate() {
                            if out.len() >= horizon {
                                break;
                            }
                            let matrix = unfold_matrix(s.i, s.j, self.rank).expect("registry symbols are valid");
                            out.push(Step { source: StepSource::Brun { slot: k, i, copy, index }, matrix });
                        }
                    }
                }
            }
        }
        out
    }
}

pub struct Slots<'a> {
    schedule: &'a RaySchedule,
    round: usize,
    buffer: VecDeque<Slot>,
}

impl Iterator for Slots<'_> {
    type Item = Slot;

    fn next(&mut self) -> Option<Slot> {
        while self.buffer.is_empty() {
            let w = self.round;
            self.round += 1;
            let mut c = 0;
            while (1usize << c) <= w {
                if let Some((i, j)) = self.schedule.pair(w - (1 << c)) {
                    self.buffer.push_back(Slot::Line { i, j });
                    self.buffer.push_back(Slot::Block { i, n: self.schedule.thresholds[i][j] + 1 + c });
                }
                c += 1;
            }
        }
        self.buffer.pop_front()
    }
}

/// Counters read off a schedule prefix.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScheduleAudit {
    /// Odd-slot occurrences of each `(i, j)`.
    pub line_counts: BTreeMap<(usize, usize), usize>,
    /// Largest Brun power seen for each `i`.
    pub max_power: BTreeMap<usize, usize>,
}

/// Checks the alternation and threshold conditions on `prefix` (slots are
/// numbered from 1, lines at odd positions) and returns the counters.
pub fn audit(schedule: &RaySchedule, prefix: &[Slot]) -> Result<ScheduleAudit> {
    let mut out = ScheduleAudit::default();
    for (k, slot) in prefix.iter().enumerate() {
        let bad = |what: &str| Err(OslError::OutOfDomain(format!("slot {}: {what}", k + 1)));
        match (k % 2, *slot) {
            (0, Slot::Line { i, j }) => {
                *out.line_counts.entry((i, j)).or_default() += 1;
                match prefix.get(k + 1) {
                    Some(Slot::Block { i: i2, n }) if *i2 == i && *n > schedule.thresholds[i][j] => {}
                    None => {}
                    _ => return bad("line is not followed by a long enough block of its vector"),
                }
            }
            (1, Slot::Block { i, n }) => {
                let m = out.max_power.entry(i).or_default();
                *m = (*m).max(n);
            }
            _ => return bad("slot parity is wrong"),
        }
    }
    Ok(out)
}
