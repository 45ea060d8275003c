//! Brun's subtractive algorithms: unordered, ordered and homogeneous steps,
//! the permutation identity between the first two, positivity onset and a
//! sampler for Perron-Frobenius directions.
//!
//! Symbols and indices are 1-based.

use crate::error::{OslError, Result};
use crate::graphs::automorphism::{AutLetter, AutomorphismWord};
use crate::matrices::{cone_diameter, is_positive, pf_eigen, IntMatrix, PFData, PosVector};
use crate::numeric::{self, Q, Z};
use itertools::Itertools;
use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BrunSymbol {
    pub i: usize,
    pub j: usize,
}

impl BrunSymbol {
    pub fn new(i: usize, j: usize) -> Self {
        BrunSymbol { i, j }
    }
}

/// First index attaining the maximum, skipping `skip`.
fn first_max(v: &[Q], skip: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (k, x) in v.iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        if best.is_none_or(|b| x > &v[b]) {
            best = Some(k);
        }
    }
    best.expect("dimension at least 2")
}

pub fn brun_step_unordered(v: &PosVector) -> Result<(BrunSymbol, PosVector)> {
    if v.is_degenerate() {
        return Err(OslError::NonPositive);
    }
    let x = v.entries();
    let m = first_max(x, None);
    let s = first_max(x, Some(m));
    let mut out = x.to_vec();
    out[m] = &x[m] - &x[s];
    Ok((BrunSymbol::new(m + 1, s + 1), PosVector::nonnegative(out)?))
}

#[derive(Clone, Debug)]
pub struct BrunExpansion {
    pub start: PosVector,
    pub symbols: Vec<BrunSymbol>,
    /// `v_0, …, v_s`.
    pub iterates: Vec<PosVector>,
    /// `A_0 = I, …, A_s`.
    pub products: Vec<IntMatrix>,
    pub degenerate: bool,
}

impl BrunExpansion {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn last_product(&self) -> &IntMatrix {
        self.products.last().expect("A_0 always present")
    }
}

/// `A · M_ij` adds column `i` to column `j`.
fn times_unfold(a: &IntMatrix, i: usize, j: usize) -> IntMatrix {
    let mut out = a.clone();
    for r in 0..a.dim() {
        out.set(r, j, a.get(r, j) + a.get(r, i));
    }
    out
}

fn check_identity(a: &IntMatrix, v: &PosVector, v0: &PosVector, step: usize) -> Result<()> {
    if a.apply_rationals(v.entries())? != v0.entries() {
        return Err(OslError::IdentityViolation { step });
    }
    Ok(())
}

/// Runs at most `steps` unordered steps, stopping at the first zero coordinate,
/// and checks `v_0 = A_s v_s` exactly after every step.
pub fn brun_expand(v: &PosVector, steps: usize) -> Result<BrunExpansion> {
    if v.is_degenerate() {
        return Err(OslError::NonPositive);
    }
    let mut exp = BrunExpansion {
        start: v.clone(),
        symbols: Vec::new(),
        iterates: vec![v.clone()],
        products: vec![IntMatrix::identity(v.dim())],
        degenerate: false,
    };
    for step in 1..=steps {
        let cur = exp.iterates.last().unwrap();
        let (sym, next) = brun_step_unordered(cur)?;
        let a = times_unfold(exp.last_product(), sym.i - 1, sym.j - 1);
        check_identity(&a, &next, v, step)?;
        let degenerate = next.is_degenerate();
        exp.symbols.push(sym);
        exp.iterates.push(next);
        exp.products.push(a);
        if degenerate {
            exp.degenerate = true;
            break;
        }
    }
    Ok(exp)
}

fn check_sorted(x: &[Q]) -> Result<()> {
    if x.windows(2).any(|w| w[0] < w[1]) {
        return Err(OslError::NotOrdered);
    }
    Ok(())
}

/// Slot index of the ordered step: the first `i ≥ 2` with `x_1 − x_2 ≥ x_i`,
/// or `n + 1` (append) when no coordinate qualifies.
fn ordered_index(x: &[Q]) -> usize {
    let d = &x[0] - &x[1];
    (1..x.len()).find(|&k| d >= x[k]).map(|k| k + 1).unwrap_or(x.len() + 1)
}

fn ordered_apply(x: &[Q], i: usize) -> Vec<Q> {
    let d = &x[0] - &x[1];
    let mut out: Vec<Q> = x[1..i - 1].to_vec();
    out.push(d);
    out.extend_from_slice(&x[(i - 1).min(x.len())..]);
    out
}

/// Returns the slot index `i` (1-based, `n + 1` means the difference is
/// appended last) and `(x_2, …, x_{i−1}, x_1 − x_2, x_i, …, x_n)`.
pub fn brun_step_ordered(v: &PosVector) -> Result<(usize, PosVector)> {
    if v.is_degenerate() {
        return Err(OslError::NonPositive);
    }
    let x = v.entries();
    check_sorted(x)?;
    let i = ordered_index(x);
    Ok((i, PosVector::nonnegative(ordered_apply(x, i))?))
}

/// `T'_i = P_i T_12` in dimension `n`, for `2 ≤ i ≤ n + 1`.
pub fn ordered_fold_matrix(i: usize, n: usize) -> Result<IntMatrix> {
    if i < 2 || i > n + 1 || n < 2 {
        return Err(OslError::InvalidIndices { i, j: 1, n });
    }
    let mut m = IntMatrix::zeros(n);
    // row k of the output picks u_{src(k)} where u = T_12 x.
    for k in 0..n {
        let src = if k + 2 < i {
            k + 1
        } else if k + 2 == i {
            0
        } else {
            k
        };
        m.set(k, src, BigInt::one());
        if src == 0 {
            m.set(k, 1, BigInt::from(-1));
        }
    }
    Ok(m)
}

/// `M'_i = (T'_i)^{-1} = M_12 P_i^{-1}`.
pub fn ordered_unfold_matrix(i: usize, n: usize) -> Result<IntMatrix> {
    let t = ordered_fold_matrix(i, n)?;
    t.unimodular_inverse().ok_or(OslError::IdentityViolation { step: 0 })
}

#[derive(Clone, Debug)]
pub struct OrderedExpansion {
    pub start: PosVector,
    pub indices: Vec<usize>,
    pub iterates: Vec<PosVector>,
    /// `A'_0 = I, …, A'_k`.
    pub products: Vec<IntMatrix>,
    pub degenerate: bool,
}

pub fn brun_expand_ordered(v: &PosVector, steps: usize) -> Result<OrderedExpansion> {
    if v.is_degenerate() {
        return Err(OslError::NonPositive);
    }
    check_sorted(v.entries())?;
    let n = v.dim();
    let mut exp = OrderedExpansion {
        start: v.clone(),
        indices: Vec::new(),
        iterates: vec![v.clone()],
        products: vec![IntMatrix::identity(n)],
        degenerate: false,
    };
    for step in 1..=steps {
        let (i, next) = brun_step_ordered(exp.iterates.last().unwrap())?;
        let a = exp.products.last().unwrap().mul(&ordered_unfold_matrix(i, n)?)?;
        check_identity(&a, &next, v, step)?;
        let degenerate = next.is_degenerate();
        exp.indices.push(i);
        exp.iterates.push(next);
        exp.products.push(a);
        if degenerate {
            exp.degenerate = true;
            break;
        }
    }
    Ok(exp)
}

/// Step on `B_n = {1 ≥ x_1 ≥ … ≥ x_n ≥ 0}`: lift by prepending 1, take the
/// ordered step, project by dividing through the new first coordinate.
pub fn brun_step_homogeneous(v: &[Q]) -> Result<Vec<Q>> {
    let one = Q::one();
    if v.is_empty() || v[0] > one || v.iter().any(|x| x.is_negative()) {
        return Err(OslError::OutOfDomain("expected 1 ≥ x_1 ≥ … ≥ x_n ≥ 0".into()));
    }
    check_sorted(v)?;
    let mut lifted = vec![one];
    lifted.extend_from_slice(v);
    let i = ordered_index(&lifted);
    let y = ordered_apply(&lifted, i);
    project(&y)
}

/// `p(x_1, …, x_{n+1}) = (x_2/x_1, …, x_{n+1}/x_1)`.
pub fn project(y: &[Q]) -> Result<Vec<Q>> {
    if y[0].is_zero() {
        return Err(OslError::OutOfDomain("first coordinate vanished".into()));
    }
    Ok(y[1..].iter().map(|x| x / &y[0]).collect())
}

/// Stable descending sort; `perm[k]` is the 1-based source index of slot `k`.
pub fn ordering_map(v: &PosVector) -> (PosVector, Vec<usize>) {
    let x = v.entries();
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].cmp(&x[a]));
    let sorted = idx.iter().map(|&k| x[k].clone()).collect();
    let out = PosVector::nonnegative(sorted).expect("entries were nonnegative");
    (out, idx.into_iter().map(|k| k + 1).collect())
}

/// Finds 1-based permutations `p1, p2` with `A_m = P_1 A'_m P_2`, where
/// `P e_k = e_{p[k]}`, by search over row permutations and column matching.
pub fn relate_expansions(v: &PosVector, m: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let unordered = brun_expand(v, m)?;
    let (sorted, _) = ordering_map(v);
    let ordered = brun_expand_ordered(&sorted, m)?;
    if unordered.len() < m {
        return Err(OslError::Degenerate { step: unordered.len() });
    }
    if ordered.indices.len() < m {
        return Err(OslError::Degenerate { step: ordered.indices.len() });
    }
    let a = &unordered.products[m];
    let b = &ordered.products[m];
    let n = v.dim();
    for rows in (0..n).permutations(n) {
        let pb = IntMatrix::permutation(&rows).mul(b)?;
        if let Some(cols) = match_columns(a, &pb) {
            let check = pb.mul(&IntMatrix::permutation(&cols))?;
            if &check == a {
                return Ok((rows.iter().map(|k| k + 1).collect(), cols.iter().map(|k| k + 1).collect()));
            }
        }
    }
    Err(OslError::IdentityViolation { step: m })
}

/// `sigma` with column `k` of `a` equal to column `sigma[k]` of `b`.
fn match_columns(a: &IntMatrix, b: &IntMatrix) -> Option<Vec<usize>> {
    let n = a.dim();
    let bcols: Vec<Vec<Z>> = (0..n).map(|k| b.column(k)).collect();
    let mut used = vec![false; n];
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n {
        let col = a.column(k);
        let hit = (0..n).find(|&c| !used[c] && bcols[c] == col)?;
        used[hit] = true;
        sigma.push(hit);
    }
    Some(sigma)
}

/// Least `N ≤ cap` with `A_N` strictly positive. The ordered expansion of the
/// sorted vector is checked to turn positive at the same step.
pub fn positivity_onset(v: &PosVector, cap: usize) -> Result<usize> {
    let (sorted, _) = ordering_map(v);
    let mut x = v.clone();
    let mut y = sorted;
    let n = v.dim();
    let mut a = IntMatrix::identity(n);
    let mut b = IntMatrix::identity(n);
    for step in 0..=cap {
        let pa = is_positive(&a);
        if pa != is_positive(&b) {
            return Err(OslError::IdentityViolation { step });
        }
        if pa {
            return Ok(step);
        }
        if step == cap {
            break;
        }
        if x.is_degenerate() || y.is_degenerate() {
            return Err(OslError::OnsetNotFound { cap, degenerate: true });
        }
        let (sym, nx) = brun_step_unordered(&x)?;
        a = times_unfold(&a, sym.i - 1, sym.j - 1);
        let (i, ny) = brun_step_ordered(&y)?;
        b = b.mul(&ordered_unfold_matrix(i, n)?)?;
        x = nx;
        y = ny;
    }
    Err(OslError::OnsetNotFound { cap, degenerate: false })
}

/// `ℓ¹` diameter of the column cone of `A_s` for `s = 0..=steps`.
pub fn cone_diameter_curve(v: &PosVector, steps: usize) -> Result<Vec<Q>> {
    let exp = brun_expand(v, steps)?;
    exp.products.iter().map(cone_diameter).collect()
}

#[derive(Clone, Debug)]
pub struct PfSample {
    pub matrix: IntMatrix,
    pub pf: PFData,
    pub symbols: Vec<BrunSymbol>,
    /// Vector actually expanded, when it differs from the target.
    pub perturbed_target: Option<Vec<Q>>,
    pub diameter: Q,
}

const DITHER_DIGITS: usize = 30;
const SAMPLE_ATTEMPTS: usize = 16;

/// Fractional part of `k·φ` truncated to `10^-30`, as a rational in (0, 1).
fn golden_fraction(k: usize) -> Q {
    let den = num::pow(BigInt::from(10), DITHER_DIGITS);
    // φ·den = (den + sqrt(5·den²)) / 2
    let root = (BigInt::from(5) * &den * &den).sqrt();
    let phi_den = (&den + root) / BigInt::from(2);
    let mut r = (phi_den * BigInt::from(k as u64)) % &den;
    if r.is_zero() {
        r = BigInt::one();
    }
    Q::new(r, den)
}

/// Deterministic dither of total mass at most `scale`.
pub fn dither(target: &[Q], scale: &Q, attempt: usize) -> Vec<Q> {
    let n = target.len();
    let per = scale / Q::from_integer(BigInt::from(n as u64));
    let raw: Vec<Q> = target
        .iter()
        .enumerate()
        .map(|(k, x)| x + &per * golden_fraction(1 + k + attempt * n))
        .collect();
    crate::matrices::normalize_entries(&raw).expect("positive entries")
}

/// Expands `target` until `A_n` is positive with cone diameter below `eps/2`
/// and returns `A_n` with its PF data. Degenerate expansions are retried on a
/// dithered target of ℓ¹ mass at most `eps/8`.
pub fn pf_sample(target: &PosVector, eps: &Q, cap: usize) -> Result<PfSample> {
    pf_sample_seeded(target, eps, cap, 0)
}

pub fn pf_sample_seeded(target: &PosVector, eps: &Q, cap: usize, seed: u64) -> Result<PfSample> {
    if !eps.is_positive() || target.is_degenerate() {
        return Err(OslError::OutOfDomain("eps must be positive and the target strictly positive".into()));
    }
    let t = crate::matrices::normalize_entries(target.entries())?;
    let half = eps / Q::from_integer(BigInt::from(2));
    let loose = eps >= &Q::from_integer(BigInt::from(2));
    let mut best: Option<Q> = None;
    for attempt in 0..SAMPLE_ATTEMPTS {
        let (start, perturbed) = if attempt == 0 && seed == 0 {
            (t.clone(), None)
        } else {
            let d = dither(&t, &(eps / Q::from_integer(BigInt::from(8))), attempt + seed as usize * SAMPLE_ATTEMPTS);
            (d.clone(), Some(d))
        };
        let mut x = PosVector::new(start)?;
        let mut a = IntMatrix::identity(x.dim());
        let mut symbols = Vec::new();
        for _ in 0..cap {
            let (sym, next) = brun_step_unordered(&x)?;
            a = times_unfold(&a, sym.i - 1, sym.j - 1);
            symbols.push(sym);
            if is_positive(&a) {
                let diam = cone_diameter(&a)?;
                if loose || diam < half {
                    let pf = pf_eigen(&a)?;
                    let dist = pf.l1_distance_to(&t);
                    if dist < numeric::rational_to_float(eps, pf.precision) {
                        return Ok(PfSample { matrix: a, pf, symbols, perturbed_target: perturbed, diameter: diam });
                    }
                }
                if best.as_ref().is_none_or(|b| &diam < b) {
                    best = Some(diam);
                }
            }
            if next.is_degenerate() {
                break;
            }
            x = next;
        }
    }
    Err(OslError::SamplingFailed {
        cap,
        best: best.map(|b| numeric::format_rational(&b)).unwrap_or_else(|| "none".into()),
    })
}

/// `g_A = f_{i_n j_n} ∘ … ∘ f_{i_1 j_1}` as a word in application order.
pub fn brun_automorphism(rank: usize, symbols: &[BrunSymbol]) -> AutomorphismWord {
    AutomorphismWord {
        rank,
        letters: symbols.iter().map(|s| AutLetter::Fold { i: s.i - 1, j: s.j - 1, inverse: false }).collect(),
    }
}

/// Product of the unfold matrices of a symbol list.
pub fn symbols_product(rank: usize, symbols: &[BrunSymbol]) -> IntMatrix {
    symbols.iter().fold(IntMatrix::identity(rank), |a, s| times_unfold(&a, s.i - 1, s.j - 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub symbol: Option<BrunSymbol>,
    pub cone_diameter: String,
    pub min_entry: String,
}

pub fn diagnostics(exp: &BrunExpansion) -> Result<Vec<DiagnosticRow>> {
    exp.products
        .iter()
        .enumerate()
        .map(|(s, a)| {
            Ok(DiagnosticRow {
                step: s,
                symbol: if s == 0 { None } else { Some(exp.symbols[s - 1]) },
                cone_diameter: numeric::format_rational(&cone_diameter(a)?),
                min_entry: numeric::format_rational(&exp.iterates[s].min_entry()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::q;

    fn pv(x: &[(i64, i64)]) -> PosVector {
        PosVector::from_ratios(x).unwrap()
    }

    #[test]
    fn unordered_examples() {
        let (s, v) = brun_step_unordered(&pv(&[(5, 10), (3, 10), (2, 10)])).unwrap();
        assert_eq!(s, BrunSymbol::new(1, 2));
        assert_eq!(v.entries(), &[q(1, 5), q(3, 10), q(1, 5)]);
        let (s, v) = brun_step_unordered(&pv(&[(4, 10), (4, 10), (2, 10)])).unwrap();
        assert_eq!(s, BrunSymbol::new(1, 2));
        assert!(v.is_degenerate());
        let (s, v) = brun_step_unordered(&pv(&[(1, 1), (2, 1), (3, 1)])).unwrap();
        assert_eq!(s, BrunSymbol::new(3, 2));
        assert_eq!(v.entries(), &[q(1, 1), q(2, 1), q(1, 1)]);
    }

    #[test]
    fn two_step_expansion() {
        let e = brun_expand(&pv(&[(62, 100), (38, 100)]), 2).unwrap();
        assert_eq!(e.symbols, vec![BrunSymbol::new(1, 2), BrunSymbol::new(2, 1)]);
        assert_eq!(e.products[2], IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert_eq!(e.iterates[2].entries(), &[q(24, 100), q(14, 100)]);
    }

    #[test]
    fn ordered_examples() {
        let (i, v) = brun_step_ordered(&pv(&[(5, 10), (3, 10), (2, 10)])).unwrap();
        assert_eq!(i, 3);
        assert_eq!(v.entries(), &[q(3, 10), q(2, 10), q(2, 10)]);
        let (i, v) = brun_step_ordered(&pv(&[(6, 10), (2, 10), (2, 10)])).unwrap();
        assert_eq!(i, 2);
        assert_eq!(v.entries(), &[q(4, 10), q(2, 10), q(2, 10)]);
        let (i, v) = brun_step_ordered(&pv(&[(1, 1), (1, 1)])).unwrap();
        assert_eq!(i, 3);
        assert_eq!(v.entries(), &[q(1, 1), q(0, 1)]);
        assert!(v.is_degenerate());
        assert!(brun_step_ordered(&pv(&[(1, 3), (2, 3)])).is_err());
    }

    #[test]
    fn ordered_matrices_invert_steps() {
        let v = pv(&[(9, 20), (6, 20), (4, 20), (1, 20)]);
        let (i, w) = brun_step_ordered(&v).unwrap();
        let t = ordered_fold_matrix(i, 4).unwrap();
        assert_eq!(t.apply_rationals(v.entries()).unwrap(), w.entries());
        let m = ordered_unfold_matrix(i, 4).unwrap();
        assert_eq!(m.apply_rationals(w.entries()).unwrap(), v.entries());
    }

    #[test]
    fn ordering_is_stable() {
        let (s, p) = ordering_map(&pv(&[(2, 10), (5, 10), (3, 10)]));
        assert_eq!(s.entries(), &[q(5, 10), q(3, 10), q(2, 10)]);
        assert_eq!(p, vec![2, 3, 1]);
        let (_, p) = ordering_map(&pv(&[(4, 10), (4, 10), (2, 10)]));
        assert_eq!(p, vec![1, 2, 3]);
    }

    #[test]
    fn relation_small_cases() {
        assert_eq!(relate_expansions(&pv(&[(62, 100), (38, 100)]), 0).unwrap(), (vec![1, 2], vec![1, 2]));
        relate_expansions(&pv(&[(62, 100), (38, 100)]), 2).unwrap();
        relate_expansions(&pv(&[(1237, 4000), (1709, 4000), (1054, 4000)]), 5).unwrap();
    }

    #[test]
    fn onset_examples() {
        assert_eq!(positivity_onset(&pv(&[(62, 100), (38, 100)]), 50).unwrap(), 2);
        let e = positivity_onset(&pv(&[(1, 2), (1, 4), (1, 4)]), 50).unwrap_err();
        assert_eq!(e, OslError::OnsetNotFound { cap: 50, degenerate: true });
    }

    #[test]
    fn automorphism_matches_product() {
        let syms = [BrunSymbol::new(1, 2), BrunSymbol::new(2, 1)];
        let w = brun_automorphism(2, &syms);
        assert_eq!(w.transition_matrix().unwrap(), IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert!(brun_automorphism(2, &[]).is_empty());
    }

    #[test]
    fn sampler_near_golden_direction() {
        let t = pv(&[(618034, 1000000), (381966, 1000000)]);
        let s = pf_sample(&t, &q(1, 1000), 200).unwrap();
        assert!(s.perturbed_target.is_none());
        assert!(numeric::float_to_f64(&s.pf.l1_distance_to(t.entries())) < 1e-3);
    }

    #[test]
    fn sampler_handles_degenerate_target() {
        let t = pv(&[(1, 3), (1, 3), (1, 3)]);
        let s = pf_sample(&t, &q(1, 100), 10_000).unwrap();
        assert!(s.perturbed_target.is_some());
        assert!(is_positive(&s.matrix));
    }
}
