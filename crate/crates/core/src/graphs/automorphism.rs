//! Free-group words and symbolic automorphism words.
//!
//! Generators are 0-based. A letter of a free word is a nonzero `i32`:
//! `k + 1` stands for `X_k` and `-(k + 1)` for its inverse.

use crate::error::{OslError, Result};
use crate::matrices::IntMatrix;
use num::BigInt;
use serde::{Deserialize, Serialize};

pub type FreeWord = Vec<i32>;

pub fn gen(k: usize) -> i32 {
    k as i32 + 1
}

pub fn letter_index(l: i32) -> usize {
    (l.unsigned_abs() - 1) as usize
}

/// Free reduction.
pub fn reduce(w: &[i32]) -> FreeWord {
    let mut out: FreeWord = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert_word(w: &[i32]) -> FreeWord {
    w.iter().rev().map(|&l| -l).collect()
}

/// Substitutes `images[k]` for each `X_k` and reduces.
pub fn substitute(w: &[i32], images: &[FreeWord]) -> FreeWord {
    let mut out = Vec::new();
    for &l in w {
        let img = &images[letter_index(l)];
        if l > 0 {
            out.extend_from_slice(img);
        } else {
            out.extend(img.iter().rev().map(|&x| -x));
        }
    }
    reduce(&out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AutLetter {
    /// `X_i ↦ X_j X_i` (or `X_j^{-1} X_i` when inverted), other generators fixed.
    Fold { i: usize, j: usize, inverse: bool },
    /// `X_k ↦ X_{perm[k]}`.
    Permutation { perm: Vec<usize> },
    /// `X_k ↦ images[k]`.
    Substitution { images: Vec<FreeWord> },
}

impl AutLetter {
    pub fn images(&self, rank: usize) -> Vec<FreeWord> {
        match self {
            AutLetter::Fold { i, j, inverse } => (0..rank)
                .map(|k| {
                    if k == *i {
                        let xj = if *inverse { -gen(*j) } else { gen(*j) };
                        vec![xj, gen(*i)]
                    } else {
                        vec![gen(k)]
                    }
                })
                .collect(),
            AutLetter::Permutation { perm } => perm.iter().map(|&p| vec![gen(p)]).collect(),
            AutLetter::Substitution { images } => images.clone(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            AutLetter::Fold { inverse, .. } => !inverse,
            AutLetter::Permutation { .. } => true,
            AutLetter::Substitution { images } => images.iter().all(|w| w.iter().all(|&l| l > 0)),
        }
    }

    /// Signed exponent-sum matrix; row `k` abelianizes the image of `X_k`.
    pub fn abelianization(&self, rank: usize) -> IntMatrix {
        match self {
            AutLetter::Fold { i, j, inverse } => {
                let mut m = IntMatrix::identity(rank);
                m.set(*i, *j, BigInt::from(if *inverse { -1 } else { 1 }));
                m
            }
            AutLetter::Permutation { perm } => IntMatrix::permutation(perm).transpose(),
            AutLetter::Substitution { images } => word_matrix(images, rank, true),
        }
    }

    pub fn inverse(&self, rank: usize) -> Result<AutLetter> {
        Ok(match self {
            AutLetter::Fold { i, j, inverse } => AutLetter::Fold { i: *i, j: *j, inverse: !inverse },
            AutLetter::Permutation { perm } => {
                let mut inv = vec![0; perm.len()];
                for (k, &p) in perm.iter().enumerate() {
                    inv[p] = k;
                }
                AutLetter::Permutation { perm: inv }
            }
            AutLetter::Substitution { images } => AutLetter::Substitution { images: invert_images(images, rank)? },
        })
    }
}

fn word_matrix(images: &[FreeWord], rank: usize, signed: bool) -> IntMatrix {
    let mut m = IntMatrix::zeros(rank);
    for (k, w) in images.iter().enumerate() {
        for &l in w {
            let c = letter_index(l);
            let delta = if signed && l < 0 { -1 } else { 1 };
            let v = m.get(k, c) + BigInt::from(delta);
            m.set(k, c, v);
        }
    }
    m
}

/// Inverts a basis given by images, by Nielsen stripping of prefixes and
/// suffixes until every image is a single letter.
pub fn invert_images(images: &[FreeWord], rank: usize) -> Result<Vec<FreeWord>> {
    // Track each current basis element u_k as a word in the original generators
    // (`cur`) together with its expression in the formal basis Y (`expr`).
    let mut cur: Vec<FreeWord> = images.iter().map(|w| reduce(w)).collect();
    let mut expr: Vec<FreeWord> = (0..rank).map(|k| vec![gen(k)]).collect();
    let total = |c: &Vec<FreeWord>| c.iter().map(|w| w.len()).sum::<usize>();
    let mut guard = 0usize;
    while cur.iter().any(|w| w.len() != 1) {
        guard += 1;
        if guard > 100_000 {
            return Err(OslError::NotInvertible);
        }
        let before = total(&cur);
        let mut improved = false;
        'search: for a in 0..rank {
            for b in 0..rank {
                if a == b {
                    continue;
                }
                for (left, inv_b) in [(true, false), (true, true), (false, false), (false, true)] {
                    let ub = if inv_b { invert_word(&cur[b]) } else { cur[b].clone() };
                    let eb = if inv_b { invert_word(&expr[b]) } else { expr[b].clone() };
                    let ub_inv = invert_word(&ub);
                    let eb_inv = invert_word(&eb);
                    let (cand, cand_e) = if left {
                        (reduce(&[ub_inv.as_slice(), cur[a].as_slice()].concat()), reduce(&[eb_inv.as_slice(), expr[a].as_slice()].concat()))
                    } else {
                        (reduce(&[cur[a].as_slice(), ub_inv.as_slice()].concat()), reduce(&[expr[a].as_slice(), eb_inv.as_slice()].concat()))
                    };
                    if cand.len() < cur[a].len() && !cand.is_empty() {
                        cur[a] = cand;
                        expr[a] = cand_e;
                        improved = true;
                        break 'search;
                    }
                }
            }
        }
        if !improved || total(&cur) >= before {
            return Err(OslError::NotInvertible);
        }
    }
    // Now cur[k] = X_{p(k)}^{±1} and cur[k] = φ(expr[k]); hence φ^{-1}(X_{p(k)}) = expr[k]^{±1}.
    let mut inv: Vec<Option<FreeWord>> = vec![None; rank];
    for k in 0..rank {
        let l = cur[k][0];
        let idx = letter_index(l);
        if inv[idx].is_some() {
            return Err(OslError::NotInvertible);
        }
        inv[idx] = Some(if l > 0 { expr[k].clone() } else { invert_word(&expr[k]) });
    }
    inv.into_iter().map(|w| w.ok_or(OslError::NotInvertible)).collect()
}

/// Composite automorphism `a_n ∘ … ∘ a_1` of letters listed in application order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismWord {
    pub rank: usize,
    pub letters: Vec<AutLetter>,
}

pub const IMAGE_LENGTH_CAP: usize = 1 << 20;

impl AutomorphismWord {
    pub fn identity(rank: usize) -> Self {
        AutomorphismWord { rank, letters: Vec::new() }
    }

    pub fn fold(rank: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= rank || j >= rank {
            return Err(OslError::InvalidIndices { i, j, n: rank });
        }
        Ok(AutomorphismWord { rank, letters: vec![AutLetter::Fold { i, j, inverse: false }] })
    }

    pub fn from_letter(rank: usize, letter: AutLetter) -> Self {
        AutomorphismWord { rank, letters: vec![letter] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self` followed by `next`, i.e. the automorphism `next ∘ self`.
    pub fn then(&self, next: &AutomorphismWord) -> AutomorphismWord {
        let mut letters = self.letters.clone();
        letters.extend(next.letters.iter().cloned());
        AutomorphismWord { rank: self.rank, letters }
    }

    pub fn push(&mut self, letter: AutLetter) {
        self.letters.push(letter);
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &AutomorphismWord, inner: &AutomorphismWord) -> AutomorphismWord {
        inner.then(outer)
    }

    pub fn inverse(&self) -> Result<AutomorphismWord> {
        let letters = self.letters.iter().rev().map(|l| l.inverse(self.rank)).collect::<Result<Vec<_>>>()?;
        Ok(AutomorphismWord { rank: self.rank, letters })
    }

    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(AutLetter::is_positive)
    }

    /// Reduced images of the generators; fails once an image exceeds the cap.
    pub fn images(&self) -> Result<Vec<FreeWord>> {
        let mut words: Vec<FreeWord> = (0..self.rank).map(|k| vec![gen(k)]).collect();
        for letter in &self.letters {
            let imgs = letter.images(self.rank);
            for w in words.iter_mut() {
                *w = substitute(w, &imgs);
                if w.len() > IMAGE_LENGTH_CAP {
                    return Err(OslError::OutOfDomain("automorphism image too long to expand".into()));
                }
            }
        }
        Ok(words)
    }

    /// Signed exponent-sum matrix, multiplied in application order.
    pub fn abelianization(&self) -> IntMatrix {
        self.letters
            .iter()
            .fold(IntMatrix::identity(self.rank), |acc, l| acc.mul(&l.abelianization(self.rank)).expect("rank"))
    }

    /// Unsigned crossing counts of the reduced generator images.
    pub fn transition_matrix(&self) -> Result<IntMatrix> {
        if self.is_positive() {
            return Ok(self.abelianization());
        }
        Ok(word_matrix(&self.images()?, self.rank, false))
    }

    pub fn is_identity_abelianization(&self) -> bool {
        self.abelianization() == IntMatrix::identity(self.rank)
    }
}

/// True iff the two lists of images agree after reduction.
pub fn same_images(a: &[FreeWord], b: &[FreeWord]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| reduce(x) == reduce(y))
}

pub fn identity_images(rank: usize) -> Vec<FreeWord> {
    (0..rank).map(|k| vec![gen(k)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_images_and_matrix() {
        let w = AutomorphismWord::fold(2, 0, 1).unwrap();
        assert_eq!(w.images().unwrap(), vec![vec![2, 1], vec![2]]);
        assert_eq!(w.transition_matrix().unwrap(), IntMatrix::from_i64(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn application_order_product() {
        let w = AutomorphismWord::fold(2, 0, 1).unwrap().then(&AutomorphismWord::fold(2, 1, 0).unwrap());
        // X1 -> X2 X1 -> (X1 X2) X1 ; X2 -> X1 X2
        assert_eq!(w.images().unwrap(), vec![vec![1, 2, 1], vec![1, 2]]);
        assert_eq!(w.transition_matrix().unwrap(), IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
    }

    #[test]
    fn inverse_cancels() {
        let w = AutomorphismWord::fold(3, 0, 1).unwrap().then(&AutomorphismWord::fold(3, 2, 0).unwrap());
        let both = w.then(&w.inverse().unwrap());
        assert_eq!(both.images().unwrap(), identity_images(3));
        assert!(both.is_identity_abelianization());
    }

    #[test]
    fn substitution_inverse() {
        let images = vec![vec![1, 2, 1], vec![1, 2], vec![3, 1]];
        let s = AutLetter::Substitution { images: images.clone() };
        let inv = s.inverse(3).unwrap();
        let w = AutomorphismWord { rank: 3, letters: vec![s, inv] };
        assert_eq!(w.images().unwrap(), identity_images(3));
    }

    #[test]
    fn non_basis_is_rejected() {
        let s = AutLetter::Substitution { images: vec![vec![1, 2], vec![2, 1]] };
        assert!(s.inverse(2).is_err());
    }
}
