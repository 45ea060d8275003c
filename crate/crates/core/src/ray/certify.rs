//! Lipschitz distances along a ray and witness-loop certificates.

use super::build::{check_fold, GateEvidence, Ray, RayFold};
use crate::error::{OslError, Result};
use crate::graphs::fold::FoldKind;
use crate::graphs::graph::{is_positive_half, rev, Turn};
use crate::numeric::{self, format_rational, Float, Q};
use num::Signed;
use serde::Serialize;

/// `vol_s / vol_t` of the unprojectivized family.
pub fn volume_ratio(ray: &Ray, s: &Q, t: &Q) -> Result<Q> {
    if s > t {
        return Err(OslError::TimeOutOfRange(format!("{} > {}", format_rational(s), format_rational(t))));
    }
    Ok(ray.volume_at(s)? / ray.volume_at(t)?)
}

/// Folds whose open interval meets `[s, t]`.
fn folds_between(ray: &Ray, s: &Q, t: &Q) -> std::ops::Range<usize> {
    let first = ray.folds.partition_point(|f| f.end_time() <= *s);
    let last = ray.folds.partition_point(|f| f.time < *t);
    first..last.max(first)
}

pub fn lipschitz_along(ray: &Ray, s: &Q, t: &Q) -> Result<Float> {
    lipschitz_along_with_precision(ray, s, t, numeric::default_precision())
}

/// `log(vol_s / vol_t)`, refused when a fold in between was not certified.
pub fn lipschitz_along_with_precision(ray: &Ray, s: &Q, t: &Q, bits: usize) -> Result<Float> {
    let ratio = volume_ratio(ray, s, t)?;
    if let Some(k) = folds_between(ray, s, t).find(|&k| !ray.folds[k].legal) {
        return Err(OslError::NonGeodesic { fold: k });
    }
    numeric::ln_rational(&ratio, bits)
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub from: String,
    pub to: String,
    pub volume_ratio: String,
    pub distance: String,
    pub folds: Vec<GateEvidence>,
}

/// Recomputes every fold map on `[s, t]` and checks that the positive basis
/// loop stays legal and positive with unchanged length, so that it is a
/// witness for the whole interval.
pub fn certify_geodesic(ray: &Ray, s: &Q, t: &Q) -> Result<Certificate> {
    certify_geodesic_with_precision(ray, s, t, numeric::default_precision())
}

pub fn certify_geodesic_with_precision(ray: &Ray, s: &Q, t: &Q, bits: usize) -> Result<Certificate> {
    let ratio = volume_ratio(ray, s, t)?;
    let folds = folds_between(ray, s, t).map(|k| check_fold(&ray.folds[k], k)).collect::<Result<Vec<_>>>()?;
    let distance = numeric::ln_rational(&ratio, bits)?;
    Ok(Certificate {
        from: format_rational(s),
        to: format_rational(t),
        volume_ratio: format_rational(&ratio),
        distance: numeric::format_float(&distance, bits * 3 / 10),
        folds,
    })
}

/// A copy of `ray` in which one fold is replaced by a partial fold of a
/// direction-mismatched turn crossed by the witness. Returns the copy and the
/// index of the replaced fold, or `None` if the witness never crosses a turn
/// of two distinct edges.
pub fn inject_mismatch(ray: &Ray) -> Option<(Ray, usize)> {
    for (k, f) in ray.folds.iter().enumerate() {
        let w = f.witness();
        for i in 0..w.len() {
            let (incoming, outgoing) = (rev(w[i]), w[(i + 1) % w.len()]);
            if incoming >> 1 == outgoing >> 1 || is_positive_half(incoming) == is_positive_half(outgoing) {
                continue;
            }
            let amount = f.start.length(incoming).clone().min(f.start.length(outgoing).clone()) / Q::from_integer(2.into());
            if !amount.is_positive() {
                continue;
            }
            let mut out = ray.clone();
            let bad = RayFold { kind: FoldKind::Partial, a: incoming, b: outgoing, amount, legal: false, ..f.clone() };
            debug_assert!(!Turn::new(incoming, outgoing).is_direction_matching());
            out.folds[k] = RayFold { legal: check_fold(&bad, k).is_ok(), ..bad };
            return Some((out, k));
        }
    }
    None
}

/// Exact additivity `ratio(r, t) = ratio(r, s) · ratio(s, t)`.
pub fn additive(ray: &Ray, r: &Q, s: &Q, t: &Q) -> Result<bool> {
    Ok(volume_ratio(ray, r, t)? == volume_ratio(ray, r, s)? * volume_ratio(ray, s, t)?)
}
