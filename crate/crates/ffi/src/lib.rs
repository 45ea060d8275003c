//! C ABI over `osl`. Every fallible call returns an [`OslStatus`]; on failure
//! the message is available from [`osl_last_error_message`]. Strings handed
//! out by this library are released with [`osl_string_free`], rays with
//! [`osl_ray_free`].

use osl::brun::{brun_expand, pf_sample_seeded};
use osl::graphs::graph::Turn;
use osl::matrices::{fold_matrix, unfold_matrix, IntMatrix, PosVector};
use osl::numeric::{float_to_f64, format_rational, parse_rational, Q};
use osl::ray::search::translation_identity;
use osl::ray::{certify_geodesic, density_search, lipschitz_along, Ray, RayConfig, RayMode, Target, TangentDatum};
use osl::serial::{matrix_rows, point_from_json, RayFile};
use osl::{Category, OslError};
use serde_json::json;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OslStatus {
    Ok = 0,
    Usage = 2,
    Domain = 3,
    NotFound = 4,
    NullArgument = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OslRayMode {
    Full = 0,
    Theta = 1,
}

/// A generated ray together with its recipe.
pub struct OslRay {
    file: RayFile,
    ray: Ray,
}

enum Failure {
    Null(&'static str),
    Lib(OslError),
}

impl From<OslError> for Failure {
    fn from(e: OslError) -> Self {
        Failure::Lib(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OslStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OslStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null argument: {what}"));
            OslStatus::NullArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            match e.category() {
                Category::Usage => OslStatus::Usage,
                Category::Domain => OslStatus::Domain,
                Category::NotFound => OslStatus::NotFound,
            }
        }
        Err(_) => {
            set_error("internal panic".into());
            OslStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Lib(OslError::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn rational(p: *const c_char, what: &'static str) -> Result<Q, Failure> {
    Ok(parse_rational(text(p, what)?)?)
}

unsafe fn vector(p: *const c_char, what: &'static str) -> Result<PosVector, Failure> {
    let v = text(p, what)?.split(',').map(parse_rational).collect::<osl::Result<Vec<_>>>()?;
    Ok(PosVector::new(v)?)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
    Ok(())
}

unsafe fn handle<'a>(ray: *const OslRay) -> Result<&'a OslRay, Failure> {
    ray.as_ref().ok_or(Failure::Null("ray"))
}

unsafe fn put_matrix(m: IntMatrix, out: *mut i64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    let n = m.dim();
    if len < n * n {
        return Err(OslError::DimensionMismatch { expected: n * n, found: len }.into());
    }
    for (k, x) in m.rows().into_iter().flatten().enumerate() {
        *out.add(k) = i64::try_from(x).map_err(|_| OslError::OutOfDomain("entry exceeds 64 bits".into()))?;
    }
    Ok(())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn osl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL.
#[no_mangle]
pub extern "C" fn osl_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` is NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn osl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Row-major `T_ij` (1-based) of size `dim × dim` into `out[0..len]`.
///
/// # Safety
/// `out` points to `len` writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn osl_fold_matrix(i: usize, j: usize, dim: usize, out: *mut i64, len: usize) -> OslStatus {
    guard(|| put_matrix(fold_matrix(i, j, dim)?, out, len))
}

/// Row-major `M_ij` (1-based), as [`osl_fold_matrix`].
///
/// # Safety
/// `out` points to `len` writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn osl_unfold_matrix(i: usize, j: usize, dim: usize, out: *mut i64, len: usize) -> OslStatus {
    guard(|| put_matrix(unfold_matrix(i, j, dim)?, out, len))
}

/// Brun expansion of a comma-separated rational vector, as JSON.
///
/// # Safety
/// `vec` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_brun_expand(vec: *const c_char, steps: usize, out: *mut *mut c_char) -> OslStatus {
    guard(|| {
        let exp = brun_expand(&vector(vec, "vector")?, steps)?;
        let body = json!({
            "symbols": exp.symbols.iter().map(|s| [s.i, s.j]).collect::<Vec<_>>(),
            "iterates": exp.iterates.iter().map(|v| v.entries().iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "product": matrix_rows(exp.last_product()),
            "degenerate": exp.degenerate,
        });
        put_string(out, body.to_string())
    })
}

/// Positive Brun matrix whose PF eigenvector is within `eps` (ℓ¹) of the target, as JSON.
///
/// # Safety
/// `target` and `eps` are nul-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_pf_sample(target: *const c_char, eps: *const c_char, cap: usize, seed: u64, out: *mut *mut c_char) -> OslStatus {
    guard(|| {
        let t = vector(target, "target")?;
        let s = pf_sample_seeded(&t, &rational(eps, "eps")?, cap, seed)?;
        let body = json!({
            "symbols": s.symbols.iter().map(|x| [x.i, x.j]).collect::<Vec<_>>(),
            "matrix": matrix_rows(&s.matrix),
            "eigenvector": s.pf.eigenvector_f64(),
            "l1_distance": float_to_f64(&s.pf.l1_distance_to(t.entries())),
        });
        put_string(out, body.to_string())
    })
}

/// # Safety
/// `out` is writable; the handle is released with [`osl_ray_free`].
#[no_mangle]
pub unsafe extern "C" fn osl_ray_generate(rank: usize, horizon: usize, mode: OslRayMode, out: *mut *mut OslRay) -> OslStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let mode = match mode {
            OslRayMode::Full => RayMode::Full,
            OslRayMode::Theta => RayMode::Theta,
        };
        let (file, ray) = RayFile::generate(&RayConfig::new(rank, mode), horizon)?;
        *out = Box::into_raw(Box::new(OslRay { file, ray }));
        Ok(())
    })
}

/// Parses a ray file and checks it against its regenerated recipe.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_load(json: *const c_char, out: *mut *mut OslRay) -> OslStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (file, ray) = RayFile::load(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(OslRay { file, ray }));
        Ok(())
    })
}

/// # Safety
/// `ray` is NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_free(ray: *mut OslRay) {
    if !ray.is_null() {
        drop(Box::from_raw(ray));
    }
}

/// # Safety
/// `ray` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_to_json(ray: *const OslRay, out: *mut *mut c_char) -> OslStatus {
    guard(|| put_string(out, handle(ray)?.file.to_json()))
}

/// Number of folds, or 0 for NULL.
///
/// # Safety
/// `ray` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_fold_count(ray: *const OslRay) -> usize {
    ray.as_ref().map_or(0, |r| r.ray.folds.len())
}

/// Ray extent as a `p/q` string.
///
/// # Safety
/// `ray` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_extent(ray: *const OslRay, out: *mut *mut c_char) -> OslStatus {
    guard(|| put_string(out, format_rational(&handle(ray)?.ray.extent())))
}

/// `log(vol_from / vol_to)` rounded to double.
///
/// # Safety
/// `ray` is a live handle; `from`, `to` are nul-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_lipschitz(ray: *const OslRay, from: *const c_char, to: *const c_char, out: *mut f64) -> OslStatus {
    guard(|| {
        let d = lipschitz_along(&handle(ray)?.ray, &rational(from, "from")?, &rational(to, "to")?)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = float_to_f64(&d);
        Ok(())
    })
}

/// Witness certificate on `[from, to]`, as JSON.
///
/// # Safety
/// `ray` is a live handle; `from`, `to` are nul-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_certify(ray: *const OslRay, from: *const c_char, to: *const c_char, out: *mut *mut c_char) -> OslStatus {
    guard(|| {
        let c = certify_geodesic(&handle(ray)?.ray, &rational(from, "from")?, &rational(to, "to")?)?;
        put_string(out, serde_json::to_string(&c).expect("certificates serialize"))
    })
}

/// Density search for a point (JSON) or, with a non-NULL `turn` such as
/// `"+0,-1"`, for a tangent datum. The hit is written as JSON.
///
/// # Safety
/// `ray` is a live handle; strings are nul-terminated (`turn` may be NULL); `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn osl_ray_find(
    ray: *const OslRay,
    target: *const c_char,
    turn: *const c_char,
    eps: *const c_char,
    budget: usize,
    out: *mut *mut c_char,
) -> OslStatus {
    guard(|| {
        let r = &handle(ray)?.ray;
        let point = point_from_json(text(target, "target")?)?;
        let target = if turn.is_null() {
            Target::Point(point)
        } else {
            Target::Tangent(TangentDatum::new(point, Turn::parse(text(turn, "turn")?)?)?)
        };
        let hit = density_search(r, &target, &rational(eps, "eps")?, budget)?;
        let body = json!({
            "fold": hit.fold,
            "milestone": hit.frame,
            "time": format_rational(&hit.time),
            "lengths": hit.lengths.iter().map(format_rational).collect::<Vec<_>>(),
            "distance": hit.distance,
            "scanned": hit.scanned,
            "translation_identity": translation_identity(r, &hit)?,
        });
        put_string(out, body.to_string())
    })
}
