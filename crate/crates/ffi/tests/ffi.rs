use osl_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { osl_string_free(s) };
    out
}

fn last_error() -> String {
    take(osl_last_error_message())
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn matrices_and_errors() {
    let mut m = [0i64; 9];
    assert_eq!(unsafe { osl_fold_matrix(1, 2, 3, m.as_mut_ptr(), 9) }, OslStatus::Ok);
    assert_eq!(m, [1, -1, 0, 0, 1, 0, 0, 0, 1]);
    assert_eq!(unsafe { osl_unfold_matrix(1, 2, 3, m.as_mut_ptr(), 9) }, OslStatus::Ok);
    assert_eq!(m, [1, 1, 0, 0, 1, 0, 0, 0, 1]);
    assert_eq!(unsafe { osl_fold_matrix(2, 2, 3, m.as_mut_ptr(), 9) }, OslStatus::Domain);
    assert!(last_error().starts_with("invalid-indices"));
    assert_eq!(unsafe { osl_fold_matrix(1, 2, 3, m.as_mut_ptr(), 4) }, OslStatus::Domain);
    assert_eq!(unsafe { osl_fold_matrix(1, 2, 3, ptr::null_mut(), 9) }, OslStatus::NullArgument);
    assert_eq!(last_error(), "null argument: out");
}

#[test]
fn brun_expand_json() {
    let mut out = ptr::null_mut();
    let v = c("5/10,3/10,2/10");
    assert_eq!(unsafe { osl_brun_expand(v.as_ptr(), 1, &mut out) }, OslStatus::Ok);
    let j: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(j["iterates"][1], serde_json::json!(["1/5", "3/10", "1/5"]));
    let bad = c("1/2,x");
    assert_eq!(unsafe { osl_brun_expand(bad.as_ptr(), 1, &mut out) }, OslStatus::Usage);
    assert!(last_error().starts_with("parse"));
}

#[test]
fn ray_round_trip() {
    let mut ray = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_generate(2, 12, OslRayMode::Theta, &mut ray) }, OslStatus::Ok);
    assert_eq!(unsafe { osl_ray_fold_count(ray) }, 12);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_to_json(ray, &mut s) }, OslStatus::Ok);
    let json = c(&take(s));
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_load(json.as_ptr(), &mut again) }, OslStatus::Ok);

    let mut extent = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_extent(again, &mut extent) }, OslStatus::Ok);
    let extent = c(&take(extent));
    let zero = c("0");
    let mut d = 0.0;
    assert_eq!(unsafe { osl_ray_lipschitz(again, zero.as_ptr(), extent.as_ptr(), &mut d) }, OslStatus::Ok);
    assert!(d > 0.0);

    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_certify(again, zero.as_ptr(), extent.as_ptr(), &mut cert) }, OslStatus::Ok);
    let cert: serde_json::Value = serde_json::from_str(&take(cert)).unwrap();
    assert_eq!(cert["folds"].as_array().unwrap().len(), 12);

    let target = c(r#"{"graph":{"vertices":2,"edges":[[0,1],[0,1],[0,1]]},"lengths":["3","2","5"]}"#);
    let eps = c("1/20");
    let mut hit = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_find(again, target.as_ptr(), ptr::null(), eps.as_ptr(), 1000, &mut hit) }, OslStatus::Ok);
    let hit: serde_json::Value = serde_json::from_str(&take(hit)).unwrap();
    assert!(hit["distance"].as_f64().unwrap() < 0.05);

    let tiny = c("1e-40");
    let mut miss = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_find(again, target.as_ptr(), ptr::null(), tiny.as_ptr(), 1, &mut miss) }, OslStatus::NotFound);
    assert!(miss.is_null());

    unsafe {
        osl_ray_free(ray);
        osl_ray_free(again);
        osl_ray_free(ptr::null_mut());
    }
    assert_eq!(unsafe { osl_ray_fold_count(ptr::null()) }, 0);
    let mut unused = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_extent(ptr::null(), &mut unused) }, OslStatus::NullArgument);
}

#[test]
fn tampered_ray_is_rejected() {
    let mut ray = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_generate(2, 4, OslRayMode::Full, &mut ray) }, OslStatus::Ok);
    let mut s = ptr::null_mut();
    unsafe { osl_ray_to_json(ray, &mut s) };
    let mut v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    v["horizon"] = serde_json::json!(5);
    let bad = c(&v.to_string());
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { osl_ray_load(bad.as_ptr(), &mut out) }, OslStatus::Usage);
    assert!(out.is_null());
    unsafe { osl_ray_free(ray) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(osl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/osl.h")).unwrap();
    for name in [
        "typedef struct OslRay OslRay;",
        "OSL_STATUS_NOT_FOUND = 4",
        "osl_last_error_message(void)",
        "void osl_string_free(char *s);",
        "osl_ray_generate(size_t rank,",
        "struct OslRay **out);",
        "osl_ray_find(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_the_cdylib() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib_dir = deps.parent().unwrap();
    assert!(lib_dir.join("libosl_ffi.so").exists() || lib_dir.join("libosl_ffi.dylib").exists(), "cdylib not built in {lib_dir:?}");
    let dir = std::env::temp_dir().join(format!("osl-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "osl.h"
int main(void) {
    OslRay *ray = NULL;
    if (osl_ray_generate(2, 8, OSL_RAY_MODE_THETA, &ray) != OSL_STATUS_OK) return 1;
    char *extent = NULL;
    if (osl_ray_extent(ray, &extent) != OSL_STATUS_OK) return 2;
    double d = 0.0;
    if (osl_ray_lipschitz(ray, "0", extent, &d) != OSL_STATUS_OK || d <= 0.0) return 3;
    int64_t m[4];
    if (osl_fold_matrix(1, 1, 2, m, 4) != OSL_STATUS_DOMAIN) return 4;
    char *msg = osl_last_error_message();
    printf("%zu %s\n", osl_ray_fold_count(ray), msg);
    osl_string_free(msg);
    osl_string_free(extent);
    osl_ray_free(ray);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("main");
    let status = std::process::Command::new("cc")
        .arg(&src)
        .arg(format!("-I{}/include", env!("CARGO_MANIFEST_DIR")))
        .arg(format!("-L{}", lib_dir.display()))
        .arg("-losl_ffi")
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("a C compiler");
    assert!(status.success());
    let run = std::process::Command::new(&exe).env("LD_LIBRARY_PATH", lib_dir).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8(run.stdout).unwrap().starts_with("8 invalid-indices"));
}
