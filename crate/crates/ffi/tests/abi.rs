use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use astrocity_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = astrocity_last_error();
    assert!(!p.is_null(), "no error message recorded");
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    astrocity_string_free(p);
    s
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const V1: &str = r#"{"type":"CityJSON","version":"1.0",
  "metadata":{"referenceSystem":"urn:ogc:def:crs:EPSG::7415","datasetTitle":"t","presentLoDs":{"1":1}},
  "transform":{"scale":[0.001,0.001,0.001],"translate":[0,0,0]},
  "CityObjects":{"a":{"type":"Building","attributes":{"k":1},
    "geometry":[{"type":"MultiSurface","lod":1,"boundaries":[[[0,1,2]]]}]}},
  "vertices":[[0,0,0],[1000,0,0],[0,1000,0]]}"#;

#[test]
fn projection_round_trip() {
    let crs = cstr("IAU_2015:30185");
    let (mut x, mut y) = (0.0, 0.0);
    let s = unsafe { astrocity_project_forward(crs.as_ptr(), 44.12142, -19.51174, &mut x, &mut y) };
    assert_eq!(s, AstrocityStatus::Ok);
    assert!((x - -396367.0196).abs() < 0.5 && (y - 173854.6813).abs() < 0.5, "{x} {y}");
    assert!(astrocity_last_error().is_null());
    let (mut lat, mut lon) = (0.0, 0.0);
    let s = unsafe { astrocity_project_inverse(crs.as_ptr(), x, y, &mut lat, &mut lon) };
    assert_eq!(s, AstrocityStatus::Ok);
    assert!((lat - 44.12142).abs() < 1e-9 && (lon - -19.51174).abs() < 1e-9);
}

#[test]
fn status_codes() {
    let crs = cstr("IAU_2015:30185");
    let mut x = 0.0;
    let s = unsafe { astrocity_project_forward(crs.as_ptr(), 0.0, 0.0, &mut x, ptr::null_mut()) };
    assert_eq!(s, AstrocityStatus::NullArgument);
    assert!(last_error().contains("out_y"));

    let s = unsafe { astrocity_project_forward(ptr::null(), 0.0, 0.0, &mut x, &mut x.clone()) };
    assert_eq!(s, AstrocityStatus::NullArgument);

    let bad = [0xffu8, 0xfe, 0];
    let mut y = 0.0;
    let s = unsafe { astrocity_project_forward(bad.as_ptr().cast(), 0.0, 0.0, &mut x, &mut y) };
    assert_eq!(s, AstrocityStatus::InvalidUtf8);

    let s = unsafe { astrocity_project_forward(crs.as_ptr(), 91.0, 0.0, &mut x, &mut y) };
    assert_eq!(s, AstrocityStatus::Domain);

    let mut doc = ptr::null_mut();
    let junk = cstr("{not json");
    let s = unsafe { astrocity_document_read(junk.as_ptr(), true, &mut doc) };
    assert_eq!(s, AstrocityStatus::Parse);
    assert!(doc.is_null());

    let path = cstr("/nonexistent/recipe.json");
    let s = unsafe { astrocity_build_recipe(path.as_ptr(), ptr::null(), &mut doc) };
    assert_eq!(s, AstrocityStatus::Io);
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        astrocity_document_free(ptr::null_mut());
        astrocity_registry_free(ptr::null_mut());
        astrocity_string_free(ptr::null_mut());
        assert_eq!(astrocity_document_object_count(ptr::null()), 0);
    }
}

#[test]
fn schema_emit_and_reload() {
    unsafe {
        let reg = astrocity_registry_builtin();
        let mut text = ptr::null_mut();
        assert_eq!(astrocity_registry_emit_schema(reg, &mut text), AstrocityStatus::Ok);
        let schema = take(text);
        assert!(schema.contains("+SpaceRestriction"));
        let mut reloaded = ptr::null_mut();
        let c = cstr(&schema);
        assert_eq!(astrocity_registry_from_schema(c.as_ptr(), &mut reloaded), AstrocityStatus::Ok);
        assert!(!reloaded.is_null());
        astrocity_registry_free(reloaded);
        astrocity_registry_free(reg);
    }
}

#[test]
fn document_upgrade_write_validate() {
    unsafe {
        let mut doc = ptr::null_mut();
        let json = cstr(V1);
        assert_eq!(astrocity_document_read(json.as_ptr(), true, &mut doc), AstrocityStatus::Ok);
        assert_eq!(astrocity_document_object_count(doc), 1);
        assert_eq!(astrocity_document_upgrade(doc), AstrocityStatus::Ok);
        assert_eq!(astrocity_document_upgrade(doc), AstrocityStatus::AlreadyCurrent);
        assert!(last_error().contains("2.0"));

        let mut out = ptr::null_mut();
        assert_eq!(astrocity_document_write(doc, &mut out), AstrocityStatus::Ok);
        let text = take(out);
        assert!(text.contains(r#""version":"2.0""#));
        assert!(text.contains("https://www.opengis.net/def/crs/EPSG/0/7415"));

        let mut errors = usize::MAX;
        let mut report = ptr::null_mut();
        assert_eq!(astrocity_validate(doc, ptr::null(), false, &mut errors, &mut report), AstrocityStatus::Ok);
        assert_eq!(errors, 0);
        assert_eq!(take(report), "[]");

        // the built-in registry expects the extension to be declared
        let reg = astrocity_registry_builtin();
        assert_eq!(astrocity_validate(doc, reg, false, &mut errors, ptr::null_mut()), AstrocityStatus::Ok);
        assert_eq!(errors, 1);
        astrocity_registry_free(reg);
        astrocity_document_free(doc);
    }
}

#[test]
fn unchecked_read_defers_to_validation() {
    let broken = V1.replace("[[[0,1,2]]]", "[[[0,1,7]]]");
    let json = cstr(&broken);
    unsafe {
        let mut doc = ptr::null_mut();
        assert_eq!(astrocity_document_read(json.as_ptr(), true, &mut doc), AstrocityStatus::Parse);
        assert_eq!(astrocity_document_read(json.as_ptr(), false, &mut doc), AstrocityStatus::Ok);
        let mut errors = 0;
        let mut report = ptr::null_mut();
        assert_eq!(astrocity_validate(doc, ptr::null(), false, &mut errors, &mut report), AstrocityStatus::Ok);
        assert!(errors >= 1);
        assert!(take(report).contains("VTX_RANGE"));
        astrocity_document_free(doc);
    }
}

#[test]
fn build_demo_recipe() {
    let path = cstr(workspace().join("recipes/mars.recipe").to_str().unwrap());
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        let seed = 7u64;
        assert_eq!(astrocity_build_recipe(path.as_ptr(), &seed, &mut a), AstrocityStatus::Ok);
        assert_eq!(astrocity_build_recipe(path.as_ptr(), &seed, &mut b), AstrocityStatus::Ok);
        assert_eq!(astrocity_document_object_count(a), 3);
        let (mut ta, mut tb) = (ptr::null_mut(), ptr::null_mut());
        astrocity_document_write(a, &mut ta);
        astrocity_document_write(b, &mut tb);
        assert_eq!(take(ta), take(tb));

        let reg = astrocity_registry_builtin();
        let mut errors = usize::MAX;
        assert_eq!(astrocity_validate(a, reg, true, &mut errors, ptr::null_mut()), AstrocityStatus::Ok);
        assert_eq!(errors, 0);
        astrocity_registry_free(reg);
        astrocity_document_free(a);
        astrocity_document_free(b);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/astrocity.h")).unwrap();
    for name in [
        "astrocity_last_error",
        "astrocity_string_free",
        "astrocity_registry_builtin",
        "astrocity_registry_from_schema",
        "astrocity_registry_free",
        "astrocity_registry_emit_schema",
        "astrocity_project_forward",
        "astrocity_project_inverse",
        "astrocity_document_read",
        "astrocity_document_write",
        "astrocity_document_upgrade",
        "astrocity_document_object_count",
        "astrocity_document_free",
        "astrocity_validate",
        "astrocity_build_recipe",
        "ASTROCITY_STATUS_ALREADY_CURRENT",
        "typedef struct AstrocityDocument AstrocityDocument",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C program against the header and static library when
/// a C compiler is installed.
#[test]
fn c_program_links_against_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler `{cc}`");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // the test binary lives in target/<profile>/deps; the library one level up
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libastrocity_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
