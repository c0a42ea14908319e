//! C ABI over `astrocity`.
//!
//! Conventions:
//! - every fallible call returns an [`AstrocityStatus`]; on failure the
//!   message is available from [`astrocity_last_error`] on the same thread;
//! - strings passed in are NUL-terminated UTF-8 and are only borrowed;
//! - strings handed out must be released with [`astrocity_string_free`];
//! - handles are released with their matching `_free` function. Passing NULL
//!   to a `_free` function is a no-op.
//!
//! The header `include/astrocity.h` is generated by the build script.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use astrocity::crs::builtin_crs;
use astrocity::issue::error_count;
use astrocity::model::{read_document, read_document_unchecked, upgrade_document, write_document, CityDocument};
use astrocity::recipe::{load_recipe, run_recipe};
use astrocity::registry::{builtin_registry, emit_extension_schema, registry_from_schema, ExtensionRegistry};
use astrocity::validator::validate;
use astrocity::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AstrocityStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, grid or recipe text.
    Parse = 3,
    Io = 4,
    /// Unknown CRS or coordinates outside the projection domain.
    Domain = 5,
    /// Input rejected by a precondition, builder or registry check.
    Invalid = 6,
    /// Upgrade requested on a document that is already current.
    AlreadyCurrent = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// Opaque extension registry.
pub struct AstrocityRegistry(ExtensionRegistry);

/// Opaque CityJSON document.
pub struct AstrocityDocument(CityDocument);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> AstrocityStatus {
    match e {
        Error::Parse { .. } | Error::DimensionMismatch(_) => AstrocityStatus::Parse,
        Error::Io { .. } => AstrocityStatus::Io,
        Error::OutOfDomain(_) | Error::UnknownCrs(_) => AstrocityStatus::Domain,
        Error::AlreadyCurrent(_) => AstrocityStatus::AlreadyCurrent,
        _ => AstrocityStatus::Invalid,
    }
}

struct Fail(AstrocityStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AstrocityStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AstrocityStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)");
            AstrocityStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(AstrocityStatus::NullArgument, format!("`{what}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(AstrocityStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(AstrocityStatus::NullArgument, format!("`{what}` is NULL")))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(AstrocityStatus::Internal, "output contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn astrocity_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn astrocity_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The built-in 3DSpace registry. Never NULL.
#[no_mangle]
pub extern "C" fn astrocity_registry_builtin() -> *mut AstrocityRegistry {
    Box::into_raw(Box::new(AstrocityRegistry(builtin_registry())))
}

/// Load a registry from extension schema text.
#[no_mangle]
pub unsafe extern "C" fn astrocity_registry_from_schema(
    schema_json: *const c_char,
    out_registry: *mut *mut AstrocityRegistry,
) -> AstrocityStatus {
    guard(|| {
        let slot = out(out_registry, "out_registry")?;
        let reg = registry_from_schema(text(schema_json, "schema_json")?)?;
        *slot = Box::into_raw(Box::new(AstrocityRegistry(reg)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn astrocity_registry_free(registry: *mut AstrocityRegistry) {
    if !registry.is_null() {
        drop(Box::from_raw(registry));
    }
}

/// Extension schema text for `registry`.
#[no_mangle]
pub unsafe extern "C" fn astrocity_registry_emit_schema(
    registry: *const AstrocityRegistry,
    out_json: *mut *mut c_char,
) -> AstrocityStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        let reg = registry
            .as_ref()
            .ok_or_else(|| Fail(AstrocityStatus::NullArgument, "`registry` is NULL".into()))?;
        *slot = c_string(emit_extension_schema(&reg.0)?)?;
        Ok(())
    })
}

/// Project planetocentric degrees to metres under a built-in CRS such as
/// `"IAU_2015:30185"`.
#[no_mangle]
pub unsafe extern "C" fn astrocity_project_forward(
    crs: *const c_char,
    lat: f64,
    lon: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> AstrocityStatus {
    guard(|| {
        let spec = builtin_crs(text(crs, "crs")?)?;
        let (x, y) = spec.forward(lat, lon)?;
        *out(out_x, "out_x")? = x;
        *out(out_y, "out_y")? = y;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn astrocity_project_inverse(
    crs: *const c_char,
    x: f64,
    y: f64,
    out_lat: *mut f64,
    out_lon: *mut f64,
) -> AstrocityStatus {
    guard(|| {
        let spec = builtin_crs(text(crs, "crs")?)?;
        let (lat, lon) = spec.inverse(x, y)?;
        *out(out_lat, "out_lat")? = lat;
        *out(out_lon, "out_lon")? = lon;
        Ok(())
    })
}

/// Parse a CityJSON document. With `checked` false, structural problems are
/// left for [`astrocity_validate`] to report.
#[no_mangle]
pub unsafe extern "C" fn astrocity_document_read(
    json: *const c_char,
    checked: bool,
    out_document: *mut *mut AstrocityDocument,
) -> AstrocityStatus {
    guard(|| {
        let slot = out(out_document, "out_document")?;
        let s = text(json, "json")?;
        let doc = if checked { read_document(s)? } else { read_document_unchecked(s)? };
        *slot = Box::into_raw(Box::new(AstrocityDocument(doc)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn astrocity_document_write(
    document: *const AstrocityDocument,
    out_json: *mut *mut c_char,
) -> AstrocityStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        let doc = document
            .as_ref()
            .ok_or_else(|| Fail(AstrocityStatus::NullArgument, "`document` is NULL".into()))?;
        *slot = c_string(write_document(&doc.0)?)?;
        Ok(())
    })
}

/// Upgrade a 1.0 document to 2.0 in place. The document is unchanged on
/// failure.
#[no_mangle]
pub unsafe extern "C" fn astrocity_document_upgrade(document: *mut AstrocityDocument) -> AstrocityStatus {
    guard(|| {
        let doc = out(document, "document")?;
        doc.0 = upgrade_document(doc.0.clone())?;
        Ok(())
    })
}

/// Number of city objects, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn astrocity_document_object_count(document: *const AstrocityDocument) -> usize {
    document.as_ref().map_or(0, |d| d.0.objects.len())
}

#[no_mangle]
pub unsafe extern "C" fn astrocity_document_free(document: *mut AstrocityDocument) {
    if !document.is_null() {
        drop(Box::from_raw(document));
    }
}

/// Validate `document`. `registry` may be NULL for core checks only.
/// `out_report_json` may be NULL; otherwise it receives the issue list as a
/// JSON array.
#[no_mangle]
pub unsafe extern "C" fn astrocity_validate(
    document: *const AstrocityDocument,
    registry: *const AstrocityRegistry,
    strict: bool,
    out_error_count: *mut usize,
    out_report_json: *mut *mut c_char,
) -> AstrocityStatus {
    guard(|| {
        let doc = document
            .as_ref()
            .ok_or_else(|| Fail(AstrocityStatus::NullArgument, "`document` is NULL".into()))?;
        let count = out(out_error_count, "out_error_count")?;
        let issues = validate(&doc.0, registry.as_ref().map(|r| &r.0), strict);
        if let Some(slot) = out_report_json.as_mut() {
            let json = serde_json::to_string(&issues).map_err(|e| Fail(AstrocityStatus::Internal, e.to_string()))?;
            *slot = c_string(json)?;
        }
        *count = error_count(&issues);
        Ok(())
    })
}

/// Run the recipe at `path` with the built-in registry. `seed` may be NULL to
/// use the recipe's own seed.
#[no_mangle]
pub unsafe extern "C" fn astrocity_build_recipe(
    path: *const c_char,
    seed: *const u64,
    out_document: *mut *mut AstrocityDocument,
) -> AstrocityStatus {
    guard(|| {
        let slot = out(out_document, "out_document")?;
        let (recipe, base) = load_recipe(Path::new(text(path, "path")?))?;
        let doc = run_recipe(&recipe, &base, &builtin_registry(), seed.as_ref().copied())?;
        *slot = Box::into_raw(Box::new(AstrocityDocument(doc)));
        Ok(())
    })
}
