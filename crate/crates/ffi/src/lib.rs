//! C ABI over the `millefeuille` library.
//!
//! Every fallible function returns an [`MfStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and
//! can be fetched with [`mf_last_error_message`]. Structures are opaque
//! handles created from JSON and released with [`mf_structure_free`];
//! strings returned by the library are released with [`mf_string_free`].
//! Boundary points are passed as JSON (`{"x":[..],"xi":"m:{..}"}`) and
//! m-adic points in their text form (`"2:{0:1}"`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use millefeuille::heintze::{
    normalize_for_tree, tent_distance, unit_height, visual_distance, ExpandingStructure, HoroPoint,
};
use millefeuille::madic::{agreement_height, madic_distance, MAdicPoint};
use millefeuille::mille::{boundary_visual, dmax_formula, mille_distance, BoundaryPoint, MillePoint};
use millefeuille::qiclass::qi_equivalent;
use millefeuille::GeomError;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    /// Input outside the domain of the operation.
    Domain = 4,
    /// Dimensions or bases of the arguments do not match.
    Mismatch = 5,
    Panic = 6,
}

/// Opaque expanding structure.
pub struct MfStructure {
    inner: ExpandingStructure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MfStatus, String);

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        let status = match e {
            GeomError::Parse(_) | GeomError::DigitOutOfRange { .. } | GeomError::InvalidBase(_) => {
                MfStatus::Parse
            }
            GeomError::BaseMismatch(..) | GeomError::DimensionMismatch { .. } => MfStatus::Mismatch,
            _ => MfStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MfStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> MfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn madic(p: *const c_char, what: &str) -> Result<MAdicPoint, Failure> {
    Ok(text(p, what)?.parse()?)
}

unsafe fn boundary_point(p: *const c_char, what: &str) -> Result<BoundaryPoint, Failure> {
    serde_json::from_str(text(p, what)?).map_err(|e| Failure(MfStatus::Parse, format!("{what}: {e}")))
}

unsafe fn vector<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn structure<'a>(p: *const MfStructure) -> Result<&'a ExpandingStructure, Failure> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("structure"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Copy of the last error message of this thread, or null when there is
/// none. Release with [`mf_string_free`].
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a structure from JSON, e.g.
/// `{"layers":[{"alpha":1.0,"size":1}],"snowflake":1.0}`.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_structure_from_json(json: *const c_char, out: *mut *mut MfStructure) -> MfStatus {
    guard(|| {
        let s = text(json, "json")?;
        let inner: ExpandingStructure =
            serde_json::from_str(s).map_err(|e| Failure(MfStatus::Parse, e.to_string()))?;
        write(out, Box::into_raw(Box::new(MfStructure { inner })))
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mf_structure_free(s: *mut MfStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension `n` of the structure, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_structure_dim(s: *const MfStructure) -> usize {
    s.as_ref().map_or(0, |s| s.inner.dim())
}

/// Rescales the structure so that `alpha_1 = ln m`; writes the new handle
/// and the factor applied.
///
/// # Safety
/// `s` must be a live handle; `out` and `factor` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mf_structure_normalize(
    s: *const MfStructure,
    m: u32,
    out: *mut *mut MfStructure,
    factor: *mut f64,
) -> MfStatus {
    guard(|| {
        let (inner, f) = normalize_for_tree(structure(s)?, m)?;
        if factor.is_null() {
            return Err(null("factor"));
        }
        write(out, Box::into_raw(Box::new(MfStructure { inner })))?;
        write(factor, f)
    })
}

/// `base^{t0}` for m-adic points in text form; `base <= 0` selects the
/// valence `m`.
///
/// # Safety
/// `a`, `b` must be valid C strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_madic_distance(
    a: *const c_char,
    b: *const c_char,
    base: f64,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let x = madic(a, "a")?;
        let y = madic(b, "b")?;
        let base = if base <= 0.0 { x.base() as f64 } else { base };
        write(out, madic_distance(&x, &y, base)?.value())
    })
}

/// Agreement height of two m-adic points. `*equal` is set to 1 when the
/// points coincide, in which case `*out` is left untouched.
///
/// # Safety
/// `a`, `b` must be valid C strings; `out`, `equal` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mf_agreement_height(
    a: *const c_char,
    b: *const c_char,
    out: *mut i64,
    equal: *mut i32,
) -> MfStatus {
    guard(|| {
        let h = agreement_height(&madic(a, "a")?, &madic(b, "b")?)?;
        write(equal, h.is_none() as i32)?;
        match h {
            Some(h) => write(out, h),
            None => Ok(()),
        }
    })
}

/// # Safety
/// `s` must be a live handle; `x`, `y` arrays of length `n`.
#[no_mangle]
pub unsafe extern "C" fn mf_unit_height(
    s: *const MfStructure,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        write(out, unit_height(e, vector(x, n, "x")?, vector(y, n, "y")?)?)
    })
}

/// # Safety
/// `s` must be a live handle; `x`, `y` arrays of length `n`.
#[no_mangle]
pub unsafe extern "C" fn mf_visual_distance(
    s: *const MfStructure,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        write(out, visual_distance(e, vector(x, n, "x")?, vector(y, n, "y")?)?)
    })
}

/// Tent distance between `(x, tx)` and `(y, ty)`.
///
/// # Safety
/// `s` must be a live handle; `x`, `y` arrays of length `n`.
#[no_mangle]
pub unsafe extern "C" fn mf_tent_distance(
    s: *const MfStructure,
    x: *const f64,
    tx: f64,
    y: *const f64,
    ty: f64,
    n: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        let p = HoroPoint::new(vector(x, n, "x")?.to_vec(), tx);
        let q = HoroPoint::new(vector(y, n, "y")?.to_vec(), ty);
        write(out, tent_distance(e, &p, &q)?)
    })
}

/// Millefeuille distance between `(x, xi, tx)` and `(y, eta, ty)`.
///
/// # Safety
/// `s` must be a live handle; `x`, `y` arrays of length `n`; `xi`, `eta`
/// valid C strings.
#[no_mangle]
pub unsafe extern "C" fn mf_mille_distance(
    s: *const MfStructure,
    m: u32,
    x: *const f64,
    xi: *const c_char,
    tx: f64,
    y: *const f64,
    eta: *const c_char,
    ty: f64,
    n: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        let p = MillePoint::new(vector(x, n, "x")?.to_vec(), madic(xi, "xi")?, tx);
        let q = MillePoint::new(vector(y, n, "y")?.to_vec(), madic(eta, "eta")?, ty);
        write(out, mille_distance(e, m, &p, &q)?)
    })
}

/// `max(D_M, m^{agreement height})` for boundary points given as JSON.
///
/// # Safety
/// `s` must be a live handle; `a`, `b` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn mf_dmax_formula(
    s: *const MfStructure,
    m: u32,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        write(out, dmax_formula(e, m, &boundary_point(a, "a")?, &boundary_point(b, "b")?)?)
    })
}

/// Visual distance on `R^n x Q_m`; the structure must be normalized
/// (see [`mf_structure_normalize`]).
///
/// # Safety
/// `s` must be a live handle; `a`, `b` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn mf_boundary_visual(
    s: *const MfStructure,
    m: u32,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let e = structure(s)?;
        write(out, boundary_visual(e, m, &boundary_point(a, "a")?, &boundary_point(b, "b")?)?)
    })
}

/// Quasi-isometry verdict as a JSON string; release with
/// [`mf_string_free`]. `*verdict_code` receives 0 for equivalent, 1 for
/// not equivalent and 2 for inconclusive.
///
/// # Safety
/// `s`, `sp` must be live handles; `json`, `verdict_code` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mf_classify(
    s: *const MfStructure,
    m: u64,
    sp: *const MfStructure,
    mp: u64,
    verdict_code: *mut i32,
    json: *mut *mut c_char,
) -> MfStatus {
    guard(|| {
        let v = qi_equivalent(structure(s)?, m, structure(sp)?, mp);
        if json.is_null() {
            return Err(null("json"));
        }
        let code = match v.equivalent {
            millefeuille::qiclass::Equivalence::Yes => 0,
            millefeuille::qiclass::Equivalence::No => 1,
            millefeuille::qiclass::Equivalence::Inconclusive => 2,
        };
        let text = serde_json::to_string(&v).map_err(|e| Failure(MfStatus::Domain, e.to_string()))?;
        let c = CString::new(text).map_err(|e| Failure(MfStatus::Domain, e.to_string()))?;
        write(verdict_code, code)?;
        write(json, c.into_raw())
    })
}
