//! C ABI over `ndkern`.
//!
//! Arrays and generators cross the boundary as opaque pointers that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`NdkStatus`]; on failure `ndk_last_error` gives a message that
//! stays valid until the next failing call on the same thread. Panics are
//! caught and reported as [`NdkStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndkern::io::{load_path, save_path, NdarError};
use ndkern::random::{Distribution, Generator, SeedSequence};
use ndkern::{ArrayError, ArrayHandle, ElemType, UfuncId};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdkStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    Broadcast = 3,
    Index = 4,
    Argument = 5,
    Type = 6,
    ReadOnly = 7,
    Reduction = 8,
    Alloc = 9,
    NotImplemented = 10,
    Init = 11,
    Io = 12,
    Format = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdkElemType {
    Bool = 0,
    Int64 = 1,
    Float64 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdkUfunc {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
    Arctan2 = 4,
    Maximum = 5,
    Sin = 6,
    Log = 7,
    Exp = 8,
    Neg = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdkDistribution {
    Uniform = 0,
    Normal = 1,
    Exponential = 2,
    Integers = 3,
}

/// Opaque array handle.
pub struct NdkArray {
    inner: ArrayHandle,
}

/// Opaque random generator (PCG64 underneath).
pub struct NdkGenerator {
    inner: Generator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', "?")).expect("interior nulls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(NdkStatus, String);

impl From<ArrayError> for Failure {
    fn from(e: ArrayError) -> Failure {
        let status = match e {
            ArrayError::Shape(_) => NdkStatus::Shape,
            ArrayError::Broadcast { .. } => NdkStatus::Broadcast,
            ArrayError::Index(_) => NdkStatus::Index,
            ArrayError::Argument(_) => NdkStatus::Argument,
            ArrayError::Type(_) => NdkStatus::Type,
            ArrayError::ReadOnly => NdkStatus::ReadOnly,
            ArrayError::Reduction(_) => NdkStatus::Reduction,
            ArrayError::Alloc(_) => NdkStatus::Alloc,
            ArrayError::NotImplemented { .. } => NdkStatus::NotImplemented,
            ArrayError::Init(_) => NdkStatus::Init,
        };
        Failure(status, e.to_string())
    }
}

impl From<NdarError> for Failure {
    fn from(e: NdarError) -> Failure {
        let status = match e {
            NdarError::Io(_) => NdkStatus::Io,
            _ => NdkStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NdkStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NdkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NdkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            NdkStatus::Panic
        }
    }
}

unsafe fn array_ref<'a>(a: *const NdkArray, what: &str) -> Result<&'a ArrayHandle, Failure> {
    a.as_ref().map(|a| &a.inner).ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn dims_arg(dims: *const usize, ndim: usize) -> Result<Vec<usize>, Failure> {
    Ok(slice_arg(dims, ndim, "dims")?.to_vec())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(NdkStatus::Argument, "path is not valid UTF-8".into()))
}

unsafe fn emit(out: *mut *mut NdkArray, a: ArrayHandle) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(NdkArray { inner: a }));
    Ok(())
}

unsafe fn fill_out<T: Copy>(src: &[T], out: *mut T, cap: usize) -> Result<(), Failure> {
    if src.len() > cap {
        return Err(Failure(
            NdkStatus::BufferTooSmall,
            format!("need room for {} values, got {cap}", src.len()),
        ));
    }
    if !src.is_empty() {
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

fn elem_from(e: ElemType) -> NdkElemType {
    match e {
        ElemType::Bool => NdkElemType::Bool,
        ElemType::Int64 => NdkElemType::Int64,
        ElemType::Float64 => NdkElemType::Float64,
    }
}

fn ufunc_from(op: NdkUfunc) -> UfuncId {
    match op {
        NdkUfunc::Add => UfuncId::Add,
        NdkUfunc::Sub => UfuncId::Sub,
        NdkUfunc::Mul => UfuncId::Mul,
        NdkUfunc::Div => UfuncId::Div,
        NdkUfunc::Arctan2 => UfuncId::Arctan2,
        NdkUfunc::Maximum => UfuncId::Maximum,
        NdkUfunc::Sin => UfuncId::Sin,
        NdkUfunc::Log => UfuncId::Log,
        NdkUfunc::Exp => UfuncId::Exp,
        NdkUfunc::Neg => UfuncId::Neg,
    }
}

/// Message for the most recent failure on this thread (empty if none).
#[no_mangle]
pub extern "C" fn ndk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn ndk_array_from_f64(
    data: *const f64,
    len: usize,
    dims: *const usize,
    ndim: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let values = slice_arg(data, len, "data")?.to_vec();
        emit(out, ArrayHandle::from_f64(values, dims_arg(dims, ndim)?)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ndk_array_from_i64(
    data: *const i64,
    len: usize,
    dims: *const usize,
    ndim: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let values = slice_arg(data, len, "data")?.to_vec();
        emit(out, ArrayHandle::from_i64(values, dims_arg(dims, ndim)?)?)
    })
}

/// Bool data as one byte per element; any nonzero byte is true.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_from_bool(
    data: *const u8,
    len: usize,
    dims: *const usize,
    ndim: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let values = slice_arg(data, len, "data")?.iter().map(|&b| b != 0).collect();
        emit(out, ArrayHandle::from_bool(values, dims_arg(dims, ndim)?)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ndk_array_free(a: *mut NdkArray) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Returns -1 if `a` is null.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_elem_type(a: *const NdkArray) -> i32 {
    a.as_ref().map_or(-1, |a| elem_from(a.inner.elem_type()) as i32)
}

/// Returns 0 if `a` is null.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_ndim(a: *const NdkArray) -> usize {
    a.as_ref().map_or(0, |a| a.inner.ndim())
}

/// Returns 0 if `a` is null.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_count(a: *const NdkArray) -> usize {
    a.as_ref().map_or(0, |a| a.inner.element_count())
}

#[no_mangle]
pub unsafe extern "C" fn ndk_array_dims(a: *const NdkArray, out: *mut usize, cap: usize) -> NdkStatus {
    guard(|| fill_out(array_ref(a, "array")?.dims(), out, cap))
}

/// Byte strides, one per dimension.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_strides(a: *const NdkArray, out: *mut isize, cap: usize) -> NdkStatus {
    guard(|| fill_out(array_ref(a, "array")?.strides().steps(), out, cap))
}

/// Copies every element in C order, converted to double.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_to_f64(a: *const NdkArray, out: *mut f64, cap: usize) -> NdkStatus {
    guard(|| fill_out(&array_ref(a, "array")?.to_f64_vec(), out, cap))
}

/// Copies every element in C order, converted to int64.
#[no_mangle]
pub unsafe extern "C" fn ndk_array_to_i64(a: *const NdkArray, out: *mut i64, cap: usize) -> NdkStatus {
    guard(|| fill_out(&array_ref(a, "array")?.to_i64_vec(), out, cap))
}

/// Sums over `axes` (all axes when `axes` is null and `naxes` is 0).
#[no_mangle]
pub unsafe extern "C" fn ndk_sum(
    a: *const NdkArray,
    axes: *const usize,
    naxes: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let a = array_ref(a, "array")?;
        let axes = if axes.is_null() { None } else { Some(slice_arg(axes, naxes, "axes")?) };
        emit(out, ndkern::ufunc::sum(a, axes)?)
    })
}

/// Float64 mean over `axes` (all axes when `axes` is null).
#[no_mangle]
pub unsafe extern "C" fn ndk_mean(
    a: *const NdkArray,
    axes: *const usize,
    naxes: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let a = array_ref(a, "array")?;
        let axes = if axes.is_null() { None } else { Some(slice_arg(axes, naxes, "axes")?) };
        emit(out, ndkern::ufunc::mean(a, axes)?)
    })
}

/// Applies a ufunc; `b` must be null for unary ops and non-null for binary ones.
#[no_mangle]
pub unsafe extern "C" fn ndk_elementwise(
    op: NdkUfunc,
    a: *const NdkArray,
    b: *const NdkArray,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let a = array_ref(a, "a")?;
        let b = b.as_ref().map(|b| &b.inner);
        emit(out, ndkern::elementwise(ufunc_from(op), a, b)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ndk_matmul(a: *const NdkArray, b: *const NdkArray, out: *mut *mut NdkArray) -> NdkStatus {
    guard(|| emit(out, ndkern::matmul(array_ref(a, "a")?, array_ref(b, "b")?)?))
}

/// Reversed axes when `perm` is null.
#[no_mangle]
pub unsafe extern "C" fn ndk_transpose(
    a: *const NdkArray,
    perm: *const usize,
    nperm: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let a = array_ref(a, "array")?;
        let perm = if perm.is_null() { None } else { Some(slice_arg(perm, nperm, "perm")?) };
        emit(out, a.transpose(perm)?)
    })
}

/// A view when the layout allows it, otherwise a copy.
#[no_mangle]
pub unsafe extern "C" fn ndk_reshape(
    a: *const NdkArray,
    dims: *const usize,
    ndim: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let a = array_ref(a, "array")?;
        emit(out, a.reshape(dims_arg(dims, ndim)?)?.array)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ndk_save(a: *const NdkArray, path: *const c_char) -> NdkStatus {
    guard(|| Ok(save_path(array_ref(a, "array")?, path_arg(path)?)?))
}

#[no_mangle]
pub unsafe extern "C" fn ndk_load(path: *const c_char, out: *mut *mut NdkArray) -> NdkStatus {
    guard(|| emit(out, load_path(path_arg(path)?)?))
}

/// PCG64 generator seeded from entropy `[seed]`.
#[no_mangle]
pub unsafe extern "C" fn ndk_generator_new(seed: u64, out: *mut *mut NdkGenerator) -> NdkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Generator::from_seed_sequence(&SeedSequence::from_seed(seed));
        *out = Box::into_raw(Box::new(NdkGenerator { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ndk_generator_free(g: *mut NdkGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ndk_generator_next_u64(g: *mut NdkGenerator, out: *mut u64) -> NdkStatus {
    guard(|| {
        let g = g.as_mut().ok_or_else(|| null("generator"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.inner.bit_generator().next_u64();
        Ok(())
    })
}

/// Fills a new array of shape `dims`; `low`/`high` only apply to integers.
#[no_mangle]
pub unsafe extern "C" fn ndk_generator_sample(
    g: *mut NdkGenerator,
    dist: NdkDistribution,
    low: i64,
    high: i64,
    dims: *const usize,
    ndim: usize,
    out: *mut *mut NdkArray,
) -> NdkStatus {
    guard(|| {
        let g = g.as_mut().ok_or_else(|| null("generator"))?;
        let dist = match dist {
            NdkDistribution::Uniform => Distribution::Uniform,
            NdkDistribution::Normal => Distribution::Normal,
            NdkDistribution::Exponential => Distribution::Exponential,
            NdkDistribution::Integers => Distribution::Integers { low, high },
        };
        emit(out, g.inner.sample_array(dist, dims_arg(dims, ndim)?)?)
    })
}
