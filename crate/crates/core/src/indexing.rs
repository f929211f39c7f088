//! Basic indexing (views) and advanced indexing (copies).

use crate::array::{ArrayHandle, ElemType, Shape, Strides};
use crate::broadcast::{broadcast_all, broadcast_to};
use crate::error::{ArrayError, Result};

/// One axis of a basic index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexEntry {
    /// Selects one position and drops the axis. Negative counts from the end.
    Int(isize),
    /// Conventional `start:stop:step` slice; bounds clamp to the axis.
    Slice {
        start: Option<isize>,
        stop: Option<isize>,
        step: isize,
    },
    Full,
}

impl IndexEntry {
    pub fn slice(start: Option<isize>, stop: Option<isize>, step: isize) -> IndexEntry {
        IndexEntry::Slice { start, stop, step }
    }

    pub fn range(start: isize, stop: isize) -> IndexEntry {
        IndexEntry::slice(Some(start), Some(stop), 1)
    }
}

/// Per-axis entries; axes past the end are implicitly [`IndexEntry::Full`].
pub type IndexSpec = [IndexEntry];

/// Normalized `(start, len)` of a slice over an axis of extent `dim`.
pub fn normalize_slice(start: Option<isize>, stop: Option<isize>, step: isize, dim: usize) -> Result<(isize, usize)> {
    if step == 0 {
        return Err(ArrayError::argument("slice step cannot be zero"));
    }
    let dim = dim as isize;
    let clamp = |v: isize, lo: isize, hi: isize| v.clamp(lo, hi);
    let wrap = |v: isize| if v < 0 { v + dim } else { v };
    let (start, stop) = if step > 0 {
        (
            start.map_or(0, |s| clamp(wrap(s), 0, dim)),
            stop.map_or(dim, |s| clamp(wrap(s), 0, dim)),
        )
    } else {
        (
            start.map_or(dim - 1, |s| clamp(wrap(s), -1, dim - 1)),
            stop.map_or(-1, |s| clamp(wrap(s), -1, dim - 1)),
        )
    };
    let len = if step > 0 && stop > start {
        (stop - start + step - 1) / step
    } else if step < 0 && start > stop {
        (start - stop - step - 1) / -step
    } else {
        0
    };
    Ok((start, len as usize))
}

fn normalize_int(i: isize, dim: usize, axis: usize) -> Result<usize> {
    let d = dim as isize;
    let j = if i < 0 { i + d } else { i };
    if j < 0 || j >= d {
        return Err(ArrayError::index(format!(
            "index {i} is out of bounds for axis {axis} with size {dim}"
        )));
    }
    Ok(j as usize)
}

/// View selected by `spec`; shares `a`'s buffer.
pub fn slice_view(a: &ArrayHandle, spec: &IndexSpec) -> Result<ArrayHandle> {
    if spec.len() > a.ndim() {
        return Err(ArrayError::index(format!(
            "too many indices: array is {}-dimensional, but {} were given",
            a.ndim(),
            spec.len()
        )));
    }
    let mut offset = a.offset() as isize;
    let mut dims = Vec::with_capacity(a.ndim());
    let mut steps = Vec::with_capacity(a.ndim());
    for axis in 0..a.ndim() {
        let dim = a.dims()[axis];
        let stride = a.strides().0[axis];
        match spec.get(axis).copied().unwrap_or(IndexEntry::Full) {
            IndexEntry::Int(i) => {
                offset += normalize_int(i, dim, axis)? as isize * stride;
            }
            IndexEntry::Full => {
                dims.push(dim);
                steps.push(stride);
            }
            IndexEntry::Slice { start, stop, step } => {
                let (s, len) = normalize_slice(start, stop, step, dim)?;
                if len > 0 {
                    offset += s * stride;
                }
                dims.push(len);
                steps.push(step * stride);
            }
        }
    }
    a.view_with(offset as usize, Shape(dims), Strides(steps), true)
}

/// Elements where `mask` is true, in C order, as a fresh 1-d array.
pub fn boolean_select(a: &ArrayHandle, mask: &ArrayHandle) -> Result<ArrayHandle> {
    if mask.elem_type() != ElemType::Bool {
        return Err(ArrayError::type_err(format!("mask must be Bool, got {}", mask.elem_type())));
    }
    if mask.shape() != a.shape() {
        return Err(ArrayError::index(format!(
            "boolean mask of shape {} does not match array of shape {}",
            mask.shape(),
            a.shape()
        )));
    }
    let w = a.elem_type().byte_width();
    let mut bytes = Vec::new();
    for (src, m) in a.offsets().zip(mask.offsets()) {
        if unsafe { mask.read_at::<bool>(m as usize) } {
            let p = unsafe { a.base_ptr().add(src as usize) };
            bytes.extend_from_slice(unsafe { std::slice::from_raw_parts(p, w) });
        }
    }
    let n = bytes.len() / w;
    ArrayHandle::from_bytes(bytes, Shape(vec![n]), a.elem_type())
}

/// Pointwise lookup `a[i0[t], ..., in[t]]` over the broadcast index shape.
pub fn gather(a: &ArrayHandle, index_arrays: &[ArrayHandle]) -> Result<ArrayHandle> {
    if index_arrays.len() != a.ndim() {
        return Err(ArrayError::index(format!(
            "gather needs {} index arrays, got {}",
            a.ndim(),
            index_arrays.len()
        )));
    }
    if let Some(bad) = index_arrays.iter().find(|ix| ix.elem_type() != ElemType::Int64) {
        return Err(ArrayError::type_err(format!(
            "index arrays must be Int64, got {}",
            bad.elem_type()
        )));
    }
    let shape = broadcast_all(index_arrays.iter().map(|ix| ix.shape()))?;
    let views = index_arrays
        .iter()
        .map(|ix| broadcast_to(ix, &shape))
        .collect::<Result<Vec<_>>>()?;
    let mut iters: Vec<_> = views.iter().map(|v| v.offsets()).collect();
    let w = a.elem_type().byte_width();
    let count = shape.element_count();
    let mut bytes = Vec::with_capacity(count * w);
    for _ in 0..count {
        let mut addr = a.offset() as isize;
        for (axis, (view, it)) in views.iter().zip(iters.iter_mut()).enumerate() {
            let at = it.next().expect("broadcast views share a shape");
            let i = unsafe { view.read_at::<i64>(at as usize) };
            let dim = a.dims()[axis];
            let i = isize::try_from(i).map_err(|_| ArrayError::index(format!("index {i} is out of bounds")))?;
            addr += normalize_int(i, dim, axis)? as isize * a.strides().0[axis];
        }
        let p = unsafe { a.base_ptr().add(addr as usize) };
        bytes.extend_from_slice(unsafe { std::slice::from_raw_parts(p, w) });
    }
    ArrayHandle::from_bytes(bytes, shape, a.elem_type())
}

/// Overwrites the view selected by `spec` with `values` broadcast to it.
pub fn assign(a: &ArrayHandle, spec: &IndexSpec, values: &ArrayHandle) -> Result<()> {
    if !a.is_writable() {
        return Err(ArrayError::ReadOnly);
    }
    if !values.elem_type().promotes_into(a.elem_type()) {
        return Err(ArrayError::type_err(format!(
            "cannot assign {} values into an array of {}",
            values.elem_type(),
            a.elem_type()
        )));
    }
    let view = slice_view(a, spec)?;
    // Materialize first so overlapping source and destination stay correct.
    let src = broadcast_to(values, view.shape())?.astype(a.elem_type());
    let w = a.elem_type().byte_width();
    for (i, dst) in view.offsets().enumerate() {
        unsafe {
            std::ptr::copy_nonoverlapping(src.base_ptr().add(i * w), a.base_ptr().add(dst as usize), w);
        }
    }
    Ok(())
}
