//! The strided array data structure.
//!
//! An [`ArrayHandle`] is a typed, shaped window onto a reference-counted byte
//! buffer. The element at index tuple `t` lives at byte
//! `offset + Σ t[k] * strides[k]`; every view-producing operation only
//! rewrites `(offset, shape, strides)` and keeps the buffer.

use std::fmt;
use std::ptr::NonNull;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ArrayError, Result};
use crate::layout;

/// Homogeneous element kind. Ordered by the promotion lattice
/// `Bool < Int64 < Float64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElemType {
    Bool,
    Int64,
    Float64,
}

impl ElemType {
    pub const fn byte_width(self) -> usize {
        match self {
            ElemType::Bool => 1,
            ElemType::Int64 | ElemType::Float64 => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ElemType::Bool => "Bool",
            ElemType::Int64 => "Int64",
            ElemType::Float64 => "Float64",
        }
    }

    /// Smallest type both operands promote to.
    pub fn promote(self, other: ElemType) -> ElemType {
        self.max(other)
    }

    /// Whether a value of `self` may be stored into an array of `target`
    /// without leaving the lattice.
    pub fn promotes_into(self, target: ElemType) -> bool {
        self <= target
    }
}

impl fmt::Display for ElemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single element value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn elem_type(self) -> ElemType {
        match self {
            Scalar::Bool(_) => ElemType::Bool,
            Scalar::Int(_) => ElemType::Int64,
            Scalar::Float(_) => ElemType::Float64,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Bool(b) => b as i64 as f64,
            Scalar::Int(i) => i as f64,
            Scalar::Float(x) => x,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Scalar::Bool(b) => b as i64,
            Scalar::Int(i) => i,
            Scalar::Float(x) => x as i64,
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Scalar::Bool(b) => b,
            Scalar::Int(i) => i != 0,
            Scalar::Float(x) => x != 0.0,
        }
    }

    /// Unchecked conversion with `as`-cast semantics.
    pub fn cast(self, target: ElemType) -> Scalar {
        match target {
            ElemType::Bool => Scalar::Bool(self.as_bool()),
            ElemType::Int64 => Scalar::Int(self.as_i64()),
            ElemType::Float64 => Scalar::Float(self.as_f64()),
        }
    }

    /// Conversion that only succeeds when the value survives the round trip.
    pub fn cast_exact(self, target: ElemType) -> Result<Scalar> {
        let out = self.cast(target);
        let back = out.cast(self.elem_type());
        let same = match (self, back) {
            (Scalar::Float(a), Scalar::Float(b)) => a == b || (a.is_nan() && b.is_nan() && target == ElemType::Float64),
            (a, b) => a == b,
        };
        if same {
            Ok(out)
        } else {
            Err(ArrayError::type_err(format!("{self} is not representable as {target}")))
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

/// Rust types that can live in an array buffer.
pub trait Element: Copy + Send + Sync + 'static {
    const ELEM: ElemType;

    /// # Safety
    /// `ptr` must point to `ELEM.byte_width()` readable bytes.
    unsafe fn read(ptr: *const u8) -> Self;

    /// # Safety
    /// `ptr` must point to `ELEM.byte_width()` writable bytes.
    unsafe fn write(self, ptr: *mut u8);

    fn to_f64(self) -> f64;
    fn to_i64(self) -> i64;
    fn from_scalar(s: Scalar) -> Self;
    fn into_scalar(self) -> Scalar;
}

impl Element for bool {
    const ELEM: ElemType = ElemType::Bool;

    unsafe fn read(ptr: *const u8) -> Self {
        *ptr != 0
    }

    unsafe fn write(self, ptr: *mut u8) {
        *ptr = self as u8;
    }

    fn to_f64(self) -> f64 {
        self as i64 as f64
    }

    fn to_i64(self) -> i64 {
        self as i64
    }

    fn from_scalar(s: Scalar) -> Self {
        s.as_bool()
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Bool(self)
    }
}

impl Element for i64 {
    const ELEM: ElemType = ElemType::Int64;

    unsafe fn read(ptr: *const u8) -> Self {
        std::ptr::read_unaligned(ptr as *const i64)
    }

    unsafe fn write(self, ptr: *mut u8) {
        std::ptr::write_unaligned(ptr as *mut i64, self)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn to_i64(self) -> i64 {
        self
    }

    fn from_scalar(s: Scalar) -> Self {
        s.as_i64()
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Int(self)
    }
}

impl Element for f64 {
    const ELEM: ElemType = ElemType::Float64;

    unsafe fn read(ptr: *const u8) -> Self {
        std::ptr::read_unaligned(ptr as *const f64)
    }

    unsafe fn write(self, ptr: *mut u8) {
        std::ptr::write_unaligned(ptr as *mut f64, self)
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn to_i64(self) -> i64 {
        self as i64
    }

    fn from_scalar(s: Scalar) -> Self {
        s.as_f64()
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }
}

/// Per-axis extents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Self {
        Shape(dims.into())
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn ndim(&self) -> usize {
        self.0.len()
    }

    /// Product of extents; 1 for the 0-d shape.
    pub fn element_count(&self) -> usize {
        self.0.iter().product()
    }

    pub(crate) fn checked_element_count(&self) -> Option<usize> {
        self.0.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }
}

fn write_tuple<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    write!(f, "(")?;
    for (i, d) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{d}")?;
    }
    if items.len() == 1 {
        write!(f, ",")?;
    }
    write!(f, ")")
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl From<Vec<usize>> for Shape {
    fn from(v: Vec<usize>) -> Self {
        Shape(v)
    }
}

impl From<&[usize]> for Shape {
    fn from(v: &[usize]) -> Self {
        Shape(v.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for Shape {
    fn from(v: [usize; N]) -> Self {
        Shape(v.to_vec())
    }
}

/// Per-axis signed byte steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strides(pub Vec<isize>);

impl Strides {
    pub fn steps(&self) -> &[isize] {
        &self.0
    }
}

impl fmt::Display for Strides {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl<const N: usize> From<[isize; N]> for Strides {
    fn from(v: [isize; N]) -> Self {
        Strides(v.to_vec())
    }
}

/// Memory layout order for freshly computed strides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    /// Row-major: the last axis varies fastest.
    #[default]
    C,
    /// Column-major: the first axis varies fastest.
    F,
}

/// Dense strides for `shape` with elements `byte_width` bytes wide.
pub fn compute_strides(shape: &Shape, byte_width: usize, order: Order) -> Strides {
    let n = shape.ndim();
    let mut steps = vec![0isize; n];
    let mut acc = byte_width as isize;
    match order {
        Order::C => {
            for k in (0..n).rev() {
                steps[k] = acc;
                acc = acc.wrapping_mul(shape.0[k] as isize);
            }
        }
        Order::F => {
            for k in 0..n {
                steps[k] = acc;
                acc = acc.wrapping_mul(shape.0[k] as isize);
            }
        }
    }
    Strides(steps)
}

/// Fixed-size byte storage shared by every handle onto it.
///
/// Reads may happen from any number of threads. Writes require the caller to
/// hold exclusive access to the buffer; there is no internal locking.
pub(crate) struct Buffer {
    ptr: NonNull<u8>,
    len: usize,
}

// Raw storage with caller-synchronized writes.
unsafe impl Send for Buffer {}
unsafe impl Sync for Buffer {}

impl Buffer {
    fn zeroed(len: usize) -> Result<Arc<Buffer>> {
        let mut v: Vec<u8> = Vec::new();
        v.try_reserve_exact(len)
            .map_err(|_| ArrayError::Alloc(format!("{len} bytes")))?;
        v.resize(len, 0);
        Ok(Arc::new(Buffer::from_boxed(v.into_boxed_slice())))
    }

    fn from_boxed(bytes: Box<[u8]>) -> Buffer {
        let len = bytes.len();
        let raw = Box::into_raw(bytes) as *mut u8;
        Buffer {
            ptr: NonNull::new(raw).expect("box pointer is non-null"),
            len,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn as_ptr(&self) -> *mut u8 {
        self.ptr.as_ptr()
    }
}

impl Drop for Buffer {
    fn drop(&mut self) {
        unsafe {
            drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(
                self.ptr.as_ptr(),
                self.len,
            )));
        }
    }
}

impl fmt::Debug for Buffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Buffer").field("len", &self.len).finish()
    }
}

/// Whether [`ArrayHandle::reshape`] aliased the source or copied it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReshapeKind {
    View,
    Copy,
}

#[derive(Debug, Clone)]
pub struct Reshaped {
    pub array: ArrayHandle,
    pub kind: ReshapeKind,
}

/// A view onto a shared byte buffer: element type, shape, strides and offset.
#[derive(Clone)]
pub struct ArrayHandle {
    buf: Arc<Buffer>,
    offset: usize,
    elem: ElemType,
    shape: Shape,
    strides: Strides,
    writable: bool,
}

impl ArrayHandle {
    fn alloc(shape: Shape, elem: ElemType) -> Result<ArrayHandle> {
        let bytes = shape
            .checked_element_count()
            .and_then(|n| n.checked_mul(elem.byte_width()))
            .filter(|&b| b <= isize::MAX as usize)
            .ok_or_else(|| ArrayError::Alloc(format!("array of shape {shape} and type {elem}")))?;
        let buf = Buffer::zeroed(bytes)?;
        let strides = compute_strides(&shape, elem.byte_width(), Order::C);
        Ok(ArrayHandle {
            buf,
            offset: 0,
            elem,
            shape,
            strides,
            writable: true,
        })
    }

    /// Builds a C-contiguous array taking ownership of packed native-endian bytes.
    pub(crate) fn from_bytes(bytes: Vec<u8>, shape: Shape, elem: ElemType) -> Result<ArrayHandle> {
        let expected = shape
            .checked_element_count()
            .and_then(|n| n.checked_mul(elem.byte_width()));
        if expected != Some(bytes.len()) {
            return Err(ArrayError::shape(format!(
                "{} bytes cannot hold shape {shape} of {elem}",
                bytes.len()
            )));
        }
        let strides = compute_strides(&shape, elem.byte_width(), Order::C);
        Ok(ArrayHandle {
            buf: Arc::new(Buffer::from_boxed(bytes.into_boxed_slice())),
            offset: 0,
            elem,
            shape,
            strides,
            writable: true,
        })
    }

    /// Fresh C-contiguous array with every element set to `fill`.
    pub fn make_dense(shape: impl Into<Shape>, elem: ElemType, fill: Scalar) -> Result<ArrayHandle> {
        let fill = fill.cast_exact(elem)?;
        let a = Self::alloc(shape.into(), elem)?;
        match fill {
            Scalar::Bool(false) | Scalar::Int(0) => {}
            Scalar::Float(x) if x.to_bits() == 0 => {}
            _ => {
                let w = elem.byte_width();
                let base = a.buf.as_ptr();
                for i in 0..a.element_count() {
                    unsafe { write_scalar(base.add(i * w), elem, fill) };
                }
            }
        }
        Ok(a)
    }

    pub fn zeros(shape: impl Into<Shape>, elem: ElemType) -> Result<ArrayHandle> {
        Self::alloc(shape.into(), elem)
    }

    /// Lays `values` out in C order. Each value must be exactly representable
    /// in `elem`.
    pub fn from_values(values: &[Scalar], shape: impl Into<Shape>, elem: ElemType) -> Result<ArrayHandle> {
        let shape = shape.into();
        if shape.checked_element_count() != Some(values.len()) {
            return Err(ArrayError::shape(format!(
                "cannot lay out {} values as shape {shape}",
                values.len()
            )));
        }
        let a = Self::alloc(shape, elem)?;
        let w = elem.byte_width();
        let base = a.buf.as_ptr();
        for (i, v) in values.iter().enumerate() {
            let v = v.cast_exact(elem)?;
            unsafe { write_scalar(base.add(i * w), elem, v) };
        }
        Ok(a)
    }

    pub fn from_vec<T: Element>(values: Vec<T>, shape: impl Into<Shape>) -> Result<ArrayHandle> {
        let shape = shape.into();
        if shape.checked_element_count() != Some(values.len()) {
            return Err(ArrayError::shape(format!(
                "cannot lay out {} values as shape {shape}",
                values.len()
            )));
        }
        let a = Self::alloc(shape, T::ELEM)?;
        let w = T::ELEM.byte_width();
        let base = a.buf.as_ptr();
        for (i, v) in values.into_iter().enumerate() {
            unsafe { v.write(base.add(i * w)) };
        }
        Ok(a)
    }

    pub fn from_f64(values: Vec<f64>, shape: impl Into<Shape>) -> Result<ArrayHandle> {
        Self::from_vec(values, shape)
    }

    pub fn from_i64(values: Vec<i64>, shape: impl Into<Shape>) -> Result<ArrayHandle> {
        Self::from_vec(values, shape)
    }

    pub fn from_bool(values: Vec<bool>, shape: impl Into<Shape>) -> Result<ArrayHandle> {
        Self::from_vec(values, shape)
    }

    /// 0-d array holding `value`.
    pub fn scalar(value: impl Into<Scalar>) -> ArrayHandle {
        let value = value.into();
        Self::make_dense(Shape::scalar(), value.elem_type(), value).expect("0-d allocation")
    }

    /// `[start, start + step, ...)` stopping before `stop`.
    pub fn arange(start: f64, stop: f64, step: f64) -> Result<ArrayHandle> {
        if step == 0.0 || !step.is_finite() {
            return Err(ArrayError::argument("arange step must be finite and non-zero"));
        }
        let span = ((stop - start) / step).ceil();
        if span.is_nan() {
            return Err(ArrayError::argument("arange bounds must be finite"));
        }
        let len = if span > 0.0 { span as usize } else { 0 };
        let values = (0..len).map(|i| start + i as f64 * step).collect();
        Self::from_f64(values, [len])
    }

    pub fn elem_type(&self) -> ElemType {
        self.elem
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        &self.shape.0
    }

    pub fn strides(&self) -> &Strides {
        &self.strides
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn ndim(&self) -> usize {
        self.shape.ndim()
    }

    pub fn element_count(&self) -> usize {
        self.shape.element_count()
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    /// True when both handles reference the same underlying buffer.
    pub fn shares_buffer(&self, other: &ArrayHandle) -> bool {
        Arc::ptr_eq(&self.buf, &other.buf)
    }

    pub(crate) fn base_ptr(&self) -> *mut u8 {
        self.buf.as_ptr()
    }

    pub fn is_c_contiguous(&self) -> bool {
        if self.element_count() == 0 {
            return true;
        }
        let mut expected = self.elem.byte_width() as isize;
        for k in (0..self.ndim()).rev() {
            let d = self.shape.0[k];
            if d != 1 && self.strides.0[k] != expected {
                return false;
            }
            expected *= d as isize;
        }
        true
    }

    /// Builds another handle onto the same buffer, checking that every
    /// addressable element lies inside it.
    pub(crate) fn view_with(
        &self,
        offset: usize,
        shape: Shape,
        strides: Strides,
        writable: bool,
    ) -> Result<ArrayHandle> {
        if shape.ndim() != strides.0.len() {
            return Err(ArrayError::shape(format!(
                "shape {shape} and strides {strides:?} have different lengths"
            )));
        }
        if shape.element_count() > 0 {
            let (lo, hi) = layout::extent(offset as isize, shape.dims(), strides.steps());
            let w = self.elem.byte_width() as isize;
            if lo < 0 || hi + w > self.buf.len() as isize {
                return Err(ArrayError::index(format!(
                    "view of shape {shape} with strides {strides:?} at offset {offset} exceeds buffer of {} bytes",
                    self.buf.len()
                )));
            }
        }
        Ok(ArrayHandle {
            buf: Arc::clone(&self.buf),
            offset,
            elem: self.elem,
            shape,
            strides,
            writable: self.writable && writable,
        })
    }

    /// Same data, writes rejected.
    pub fn read_only(&self) -> ArrayHandle {
        let mut v = self.clone();
        v.writable = false;
        v
    }

    /// Byte address of the element at `index`.
    pub fn byte_offset_of(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.ndim() {
            return Err(ArrayError::index(format!(
                "expected {} indices, got {}",
                self.ndim(),
                index.len()
            )));
        }
        let mut addr = self.offset as isize;
        for (k, (&i, &d)) in index.iter().zip(self.dims()).enumerate() {
            if i >= d {
                return Err(ArrayError::index(format!(
                    "index {i} is out of bounds for axis {k} with size {d}"
                )));
            }
            addr += i as isize * self.strides.0[k];
        }
        Ok(addr as usize)
    }

    pub fn get(&self, index: &[usize]) -> Result<Scalar> {
        let addr = self.byte_offset_of(index)?;
        Ok(unsafe { self.read_scalar_at(addr) })
    }

    /// Writes `value` at `index`. The value's type must promote into the
    /// array's element type.
    pub fn set(&self, index: &[usize], value: impl Into<Scalar>) -> Result<()> {
        let value = value.into();
        if !self.writable {
            return Err(ArrayError::ReadOnly);
        }
        if !value.elem_type().promotes_into(self.elem) {
            return Err(ArrayError::type_err(format!(
                "cannot store {} into an array of {}",
                value.elem_type(),
                self.elem
            )));
        }
        let addr = self.byte_offset_of(index)?;
        unsafe { write_scalar(self.buf.as_ptr().add(addr), self.elem, value.cast(self.elem)) };
        Ok(())
    }

    /// # Safety
    /// `addr` must be a valid element address inside this handle's buffer.
    pub(crate) unsafe fn read_scalar_at(&self, addr: usize) -> Scalar {
        read_scalar(self.buf.as_ptr().add(addr), self.elem)
    }

    /// # Safety
    /// `addr` must be a valid element address inside this handle's buffer.
    pub(crate) unsafe fn read_at<T: Element>(&self, addr: usize) -> T {
        T::read(self.buf.as_ptr().add(addr))
    }

    /// Byte addresses of every element in C (row-major) order.
    pub fn offsets(&self) -> layout::Offsets {
        layout::Offsets::new(self.offset as isize, self.dims(), self.strides.steps())
    }

    pub fn to_scalars(&self) -> Vec<Scalar> {
        self.offsets()
            .map(|addr| unsafe { self.read_scalar_at(addr as usize) })
            .collect()
    }

    /// Elements in C order, converted with `as`-cast semantics.
    pub fn to_vec<T: Element>(&self) -> Vec<T> {
        if self.elem == T::ELEM && self.is_c_contiguous() {
            let w = self.elem.byte_width();
            let base = self.buf.as_ptr();
            return (0..self.element_count())
                .map(|i| unsafe { T::read(base.add(self.offset + i * w)) })
                .collect();
        }
        self.offsets()
            .map(|addr| T::from_scalar(unsafe { self.read_scalar_at(addr as usize) }))
            .collect()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.to_vec()
    }

    pub fn to_i64_vec(&self) -> Vec<i64> {
        self.to_vec()
    }

    pub fn to_bool_vec(&self) -> Vec<bool> {
        self.to_vec()
    }

    /// Value of a single-element array.
    pub fn item(&self) -> Result<Scalar> {
        if self.element_count() != 1 {
            return Err(ArrayError::shape(format!(
                "item() needs exactly one element, shape is {}",
                self.shape
            )));
        }
        let addr = self.offsets().next().expect("one element") as usize;
        Ok(unsafe { self.read_scalar_at(addr) })
    }

    /// Fresh, writable, C-contiguous copy.
    pub fn copy(&self) -> ArrayHandle {
        self.astype(self.elem)
    }

    /// C-contiguous copy converted to `elem` with `as`-cast semantics.
    pub fn astype(&self, elem: ElemType) -> ArrayHandle {
        let out = Self::alloc(self.shape.clone(), elem).expect("source array already fits in memory");
        let w_out = elem.byte_width();
        let dst = out.buf.as_ptr();
        if elem == self.elem && self.is_c_contiguous() {
            let n = self.element_count() * w_out;
            unsafe { std::ptr::copy_nonoverlapping(self.buf.as_ptr().add(self.offset), dst, n) };
            return out;
        }
        for (i, addr) in self.offsets().enumerate() {
            unsafe {
                let v = self.read_scalar_at(addr as usize).cast(elem);
                write_scalar(dst.add(i * w_out), elem, v);
            }
        }
        out
    }

    /// Same elements under `new_shape`. Contiguous inputs are aliased;
    /// anything else is copied into C order first.
    pub fn reshape(&self, new_shape: impl Into<Shape>) -> Result<Reshaped> {
        let new_shape = new_shape.into();
        if new_shape.checked_element_count() != Some(self.element_count()) {
            return Err(ArrayError::shape(format!(
                "cannot reshape array of shape {} into shape {new_shape}",
                self.shape
            )));
        }
        let strides = compute_strides(&new_shape, self.elem.byte_width(), Order::C);
        if self.is_c_contiguous() {
            let array = self.view_with(self.offset, new_shape, strides, true)?;
            return Ok(Reshaped { array, kind: ReshapeKind::View });
        }
        let copy = self.copy();
        let array = copy.view_with(0, new_shape, strides, true)?;
        Ok(Reshaped { array, kind: ReshapeKind::Copy })
    }

    /// View with axes permuted by `perm` (reversed when `None`).
    pub fn transpose(&self, perm: Option<&[usize]>) -> Result<ArrayHandle> {
        let n = self.ndim();
        let perm: Vec<usize> = match perm {
            Some(p) => p.to_vec(),
            None => (0..n).rev().collect(),
        };
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(ArrayError::argument(format!(
                "{perm:?} is not a permutation of the {n} axes"
            )));
        }
        let shape = Shape(perm.iter().map(|&p| self.shape.0[p]).collect());
        let strides = Strides(perm.iter().map(|&p| self.strides.0[p]).collect());
        Ok(ArrayHandle {
            buf: Arc::clone(&self.buf),
            offset: self.offset,
            elem: self.elem,
            shape,
            strides,
            writable: self.writable,
        })
    }

    /// Identity matrix of Float64.
    pub fn eye(n: usize) -> Result<ArrayHandle> {
        let a = Self::zeros([n, n], ElemType::Float64)?;
        for i in 0..n {
            a.set(&[i, i], 1.0)?;
        }
        Ok(a)
    }
}

impl fmt::Debug for ArrayHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("ArrayHandle");
        s.field("elem", &self.elem)
            .field("shape", &self.shape.0)
            .field("strides", &self.strides.0)
            .field("offset", &self.offset);
        if self.element_count() <= 16 {
            s.field("values", &self.to_scalars());
        }
        s.finish()
    }
}

pub(crate) unsafe fn read_scalar(ptr: *const u8, elem: ElemType) -> Scalar {
    match elem {
        ElemType::Bool => Scalar::Bool(bool::read(ptr)),
        ElemType::Int64 => Scalar::Int(i64::read(ptr)),
        ElemType::Float64 => Scalar::Float(f64::read(ptr)),
    }
}

/// `value` must already be of kind `elem`.
pub(crate) unsafe fn write_scalar(ptr: *mut u8, elem: ElemType, value: Scalar) {
    match elem {
        ElemType::Bool => value.as_bool().write(ptr),
        ElemType::Int64 => value.as_i64().write(ptr),
        ElemType::Float64 => value.as_f64().write(ptr),
    }
}
