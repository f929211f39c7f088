//! Universal functions: broadcasting elementwise kernels, axis reductions
//! and matrix multiplication.
//!
//! Every kernel walks its operands one innermost-axis run at a time. When all
//! operands step by exactly one element along that run, a tight contiguous
//! loop runs; otherwise the generic strided loop does.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::{ArrayHandle, ElemType, Element, Scalar, Shape};
use crate::broadcast::{broadcast_shapes, broadcast_to};
use crate::error::{ArrayError, Result};
use crate::layout::for_each_run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UfuncId {
    Add,
    Sub,
    Mul,
    Div,
    /// `arctan2(x, y)` is the angle whose tangent is `y / x`.
    Arctan2,
    Maximum,
    Sin,
    Log,
    Exp,
    Neg,
}

impl UfuncId {
    pub const ALL: [UfuncId; 10] = [
        UfuncId::Add,
        UfuncId::Sub,
        UfuncId::Mul,
        UfuncId::Div,
        UfuncId::Arctan2,
        UfuncId::Maximum,
        UfuncId::Sin,
        UfuncId::Log,
        UfuncId::Exp,
        UfuncId::Neg,
    ];

    pub fn arity(self) -> usize {
        match self {
            UfuncId::Sin | UfuncId::Log | UfuncId::Exp | UfuncId::Neg => 1,
            _ => 2,
        }
    }

    /// Value `e` with `op(e, x) == x` for every `x`, if one exists.
    pub fn identity(self) -> Option<Scalar> {
        match self {
            UfuncId::Add => Some(Scalar::Int(0)),
            UfuncId::Mul => Some(Scalar::Int(1)),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UfuncId::Add => "add",
            UfuncId::Sub => "sub",
            UfuncId::Mul => "mul",
            UfuncId::Div => "div",
            UfuncId::Arctan2 => "arctan2",
            UfuncId::Maximum => "maximum",
            UfuncId::Sin => "sin",
            UfuncId::Log => "log",
            UfuncId::Exp => "exp",
            UfuncId::Neg => "neg",
        }
    }

    /// Whether the result is always Float64 regardless of operand types.
    fn float_only(self) -> bool {
        matches!(
            self,
            UfuncId::Div | UfuncId::Arctan2 | UfuncId::Sin | UfuncId::Log | UfuncId::Exp
        )
    }

    fn apply_f64(self, x: f64, y: f64) -> f64 {
        match self {
            UfuncId::Add => x + y,
            UfuncId::Sub => x - y,
            UfuncId::Mul => x * y,
            UfuncId::Div => x / y,
            UfuncId::Arctan2 => y.atan2(x),
            UfuncId::Maximum => max_nan(x, y),
            UfuncId::Sin => x.sin(),
            UfuncId::Log => x.ln(),
            UfuncId::Exp => x.exp(),
            UfuncId::Neg => -x,
        }
    }

    fn apply_i64(self, x: i64, y: i64) -> i64 {
        match self {
            UfuncId::Add => x.wrapping_add(y),
            UfuncId::Sub => x.wrapping_sub(y),
            UfuncId::Mul => x.wrapping_mul(y),
            UfuncId::Maximum => Ord::max(x, y),
            UfuncId::Neg => x.wrapping_neg(),
            _ => unreachable!("{self} has no integer loop"),
        }
    }
}

impl fmt::Display for UfuncId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UfuncId {
    type Err = ArrayError;

    fn from_str(s: &str) -> Result<Self> {
        UfuncId::ALL
            .into_iter()
            .find(|u| u.name() == s)
            .ok_or_else(|| ArrayError::argument(format!("unknown ufunc `{s}`")))
    }
}

/// NaN-propagating maximum.
#[inline]
fn max_nan(acc: f64, x: f64) -> f64 {
    if x > acc || x.is_nan() {
        x
    } else {
        acc
    }
}

fn binary_kernel<A: Element, B: Element, R: Element>(
    a: &ArrayHandle,
    b: &ArrayHandle,
    shape: &Shape,
    f: impl Fn(A, B) -> R,
) -> Result<ArrayHandle> {
    let out = ArrayHandle::zeros(shape.clone(), R::ELEM)?;
    let (wa, wb, wr) = (
        A::ELEM.byte_width() as isize,
        B::ELEM.byte_width() as isize,
        R::ELEM.byte_width() as isize,
    );
    let (pa, pb, pr) = (a.base_ptr(), b.base_ptr(), out.base_ptr());
    for_each_run(
        shape.dims(),
        [a.offset() as isize, b.offset() as isize, 0],
        [a.strides().steps(), b.strides().steps(), out.strides().steps()],
        |[sa, sb, sr], len, [da, db, dr]| unsafe {
            let (ra, rb, rr) = (pa.offset(sa), pb.offset(sb), pr.offset(sr));
            if da == wa && db == wb && dr == wr {
                for i in 0..len {
                    let x = A::read(ra.add(i * wa as usize));
                    let y = B::read(rb.add(i * wb as usize));
                    f(x, y).write(rr.add(i * wr as usize));
                }
            } else {
                for i in 0..len as isize {
                    let x = A::read(ra.offset(i * da));
                    let y = B::read(rb.offset(i * db));
                    f(x, y).write(rr.offset(i * dr));
                }
            }
        },
    );
    Ok(out)
}

fn unary_kernel<A: Element, R: Element>(a: &ArrayHandle, f: impl Fn(A) -> R) -> Result<ArrayHandle> {
    let out = ArrayHandle::zeros(a.shape().clone(), R::ELEM)?;
    let (wa, wr) = (A::ELEM.byte_width() as isize, R::ELEM.byte_width() as isize);
    let (pa, pr) = (a.base_ptr(), out.base_ptr());
    for_each_run(
        a.dims(),
        [a.offset() as isize, 0],
        [a.strides().steps(), out.strides().steps()],
        |[sa, sr], len, [da, dr]| unsafe {
            let (ra, rr) = (pa.offset(sa), pr.offset(sr));
            if da == wa && dr == wr {
                for i in 0..len {
                    f(A::read(ra.add(i * wa as usize))).write(rr.add(i * wr as usize));
                }
            } else {
                for i in 0..len as isize {
                    f(A::read(ra.offset(i * da))).write(rr.offset(i * dr));
                }
            }
        },
    );
    Ok(out)
}

macro_rules! dispatch_binary {
    ($a:expr, $b:expr, $shape:expr, $R:ty, $conv:ident, $op:expr) => {{
        let op = $op;
        match ($a.elem_type(), $b.elem_type()) {
            (ElemType::Bool, ElemType::Bool) => binary_kernel($a, $b, $shape, |x: bool, y: bool| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Bool, ElemType::Int64) => binary_kernel($a, $b, $shape, |x: bool, y: i64| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Bool, ElemType::Float64) => binary_kernel($a, $b, $shape, |x: bool, y: f64| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Int64, ElemType::Bool) => binary_kernel($a, $b, $shape, |x: i64, y: bool| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Int64, ElemType::Int64) => binary_kernel($a, $b, $shape, |x: i64, y: i64| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Int64, ElemType::Float64) => binary_kernel($a, $b, $shape, |x: i64, y: f64| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Float64, ElemType::Bool) => binary_kernel($a, $b, $shape, |x: f64, y: bool| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Float64, ElemType::Int64) => binary_kernel($a, $b, $shape, |x: f64, y: i64| -> $R { op(x.$conv(), y.$conv()) }),
            (ElemType::Float64, ElemType::Float64) => binary_kernel($a, $b, $shape, |x: f64, y: f64| -> $R { op(x.$conv(), y.$conv()) }),
        }
    }};
}

macro_rules! dispatch_unary {
    ($a:expr, $R:ty, $conv:ident, $op:expr) => {{
        let op = $op;
        match $a.elem_type() {
            ElemType::Bool => unary_kernel($a, |x: bool| -> $R { op(x.$conv()) }),
            ElemType::Int64 => unary_kernel($a, |x: i64| -> $R { op(x.$conv()) }),
            ElemType::Float64 => unary_kernel($a, |x: f64| -> $R { op(x.$conv()) }),
        }
    }};
}

/// Applies `op` pointwise over the broadcast operands into a fresh
/// C-contiguous array.
///
/// Bool operands promote to Int64. Invalid domains follow IEEE semantics
/// (`1/0 = inf`, `log(-1) = NaN`).
pub fn elementwise(op: UfuncId, a: &ArrayHandle, b: Option<&ArrayHandle>) -> Result<ArrayHandle> {
    match (op.arity(), b) {
        (1, None) => {
            if op.float_only() || a.elem_type() == ElemType::Float64 {
                dispatch_unary!(a, f64, to_f64, |x: f64| op.apply_f64(x, 0.0))
            } else {
                dispatch_unary!(a, i64, to_i64, |x: i64| op.apply_i64(x, 0))
            }
        }
        (2, Some(b)) => {
            let shape = broadcast_shapes(a.shape(), b.shape())?;
            let av = broadcast_to(a, &shape)?;
            let bv = broadcast_to(b, &shape)?;
            let promoted = a.elem_type().promote(b.elem_type());
            if op.float_only() || promoted == ElemType::Float64 {
                dispatch_binary!(&av, &bv, &shape, f64, to_f64, |x: f64, y: f64| op.apply_f64(x, y))
            } else {
                dispatch_binary!(&av, &bv, &shape, i64, to_i64, |x: i64, y: i64| op.apply_i64(x, y))
            }
        }
        (n, _) => Err(ArrayError::argument(format!(
            "{op} takes {n} operand(s), got {}",
            if b.is_some() { 2 } else { 1 }
        ))),
    }
}

/// Sorted, de-duplicated check of an axis list against `ndim`.
pub fn normalize_axes(axes: Option<&[usize]>, ndim: usize) -> Result<Vec<bool>> {
    let mut reduced = vec![axes.is_none(); ndim];
    for &ax in axes.unwrap_or(&[]) {
        if ax >= ndim {
            return Err(ArrayError::argument(format!(
                "axis {ax} is out of bounds for array of dimension {ndim}"
            )));
        }
        if std::mem::replace(&mut reduced[ax], true) {
            return Err(ArrayError::argument(format!("duplicate axis {ax} in reduction")));
        }
    }
    Ok(reduced)
}

trait Accum: Element {
    fn add(self, x: Self) -> Self;
    fn mul(self, x: Self) -> Self;
    fn max(self, x: Self) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn lowest() -> Self;
}

impl Accum for i64 {
    fn add(self, x: i64) -> i64 {
        self.wrapping_add(x)
    }
    fn mul(self, x: i64) -> i64 {
        self.wrapping_mul(x)
    }
    fn max(self, x: i64) -> i64 {
        Ord::max(self, x)
    }
    fn zero() -> i64 {
        0
    }
    fn one() -> i64 {
        1
    }
    fn lowest() -> i64 {
        i64::MIN
    }
}

impl Accum for f64 {
    fn add(self, x: f64) -> f64 {
        self + x
    }
    fn mul(self, x: f64) -> f64 {
        self * x
    }
    fn max(self, x: f64) -> f64 {
        max_nan(self, x)
    }
    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn lowest() -> f64 {
        f64::NEG_INFINITY
    }
}

fn reduce_kernel<A: Element, T: Accum>(
    op: UfuncId,
    a: &ArrayHandle,
    reduced: &[bool],
    out_dims: Vec<usize>,
    conv: impl Fn(A) -> T,
) -> Result<ArrayHandle> {
    let out_count: usize = out_dims.iter().product();
    let init = match op {
        UfuncId::Add => T::zero(),
        UfuncId::Mul => T::one(),
        _ => T::lowest(),
    };
    let fold = |acc: T, x: T| match op {
        UfuncId::Add => acc.add(x),
        UfuncId::Mul => acc.mul(x),
        _ => acc.max(x),
    };
    let mut acc = vec![init; out_count];
    let wa = A::ELEM.byte_width() as isize;
    let base = a.base_ptr();

    if a.is_c_contiguous() && out_count == 1 {
        // Whole-array fold over one contiguous run.
        let start = unsafe { base.add(a.offset()) };
        let mut s = acc[0];
        for i in 0..a.element_count() {
            s = fold(s, conv(unsafe { A::read(start.add(i * wa as usize)) }));
        }
        acc[0] = s;
    } else {
        // Output position per input axis, in elements; 0 along reduced axes.
        let mut out_steps = vec![0isize; a.ndim()];
        let mut step = 1isize;
        for k in (0..a.ndim()).rev() {
            if !reduced[k] {
                out_steps[k] = step;
                step *= a.dims()[k] as isize;
            }
        }
        for_each_run(
            a.dims(),
            [a.offset() as isize, 0],
            [a.strides().steps(), &out_steps],
            |[sa, so], len, [da, dout]| unsafe {
                let ra = base.offset(sa);
                if dout == 0 {
                    let slot = &mut acc[so as usize];
                    let mut s = *slot;
                    if da == wa {
                        for i in 0..len {
                            s = fold(s, conv(A::read(ra.add(i * wa as usize))));
                        }
                    } else {
                        for i in 0..len as isize {
                            s = fold(s, conv(A::read(ra.offset(i * da))));
                        }
                    }
                    *slot = s;
                } else {
                    for i in 0..len as isize {
                        let slot = &mut acc[(so + i * dout) as usize];
                        *slot = fold(*slot, conv(A::read(ra.offset(i * da))));
                    }
                }
            },
        );
    }
    ArrayHandle::from_vec(acc, out_dims)
}

/// Folds `op` (add, mul or maximum) over `axes` (`None` = every axis).
///
/// The result has `ndim - |axes|` dimensions, or keeps reduced axes as 1
/// with `keepdims`. An explicit empty axis list returns a copy.
pub fn reduce(op: UfuncId, a: &ArrayHandle, axes: Option<&[usize]>, keepdims: bool) -> Result<ArrayHandle> {
    if !matches!(op, UfuncId::Add | UfuncId::Mul | UfuncId::Maximum) {
        return Err(ArrayError::argument(format!("{op} cannot be used as a reduction")));
    }
    let reduced = normalize_axes(axes, a.ndim())?;
    if !reduced.iter().any(|&r| r) && axes.is_some() {
        return Ok(a.copy());
    }
    let reduced_count: usize = a
        .dims()
        .iter()
        .zip(&reduced)
        .filter(|(_, &r)| r)
        .map(|(&d, _)| d)
        .product();
    if op == UfuncId::Maximum && reduced_count == 0 {
        return Err(ArrayError::Reduction(
            "zero-size reduction with maximum, which has no identity".into(),
        ));
    }
    let out_dims: Vec<usize> = a
        .dims()
        .iter()
        .zip(&reduced)
        .filter(|(_, &r)| !r)
        .map(|(&d, _)| d)
        .collect();
    let out = match a.elem_type() {
        ElemType::Bool => reduce_kernel(op, a, &reduced, out_dims, |x: bool| x as i64)?,
        ElemType::Int64 => reduce_kernel(op, a, &reduced, out_dims, |x: i64| x)?,
        ElemType::Float64 => reduce_kernel(op, a, &reduced, out_dims, |x: f64| x)?,
    };
    if keepdims {
        let kept: Vec<usize> = a
            .dims()
            .iter()
            .zip(&reduced)
            .map(|(&d, &r)| if r { 1 } else { d })
            .collect();
        return Ok(out.reshape(kept)?.array);
    }
    Ok(out)
}

pub fn sum(a: &ArrayHandle, axes: Option<&[usize]>) -> Result<ArrayHandle> {
    reduce(UfuncId::Add, a, axes, false)
}

/// Float64 sum divided by the number of reduced elements; empty reductions
/// give NaN.
pub fn mean(a: &ArrayHandle, axes: Option<&[usize]>) -> Result<ArrayHandle> {
    let reduced = normalize_axes(axes, a.ndim())?;
    let count: usize = a
        .dims()
        .iter()
        .zip(&reduced)
        .filter(|(_, &r)| r)
        .map(|(&d, _)| d)
        .product();
    let total = match a.elem_type() {
        ElemType::Float64 => reduce(UfuncId::Add, a, axes, false)?,
        _ => reduce(UfuncId::Add, &a.astype(ElemType::Float64), axes, false)?,
    };
    elementwise(UfuncId::Div, &total, Some(&ArrayHandle::scalar(count as f64)))
}

/// `(m, k) @ (k, n) -> (m, n)` in Float64.
pub fn matmul(a: &ArrayHandle, b: &ArrayHandle) -> Result<ArrayHandle> {
    if a.ndim() != 2 || b.ndim() != 2 {
        return Err(ArrayError::shape(format!(
            "matmul needs two 2-d operands, got shapes {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    if a.elem_type() == ElemType::Bool || b.elem_type() == ElemType::Bool {
        return Err(ArrayError::type_err("matmul needs numeric operands"));
    }
    let (m, k) = (a.dims()[0], a.dims()[1]);
    let (k2, n) = (b.dims()[0], b.dims()[1]);
    if k != k2 {
        return Err(ArrayError::shape(format!(
            "matmul inner dimensions differ: {} vs {}",
            a.shape(),
            b.shape()
        )));
    }
    let lhs = a.to_f64_vec();
    let rhs = b.to_f64_vec();
    let mut out = vec![0.0f64; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = lhs[i * k + p];
            let brow = &rhs[p * n..(p + 1) * n];
            for (o, &y) in row.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
    ArrayHandle::from_f64(out, [m, n])
}

/// Element-at-a-time sum through the generic index lookup path.
///
/// This is the unvectorized baseline the reduction kernel is measured
/// against; it unravels every flat position into an index tuple and reads
/// through [`ArrayHandle::get`].
pub fn sum_by_index_lookup(a: &ArrayHandle) -> Result<f64> {
    let dims = a.dims().to_vec();
    let mut index = vec![0usize; dims.len()];
    let mut total = 0.0;
    for flat in 0..a.element_count() {
        let mut rem = flat;
        for k in (0..dims.len()).rev() {
            index[k] = rem % dims[k];
            rem /= dims[k];
        }
        total += a.get(&index)?.as_f64();
    }
    Ok(total)
}
