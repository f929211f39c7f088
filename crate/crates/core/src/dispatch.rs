//! Backend dispatch for front-door array functions.
//!
//! A front-door call scans its arguments left to right for a foreign value
//! whose backend declares it handles the function, and hands the whole call
//! over to it. With no foreign arguments the dense reference implementation
//! runs. [`ChunkedArray`] is the bundled foreign backend: an eager array split
//! into pieces along axis 0, whose pieces may themselves be foreign values.

use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::array::{ArrayHandle, ElemType, Shape};
use crate::broadcast::broadcast_shapes;
use crate::error::{ArrayError, Result};
use crate::indexing::{slice_view, IndexEntry};
use crate::ufunc::{self, normalize_axes, UfuncId};

/// Every function reachable through [`dispatch_call`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuncId {
    Sum,
    Mean,
    Add,
    Sub,
    Mul,
    Div,
    Arctan2,
    Maximum,
    Sin,
    Log,
    Exp,
    Neg,
    Matmul,
    Reshape,
    Transpose,
}

impl FuncId {
    pub const ALL: [FuncId; 15] = [
        FuncId::Sum,
        FuncId::Mean,
        FuncId::Add,
        FuncId::Sub,
        FuncId::Mul,
        FuncId::Div,
        FuncId::Arctan2,
        FuncId::Maximum,
        FuncId::Sin,
        FuncId::Log,
        FuncId::Exp,
        FuncId::Neg,
        FuncId::Matmul,
        FuncId::Reshape,
        FuncId::Transpose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuncId::Sum => "sum",
            FuncId::Mean => "mean",
            FuncId::Matmul => "matmul",
            FuncId::Reshape => "reshape",
            FuncId::Transpose => "transpose",
            other => other.ufunc().expect("elementwise id").name(),
        }
    }

    /// The elementwise kernel behind this function, if it is one.
    pub fn ufunc(self) -> Option<UfuncId> {
        Some(match self {
            FuncId::Add => UfuncId::Add,
            FuncId::Sub => UfuncId::Sub,
            FuncId::Mul => UfuncId::Mul,
            FuncId::Div => UfuncId::Div,
            FuncId::Arctan2 => UfuncId::Arctan2,
            FuncId::Maximum => UfuncId::Maximum,
            FuncId::Sin => UfuncId::Sin,
            FuncId::Log => UfuncId::Log,
            FuncId::Exp => UfuncId::Exp,
            FuncId::Neg => UfuncId::Neg,
            _ => return None,
        })
    }

    pub fn from_ufunc(op: UfuncId) -> FuncId {
        match op {
            UfuncId::Add => FuncId::Add,
            UfuncId::Sub => FuncId::Sub,
            UfuncId::Mul => FuncId::Mul,
            UfuncId::Div => FuncId::Div,
            UfuncId::Arctan2 => FuncId::Arctan2,
            UfuncId::Maximum => FuncId::Maximum,
            UfuncId::Sin => FuncId::Sin,
            UfuncId::Log => FuncId::Log,
            UfuncId::Exp => FuncId::Exp,
            UfuncId::Neg => FuncId::Neg,
        }
    }
}

impl fmt::Display for FuncId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keyword arguments shared by the front-door functions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Kwargs {
    pub axes: Option<Vec<usize>>,
    pub keepdims: bool,
    pub shape: Option<Shape>,
    pub perm: Option<Vec<usize>>,
}

impl Kwargs {
    pub fn axes(axes: Option<&[usize]>) -> Kwargs {
        Kwargs {
            axes: axes.map(<[usize]>::to_vec),
            ..Kwargs::default()
        }
    }
}

/// Capability record a foreign array implementation attaches to its values.
///
/// `call` is only invoked for functions where `handles` returned true.
pub trait ArrayLike: Send + Sync + fmt::Debug {
    fn backend_name(&self) -> &str;
    fn handles(&self, func: FuncId) -> bool;
    fn call(&self, func: FuncId, args: &[Value], kwargs: &Kwargs) -> Result<Value>;
    fn shape(&self) -> Shape;
    fn to_dense(&self) -> Result<ArrayHandle>;
    fn as_any(&self) -> &dyn Any;
}

/// An argument or result of a front-door function.
#[derive(Debug, Clone)]
pub enum Value {
    Dense(ArrayHandle),
    Foreign(Arc<dyn ArrayLike>),
}

impl Value {
    pub fn foreign(x: impl ArrayLike + 'static) -> Value {
        Value::Foreign(Arc::new(x))
    }

    pub fn shape(&self) -> Shape {
        match self {
            Value::Dense(a) => a.shape().clone(),
            Value::Foreign(f) => f.shape(),
        }
    }

    pub fn ndim(&self) -> usize {
        self.shape().ndim()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Value::Dense(_))
    }

    pub fn as_dense(&self) -> Option<&ArrayHandle> {
        match self {
            Value::Dense(a) => Some(a),
            Value::Foreign(_) => None,
        }
    }

    pub fn as_chunked(&self) -> Option<&ChunkedArray> {
        match self {
            Value::Foreign(f) => f.as_any().downcast_ref(),
            Value::Dense(_) => None,
        }
    }

    /// Materializes through every backend layer.
    pub fn to_dense(&self) -> Result<ArrayHandle> {
        match self {
            Value::Dense(a) => Ok(a.clone()),
            Value::Foreign(f) => f.to_dense(),
        }
    }
}

impl From<ArrayHandle> for Value {
    fn from(a: ArrayHandle) -> Self {
        Value::Dense(a)
    }
}

impl From<ChunkedArray> for Value {
    fn from(c: ChunkedArray) -> Self {
        Value::foreign(c)
    }
}

type DenseImpl = fn(&[ArrayHandle], &Kwargs) -> Result<ArrayHandle>;

/// Dense reference implementation of every [`FuncId`]. Built once, read-only
/// afterwards.
pub struct Registry {
    table: HashMap<FuncId, DenseImpl>,
}

fn expect_args(func: FuncId, args: &[ArrayHandle], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(ArrayError::argument(format!(
            "{func} takes {n} array argument(s), got {}",
            args.len()
        )));
    }
    Ok(())
}

fn keep_reduced_dims(out: ArrayHandle, src: &Shape, kwargs: &Kwargs) -> Result<ArrayHandle> {
    if !kwargs.keepdims {
        return Ok(out);
    }
    let reduced = normalize_axes(kwargs.axes.as_deref(), src.ndim())?;
    let dims: Vec<usize> = src.dims().iter().zip(&reduced).map(|(&d, &r)| if r { 1 } else { d }).collect();
    Ok(out.reshape(dims)?.array)
}

fn dense_sum(args: &[ArrayHandle], kw: &Kwargs) -> Result<ArrayHandle> {
    expect_args(FuncId::Sum, args, 1)?;
    ufunc::reduce(UfuncId::Add, &args[0], kw.axes.as_deref(), kw.keepdims)
}

fn dense_mean(args: &[ArrayHandle], kw: &Kwargs) -> Result<ArrayHandle> {
    expect_args(FuncId::Mean, args, 1)?;
    let out = ufunc::mean(&args[0], kw.axes.as_deref())?;
    keep_reduced_dims(out, args[0].shape(), kw)
}

fn dense_matmul(args: &[ArrayHandle], _: &Kwargs) -> Result<ArrayHandle> {
    expect_args(FuncId::Matmul, args, 2)?;
    ufunc::matmul(&args[0], &args[1])
}

fn dense_reshape(args: &[ArrayHandle], kw: &Kwargs) -> Result<ArrayHandle> {
    expect_args(FuncId::Reshape, args, 1)?;
    let shape = kw
        .shape
        .clone()
        .ok_or_else(|| ArrayError::argument("reshape needs a target shape"))?;
    Ok(args[0].reshape(shape)?.array)
}

fn dense_transpose(args: &[ArrayHandle], kw: &Kwargs) -> Result<ArrayHandle> {
    expect_args(FuncId::Transpose, args, 1)?;
    args[0].transpose(kw.perm.as_deref())
}

macro_rules! dense_ufunc {
    ($name:ident, $op:expr) => {
        fn $name(args: &[ArrayHandle], _: &Kwargs) -> Result<ArrayHandle> {
            let op: UfuncId = $op;
            expect_args(FuncId::from_ufunc(op), args, op.arity())?;
            ufunc::elementwise(op, &args[0], args.get(1))
        }
    };
}

dense_ufunc!(dense_add, UfuncId::Add);
dense_ufunc!(dense_sub, UfuncId::Sub);
dense_ufunc!(dense_mul, UfuncId::Mul);
dense_ufunc!(dense_div, UfuncId::Div);
dense_ufunc!(dense_arctan2, UfuncId::Arctan2);
dense_ufunc!(dense_maximum, UfuncId::Maximum);
dense_ufunc!(dense_sin, UfuncId::Sin);
dense_ufunc!(dense_log, UfuncId::Log);
dense_ufunc!(dense_exp, UfuncId::Exp);
dense_ufunc!(dense_neg, UfuncId::Neg);

impl Registry {
    fn build() -> Registry {
        let entries: [(FuncId, DenseImpl); 15] = [
            (FuncId::Sum, dense_sum),
            (FuncId::Mean, dense_mean),
            (FuncId::Add, dense_add),
            (FuncId::Sub, dense_sub),
            (FuncId::Mul, dense_mul),
            (FuncId::Div, dense_div),
            (FuncId::Arctan2, dense_arctan2),
            (FuncId::Maximum, dense_maximum),
            (FuncId::Sin, dense_sin),
            (FuncId::Log, dense_log),
            (FuncId::Exp, dense_exp),
            (FuncId::Neg, dense_neg),
            (FuncId::Matmul, dense_matmul),
            (FuncId::Reshape, dense_reshape),
            (FuncId::Transpose, dense_transpose),
        ];
        Registry {
            table: entries.into_iter().collect(),
        }
    }

    pub fn global() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(Registry::build)
    }

    pub fn call_dense(&self, func: FuncId, args: &[ArrayHandle], kwargs: &Kwargs) -> Result<ArrayHandle> {
        let f = self.table.get(&func).ok_or_else(|| ArrayError::NotImplemented {
            func: func.name().into(),
            backend: "dense".into(),
        })?;
        f(args, kwargs)
    }

    pub fn functions(&self) -> impl Iterator<Item = FuncId> + '_ {
        FuncId::ALL.into_iter().filter(|f| self.table.contains_key(f))
    }
}

/// Routes `func` to the first foreign argument whose backend handles it,
/// or to the dense reference implementation when every argument is dense.
pub fn dispatch_call(func: FuncId, args: &[Value], kwargs: &Kwargs) -> Result<Value> {
    let mut first_foreign = None;
    for arg in args {
        if let Value::Foreign(backend) = arg {
            if backend.handles(func) {
                return backend.call(func, args, kwargs);
            }
            first_foreign.get_or_insert(backend);
        }
    }
    if let Some(backend) = first_foreign {
        return Err(ArrayError::NotImplemented {
            func: func.name().into(),
            backend: backend.backend_name().into(),
        });
    }
    let dense: Vec<ArrayHandle> = args.iter().filter_map(|a| a.as_dense().cloned()).collect();
    Registry::global().call_dense(func, &dense, kwargs).map(Value::Dense)
}

pub fn sum(x: &Value, axes: Option<&[usize]>) -> Result<Value> {
    dispatch_call(FuncId::Sum, std::slice::from_ref(x), &Kwargs::axes(axes))
}

pub fn mean(x: &Value, axes: Option<&[usize]>) -> Result<Value> {
    dispatch_call(FuncId::Mean, std::slice::from_ref(x), &Kwargs::axes(axes))
}

/// Front door for any elementwise function.
pub fn apply(op: UfuncId, args: &[Value]) -> Result<Value> {
    dispatch_call(FuncId::from_ufunc(op), args, &Kwargs::default())
}

pub fn add(a: &Value, b: &Value) -> Result<Value> {
    apply(UfuncId::Add, &[a.clone(), b.clone()])
}

pub fn matmul(a: &Value, b: &Value) -> Result<Value> {
    dispatch_call(FuncId::Matmul, &[a.clone(), b.clone()], &Kwargs::default())
}

pub fn reshape(x: &Value, shape: impl Into<Shape>) -> Result<Value> {
    let kw = Kwargs {
        shape: Some(shape.into()),
        ..Kwargs::default()
    };
    dispatch_call(FuncId::Reshape, std::slice::from_ref(x), &kw)
}

pub fn transpose(x: &Value, perm: Option<&[usize]>) -> Result<Value> {
    let kw = Kwargs {
        perm: perm.map(<[usize]>::to_vec),
        ..Kwargs::default()
    };
    dispatch_call(FuncId::Transpose, std::slice::from_ref(x), &kw)
}

pub const CHUNKED_BACKEND: &str = "chunked";

/// An eager array split into pieces along axis 0.
///
/// Pieces share ndim and trailing dims; their axis-0 extents sum to the
/// logical extent. A 0-d chunked array holds exactly one 0-d piece.
#[derive(Debug, Clone)]
pub struct ChunkedArray {
    chunks: Vec<Value>,
    shape: Shape,
}

impl ChunkedArray {
    pub fn new(chunks: Vec<Value>) -> Result<ChunkedArray> {
        let first = chunks
            .first()
            .ok_or_else(|| ArrayError::argument("a chunked array needs at least one chunk"))?
            .shape();
        if first.ndim() == 0 {
            if chunks.len() != 1 {
                return Err(ArrayError::shape("a 0-d chunked array holds exactly one chunk"));
            }
            return Ok(ChunkedArray { chunks, shape: first });
        }
        let mut lead = 0usize;
        for c in &chunks {
            let s = c.shape();
            if s.ndim() != first.ndim() || s.dims()[1..] != first.dims()[1..] {
                return Err(ArrayError::shape(format!(
                    "chunk of shape {s} does not match trailing dims of {first}"
                )));
            }
            lead += s.dims()[0];
        }
        let mut dims = first.0.clone();
        dims[0] = lead;
        Ok(ChunkedArray { chunks, shape: Shape(dims) })
    }

    pub fn chunks(&self) -> &[Value] {
        &self.chunks
    }

    /// Axis-0 extent of each chunk.
    pub fn chunk_extents(&self) -> Vec<usize> {
        self.chunks
            .iter()
            .map(|c| c.shape().dims().first().copied().unwrap_or(1))
            .collect()
    }

    pub fn logical_shape(&self) -> &Shape {
        &self.shape
    }

    /// Re-splits every chunk with `chunk_len`, giving a chunked array of
    /// chunked arrays.
    pub fn nest(&self, chunk_len: usize) -> Result<ChunkedArray> {
        let inner = self
            .chunks
            .iter()
            .map(|c| chunked_from_dense(&c.to_dense()?, chunk_len).map(Value::from))
            .collect::<Result<Vec<_>>>()?;
        ChunkedArray::new(inner)
    }

    fn reduce_call(&self, func: FuncId, kwargs: &Kwargs) -> Result<Value> {
        if self.shape.ndim() == 0 {
            let out = dispatch_call(func, &self.chunks, kwargs)?;
            return Ok(ChunkedArray::new(vec![out])?.into());
        }
        let reduced = normalize_axes(kwargs.axes.as_deref(), self.shape.ndim())?;
        if !reduced[0] || (kwargs.axes.as_deref() == Some(&[])) {
            let parts = self
                .chunks
                .iter()
                .map(|c| dispatch_call(func, std::slice::from_ref(c), kwargs))
                .collect::<Result<Vec<_>>>()?;
            return Ok(ChunkedArray::new(parts)?.into());
        }
        // Axis 0 is folded away: combine per-chunk sums in chunk order.
        let mut total: Option<ArrayHandle> = None;
        for c in &self.chunks {
            let part = dispatch_call(FuncId::Sum, std::slice::from_ref(c), kwargs)?.to_dense()?;
            let part = if func == FuncId::Mean { part.astype(ElemType::Float64) } else { part };
            total = Some(match total {
                None => part,
                Some(t) => ufunc::elementwise(UfuncId::Add, &t, Some(&part))?,
            });
        }
        let mut total = total.expect("at least one chunk");
        if func == FuncId::Mean {
            let count: usize = self
                .shape
                .dims()
                .iter()
                .zip(&reduced)
                .filter(|(_, &r)| r)
                .map(|(&d, _)| d)
                .product();
            total = ufunc::elementwise(UfuncId::Div, &total, Some(&ArrayHandle::scalar(count as f64)))?;
        }
        Ok(ChunkedArray::new(vec![total.into()])?.into())
    }

    fn elementwise_call(&self, func: FuncId, args: &[Value]) -> Result<Value> {
        let op = func.ufunc().expect("elementwise function");
        if args.len() != op.arity() {
            return Err(ArrayError::argument(format!(
                "{func} takes {} argument(s), got {}",
                op.arity(),
                args.len()
            )));
        }
        let out_shape = args
            .iter()
            .try_fold(Shape::scalar(), |acc, a| broadcast_shapes(&acc, &a.shape()))?;

        let extents = self.chunk_extents();
        if self.shape.ndim() > 0 {
            if out_shape.ndim() != self.shape.ndim() || out_shape.dims()[0] != self.shape.dims()[0] {
                return Err(ArrayError::NotImplemented {
                    func: format!("{func} broadcasting chunked {} to {out_shape}", self.shape),
                    backend: CHUNKED_BACKEND.into(),
                });
            }
            for a in args {
                if let Some(peer) = a.as_chunked() {
                    if peer.chunk_extents() != extents || peer.shape.ndim() != self.shape.ndim() {
                        return Err(ArrayError::argument(format!(
                            "mismatched chunk layouts {:?} and {:?}",
                            extents,
                            peer.chunk_extents()
                        )));
                    }
                }
            }
        }

        let lead = out_shape.dims().first().copied().unwrap_or(1);
        let mut start = 0usize;
        let mut parts = Vec::with_capacity(self.chunks.len());
        for (i, &ext) in extents.iter().enumerate() {
            let piece = args
                .iter()
                .map(|a| self.piece_of(a, i, start, ext, out_shape.ndim(), lead))
                .collect::<Result<Vec<_>>>()?;
            parts.push(dispatch_call(func, &piece, &Kwargs::default())?);
            start += ext;
        }
        Ok(ChunkedArray::new(parts)?.into())
    }

    /// The part of operand `a` that lines up with chunk `i`.
    fn piece_of(&self, a: &Value, i: usize, start: usize, ext: usize, out_ndim: usize, lead: usize) -> Result<Value> {
        if let Some(c) = a.as_chunked() {
            return Ok(c.chunks[i].clone());
        }
        let shape = a.shape();
        let aligned = self.shape.ndim() > 0 && shape.ndim() == out_ndim && shape.dims()[0] == lead && lead != 1;
        if !aligned {
            return Ok(a.clone());
        }
        match a {
            Value::Dense(d) => Ok(Value::Dense(slice_view(d, &[IndexEntry::range(start as isize, (start + ext) as isize)])?)),
            Value::Foreign(f) => Err(ArrayError::NotImplemented {
                func: "slicing a foreign peer".into(),
                backend: f.backend_name().into(),
            }),
        }
    }
}

impl ArrayLike for ChunkedArray {
    fn backend_name(&self) -> &str {
        CHUNKED_BACKEND
    }

    fn handles(&self, func: FuncId) -> bool {
        matches!(func, FuncId::Sum | FuncId::Mean) || func.ufunc().is_some()
    }

    fn call(&self, func: FuncId, args: &[Value], kwargs: &Kwargs) -> Result<Value> {
        match func {
            FuncId::Sum | FuncId::Mean => {
                if args.len() != 1 {
                    return Err(ArrayError::argument(format!("{func} takes one array argument")));
                }
                self.reduce_call(func, kwargs)
            }
            f if f.ufunc().is_some() => self.elementwise_call(f, args),
            f => Err(ArrayError::NotImplemented {
                func: f.name().into(),
                backend: CHUNKED_BACKEND.into(),
            }),
        }
    }

    fn shape(&self) -> Shape {
        self.shape.clone()
    }

    fn to_dense(&self) -> Result<ArrayHandle> {
        to_dense(self)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Splits `a` along axis 0 into pieces of `chunk_len` (the last may be
/// shorter).
pub fn chunked_from_dense(a: &ArrayHandle, chunk_len: usize) -> Result<ChunkedArray> {
    if chunk_len == 0 {
        return Err(ArrayError::argument("chunk length must be positive"));
    }
    if a.ndim() == 0 {
        return Err(ArrayError::argument("cannot chunk a 0-d array"));
    }
    let n = a.dims()[0];
    if n == 0 {
        return ChunkedArray::new(vec![a.copy().into()]);
    }
    let chunks = (0..n)
        .step_by(chunk_len)
        .map(|s| {
            let e = (s + chunk_len).min(n);
            slice_view(a, &[IndexEntry::range(s as isize, e as isize)]).map(|v| Value::Dense(v.copy()))
        })
        .collect::<Result<Vec<_>>>()?;
    ChunkedArray::new(chunks)
}

/// Concatenates the (recursively materialized) chunks along axis 0.
pub fn to_dense(x: &ChunkedArray) -> Result<ArrayHandle> {
    let parts = x.chunks.iter().map(Value::to_dense).collect::<Result<Vec<_>>>()?;
    let elem = parts
        .iter()
        .map(ArrayHandle::elem_type)
        .max()
        .expect("at least one chunk");
    let mut bytes = Vec::with_capacity(x.shape.element_count() * elem.byte_width());
    for p in &parts {
        let c = p.astype(elem);
        let n = c.element_count() * elem.byte_width();
        bytes.extend_from_slice(unsafe { std::slice::from_raw_parts(c.base_ptr(), n) });
    }
    ArrayHandle::from_bytes(bytes, x.shape.clone(), elem)
}
