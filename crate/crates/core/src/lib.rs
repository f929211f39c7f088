//! A strided n-dimensional array kernel.
//!
//! - [`array`]: the buffer/offset/shape/strides data structure and constructors
//! - [`indexing`]: slicing views, mask selection and gather copies
//! - [`broadcast`]: shape compatibility and stride-0 views
//! - [`ufunc`]: elementwise kernels, reductions and `matmul`
//! - [`dispatch`]: front-door functions that defer to foreign array backends
//! - [`random`]: seed sequences, PCG64/MT19937 and variate sampling
//! - [`io`]: the `.ndar` container format
//! - [`cli`]: the `ndkern` command-line tool

pub mod array;
pub mod broadcast;
pub mod cli;
pub mod dispatch;
pub mod error;
pub mod indexing;
pub mod io;
mod layout;
pub mod random;
pub mod testing;
pub mod ufunc;

pub use array::{compute_strides, ArrayHandle, ElemType, Element, Order, ReshapeKind, Reshaped, Scalar, Shape, Strides};
pub use broadcast::{broadcast_shapes, broadcast_to};
pub use error::{ArrayError, Result};
pub use indexing::{assign, boolean_select, gather, slice_view, IndexEntry, IndexSpec};
pub use layout::Offsets;
pub use testing::{allclose, assert_allclose};
pub use ufunc::{elementwise, matmul, mean, reduce, UfuncId};
pub use io::{load, save, NdarError};
pub use random::{BitGenerator, Distribution, Generator, Mt19937, Pcg64, SeedSequence};
