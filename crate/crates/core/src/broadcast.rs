//! Shape compatibility and stride-0 broadcast views.

use crate::array::{ArrayHandle, Shape, Strides};
use crate::error::{ArrayError, Result};

/// Combined shape of two operands after right-aligning their dims.
///
/// Each aligned pair must be equal or contain a 1 (a missing dim counts as 1).
/// A 0 extent only pairs with 0 or 1.
pub fn broadcast_shapes(s1: &Shape, s2: &Shape) -> Result<Shape> {
    let n = s1.ndim().max(s2.ndim());
    let mut out = vec![0usize; n];
    for k in 0..n {
        let a = dim_from_right(s1, n - 1 - k);
        let b = dim_from_right(s2, n - 1 - k);
        out[k] = if a == b || b == 1 {
            a
        } else if a == 1 {
            b
        } else {
            return Err(ArrayError::Broadcast {
                left: s1.clone(),
                right: s2.clone(),
            });
        };
    }
    Ok(Shape(out))
}

fn dim_from_right(s: &Shape, from_right: usize) -> usize {
    let n = s.ndim();
    if from_right < n {
        s.0[n - 1 - from_right]
    } else {
        1
    }
}

/// Folds [`broadcast_shapes`] over any number of shapes.
pub fn broadcast_all<'a>(shapes: impl IntoIterator<Item = &'a Shape>) -> Result<Shape> {
    shapes
        .into_iter()
        .try_fold(Shape::scalar(), |acc, s| broadcast_shapes(&acc, s))
}

/// Read-only view of `a` stretched to `target` without copying.
///
/// Prepended and length-1 axes get stride 0.
pub fn broadcast_to(a: &ArrayHandle, target: &Shape) -> Result<ArrayHandle> {
    let combined = broadcast_shapes(a.shape(), target)?;
    if &combined != target {
        return Err(ArrayError::Broadcast {
            left: a.shape().clone(),
            right: target.clone(),
        });
    }
    let lead = target.ndim() - a.ndim();
    let mut steps = vec![0isize; target.ndim()];
    for k in 0..a.ndim() {
        let d = a.dims()[k];
        if d == target.0[lead + k] && d != 1 {
            steps[lead + k] = a.strides().0[k];
        }
    }
    a.view_with(a.offset(), target.clone(), Strides(steps), false)
}
