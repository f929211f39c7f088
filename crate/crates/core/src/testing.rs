//! Approximate equality for array comparisons in tests.

use crate::array::ArrayHandle;
use crate::broadcast::{broadcast_shapes, broadcast_to};
use crate::error::Result;

/// True iff every broadcast pair satisfies `|a - d| <= atol + rtol * |d|`.
///
/// NaN never compares close, not even to NaN. Exactly equal values (which
/// includes matching infinities) always do.
pub fn allclose(actual: &ArrayHandle, desired: &ArrayHandle, rtol: f64, atol: f64) -> Result<bool> {
    Ok(first_mismatch(actual, desired, rtol, atol)?.is_none())
}

fn close(a: f64, d: f64, rtol: f64, atol: f64) -> bool {
    a == d || (a - d).abs() <= atol + rtol * d.abs()
}

/// Flat C-order position and values of the first pair outside tolerance.
pub fn first_mismatch(
    actual: &ArrayHandle,
    desired: &ArrayHandle,
    rtol: f64,
    atol: f64,
) -> Result<Option<(usize, f64, f64)>> {
    let shape = broadcast_shapes(actual.shape(), desired.shape())?;
    let a = broadcast_to(actual, &shape)?.to_f64_vec();
    let d = broadcast_to(desired, &shape)?.to_f64_vec();
    Ok(a
        .into_iter()
        .zip(d)
        .enumerate()
        .find(|&(_, (x, y))| !close(x, y, rtol, atol))
        .map(|(i, (x, y))| (i, x, y)))
}

/// Panics with a description of the first mismatch.
#[track_caller]
pub fn assert_allclose(actual: &ArrayHandle, desired: &ArrayHandle, rtol: f64, atol: f64) {
    match first_mismatch(actual, desired, rtol, atol) {
        Ok(None) => {}
        Ok(Some((i, a, d))) => panic!(
            "arrays not close (rtol={rtol}, atol={atol}): element {i}: actual {a} vs desired {d}"
        ),
        Err(e) => panic!("arrays not comparable: {e}"),
    }
}
