//! NDAR v1: a minimal, bit-exact container for a single array.
//!
//! ```text
//! offset  size     field
//! 0       4        magic "NDAR"
//! 4       1        version (1)
//! 5       1        elem code (0 Bool, 1 Int64, 2 Float64)
//! 6       1        ndim
//! 7       1        order (0 = C)
//! 8       8*ndim   dims, u64 little-endian
//! ...              payload, C order, little-endian, densely packed
//! ```

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::array::{ArrayHandle, ElemType, Shape};

pub const MAGIC: [u8; 4] = *b"NDAR";
pub const VERSION: u8 = 1;
pub const ORDER_C: u8 = 0;

#[derive(Debug, Error)]
pub enum NdarError {
    #[error("bad magic {0:?}, expected \"NDAR\"")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported element code {0}")]
    UnsupportedElemCode(u8),
    #[error("unsupported order {0}")]
    UnsupportedOrder(u8),
    #[error("header truncated: needed {needed} bytes, got {got}")]
    TruncatedHeader { needed: usize, got: usize },
    #[error("dims {0:?} overflow the addressable size")]
    Oversized(Vec<u64>),
    #[error("payload truncated: needed {needed} bytes, got {got}")]
    TruncatedPayload { needed: usize, got: usize },
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("invalid bool byte {0:#04x}")]
    InvalidBool(u8),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn elem_code(elem: ElemType) -> u8 {
    match elem {
        ElemType::Bool => 0,
        ElemType::Int64 => 1,
        ElemType::Float64 => 2,
    }
}

pub fn elem_from_code(code: u8) -> Option<ElemType> {
    match code {
        0 => Some(ElemType::Bool),
        1 => Some(ElemType::Int64),
        2 => Some(ElemType::Float64),
        _ => None,
    }
}

/// Header length for an array of `ndim` dimensions.
pub fn header_len(ndim: usize) -> usize {
    8 + 8 * ndim
}

/// Writes header and C-order payload; views are materialized.
pub fn save<W: Write>(a: &ArrayHandle, mut sink: W) -> Result<(), NdarError> {
    let ndim = u8::try_from(a.ndim()).map_err(|_| {
        NdarError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{} dimensions do not fit the header", a.ndim()),
        ))
    })?;
    let mut out = Vec::with_capacity(header_len(a.ndim()) + a.element_count() * a.elem_type().byte_width());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&[VERSION, elem_code(a.elem_type()), ndim, ORDER_C]);
    for &d in a.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match a.elem_type() {
        ElemType::Bool => out.extend(a.to_bool_vec().into_iter().map(u8::from)),
        ElemType::Int64 => a.to_i64_vec().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        ElemType::Float64 => a.to_f64_vec().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
    }
    sink.write_all(&out)?;
    sink.flush()?;
    Ok(())
}

/// Reads exactly one array; anything after the payload is an error.
pub fn load<R: Read>(mut source: R) -> Result<ArrayHandle, NdarError> {
    let mut fixed = [0u8; 8];
    let got = read_full(&mut source, &mut fixed)?;
    if got < 4 {
        return Err(NdarError::TruncatedHeader { needed: 8, got });
    }
    let magic = [fixed[0], fixed[1], fixed[2], fixed[3]];
    if magic != MAGIC {
        return Err(NdarError::BadMagic(magic));
    }
    if got < 8 {
        return Err(NdarError::TruncatedHeader { needed: 8, got });
    }
    let [_, _, _, _, version, code, ndim, order] = fixed;
    if version != VERSION {
        return Err(NdarError::UnsupportedVersion(version));
    }
    let elem = elem_from_code(code).ok_or(NdarError::UnsupportedElemCode(code))?;
    if order != ORDER_C {
        return Err(NdarError::UnsupportedOrder(order));
    }

    let ndim = ndim as usize;
    let mut dim_bytes = vec![0u8; 8 * ndim];
    let got = read_full(&mut source, &mut dim_bytes)?;
    if got < dim_bytes.len() {
        return Err(NdarError::TruncatedHeader {
            needed: header_len(ndim),
            got: 8 + got,
        });
    }
    let dims64: Vec<u64> = dim_bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let width = elem.byte_width();
    let needed = dims64
        .iter()
        .try_fold(1usize, |acc, &d| usize::try_from(d).ok().and_then(|d| acc.checked_mul(d)))
        .and_then(|n| n.checked_mul(width))
        .filter(|&b| b <= isize::MAX as usize)
        .ok_or_else(|| NdarError::Oversized(dims64.clone()))?;

    // Grow with the data actually present rather than trusting the header.
    let mut payload = Vec::new();
    (&mut source).take(needed as u64).read_to_end(&mut payload)?;
    if payload.len() < needed {
        return Err(NdarError::TruncatedPayload { needed, got: payload.len() });
    }
    let mut probe = [0u8; 1];
    if read_full(&mut source, &mut probe)? != 0 {
        return Err(NdarError::TrailingBytes);
    }

    let shape = Shape::new(dims64.iter().map(|&d| d as usize).collect::<Vec<_>>());
    let array = match elem {
        ElemType::Bool => {
            let values = payload
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(NdarError::InvalidBool(other)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            ArrayHandle::from_bool(values, shape)
        }
        ElemType::Int64 => ArrayHandle::from_i64(
            payload
                .chunks_exact(8)
                .map(|c| i64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect(),
            shape,
        ),
        ElemType::Float64 => ArrayHandle::from_f64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect(),
            shape,
        ),
    };
    Ok(array.expect("payload length was checked against the shape"))
}

pub fn to_bytes(a: &ArrayHandle) -> Vec<u8> {
    let mut out = Vec::new();
    save(a, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<ArrayHandle, NdarError> {
    load(bytes)
}

pub fn save_path(a: &ArrayHandle, path: impl AsRef<Path>) -> Result<(), NdarError> {
    let file = std::fs::File::create(path)?;
    save(a, std::io::BufWriter::new(file))
}

pub fn load_path(path: impl AsRef<Path>) -> Result<ArrayHandle, NdarError> {
    let file = std::fs::File::open(path)?;
    load(std::io::BufReader::new(file))
}

fn read_full<R: Read>(source: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_d_float_layout() {
        let bytes = to_bytes(&ArrayHandle::scalar(1.0));
        assert_eq!(bytes.len(), 8 + 8);
        assert_eq!(&bytes[..8], b"NDAR\x01\x02\x00\x00");
        assert_eq!(&bytes[8..], &1.0f64.to_le_bytes());
    }

    #[test]
    fn empty_int_vector() {
        let a = ArrayHandle::from_i64(vec![], [0]).unwrap();
        let bytes = to_bytes(&a);
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[8..], &0u64.to_le_bytes());
        let b = from_bytes(&bytes).unwrap();
        assert_eq!(b.dims(), &[0]);
        assert_eq!(b.elem_type(), ElemType::Int64);
    }

    #[test]
    fn transposed_view_saves_as_its_copy() {
        let a = ArrayHandle::arange(0.0, 6.0, 1.0).unwrap().reshape([2, 3]).unwrap().array;
        let t = a.transpose(None).unwrap();
        assert!(!t.is_c_contiguous());
        assert_eq!(to_bytes(&t), to_bytes(&t.copy()));
    }

    #[test]
    fn bad_magic() {
        let mut bytes = to_bytes(&ArrayHandle::scalar(1.0));
        bytes[0] = b'X';
        assert!(matches!(from_bytes(&bytes), Err(NdarError::BadMagic(m)) if &m == b"XDAR"));
    }

    #[test]
    fn truncated_float_payload() {
        let a = ArrayHandle::zeros([2, 3], ElemType::Float64).unwrap();
        let bytes = to_bytes(&a);
        let short = &bytes[..header_len(2) + 40];
        assert!(matches!(
            from_bytes(short),
            Err(NdarError::TruncatedPayload { needed: 48, got: 40 })
        ));
    }

    #[test]
    fn each_header_fault_is_distinct() {
        let good = to_bytes(&ArrayHandle::from_bool(vec![true, false], [2]).unwrap());
        let patch = |i: usize, v: u8| {
            let mut b = good.clone();
            b[i] = v;
            from_bytes(&b)
        };
        assert!(matches!(patch(4, 2), Err(NdarError::UnsupportedVersion(2))));
        assert!(matches!(patch(5, 3), Err(NdarError::UnsupportedElemCode(3))));
        assert!(matches!(patch(7, 1), Err(NdarError::UnsupportedOrder(1))));
        assert!(matches!(patch(17, 2), Err(NdarError::InvalidBool(2))));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(from_bytes(&long), Err(NdarError::TrailingBytes)));
        assert!(matches!(from_bytes(&good[..6]), Err(NdarError::TruncatedHeader { .. })));
        assert!(matches!(from_bytes(&good[..12]), Err(NdarError::TruncatedHeader { .. })));
        let mut huge = good[..16].to_vec();
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(from_bytes(&huge), Err(NdarError::Oversized(_))));
    }

    fn any_array() -> impl Strategy<Value = ArrayHandle> {
        (prop::collection::vec(0usize..4, 0..=4), 0u8..3, any::<u64>()).prop_map(|(dims, code, seed)| {
            let n: usize = dims.iter().product();
            let mut s = seed;
            let mut next = || {
                s = crate::random::mix64(s.wrapping_add(0x9E37_79B9_7F4A_7C15));
                s
            };
            match code {
                0 => ArrayHandle::from_bool((0..n).map(|_| next() & 1 == 1).collect(), dims),
                1 => ArrayHandle::from_i64((0..n).map(|_| next() as i64).collect(), dims),
                _ => ArrayHandle::from_f64((0..n).map(|_| f64::from_bits(next())).collect(), dims),
            }
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_a_fixed_point(a in any_array()) {
            let first = to_bytes(&a);
            let b = from_bytes(&first).unwrap();
            prop_assert_eq!(b.dims(), a.dims());
            prop_assert_eq!(b.elem_type(), a.elem_type());
            prop_assert_eq!(to_bytes(&b), first.clone());
            prop_assert_eq!(first.len(), header_len(a.ndim()) + a.element_count() * a.elem_type().byte_width());
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let _ = from_bytes(&bytes);
        }
    }
}
