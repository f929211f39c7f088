//! Strided traversal helpers shared by the kernels.

/// Lowest and highest byte address touched by a non-empty strided layout.
pub(crate) fn extent(offset: isize, dims: &[usize], steps: &[isize]) -> (isize, isize) {
    let mut lo = offset;
    let mut hi = offset;
    for (&d, &s) in dims.iter().zip(steps) {
        let span = (d as isize - 1) * s;
        if span < 0 {
            lo += span;
        } else {
            hi += span;
        }
    }
    (lo, hi)
}

/// Byte addresses of a strided layout in C order.
#[derive(Debug, Clone)]
pub struct Offsets {
    dims: Vec<usize>,
    steps: Vec<isize>,
    index: Vec<usize>,
    cur: isize,
    remaining: usize,
}

impl Offsets {
    pub(crate) fn new(offset: isize, dims: &[usize], steps: &[isize]) -> Offsets {
        Offsets {
            dims: dims.to_vec(),
            steps: steps.to_vec(),
            index: vec![0; dims.len()],
            cur: offset,
            remaining: dims.iter().product(),
        }
    }
}

impl Iterator for Offsets {
    type Item = isize;

    fn next(&mut self) -> Option<isize> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.cur;
        self.remaining -= 1;
        if self.remaining > 0 {
            for k in (0..self.dims.len()).rev() {
                self.index[k] += 1;
                self.cur += self.steps[k];
                if self.index[k] < self.dims[k] {
                    break;
                }
                self.cur -= self.steps[k] * self.dims[k] as isize;
                self.index[k] = 0;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Offsets {}

/// Walks `N` operands sharing `dims` one innermost-axis run at a time.
///
/// `f(starts, len, steps)` receives the byte address of each operand at the
/// start of the run, the run length and each operand's innermost step.
pub(crate) fn for_each_run<const N: usize>(
    dims: &[usize],
    bases: [isize; N],
    strides: [&[isize]; N],
    mut f: impl FnMut([isize; N], usize, [isize; N]),
) {
    let n = dims.len();
    if n == 0 {
        f(bases, 1, [0; N]);
        return;
    }
    if dims.contains(&0) {
        return;
    }
    let inner = dims[n - 1];
    let inner_steps: [isize; N] = std::array::from_fn(|i| strides[i][n - 1]);
    let outer = &dims[..n - 1];
    let mut index = vec![0usize; n - 1];
    let mut cur = bases;
    loop {
        f(cur, inner, inner_steps);
        let mut k = n - 1;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            index[k] += 1;
            for i in 0..N {
                cur[i] += strides[i][k];
            }
            if index[k] < outer[k] {
                break;
            }
            for i in 0..N {
                cur[i] -= strides[i][k] * outer[k] as isize;
            }
            index[k] = 0;
        }
    }
}
