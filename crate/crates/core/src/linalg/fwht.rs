use crate::{Error, Result};

/// In-place orthonormal Walsh-Hadamard transform, `v ← H_k v` with
/// `H_k = (1/√2)[[H_{k-1}, H_{k-1}], [H_{k-1}, −H_{k-1}]]`.
///
/// Runs in `O(n log n)`. `H_k` is symmetric and orthonormal, so applying the
/// transform twice returns the input.
pub fn fwht_inplace(v: &mut [f64]) -> Result<()> {
    fwht_rows(v, v.len(), 1)
}

/// Transforms every column of a row-major `len × width` block at once: the
/// butterflies combine whole rows, which keeps row-major data contiguous.
pub fn fwht_rows(data: &mut [f64], len: usize, width: usize) -> Result<()> {
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len });
    }
    debug_assert_eq!(data.len(), len * width);
    let mut h = 1;
    while h < len {
        for block in data.chunks_exact_mut(2 * h * width) {
            let (lo, hi) = block.split_at_mut(h * width);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    if len > 1 {
        let scale = 1.0 / libm::sqrt(len as f64);
        data.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(())
}
