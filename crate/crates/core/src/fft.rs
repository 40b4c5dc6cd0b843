//! In-place iterative radix-2 FFT, enough for the filterbank front-end.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Transforms `(re, im)` in place. Length must be a power of two.
pub(crate) fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two() && im.len() == n);
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = -2.0 * PI / size as f64;
        for k in 0..half {
            let (wr, wi) = (libm::cos(step * k as f64), libm::sin(step * k as f64));
            for start in (0..n).step_by(size) {
                let (a, b) = (start + k, start + k + half);
                let tr = re[b] * wr - im[b] * wi;
                let ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        size *= 2;
    }
}

/// Magnitude spectrum `|X[k]|` for `k = 0..=n/2` of a real frame,
/// zero-padded to `n`.
pub(crate) fn magnitude_spectrum(frame: &[f64], n: usize) -> Vec<f64> {
    let mut re = alloc::vec![0.0; n];
    let mut im = alloc::vec![0.0; n];
    re[..frame.len()].copy_from_slice(frame);
    fft_in_place(&mut re, &mut im);
    (0..=n / 2).map(|k| libm::hypot(re[k], im[k])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_mag(x: &[f64], n: usize) -> Vec<f64> {
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                    re += v * libm::cos(ang);
                    im += v * libm::sin(ang);
                }
                libm::hypot(re, im)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<f64> = (0..50)
            .map(|i| libm::sin(i as f64 * 0.3) + 0.01 * (i % 7) as f64)
            .collect();
        let fast = magnitude_spectrum(&x, 64);
        let slow = naive_dft_mag(&x, 64);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn impulse_is_flat() {
        let mag = magnitude_spectrum(&[1.0], 16);
        assert!(mag.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }
}
