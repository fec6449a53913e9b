//! FFT-backed convolution helpers shared by the symbol and structured-product code.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Smallest power of two >= `n`.
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward DFT in place, rustfft convention: X_k = sum_n x_n e^{-2*pi*i*n*k/N}.
pub fn fft_forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(buf.len());
    fft.process(buf);
}

/// Inverse DFT in place, including the 1/N scaling.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    fft.process(buf);
    let scale = 1.0 / n as f64;
    for x in buf.iter_mut() {
        *x *= scale;
    }
}

/// Full linear convolution of `a` and `b`: out[s] = sum_j a[j] b[s-j],
/// length a.len() + b.len() - 1.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    // Direct convolution wins for short operands and is exact to round-off.
    if a.len().min(b.len()) <= 24 || out_len <= 128 {
        return convolve_direct(a, b);
    }
    let n = next_pow2(out_len);
    let mut fa = vec![Complex64::ZERO; n];
    let mut fb = vec![Complex64::ZERO; n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= *y;
    }
    fft_inverse(&mut fa);
    fa.truncate(out_len);
    fa
}

fn convolve_direct(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == Complex64::ZERO {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}
