//! Laurent-series symbols with finitely supported coefficient windows.
//!
//! A symbol a(z) = sum_i a_i z^i is stored as a dense coefficient window
//! [lo, hi] with lo <= 0 <= hi, so the constant coefficient is always
//! addressable. All operations are pure; the Wiener norm sum_i |a_i| is
//! finite by construction.

use crate::fft::{convolve, fft_forward, fft_inverse, next_pow2};
use crate::QtError;
use num_complex::Complex64;

/// Maximum DFT length tried by [`LaurentSeries::exp`] before giving up.
const EXP_MAX_FFT: usize = 1 << 21;

/// Initial window growth factor for [`LaurentSeries::exp`].
const EXP_GROWTH: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    lo: i64,
    /// coeffs[k] = a_{lo+k}
    coeffs: Vec<Complex64>,
}

impl LaurentSeries {
    /// The canonical zero series: lo = hi = 0, coeffs = [0].
    pub fn zero() -> Self {
        LaurentSeries {
            lo: 0,
            coeffs: vec![Complex64::ZERO],
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        LaurentSeries {
            lo: 0,
            coeffs: vec![c],
        }
    }

    /// Series c * z^k.
    pub fn monomial(k: i64, c: Complex64) -> Self {
        let mut s = if k >= 0 {
            let mut coeffs = vec![Complex64::ZERO; k as usize + 1];
            coeffs[k as usize] = c;
            LaurentSeries { lo: 0, coeffs }
        } else {
            let mut coeffs = vec![Complex64::ZERO; (-k) as usize + 1];
            coeffs[0] = c;
            LaurentSeries { lo: k, coeffs }
        };
        s.trim();
        s
    }

    /// Builds a series from a dense window. The window is widened to include
    /// index 0 if necessary, then trimmed to canonical form.
    pub fn from_coeffs(lo: i64, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient window");
        let hi = lo + coeffs.len() as i64 - 1;
        let mut s = if lo > 0 {
            let mut full = vec![Complex64::ZERO; lo as usize];
            full.extend(coeffs);
            LaurentSeries { lo: 0, coeffs: full }
        } else if hi < 0 {
            let mut full = coeffs;
            full.extend(vec![Complex64::ZERO; (-hi) as usize]);
            LaurentSeries { lo, coeffs: full }
        } else {
            LaurentSeries { lo, coeffs }
        };
        s.trim();
        s
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient a_i; zero outside the stored window.
    pub fn coeff(&self, i: i64) -> Complex64 {
        if i < self.lo || i > self.hi() {
            Complex64::ZERO
        } else {
            self.coeffs[(i - self.lo) as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::ZERO)
    }

    /// Removes exactly-zero boundary coefficients while keeping lo <= 0 <= hi.
    fn trim(&mut self) {
        let mut start = 0usize;
        let mut end = self.coeffs.len();
        while start < end && self.lo + start as i64 != 0 && self.coeffs[start] == Complex64::ZERO {
            start += 1;
        }
        while end > start + 1
            && self.lo + end as i64 - 1 != 0
            && self.coeffs[end - 1] == Complex64::ZERO
        {
            end -= 1;
        }
        if start > 0 || end < self.coeffs.len() {
            self.coeffs = self.coeffs[start..end].to_vec();
            self.lo += start as i64;
        }
        if self.is_zero() {
            *self = LaurentSeries::zero();
        }
    }

    /// ||a||_W = sum_i |a_i|.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// ||a'||_W = sum_i |i a_i|.
    pub fn derivative_wiener_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| ((self.lo + k as i64) as f64).abs() * c.norm())
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Count of coefficients with modulus above `eps * max_j |a_j|`.
    pub fn numerical_bandwidth(&self, eps: f64) -> usize {
        let m = self.max_coeff_modulus();
        if m == 0.0 {
            return 0;
        }
        let thr = eps * m;
        self.coeffs.iter().filter(|c| c.norm() > thr).count()
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut coeffs = vec![Complex64::ZERO; (hi - lo + 1) as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo + k as i64 - lo) as usize] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            coeffs[(other.lo + k as i64 - lo) as usize] += c;
        }
        LaurentSeries::from_coeffs(lo, coeffs)
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn scale(&self, c: Complex64) -> LaurentSeries {
        LaurentSeries::from_coeffs(self.lo, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Coefficient convolution; window [lo_a + lo_b, hi_a + hi_b].
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        if self.is_zero() || other.is_zero() {
            return LaurentSeries::zero();
        }
        let coeffs = convolve(&self.coeffs, &other.coeffs);
        LaurentSeries::from_coeffs(self.lo + other.lo, coeffs)
    }

    /// Splits a = a_0 + a_+(z) + a_-(z^{-1}). Both parts are returned in
    /// nonnegative-power storage: the coefficient of z^i (i >= 1) in the
    /// returned `a_minus` is a_{-i}.
    pub fn split(&self) -> (LaurentSeries, Complex64, LaurentSeries) {
        let a0 = self.coeff(0);
        let n_minus = (-self.lo) as usize;
        let n_plus = self.hi() as usize;
        let mut minus = vec![Complex64::ZERO; n_minus + 1];
        for i in 1..=n_minus {
            minus[i] = self.coeff(-(i as i64));
        }
        let mut plus = vec![Complex64::ZERO; n_plus + 1];
        for i in 1..=n_plus {
            plus[i] = self.coeff(i as i64);
        }
        (
            LaurentSeries::from_coeffs(0, minus),
            a0,
            LaurentSeries::from_coeffs(0, plus),
        )
    }

    /// The reversed symbol a~(z) = a(1/z), i.e. coefficient i becomes -i.
    /// Satisfies T(a)^T = T(a~).
    pub fn reversed(&self) -> LaurentSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        LaurentSeries::from_coeffs(-self.hi(), coeffs)
    }

    /// Drops tail coefficients greedily, smallest modulus first, as long as
    /// the total dropped Wiener mass stays within `eps`. Returns the smallest
    /// such window.
    pub fn truncate(&self, eps: f64) -> LaurentSeries {
        assert!(eps >= 0.0, "truncation budget must be nonnegative");
        if self.is_zero() || self.wiener_norm() <= eps {
            return LaurentSeries::zero();
        }
        let zero_pos = (-self.lo) as usize;
        let mut start = 0usize;
        let mut end = self.coeffs.len() - 1;
        let mut dropped = 0.0f64;
        loop {
            let can_lo = start < zero_pos;
            let can_hi = end > zero_pos;
            let m_lo = if can_lo {
                self.coeffs[start].norm()
            } else {
                f64::INFINITY
            };
            let m_hi = if can_hi {
                self.coeffs[end].norm()
            } else {
                f64::INFINITY
            };
            if !can_lo && !can_hi {
                break;
            }
            let m = m_lo.min(m_hi);
            if dropped + m > eps {
                break;
            }
            dropped += m;
            if m_lo <= m_hi {
                start += 1;
            } else {
                end -= 1;
            }
        }
        LaurentSeries::from_coeffs(self.lo + start as i64, self.coeffs[start..=end].to_vec())
    }

    /// Zeroes every coefficient with modulus <= `floor` and trims. Used to
    /// strip FFT round-off noise whose scale is known from the operands.
    pub fn clamp_below(&self, floor: f64) -> LaurentSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.norm() <= floor {
                    Complex64::ZERO
                } else {
                    *c
                }
            })
            .collect();
        LaurentSeries::from_coeffs(self.lo, coeffs)
    }

    /// Product with coefficients below the convolution round-off floor zeroed
    /// out. The floor scales with the l2 norms of the operands, which is the
    /// per-coefficient error scale of both the FFT and the direct convolution.
    /// Keeps windows tight when squaring symbols with large dynamic range.
    pub fn mul_denoised(&self, other: &LaurentSeries) -> LaurentSeries {
        let prod = self.mul(other);
        let len = prod.coeffs.len().max(2) as f64;
        let floor = 4.0 * f64::EPSILON * self.l2_norm() * other.l2_norm() * len.log2();
        prod.clamp_below(floor)
    }

    /// exp(a) by evaluation at the N-th roots of unity and interpolation.
    ///
    /// The DFT length N is doubled, with the output window growing with N,
    /// until the boundary coefficients are negligible and two successive
    /// results agree. The tolerance is understood relative to the Wiener norm
    /// of the result once that norm exceeds 1, since the absolute coefficient
    /// accuracy reachable in double precision scales with exp(||a||_W).
    pub fn exp(&self, tol: f64) -> Result<LaurentSeries, QtError> {
        assert!(tol > 0.0, "tolerance must be positive");
        if self.is_zero() {
            return Ok(LaurentSeries::one());
        }
        if self.lo == 0 && self.hi() == 0 {
            return Ok(LaurentSeries::constant(self.coeff(0).exp()));
        }
        let width = (self.hi() - self.lo) as usize + 1;
        let mut n = next_pow2((EXP_GROWTH * width).max(32));
        let mut prev: Option<LaurentSeries> = None;
        while n <= EXP_MAX_FFT {
            let cand = self.exp_at_length(n);
            let bnorm = cand.wiener_norm().max(1.0);
            let scaled_tol = tol * bnorm;
            // Boundary test: the far window edges must carry no significant
            // mass, otherwise the window (and N) is too small. For one-sided
            // input the window is pinned at 0 on that side and only the
            // opposite edge is a decay boundary.
            let first = cand.coeffs[0].norm();
            let last = cand.coeffs[cand.coeffs.len() - 1].norm();
            let edge = if self.lo == 0 {
                last
            } else if self.hi() == 0 {
                first
            } else {
                first.max(last)
            };
            let edge_ok = edge < scaled_tol / n as f64
                || edge <= 4.0 * f64::EPSILON * cand.max_coeff_modulus();
            if edge_ok {
                if let Some(p) = &prev {
                    if p.sub(&cand).wiener_norm() <= scaled_tol {
                        let floor = 4.0 * f64::EPSILON * cand.max_coeff_modulus();
                        return Ok(cand.clamp_below(floor).truncate(scaled_tol));
                    }
                }
                prev = Some(cand);
            } else {
                prev = None;
            }
            n *= 2;
        }
        Err(QtError::SymbolExpNonConvergence { max_fft: EXP_MAX_FFT })
    }

    /// One evaluation-interpolation pass at fixed DFT length `n`.
    fn exp_at_length(&self, n: usize) -> LaurentSeries {
        let ni = n as i64;
        // Output window of total length n, positioned after the drift of the
        // input window: all-nonnegative input stays all-nonnegative, and
        // symmetrically for all-nonpositive input.
        let out_lo = if self.lo == 0 {
            0i64
        } else if self.hi() == 0 {
            -(ni - 1)
        } else {
            (-((ni * (-self.lo)) / (self.hi() - self.lo))).clamp(-(ni - 1), 0)
        };
        let mut buf = vec![Complex64::ZERO; n];
        for (k, c) in self.coeffs.iter().enumerate() {
            let idx = (self.lo + k as i64).rem_euclid(ni) as usize;
            buf[idx] += c;
        }
        fft_forward(&mut buf);
        for x in buf.iter_mut() {
            *x = x.exp();
        }
        fft_inverse(&mut buf);
        let mut coeffs = vec![Complex64::ZERO; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let e = out_lo + k as i64;
            *c = buf[e.rem_euclid(ni) as usize];
        }
        LaurentSeries::from_coeffs(out_lo, coeffs)
    }
}
