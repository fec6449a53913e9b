//! Low-rank corrections and the structured products feeding them.
//!
//! A correction E = U V^T (plain transpose, never conjugated) is stored as a
//! pair of tall-thin factors whose rows beyond the active range are zero.
//! Rank reduction follows the pivoted-QR + SVD compression procedure.

use crate::fft::convolve;
use crate::symbol::LaurentSeries;
use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

/// A finitely supported correction E with E_{i,j} = (U V^T)_{i,j} inside the
/// active block and 0 elsewhere. Column count r = 0 encodes E = 0.
#[derive(Clone, Debug)]
pub struct LowRankCorrection {
    u: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
}

impl LowRankCorrection {
    pub fn zero() -> Self {
        LowRankCorrection {
            u: DMatrix::zeros(0, 0),
            v: DMatrix::zeros(0, 0),
        }
    }

    pub fn from_factors(u: DMatrix<Complex64>, v: DMatrix<Complex64>) -> Self {
        assert_eq!(u.ncols(), v.ncols(), "factor column counts must agree");
        LowRankCorrection { u, v }
    }

    pub fn u(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// Number of stored factor columns (an upper bound on the rank).
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn rows_u(&self) -> usize {
        self.u.nrows()
    }

    pub fn rows_v(&self) -> usize {
        self.v.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0 || self.rows_u() == 0 || self.rows_v() == 0
    }

    /// Entry E_{i,j} with 1-based indices, matching the semi-infinite layout.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        assert!(i >= 1 && j >= 1, "indices are 1-based");
        if i > self.rows_u() || j > self.rows_v() {
            return Complex64::ZERO;
        }
        let mut s = Complex64::ZERO;
        for k in 0..self.rank() {
            s += self.u[(i - 1, k)] * self.v[(j - 1, k)];
        }
        s
    }

    /// ||E||_F = sum of the moduli of all entries (the Banach-algebra norm of
    /// corrections, not the Frobenius norm).
    pub fn fnorm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let block = &self.u * self.v.transpose();
        block.iter().map(|c| c.norm()).sum()
    }

    /// Factor concatenation E1 + E2; no compression is applied here.
    pub fn add(&self, other: &LowRankCorrection) -> LowRankCorrection {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let u = concat_cols(&[self.u.clone(), other.u.clone()]);
        let v = concat_cols(&[self.v.clone(), other.v.clone()]);
        LowRankCorrection::from_factors(u, v)
    }

    pub fn scale(&self, c: Complex64) -> LowRankCorrection {
        LowRankCorrection {
            u: self.u.map(|x| x * c),
            v: self.v.clone(),
        }
    }

    /// Leading m x n block of E as a dense matrix.
    pub fn dense_block(&self, m: usize, n: usize) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(m, n);
        if self.is_zero() {
            return out;
        }
        let mm = m.min(self.rows_u());
        let nn = n.min(self.rows_v());
        let block = self.u.rows(0, mm) * self.v.rows(0, nn).transpose();
        out.view_mut((0, 0), (mm, nn)).copy_from(&block);
        out
    }

    /// Count of singular values of E with sigma_i >= eps * sigma_1.
    pub fn numerical_rank(&self, eps: f64) -> usize {
        let sv = self.singular_values();
        if sv.is_empty() || sv[0] == 0.0 {
            return 0;
        }
        let thr = eps * sv[0];
        sv.iter().filter(|s| **s >= thr).count()
    }

    /// Singular values of the correction, computed from the factors.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.is_zero() {
            return Vec::new();
        }
        let ru = self.u.clone().qr().r();
        let rv = self.v.clone().qr().r();
        let m = ru * rv.transpose();
        let mut sv: Vec<f64> = SVD::new(m, false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Spectral norm of E, from the factored form.
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Drops trailing factor rows whose infinity norm is at most
    /// `eps_trim * (largest row infinity norm)`.
    pub fn trim_rows(&self, eps_trim: f64) -> LowRankCorrection {
        if self.is_zero() {
            return LowRankCorrection::zero();
        }
        let u = trim_trailing_rows(&self.u, eps_trim);
        let v = trim_trailing_rows(&self.v, eps_trim);
        if u.nrows() == 0 || v.nrows() == 0 {
            return LowRankCorrection::zero();
        }
        LowRankCorrection { u, v }
    }

    /// Compression followed by row trimming at the same threshold.
    pub fn compressed(&self, eps: f64) -> LowRankCorrection {
        if self.is_zero() {
            return LowRankCorrection::zero();
        }
        let (u, v) = compress(&self.u, &self.v, eps);
        LowRankCorrection { u, v }.trim_rows(eps)
    }
}

fn row_inf_norm(m: &DMatrix<Complex64>, i: usize) -> f64 {
    (0..m.ncols()).map(|j| m[(i, j)].norm()).fold(0.0, f64::max)
}

fn trim_trailing_rows(m: &DMatrix<Complex64>, eps_trim: f64) -> DMatrix<Complex64> {
    let max = (0..m.nrows()).map(|i| row_inf_norm(m, i)).fold(0.0, f64::max);
    let thr = eps_trim * max;
    let mut keep = m.nrows();
    while keep > 0 && row_inf_norm(m, keep - 1) <= thr {
        keep -= 1;
    }
    m.rows(0, keep).into_owned()
}

/// Horizontal concatenation with rows padded by zeros to the tallest block.
pub fn concat_cols(blocks: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Entrywise sum of two blocks of possibly different row counts.
pub fn add_padded(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.ncols(), b.ncols());
    let rows = a.nrows().max(b.nrows());
    let mut out = DMatrix::zeros(rows, a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    let mut view = out.view_mut((0, 0), (b.nrows(), b.ncols()));
    view += b;
    out
}

/// Concatenates paired factor blocks and compresses the result.
pub fn assemble_blocks(
    u_blocks: &[DMatrix<Complex64>],
    v_blocks: &[DMatrix<Complex64>],
    eps: f64,
) -> LowRankCorrection {
    if u_blocks.is_empty() {
        return LowRankCorrection::zero();
    }
    let u = concat_cols(u_blocks);
    let v = concat_cols(v_blocks);
    LowRankCorrection::from_factors(u, v).compressed(eps)
}

/// A^T B over the shared active rows (plain transpose).
pub fn gram_t(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = a.nrows().min(b.nrows());
    a.rows(0, m).transpose() * b.rows(0, m)
}

/// Leading (m + n_-) rows of T(a) X for X with m active rows, where n_- is
/// the lower bandwidth of a. Rows beyond m + n_- of the semi-infinite product
/// are exactly zero. Computed per column as a convolution.
pub fn toeplitz_apply(a: &LaurentSeries, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = x.nrows();
    let cols = x.ncols();
    if m == 0 || cols == 0 || a.is_zero() {
        return DMatrix::zeros(0, cols);
    }
    let lo = a.lo();
    let hi = a.hi();
    // Kernel reversed so that the correlation (T(a)X)_i = sum_k a_k x_{i+k}
    // becomes a plain convolution.
    let kernel: Vec<Complex64> = a.coeffs().iter().rev().copied().collect();
    let out_rows = (m as i64 - lo) as usize;
    let mut out = DMatrix::zeros(out_rows, cols);
    for j in 0..cols {
        let col: Vec<Complex64> = (0..m).map(|i| x[(i, j)]).collect();
        let conv = convolve(&col, &kernel);
        for i in 0..out_rows {
            out[(i, j)] = conv[i + hi as usize];
        }
    }
    out
}

/// H(b) X restricted to the d active output rows, where b is a
/// nonnegative-power series of degree d (H has h_{i,j} = b_{i+j-1}).
pub fn hankel_apply(b_plus: &LaurentSeries, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert!(b_plus.lo() == 0, "hankel_apply takes a nonnegative-power series");
    let d = b_plus.hi() as usize;
    let cols = x.ncols();
    if d == 0 {
        return DMatrix::zeros(0, cols);
    }
    let m = x.nrows();
    if m == 0 || cols == 0 {
        return DMatrix::zeros(d, cols);
    }
    let mut out = DMatrix::zeros(d, cols);
    for j in 0..cols {
        let rev_col: Vec<Complex64> = (0..m).rev().map(|i| x[(i, j)]).collect();
        let conv = convolve(&rev_col, b_plus.coeffs());
        for i in 0..d {
            if i + m < conv.len() {
                out[(i, j)] = conv[i + m];
            }
        }
    }
    out
}

/// Dense n x n Hankel block of a nonnegative-power series of degree n.
pub fn dense_hankel(b: &LaurentSeries, n: usize) -> DMatrix<Complex64> {
    assert!(b.lo() == 0);
    DMatrix::from_fn(n, n, |i, j| b.coeff(i as i64 + j as i64 + 1))
}

/// Factors H(a_-) as U V^T by an SVD of its dense n_- x n_- leading block,
/// retaining singular values >= eps * sigma_1.
pub fn hankel_factorize(a_minus: &LaurentSeries, eps: f64) -> LowRankCorrection {
    assert!(a_minus.lo() == 0, "hankel_factorize takes a nonnegative-power series");
    let n = a_minus.hi() as usize;
    if n == 0 {
        return LowRankCorrection::zero();
    }
    if n > DENSE_HANKEL_LIMIT {
        return hankel_factorize_randomized(a_minus, eps);
    }
    let h = dense_hankel(a_minus, n);
    let svd = SVD::new(h, true, true);
    let qu = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let sv = &svd.singular_values;
    let s1 = sv.iter().fold(0.0f64, |a, b| a.max(*b));
    if s1 == 0.0 {
        return LowRankCorrection::zero();
    }
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] >= eps * s1).collect();
    let r = keep.len();
    let mut u = DMatrix::zeros(n, r);
    let mut v = DMatrix::zeros(n, r);
    for (c, &k) in keep.iter().enumerate() {
        let s = Complex64::new(sv[k].sqrt(), 0.0);
        for i in 0..n {
            u[(i, c)] = qu[(i, k)] * s;
            // Plain-transpose convention: V's rows come from rows of the SVD's
            // v_t factor so that U V^T reconstructs H exactly.
            v[(i, c)] = vt[(k, i)] * s;
        }
    }
    LowRankCorrection::from_factors(u, v).trim_rows(eps)
}

/// Above this size the dense Hankel SVD is replaced by a randomized range
/// finder driven by the fast Hankel apply; the blocks that occur in practice
/// have low numerical rank because their generating coefficients decay.
const DENSE_HANKEL_LIMIT: usize = 384;

/// Randomized factorization of the n x n Hankel block: a fixed-seed Gaussian
/// sketch with two power iterations captures the range to near machine
/// precision for rapidly decaying spectra, and a residual probe doubles the
/// sketch width until the reconstruction holds. All products go through the
/// FFT-based Hankel apply, so the cost is O(n log n) per sketch column.
fn hankel_factorize_randomized(a_minus: &LaurentSeries, eps: f64) -> LowRankCorrection {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let n = a_minus.hi() as usize;
    // H x.
    let happly = |x: &DMatrix<Complex64>| hankel_apply(a_minus, x);
    // H^H x = conj(H conj(x)) since the Hankel block is symmetric.
    let happly_h = |x: &DMatrix<Complex64>| hankel_apply(a_minus, &x.conjugate()).conjugate();
    let ortho = |x: DMatrix<Complex64>| x.qr().q();

    let mut rng = StdRng::seed_from_u64(0x7f4a7c15 ^ n as u64);
    let mut gauss = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| {
            // Box-Muller from two uniforms; a Gaussian sketch keeps the
            // range capture well conditioned.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            Complex64::new(r * u2.cos(), r * u2.sin())
        })
    };

    let accept = (100.0 * f64::EPSILON).max(eps);
    let mut l = 48.min(n);
    loop {
        let mut y = happly(&gauss(n, l));
        for _ in 0..2 {
            y = happly_h(&ortho(y));
            y = happly(&ortho(y));
        }
        let q = ortho(y);
        // H ~= Q Q^H H = Q Bt^T with Bt = H^T conj(Q) = H conj(Q).
        let bt = happly(&q.conjugate());

        // Probe the residual on fresh random vectors.
        let probes = gauss(n, 4);
        let hw = happly(&probes);
        let approx = &q * gram_t(&bt, &probes);
        let scale = hw.iter().map(|x| x.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let resid = (&hw - &approx)
            .iter()
            .map(|x| x.norm())
            .fold(0.0f64, f64::max);
        if resid <= accept * scale * (n as f64) || l >= n {
            let (u, v) = compress(&q, &bt, eps);
            return LowRankCorrection::from_factors(u, v).trim_rows(eps);
        }
        l = (2 * l).min(n);
    }
}

/// Rank compression of a factored product F G^T.
///
/// Pivoted QR of both factors, dropping diagonal entries below
/// eps * |R_11|, then an SVD of the small middle matrix dropping singular
/// values below eps * sigma_1. The output satisfies
/// ||F G^T - F~ G~^T||_2 <= gamma * eps * ||F||_2 ||G||_2 with gamma of the
/// order of the column count.
pub fn compress(
    f: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
    eps: f64,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let k = f.ncols();
    assert_eq!(k, g.ncols(), "factor column counts must agree");
    let (m, n) = (f.nrows(), g.nrows());
    let empty = |m: usize, n: usize| (DMatrix::zeros(m, 0), DMatrix::zeros(n, 0));
    if k == 0 || m == 0 || n == 0 {
        return empty(m, n);
    }

    let qr_f = f.clone().col_piv_qr();
    let qr_g = g.clone().col_piv_qr();
    let (qf, rf, pf) = (qr_f.q(), qr_f.r(), qr_f.p());
    let (qg, rg, pg) = (qr_g.q(), qr_g.r(), qr_g.p());

    let h_f = kept_diag(&rf, eps);
    let h_g = kept_diag(&rg, eps);
    if h_f == 0 || h_g == 0 {
        return empty(m, n);
    }

    // F = Q_f R_f P_f^T and G = Q_g R_g P_g^T, so
    // F G^T = Q_f (R_f P_f^T P_g R_g^T) Q_g^T with plain transposes.
    let mut perm_f = DMatrix::<Complex64>::identity(k, k);
    pf.permute_columns(&mut perm_f);
    let mut perm_g = DMatrix::<Complex64>::identity(k, k);
    pg.permute_columns(&mut perm_g);

    let rf_hat = rf.rows(0, h_f).into_owned();
    let rg_hat = rg.rows(0, h_g).into_owned();
    let middle = &rf_hat * perm_f.transpose() * perm_g * rg_hat.transpose();

    let svd = SVD::new(middle, true, true);
    let sv = &svd.singular_values;
    let s1 = sv.iter().fold(0.0f64, |a, b| a.max(*b));
    if s1 == 0.0 {
        return empty(m, n);
    }
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] >= eps * s1).collect();
    let l = keep.len();
    let su = svd.u.as_ref().unwrap();
    let svt = svd.v_t.as_ref().unwrap();
    let mut mid_u = DMatrix::zeros(h_f, l);
    let mut mid_v = DMatrix::zeros(h_g, l);
    for (c, &idx) in keep.iter().enumerate() {
        let s = Complex64::new(sv[idx].sqrt(), 0.0);
        for i in 0..h_f {
            mid_u[(i, c)] = su[(i, idx)] * s;
        }
        for i in 0..h_g {
            mid_v[(i, c)] = svt[(idx, i)] * s;
        }
    }
    let f_out = qf.columns(0, h_f) * mid_u;
    let g_out = qg.columns(0, h_g) * mid_v;
    (f_out, g_out)
}

fn kept_diag(r: &DMatrix<Complex64>, eps: f64) -> usize {
    let d = r.nrows().min(r.ncols());
    if d == 0 {
        return 0;
    }
    let r11 = r[(0, 0)].norm();
    if r11 == 0.0 {
        return 0;
    }
    (0..d).take_while(|&i| r[(i, i)].norm() >= eps * r11).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(lo: i64, re: &[f64]) -> LaurentSeries {
        LaurentSeries::from_coeffs(lo, re.iter().map(|&x| c(x)).collect())
    }

    fn rand_mat(rng: &mut StdRng, m: usize, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn dense_toeplitz_block(a: &LaurentSeries, m: usize, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, n, |i, j| a.coeff(j as i64 - i as i64))
    }

    #[test]
    fn toeplitz_apply_identity_and_shift() {
        let mut rng = StdRng::seed_from_u64(1);
        let x = rand_mat(&mut rng, 5, 2);
        let idy = toeplitz_apply(&LaurentSeries::one(), &x);
        assert_eq!(idy.nrows(), 5);
        assert!((&idy - &x).iter().all(|d| d.norm() < 1e-15));

        // a = z is the upshift: row i of T(z) X is row i+1 of X.
        let up = toeplitz_apply(&LaurentSeries::monomial(1, c(1.0)), &x);
        assert_eq!(up.nrows(), 5);
        for i in 0..4 {
            for j in 0..2 {
                assert!((up[(i, j)] - x[(i + 1, j)]).norm() < 1e-15);
            }
        }
        assert!(up.row(4).iter().all(|d| d.norm() < 1e-15));
    }

    #[test]
    fn toeplitz_apply_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(2);
        let a = series(-3, &[0.4, -1.2, 0.3, 2.0, -0.7, 0.9]);
        let x = rand_mat(&mut rng, 60, 4);
        let got = toeplitz_apply(&a, &x);
        assert_eq!(got.nrows(), 63);
        let dense = dense_toeplitz_block(&a, 63, 60) * &x;
        let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (g, d) in got.iter().zip(dense.iter()) {
            assert!((g - d).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn hankel_apply_examples() {
        let mut rng = StdRng::seed_from_u64(3);
        let x = rand_mat(&mut rng, 4, 2);
        // b = z: only h_{1,1} = 1, so the single output row is row 1 of X.
        let one_row = hankel_apply(&series(0, &[0.0, 1.0]), &x);
        assert_eq!(one_row.nrows(), 1);
        for j in 0..2 {
            assert!((one_row[(0, j)] - x[(0, j)]).norm() < 1e-15);
        }
        // b = 0: zero output with no active rows.
        let z = hankel_apply(&LaurentSeries::zero(), &x);
        assert_eq!(z.nrows(), 0);
    }

    #[test]
    fn hankel_apply_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(4);
        let mut coeffs = vec![0.0; 13];
        for v in coeffs.iter_mut().skip(1) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let b = series(0, &coeffs);
        let x = rand_mat(&mut rng, 12, 3);
        let got = hankel_apply(&b, &x);
        let dense = dense_hankel(&b, 12) * &x;
        let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert_eq!(got.nrows(), 12);
        for (g, d) in got.iter().zip(dense.iter()) {
            assert!((g - d).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn hankel_factorize_examples() {
        // a_- = z: H is the single entry e_1 e_1^T.
        let e = hankel_factorize(&series(0, &[0.0, 1.0]), 1e-15);
        assert_eq!(e.rank(), 1);
        assert!((e.entry(1, 1) - c(1.0)).norm() < 1e-14);
        assert!(e.entry(1, 2).norm() < 1e-14);

        // Anti-triangular block of ones has full rank.
        let ones = series(0, &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let f = hankel_factorize(&ones, 1e-12);
        assert_eq!(f.rank(), 5);

        // Random decaying coefficients: reconstruction within eps * sigma_1.
        let mut rng = StdRng::seed_from_u64(5);
        let mut coeffs = vec![0.0; 21];
        for (i, v) in coeffs.iter_mut().enumerate().skip(1) {
            *v = rng.gen_range(-1.0..1.0) * 0.5f64.powi(i as i32);
        }
        let am = series(0, &coeffs);
        let eps = 1e-10;
        let fac = hankel_factorize(&am, eps);
        let h = dense_hankel(&am, 20);
        let rec = fac.dense_block(20, 20);
        let err = SVD::new(h - rec, false, false).singular_values[0];
        let s1 = SVD::new(dense_hankel(&am, 20), false, false)
            .singular_values
            .iter()
            .fold(0.0f64, |a, b| a.max(*b));
        assert!(err <= eps * s1 * 1.0001, "err {} vs {}", err, eps * s1);
        assert!(fac.rank() <= 20);
    }

    #[test]
    fn compress_rank_one_exact() {
        let mut u = DMatrix::zeros(4, 1);
        u[(0, 0)] = c(1.0);
        let (fu, fv) = compress(&u, &u.clone(), 1e-15);
        assert_eq!(fu.ncols(), 1);
        let rec = &fu * fv.transpose();
        assert!((rec[(0, 0)] - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn compress_duplicated_column_reduces() {
        let mut rng = StdRng::seed_from_u64(6);
        let mut f = rand_mat(&mut rng, 20, 4);
        let mut g = rand_mat(&mut rng, 15, 4);
        let fc = f.column(1).into_owned();
        f.set_column(3, &fc);
        let gc = g.column(1).into_owned();
        g.set_column(3, &gc);
        let eps = 1e-13;
        let (ft, gt) = compress(&f, &g, eps);
        assert!(ft.ncols() < 4, "duplicated structure must compress");
        let err = SVD::new(&f * g.transpose() - &ft * gt.transpose(), false, false)
            .singular_values[0];
        let nf = SVD::new(f.clone(), false, false).singular_values[0];
        let ng = SVD::new(g.clone(), false, false).singular_values[0];
        assert!(err <= 10.0 * 4.0 * eps * nf * ng);
    }

    #[test]
    fn compress_recovers_exact_rank() {
        let mut rng = StdRng::seed_from_u64(7);
        // F = A B, G = C D with inner dimension 5, padded to 12 columns.
        let a = rand_mat(&mut rng, 30, 5);
        let b = rand_mat(&mut rng, 5, 12);
        let cm = rand_mat(&mut rng, 25, 5);
        let d = rand_mat(&mut rng, 5, 12);
        let f = a * b;
        let g = cm * d;
        let (ft, _gt) = compress(&f, &g, 1e-12);
        assert_eq!(ft.ncols(), 5);
    }

    #[test]
    fn correction_plumbing() {
        let mut u = DMatrix::zeros(3, 1);
        u[(0, 0)] = c(1.0);
        let e = LowRankCorrection::from_factors(u.clone(), u.clone());
        assert!((e.fnorm() - 1.0).abs() < 1e-15);
        assert_eq!(e.numerical_rank(1e-14), 1);
        let same = e.add(&LowRankCorrection::zero());
        assert_eq!(same.rank(), 1);

        let mut rng = StdRng::seed_from_u64(8);
        let e3 = LowRankCorrection::from_factors(rand_mat(&mut rng, 10, 3), rand_mat(&mut rng, 8, 3));
        let dense = e3.dense_block(10, 8);
        let direct: f64 = dense.iter().map(|x| x.norm()).sum();
        assert!((e3.fnorm() - direct).abs() <= 1e-13 * direct);
        // Entry evaluation agrees with the dense block.
        assert!((e3.entry(2, 5) - dense[(1, 4)]).norm() < 1e-13);
    }

    #[test]
    fn fnorm_triangle_and_product_inequalities() {
        let mut rng = StdRng::seed_from_u64(9);
        let e1 = LowRankCorrection::from_factors(rand_mat(&mut rng, 7, 2), rand_mat(&mut rng, 6, 2));
        let e2 = LowRankCorrection::from_factors(rand_mat(&mut rng, 9, 3), rand_mat(&mut rng, 5, 3));
        assert!(e1.add(&e2).fnorm() <= e1.fnorm() + e2.fnorm() + 1e-12);
        // Product through factors: E1 E2 = U1 (V1^T U2) V2^T.
        let mid = gram_t(e1.v(), e2.u());
        let prod = LowRankCorrection::from_factors(e1.u() * mid, e2.v().clone());
        assert!(prod.fnorm() <= e1.fnorm() * e2.fnorm() * (1.0 + 1e-12));
    }
}
