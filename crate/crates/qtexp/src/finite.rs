//! Finite quasi-Toeplitz matrices with two corner corrections, and the dense
//! reference exponential.
//!
//! An n x n matrix M = T_n(a) + E_nw + J E_se J carries corrections in both
//! the north-west and the south-east corner; the flip J reverses row and
//! column order. Since J T_n(a) J = T_n(a~) with a~(z) = a(1/z), the SE
//! corner is handled by re-running the semi-infinite machinery on the
//! reversed symbol, so both corners reuse the same structured kernels.

use crate::expm::qt_expm;
use crate::lowrank::LowRankCorrection;
use crate::qt::QtMatrix;
use crate::symbol::LaurentSeries;
use crate::QtError;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// n x n matrix T_n(a) + nw + J se J. The SE correction is stored in flipped
/// coordinates: entry (i, j) of `se` sits at (n+1-i, n+1-j) of the matrix.
#[derive(Clone, Debug)]
pub struct FiniteQtMatrix {
    n: usize,
    symbol: LaurentSeries,
    nw: LowRankCorrection,
    se: LowRankCorrection,
}

impl FiniteQtMatrix {
    /// Fails when the corner supports overlap or a symbol diagonal falls
    /// outside the n x n section, i.e. n is too small for this data.
    pub fn new(
        n: usize,
        symbol: LaurentSeries,
        nw: LowRankCorrection,
        se: LowRankCorrection,
    ) -> Result<Self, QtError> {
        assert!(n > 0, "size must be positive");
        let offsets_fit = symbol.hi() < n as i64 && -symbol.lo() < n as i64;
        if corners_overlap(n, &nw, &se) || !offsets_fit {
            return Err(QtError::CornerOverlap { n });
        }
        Ok(FiniteQtMatrix { n, symbol, nw, se })
    }

    /// Plain finite Toeplitz section T_n(a).
    pub fn from_symbol(n: usize, symbol: LaurentSeries) -> Result<Self, QtError> {
        Self::new(n, symbol, LowRankCorrection::zero(), LowRankCorrection::zero())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symbol(&self) -> &LaurentSeries {
        &self.symbol
    }

    pub fn nw(&self) -> &LowRankCorrection {
        &self.nw
    }

    /// The SE correction in flipped coordinates.
    pub fn se(&self) -> &LowRankCorrection {
        &self.se
    }

    /// Full dense reconstruction.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            self.symbol.coeff(j as i64 - i as i64)
                + self.nw.entry(i + 1, j + 1)
                + self.se.entry(n - i, n - j)
        })
    }

    /// M^2 via the identity
    /// T_n(a)^2 = T_n(a^2) - H_n(a_-)H_n(a_+) - J H_n(a_+)H_n(a_-) J,
    /// with each corner updated by the semi-infinite square of its own view.
    pub fn square(&self, eps: f64) -> Result<Self, QtError> {
        self.require_wide_enough()?;
        let nw_view = QtMatrix::new(self.symbol.clone(), self.nw.clone());
        let se_view = QtMatrix::new(self.symbol.reversed(), self.se.clone());
        let (sym, nw) = nw_view.square(eps).into_parts();
        let (_, se) = se_view.square(eps).into_parts();
        Self::new(self.n, sym, nw, se)
    }

    /// exp(M) = T_n(exp(a)) + two corner corrections, each computed by the
    /// semi-infinite exponential: the NW corner from (a, nw) and the SE
    /// corner from the reversed view (a~, se).
    pub fn expm(&self, tol: f64) -> Result<Self, QtError> {
        self.require_wide_enough()?;
        let nw_view = QtMatrix::new(self.symbol.clone(), self.nw.clone());
        let se_view = QtMatrix::new(self.symbol.reversed(), self.se.clone());
        let (sym, nw) = qt_expm(&nw_view, tol)?.into_parts();
        let (_, se) = qt_expm(&se_view, tol)?.into_parts();
        Self::new(self.n, sym, nw, se)
    }

    /// The two-corner identities assume the symbol window fits strictly
    /// inside the section: n > n_- + n_+.
    fn require_wide_enough(&self) -> Result<(), QtError> {
        if (self.symbol.hi() - self.symbol.lo()) as usize >= self.n {
            Err(QtError::CornerOverlap { n: self.n })
        } else {
            Ok(())
        }
    }
}

/// True when some entry is reached by both corners: the row supports and the
/// column supports both intersect.
fn corners_overlap(n: usize, nw: &LowRankCorrection, se: &LowRankCorrection) -> bool {
    let rows = nw.rows_u() + se.rows_u() > n;
    let cols = nw.rows_v() + se.rows_v() > n;
    rows && cols
}

/// Dense scaling-and-squaring Taylor exponential, the independent reference
/// path. Shares no code with the structured algorithms.
pub fn dense_expm_oracle(m: &DMatrix<Complex64>, tol: f64) -> DMatrix<Complex64> {
    assert!(m.is_square());
    assert!(tol > 0.0);
    let n = m.nrows();
    let one_norm = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut q: i32 = 0;
    while one_norm / 2f64.powi(q) >= 1.0 {
        q += 1;
    }
    let ms = m.map(|x| x * Complex64::new(2f64.powi(-q), 0.0));
    let ns = one_norm * 2f64.powi(-q);

    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut i = 1usize;
    loop {
        term = (&term * &ms).map(|x| x / Complex64::new(i as f64, 0.0));
        sum += &term;
        let tnorm = (0..n)
            .map(|j| (0..n).map(|r| term[(r, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        // Geometric tail bound: remaining terms sum below tnorm * ns/(1-ns).
        if ns < 1.0 && tnorm * ns / (1.0 - ns) <= tol / 2f64.powi(q + 1) {
            break;
        }
        i += 1;
        assert!(i < 500, "dense Taylor did not converge");
    }
    for _ in 0..q {
        sum = &sum * &sum;
    }
    sum
}

/// Dense N x N leading principal submatrix of T(a) + E, assembled entry by
/// entry straight from the definitions.
pub fn dense_truncation(a: &LaurentSeries, e: &LowRankCorrection, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        a.coeff(j as i64 - i as i64) + e.entry(i + 1, j + 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const EPS: f64 = 1e-14;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(lo: i64, re: &[f64]) -> LaurentSeries {
        LaurentSeries::from_coeffs(lo, re.iter().map(|&x| c(x)).collect())
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn square_hand_example_n3() {
        // a = z^{-1} + z, n = 3: M^2 = [[1,0,1],[0,2,0],[1,0,1]] and the
        // corrections are -e1 e1^T (NW) and -e3 e3^T (SE).
        let a = series(-1, &[1.0, 0.0, 1.0]);
        let m = FiniteQtMatrix::from_symbol(3, a).unwrap();
        let sq = m.square(EPS).unwrap();
        let want = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0],
        )
        .map(c);
        assert!(max_abs(&(sq.dense() - want)) < 1e-14);
        assert!((sq.nw().entry(1, 1) + c(1.0)).norm() < 1e-14);
        assert!((sq.nw().fnorm() - 1.0).abs() < 1e-13);
        assert!((sq.se().entry(1, 1) + c(1.0)).norm() < 1e-14);
        assert!((sq.se().fnorm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn square_upper_triangular_keeps_corners_zero() {
        let a = series(0, &[0.5, 0.3, 0.2]);
        let m = FiniteQtMatrix::from_symbol(16, a).unwrap();
        let sq = m.square(EPS).unwrap();
        assert!(sq.nw().is_zero());
        assert!(sq.se().is_zero());
    }

    #[test]
    fn square_matches_dense_square() {
        let mut rng = StdRng::seed_from_u64(31);
        let coeffs: Vec<Complex64> = (0..7)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let a = LaurentSeries::from_coeffs(-3, coeffs);
        let m = FiniteQtMatrix::from_symbol(64, a).unwrap();
        let sq = m.square(EPS).unwrap();
        let dense = m.dense();
        let want = &dense * &dense;
        assert!(max_abs(&(sq.dense() - want)) < 1e-12);
    }

    #[test]
    fn square_with_corners_matches_dense_square() {
        let mut rng = StdRng::seed_from_u64(32);
        let coeffs: Vec<Complex64> = (0..5)
            .map(|_| Complex64::new(rng.gen_range(-0.6..0.6), 0.0))
            .collect();
        let a = LaurentSeries::from_coeffs(-2, coeffs);
        let randm = |rng: &mut StdRng, r: usize, co: usize| {
            DMatrix::from_fn(r, co, |_, _| Complex64::new(rng.gen_range(-0.5..0.5), 0.0))
        };
        let nw = LowRankCorrection::from_factors(randm(&mut rng, 4, 2), randm(&mut rng, 4, 2));
        let se = LowRankCorrection::from_factors(randm(&mut rng, 3, 2), randm(&mut rng, 3, 2));
        let m = FiniteQtMatrix::new(64, a, nw, se).unwrap();
        let sq = m.square(EPS).unwrap();
        let dense = m.dense();
        let want = &dense * &dense;
        assert!(max_abs(&(sq.dense() - want)) < 1e-12);
    }

    #[test]
    fn overlap_is_rejected() {
        let a = series(-1, &[1.0, 0.0, 1.0]);
        let big = DMatrix::from_element(5, 1, c(1.0));
        let nw = LowRankCorrection::from_factors(big.clone(), big.clone());
        let se = LowRankCorrection::from_factors(big.clone(), big);
        assert!(matches!(
            FiniteQtMatrix::new(8, a, nw, se),
            Err(QtError::CornerOverlap { n: 8 })
        ));
    }

    #[test]
    fn expm_constant_symbol() {
        let m = FiniteQtMatrix::from_symbol(10, LaurentSeries::constant(c(0.7))).unwrap();
        let e = m.expm(1e-13).unwrap();
        assert!(e.nw().is_zero());
        assert!(e.se().is_zero());
        let want = DMatrix::<Complex64>::identity(10, 10).map(|x| x * c(0.7f64.exp()));
        assert!(max_abs(&(e.dense() - want)) < 1e-13);
    }

    #[test]
    fn expm_triangular_has_zero_corners() {
        let a = series(0, &[0.4, 0.8, 0.3]);
        let m = FiniteQtMatrix::from_symbol(40, a).unwrap();
        let e = m.expm(1e-13).unwrap();
        assert!(e.nw().fnorm() <= 1e-12);
        assert!(e.se().fnorm() <= 1e-12);
    }

    #[test]
    fn expm_tridiagonal_matches_dense_oracle() {
        let a = series(-1, &[1.0, 0.0, 1.0]);
        let m = FiniteQtMatrix::from_symbol(200, a).unwrap();
        let e = m.expm(1e-13).unwrap();
        let want = dense_expm_oracle(&m.dense(), 1e-15);
        let rel = max_abs(&(e.dense() - &want)) / max_abs(&want);
        assert!(rel <= 1e-11, "rel err {rel}");
    }

    #[test]
    fn expm_corner_flip_symmetry() {
        // SE corner for a equals the NW corner for the reversed symbol.
        let a = series(-2, &[0.2, 0.5, 0.1, 0.7, 0.3]);
        let m = FiniteQtMatrix::from_symbol(120, a.clone()).unwrap();
        let mr = FiniteQtMatrix::from_symbol(120, a.reversed()).unwrap();
        let e = m.expm(1e-13).unwrap();
        let er = mr.expm(1e-13).unwrap();
        let k = e.se().rows_u().max(er.nw().rows_u()).max(1);
        let l = e.se().rows_v().max(er.nw().rows_v()).max(1);
        let d = e.se().dense_block(k, l) - er.nw().dense_block(k, l);
        assert!(max_abs(&d) < 1e-13);
    }

    #[test]
    fn oracle_trivials() {
        let z = DMatrix::<Complex64>::zeros(4, 4);
        assert!(max_abs(&(dense_expm_oracle(&z, 1e-14) - DMatrix::identity(4, 4))) < 1e-15);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0),
            c(-2.0),
            c(0.5),
        ]));
        let ed = dense_expm_oracle(&d, 1e-14);
        for (i, want) in [1.0f64.exp(), (-2.0f64).exp(), 0.5f64.exp()].iter().enumerate() {
            assert!((ed[(i, i)] - c(*want)).norm() < 1e-13);
        }

        let mut nilp = DMatrix::<Complex64>::zeros(2, 2);
        nilp[(0, 1)] = c(1.0);
        let en = dense_expm_oracle(&nilp, 1e-14);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]).map(c);
        assert!(max_abs(&(en - want)) < 1e-15);
    }

    #[test]
    fn dense_truncation_examples() {
        let id = dense_truncation(&LaurentSeries::one(), &LowRankCorrection::zero(), 2);
        assert!(max_abs(&(id - DMatrix::identity(2, 2))) == 0.0);

        let alpha = 2.5;
        let a = series(-1, &[1.0, alpha, 1.0]);
        let t = dense_truncation(&a, &LowRankCorrection::zero(), 3);
        let want = DMatrix::from_row_slice(
            3,
            3,
            &[alpha, 1.0, 0.0, 1.0, alpha, 1.0, 0.0, 1.0, alpha],
        )
        .map(c);
        assert!(max_abs(&(t - want)) == 0.0);
    }

    #[test]
    fn dense_truncation_agrees_with_qt_dense_block() {
        let mut rng = StdRng::seed_from_u64(33);
        let coeffs: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let a = LaurentSeries::from_coeffs(-2, coeffs);
        let u = DMatrix::from_fn(4, 2, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        let v = DMatrix::from_fn(5, 2, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        let e = LowRankCorrection::from_factors(u, v);
        let qt = QtMatrix::new(a.clone(), e.clone());
        let d = dense_truncation(&a, &e, 12) - qt.dense_block(12, 12);
        assert!(max_abs(&d) < 1e-15);
    }
}
