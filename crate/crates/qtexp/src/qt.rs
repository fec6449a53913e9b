//! The quasi-Toeplitz matrix type A = T(a) + E and its ring operations.

use crate::lowrank::{
    add_padded, assemble_blocks, gram_t, hankel_apply, hankel_factorize, toeplitz_apply,
    LowRankCorrection,
};
use crate::symbol::LaurentSeries;
use crate::DEFAULT_EPS_RANK;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// A = T(a) + E with t_{i,j} = a_{j-i} and E a finitely supported correction.
#[derive(Clone, Debug)]
pub struct QtMatrix {
    symbol: LaurentSeries,
    correction: LowRankCorrection,
}

impl QtMatrix {
    pub fn new(symbol: LaurentSeries, correction: LowRankCorrection) -> Self {
        QtMatrix { symbol, correction }
    }

    pub fn from_symbol(symbol: LaurentSeries) -> Self {
        QtMatrix {
            symbol,
            correction: LowRankCorrection::zero(),
        }
    }

    pub fn identity() -> Self {
        Self::from_symbol(LaurentSeries::one())
    }

    pub fn zero() -> Self {
        Self::from_symbol(LaurentSeries::zero())
    }

    pub fn symbol(&self) -> &LaurentSeries {
        &self.symbol
    }

    pub fn correction(&self) -> &LowRankCorrection {
        &self.correction
    }

    pub fn into_parts(self) -> (LaurentSeries, LowRankCorrection) {
        (self.symbol, self.correction)
    }

    /// ||a||_W + ||E||_F, the norm surrogate driving the scaling choice.
    pub fn xi(&self) -> f64 {
        self.symbol.wiener_norm() + self.correction.fnorm()
    }

    pub fn add(&self, other: &QtMatrix, eps: f64) -> QtMatrix {
        QtMatrix {
            symbol: self.symbol.add(&other.symbol),
            correction: self.correction.add(&other.correction).compressed(eps),
        }
    }

    /// Product of two QT matrices with the default rank threshold.
    pub fn mul_default(&self, other: &QtMatrix) -> QtMatrix {
        self.mul(other, DEFAULT_EPS_RANK)
    }

    /// (T(a)+E_a)(T(b)+E_b) = T(ab) - H(a_-)H(b_+) + T(a)E_b + E_a T(b) + E_a E_b,
    /// assembled entirely in factored form and compressed before return.
    pub fn mul(&self, other: &QtMatrix, eps: f64) -> QtMatrix {
        let symbol = self.symbol.mul_denoised(&other.symbol);
        let (a_minus, _, _) = self.symbol.split();
        let (_, _, b_plus) = other.symbol.split();
        let hank = hankel_factorize(&a_minus, eps);

        let mut u_blocks: Vec<DMatrix<Complex64>> = Vec::new();
        let mut v_blocks: Vec<DMatrix<Complex64>> = Vec::new();

        if !hank.is_zero() && !b_plus.is_zero() {
            u_blocks.push(hank.u().map(|x| -x));
            v_blocks.push(hankel_apply(&b_plus, hank.v()));
        }
        let eb = &other.correction;
        if !eb.is_zero() {
            // T(a) E_b
            u_blocks.push(toeplitz_apply(&self.symbol, eb.u()));
            v_blocks.push(eb.v().clone());
        }
        let ea = &self.correction;
        if !ea.is_zero() {
            // E_a T(b), with T(b)^T realized as the Toeplitz matrix of the
            // reversed symbol.
            u_blocks.push(ea.u().clone());
            v_blocks.push(toeplitz_apply(&other.symbol.reversed(), ea.v()));
        }
        if !ea.is_zero() && !eb.is_zero() {
            // E_a E_b = U_a (V_a^T U_b) V_b^T
            u_blocks.push(ea.u() * gram_t(ea.v(), eb.u()));
            v_blocks.push(eb.v().clone());
        }

        let correction = assemble(u_blocks, v_blocks, eps);
        QtMatrix { symbol, correction }
    }

    /// Squaring via the dedicated factor update
    /// U^ = [-U | T(a)W | W], V^ = [H(a_+)V | Y | T(a)^T Y + Y (W^T Y)],
    /// where H(a_-) = U V^T and E = W Y^T.
    pub fn square(&self, eps: f64) -> QtMatrix {
        let symbol = self.symbol.mul_denoised(&self.symbol);
        let (a_minus, _, a_plus) = self.symbol.split();
        let hank = hankel_factorize(&a_minus, eps);

        let mut u_blocks: Vec<DMatrix<Complex64>> = Vec::new();
        let mut v_blocks: Vec<DMatrix<Complex64>> = Vec::new();

        if !hank.is_zero() && !a_plus.is_zero() {
            u_blocks.push(hank.u().map(|x| -x));
            v_blocks.push(hankel_apply(&a_plus, hank.v()));
        }
        let e = &self.correction;
        if !e.is_zero() {
            let (w, y) = (e.u(), e.v());
            u_blocks.push(toeplitz_apply(&self.symbol, w));
            v_blocks.push(y.clone());
            let t_y = toeplitz_apply(&self.symbol.reversed(), y);
            let cross = y * gram_t(w, y);
            u_blocks.push(w.clone());
            v_blocks.push(add_padded(&t_y, &cross));
        }

        let correction = assemble(u_blocks, v_blocks, eps);
        QtMatrix { symbol, correction }
    }

    /// Leading m x n dense block of T(a) + E.
    pub fn dense_block(&self, m: usize, n: usize) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_fn(m, n, |i, j| self.symbol.coeff(j as i64 - i as i64));
        out += self.correction.dense_block(m, n);
        out
    }
}

fn assemble(
    u_blocks: Vec<DMatrix<Complex64>>,
    v_blocks: Vec<DMatrix<Complex64>>,
    eps: f64,
) -> LowRankCorrection {
    assemble_blocks(&u_blocks, &v_blocks, eps)
}
