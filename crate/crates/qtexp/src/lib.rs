//! Exponentials and powers of semi-infinite quasi-Toeplitz matrices.
//!
//! A quasi-Toeplitz (QT) matrix is A = T(a) + E where T(a) is the
//! semi-infinite Toeplitz matrix of a Wiener-algebra symbol a(z) and E is a
//! correction with finite entrywise absolute sum, kept in low-rank factored
//! form. The exponential of such a matrix is again quasi-Toeplitz,
//! exp(A) = T(exp(a)) + F, and this crate computes that representation.
//!
//! Modules:
//! - [`symbol`]: Laurent-series arithmetic, norms, truncation, exp of a symbol.
//! - [`lowrank`]: factored corrections, Toeplitz/Hankel structured products,
//!   Hankel factorization, and rank compression.
//! - [`qt`]: the QT matrix type and its ring operations.
//! - [`expm`]: Taylor recurrences, scaling and squaring, and the theoretical
//!   bound calculators.
//! - [`finite`]: finite two-corner matrices and the dense reference
//!   exponential used for verification.
//! - [`io`]: the JSON symbol-file schema consumed by the `qtexp` binary.

pub mod expm;
mod fft;
pub mod finite;
pub mod io;
pub mod lowrank;
pub mod qt;
pub mod symbol;

pub use expm::{
    bounds_report, qt_expm, qt_expm_traced, qt_pow, qt_pow_traced, remainder_bound, taylor_step,
    taylor_step_general, BoundReport, CorrectionDiag, ExpmOptions, ExpmTrace, TaylorState,
};
pub use finite::{dense_expm_oracle, dense_truncation, FiniteQtMatrix};
pub use lowrank::{compress, hankel_apply, hankel_factorize, toeplitz_apply, LowRankCorrection};
pub use qt::QtMatrix;
pub use symbol::LaurentSeries;

/// Default relative threshold for rank decisions: the unit roundoff.
pub const DEFAULT_EPS_RANK: f64 = f64::EPSILON;

#[derive(Debug, thiserror::Error)]
pub enum QtError {
    #[error(
        "symbol exponential did not converge within DFT length {max_fft}: \
         tolerance too tight for double precision"
    )]
    SymbolExpNonConvergence { max_fft: usize },
    #[error("Taylor series did not reach the requested tolerance within {max_terms} terms")]
    MaxIterations { max_terms: usize },
    #[error("corner supports overlap: size {n} is too small for this symbol")]
    CornerOverlap { n: usize },
}
