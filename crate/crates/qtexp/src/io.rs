//! JSON schema for symbols and QT matrices, plus the CSV row emitted by the
//! experiment commands. All file handling for the `qtexp` binary goes
//! through these types.

use crate::lowrank::LowRankCorrection;
use crate::qt::QtMatrix;
use crate::symbol::LaurentSeries;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// On-disk form of a symbol window with an optional correction:
/// `{"lo": -1, "hi": 1, "coeffs": [[1,0],[2,0],[1,0]]}`.
/// `coeffs[k]` is the coefficient of z^(lo+k) as a `[re, im]` pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolFile {
    pub lo: i64,
    pub hi: i64,
    pub coeffs: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<CorrectionFile>,
}

/// Factor pair of a correction, each block row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectionFile {
    pub u: DenseBlock,
    pub v: DenseBlock,
}

/// Row-major dense complex block; `data` holds rows*cols `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

/// Schema violations detected when loading a [`SymbolFile`].
#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("coeffs length {got} does not match hi - lo + 1 = {want}")]
    CoeffCount { want: usize, got: usize },
    #[error("lo must be <= hi (got lo = {lo}, hi = {hi})")]
    BadWindow { lo: i64, hi: i64 },
    #[error("non-finite value in {place}")]
    NonFinite { place: &'static str },
    #[error("block data length {got} does not match rows*cols = {want} in {place}")]
    BlockShape {
        place: &'static str,
        want: usize,
        got: usize,
    },
    #[error("u and v must have the same number of columns (got {u_cols} and {v_cols})")]
    FactorColumns { u_cols: usize, v_cols: usize },
}

fn check_finite(pairs: &[[f64; 2]], place: &'static str) -> Result<(), SchemaError> {
    if pairs.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(SchemaError::NonFinite { place })
    }
}

impl DenseBlock {
    fn validate(&self, place: &'static str) -> Result<(), SchemaError> {
        let want = self.rows * self.cols;
        if self.data.len() != want {
            return Err(SchemaError::BlockShape {
                place,
                want,
                got: self.data.len(),
            });
        }
        check_finite(&self.data, place)
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            Complex64::new(re, im)
        })
    }

    fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        DenseBlock {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl SymbolFile {
    /// Validates the schema and builds the in-memory matrix.
    pub fn to_qt(&self) -> Result<QtMatrix, SchemaError> {
        if self.lo > self.hi {
            return Err(SchemaError::BadWindow {
                lo: self.lo,
                hi: self.hi,
            });
        }
        let want = (self.hi - self.lo + 1) as usize;
        if self.coeffs.len() != want {
            return Err(SchemaError::CoeffCount {
                want,
                got: self.coeffs.len(),
            });
        }
        check_finite(&self.coeffs, "coeffs")?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let symbol = LaurentSeries::from_coeffs(self.lo, coeffs);
        let correction = match &self.correction {
            None => LowRankCorrection::zero(),
            Some(c) => {
                c.u.validate("correction.u")?;
                c.v.validate("correction.v")?;
                if c.u.cols != c.v.cols {
                    return Err(SchemaError::FactorColumns {
                        u_cols: c.u.cols,
                        v_cols: c.v.cols,
                    });
                }
                LowRankCorrection::from_factors(c.u.to_matrix(), c.v.to_matrix())
            }
        };
        Ok(QtMatrix::new(symbol, correction))
    }

    pub fn from_qt(m: &QtMatrix) -> Self {
        let a = m.symbol();
        let coeffs = (a.lo()..=a.hi())
            .map(|i| {
                let c = a.coeff(i);
                [c.re, c.im]
            })
            .collect();
        let correction = if m.correction().is_zero() {
            None
        } else {
            Some(CorrectionFile {
                u: DenseBlock::from_matrix(m.correction().u()),
                v: DenseBlock::from_matrix(m.correction().v()),
            })
        };
        SymbolFile {
            lo: a.lo(),
            hi: a.hi(),
            coeffs,
            correction,
        }
    }
}

/// One line of experiment output; the error column is blank when the dense
/// oracle was skipped.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub case: String,
    pub n_minus: i64,
    pub elapsed_s: f64,
    pub rel_err: Option<f64>,
    pub band: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

pub const EXPERIMENT_HEADER: &str = "case,n_minus,elapsed_s,rel_err,band,rows,cols,rank";

impl ExperimentRow {
    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        write!(
            line,
            "{},{},{:.3},{},{},{},{},{}",
            self.case,
            self.n_minus,
            self.elapsed_s,
            self.rel_err.map(|e| format!("{e:e}")).unwrap_or_default(),
            self.band,
            self.rows,
            self.cols,
            self.rank
        )
        .unwrap();
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_symbol_with_correction() {
        let mut u = DMatrix::zeros(2, 1);
        u[(0, 0)] = Complex64::new(1.0, -0.5);
        let mut v = DMatrix::zeros(3, 1);
        v[(2, 0)] = Complex64::new(0.25, 2.0);
        let qt = QtMatrix::new(
            LaurentSeries::from_coeffs(
                -1,
                vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 3.0),
                    Complex64::new(-2.0, 0.0),
                ],
            ),
            LowRankCorrection::from_factors(u, v),
        );
        let json = serde_json::to_string(&SymbolFile::from_qt(&qt)).unwrap();
        let back: SymbolFile = serde_json::from_str(&json).unwrap();
        let qt2 = back.to_qt().unwrap();
        assert_eq!(qt.symbol(), qt2.symbol());
        assert_eq!(
            qt.correction().dense_block(3, 3),
            qt2.correction().dense_block(3, 3)
        );
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        let f = SymbolFile {
            lo: -1,
            hi: 1,
            coeffs: vec![[1.0, 0.0], [2.0, 0.0]],
            correction: None,
        };
        assert!(matches!(f.to_qt(), Err(SchemaError::CoeffCount { .. })));

        let f = SymbolFile {
            lo: 0,
            hi: 0,
            coeffs: vec![[f64::NAN, 0.0]],
            correction: None,
        };
        assert!(matches!(f.to_qt(), Err(SchemaError::NonFinite { .. })));

        let f = SymbolFile {
            lo: 0,
            hi: 0,
            coeffs: vec![[1.0, 0.0]],
            correction: Some(CorrectionFile {
                u: DenseBlock {
                    rows: 2,
                    cols: 2,
                    data: vec![[1.0, 0.0]; 4],
                },
                v: DenseBlock {
                    rows: 2,
                    cols: 1,
                    data: vec![[1.0, 0.0]; 2],
                },
            }),
        };
        assert!(matches!(f.to_qt(), Err(SchemaError::FactorColumns { .. })));
    }

    #[test]
    fn experiment_row_blank_error_column() {
        let row = ExperimentRow {
            case: "banded".into(),
            n_minus: 40,
            elapsed_s: 1.25,
            rel_err: None,
            band: 2377,
            rows: 60,
            cols: 50,
            rank: 11,
        };
        assert_eq!(row.to_csv_line(), "banded,40,1.250,,2377,60,50,11");
    }
}
