//! Command-line front end: exponentials of quasi-Toeplitz matrices, the
//! banded benchmark, rank-growth curves, the tridiagonal suite, and oracle
//! verification.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 numerical threshold
//! violation.

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use qtexp::io::{ExperimentRow, SymbolFile, EXPERIMENT_HEADER};
use qtexp::{
    dense_expm_oracle, dense_truncation, hankel_factorize, qt_expm_traced, qt_pow_traced,
    taylor_step, taylor_step_general, CorrectionDiag, ExpmOptions, LaurentSeries, QtMatrix,
    TaylorState, DEFAULT_EPS_RANK,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Largest dense truncation the oracle comparison is attempted on; beyond
/// this the dense exponential dominates the runtime and the error column is
/// left blank (structural checks still apply).
const ORACLE_SIZE_LIMIT: usize = 1500;

/// Reported bandwidth counts coefficients above `BAND_MARGIN * tol * max`.
/// The margin keeps the count clear of the symbol-truncation level, so a
/// coefficient sitting exactly at the truncation knife edge cannot flip the
/// structural numbers between otherwise equivalent inputs.
const BAND_MARGIN: f64 = 10.0;

const EXIT_PARSE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "qtexp", version, about = "Exponentials of quasi-Toeplitz matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute exp(A) for a symbol file and write the result in the same schema.
    Exp {
        /// Input symbol JSON file.
        #[arg(long)]
        symbol: PathBuf,
        /// Target accuracy.
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the rank-compression threshold.
        #[arg(long)]
        eps_rank: Option<f64>,
    },
    /// Banded benchmark: a(z) = sum_{i=1}^{n+} z^i + sum_{i=0}^{n-} z^{-i}.
    BenchBanded {
        /// Values of n_minus, comma separated or repeated.
        #[arg(long = "n-minus", value_delimiter = ',', required = true)]
        n_minus: Vec<i64>,
        #[arg(long = "n-plus", default_value_t = 5)]
        n_plus: i64,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        eps_rank: Option<f64>,
    },
    /// Per-step correction sizes of the power, partial-sum, and squaring phases.
    RankGrowth {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 30)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        eps_rank: Option<f64>,
    },
    /// Compare exp(A) against the dense oracle on a leading block.
    Verify {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// Block size m of the comparison.
        #[arg(long, default_value_t = 100)]
        block: usize,
        /// Dense truncation size N; must be at least 2m.
        #[arg(long, default_value_t = 300)]
        trunc: usize,
        #[arg(long)]
        eps_rank: Option<f64>,
    },
    /// Tridiagonal suite: a(z) = z^{-1} + alpha + z per alpha.
    Tridiag {
        #[arg(long = "alpha", required = true, allow_negative_numbers = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        eps_rank: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Exp {
            symbol,
            tol,
            out,
            eps_rank,
        } => cmd_exp(&symbol, tol, out.as_deref(), opts(eps_rank)),
        Cmd::BenchBanded {
            n_minus,
            n_plus,
            tol,
            out,
            eps_rank,
        } => cmd_bench_banded(&n_minus, n_plus, tol, out.as_deref(), opts(eps_rank)),
        Cmd::RankGrowth {
            symbol,
            kmax,
            tol,
            out,
            eps_rank,
        } => cmd_rank_growth(&symbol, kmax, tol, out.as_deref(), opts(eps_rank)),
        Cmd::Verify {
            symbol,
            tol,
            block,
            trunc,
            eps_rank,
        } => cmd_verify(&symbol, tol, block, trunc, opts(eps_rank)),
        Cmd::Tridiag {
            alpha,
            tol,
            out,
            eps_rank,
        } => cmd_tridiag(&alpha, tol, out.as_deref(), opts(eps_rank)),
    }
}

fn opts(eps_rank: Option<f64>) -> ExpmOptions {
    ExpmOptions {
        eps_rank: eps_rank.unwrap_or(DEFAULT_EPS_RANK),
        extra_scaling: 0,
    }
}

fn load_qt(path: &Path) -> Result<QtMatrix, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    let file: SymbolFile = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: cannot parse {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    file.to_qt().map_err(|e| {
        eprintln!("error: invalid symbol file {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_PARSE)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// max-row-sum norm of the difference relative to the reference.
fn rel_inf_err(got: &DMatrix<Complex64>, want: &DMatrix<Complex64>) -> f64 {
    let inf = |m: &DMatrix<Complex64>| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    inf(&(got - want)) / inf(want).max(f64::MIN_POSITIVE)
}

fn cmd_exp(symbol: &Path, tol: f64, out: Option<&Path>, opts: ExpmOptions) -> ExitCode {
    let a = match load_qt(symbol) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let result = match qt_expm_traced(&a, tol, &opts) {
        Ok((m, _)) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let mut json = serde_json::to_string_pretty(&SymbolFile::from_qt(&result)).unwrap();
    json.push('\n');
    match emit(out, &json) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

/// a(z) = sum_{i=1}^{n_plus} z^i + sum_{i=0}^{n_minus} z^{-i}: every
/// coefficient in the window is 1.
fn banded_symbol(n_minus: i64, n_plus: i64) -> LaurentSeries {
    let len = (n_minus + n_plus + 1) as usize;
    LaurentSeries::from_coeffs(-n_minus, vec![Complex64::new(1.0, 0.0); len])
}

fn cmd_bench_banded(
    n_minus: &[i64],
    n_plus: i64,
    tol: f64,
    out: Option<&Path>,
    opts: ExpmOptions,
) -> ExitCode {
    if n_plus < 1 {
        eprintln!("error: --n-plus must be at least 1");
        return ExitCode::from(EXIT_PARSE);
    }
    let mut csv = String::from(EXPERIMENT_HEADER);
    csv.push('\n');
    let mut worst: f64 = 0.0;
    for &nm in n_minus {
        if nm < 0 {
            eprintln!("error: --n-minus values must be nonnegative");
            return ExitCode::from(EXIT_PARSE);
        }
        let a = QtMatrix::from_symbol(banded_symbol(nm, n_plus));
        let start = Instant::now();
        let result = match qt_expm_traced(&a, tol, &opts) {
            Ok((m, _)) => m,
            Err(e) => {
                eprintln!("error: n_minus = {nm}: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        };
        let elapsed = start.elapsed().as_secs_f64();
        let band = result.symbol().numerical_bandwidth(BAND_MARGIN * tol);
        let m = band.max(16);
        let rel_err = if 2 * m <= ORACLE_SIZE_LIMIT {
            let trunc = dense_truncation(a.symbol(), a.correction(), 2 * m);
            let want = dense_expm_oracle(&trunc, tol)
                .view((0, 0), (m, m))
                .into_owned();
            let err = rel_inf_err(&result.dense_block(m, m), &want);
            worst = worst.max(err);
            Some(err)
        } else {
            None
        };
        let row = ExperimentRow {
            case: "banded".into(),
            n_minus: nm,
            elapsed_s: elapsed,
            rel_err,
            band,
            rows: result.correction().rows_u(),
            cols: result.correction().rows_v(),
            rank: result.correction().numerical_rank(opts.eps_rank),
        };
        csv.push_str(&row.to_csv_line());
        csv.push('\n');
    }
    if let Err(code) = emit(out, &csv) {
        return code;
    }
    if worst > 100.0 * tol {
        eprintln!("error: oracle mismatch {worst:e} exceeds {:e}", 100.0 * tol);
        return ExitCode::from(EXIT_NUMERIC);
    }
    ExitCode::SUCCESS
}

fn cmd_rank_growth(
    symbol: &Path,
    kmax: usize,
    tol: f64,
    out: Option<&Path>,
    opts: ExpmOptions,
) -> ExitCode {
    if kmax < 1 {
        eprintln!("error: --kmax must be at least 1");
        return ExitCode::from(EXIT_PARSE);
    }
    let a = match load_qt(symbol) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let mut csv = String::from("section,k,rows,cols,rank\n");
    let push = |csv: &mut String, section: &str, d: &CorrectionDiag| {
        csv.push_str(&format!("{section},{},{},{},{}\n", d.k, d.rows, d.cols, d.rank));
    };

    let (_, power_diags) = qt_pow_traced(&a, kmax, opts.eps_rank);
    for d in &power_diags {
        push(&mut csv, "power", d);
    }

    // Partial sums of the unscaled Taylor series.
    let (a_minus, _, _) = a.symbol().split();
    let hankel = hankel_factorize(&a_minus, opts.eps_rank);
    let general = !a.correction().is_zero();
    let mut st = TaylorState::initial();
    for _ in 0..kmax {
        st = if general {
            taylor_step_general(&st, &a, &hankel, opts.eps_rank, 0.0)
        } else {
            taylor_step(&st, a.symbol(), &hankel, opts.eps_rank, 0.0)
        };
        push(
            &mut csv,
            "partial_sum",
            &CorrectionDiag::of(st.i, &st.accum, opts.eps_rank),
        );
    }

    match qt_expm_traced(&a, tol, &opts) {
        Ok((_, trace)) => {
            for d in &trace.squaring {
                push(&mut csv, "squaring", d);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    match emit(out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn cmd_verify(
    symbol: &Path,
    tol: f64,
    block: usize,
    trunc: usize,
    opts: ExpmOptions,
) -> ExitCode {
    if block < 1 || trunc < 2 * block {
        eprintln!("error: --trunc must be at least twice --block (boundary-effect guard)");
        return ExitCode::from(EXIT_PARSE);
    }
    let a = match load_qt(symbol) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let result = match qt_expm_traced(&a, tol, &opts) {
        Ok((m, _)) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let dense = dense_truncation(a.symbol(), a.correction(), trunc);
    let want = dense_expm_oracle(&dense, tol)
        .view((0, 0), (block, block))
        .into_owned();
    let err = rel_inf_err(&result.dense_block(block, block), &want);
    println!("rel_inf_err m={block} N={trunc}: {err:e}");
    if err <= 100.0 * tol {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: {err:e} exceeds threshold {:e}", 100.0 * tol);
        ExitCode::from(EXIT_NUMERIC)
    }
}

fn cmd_tridiag(alpha: &[f64], tol: f64, out: Option<&Path>, opts: ExpmOptions) -> ExitCode {
    let mut csv = String::from(EXPERIMENT_HEADER);
    csv.push('\n');
    let mut worst: f64 = 0.0;
    for &al in alpha {
        let a = QtMatrix::from_symbol(LaurentSeries::from_coeffs(
            -1,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(al, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        ));
        let start = Instant::now();
        let result = match qt_expm_traced(&a, tol, &opts) {
            Ok((m, _)) => m,
            Err(e) => {
                eprintln!("error: alpha = {al}: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        };
        let elapsed = start.elapsed().as_secs_f64();
        let (m, n) = (100, 300);
        let dense = dense_truncation(a.symbol(), a.correction(), n);
        let want = dense_expm_oracle(&dense, tol)
            .view((0, 0), (m, m))
            .into_owned();
        let err = rel_inf_err(&result.dense_block(m, m), &want);
        worst = worst.max(err);
        let row = ExperimentRow {
            case: format!("alpha={al}"),
            n_minus: 1,
            elapsed_s: elapsed,
            rel_err: Some(err),
            band: result.symbol().numerical_bandwidth(BAND_MARGIN * tol),
            rows: result.correction().rows_u(),
            cols: result.correction().rows_v(),
            rank: result.correction().numerical_rank(opts.eps_rank),
        };
        csv.push_str(&row.to_csv_line());
        csv.push('\n');
    }
    if let Err(code) = emit(out, &csv) {
        return code;
    }
    if worst > 100.0 * tol {
        eprintln!("error: oracle mismatch {worst:e} exceeds {:e}", 100.0 * tol);
        return ExitCode::from(EXIT_NUMERIC);
    }
    ExitCode::SUCCESS
}
