//! Cross-pair SSA: Hankel embedding of a panel row, its time-lagged block
//! form, the two-point correlation matrix and rank-`l` forecasts.
//!
//! The information matrix of a row `y` (one value per pair) with averaging
//! interval `K` is the `K × (M − K + 1)` Hankel matrix `U[r][c] = y[c + r]`.
//! Each of its rows is a window of `M − K + 1` consecutive pairs. The lagged
//! variant stacks `I × (N − I + 1)` such blocks taken at consecutive times.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::eigen::{jacobi_eigen, EigenDecomposition, EigenError, JacobiConfig, SymmetricMatrix};
use crate::quotes::ReturnPanel;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsaError {
    #[error("averaging interval K = {k} must satisfy 1 <= K < M = {m}")]
    BadK { k: usize, m: usize },
    #[error("invalid lag parameters: {0}")]
    BadParams(&'static str),
    #[error("number of components l = {l} must lie in [1, {capacity}]")]
    BadL { l: usize, capacity: usize },
    #[error("insufficient history: need {needed} rows, have {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Linear filtration of a single panel row.
    #[default]
    Ssa1,
    /// Linear filtration with time lag (block-Hankel embedding).
    Ssa2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForecastRule {
    /// Orthogonal projection `V_l V_lᵀ x` onto the leading eigenvectors.
    #[default]
    Projector,
    /// `out_i = Σ_{q<l} V[i][q] · x[q]`, applied verbatim.
    CoordinateSum,
}

/// Hankel information matrix of one panel row.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    pub k: usize,
    pub source_time: usize,
    /// `K × (M − K + 1)`, `entries[(r, c)] = y[c + r]`.
    pub entries: Matrix,
}

impl InfoMatrix {
    pub fn window_len(&self) -> usize {
        self.entries.cols()
    }
}

pub fn build_info_matrix(y_row: &[f64], k: usize) -> Result<InfoMatrix, SsaError> {
    let m = y_row.len();
    if k < 1 || k >= m {
        return Err(SsaError::BadK { k, m });
    }
    let l = m - k + 1;
    Ok(InfoMatrix {
        k,
        source_time: 0,
        entries: Matrix::from_fn(k, l, |r, c| y_row[c + r]),
    })
}

/// Shift parameters of the lagged embedding: `n_shifts` is `N`, `depth` is `I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagParams {
    pub n_shifts: usize,
    pub depth: usize,
}

impl LagParams {
    pub const NONE: LagParams = LagParams { n_shifts: 1, depth: 1 };

    /// `1 <= I < N`, or the lag-free case `N = I = 1`.
    pub fn validate(&self) -> Result<(), SsaError> {
        if self.n_shifts == 0 || self.depth == 0 {
            return Err(SsaError::BadParams("N and I must be at least 1"));
        }
        if *self == Self::NONE {
            return Ok(());
        }
        if self.depth >= self.n_shifts {
            return Err(SsaError::BadParams("depth I must be smaller than N"));
        }
        Ok(())
    }

    pub fn block_cols(&self) -> usize {
        self.n_shifts - self.depth + 1
    }
}

/// Block-Hankel lag matrix: `blocks[a][b]` is the information matrix at time `n + a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagMatrix {
    pub k: usize,
    pub lag: LagParams,
    pub start_time: usize,
    /// Row-major `I × (N − I + 1)` grid of blocks.
    pub blocks: Vec<InfoMatrix>,
    /// `(K·I) × ((M − K + 1)·(N − I + 1))`; row `a·K + r`, column `b·L + c`.
    pub flattened: Matrix,
}

impl LagMatrix {
    pub fn block(&self, a: usize, b: usize) -> &InfoMatrix {
        &self.blocks[a * self.lag.block_cols() + b]
    }
}

pub fn build_lag_matrix(panel: &ReturnPanel, n: usize, k: usize, lag: LagParams) -> Result<LagMatrix, SsaError> {
    lag.validate()?;
    let needed = n + lag.n_shifts;
    if panel.len() < needed {
        return Err(SsaError::InsufficientHistory {
            needed,
            available: panel.len(),
        });
    }
    let rows: Vec<&[f64]> = (n..needed).map(|t| panel.row(t)).collect();
    let mut out = lag_matrix_from_rows(&rows, k, lag)?;
    out.start_time = n;
    for (idx, block) in out.blocks.iter_mut().enumerate() {
        let (a, b) = (idx / lag.block_cols(), idx % lag.block_cols());
        block.source_time = n + a + b;
    }
    Ok(out)
}

/// Builds the lag matrix from exactly `N` consecutive rows.
fn lag_matrix_from_rows(rows: &[&[f64]], k: usize, lag: LagParams) -> Result<LagMatrix, SsaError> {
    debug_assert_eq!(rows.len(), lag.n_shifts);
    let infos = rows
        .iter()
        .map(|row| build_info_matrix(row, k))
        .collect::<Result<Vec<_>, _>>()?;
    let window = infos[0].window_len();
    let (bi, bj) = (lag.depth, lag.block_cols());
    let mut blocks = Vec::with_capacity(bi * bj);
    for a in 0..bi {
        for b in 0..bj {
            blocks.push(infos[a + b].clone());
        }
    }
    let flattened = Matrix::from_fn(k * bi, window * bj, |row, col| {
        let (a, r) = (row / k, row % k);
        let (b, c) = (col / window, col % window);
        infos[a + b].entries[(r, c)]
    });
    Ok(LagMatrix {
        k,
        lag,
        start_time: 0,
        blocks,
        flattened,
    })
}

/// Two-point correlation matrix `UᵀU / divisor`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub matrix: SymmetricMatrix,
    pub divisor: f64,
}

/// `R₂ = UᵀU / K`.
pub fn correlation_matrix(u: &InfoMatrix) -> CorrelationMatrix {
    gram(&u.entries, u.k as f64)
}

/// `FᵀF / (K·I)` for the flattened lag matrix.
pub fn lag_correlation_matrix(f: &LagMatrix) -> CorrelationMatrix {
    gram(&f.flattened, (f.k * f.lag.depth) as f64)
}

fn gram(u: &Matrix, divisor: f64) -> CorrelationMatrix {
    let d = u.cols();
    let matrix = SymmetricMatrix::from_upper(d, |i, j| {
        (0..u.rows()).map(|r| u[(r, i)] * u[(r, j)]).sum::<f64>() / divisor
    });
    CorrelationMatrix { matrix, divisor }
}

/// Parameters of a forecast model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub mode: Mode,
    pub k: usize,
    pub l: usize,
    /// Ignored in [`Mode::Ssa1`].
    pub lag: LagParams,
    pub rule: ForecastRule,
    pub jacobi: JacobiConfig,
}

impl ModelSpec {
    pub fn ssa1(k: usize, l: usize) -> Self {
        Self {
            mode: Mode::Ssa1,
            k,
            l,
            lag: LagParams::NONE,
            rule: ForecastRule::Projector,
            jacobi: JacobiConfig::precise(),
        }
    }

    pub fn ssa2(k: usize, l: usize, n_shifts: usize, depth: usize) -> Self {
        Self {
            mode: Mode::Ssa2,
            lag: LagParams { n_shifts, depth },
            ..Self::ssa1(k, l)
        }
    }

    /// Lag parameters actually used by the mode.
    pub fn effective_lag(&self) -> LagParams {
        match self.mode {
            Mode::Ssa1 => LagParams::NONE,
            Mode::Ssa2 => self.lag,
        }
    }

    /// Panel rows consumed by one fit or forecast.
    pub fn history(&self) -> usize {
        self.effective_lag().n_shifts
    }

    /// Dimension of the embedded window (order of the correlation matrix).
    pub fn window_dim(&self, pairs: usize) -> usize {
        (pairs + 1).saturating_sub(self.k) * self.effective_lag().block_cols()
    }

    /// Whether `l` lies in the operating band `1 < l < M − K`.
    pub fn l_in_recommended_band(&self, pairs: usize) -> bool {
        self.l > 1 && self.l + self.k < pairs
    }

    pub fn validate(&self, pairs: usize) -> Result<(), SsaError> {
        if self.k < 1 || self.k >= pairs {
            return Err(SsaError::BadK { k: self.k, m: pairs });
        }
        self.effective_lag().validate()?;
        let capacity = self.window_dim(pairs);
        if self.l < 1 || self.l > capacity {
            return Err(SsaError::BadL { l: self.l, capacity });
        }
        Ok(())
    }
}

/// Fitted eigenbasis ready to forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    pub spec: ModelSpec,
    pub pairs: usize,
    /// `window_dim × l`, leading eigenvectors of the correlation matrix.
    pub basis: Matrix,
    /// All eigenvalues, sorted by `|λ|` descending.
    pub eigenvalues: Vec<f64>,
    pub sweeps_used: usize,
    pub final_offdiag: f64,
}

/// Fits on panel rows `n .. n + N` (a single row for SSA1).
pub fn fit(panel: &ReturnPanel, n: usize, spec: &ModelSpec) -> Result<ForecastModel, SsaError> {
    let needed = n + spec.history();
    if panel.len() < needed {
        return Err(SsaError::InsufficientHistory {
            needed,
            available: panel.len(),
        });
    }
    let rows: Vec<&[f64]> = (n..needed).map(|t| panel.row(t)).collect();
    fit_rows(&rows, spec)
}

/// Fits on exactly [`ModelSpec::history`] consecutive rows, oldest first.
pub fn fit_rows(rows: &[&[f64]], spec: &ModelSpec) -> Result<ForecastModel, SsaError> {
    let pairs = check_rows(rows, spec)?;
    spec.validate(pairs)?;
    let lagged = lag_matrix_from_rows(rows, spec.k, spec.effective_lag())?;
    let r2 = lag_correlation_matrix(&lagged);
    let decomp = jacobi_eigen(&r2.matrix, &spec.jacobi)?;
    Ok(model_from_decomposition(spec, pairs, decomp))
}

fn model_from_decomposition(spec: &ModelSpec, pairs: usize, d: EigenDecomposition) -> ForecastModel {
    let basis = Matrix::from_fn(d.order(), spec.l, |r, c| d.vectors[(r, c)]);
    ForecastModel {
        spec: *spec,
        pairs,
        basis,
        eigenvalues: d.values,
        sweeps_used: d.sweeps_used,
        final_offdiag: d.final_offdiag,
    }
}

fn check_rows(rows: &[&[f64]], spec: &ModelSpec) -> Result<usize, SsaError> {
    if rows.len() != spec.history() {
        return Err(SsaError::InsufficientHistory {
            needed: spec.history(),
            available: rows.len(),
        });
    }
    let pairs = rows[0].len();
    for row in rows {
        if row.len() != pairs {
            return Err(SsaError::DimensionMismatch {
                expected: pairs,
                got: row.len(),
            });
        }
    }
    Ok(pairs)
}

impl ForecastModel {
    pub fn window_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Applies the model's rule to one embedded window vector.
    pub fn forecast(&self, current: &[f64]) -> Result<Vec<f64>, SsaError> {
        let d = self.window_dim();
        if current.len() != d {
            return Err(SsaError::DimensionMismatch {
                expected: d,
                got: current.len(),
            });
        }
        Ok(match self.spec.rule {
            ForecastRule::Projector => {
                let coeffs = self.basis.tr_mul_vec(current);
                self.basis.mul_vec(&coeffs)
            }
            ForecastRule::CoordinateSum => (0..d)
                .map(|i| (0..self.spec.l).map(|q| self.basis[(i, q)] * current[q]).sum())
                .collect(),
        })
    }

    /// Per-pair next-step forecast from the latest [`ModelSpec::history`] rows.
    ///
    /// Every embedded row is passed through [`forecast`](Self::forecast); the
    /// value for pair `i` is the mean of all reconstructed components that refer
    /// to pair `i` at the latest time.
    pub fn forecast_pairs(&self, rows: &[&[f64]]) -> Result<Vec<f64>, SsaError> {
        let pairs = check_rows(rows, &self.spec)?;
        if pairs != self.pairs {
            return Err(SsaError::DimensionMismatch {
                expected: self.pairs,
                got: pairs,
            });
        }
        let lag = self.spec.effective_lag();
        let lagged = lag_matrix_from_rows(rows, self.spec.k, lag)?;
        let k = self.spec.k;
        let window = pairs - k + 1;
        // The latest time sits in block row I − 1, block column N − I.
        let a = lag.depth - 1;
        let col0 = (lag.block_cols() - 1) * window;
        let mut sums = vec![0.0; pairs];
        let mut counts = vec![0usize; pairs];
        for r in 0..k {
            let out = self.forecast(lagged.flattened.row(a * k + r))?;
            for c in 0..window {
                sums[c + r] += out[col0 + c];
                counts[c + r] += 1;
            }
        }
        Ok(sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect())
    }

    /// Per-pair forecast from panel rows ending at `t` (inclusive).
    pub fn forecast_panel(&self, panel: &ReturnPanel, t: usize) -> Result<Vec<f64>, SsaError> {
        let h = self.spec.history();
        if t + 1 < h || t >= panel.len() {
            return Err(SsaError::InsufficientHistory {
                needed: h,
                available: (t + 1).min(panel.len()),
            });
        }
        let rows: Vec<&[f64]> = (t + 1 - h..=t).map(|s| panel.row(s)).collect();
        self.forecast_pairs(&rows)
    }

    pub fn dump(&self) -> ModelDump<'_> {
        ModelDump(self)
    }
}

/// Plain-text diagnostic listing of a fitted model.
pub struct ModelDump<'a>(&'a ForecastModel);

impl fmt::Display for ModelDump<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        let s = &m.spec;
        let lag = s.effective_lag();
        let mode = match s.mode {
            Mode::Ssa1 => "SSA1",
            Mode::Ssa2 => "SSA2",
        };
        let rule = match s.rule {
            ForecastRule::Projector => "projector",
            ForecastRule::CoordinateSum => "coordinate_sum",
        };
        writeln!(f, "mode = {mode}")?;
        writeln!(f, "rule = {rule}")?;
        writeln!(f, "pairs = {}", m.pairs)?;
        writeln!(f, "k = {}", s.k)?;
        writeln!(f, "l = {}", s.l)?;
        writeln!(f, "n = {}", lag.n_shifts)?;
        writeln!(f, "i = {}", lag.depth)?;
        writeln!(f, "window_dim = {}", m.window_dim())?;
        if !s.l_in_recommended_band(m.pairs) {
            writeln!(f, "warning = l outside 1 < l < M - K")?;
        }
        let (kept, dropped) = m.eigenvalues.split_at(s.l.min(m.eigenvalues.len()));
        write!(f, "retained =")?;
        for v in kept {
            write!(f, " {v:e}")?;
        }
        writeln!(f)?;
        write!(f, "discarded =")?;
        for v in dropped {
            write!(f, " {v:e}")?;
        }
        writeln!(f)?;
        writeln!(f, "sweeps_used = {}", m.sweeps_used)?;
        writeln!(f, "final_offdiag = {:e}", m.final_offdiag)
    }
}
