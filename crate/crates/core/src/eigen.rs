//! Symmetric eigendecomposition by classical Jacobi rotations.
//!
//! Each step locates the off-diagonal element of largest magnitude and applies
//! the plane rotation that annihilates it. Rotations are accumulated into the
//! eigenvector matrix; the diagonal of the rotated matrix converges to the
//! eigenvalues. Results are ordered by decreasing `|λ|`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::math;
use crate::Matrix;

/// Relative tolerance used when checking symmetry at construction.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid Jacobi configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("Jacobi iteration hit the cap after {sweeps} sweeps (max off-diagonal {final_offdiag:e})")]
    DidNotConverge { sweeps: usize, final_offdiag: f64 },
}

/// Real symmetric matrix, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    /// Checks squareness, finiteness and `a[m][n] == a[n][m]` within
    /// [`SYMMETRY_TOLERANCE`] relative to the largest entry.
    pub fn new(matrix: Matrix) -> Result<Self, EigenError> {
        if matrix.rows() != matrix.cols() {
            return Err(EigenError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(EigenError::NonFinite);
        }
        let scale = matrix.max_abs().max(1.0);
        let d = matrix.rows();
        for m in 0..d {
            for n in m + 1..d {
                if (matrix[(m, n)] - matrix[(n, m)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(EigenError::NotSymmetric { row: m, col: n });
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, EigenError> {
        Self::new(Matrix::from_rows(rows))
    }

    /// Builds a matrix from the upper triangle supplied by `f(m, n)` for `m <= n`.
    pub fn from_upper(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(order, order);
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.0[(m, n)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.0[(i, i)]).sum()
    }
}

/// How [`JacobiConfig::epsilon`] is compared with the largest off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tolerance {
    /// Stop when `max |a_mn| < ε`.
    #[default]
    Absolute,
    /// Stop when `max |a_mn| < ε · ‖A‖_F` of the input.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConfig {
    pub epsilon: f64,
    /// Cap on sweeps, one sweep being `d(d-1)/2` rotations.
    pub max_sweeps: usize,
    pub tolerance: Tolerance,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_sweeps: 100,
            tolerance: Tolerance::Absolute,
        }
    }
}

impl JacobiConfig {
    pub fn new(epsilon: f64, max_sweeps: usize, tolerance: Tolerance) -> Result<Self, EigenError> {
        let cfg = Self {
            epsilon,
            max_sweeps,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Tight relative tolerance for full-precision work.
    pub fn precise() -> Self {
        Self {
            epsilon: 1e-14,
            max_sweeps: 100,
            tolerance: Tolerance::Relative,
        }
    }

    pub fn validate(&self) -> Result<(), EigenError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(EigenError::InvalidConfig("epsilon must lie in (0, 1)"));
        }
        if self.max_sweeps == 0 {
            return Err(EigenError::InvalidConfig("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// Eigenvalues sorted by `|λ|` descending and matching unit eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `q` is the eigenvector for `values[q]`.
    pub vectors: Matrix,
    pub sweeps_used: usize,
    pub rotations: usize,
    /// Largest off-diagonal magnitude left when iteration stopped.
    pub final_offdiag: f64,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, q: usize) -> Vec<f64> {
        self.vectors.column(q)
    }
}

/// One Jacobi rotation, reported to observers of [`jacobi_eigen_observed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationStep {
    pub index: usize,
    pub m: usize,
    pub n: usize,
    pub angle: f64,
    /// The `(m, n)` entry before the rotation.
    pub pivot: f64,
    /// Off-diagonal Frobenius norm after the rotation.
    pub offdiag_norm: f64,
}

/// Angle of the plane rotation that zeroes `a_mn`.
///
/// `½·atan(2·a_mn / (a_mm − a_nn))`, with `π/4·sign(a_mn)` when the diagonal
/// entries coincide and `0` when `a_mn` is already zero.
pub fn rotation_angle(a_mm: f64, a_nn: f64, a_mn: f64) -> f64 {
    if a_mn == 0.0 {
        return 0.0;
    }
    let diff = a_mm - a_nn;
    if diff == 0.0 {
        return FRAC_PI_4.copysign(a_mn);
    }
    0.5 * math::atan(2.0 * a_mn / diff)
}

/// Decomposes `matrix` with classical Jacobi rotations.
pub fn jacobi_eigen(matrix: &SymmetricMatrix, cfg: &JacobiConfig) -> Result<EigenDecomposition, EigenError> {
    jacobi(matrix, cfg, None)
}

/// Like [`jacobi_eigen`], calling `observer` with each rotation and the
/// working matrix right after it.
pub fn jacobi_eigen_observed(
    matrix: &SymmetricMatrix,
    cfg: &JacobiConfig,
    mut observer: impl FnMut(&RotationStep, &Matrix),
) -> Result<EigenDecomposition, EigenError> {
    jacobi(matrix, cfg, Some(&mut observer))
}

type Observer<'a> = dyn FnMut(&RotationStep, &Matrix) + 'a;

fn jacobi(
    matrix: &SymmetricMatrix,
    cfg: &JacobiConfig,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<EigenDecomposition, EigenError> {
    cfg.validate()?;
    let d = matrix.order();
    let mut a = matrix.as_matrix().clone();
    let mut v = Matrix::identity(d);

    let threshold = match cfg.tolerance {
        Tolerance::Absolute => cfg.epsilon,
        Tolerance::Relative => cfg.epsilon * matrix.as_matrix().frobenius_norm(),
    };
    let per_sweep = (d * d.saturating_sub(1) / 2).max(1);
    let max_rotations = cfg.max_sweeps.saturating_mul(per_sweep);

    let mut rotations = 0usize;
    let (mut m, mut n, mut pivot) = largest_offdiag(&a);
    while pivot.abs() != 0.0 && pivot.abs() >= threshold {
        if rotations == max_rotations {
            return Err(EigenError::DidNotConverge {
                sweeps: cfg.max_sweeps,
                final_offdiag: pivot.abs(),
            });
        }
        let angle = rotation_angle(a[(m, m)], a[(n, n)], pivot);
        rotate(&mut a, &mut v, m, n, angle);
        rotations += 1;
        if let Some(observer) = observer.as_mut() {
            let step = RotationStep {
                index: rotations,
                m,
                n,
                angle,
                pivot,
                offdiag_norm: math::sqrt(offdiag_sq(&a)),
            };
            observer(&step, &a);
        }
        (m, n, pivot) = largest_offdiag(&a);
    }

    let final_offdiag = pivot.abs();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)]).collect();
    let order = sorted_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(d, d, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps_used: rotations.div_ceil(per_sweep),
        rotations,
        final_offdiag,
    })
}

/// `V · diag(λ) · Vᵀ`.
pub fn reconstruct(decomp: &EigenDecomposition) -> SymmetricMatrix {
    let v = &decomp.vectors;
    let d = decomp.order();
    SymmetricMatrix::from_upper(d, |i, j| (0..d).map(|q| v[(i, q)] * decomp.values[q] * v[(j, q)]).sum())
}

/// Applies `A ← RᵀAR`, `V ← VR` for the rotation by `angle` in the `(m, n)` plane.
fn rotate(a: &mut Matrix, v: &mut Matrix, m: usize, n: usize, angle: f64) {
    let (s, c) = (math::sin(angle), math::cos(angle));
    let d = a.rows();
    let (amm, ann, amn) = (a[(m, m)], a[(n, n)], a[(m, n)]);
    for k in 0..d {
        if k == m || k == n {
            continue;
        }
        let (akm, akn) = (a[(k, m)], a[(k, n)]);
        let new_km = c * akm + s * akn;
        let new_kn = c * akn - s * akm;
        a[(k, m)] = new_km;
        a[(m, k)] = new_km;
        a[(k, n)] = new_kn;
        a[(n, k)] = new_kn;
    }
    let cs2 = 2.0 * c * s * amn;
    a[(m, m)] = c * c * amm + cs2 + s * s * ann;
    a[(n, n)] = s * s * amm - cs2 + c * c * ann;
    // The angle is chosen so that (c² − s²)·a_mn + c·s·(a_nn − a_mm) = 0.
    a[(m, n)] = 0.0;
    a[(n, m)] = 0.0;
    for k in 0..d {
        let (vkm, vkn) = (v[(k, m)], v[(k, n)]);
        v[(k, m)] = c * vkm + s * vkn;
        v[(k, n)] = c * vkn - s * vkm;
    }
}

fn largest_offdiag(a: &Matrix) -> (usize, usize, f64) {
    let d = a.rows();
    let mut best = (0, 0, 0.0f64);
    for m in 0..d {
        for n in m + 1..d {
            if a[(m, n)].abs() > best.2.abs() {
                best = (m, n, a[(m, n)]);
            }
        }
    }
    best
}

fn offdiag_sq(a: &Matrix) -> f64 {
    let d = a.rows();
    let mut sum = 0.0;
    for m in 0..d {
        for n in 0..d {
            if m != n {
                sum += a[(m, n)] * a[(m, n)];
            }
        }
    }
    sum
}

/// Indices ordered by `|λ|` descending, then signed value descending, then index.
fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap_or(Ordering::Equal)
            .then(b.partial_cmp(&a).unwrap_or(Ordering::Equal))
            .then(i.cmp(&j))
    });
    idx
}
