//! SPD operators, Cholesky factors, triangular solves and the binary64
//! vector kernels used by the solvers.
//!
//! Reductions (`dot`, matrix-vector rows) always accumulate sequentially
//! from left to right so that results are reproducible bit for bit.

mod dense;
mod eigen;
mod triangular;

pub use dense::DenseMatrix;
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use triangular::{cholesky, solve_lower, solve_spd, solve_upper, LowerTriangular};

use crate::error::{Error, Result};

/// Symmetric positive definite operator.
#[derive(Clone, Debug, PartialEq)]
pub enum SpdMatrix {
    /// Diagonal matrix given by its (positive) eigenvalues.
    Diagonal(Vec<f64>),
    /// Dense symmetric matrix.
    Dense(DenseMatrix),
}

impl SpdMatrix {
    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        for (index, &v) in eigenvalues.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NotPositiveDefinite { index, pivot: v });
            }
        }
        Ok(Self::Diagonal(eigenvalues))
    }

    /// Symmetrises `m` and checks positive definiteness with a Cholesky
    /// factorisation.
    pub fn dense(m: DenseMatrix) -> Result<Self> {
        let sym = m.symmetrized();
        triangular::dense_cholesky(&sym)?;
        Ok(Self::Dense(sym))
    }

    pub fn identity(n: usize) -> Self {
        Self::Diagonal(vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Dense(m) => m.n(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Self::Diagonal(d) => DenseMatrix::from_diagonal(d),
            Self::Dense(m) => m.clone(),
        }
    }

    /// Smallest and largest eigenvalue.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        match self {
            Self::Diagonal(d) => d
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
            Self::Dense(m) => {
                let e = symmetric_eigen(m);
                (e.values[0], e.values[e.values.len() - 1])
            }
        }
    }

    /// Spectral norm `||M||_2 = λ_max`.
    pub fn norm2(&self) -> f64 {
        self.extreme_eigenvalues().1
    }

    /// Spectral norm of the inverse, `1 / λ_min`.
    pub fn inverse_norm2(&self) -> f64 {
        1.0 / self.extreme_eigenvalues().0
    }
}

pub fn matvec(a: &SpdMatrix, v: &[f64]) -> Vec<f64> {
    assert_eq!(a.n(), v.len(), "matvec dimension mismatch");
    match a {
        SpdMatrix::Diagonal(d) => d.iter().zip(v).map(|(a, x)| a * x).collect(),
        SpdMatrix::Dense(m) => m.matvec(v),
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `alpha * x + y`.
pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len(), "axpy dimension mismatch");
    x.iter().zip(y).map(|(xi, yi)| yi + alpha * xi).collect()
}

/// Euclidean norm. When the sum of squares leaves the normal range the
/// vector is rescaled by its largest entry first.
pub fn norm2(v: &[f64]) -> f64 {
    let s = dot(v, v);
    if s.is_normal() {
        return s.sqrt();
    }
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return s.sqrt();
    }
    let w: Vec<f64> = v.iter().map(|x| x / m).collect();
    m * dot(&w, &w).sqrt()
}

/// `a - b` elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "sub dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `sqrt(vᵀ A v)`, with negative rounding noise in the quadratic form
/// clamped to zero. NaN propagates.
pub fn a_norm(a: &SpdMatrix, v: &[f64]) -> f64 {
    let e = dot(v, &matvec(a, v));
    if e < 0.0 {
        0.0
    } else {
        e.sqrt()
    }
}

/// Spectral condition number `λ_max / λ_min`.
pub fn cond2(m: &SpdMatrix) -> Result<f64> {
    let (lo, hi) = m.extreme_eigenvalues();
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: lo,
        });
    }
    Ok(hi / lo)
}
