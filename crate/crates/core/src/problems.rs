//! Synthetic test problems: diagonal matrices with a tunable clustering of
//! eigenvalues, the normalised all-ones right-hand side, and preconditioners
//! obtained by truncating the upper part of the spectrum.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, solve_spd, SpdMatrix};
use crate::fpx::FP64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub lambda_1: f64,
    pub lambda_n: f64,
    /// Clustering parameter in `[0, 1]`; smaller values pack eigenvalues
    /// towards `lambda_1`.
    pub rho: f64,
    /// 1-based index `i`: preconditioner entries from `i` on are replaced by
    /// `lambda_i`.
    pub trunc_index: usize,
}

impl ProblemSpec {
    /// `n = 85`, spectrum in `[1, 1e5]`, `rho = 0.6`.
    pub fn standard(trunc_index: usize) -> Self {
        Self {
            n: 85,
            lambda_1: 1.0,
            lambda_n: 1e5,
            rho: 0.6,
            trunc_index,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProblem(msg));
        if self.n < 2 {
            return fail(format!("n = {} must be at least 2", self.n));
        }
        if !(self.lambda_1 > 0.0 && self.lambda_1 < self.lambda_n && self.lambda_n.is_finite()) {
            return fail(format!(
                "need 0 < lambda_1 < lambda_n, got {} and {}",
                self.lambda_1, self.lambda_n
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return fail(format!("rho = {} outside [0, 1]", self.rho));
        }
        if !(2..=self.n).contains(&self.trunc_index) {
            return fail(format!(
                "trunc_index = {} outside [2, {}]",
                self.trunc_index, self.n
            ));
        }
        Ok(())
    }

    /// `lambda_1, ..., lambda_n` with
    /// `lambda_i = lambda_1 + (i-1)/(n-1) (lambda_n - lambda_1) rho^(n-i)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        out[0] = self.lambda_1;
        out[n - 1] = self.lambda_n;
        // rho^(n-i) by repeated multiplication, smallest power first.
        let mut power = 1.0;
        for i in (2..n).rev() {
            power *= self.rho;
            let frac = (i - 1) as f64 / (n - 1) as f64;
            out[i - 1] = self.lambda_1 + frac * (self.lambda_n - self.lambda_1) * power;
        }
        out
    }
}

pub fn build_matrix(spec: &ProblemSpec) -> Result<SpdMatrix> {
    spec.validate()?;
    SpdMatrix::diagonal(spec.eigenvalues())
}

/// `b = (1/sqrt(n)) [1, ..., 1]ᵀ`.
pub fn build_rhs(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

/// `M = diag(lambda_1, ..., lambda_{i-1}, lambda_i, ..., lambda_i)`.
pub fn build_preconditioner(spec: &ProblemSpec, a: &SpdMatrix) -> Result<SpdMatrix> {
    spec.validate()?;
    let SpdMatrix::Diagonal(d) = a else {
        return Err(Error::InvalidProblem(
            "truncation preconditioner needs a diagonal matrix".into(),
        ));
    };
    if d.len() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            found: d.len(),
        });
    }
    let i = spec.trunc_index;
    let pivot = d[i - 1];
    let m = d
        .iter()
        .enumerate()
        .map(|(k, &v)| if k + 1 >= i { pivot } else { v })
        .collect();
    SpdMatrix::diagonal(m)
}

/// Reference solution of `A x = b` in binary64.
///
/// Diagonal systems are solved componentwise. Dense systems use a Cholesky
/// solve followed by one refinement step whose residual is accumulated with
/// error-free products and compensated summation.
pub fn reference_solution(a: &SpdMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.n() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.len(),
        });
    }
    match a {
        SpdMatrix::Diagonal(d) => Ok(b.iter().zip(d).map(|(bi, di)| bi / di).collect()),
        SpdMatrix::Dense(m) => {
            let l = cholesky(a)?;
            let mut x = solve_spd(&l, b, FP64);
            let r: Vec<f64> = (0..m.n())
                .map(|i| {
                    let mut acc = Neumaier::new(b[i]);
                    for (aij, xj) in m.row(i).iter().zip(&x) {
                        let p = aij * xj;
                        acc.add(-p);
                        acc.add(-aij.mul_add(*xj, -p));
                    }
                    acc.sum()
                })
                .collect();
            let dx = solve_spd(&l, &r, FP64);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
            Ok(x)
        }
    }
}

struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new(init: f64) -> Self {
        Self {
            sum: init,
            comp: 0.0,
        }
    }

    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
