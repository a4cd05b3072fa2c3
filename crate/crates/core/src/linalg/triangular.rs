//! Cholesky factors and format-parameterised triangular solves.
//!
//! Every solve first rounds the factor entries and the right-hand side into
//! the target format, then performs each multiply, subtract and divide as an
//! individually rounded operation in that format, including the running
//! sum of the substitution.

use super::dense::DenseMatrix;
use super::SpdMatrix;
use crate::error::{Error, Result};
use crate::fpx::{fl, round_to_format, FloatFormat, Op};

/// Lower-triangular factor `L` with strictly positive diagonal.
#[derive(Clone, Debug, PartialEq)]
pub enum LowerTriangular {
    Diagonal(Vec<f64>),
    Dense(DenseMatrix),
}

impl LowerTriangular {
    pub fn identity(n: usize) -> Self {
        Self::Diagonal(vec![1.0; n])
    }

    /// Wraps a dense lower-triangular matrix. Entries above the diagonal are
    /// ignored; the diagonal must be strictly positive.
    pub fn dense(l: DenseMatrix) -> Result<Self> {
        check_diagonal((0..l.n()).map(|i| l.get(i, i)))?;
        let mut l = l;
        for i in 0..l.n() {
            for j in (i + 1)..l.n() {
                l.set(i, j, 0.0);
            }
        }
        Ok(Self::Dense(l))
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        check_diagonal(d.iter().copied())?;
        Ok(Self::Diagonal(d))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Dense(l) => l.n(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            Self::Dense(l) => l.get(i, j),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Self::Diagonal(d) => DenseMatrix::from_diagonal(d),
            Self::Dense(l) => l.clone(),
        }
    }

    /// `L v` in working precision.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        check_len(self, v);
        match self {
            Self::Diagonal(d) => d.iter().zip(v).map(|(a, x)| a * x).collect(),
            Self::Dense(l) => l.matvec(v),
        }
    }

    /// `L Lᵀ` in working precision.
    pub fn reconstruct(&self) -> DenseMatrix {
        let l = self.to_dense();
        l.matmul(&l.transpose())
    }
}

fn check_diagonal(diag: impl Iterator<Item = f64>) -> Result<()> {
    for (index, pivot) in diag.enumerate() {
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index, pivot });
        }
    }
    Ok(())
}

/// Cholesky factorisation `M = L Lᵀ`, always in binary64.
pub fn cholesky(m: &SpdMatrix) -> Result<LowerTriangular> {
    match m {
        SpdMatrix::Diagonal(d) => Ok(LowerTriangular::Diagonal(
            d.iter().map(|v| v.sqrt()).collect(),
        )),
        SpdMatrix::Dense(a) => dense_cholesky(a).map(LowerTriangular::Dense),
    }
}

pub(crate) fn dense_cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.n();
    let mut l = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

fn check_len(l: &LowerTriangular, y: &[f64]) {
    assert_eq!(
        l.n(),
        y.len(),
        "triangular solve: factor is {}x{} but right-hand side has length {}",
        l.n(),
        l.n(),
        y.len()
    );
}

/// Forward substitution `L y = y_b` in `fmt`.
///
/// Structural zeros of `L` (exact zeros after rounding into `fmt`) are
/// skipped, so the diagonal fast path and a densely stored diagonal factor
/// produce bitwise identical results.
pub fn solve_lower(l: &LowerTriangular, y_b: &[f64], fmt: FloatFormat) -> Vec<f64> {
    check_len(l, y_b);
    match l {
        LowerTriangular::Diagonal(d) => diagonal_solve(d, y_b, fmt),
        LowerTriangular::Dense(m) => {
            let n = m.n();
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut sum = round_to_format(y_b[i], fmt);
                for j in 0..i {
                    let lij = round_to_format(m.get(i, j), fmt);
                    if lij != 0.0 {
                        sum = fl(Op::Sub, sum, fl(Op::Mul, lij, y[j], fmt), fmt);
                    }
                }
                y[i] = fl(Op::Div, sum, round_to_format(m.get(i, i), fmt), fmt);
            }
            y
        }
    }
}

/// Back substitution `Lᵀ y = y_b` in `fmt`.
pub fn solve_upper(l: &LowerTriangular, y_b: &[f64], fmt: FloatFormat) -> Vec<f64> {
    check_len(l, y_b);
    match l {
        LowerTriangular::Diagonal(d) => diagonal_solve(d, y_b, fmt),
        LowerTriangular::Dense(m) => {
            let n = m.n();
            let mut y = vec![0.0; n];
            for i in (0..n).rev() {
                let mut sum = round_to_format(y_b[i], fmt);
                // (Lᵀ)_{ij} = L_{ji}
                for j in (i + 1)..n {
                    let lji = round_to_format(m.get(j, i), fmt);
                    if lji != 0.0 {
                        sum = fl(Op::Sub, sum, fl(Op::Mul, lji, y[j], fmt), fmt);
                    }
                }
                y[i] = fl(Op::Div, sum, round_to_format(m.get(i, i), fmt), fmt);
            }
            y
        }
    }
}

/// `M y = y_b` with `M = L Lᵀ`: a forward then a back substitution, both in
/// `fmt`.
pub fn solve_spd(l: &LowerTriangular, y_b: &[f64], fmt: FloatFormat) -> Vec<f64> {
    solve_upper(l, &solve_lower(l, y_b, fmt), fmt)
}

fn diagonal_solve(d: &[f64], y_b: &[f64], fmt: FloatFormat) -> Vec<f64> {
    d.iter()
        .zip(y_b)
        .map(|(&lii, &y)| fl(Op::Div, round_to_format(y, fmt), round_to_format(lii, fmt), fmt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpx::{round_vector, BFLOAT16, BUILTIN_FORMATS, FP16, FP32, FP64};
    use crate::linalg::norm2;

    fn l_4225() -> LowerTriangular {
        let a = DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]).unwrap();
        cholesky(&SpdMatrix::dense(a).unwrap()).unwrap()
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SpdMatrix::diagonal(vec![4.0, 9.0]).unwrap()).unwrap();
        assert_eq!(l, LowerTriangular::Diagonal(vec![2.0, 3.0]));

        let l = l_4225();
        let expect = DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 2.0]]).unwrap();
        assert_eq!(l.to_dense(), expect);
        assert_eq!(
            l.reconstruct(),
            DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]).unwrap()
        );

        let indefinite = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(
            dense_cholesky(&indefinite),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn identity_solves_round_input() {
        let y = [1.0 / 3.0, -7.123456789, 1e-9, 70000.0];
        for fmt in BUILTIN_FORMATS {
            let id_dense = LowerTriangular::dense(DenseMatrix::identity(4)).unwrap();
            for l in [LowerTriangular::identity(4), id_dense] {
                assert_eq!(solve_lower(&l, &y, fmt), round_vector(&y, fmt));
                assert_eq!(solve_upper(&l, &y, fmt), round_vector(&y, fmt));
                assert_eq!(solve_spd(&l, &y, fmt), round_vector(&y, fmt));
            }
        }
    }

    #[test]
    fn small_solves() {
        let d = LowerTriangular::diagonal(vec![2.0, 4.0]).unwrap();
        assert_eq!(solve_lower(&d, &[1.0, 2.0], FP64), vec![0.5, 0.5]);
        assert_eq!(solve_upper(&d, &[1.0, 2.0], FP64), vec![0.5, 0.5]);

        let l = l_4225();
        assert_eq!(solve_lower(&l, &[2.0, 3.0], FP64), vec![1.0, 1.0]);
        let y = solve_upper(&l, &[2.0, 2.0], FP64);
        assert_eq!(y, vec![0.5, 1.0]);
        // Lᵀ y = [2y0 + y1, 2y1]
        let res = [2.0 * y[0] + y[1] - 2.0, 2.0 * y[1] - 2.0];
        assert!(norm2(&res) < 1e-14);

        let single = cholesky(&SpdMatrix::diagonal(vec![4.0]).unwrap()).unwrap();
        assert_eq!(solve_spd(&single, &[8.0], FP64), vec![2.0]);
        assert_eq!(solve_spd(&l, &[6.0, 7.0], FP64), vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_fast_path_matches_dense_bitwise() {
        let d = vec![1.0, 0.3, 7.5, 1e-3, 316.22776601683796];
        let fast = LowerTriangular::diagonal(d.clone()).unwrap();
        let dense = LowerTriangular::dense(DenseMatrix::from_diagonal(&d)).unwrap();
        let y = [0.1, -2.5, 1e-7, 3.0e4, -0.0];
        for fmt in BUILTIN_FORMATS {
            for solve in [solve_lower, solve_upper, solve_spd] {
                let a = solve(&fast, &y, fmt);
                let b = solve(&dense, &y, fmt);
                let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a), bits(&b), "{fmt}");
            }
        }
    }

    #[test]
    fn low_precision_results_are_representable() {
        let l = l_4225();
        for fmt in [BFLOAT16, FP16, FP32] {
            let y = solve_spd(&l, &[0.1, 0.7], fmt);
            assert_eq!(y, round_vector(&y, fmt));
        }
    }

    #[test]
    fn fp16_underflow_flushes_to_zero() {
        let l = LowerTriangular::diagonal(vec![1.0, 1.0]).unwrap();
        assert_eq!(solve_spd(&l, &[1e-8, -2e-8], FP16), vec![0.0, -0.0]);
    }
}
