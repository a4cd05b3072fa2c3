use std::fmt;
use std::str::FromStr;

use crate::fpx::{FloatFormat, FP64};
use crate::linalg::{solve_lower, solve_spd, solve_upper, LowerTriangular};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecondMode {
    Unpreconditioned,
    /// `M_L = L Lᵀ`, `M_R = I`.
    Left,
    /// `M_L = I`, `M_R = L Lᵀ`.
    Right,
    /// `M_L = L`, `M_R = Lᵀ`.
    Split,
}

impl PrecondMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Unpreconditioned => "none",
            Self::Left => "left",
            Self::Right => "right",
            Self::Split => "split",
        }
    }
}

impl fmt::Display for PrecondMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecondMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::Unpreconditioned),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            "split" => Ok(Self::Split),
            other => Err(format!("unknown preconditioning mode `{other}`")),
        }
    }
}

/// A Cholesky-factored preconditioner `M = L Lᵀ` split into `(M_L, M_R)`
/// according to `mode`, together with the formats used for the three
/// applications `s = M_L⁻¹ r`, `q = M_R⁻¹ s` and `z = M_R⁻ᵀ r`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreconditionerScheme {
    pub mode: PrecondMode,
    pub factor: LowerTriangular,
    pub fmt_s: FloatFormat,
    pub fmt_q: FloatFormat,
    pub fmt_z: FloatFormat,
}

impl PreconditionerScheme {
    pub fn new(
        mode: PrecondMode,
        factor: LowerTriangular,
        fmt_s: FloatFormat,
        fmt_q: FloatFormat,
        fmt_z: FloatFormat,
    ) -> Self {
        Self {
            mode,
            factor,
            fmt_s,
            fmt_q,
            fmt_z,
        }
    }

    pub fn unpreconditioned(n: usize) -> Self {
        Self::new(
            PrecondMode::Unpreconditioned,
            LowerTriangular::identity(n),
            FP64,
            FP64,
            FP64,
        )
    }

    pub fn left(factor: LowerTriangular, fmt: FloatFormat) -> Self {
        Self::new(PrecondMode::Left, factor, fmt, FP64, FP64)
    }

    pub fn right(factor: LowerTriangular, fmt_q: FloatFormat, fmt_z: FloatFormat) -> Self {
        Self::new(PrecondMode::Right, factor, FP64, fmt_q, fmt_z)
    }

    /// Split scheme: `fmt_left` for the `s` step, `fmt_right` for the `q`
    /// and `z` steps (both belong to `M_R`).
    pub fn split(factor: LowerTriangular, fmt_left: FloatFormat, fmt_right: FloatFormat) -> Self {
        Self::new(PrecondMode::Split, factor, fmt_left, fmt_right, fmt_right)
    }

    pub fn n(&self) -> usize {
        self.factor.n()
    }

    /// `(u_s, u_q, u_z)`, zero for applications that are the identity.
    pub fn unit_roundoffs(&self) -> (f64, f64, f64) {
        let u = |f: FloatFormat| f.unit_roundoff();
        match self.mode {
            PrecondMode::Unpreconditioned => (0.0, 0.0, 0.0),
            PrecondMode::Left => (u(self.fmt_s), 0.0, 0.0),
            PrecondMode::Right => (0.0, u(self.fmt_q), u(self.fmt_z)),
            PrecondMode::Split => (u(self.fmt_s), u(self.fmt_q), u(self.fmt_z)),
        }
    }

    /// `s = M_L⁻¹ r`.
    pub fn apply_s(&self, r: &[f64]) -> Vec<f64> {
        match self.mode {
            PrecondMode::Unpreconditioned | PrecondMode::Right => r.to_vec(),
            PrecondMode::Left => solve_spd(&self.factor, r, self.fmt_s),
            PrecondMode::Split => solve_lower(&self.factor, r, self.fmt_s),
        }
    }

    /// `q = M_R⁻¹ s`.
    pub fn apply_q(&self, s: &[f64]) -> Vec<f64> {
        match self.mode {
            PrecondMode::Unpreconditioned | PrecondMode::Left => s.to_vec(),
            PrecondMode::Right => solve_spd(&self.factor, s, self.fmt_q),
            PrecondMode::Split => solve_upper(&self.factor, s, self.fmt_q),
        }
    }

    /// `z = M_R⁻ᵀ r`. For the right scheme `M` is symmetric so this is the
    /// same SPD solve as `apply_q`.
    pub fn apply_z(&self, r: &[f64]) -> Vec<f64> {
        match self.mode {
            PrecondMode::Unpreconditioned | PrecondMode::Left => r.to_vec(),
            PrecondMode::Right => solve_spd(&self.factor, r, self.fmt_z),
            PrecondMode::Split => solve_lower(&self.factor, r, self.fmt_z),
        }
    }
}
