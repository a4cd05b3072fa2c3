//! Closed-form error-bound quantities for Cholesky-preconditioned CG.
//!
//! All `O(·)` constants are taken as 1. Two variants of the backward and
//! forward bounds are available: [`BoundVariant::Plot`] drops the
//! `n k²` growth factor, [`BoundVariant::Strict`] keeps it.

use std::fmt;
use std::str::FromStr;

use crate::error::Result;
use crate::linalg::{cholesky, cond2, solve_lower, symmetric_eigen, DenseMatrix, SpdMatrix};
use crate::pcg::{PcgTrace, PrecondMode, PreconditionerScheme};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundVariant {
    #[default]
    Plot,
    Strict,
}

impl BoundVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Plot => "plot",
            Self::Strict => "strict",
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "plot" => Ok(Self::Plot),
            "strict" => Ok(Self::Strict),
            other => Err(format!("unknown bound variant `{other}`")),
        }
    }
}

/// Scalars entering the bounds. Norms are spectral norms.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    /// Working-precision unit roundoff.
    pub u: f64,
    pub u_s: f64,
    pub u_q: f64,
    pub u_z: f64,
    pub kappa_a: f64,
    /// `κ(M⁻¹) = κ(M)`.
    pub kappa_minv: f64,
    /// `κ(M_L⁻¹ A M_R⁻¹)`.
    pub kappa_precond: f64,
    pub norm_a: f64,
    pub norm_minv: f64,
    pub norm_xref: f64,
    /// `max(max_j ||x_j|| / ||x||, 1)`.
    pub max_xratio: f64,
}

impl BoundInputs {
    /// Gathers the inputs for a finished run. `m` is the preconditioner
    /// matrix (ignored for the unpreconditioned scheme).
    pub fn for_run(
        a: &SpdMatrix,
        m: &SpdMatrix,
        scheme: &PreconditionerScheme,
        trace: &PcgTrace,
    ) -> Result<Self> {
        let (u_s, u_q, u_z) = scheme.unit_roundoffs();
        let unprec = scheme.mode == PrecondMode::Unpreconditioned;
        let norm_xref = crate::linalg::norm2(&trace.x_ref);
        Ok(Self {
            n: a.n(),
            u: crate::fpx::FP64.unit_roundoff(),
            u_s,
            u_q,
            u_z,
            kappa_a: cond2(a)?,
            kappa_minv: if unprec { 1.0 } else { cond2(m)? },
            kappa_precond: kappa_preconditioned(a, m, scheme.mode)?,
            norm_a: a.norm2(),
            norm_minv: if unprec { 1.0 } else { m.inverse_norm2() },
            norm_xref,
            max_xratio: max_xratio(trace, norm_xref, trace.records.len()),
        })
    }

    /// Copy with a different `max_xratio`.
    pub fn with_max_xratio(&self, max_xratio: f64) -> Self {
        Self {
            max_xratio,
            ..self.clone()
        }
    }

    /// `u₁` of the first assumption.
    pub fn u1(&self, mode: PrecondMode) -> f64 {
        match mode {
            PrecondMode::Unpreconditioned => 0.0,
            PrecondMode::Left => self.u_s,
            PrecondMode::Right => self.u_z,
            PrecondMode::Split => self.u_s + self.u_z,
        }
    }

    /// `u₂` of the iteration assumption.
    pub fn u2(&self, mode: PrecondMode) -> f64 {
        match mode {
            PrecondMode::Unpreconditioned => 0.0,
            PrecondMode::Left => self.u_s,
            PrecondMode::Right => self.u_q + self.u_z,
            PrecondMode::Split => self.u_s + self.u_q + self.u_z,
        }
    }

    pub fn m1(&self, mode: PrecondMode) -> f64 {
        match mode {
            PrecondMode::Split => 0.5,
            _ => 1.5,
        }
    }

    pub fn m2(&self, mode: PrecondMode) -> f64 {
        match mode {
            PrecondMode::Split => 1.0,
            _ => 1.5,
        }
    }
}

/// `max(max_{j < upto} ||x_j|| / norm_xref, 1)` over the trace records.
pub fn max_xratio(trace: &PcgTrace, norm_xref: f64, upto: usize) -> f64 {
    trace
        .records
        .iter()
        .take(upto)
        .map(|r| r.norm_x / norm_xref)
        .filter(|v| v.is_finite())
        .fold(1.0, f64::max)
}

/// `κ(M_L⁻¹ A M_R⁻¹)`. All three Cholesky schemes are similar to
/// `L⁻¹ A L⁻ᵀ`, so they share one value.
pub fn kappa_preconditioned(a: &SpdMatrix, m: &SpdMatrix, mode: PrecondMode) -> Result<f64> {
    if mode == PrecondMode::Unpreconditioned {
        return cond2(a);
    }
    if let (SpdMatrix::Diagonal(da), SpdMatrix::Diagonal(dm)) = (a, m) {
        let (lo, hi) = da
            .iter()
            .zip(dm)
            .map(|(x, y)| x / y)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        return Ok(hi / lo);
    }
    let c = congruence_with_inverse_factor(a, m)?;
    cond2(&SpdMatrix::Dense(c))
}

/// `L⁻¹ A L⁻ᵀ` for the Cholesky factor `L` of `m`, symmetrised.
pub fn congruence_with_inverse_factor(a: &SpdMatrix, m: &SpdMatrix) -> Result<DenseMatrix> {
    let l = cholesky(m)?;
    let n = a.n();
    let ad = a.to_dense();
    let fp64 = crate::fpx::FP64;
    // B = L⁻¹ A, column by column; A is symmetric so column j is row j.
    let mut b = DenseMatrix::zeros(n);
    for j in 0..n {
        let col = solve_lower(&l, ad.row(j), fp64);
        for (i, v) in col.into_iter().enumerate() {
            b.set(i, j, v);
        }
    }
    // C = L⁻¹ Bᵀ = L⁻¹ A L⁻ᵀ.
    let bt = b.transpose();
    let mut c = DenseMatrix::zeros(n);
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| bt.get(i, j)).collect();
        let y = solve_lower(&l, &col, fp64);
        for (i, v) in y.into_iter().enumerate() {
            c.set(i, j, v);
        }
    }
    Ok(c.symmetrized())
}

/// Eigenvalue-based condition number of a dense symmetric matrix.
pub fn dense_kappa(m: &DenseMatrix) -> f64 {
    let e = symmetric_eigen(m);
    e.values[e.values.len() - 1] / e.values[0]
}

/// `(ε_pre^(s,z), ε_pre^(s,q))` for the Cholesky schemes, with
/// `κ = κ(M⁻¹)`:
///
/// | mode  | `ε^(s,z)`            | `ε^(s,q)`            |
/// |-------|----------------------|----------------------|
/// | left  | `n u_s κ^{3/2}`      | `n u_s κ^{3/2}`      |
/// | right | `n u_z κ^{3/2}`      | `n u_q κ^{3/2}`      |
/// | split | `n (u_s+u_z) κ^{1/2}`| `n (u_s+u_q) κ`      |
pub fn epsilon_pre_terms(inputs: &BoundInputs, mode: PrecondMode) -> (f64, f64) {
    let n = inputs.n as f64;
    let kappa = inputs.kappa_minv;
    match mode {
        PrecondMode::Unpreconditioned => (0.0, 0.0),
        PrecondMode::Left => {
            let e = n * inputs.u_s * kappa.powf(1.5);
            (e, e)
        }
        PrecondMode::Right => (
            n * inputs.u_z * kappa.powf(1.5),
            n * inputs.u_q * kappa.powf(1.5),
        ),
        PrecondMode::Split => (
            n * (inputs.u_s + inputs.u_z) * kappa.sqrt(),
            n * (inputs.u_s + inputs.u_q) * kappa,
        ),
    }
}

/// Left-hand side of the iteration assumption at step `k`:
///
/// ```text
/// n (k+1) u κ(A) / (1 - n u κ(A))
///   + n (k+1) u₂ κ(M⁻¹)^{m₂}
///   + k (k+1) u κ(M⁻¹)^{1/2} κ(M_L⁻¹ A M_R⁻¹)^{1/2}
/// ```
///
/// Without preconditioning the last two terms are replaced by
/// `(k+1) u κ(M⁻¹)^{1/2} (1 + k κ(M_L⁻¹ A M_R⁻¹)^{1/2})`.
/// Returns `+inf` when `n u κ(A) >= 1`.
pub fn assumption_lhs(inputs: &BoundInputs, mode: PrecondMode, k: usize) -> f64 {
    let n = inputs.n as f64;
    let k = k as f64;
    let u = inputs.u;
    let denom = 1.0 - n * u * inputs.kappa_a;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    let first = n * (k + 1.0) * u * inputs.kappa_a / denom;
    let sqrt_minv = inputs.kappa_minv.sqrt();
    let sqrt_prec = inputs.kappa_precond.sqrt();
    let rest = match mode {
        PrecondMode::Unpreconditioned => (k + 1.0) * u * sqrt_minv * (1.0 + k * sqrt_prec),
        _ => {
            n * (k + 1.0) * inputs.u2(mode) * inputs.kappa_minv.powf(inputs.m2(mode))
                + k * (k + 1.0) * u * sqrt_minv * sqrt_prec
        }
    };
    first + rest
}

/// Bound on `||b - A x_i|| / (||A|| ||x||)`.
pub fn backward_bound(inputs: &BoundInputs, k: usize, variant: BoundVariant) -> f64 {
    let base = inputs.u * inputs.kappa_minv.sqrt() * inputs.max_xratio;
    match variant {
        BoundVariant::Plot => base,
        BoundVariant::Strict => {
            let k = k as f64;
            inputs.n as f64 * k * k * base
        }
    }
}

/// Bound on `||x_i - x||_A / (||A||^{1/2} ||x||)`: the backward bound times
/// `κ(A)^{1/2}`.
pub fn forward_bound(inputs: &BoundInputs, k: usize, variant: BoundVariant) -> f64 {
    backward_bound(inputs, k, variant) * inputs.kappa_a.sqrt()
}

/// `c n k u ||A|| max_x_abs`, the residual-gap growth bound.
pub fn residual_gap_bound(inputs: &BoundInputs, k: usize, max_x_abs: f64, c: f64) -> f64 {
    c * inputs.n as f64 * k as f64 * inputs.u * inputs.norm_a * max_x_abs
}

/// Threshold on the decrease of the quadratic function used to locate k⋆:
/// `n² u² ||A||² ||M⁻¹|| ||x||²`.
pub fn k_star_epsilon(inputs: &BoundInputs) -> f64 {
    let n = inputs.n as f64;
    n * n * inputs.u * inputs.u * inputs.norm_a.powi(2) * inputs.norm_minv * inputs.norm_xref.powi(2)
}

/// Bound overlays for every record of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub backward_bound: Vec<f64>,
    pub forward_bound: Vec<f64>,
    pub assumption_lhs: Vec<f64>,
    pub epsilon_sz: f64,
    pub epsilon_sq: f64,
    /// Largest `k` such that the assumption holds (`<= 1/2`) at every step
    /// up to `k`; `None` if it already fails at `k = 0`.
    pub assumption_satisfied_up_to_k: Option<usize>,
}

impl BoundReport {
    pub fn evaluate(
        inputs: &BoundInputs,
        mode: PrecondMode,
        trace: &PcgTrace,
        variant: BoundVariant,
    ) -> Self {
        let len = trace.records.len();
        let mut backward = Vec::with_capacity(len);
        let mut forward = Vec::with_capacity(len);
        let mut assumption = Vec::with_capacity(len);
        for k in 0..len {
            // The bound takes the maximum over j <= k + 1.
            let ratio = max_xratio(trace, inputs.norm_xref, (k + 2).min(len));
            let at_k = inputs.with_max_xratio(ratio);
            backward.push(backward_bound(&at_k, k, variant));
            forward.push(forward_bound(&at_k, k, variant));
            assumption.push(assumption_lhs(inputs, mode, k));
        }
        let satisfied = assumption.iter().take_while(|&&v| v <= 0.5).count();
        let (epsilon_sz, epsilon_sq) = epsilon_pre_terms(inputs, mode);
        Self {
            backward_bound: backward,
            forward_bound: forward,
            assumption_lhs: assumption,
            epsilon_sz,
            epsilon_sq,
            assumption_satisfied_up_to_k: satisfied.checked_sub(1),
        }
    }
}
