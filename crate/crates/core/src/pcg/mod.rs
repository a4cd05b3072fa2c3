//! Preconditioned conjugate gradient in the Hestenes–Stiefel form with
//! left, right and split preconditioning, plus Saad's split variant whose
//! recursively updated residual carries the left preconditioner.
//!
//! Everything outside the three preconditioner applications runs in
//! binary64. Every iteration produces an [`IterationRecord`] holding the
//! finite-precision diagnostics (true residual, residual gap, A-norm error,
//! quadratic function value, local orthogonality).

mod saad;
mod scheme;
mod solver;

pub use saad::{saad_split_run, saad_split_run_observed};
pub use scheme::{PrecondMode, PreconditionerScheme};
pub use solver::{pcg_run, pcg_run_observed};

use std::fmt;

use crate::linalg::{a_norm, dot, matvec, norm2, sub, SpdMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BreakdownKind {
    /// A denominator of `alpha` or `beta` is exactly zero while the
    /// numerator is not.
    ZeroDenominator,
    /// A NaN or infinity in `alpha`, `beta` or a state vector.
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Converged,
    Breakdown(BreakdownKind),
    MaxIter,
}

impl Status {
    pub fn is_breakdown(&self) -> bool {
        matches!(self, Self::Breakdown(_))
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Running => f.write_str("Running"),
            Self::Converged => f.write_str("Converged"),
            Self::Breakdown(BreakdownKind::ZeroDenominator) => {
                f.write_str("Breakdown(ZeroDenominator)")
            }
            Self::Breakdown(BreakdownKind::NonFinite) => f.write_str("Breakdown(NonFinite)"),
            Self::MaxIter => f.write_str("MaxIter"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule {
    /// Run until `maxiter` (or breakdown).
    None,
    /// Stop once `||b - A x_k||_2 <= tau`.
    TrueResidualBelow(f64),
    /// Stop once `||r_k||_2 <= tau` for the recursively updated residual.
    RecursiveResidualBelow(f64),
    /// Stop after `patience` iterations without a new minimum of the A-norm
    /// error; the argmin is reported as [`PcgTrace::best_k`].
    ANormErrorMin { patience: usize },
}

/// Text form: `none`, `true_residual_below:TAU`,
/// `recursive_residual_below:TAU`, `anorm_error_min:PATIENCE`.
impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::TrueResidualBelow(tau) => write!(f, "true_residual_below:{tau:e}"),
            Self::RecursiveResidualBelow(tau) => write!(f, "recursive_residual_below:{tau:e}"),
            Self::ANormErrorMin { patience } => write!(f, "anorm_error_min:{patience}"),
        }
    }
}

impl std::str::FromStr for StoppingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let tau = |a: Option<&str>| -> Result<f64, String> {
            let a = a.ok_or_else(|| format!("`{name}` needs a threshold, e.g. `{name}:1e-10`"))?;
            match a.parse::<f64>() {
                Ok(t) if t >= 0.0 => Ok(t),
                _ => Err(format!("bad threshold `{a}`")),
            }
        };
        match name {
            "none" if arg.is_none() => Ok(Self::None),
            "true_residual_below" => Ok(Self::TrueResidualBelow(tau(arg)?)),
            "recursive_residual_below" => Ok(Self::RecursiveResidualBelow(tau(arg)?)),
            "anorm_error_min" => {
                let a = arg.ok_or("`anorm_error_min` needs a patience, e.g. `anorm_error_min:200`")?;
                let patience = a.parse().map_err(|_| format!("bad patience `{a}`"))?;
                Ok(Self::ANormErrorMin { patience })
            }
            _ => Err(format!("unknown stopping rule `{s}`")),
        }
    }
}

/// Solver state after `k` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct PcgState {
    pub k: usize,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// `alpha_{k-1}`, the step that produced this state.
    pub alpha: f64,
    /// `beta_k`, used to form `p_k`.
    pub beta: f64,
}

impl PcgState {
    fn has_non_finite(&self) -> bool {
        [&self.x, &self.r, &self.s, &self.q, &self.z, &self.p]
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()))
    }
}

/// Diagnostics for iterate `k`. `alpha` is the step that produced `x_k`,
/// `beta` the coefficient that formed `p_k` (absent on the terminal record).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `z_kᵀ s_k` (for Saad's variant, `r_kᵀ r_k` of the preconditioned
    /// residual).
    pub z_dot_s: f64,
    pub norm_rhat: f64,
    pub norm_true_residual: f64,
    pub residual_gap: f64,
    pub a_norm_error: f64,
    pub f_value: f64,
    /// `|r_kᵀ p_{k-1}|`.
    pub local_orth: Option<f64>,
    pub norm_x: f64,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct PcgTrace {
    pub records: Vec<IterationRecord>,
    pub final_state: PcgState,
    pub k_star_candidate: Option<usize>,
    /// Iteration with the smallest finite A-norm error.
    pub best_k: Option<usize>,
    /// Reference solution the error diagnostics are measured against.
    pub x_ref: Vec<f64>,
}

impl PcgTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn status(&self) -> Status {
        self.last().status
    }

    /// Smallest `||b - A x_k|| / scale` over the trace, ignoring non-finite
    /// entries.
    pub fn min_true_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.norm_true_residual)
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min)
    }

    /// Sets [`Self::k_star_candidate`] from [`detect_k_star`].
    pub fn mark_k_star(&mut self, epsilon: f64) -> Option<usize> {
        self.k_star_candidate = detect_k_star(self, epsilon);
        self.k_star_candidate
    }
}

/// First `k` with `f(x_k) - f(x_{k+1}) <= epsilon`.
pub fn detect_k_star(trace: &PcgTrace, epsilon: f64) -> Option<usize> {
    let f: Vec<f64> = trace.records.iter().map(|r| r.f_value).collect();
    first_small_decrease(&f, epsilon)
}

pub(crate) fn first_small_decrease(f: &[f64], epsilon: f64) -> Option<usize> {
    f.windows(2)
        .position(|w| w[0].is_finite() && w[1].is_finite() && w[0] - w[1] <= epsilon)
}

/// `num / den`, classified.
pub(crate) fn checked_quotient(num: f64, den: f64) -> (f64, Option<BreakdownKind>) {
    let q = num / den;
    if den == 0.0 && num != 0.0 && num.is_finite() {
        (q, Some(BreakdownKind::ZeroDenominator))
    } else if !q.is_finite() {
        (q, Some(BreakdownKind::NonFinite))
    } else {
        (q, None)
    }
}

/// Shared per-iteration measurements and stopping logic.
pub(crate) struct Monitor<'a> {
    a: &'a SpdMatrix,
    b: &'a [f64],
    x_ref: Vec<f64>,
    stop: StoppingRule,
    best: Option<(usize, f64)>,
}

impl<'a> Monitor<'a> {
    pub(crate) fn new(a: &'a SpdMatrix, b: &'a [f64], x_ref: Vec<f64>, stop: StoppingRule) -> Self {
        Self {
            a,
            b,
            x_ref,
            stop,
            best: None,
        }
    }

    /// Measures iterate `x` against the recursively updated residual `rhat`
    /// (expressed as an unpreconditioned residual).
    pub(crate) fn measure(&mut self, k: usize, x: &[f64], rhat: &[f64], z_dot_s: f64) -> IterationRecord {
        let ax = matvec(self.a, x);
        let true_res = sub(self.b, &ax);
        let err = sub(x, &self.x_ref);
        let rec = IterationRecord {
            k,
            alpha: None,
            beta: None,
            z_dot_s,
            norm_rhat: norm2(rhat),
            norm_true_residual: norm2(&true_res),
            residual_gap: norm2(&sub(&true_res, rhat)),
            a_norm_error: a_norm(self.a, &err),
            f_value: 0.5 * dot(x, &ax) - dot(x, self.b),
            local_orth: None,
            norm_x: norm2(x),
            status: Status::Running,
        };
        if rec.a_norm_error.is_finite()
            && self.best.is_none_or(|(_, e)| rec.a_norm_error < e)
        {
            self.best = Some((k, rec.a_norm_error));
        }
        rec
    }

    pub(crate) fn should_stop(&self, rec: &IterationRecord) -> bool {
        match self.stop {
            StoppingRule::None => false,
            StoppingRule::TrueResidualBelow(tau) => rec.norm_true_residual <= tau,
            StoppingRule::RecursiveResidualBelow(tau) => rec.norm_rhat <= tau,
            StoppingRule::ANormErrorMin { patience } => {
                self.best.is_some_and(|(k, _)| rec.k - k >= patience)
            }
        }
    }

    pub(crate) fn finish(self, records: Vec<IterationRecord>, final_state: PcgState) -> PcgTrace {
        PcgTrace {
            records,
            final_state,
            k_star_candidate: None,
            best_k: self.best.map(|(k, _)| k),
            x_ref: self.x_ref,
        }
    }
}
