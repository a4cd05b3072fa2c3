//! Ready-made experiment drivers on the synthetic problem family: single
//! runs, the split-variant comparison and the format-pair sweep.

use crate::batch;
use crate::bounds::BoundInputs;
use crate::error::Result;
use crate::fpx::FloatFormat;
use crate::linalg::{a_norm, cholesky, norm2, LowerTriangular, SpdMatrix};
use crate::pcg::{
    pcg_run, saad_split_run, PcgTrace, PrecondMode, PreconditionerScheme, Status, StoppingRule,
};
use crate::problems::{build_matrix, build_preconditioner, build_rhs, ProblemSpec};

/// Which preconditioner matrix to factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PreconditionerKind {
    /// Truncated spectrum at `trunc_index`.
    #[default]
    Truncation,
    /// `M = I`.
    Identity,
}

impl PreconditionerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Truncation => "truncation",
            Self::Identity => "identity",
        }
    }
}

impl std::str::FromStr for PreconditionerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "truncation" => Ok(Self::Truncation),
            "identity" => Ok(Self::Identity),
            other => Err(format!("unknown preconditioner `{other}`")),
        }
    }
}

/// A generated system `A x = b` with its preconditioner and Cholesky factor.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub a: SpdMatrix,
    pub m: SpdMatrix,
    pub factor: LowerTriangular,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
}

impl Problem {
    pub fn new(spec: ProblemSpec, kind: PreconditionerKind) -> Result<Self> {
        let a = build_matrix(&spec)?;
        let m = match kind {
            PreconditionerKind::Truncation => build_preconditioner(&spec, &a)?,
            PreconditionerKind::Identity => SpdMatrix::identity(spec.n),
        };
        let factor = cholesky(&m)?;
        Ok(Self {
            b: build_rhs(spec.n),
            x0: vec![0.0; spec.n],
            spec,
            a,
            m,
            factor,
        })
    }

    pub fn truncated(spec: ProblemSpec) -> Result<Self> {
        Self::new(spec, PreconditionerKind::Truncation)
    }

    pub fn scheme(
        &self,
        mode: PrecondMode,
        fmt_s: FloatFormat,
        fmt_q: FloatFormat,
        fmt_z: FloatFormat,
    ) -> PreconditionerScheme {
        PreconditionerScheme::new(mode, self.factor.clone(), fmt_s, fmt_q, fmt_z)
    }

    pub fn run(
        &self,
        scheme: &PreconditionerScheme,
        maxiter: usize,
        stop: StoppingRule,
    ) -> Result<PcgTrace> {
        pcg_run(&self.a, &self.b, &self.x0, scheme, maxiter, stop)
    }

    pub fn run_saad(
        &self,
        fmt_left: FloatFormat,
        fmt_right: FloatFormat,
        maxiter: usize,
        stop: StoppingRule,
    ) -> Result<PcgTrace> {
        saad_split_run(
            &self.a, &self.b, &self.x0, &self.factor, fmt_left, fmt_right, maxiter, stop,
        )
    }

    pub fn bound_inputs(&self, scheme: &PreconditionerScheme, trace: &PcgTrace) -> Result<BoundInputs> {
        BoundInputs::for_run(&self.a, &self.m, scheme, trace)
    }

    /// `||A||_2 ||x_ref||_2`, the normalisation of the backward ratio.
    pub fn backward_scale(&self, trace: &PcgTrace) -> f64 {
        self.a.norm2() * norm2(&trace.x_ref)
    }

    /// `min_k ||b - A x_k|| / (||A|| ||x_ref||)`.
    pub fn min_backward_ratio(&self, trace: &PcgTrace) -> f64 {
        trace.min_true_residual() / self.backward_scale(trace)
    }
}

/// One cell of the format-pair sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub fmt_left: FloatFormat,
    pub fmt_right: FloatFormat,
    pub best_k: Option<usize>,
    /// `||x_k - x||_A / ||x||_A` at `best_k`.
    pub relative_forward_error: f64,
    /// `||b - A x_k|| / (||A|| ||x_k|| + ||b||)` at `best_k`.
    pub relative_backward_error: f64,
    pub status: Status,
}

fn sweep_cell(
    problem: &Problem,
    fmt_left: FloatFormat,
    fmt_right: FloatFormat,
    maxiter: usize,
    patience: usize,
) -> Result<SweepRow> {
    let scheme = PreconditionerScheme::split(problem.factor.clone(), fmt_left, fmt_right);
    let trace = problem.run(&scheme, maxiter, StoppingRule::ANormErrorMin { patience })?;
    let xref_a = a_norm(&problem.a, &trace.x_ref);
    let norm_a = problem.a.norm2();
    let norm_b = norm2(&problem.b);
    let (fe, be) = match trace.best_k {
        Some(k) => {
            let rec = &trace.records[k];
            (
                rec.a_norm_error / xref_a,
                rec.norm_true_residual / (norm_a * rec.norm_x + norm_b),
            )
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(SweepRow {
        fmt_left,
        fmt_right,
        best_k: trace.best_k,
        relative_forward_error: fe,
        relative_backward_error: be,
        status: trace.status(),
    })
}

fn sweep_pairs(formats: &[FloatFormat]) -> Vec<(FloatFormat, FloatFormat)> {
    let mut pairs: Vec<_> = formats
        .iter()
        .flat_map(|&l| formats.iter().map(move |&r| (l, r)))
        .collect();
    pairs.sort_by_key(|(l, r)| (l.name(), r.name()));
    pairs.dedup();
    pairs
}

/// Split PCG with `fmt_s = fmt_left`, `fmt_q = fmt_z = fmt_right` for every
/// pair drawn from `formats`, stopped at the A-norm error minimum. Rows are
/// sorted by format names. Cells run in parallel on up to `threads` workers.
pub fn sweep(
    problem: &Problem,
    formats: &[FloatFormat],
    maxiter: usize,
    patience: usize,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>> {
    let pairs = sweep_pairs(formats);
    batch::map_with_threads(&pairs, threads, |&(l, r)| {
        sweep_cell(problem, l, r, maxiter, patience)
    })
    .into_iter()
    .collect()
}

/// [`sweep`] forced onto the calling thread.
pub fn sweep_sequential(
    problem: &Problem,
    formats: &[FloatFormat],
    maxiter: usize,
    patience: usize,
) -> Result<Vec<SweepRow>> {
    let pairs = sweep_pairs(formats);
    batch::map_sequential(&pairs, |&(l, r)| sweep_cell(problem, l, r, maxiter, patience))
        .into_iter()
        .collect()
}

/// Split PCG in both formulations with matched formats.
#[derive(Clone, Debug)]
pub struct SaadComparison {
    pub framework: PcgTrace,
    pub saad: PcgTrace,
    /// `min ||b - A x_k||` of Saad's variant over that of the framework.
    pub ratio: f64,
}

pub fn compare_saad(
    problem: &Problem,
    fmt_left: FloatFormat,
    fmt_right: FloatFormat,
    maxiter: usize,
    stop: StoppingRule,
) -> Result<SaadComparison> {
    let scheme = PreconditionerScheme::split(problem.factor.clone(), fmt_left, fmt_right);
    let framework = problem.run(&scheme, maxiter, stop)?;
    let saad = problem.run_saad(fmt_left, fmt_right, maxiter, stop)?;
    let ratio = saad.min_true_residual() / framework.min_true_residual();
    Ok(SaadComparison {
        framework,
        saad,
        ratio,
    })
}
