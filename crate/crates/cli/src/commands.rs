//! The three experiment commands. Each writes its CSV output and reports
//! whether any run broke down.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use krylovmp::bounds::BoundReport;
use krylovmp::experiment::{self, Problem};
use krylovmp::linalg::norm2;
use krylovmp::pcg::{PcgTrace, PrecondMode, PreconditionerScheme};

use crate::config::{ExperimentConfig, SchemeMode, DEFAULT_MAXITER, DEFAULT_SWEEP_MAXITER};
use crate::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Breakdown,
}

impl Outcome {
    pub fn of(traces: &[&PcgTrace]) -> Self {
        if traces.iter().any(|t| t.status().is_breakdown()) {
            Self::Breakdown
        } else {
            Self::Completed
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::Completed => 0,
            Self::Breakdown => 2,
        }
    }
}

fn problem(config: &ExperimentConfig) -> Result<Problem> {
    config.validate()?;
    Ok(Problem::new(config.problem, config.preconditioner)?)
}

/// Norms needed to turn the CSV columns into normalised ratios.
fn meta(p: &Problem, x_ref: &[f64]) -> Vec<(&'static str, f64)> {
    let norm_a = p.a.norm2();
    let norm_xref = norm2(x_ref);
    vec![
        ("norm_a", norm_a),
        ("norm_xref", norm_xref),
        ("backward_scale", norm_a * norm_xref),
        ("norm_b", norm2(&p.b)),
    ]
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_trace(
    config: &ExperimentConfig,
    p: &Problem,
    scheme: &PreconditionerScheme,
    trace: &PcgTrace,
) -> Result<()> {
    let inputs = p.bound_inputs(scheme, trace)?;
    let bounds = BoundReport::evaluate(&inputs, scheme.mode, trace, config.bound_variant);
    let csv = report::trace_csv(config, &meta(p, &trace.x_ref), trace, &bounds);
    write(Path::new(&config.output), &csv)
}

fn summary(p: &Problem, trace: &PcgTrace) -> String {
    let last = trace.last();
    format!(
        "k = {}, status = {}, min ||b - A x_k|| / (||A|| ||x||) = {:e}",
        last.k,
        last.status,
        p.min_backward_ratio(trace)
    )
}

/// A single run in the configured scheme.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let config = config.resolved(DEFAULT_MAXITER);
    let p = problem(&config)?;
    let maxiter = config.maxiter_or(DEFAULT_MAXITER);
    let (scheme, trace) = match config.mode {
        SchemeMode::SaadSplit => {
            let trace = p.run_saad(config.fmt_s, config.fmt_q, maxiter, config.stop)?;
            (PreconditionerScheme::split(p.factor.clone(), config.fmt_s, config.fmt_q), trace)
        }
        SchemeMode::Pcg(mode) => {
            let scheme = p.scheme(mode, config.fmt_s, config.fmt_q, config.fmt_z);
            let trace = p.run(&scheme, maxiter, config.stop)?;
            (scheme, trace)
        }
    };
    write_trace(&config, &p, &scheme, &trace)?;
    println!("{}", summary(&p, &trace));
    Ok(Outcome::of(&[&trace]))
}

/// `foo.csv` → `foo.<tag>.csv`.
pub fn tagged_path(output: &str, tag: &str) -> PathBuf {
    let stem = output.strip_suffix(".csv").unwrap_or(output);
    PathBuf::from(format!("{stem}.{tag}.csv"))
}

/// Split PCG in both formulations with `fmt_L = fmt_s` and `fmt_R = fmt_q`.
/// Each output file echoes the configuration that reproduces it with `run`.
pub fn compare_saad(config: &ExperimentConfig) -> Result<Outcome> {
    let config = config.resolved(DEFAULT_MAXITER);
    let p = problem(&config)?;
    let (fmt_l, fmt_r) = (config.fmt_s, config.fmt_q);
    let maxiter = config.maxiter_or(DEFAULT_MAXITER);
    let c = experiment::compare_saad(&p, fmt_l, fmt_r, maxiter, config.stop)?;
    let scheme = PreconditionerScheme::split(p.factor.clone(), fmt_l, fmt_r);

    for (tag, mode, trace) in [
        ("alg2", SchemeMode::Pcg(PrecondMode::Split), &c.framework),
        ("saad", SchemeMode::SaadSplit, &c.saad),
    ] {
        let file_config = ExperimentConfig {
            mode,
            fmt_z: fmt_r,
            output: tagged_path(&config.output, tag).to_string_lossy().into_owned(),
            ..config.clone()
        };
        write_trace(&file_config, &p, &scheme, trace)?;
        println!("{tag}: {}", summary(&p, trace));
    }
    println!(
        "ratio = {:e} (min ||b - A x_k||: saad {:e}, framework {:e})",
        c.ratio,
        c.saad.min_true_residual(),
        c.framework.min_true_residual()
    );
    Ok(Outcome::of(&[&c.framework, &c.saad]))
}

/// Split PCG for every format pair, stopped at the A-norm error minimum.
/// Cell breakdowns are recorded in the `status` column.
pub fn sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    let config = config.resolved(DEFAULT_SWEEP_MAXITER);
    let p = problem(&config)?;
    let maxiter = config.maxiter_or(DEFAULT_SWEEP_MAXITER);
    let rows = experiment::sweep(&p, &config.sweep_formats, maxiter, config.sweep_patience, threads)?;
    let x_ref = krylovmp::problems::reference_solution(&p.a, &p.b)?;
    let csv = report::sweep_csv(&config, &meta(&p, &x_ref), &rows);
    write(Path::new(&config.output), &csv)?;
    println!("{} cells written to {}", rows.len(), config.output);
    Ok(Outcome::Completed)
}
