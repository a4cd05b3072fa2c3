//! CSV emission. Floats use Rust's shortest round-trip `{:e}` form, absent
//! values are empty fields and lines end in `\n`.

use std::fmt::Write;

use krylovmp::bounds::BoundReport;
use krylovmp::experiment::SweepRow;
use krylovmp::pcg::PcgTrace;

use crate::config::ExperimentConfig;

pub const TRACE_COLUMNS: [&str; 14] = [
    "k",
    "alpha",
    "beta",
    "norm_rhat",
    "norm_true_residual",
    "residual_gap",
    "a_norm_error",
    "f_value",
    "local_orth",
    "norm_x",
    "backward_bound",
    "forward_bound",
    "assumption_lhs",
    "status",
];

pub const SWEEP_COLUMNS: [&str; 6] = [
    "fmt_L",
    "fmt_R",
    "best_k",
    "relative_forward_error_Anorm",
    "relative_backward_error",
    "status",
];

fn float(v: f64) -> String {
    format!("{v:e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// `# key = value` lines for the configuration, then `# meta.key = value`.
pub fn header(config: &ExperimentConfig, meta: &[(&str, f64)]) -> String {
    let mut out = String::new();
    for (k, v) in config.entries() {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    for (k, v) in meta {
        writeln!(out, "# meta.{k} = {}", float(*v)).unwrap();
    }
    out
}

pub fn trace_csv(
    config: &ExperimentConfig,
    meta: &[(&str, f64)],
    trace: &PcgTrace,
    bounds: &BoundReport,
) -> String {
    let mut out = header(config, meta);
    out.push_str(&TRACE_COLUMNS.join(","));
    out.push('\n');
    for (i, r) in trace.records.iter().enumerate() {
        let fields = [
            r.k.to_string(),
            optional(r.alpha),
            optional(r.beta),
            float(r.norm_rhat),
            float(r.norm_true_residual),
            float(r.residual_gap),
            float(r.a_norm_error),
            float(r.f_value),
            optional(r.local_orth),
            float(r.norm_x),
            float(bounds.backward_bound[i]),
            float(bounds.forward_bound[i]),
            float(bounds.assumption_lhs[i]),
            r.status.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(config: &ExperimentConfig, meta: &[(&str, f64)], rows: &[SweepRow]) -> String {
    let mut out = header(config, meta);
    out.push_str(&SWEEP_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let fields = [
            r.fmt_left.to_string(),
            r.fmt_right.to_string(),
            r.best_k.map(|k| k.to_string()).unwrap_or_default(),
            float(r.relative_forward_error),
            float(r.relative_backward_error),
            r.status.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
