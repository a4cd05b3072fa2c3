use super::{
    checked_quotient, BreakdownKind, Monitor, PcgState, PcgTrace, PreconditionerScheme, Status,
    StoppingRule,
};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, matvec, sub, SpdMatrix};
use crate::problems::reference_solution;

pub(crate) fn check_dims(a: &SpdMatrix, b: &[f64], x0: &[f64], factor_n: usize) -> Result<()> {
    let n = a.n();
    for found in [b.len(), x0.len(), factor_n] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// Runs the preconditioned CG framework for at most `maxiter` iterations.
///
/// Each iteration computes
///
/// ```text
/// alpha_k   = z_kᵀ s_k / p_kᵀ A p_k
/// x_{k+1}   = x_k + alpha_k p_k
/// r_{k+1}   = r_k - alpha_k A p_k
/// s_{k+1}   = M_L⁻¹ r_{k+1}
/// q_{k+1}   = M_R⁻¹ s_{k+1}
/// z_{k+1}   = M_R⁻ᵀ r_{k+1}
/// (stopping check)
/// beta_{k+1} = z_{k+1}ᵀ s_{k+1} / z_kᵀ s_k
/// p_{k+1}   = q_{k+1} + beta_{k+1} p_k
/// ```
///
/// with the preconditioner applications done in the scheme's formats.
/// Breakdowns terminate the run and are reported in the trace.
pub fn pcg_run(
    a: &SpdMatrix,
    b: &[f64],
    x0: &[f64],
    scheme: &PreconditionerScheme,
    maxiter: usize,
    stop: StoppingRule,
) -> Result<PcgTrace> {
    pcg_run_observed(a, b, x0, scheme, maxiter, stop, |_| {})
}

/// [`pcg_run`] calling `observer` with the state of every recorded iterate.
pub fn pcg_run_observed(
    a: &SpdMatrix,
    b: &[f64],
    x0: &[f64],
    scheme: &PreconditionerScheme,
    maxiter: usize,
    stop: StoppingRule,
    mut observer: impl FnMut(&PcgState),
) -> Result<PcgTrace> {
    check_dims(a, b, x0, scheme.n())?;
    let x_ref = reference_solution(a, b)?;
    let mut monitor = Monitor::new(a, b, x_ref, stop);

    let r = sub(b, &matvec(a, x0));
    let s = scheme.apply_s(&r);
    let q = scheme.apply_q(&s);
    let z = scheme.apply_z(&r);
    let mut zs = dot(&z, &s);
    let mut state = PcgState {
        k: 0,
        x: x0.to_vec(),
        p: q.clone(),
        r,
        s,
        q,
        z,
        alpha: f64::NAN,
        beta: f64::NAN,
    };

    let mut first = monitor.measure(0, &state.x, &state.r, zs);
    if state.has_non_finite() || !zs.is_finite() {
        first.status = Status::Breakdown(BreakdownKind::NonFinite);
    } else if state.r.iter().all(|&v| v == 0.0) {
        first.status = Status::Converged;
    } else if maxiter == 0 {
        first.status = Status::MaxIter;
    }
    observer(&state);
    let mut records = vec![first];
    if records[0].status != Status::Running {
        return Ok(monitor.finish(records, state));
    }

    for k in 0..maxiter {
        let ap = matvec(a, &state.p);
        let pap = dot(&state.p, &ap);
        let (alpha, alpha_fail) = checked_quotient(zs, pap);

        state.x = axpy(alpha, &state.p, &state.x);
        state.r = axpy(-alpha, &ap, &state.r);
        state.s = scheme.apply_s(&state.r);
        state.q = scheme.apply_q(&state.s);
        state.z = scheme.apply_z(&state.r);
        state.k = k + 1;
        state.alpha = alpha;
        let zs_next = dot(&state.z, &state.s);

        let mut rec = monitor.measure(k + 1, &state.x, &state.r, zs_next);
        rec.alpha = Some(alpha);
        rec.local_orth = Some(dot(&state.r, &state.p).abs());

        let terminal = if let Some(kind) = alpha_fail {
            Some(Status::Breakdown(kind))
        } else if state.has_non_finite() || !zs_next.is_finite() {
            Some(Status::Breakdown(BreakdownKind::NonFinite))
        } else if state.r.iter().all(|&v| v == 0.0) || monitor.should_stop(&rec) {
            Some(Status::Converged)
        } else if k + 1 == maxiter {
            Some(Status::MaxIter)
        } else {
            None
        };
        if let Some(status) = terminal {
            rec.status = status;
            observer(&state);
            records.push(rec);
            break;
        }

        let (beta, beta_fail) = checked_quotient(zs_next, zs);
        state.p = axpy(beta, &state.p, &state.q);
        state.beta = beta;
        rec.beta = Some(beta);
        zs = zs_next;
        if let Some(kind) = beta_fail {
            rec.status = Status::Breakdown(kind);
        } else if state.p.iter().any(|v| !v.is_finite()) {
            rec.status = Status::Breakdown(BreakdownKind::NonFinite);
        }
        observer(&state);
        let done = rec.status != Status::Running;
        records.push(rec);
        if done {
            break;
        }
    }

    Ok(monitor.finish(records, state))
}
