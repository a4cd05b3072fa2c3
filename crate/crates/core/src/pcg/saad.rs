use super::solver::check_dims;
use super::{checked_quotient, BreakdownKind, Monitor, PcgState, PcgTrace, Status, StoppingRule};
use crate::error::Result;
use crate::fpx::FloatFormat;
use crate::linalg::{axpy, dot, matvec, solve_lower, solve_upper, sub, LowerTriangular, SpdMatrix};
use crate::problems::reference_solution;

/// Split-preconditioned CG in Saad's formulation, where the recursively
/// updated residual is the left-preconditioned one:
///
/// ```text
/// r_0 = L⁻¹ (b - A x_0),  p_0 = L⁻ᵀ r_0
/// alpha_k   = r_kᵀ r_k / p_kᵀ A p_k
/// x_{k+1}   = x_k + alpha_k p_k
/// r_{k+1}   = r_k - alpha_k L⁻¹ A p_k
/// beta_{k+1} = r_{k+1}ᵀ r_{k+1} / r_kᵀ r_k
/// p_{k+1}   = L⁻ᵀ r_{k+1} + beta_{k+1} p_k
/// ```
///
/// `L⁻¹` is applied in `fmt_left` and `L⁻ᵀ` in `fmt_right`. The records
/// report `L r_k` as the recursively updated residual so that the residual
/// gap is measured against the unpreconditioned true residual.
pub fn saad_split_run(
    a: &SpdMatrix,
    b: &[f64],
    x0: &[f64],
    factor: &LowerTriangular,
    fmt_left: FloatFormat,
    fmt_right: FloatFormat,
    maxiter: usize,
    stop: StoppingRule,
) -> Result<PcgTrace> {
    saad_split_run_observed(a, b, x0, factor, fmt_left, fmt_right, maxiter, stop, |_| {})
}

/// [`saad_split_run`] with a per-iterate observer. In the observed state,
/// `r`, `s` and `z` all hold the preconditioned residual and `q` holds
/// `L⁻ᵀ r`.
#[allow(clippy::too_many_arguments)]
pub fn saad_split_run_observed(
    a: &SpdMatrix,
    b: &[f64],
    x0: &[f64],
    factor: &LowerTriangular,
    fmt_left: FloatFormat,
    fmt_right: FloatFormat,
    maxiter: usize,
    stop: StoppingRule,
    mut observer: impl FnMut(&PcgState),
) -> Result<PcgTrace> {
    check_dims(a, b, x0, factor.n())?;
    let x_ref = reference_solution(a, b)?;
    let mut monitor = Monitor::new(a, b, x_ref, stop);

    let r0 = sub(b, &matvec(a, x0));
    let r = solve_lower(factor, &r0, fmt_left);
    let q = solve_upper(factor, &r, fmt_right);
    let mut rr = dot(&r, &r);
    let mut state = PcgState {
        k: 0,
        x: x0.to_vec(),
        p: q.clone(),
        s: r.clone(),
        z: r.clone(),
        r,
        q,
        alpha: f64::NAN,
        beta: f64::NAN,
    };

    let mut first = monitor.measure(0, &state.x, &factor.apply(&state.r), rr);
    if state.has_non_finite() || !rr.is_finite() {
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
        let (alpha, alpha_fail) = checked_quotient(rr, pap);

        state.x = axpy(alpha, &state.p, &state.x);
        let w = solve_lower(factor, &ap, fmt_left);
        state.r = axpy(-alpha, &w, &state.r);
        state.q = solve_upper(factor, &state.r, fmt_right);
        state.s.clone_from(&state.r);
        state.z.clone_from(&state.r);
        state.k = k + 1;
        state.alpha = alpha;
        let rr_next = dot(&state.r, &state.r);

        let mut rec = monitor.measure(k + 1, &state.x, &factor.apply(&state.r), rr_next);
        rec.alpha = Some(alpha);
        rec.local_orth = Some(dot(&state.r, &state.p).abs());

        let terminal = if let Some(kind) = alpha_fail {
            Some(Status::Breakdown(kind))
        } else if state.has_non_finite() || !rr_next.is_finite() {
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

        let (beta, beta_fail) = checked_quotient(rr_next, rr);
        state.p = axpy(beta, &state.p, &state.q);
        state.beta = beta;
        rec.beta = Some(beta);
        rr = rr_next;
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
