//! Unconstrained gradient descent `x_{t+1} = x_t − a_t ∇f(x_t)` with primal-dual steps.
//!
//! Rows start at `t = 1`. Row `t` describes `x_t`; `gap_ahead` is
//! `G_t = f(x_{t+1}) − L_t`, which the rate bounds refer to.

use super::{
    check_gradient, check_value, Clock, IterateView, NoObserver, Observer, OracleCounts,
    RunOptions, RunOutput,
};
use crate::error::{Error, Result};
use crate::gaps::GdGapTracker;
use crate::linalg;
use crate::model::ProblemInstance;
use crate::steps::{
    gd_pd_line_search, gd_pd_model, gd_pd_short_step, GdRayModel, RuleTag, StepDecision,
};
use crate::trace::{Flags, Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdRule {
    PdShort,
    PdLine,
    /// `a_t = 1/L`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdOptions {
    pub rule: GdRule,
    /// Bound on `‖x_1 − x*‖`; defaults to the exact distance when the optimum is known.
    pub d_bound: Option<f64>,
}

pub fn run_gd_pd(inst: &ProblemInstance, g: &GdOptions, opts: &RunOptions) -> Result<RunOutput> {
    run_gd_pd_observed(inst, g, opts, &mut NoObserver)
}

fn resolve_d_bound(inst: &ProblemInstance, g: &GdOptions, x1: &[f64]) -> Result<f64> {
    let exact = inst.reference_point().map(|p| linalg::dist_sq(x1, p).sqrt());
    match (g.d_bound, exact) {
        (Some(d), Some(e)) if d < e * (1.0 - 1e-12) => Err(Error::config(
            "d_bound",
            format!("{d} is smaller than the distance {e} from x1 to the optimum"),
        )),
        (Some(d), _) => Ok(d),
        (None, Some(e)) if e > 0.0 => Ok(e),
        (None, Some(_)) => Err(Error::config(
            "d_bound",
            "the start point is already optimal; supply a positive bound",
        )),
        (None, None) => Err(Error::config(
            "d_bound",
            "required when the instance has no reference optimum",
        )),
    }
}

pub fn run_gd_pd_observed(
    inst: &ProblemInstance,
    g: &GdOptions,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    opts.validate()?;
    let f = inst.objective.as_ref();
    let l = inst.smoothness();
    let n = inst.dim();
    let x1 = match &opts.x0 {
        Some(x) if x.len() != n => return Err(Error::config("x0", "wrong dimension")),
        Some(x) => x.clone(),
        None => vec![0.0; n],
    };
    let d_bound = resolve_d_bound(inst, g, &x1)?;
    let mut tracker = GdGapTracker::new(n, d_bound)?;

    let label = match g.rule {
        GdRule::PdShort => "gd_pd_short",
        GdRule::PdLine => "gd_pd_line",
        GdRule::Fixed => "gd_fixed",
    };
    let clock = Clock::start();
    let mut trace = Trace::new(label);
    trace.note("d_bound", d_bound.to_string());
    let mut counts = OracleCounts::default();

    let mut x = x1.clone();
    let mut fx = f.value(&x);
    counts.fval += 1;
    check_value(fx, 1)?;
    let mut a_prev = 0.0;
    // 𝒢_{t−1}: ½D² before the first step, A_{t−1} G_{t−1} afterwards.
    let mut g_script = 0.5 * d_bound * d_bound;
    let mut prev_step: Option<f64> = None;
    let mut lb_prev = f64::NEG_INFINITY;

    for t in 1..=opts.iters {
        let grad = f.gradient(&x);
        counts.grad += 1;
        check_gradient(&grad, t)?;
        let gns = linalg::norm_sq(&grad);
        let mut row = TraceRecord::new(t);
        row.primal = fx;
        if gns == 0.0 {
            row.lb_native = lb_prev;
            row.gap_aligned = fx - lb_prev;
            row.gamma_or_a = 0.0;
            row.flags.insert(Flags::STATIONARY);
            row.lmo_calls = counts.lmo;
            row.grad_calls = counts.grad;
            row.fval_calls = counts.fval;
            row.wall_time_s = clock.secs();
            trace.records.push(row);
            trace.stopped_early = true;
            break;
        }

        let mut model_short = None;
        let decision: StepDecision = match g.rule {
            GdRule::PdShort => gd_pd_short_step(g_script, gns, a_prev, l, prev_step)
                .map_err(|e| e.at_iter(t))?,
            GdRule::PdLine => {
                let model = GdRayModel {
                    objective: f,
                    x: &x,
                    grad: &grad,
                    fx,
                    g_script,
                    a_prev,
                    grad_norm_sq: gns,
                };
                let (mut d, evals) = gd_pd_line_search(&model, l, prev_step, opts.search_tol)
                    .map_err(|e| e.at_iter(t))?;
                counts.fval += evals as u64;
                let short = gd_pd_short_step(g_script, gns, a_prev, l, prev_step)
                    .map_err(|e| e.at_iter(t))?;
                let hs = model.eval(short.value).map_err(|e| e.at_iter(t))?;
                counts.fval += 1;
                if hs < d.model_value {
                    d.value = short.value;
                    d.model_value = hs;
                }
                model_short = Some(short.model_value);
                d
            }
            GdRule::Fixed => {
                let a = 1.0 / l;
                StepDecision {
                    value: a,
                    rule: RuleTag::GdFixed,
                    model_value: gd_pd_model(a, g_script, gns, a_prev, l),
                    stationary: false,
                    degenerate: false,
                }
            }
        };
        let a = decision.value;
        let x_next: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - a * gi).collect();
        let cumulative = a_prev + a;
        tracker.absorb(a, fx, &grad, &x);
        let f_next = f.value(&x_next);
        counts.fval += 1;
        check_value(f_next, t)?;
        let gap = tracker.gd_gap(&x_next, &x1, f_next, cumulative)?;
        let lb = f_next - gap;

        obs.observe(&IterateView {
            t,
            x: &x,
            v: &[],
            oracle_input: &grad,
            gamma_or_a: a,
        });

        row.lb_native = lb;
        row.gap_aligned = fx - lb;
        row.gap_ahead = Some(gap);
        row.gamma_or_a = a;
        row.model_value = Some(decision.model_value);
        row.model_short = model_short;
        row.lmo_calls = counts.lmo;
        row.grad_calls = counts.grad;
        row.fval_calls = counts.fval;
        row.wall_time_s = clock.secs();
        let stop = opts.should_stop(row.gap_aligned);
        trace.records.push(row);

        g_script = cumulative * gap;
        a_prev = cumulative;
        prev_step = Some(a);
        lb_prev = lb;
        x = x_next;
        fx = f_next;
        if stop {
            trace.stopped_early = true;
            break;
        }
    }
    Ok(RunOutput { trace, x, counts })
}
