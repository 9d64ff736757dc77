//! Optimistic Frank-Wolfe: an optimistic online learner plays vertices against the weighted
//! gradients, and the iterates are their anytime averages.
//!
//! Row `t ≥ 1` describes `x_t`; the setup at `x_0 = v_0` is not a row. The run takes
//! `T + 1` gradients: `∇f(x_0)` seeds the first hint.

use super::{
    check_gradient, check_value, start_point, Clock, IterateView, NoObserver, Observer,
    OracleCounts, RunOptions, RunOutput,
};
use crate::error::{Error, Result};
use crate::gaps::{HbGapTracker, OptimisticGapTracker, OptimisticStep};
use crate::linalg;
use crate::model::{Objective, ProblemInstance, ScheduleKind, WeightSchedule};
use crate::online::{Oftrl, Omd, OptimisticLearner, SubgradientPolicy};
use crate::trace::{Flags, Trace, TraceRecord};

/// Objective evaluations allowed per segment search.
pub const SEGMENT_SEARCH_BUDGET: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimisticVariant {
    Oftrl,
    Omd(SubgradientPolicy),
}

/// How `y_{t−1}` (any point with `f(y_{t−1}) ≤ f(x_{t−1})`) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YHook {
    #[default]
    Identity,
    /// Budgeted golden-section search of `f` on the segment `[x_{t−1}, v_t]`.
    SegmentSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimisticOptions {
    pub variant: OptimisticVariant,
    pub y_hook: YHook,
    /// Also report the bound closed with the zero-hint next vertex (one reporting LMO).
    pub extra_lmo_gap: bool,
}

impl OptimisticOptions {
    pub fn new(variant: OptimisticVariant) -> Self {
        Self {
            variant,
            y_hook: YHook::Identity,
            extra_lmo_gap: true,
        }
    }
}

pub fn run_optimistic_fw(
    inst: &ProblemInstance,
    o: &OptimisticOptions,
    opts: &RunOptions,
) -> Result<RunOutput> {
    run_optimistic_fw_observed(inst, o, opts, &mut NoObserver)
}

/// Best of `x` and the golden-section probes on `[x, v]` within the evaluation budget.
/// Returns `(y, f(y), evaluations, improved)`.
fn segment_search(
    f: &dyn Objective,
    x: &[f64],
    fx: f64,
    v: &[f64],
) -> (Vec<f64>, f64, usize, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |g: f64| {
        let fv = f.value(&linalg::mix(x, v, g));
        if fv.is_finite() {
            fv
        } else {
            f64::INFINITY
        }
    };
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut evals = 2;
    let (mut best, mut fbest) = (0.0, fx);
    for (g, fg) in [(c, fc), (d, fd)] {
        if fg < fbest {
            best = g;
            fbest = fg;
        }
    }
    while evals < SEGMENT_SEARCH_BUDGET {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
            if fc < fbest {
                best = c;
                fbest = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
            if fd < fbest {
                best = d;
                fbest = fd;
            }
        }
        evals += 1;
    }
    if best == 0.0 {
        (x.to_vec(), fx, evals, false)
    } else {
        (linalg::mix(x, v, best), fbest, evals, true)
    }
}

pub fn run_optimistic_fw_observed(
    inst: &ProblemInstance,
    o: &OptimisticOptions,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    opts.validate()?;
    if !inst.regularizer.is_indicator() {
        return Err(Error::Unsupported(
            "optimistic FW gap certificates are implemented for indicator regularizers".into(),
        ));
    }
    let set = inst.set();
    let f = inst.objective.as_ref();
    let diameter = set.diameter_sq().sqrt();
    if !diameter.is_finite() {
        return Err(Error::config("set", "optimistic FW needs a bounded set"));
    }
    let n = inst.dim();
    let mut learner: Box<dyn OptimisticLearner> = match o.variant {
        OptimisticVariant::Oftrl => Box::new(Oftrl::new(inst.regularizer.clone())),
        OptimisticVariant::Omd(p) => Box::new(Omd::new(inst.regularizer.clone(), p)),
    };
    let label = match o.variant {
        OptimisticVariant::Oftrl => "ofw_ftrl",
        OptimisticVariant::Omd(SubgradientPolicy::Recursive) => "ofw_omd",
        OptimisticVariant::Omd(SubgradientPolicy::Zero) => "ofw_omd_zero",
    };

    let clock = Clock::start();
    let mut trace = Trace::new(label);
    let mut counts = OracleCounts::default();
    let mut schedule = WeightSchedule::new(ScheduleKind::Optimistic)?;
    let mut opt = OptimisticGapTracker::new();
    let mut hb = HbGapTracker::new(n);

    let mut x_prev = start_point(inst, &opts.x0)?;
    let mut f_prev = f.value(&x_prev);
    counts.fval += 1;
    check_value(f_prev, 0)?;
    let mut hint = f.gradient(&x_prev);
    counts.grad += 1;
    check_gradient(&hint, 0)?;

    for _ in 0..opts.iters {
        let w = schedule.advance()?;
        let t = w.t;
        let a = w.a;
        let a_prev = w.cumulative - a;
        let v = learner
            .step(&linalg::scale(&hint, a))
            .map_err(|e| e.at_iter(t))?;
        counts.lmo += 1;

        let mut flags = Flags::empty();
        let y_prev = if a_prev == 0.0 || o.y_hook == YHook::Identity {
            x_prev.clone()
        } else {
            let (y, _, evals, improved) = segment_search(f, &x_prev, f_prev, &v);
            counts.fval += evals as u64;
            flags.set(Flags::Y_FALLBACK, !improved);
            y
        };
        let x = if a_prev == 0.0 {
            v.clone()
        } else {
            linalg::mix(&y_prev, &v, w.gamma)
        };
        let fx = f.value(&x);
        counts.fval += 1;
        check_value(fx, t)?;
        let grad = f.gradient(&x);
        counts.grad += 1;
        check_gradient(&grad, t)?;
        learner
            .observe(&linalg::scale(&grad, a))
            .map_err(|e| e.at_iter(t))?;

        opt.update(&OptimisticStep {
            a,
            a_prev_cumulative: a_prev,
            v: &v,
            grad: &grad,
            hint: &hint,
            x: &x,
            fx,
            x_prev: &x_prev,
            fx_prev: f_prev,
            y_prev: &y_prev,
        });
        let lb_opt = fx - opt.optimistic_gap(w.cumulative, diameter)?;

        let mut row = TraceRecord::new(t);
        row.primal = fx;
        row.lb_opt = Some(lb_opt);
        if o.extra_lmo_gap {
            let v_tilde = learner.zero_hint_next().map_err(|e| e.at_iter(t))?;
            counts.reporting_lmo += 1;
            row.lb_opt_extra = Some(fx - opt.optimistic_gap_extra_lmo(w.cumulative, &v_tilde)?);
        }
        if opts.report_hb {
            hb.absorb(w.gamma, fx, &grad, &x)?;
            let (_, lb) = hb.hb_lower_bound(set).map_err(|e| e.at_iter(t))?;
            counts.reporting_lmo += 1;
            row.lb_hb = Some(lb);
            row.gap_hb = Some(fx - lb);
        }

        obs.observe(&IterateView {
            t,
            x: &x,
            v: &v,
            oracle_input: learner.last_input(),
            gamma_or_a: a,
        });

        row.lb_native = lb_opt;
        row.gap_aligned = fx - lb_opt;
        row.gamma_or_a = a;
        row.flags = flags;
        row.lmo_calls = counts.lmo;
        row.grad_calls = counts.grad;
        row.fval_calls = counts.fval;
        row.reporting_lmo = counts.reporting_lmo;
        row.wall_time_s = clock.secs();
        let stop = opts.should_stop(row.gap_aligned);
        trace.records.push(row);

        hint = grad;
        x_prev = x;
        f_prev = fx;
        if stop {
            trace.stopped_early = true;
            break;
        }
    }
    Ok(RunOutput {
        trace,
        x: x_prev,
        counts,
    })
}
