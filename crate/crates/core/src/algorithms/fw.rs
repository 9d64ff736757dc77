//! Vanilla, heavy-ball and generalized (composite) Frank-Wolfe.
//!
//! Row `t` describes `x_t`, the vertex `v_t` and the bound `L_t` built from `x_0..x_t`;
//! `gap_ahead` is `f(x_{t+1}) − L_t`, the quantity the rates are stated for.

use super::{
    check_gradient, check_value, start_point, Clock, IterateView, NoObserver, Observer,
    OracleCounts, RunOptions, RunOutput,
};
use crate::error::{Error, Result};
use crate::gaps::{FwGapTracker, HbGapTracker};
use crate::linalg;
use crate::model::{ProblemInstance, ScheduleKind, WeightSchedule};
use crate::steps::{
    pd_line_search_fw, pd_short_step, short_step, FwSegmentModel, RuleTag,
    StepDecision,
};
use crate::trace::{Flags, Trace, TraceRecord};

/// Step-size rule of the FW family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FwRule {
    /// A closed-form schedule (`fw_classic` or `open_loop`).
    Schedule(ScheduleKind),
    Short,
    PdShort,
    PdLine,
}

impl FwRule {
    /// `γ_t = 2/(t+2)`, i.e. `a_t = 2t+2`.
    pub fn open_loop_default() -> Self {
        FwRule::Schedule(ScheduleKind::OpenLoop { ell: 2, a0: 2.0 })
    }

    fn is_dynamic(&self) -> bool {
        !matches!(self, FwRule::Schedule(_))
    }
}

/// Which generalized FW update to run with a composite `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralizedVariant {
    /// `v_t ∈ argmin ⟨∇f(x_t), v⟩ + ψ(v)`.
    PerStep,
    /// `v_t ∈ argmin Σ a_i ⟨∇f(x_i), v⟩ + A_t ψ(v)`.
    Cumulative,
    /// `v_t ∈ argmin Σ a_i ⟨∇f(x_i), v⟩ + ψ(v)`.
    DecreasingReg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Vanilla,
    HeavyBall,
    Generalized(GeneralizedVariant),
}

impl Family {
    fn label(&self) -> &'static str {
        match self {
            Family::Vanilla => "fw",
            Family::HeavyBall => "hbfw",
            Family::Generalized(GeneralizedVariant::PerStep) => "gen_fw_per_step",
            Family::Generalized(GeneralizedVariant::Cumulative) => "gen_fw_cumulative",
            Family::Generalized(GeneralizedVariant::DecreasingReg) => "gen_fw_decreasing_reg",
        }
    }

    fn separable(&self) -> bool {
        matches!(self, Family::Vanilla | Family::Generalized(GeneralizedVariant::PerStep))
    }

    /// Whether the primal includes `ψ(x)`.
    fn composite(&self) -> bool {
        matches!(
            self,
            Family::Generalized(GeneralizedVariant::PerStep | GeneralizedVariant::Cumulative)
        )
    }
}

pub fn run_fw(inst: &ProblemInstance, rule: FwRule, opts: &RunOptions) -> Result<RunOutput> {
    drive(inst, Family::Vanilla, rule, opts, &mut NoObserver)
}

pub fn run_fw_observed(
    inst: &ProblemInstance,
    rule: FwRule,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    drive(inst, Family::Vanilla, rule, opts, obs)
}

/// Heavy-ball FW. The step rule must not need the vertex before it is chosen, so the plain
/// short step is rejected; the primal-dual rules use the set diameter instead of `‖v − x‖`.
pub fn run_hb_fw(inst: &ProblemInstance, rule: FwRule, opts: &RunOptions) -> Result<RunOutput> {
    drive(inst, Family::HeavyBall, rule, opts, &mut NoObserver)
}

pub fn run_hb_fw_observed(
    inst: &ProblemInstance,
    rule: FwRule,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    drive(inst, Family::HeavyBall, rule, opts, obs)
}

/// Generalized FW with `a_t = 2t + 2`.
pub fn run_generalized_fw(
    inst: &ProblemInstance,
    variant: GeneralizedVariant,
    opts: &RunOptions,
) -> Result<RunOutput> {
    run_generalized_fw_observed(inst, variant, opts, &mut NoObserver)
}

pub fn run_generalized_fw_observed(
    inst: &ProblemInstance,
    variant: GeneralizedVariant,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    drive(
        inst,
        Family::Generalized(variant),
        FwRule::Schedule(ScheduleKind::FwClassic),
        opts,
        obs,
    )
}

/// Composite objective `f(x) + ψ(x)`, skipping `ψ` when it is an indicator.
fn composite_value(inst: &ProblemInstance, fx: f64, x: &[f64]) -> f64 {
    if inst.regularizer.is_indicator() {
        fx
    } else {
        fx + inst.regularizer.value(x)
    }
}

fn psi_of(inst: &ProblemInstance, v: &[f64]) -> f64 {
    if inst.regularizer.is_indicator() {
        0.0
    } else {
        inst.regularizer.value(v)
    }
}

struct Step {
    gamma: f64,
    decision: Option<StepDecision>,
    model_short: Option<f64>,
    flags: Flags,
}

impl Step {
    fn fixed(gamma: f64) -> Self {
        Self {
            gamma,
            decision: None,
            model_short: None,
            flags: Flags::empty(),
        }
    }

    fn from_decision(d: StepDecision, model_short: Option<f64>) -> Self {
        let mut flags = Flags::empty();
        flags.set(Flags::STATIONARY, d.stationary);
        flags.set(Flags::DEGENERATE, d.degenerate);
        Self {
            gamma: d.value,
            decision: Some(d),
            model_short,
            flags,
        }
    }

    fn model_value(&self) -> Option<f64> {
        self.decision
            .map(|d| d.model_value)
            .filter(|m| !m.is_nan())
    }
}

fn drive(
    inst: &ProblemInstance,
    family: Family,
    rule: FwRule,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunOutput> {
    opts.validate()?;
    if family == Family::HeavyBall && rule == FwRule::Short {
        return Err(Error::config(
            "step",
            "the short step needs the vertex before the step size; heavy-ball FW supports open-loop, pd-short and pd-line",
        ));
    }
    if family == Family::Vanilla && !inst.regularizer.is_indicator() {
        return Err(Error::config(
            "algo",
            "vanilla FW ignores ψ; use a generalized variant for composite objectives",
        ));
    }
    let set = inst.set();
    let reg = inst.regularizer.as_ref();
    let f = inst.objective.as_ref();
    let l = inst.smoothness();
    let d2_set = set.diameter_sq();
    if rule.is_dynamic() && !d2_set.is_finite() {
        return Err(Error::config("set", "primal-dual steps need a bounded set"));
    }
    let n = inst.dim();

    let mut schedule = WeightSchedule::new(match rule {
        FwRule::Schedule(k) => {
            if k == ScheduleKind::Optimistic {
                return Err(Error::config(
                    "step",
                    "the optimistic schedule starts at t = 1 and is reserved for optimistic FW",
                ));
            }
            k
        }
        _ => ScheduleKind::Dynamic,
    })?;

    let psi_star = match family {
        Family::Generalized(GeneralizedVariant::DecreasingReg) => {
            if reg.is_indicator() {
                Some(0.0)
            } else {
                inst.reference_point().map(|p| reg.value(p))
            }
        }
        _ => None,
    };

    let clock = Clock::start();
    let mut trace = Trace::new(family.label());
    if matches!(family, Family::Generalized(GeneralizedVariant::DecreasingReg)) && psi_star.is_none()
    {
        trace.note("psi_star", "omitted: the bound excludes the −ψ(x*)/A_t term");
    }
    let mut counts = OracleCounts::default();
    let mut x = start_point(inst, &opts.x0)?;
    let mut fx = f.value(&x);
    counts.fval += 1;
    check_value(fx, 0)?;

    let mut fw = FwGapTracker::new();
    let mut hb = HbGapTracker::new(n);
    let mut g_prev = f64::INFINITY;

    for t in 0..opts.iters {
        let grad = f.gradient(&x);
        counts.grad += 1;
        check_gradient(&grad, t)?;
        let primal = if family.composite() {
            composite_value(inst, fx, &x)
        } else {
            fx
        };
        let mut row = TraceRecord::new(t);
        row.primal = primal;

        let v;
        let step;
        let lb_native;
        let oracle_input: Vec<f64>;

        if family.separable() {
            v = match family {
                Family::Vanilla => set.lmo(&grad),
                _ => reg.min_oracle(&grad),
            }
            .map_err(|e| e.at_iter(t))?;
            counts.lmo += 1;
            let diff = linalg::sub(&v, &x);
            let inner = linalg::dot(&grad, &diff);
            let d2 = linalg::norm_sq(&diff);
            step = match rule {
                FwRule::Schedule(_) => Step::fixed(schedule.advance()?.gamma),
                FwRule::Short => Step::from_decision(short_step(-inner, d2, l), None),
                FwRule::PdShort => Step::from_decision(pd_short_step(g_prev, d2, l), None),
                FwRule::PdLine => {
                    let model = FwSegmentModel {
                        objective: f,
                        x: &x,
                        v: &v,
                        fx,
                        inner,
                        g_prev,
                    };
                    let (mut d, evals) =
                        pd_line_search_fw(&model, opts.search_tol).map_err(|e| e.at_iter(t))?;
                    counts.fval += evals as u64;
                    let short = pd_short_step(g_prev, d2, l);
                    if g_prev.is_finite() {
                        // Keep the line search from ever losing to the closed-form step.
                        let hs = model.eval(short.value).map_err(|e| e.at_iter(t))?;
                        counts.fval += 1;
                        if hs < d.model_value {
                            d.value = short.value;
                            d.model_value = hs;
                        }
                    }
                    d.degenerate = short.degenerate;
                    Step::from_decision(d, Some(short.model_value))
                }
            };
            // The bound weights start with a full reset whatever the first step is.
            let weight = if t == 0 { 1.0 } else { step.gamma };
            if rule.is_dynamic() {
                schedule.advance_with_gamma(weight)?;
            }
            let bound_inner = inner + psi_of(inst, &v);
            let b = fw.fw_update(weight, fx, bound_inner)?;
            lb_native = b.mix;
            row.lb_fw_mix = Some(b.mix);
            row.lb_fw_best = Some(b.best);
            row.gap_fw_best = Some(primal - b.best);
            if opts.report_hb {
                hb.absorb(weight, fx, &grad, &x)?;
                let (_, lb) = if family == Family::Vanilla {
                    hb.hb_lower_bound(set)
                } else {
                    hb.composite_lower_bound(reg)
                }
                .map_err(|e| e.at_iter(t))?;
                counts.reporting_lmo += 1;
                row.lb_hb = Some(lb);
            }
            oracle_input = grad.clone();
        } else {
            let a_cum;
            match rule {
                FwRule::Schedule(_) => {
                    let w = schedule.advance()?;
                    a_cum = w.cumulative;
                    step = Step::fixed(w.gamma);
                    hb.absorb(step.gamma, fx, &grad, &x)?;
                    v = hb_vertex(inst, family, hb.gbar(), a_cum).map_err(|e| e.at_iter(t))?;
                    counts.lmo += 1;
                }
                FwRule::PdShort | FwRule::PdLine => {
                    let short = pd_short_step(g_prev, d2_set, l);
                    let gamma_d = short.value;
                    let mut trial = hb.clone();
                    trial.absorb(if t == 0 { 1.0 } else { gamma_d }, fx, &grad, &x)?;
                    let w_d = schedule.clone().advance_with_gamma(gamma_d)?;
                    let v_d = hb_vertex(inst, family, trial.gbar(), w_d.cumulative)
                        .map_err(|e| e.at_iter(t))?;
                    counts.lmo += 1;
                    let mut chosen = (Step::from_decision(short, None), trial, v_d.clone());
                    if rule == FwRule::PdLine {
                        chosen.0.model_short = Some(short.model_value);
                        if g_prev.is_finite() {
                            let diff = linalg::sub(&v_d, &x);
                            let model = FwSegmentModel {
                                objective: f,
                                x: &x,
                                v: &v_d,
                                fx,
                                inner: linalg::dot(&grad, &diff),
                                g_prev,
                            };
                            let (d, evals) = pd_line_search_fw(&model, opts.search_tol)
                                .map_err(|e| e.at_iter(t))?;
                            let h_d = model.eval(gamma_d).map_err(|e| e.at_iter(t))?;
                            counts.fval += evals as u64 + 1;
                            let mut short_tagged = short;
                            short_tagged.rule = RuleTag::PdLine;
                            short_tagged.model_value = h_d;
                            chosen.0 = Step::from_decision(short_tagged, Some(short.model_value));
                            if d.model_value < h_d && d.value != gamma_d {
                                // The vertex depends on γ: accept γ* only if it reproduces v_D.
                                let mut trial2 = hb.clone();
                                trial2.absorb(d.value, fx, &grad, &x)?;
                                let w_s = schedule.clone().advance_with_gamma(d.value)?;
                                let v_s = hb_vertex(inst, family, trial2.gbar(), w_s.cumulative)
                                    .map_err(|e| e.at_iter(t))?;
                                counts.lmo += 1;
                                if v_s == v_d {
                                    chosen = (
                                        Step::from_decision(d, Some(short.model_value)),
                                        trial2,
                                        v_s,
                                    );
                                } else {
                                    chosen.0.flags.insert(Flags::GAMMA_FALLBACK);
                                }
                            }
                        }
                    }
                    let (s, tracker, vv) = chosen;
                    step = s;
                    hb = tracker;
                    v = vv;
                    a_cum = schedule.advance_with_gamma(step.gamma)?.cumulative;
                }
                FwRule::Short => unreachable!("rejected above"),
            }
            lb_native = match family {
                Family::HeavyBall => hb.bound_at(&v)?,
                Family::Generalized(GeneralizedVariant::Cumulative) => {
                    hb.bound_at(&v)? + psi_of(inst, &v)
                }
                _ => {
                    let corr = psi_star.map_or(psi_of(inst, &v), |ps| psi_of(inst, &v) - ps);
                    hb.bound_at(&v)? + corr / a_cum
                }
            };
            row.lb_hb = Some(lb_native);
            if matches!(family, Family::Generalized(GeneralizedVariant::DecreasingReg))
                && opts.report_hb
            {
                let (_, lb) = hb.hb_lower_bound(set).map_err(|e| e.at_iter(t))?;
                counts.reporting_lmo += 1;
                row.lb_hb = Some(lb);
            }
            oracle_input = hb.gbar().to_vec();
        }

        obs.observe(&IterateView {
            t,
            x: &x,
            v: &v,
            oracle_input: &oracle_input,
            gamma_or_a: step.gamma,
        });

        linalg::mix_into(&mut x, &v, step.gamma);
        fx = f.value(&x);
        counts.fval += 1;
        check_value(fx, t)?;
        let primal_next = if family.composite() {
            composite_value(inst, fx, &x)
        } else {
            fx
        };

        row.lb_native = lb_native;
        row.gap_aligned = primal - lb_native;
        row.gap_ahead = Some(primal_next - lb_native);
        row.gap_hb = row.lb_hb.map(|lb| primal - lb);
        row.gamma_or_a = step.gamma;
        row.model_value = step.model_value();
        row.model_short = step.model_short;
        row.flags = step.flags;
        row.lmo_calls = counts.lmo;
        row.grad_calls = counts.grad;
        row.fval_calls = counts.fval;
        row.reporting_lmo = counts.reporting_lmo;
        row.wall_time_s = clock.secs();
        g_prev = primal_next - lb_native;
        let stop = opts.should_stop(row.gap_aligned);
        trace.records.push(row);
        if stop {
            trace.stopped_early = true;
            break;
        }
    }
    Ok(RunOutput { trace, x, counts })
}

fn hb_vertex(
    inst: &ProblemInstance,
    family: Family,
    gbar: &[f64],
    cumulative: f64,
) -> Result<Vec<f64>> {
    match family {
        Family::HeavyBall => inst.set().lmo(gbar),
        Family::Generalized(GeneralizedVariant::Cumulative) => inst.regularizer.min_oracle(gbar),
        // argmin Σ a_i⟨∇f(x_i), v⟩ + ψ(v) = argmin ⟨gbar, v⟩ + ψ(v)/A_t
        _ => inst.regularizer.min_oracle_scaled(gbar, 1.0 / cumulative),
    }
}
