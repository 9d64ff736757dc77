//! Invariant checks run by `pdfw verify` and reused by the acceptance tests.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{build_instance, run_on, Algo, ExperimentConfig, ObjSpec, PsiSpec, SetSpec, StepSpec};
use crate::algorithms::{
    run_fw_observed, run_generalized_fw_observed, run_hb_fw_observed,
    run_optimistic_fw_observed, FwRule, GeneralizedVariant, IterateView, OptimisticOptions,
    OptimisticVariant, RunOptions, YHook,
};
use crate::error::Result;
use crate::linalg;
use crate::model::{reference_slack, verify_objective, FeasibleSet, ProblemInstance, Regularizer};
use crate::online::{
    realized_regret, regret_terms, Oftrl, Omd, OptimisticLearner, Round, SubgradientPolicy,
};
use crate::oracles::{Indicator, KSparseSet, SimplexSet};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, failures: &[String], cases: usize) -> Self {
        Self {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail: match failures.first() {
                None => format!("{cases} cases"),
                Some(f) => format!("{} of {cases} cases failed; first: {f}", failures.len()),
            },
        }
    }
}

/// Every LMO agrees with a scan of the vertex list (first minimizer wins), on random and
/// tie-heavy integer directions.
pub fn check_lmo_enumeration(max_dim: usize, directions: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 1..=max_dim {
        let mut sets: Vec<Box<dyn FeasibleSet>> = vec![Box::new(SimplexSet::new(n).unwrap())];
        for k in 1..=n {
            sets.push(Box::new(KSparseSet::new(n, k).unwrap()));
        }
        for set in &sets {
            let verts = set.vertices().expect("small sets list their vertices");
            for d in 0..directions {
                let w: Vec<f64> = if d % 2 == 0 {
                    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
                } else {
                    (0..n).map(|_| rng.random_range(-2..=2) as f64).collect()
                };
                let mut best = &verts[0];
                let mut best_val = linalg::dot(&w, best);
                for v in &verts[1..] {
                    let val = linalg::dot(&w, v);
                    if val < best_val {
                        best = v;
                        best_val = val;
                    }
                }
                cases += 1;
                match set.lmo(&w) {
                    Ok(v) if &v == best => {}
                    Ok(v) => failures.push(format!("{} w={w:?}: {v:?} vs {best:?}", set.describe())),
                    Err(e) => failures.push(format!("{}: {e}", set.describe())),
                }
            }
        }
    }
    CheckResult::new("lmo_vs_enumeration", &failures, cases)
}

fn simplex_reg(n: usize) -> Arc<dyn Regularizer> {
    Arc::new(Indicator::new(Arc::new(SimplexSet::new(n).unwrap())))
}

/// Random weighted linear games on simplices: realized regret against every vertex stays
/// below the computed bound for OFTRL and both OMD policies.
pub fn check_regret_games(games: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0;
    for game in 0..games {
        let n = rng.random_range(1..=10usize);
        let t_max = rng.random_range(1..=50usize);
        let weights: Vec<f64> = (0..t_max)
            .map(|_| 0.05 + rng.sample::<f64, _>(Exp1))
            .collect();
        let losses: Vec<Vec<f64>> = (0..t_max)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        // Hints are perturbed previous losses, as in optimistic FW.
        let hints: Vec<Vec<f64>> = (0..t_max)
            .map(|t| {
                let base = if t == 0 { vec![0.0; n] } else { losses[t - 1].clone() };
                base.iter().map(|b| b + 0.3 * rng.random_range(-1.0..1.0)).collect()
            })
            .collect();
        let learners: Vec<(&str, Box<dyn OptimisticLearner>)> = vec![
            ("oftrl", Box::new(Oftrl::new(simplex_reg(n)))),
            ("omd", Box::new(Omd::new(simplex_reg(n), SubgradientPolicy::Recursive))),
            ("omd_zero", Box::new(Omd::new(simplex_reg(n), SubgradientPolicy::Zero))),
        ];
        for (name, mut learner) in learners {
            let mut history = Vec::with_capacity(t_max);
            let mut ok = true;
            for t in 0..t_max {
                let hint = linalg::scale(&hints[t], weights[t]);
                let loss = linalg::scale(&losses[t], weights[t]);
                let point = match learner.step(&hint) {
                    Ok(p) => p,
                    Err(e) => {
                        failures.push(format!("game {game} {name}: {e}"));
                        ok = false;
                        break;
                    }
                };
                if let Err(e) = learner.observe(&loss) {
                    failures.push(format!("game {game} {name}: {e}"));
                    ok = false;
                    break;
                }
                history.push(Round { loss, hint, point });
            }
            if !ok {
                continue;
            }
            for i in 0..n {
                let mut u = vec![0.0; n];
                u[i] = 1.0;
                cases += 1;
                let bound = match regret_terms(&history, &u) {
                    Ok((b, _)) => b,
                    Err(e) => {
                        failures.push(format!("game {game} {name}: {e}"));
                        continue;
                    }
                };
                let regret = realized_regret(&history, &u);
                if regret > bound + 1e-9 {
                    failures.push(format!(
                        "game {game} {name} (n={n}, T={t_max}) vertex {i}: regret {regret} > bound {bound}"
                    ));
                }
            }
        }
    }
    CheckResult::new("regret_bounds", &failures, cases)
}

/// The value every lower bound of a run must stay below.
fn bound_target(cfg: &ExperimentConfig, inst: &ProblemInstance) -> Option<f64> {
    match cfg.algo {
        // That variant certifies `f` alone against any comparator, here the reference point.
        Algo::GenFw(GeneralizedVariant::DecreasingReg) => {
            inst.reference_point().map(|p| inst.objective.value(p))
        }
        _ => inst.reference_value(),
    }
}

/// Runs a config and checks every emitted lower bound and gap against the reference optimum.
/// Returns one message per violated row.
pub fn lower_bound_violations(cfg: &ExperimentConfig) -> Result<Vec<String>> {
    let inst = build_instance(cfg)?;
    let Some(fstar) = bound_target(cfg, &inst.instance) else {
        return Ok(Vec::new());
    };
    let out = run_on(cfg, &inst)?;
    let tol = reference_slack(fstar);
    let mut bad = Vec::new();
    for r in &out.trace.records {
        for (name, lb) in r.lower_bounds() {
            if lb > fstar + tol {
                bad.push(format!(
                    "{} seed {} t={}: {name} = {lb} > f* = {fstar}",
                    cfg.label(),
                    cfg.seed,
                    r.iter
                ));
            }
        }
        let mut gaps = vec![("gap_aligned", r.gap_aligned, r.primal)];
        if let (Some(g), Some(lb)) = (r.gap_hb, r.lb_hb) {
            gaps.push(("gap_hb", g, g + lb));
        }
        for (name, gap, primal) in gaps {
            if gap < primal - fstar - tol {
                bad.push(format!(
                    "{} seed {} t={}: {name} = {gap} below primal gap {}",
                    cfg.label(),
                    cfg.seed,
                    r.iter,
                    primal - fstar
                ));
            }
        }
    }
    Ok(bad)
}

/// Every algorithm and step rule that applies to an instance with this set and objective.
pub fn algorithm_grid(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let with = |algo: Algo, step: StepSpec| ExperimentConfig {
        algo,
        step,
        ..base.clone()
    };
    if base.set == SetSpec::Unconstrained {
        for step in [StepSpec::PdShort, StepSpec::PdLine, StepSpec::Fixed] {
            out.push(with(Algo::GdPd, step));
        }
        return out;
    }
    for v in [
        GeneralizedVariant::PerStep,
        GeneralizedVariant::Cumulative,
        GeneralizedVariant::DecreasingReg,
    ] {
        out.push(with(Algo::GenFw(v), StepSpec::Auto));
    }
    if base.psi != PsiSpec::Indicator {
        return out;
    }
    for step in [
        StepSpec::OpenLoop,
        StepSpec::FwClassic,
        StepSpec::Short,
        StepSpec::PdShort,
        StepSpec::PdLine,
    ] {
        out.push(with(Algo::Fw, step));
        if step != StepSpec::Short {
            out.push(with(Algo::HbFw, step));
        }
    }
    out.push(with(Algo::OfwFtrl, StepSpec::Auto));
    out.push(with(Algo::OfwOmd, StepSpec::Auto));
    let mut zero = with(Algo::OfwOmd, StepSpec::Auto);
    zero.subgradient = SubgradientPolicy::Zero;
    out.push(zero);
    let mut seg = with(Algo::OfwFtrl, StepSpec::Auto);
    seg.y_hook = YHook::SegmentSearch;
    out.push(seg);
    out
}

/// Small reference instances: every set, both regularizers, several seeds.
pub fn reference_configs(seeds: u64, iters: usize) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for seed in 0..seeds {
        let base = ExperimentConfig {
            iters,
            seed,
            ..Default::default()
        };
        let bases = [
            ExperimentConfig {
                set: SetSpec::Simplex,
                dim: 8,
                ..base.clone()
            },
            ExperimentConfig {
                set: SetSpec::Simplex,
                dim: 6,
                psi: PsiSpec::Linear,
                ..base.clone()
            },
            ExperimentConfig {
                set: SetSpec::KSparse,
                dim: 7,
                k: 3,
                ..base.clone()
            },
            ExperimentConfig {
                set: SetSpec::Unconstrained,
                dim: 10,
                obj: ObjSpec::Quad,
                cond: 50.0,
                ..base.clone()
            },
            ExperimentConfig {
                set: SetSpec::Unconstrained,
                dim: 5,
                ..base.clone()
            },
        ];
        for b in bases {
            out.extend(algorithm_grid(&b));
        }
    }
    out
}

pub fn check_lower_bounds(seeds: u64, iters: usize) -> CheckResult {
    let mut failures = Vec::new();
    let configs = reference_configs(seeds, iters);
    for cfg in &configs {
        match lower_bound_violations(cfg) {
            Ok(v) => failures.extend(v),
            Err(e) => failures.push(format!("{} seed {}: {e}", cfg.label(), cfg.seed)),
        }
    }
    CheckResult::new("lower_bound_validity", &failures, configs.len())
}

type InputLog = Vec<Vec<f64>>;

fn logging(log: &mut InputLog) -> impl FnMut(&IterateView<'_>) + '_ {
    move |v: &IterateView<'_>| log.push(v.oracle_input.to_vec())
}

/// Generalized FW with the indicator reproduces vanilla FW (per-step) and HB-FW (cumulative)
/// bit for bit, and OFTRL and recursive OMD feed identical LMO inputs.
pub fn check_identities(dim: usize, iters: usize, seed: u64) -> Result<CheckResult> {
    let cfg = ExperimentConfig {
        dim,
        seed,
        ..Default::default()
    };
    let inst = build_instance(&cfg)?.instance;
    let opts = RunOptions::with_iters(iters);
    let rule = FwRule::Schedule(crate::model::ScheduleKind::FwClassic);
    let mut failures = Vec::new();

    let pairs: [(&str, Box<dyn Fn(&mut InputLog) -> Result<_>>, Box<dyn Fn(&mut InputLog) -> Result<_>>); 2] = [
        (
            "per_step vs fw",
            Box::new(|l: &mut InputLog| {
                run_generalized_fw_observed(&inst, GeneralizedVariant::PerStep, &opts, &mut logging(l))
            }),
            Box::new(|l: &mut InputLog| run_fw_observed(&inst, rule, &opts, &mut logging(l))),
        ),
        (
            "cumulative vs hbfw",
            Box::new(|l: &mut InputLog| {
                run_generalized_fw_observed(
                    &inst,
                    GeneralizedVariant::Cumulative,
                    &opts,
                    &mut logging(l),
                )
            }),
            Box::new(|l: &mut InputLog| run_hb_fw_observed(&inst, rule, &opts, &mut logging(l))),
        ),
    ];
    for (name, a, b) in pairs {
        let (mut la, mut lb) = (Vec::new(), Vec::new());
        let ra = a(&mut la)?;
        let rb = b(&mut lb)?;
        let pa: Vec<u64> = ra.trace.records.iter().map(|r| r.primal.to_bits()).collect();
        let pb: Vec<u64> = rb.trace.records.iter().map(|r| r.primal.to_bits()).collect();
        let ga: Vec<u64> = ra.trace.records.iter().map(|r| r.lb_native.to_bits()).collect();
        let gb: Vec<u64> = rb.trace.records.iter().map(|r| r.lb_native.to_bits()).collect();
        if la != lb || pa != pb || ga != gb || ra.x != rb.x {
            failures.push(format!("{name}: traces differ"));
        }
    }

    let (mut lf, mut lo) = (Vec::new(), Vec::new());
    let ftrl = run_optimistic_fw_observed(
        &inst,
        &OptimisticOptions::new(OptimisticVariant::Oftrl),
        &opts,
        &mut logging(&mut lf),
    )?;
    let omd = run_optimistic_fw_observed(
        &inst,
        &OptimisticOptions::new(OptimisticVariant::Omd(SubgradientPolicy::Recursive)),
        &opts,
        &mut logging(&mut lo),
    )?;
    if lf != lo || ftrl.x != omd.x {
        let first = lf.iter().zip(&lo).position(|(a, b)| a != b);
        failures.push(format!("oftrl vs omd: LMO inputs differ first at row {first:?}"));
    }
    Ok(CheckResult::new("bit_identities", &failures, 3))
}

/// The objective sandwich of a generated instance.
pub fn check_objective(cfg: &ExperimentConfig, samples: usize) -> Result<CheckResult> {
    let inst = build_instance(cfg)?.instance;
    let rep = verify_objective(inst.objective.as_ref(), inst.set(), samples, cfg.seed)?;
    let failures = if rep.flagged {
        vec![format!("{rep:?}")]
    } else {
        Vec::new()
    };
    Ok(CheckResult::new(
        &format!("objective_{}_{}", cfg.obj.name(), cfg.set.name()),
        &failures,
        samples,
    ))
}

/// The `verify` suite: oracle, regret, bound and identity checks at desk scale.
pub fn verify_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (set, obj) in [
        (SetSpec::Simplex, ObjSpec::Dist),
        (SetSpec::Simplex, ObjSpec::Lsq),
        (SetSpec::KSparse, ObjSpec::Lsq),
        (SetSpec::Simplex, ObjSpec::Quad),
    ] {
        let cfg = ExperimentConfig {
            set,
            obj,
            dim: 20,
            k: 4,
            seed,
            ..Default::default()
        };
        out.push(check_objective(&cfg, 200)?);
    }
    out.push(check_lmo_enumeration(8, 100, seed));
    out.push(check_regret_games(100, seed));
    out.push(check_lower_bounds(2, 200));
    out.push(check_identities(50, 200, seed)?);
    Ok(out)
}
