use pdfw::algorithms::{run_fw, FwRule, RunOptions};
use pdfw::harness::{
    algorithm_grid, build_instance, lower_bound_violations, run_config, Algo, ExperimentConfig,
    ObjSpec, PsiSpec, SetSpec, StepSpec,
};
use pdfw::model::ScheduleKind;
use proptest::prelude::*;

fn base(set: SetSpec, dim: usize, k: usize, psi: PsiSpec, seed: u64, iters: usize) -> ExperimentConfig {
    ExperimentConfig {
        set,
        dim,
        k: k.min(dim),
        psi,
        seed,
        iters,
        obj: if set == SetSpec::Unconstrained {
            ObjSpec::Quad
        } else {
            ObjSpec::Dist
        },
        cond: 30.0,
        ..Default::default()
    }
}

fn set_strategy() -> impl Strategy<Value = SetSpec> {
    prop_oneof![
        Just(SetSpec::Simplex),
        Just(SetSpec::KSparse),
        Just(SetSpec::Unconstrained)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_bound_is_below_the_optimum(
        set in set_strategy(),
        dim in 2usize..9,
        k in 1usize..5,
        linear in any::<bool>(),
        seed in 0u64..1000,
        iters in 1usize..120,
    ) {
        let psi = if linear && set != SetSpec::Unconstrained { PsiSpec::Linear } else { PsiSpec::Indicator };
        for cfg in algorithm_grid(&base(set, dim, k, psi, seed, iters)) {
            let bad = lower_bound_violations(&cfg).unwrap();
            prop_assert!(bad.is_empty(), "{}", bad[0]);
        }
    }

    #[test]
    fn config_text_round_trips(
        algo in prop_oneof![Just("fw"), Just("hbfw"), Just("ofw_omd"), Just("gen_fw_cumulative")],
        dim in 1usize..5000,
        cond in 1.0f64..1e6,
        a0 in 0.001f64..100.0,
        eps in 0.0f64..1.0,
        seed in any::<u64>(),
        m in proptest::option::of(1usize..500),
        d in proptest::option::of(0.01f64..1e3),
    ) {
        let mut c = ExperimentConfig::default();
        c.set_key("algo", algo).unwrap();
        c.dim = dim;
        c.cond = cond;
        c.a0 = a0;
        c.epsilon = eps;
        c.seed = seed;
        c.m = m;
        c.d_bound = d;
        prop_assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn mixed_bound_never_beats_running_best(seed in 0u64..500, dim in 2usize..30, iters in 1usize..200) {
        let g = build_instance(&base(SetSpec::Simplex, dim, 1, PsiSpec::Indicator, seed, iters)).unwrap();
        for rule in [FwRule::Schedule(ScheduleKind::FwClassic), FwRule::Short, FwRule::PdShort] {
            let out = run_fw(&g.instance, rule, &RunOptions::with_iters(iters)).unwrap();
            for r in &out.trace.records {
                let (mix, best) = (r.lb_fw_mix.unwrap(), r.lb_fw_best.unwrap());
                prop_assert!(mix <= best, "t={} mix {} best {}", r.iter, mix, best);
            }
        }
    }

    #[test]
    fn oracle_accounting(seed in 0u64..500, iters in 1usize..100) {
        for (algo, step) in [(Algo::Fw, StepSpec::OpenLoop), (Algo::HbFw, StepSpec::FwClassic), (Algo::OfwFtrl, StepSpec::Auto)] {
            let cfg = ExperimentConfig { algo, step, iters, seed, dim: 12, ..Default::default() };
            let (_, out) = run_config(&cfg).unwrap();
            let extra = usize::from(algo == Algo::OfwFtrl);
            prop_assert_eq!(out.counts.grad as usize, iters + extra);
            prop_assert_eq!(out.counts.lmo as usize, iters);
            prop_assert_eq!(out.trace.records.len(), iters);
            let r = out.trace.last().unwrap();
            prop_assert_eq!(r.lmo_calls, out.counts.lmo);
            prop_assert_eq!(r.reporting_lmo, out.counts.reporting_lmo);
        }
    }

    #[test]
    fn pd_short_gap_never_increases(seed in 0u64..500, dim in 2usize..40, iters in 2usize..300) {
        let cfg = ExperimentConfig { step: StepSpec::PdShort, dim, seed, iters, ..Default::default() };
        let (_, out) = run_config(&cfg).unwrap();
        let gaps: Vec<f64> = out.trace.records.iter().map(|r| r.gap_ahead.unwrap()).collect();
        for w in gaps.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{:?}", w);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for algo in ["fw", "hbfw", "ofw_ftrl", "gen_fw_decreasing_reg"] {
        let mut cfg = ExperimentConfig {
            dim: 30,
            iters: 50,
            seed: 11,
            psi: PsiSpec::Linear,
            ..Default::default()
        };
        cfg.set_key("algo", algo).unwrap();
        if cfg.algo != Algo::GenFw(pdfw::algorithms::GeneralizedVariant::DecreasingReg) {
            cfg.psi = PsiSpec::Indicator;
        }
        let (_, a) = run_config(&cfg).unwrap();
        let (_, b) = run_config(&cfg).unwrap();
        let strip = |o: &pdfw::algorithms::RunOutput| {
            o.trace
                .records
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.wall_time_s = 0.0;
                    r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b), "{algo}");
    }
}

#[test]
fn early_stop_honours_epsilon() {
    let cfg = ExperimentConfig {
        dim: 50,
        iters: 10_000,
        epsilon: 1e-2,
        ..Default::default()
    };
    let (_, out) = run_config(&cfg).unwrap();
    assert!(out.trace.stopped_early);
    let last = out.trace.last().unwrap();
    assert!(last.gap_aligned <= 1e-2);
    assert!(out
        .trace
        .records
        .iter()
        .rev()
        .skip(1)
        .all(|r| r.gap_aligned > 1e-2));
}

#[test]
fn mixed_bound_matches_full_recomputation() {
    use pdfw::algorithms::{run_fw_observed, IterateView};
    use pdfw::linalg;
    let g = build_instance(&ExperimentConfig {
        dim: 50,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let f = g.instance.objective.clone();
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut obs = |v: &IterateView<'_>| {
        let inner = linalg::dot(v.oracle_input, &linalg::sub(v.v, v.x));
        rows.push((f.value(v.x), inner));
    };
    let iters = 10_000;
    let out = run_fw_observed(
        &g.instance,
        FwRule::Schedule(ScheduleKind::FwClassic),
        &RunOptions::with_iters(iters),
        &mut obs,
    )
    .unwrap();
    // L_t = Σ a_i (f(x_i) + ⟨∇f(x_i), v_i − x_i⟩) / A_t with a_i = 2i + 2.
    let (mut s, mut a_sum) = (0.0, 0.0);
    for (t, ((fx, inner), r)) in rows.iter().zip(&out.trace.records).enumerate() {
        let a = 2.0 * t as f64 + 2.0;
        s += a * (fx + inner);
        a_sum += a;
        let lb = s / a_sum;
        let got = r.lb_fw_mix.unwrap();
        assert!((got - lb).abs() <= 1e-9 * lb.abs().max(1.0), "t={t}: {got} vs {lb}");
    }
}
