//! Acceptance criteria 1–9. Each test prints one PASS/FAIL line; run with
//! `cargo test -p pdfw-core --test acceptance -- --nocapture --test-threads=1` to see them in order.

use pdfw::algorithms::{run_optimistic_fw_observed, IterateView, OptimisticOptions, OptimisticVariant, RunOptions};
use pdfw::harness::{
    build_instance, check_identities, check_lmo_enumeration, check_lower_bounds,
    check_regret_games, compare, run_config, Algo, ExperimentConfig, ObjSpec, SetSpec, StepSpec,
};
use pdfw::linalg;
use pdfw::model::{make_distance_objective, make_quadratic_objective, Objective};
use pdfw::online::SubgradientPolicy;
use pdfw::steps::{gd_pd_line_search, pd_line_search_fw, FwSegmentModel, GdRayModel, SEARCH_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, failures: &[String], summary: &str) {
    if failures.is_empty() {
        println!("criterion {n}: PASS ({summary})");
    } else {
        println!(
            "criterion {n}: FAIL ({} violations; first: {})",
            failures.len(),
            failures[0]
        );
    }
    assert!(failures.is_empty(), "criterion {n}: {}", failures[0]);
}

fn simplex_dist(algo: Algo, step: StepSpec, iters: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        algo,
        step,
        set: SetSpec::Simplex,
        dim: 1000,
        obj: ObjSpec::Dist,
        iters,
        seed,
        ..Default::default()
    }
}

// L = 2 and D² = 2 for ‖x − x0‖² on the simplex.
const L: f64 = 2.0;
const D2: f64 = 2.0;

#[test]
fn criterion_1_fw_and_hb_rate() {
    let mut failures = Vec::new();
    for algo in [Algo::Fw, Algo::HbFw] {
        let cfg = simplex_dist(algo, StepSpec::FwClassic, 5000, 0);
        let (_, out) = run_config(&cfg).unwrap();
        assert_eq!(out.trace.records.len(), 5000);
        for r in &out.trace.records {
            let g = r.gap_ahead.unwrap();
            let bound = 2.0 * L * D2 / (r.iter as f64 + 2.0);
            if g > bound * (1.0 + 1e-9) {
                failures.push(format!("{} t={}: G={g} > {bound}", cfg.label(), r.iter));
            }
        }
    }
    report(1, &failures, "FW and HB-FW, G_t ≤ 2LD²/(t+2) for t < 5000");
}

#[test]
fn criterion_2_pd_short_step() {
    let mut failures = Vec::new();
    for algo in [Algo::Fw, Algo::HbFw] {
        let cfg = simplex_dist(algo, StepSpec::PdShort, 5000, 0);
        let (_, out) = run_config(&cfg).unwrap();
        let mut prev: Option<f64> = None;
        for r in &out.trace.records {
            let g = r.gap_ahead.unwrap();
            let bound = 4.0 * L * D2 / (r.iter as f64 + 2.0);
            if g > bound * (1.0 + 1e-9) {
                failures.push(format!("{} t={}: G={g} > {bound}", cfg.label(), r.iter));
            }
            if let Some(p) = prev {
                let c = (1.0 - r.gamma_or_a / 2.0) * p + 1e-9;
                if g > c {
                    failures.push(format!("{} t={}: G={g} > (1−γ/2)G_prev = {c}", cfg.label(), r.iter));
                }
            }
            prev = Some(g);
        }
        let line = ExperimentConfig {
            step: StepSpec::PdLine,
            ..cfg
        };
        let (_, out) = run_config(&line).unwrap();
        for r in &out.trace.records {
            // At t = 0 there is no previous gap and both models are +∞.
            let (Some(m), Some(s)) = (r.model_value, r.model_short) else {
                if r.iter != 0 {
                    failures.push(format!("{} t={}: missing model value", line.label(), r.iter));
                }
                continue;
            };
            if m > s + 1e-12 * (1.0 + s.abs()) {
                failures.push(format!("{} t={}: line model {m} > pd-short model {s}", line.label(), r.iter));
            }
        }
    }
    report(2, &failures, "4LD²/(t+2), per-step contraction, line-search dominance");
}

#[test]
fn criterion_3_optimistic_rate_and_identity() {
    let mut failures = Vec::new();
    let cfg = simplex_dist(Algo::OfwFtrl, StepSpec::Auto, 5000, 0);
    let g = build_instance(&cfg).unwrap();
    let fstar = g.instance.reference_value().unwrap();
    let opts = RunOptions::with_iters(5000);
    let mut logs: Vec<Vec<Vec<f64>>> = Vec::new();
    for variant in [
        OptimisticVariant::Oftrl,
        OptimisticVariant::Omd(SubgradientPolicy::Recursive),
    ] {
        let mut log = Vec::new();
        let mut obs = |v: &IterateView<'_>| log.push(v.oracle_input.to_vec());
        let out = run_optimistic_fw_observed(&g.instance, &OptimisticOptions::new(variant), &opts, &mut obs)
            .unwrap();
        for r in &out.trace.records {
            let bound = 4.0 * L * D2 / (r.iter as f64 + 1.0);
            let pg = r.primal - fstar;
            if pg > bound {
                failures.push(format!("{variant:?} t={}: primal gap {pg} > {bound}", r.iter));
            }
        }
        logs.push(log);
    }
    if logs[0] != logs[1] {
        let first = logs[0].iter().zip(&logs[1]).position(|(a, b)| a != b);
        failures.push(format!("OFTRL and OMD LMO inputs differ at row {first:?}"));
    }
    report(3, &failures, "primal gap ≤ 4LD²/(t+1), OFTRL ≡ OMD LMO inputs over 5000 rows");
}

#[test]
fn criterion_4_gd_primal_dual_steps() {
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let cond = 10f64.powf(3.0 * i as f64 / 19.0);
        for step in [StepSpec::PdShort, StepSpec::PdLine] {
            let cfg = ExperimentConfig {
                algo: Algo::GdPd,
                set: SetSpec::Unconstrained,
                obj: ObjSpec::Quad,
                dim: 50,
                cond,
                step,
                iters: 500,
                seed: i,
                ..Default::default()
            };
            let (g, out) = run_config(&cfg).unwrap();
            let l = g.instance.smoothness();
            let d: f64 = out
                .trace
                .notes
                .iter()
                .find(|(k, _)| k == "d_bound")
                .map(|(_, v)| v.parse().unwrap())
                .unwrap();
            let exact = linalg::norm(g.instance.reference_point().unwrap());
            assert!((d - exact).abs() <= 1e-12 * exact);
            for r in &out.trace.records {
                if r.flags.contains(pdfw::trace::Flags::STATIONARY) {
                    continue;
                }
                if r.gamma_or_a < 0.5 / l - 1e-12 {
                    failures.push(format!("seed {i} {step:?} t={}: a = {} < 1/(2L)", r.iter, r.gamma_or_a));
                }
                let bound = l * d * d / r.iter as f64;
                let gap = r.gap_ahead.unwrap();
                if gap > bound * (1.0 + 1e-9) {
                    failures.push(format!("seed {i} {step:?} t={}: G = {gap} > LD²/t = {bound}", r.iter));
                }
            }
        }
    }
    report(4, &failures, "20 quadratics, n = 50, a_t ≥ 1/(2L) and G_t ≤ LD²/t");
}

#[test]
fn criterion_5_lower_bound_validity() {
    // Reference instances: simplex (indicator and linear ψ), k-sparse n ≤ 12, unconstrained;
    // every algorithm and step rule; every iteration of runs up to T = 400.
    let mut failures = Vec::new();
    let mut cases = 0;
    for iters in [1, 2, 3, 10, 400] {
        let r = check_lower_bounds(4, iters);
        if !r.passed {
            failures.push(r.detail.clone());
        }
        cases += r.detail.split_whitespace().next().and_then(|s| s.parse::<usize>().ok()).unwrap_or(0);
    }
    report(5, &failures, &format!("{cases} runs, every bound and gap of every row"));
}

#[test]
fn criterion_6_regret_bounds() {
    let r = check_regret_games(200, 2024);
    let failures: Vec<String> = if r.passed { vec![] } else { vec![r.detail.clone()] };
    report(6, &failures, &format!("200 games × (OFTRL, OMD, OMD zero-subgradient): {}", r.detail));
}

/// Argmin of `h` on a uniform grid of spacing `step` over `[lo, hi]` (first minimizer).
fn grid_argmin(h: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let (mut best, mut bv) = (lo, h(lo));
    for i in 1..=n {
        let x = lo + i as f64 * step;
        let v = h(x);
        if v < bv {
            best = x;
            bv = v;
        }
    }
    best
}

#[test]
fn criterion_7_oracle_equivalence() {
    let mut failures = Vec::new();
    let lmo = check_lmo_enumeration(10, 1000, 7);
    if !lmo.passed {
        failures.push(lmo.detail.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..6 {
        let n = 4;
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let f = make_distance_objective(center).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let grad = f.gradient(&x);
        let m = FwSegmentModel {
            objective: &f,
            x: &x,
            v: &v,
            fx: f.value(&x),
            inner: linalg::dot(&grad, &linalg::sub(&v, &x)),
            g_prev: rng.random_range(0.0..2.0),
        };
        let (d, _) = pd_line_search_fw(&m, SEARCH_TOL).unwrap();
        let grid = grid_argmin(|g| m.eval(g).unwrap(), 0.0, 1.0, 1e-7);
        if (d.value - grid).abs() > 1e-5 {
            failures.push(format!("fw case {case}: search {} vs grid {grid}", d.value));
        }

        let q = pdfw::linalg::Matrix::diag(&[1.0, 2.0, 0.5, 1.5]);
        let fq = make_quadratic_objective(q, vec![0.3, -0.2, 1.0, 0.0], 0.0).unwrap();
        let l = fq.smoothness();
        let gq = fq.gradient(&x);
        let a_prev = rng.random_range(0.0..3.0);
        let gm = GdRayModel {
            objective: &fq,
            x: &x,
            grad: &gq,
            fx: fq.value(&x),
            g_script: rng.random_range(0.0..2.0),
            a_prev,
            grad_norm_sq: linalg::norm_sq(&gq),
        };
        let (d, _) = gd_pd_line_search(&gm, l, None, SEARCH_TOL).unwrap();
        let grid = grid_argmin(|a| gm.eval(a).unwrap(), 0.5 / l, 4.0 / l, 1e-7);
        if (d.value - grid).abs() > 1e-5 {
            failures.push(format!("gd case {case}: search {} vs grid {grid}", d.value));
        }
    }
    let ident = check_identities(200, 500, 3).unwrap();
    if !ident.passed {
        failures.push(ident.detail.clone());
    }
    report(
        7,
        &failures,
        &format!("LMO enumeration {}; 12 pd searches vs 1e-7 grids; generalized FW bit-identical", lmo.detail),
    );
}

#[test]
fn criterion_8_qualitative_reproduction() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let settings: [(&str, fn(Algo, u64) -> ExperimentConfig); 2] = [
        ("simplex dist", |algo, seed| simplex_dist(algo, StepSpec::Auto, 2000, seed)),
        ("ksparse lsq", |algo, seed| ExperimentConfig {
            algo,
            set: SetSpec::KSparse,
            dim: 100,
            k: 10,
            obj: ObjSpec::Lsq,
            iters: 2000,
            seed,
            ..Default::default()
        }),
    ];
    for (name, make) in settings {
        let mut wins = 0;
        for seed in 0..5 {
            let cfgs: Vec<_> = [Algo::Fw, Algo::HbFw, Algo::OfwFtrl]
                .into_iter()
                .map(|a| make(a, seed))
                .collect();
            let cmp = compare(&cfgs).unwrap();
            let (fw, hb, op) = (&cmp.rows[0], &cmp.rows[1], &cmp.rows[2]);
            if op.final_gap < fw.final_gap && op.final_gap < hb.final_gap {
                wins += 1;
            }
            let (so, sf) = (op.slope.unwrap(), fw.slope.unwrap());
            if so > sf {
                failures.push(format!("{name} seed {seed}: optimistic slope {so} > FW slope {sf}"));
            }
            // HB-reported gap of vanilla FW against its running-best FW gap.
            let last = fw.output.trace.last().unwrap();
            let (hbg, best) = (last.gap_hb.unwrap(), last.gap_fw_best.unwrap());
            if name == "simplex dist" && hbg < best {
                failures.push(format!("{name} seed {seed}: FW HB gap {hbg} < running-best FW gap {best}"));
            }
        }
        notes.push(format!("{name}: optimistic best in {wins}/5"));
        if wins < 4 {
            failures.push(format!("{name}: optimistic gap smallest in only {wins} of 5 seeds"));
        }
    }
    // Short step against primal-dual short step, same instance, final reported gaps.
    for seed in 0..5 {
        let cfgs = [
            simplex_dist(Algo::Fw, StepSpec::Short, 2000, seed),
            simplex_dist(Algo::Fw, StepSpec::PdShort, 2000, seed),
        ];
        let cmp = compare(&cfgs).unwrap();
        let (s, p) = (cmp.rows[0].final_gap, cmp.rows[1].final_gap);
        let ratio = s.max(p) / s.min(p);
        if ratio > 2.0 {
            let ls = cmp.rows[0].output.trace.last().unwrap();
            let lp = cmp.rows[1].output.trace.last().unwrap();
            failures.push(format!(
                "seed {seed}: short vs pd-short final HB gap {s:.3e} vs {p:.3e} (ratio {ratio:.1}); \
                 native gaps {:.3e} vs {:.3e}; running-best FW gaps {:.3e} vs {:.3e}",
                ls.gap_aligned,
                lp.gap_aligned,
                ls.gap_fw_best.unwrap(),
                lp.gap_fw_best.unwrap()
            ));
        }
    }
    report(8, &failures, &notes.join("; "));
}

#[test]
fn criterion_9_model_convexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let n = 6;
    for sample in 0..1000 {
        // Random quadratic with random iterate data.
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..5.0)).collect();
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = make_quadratic_objective(pdfw::linalg::Matrix::diag(&diag), center, 0.0).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grad = f.gradient(&x);
        let fx = f.value(&x);
        let fw = FwSegmentModel {
            objective: &f,
            x: &x,
            v: &v,
            fx,
            inner: linalg::dot(&grad, &linalg::sub(&v, &x)),
            g_prev: rng.random_range(0.0..10.0),
        };
        let gd = GdRayModel {
            objective: &f,
            x: &x,
            grad: &grad,
            fx,
            g_script: rng.random_range(0.0..10.0),
            a_prev: rng.random_range(0.0..5.0),
            grad_norm_sq: linalg::norm_sq(&grad),
        };
        let a_max = 4.0 / f.smoothness();
        const K: usize = 40;
        let models: [(&str, Box<dyn Fn(f64) -> f64>, f64, f64); 2] = [
            ("fw", Box::new(|g| fw.eval(g).unwrap()), 0.0, 1.0),
            // a > 0 keeps S = A + a positive when A = 0.
            ("gd", Box::new(|a| gd.eval(a).unwrap()), 1e-3 * a_max, a_max),
        ];
        for (name, h, lo, hi) in &models {
            let pts: Vec<f64> = (0..=K).map(|i| lo + (hi - lo) * i as f64 / K as f64).collect();
            let vals: Vec<f64> = pts.iter().map(|&p| h(p)).collect();
            for i in 0..=K {
                for j in (i + 2..=K).step_by(2) {
                    let mid = vals[(i + j) / 2];
                    let chord = 0.5 * (vals[i] + vals[j]);
                    let tol = 1e-10 * (1.0 + vals[i].abs().max(vals[j].abs()));
                    if mid > chord + tol {
                        failures.push(format!(
                            "{name} sample {sample}: h(({}+{})/2) = {mid} > {chord}",
                            pts[i], pts[j]
                        ));
                    }
                }
            }
        }
    }
    report(9, &failures, "midpoint convexity of the FW and GD step models on 1000 samples");
}
