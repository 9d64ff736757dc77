//! Experiment harness: configs, seeded instances, trace files, slope fits, comparisons and
//! the verification suite behind the `pdfw` command line.

mod config;
mod instance;
mod io;
mod slope;
mod verify;

pub use config::{Algo, ExperimentConfig, ObjSpec, PsiSpec, SetSpec, StepSpec, INSTANCE_KEYS, KEYS};
pub use instance::{build_instance, dist_anchor, random_spd, GeneratedInstance};
pub use io::{read_column, read_meta, write_run, META_SUFFIX};
pub use slope::{loglog_slope, slope_of, Window, MIN_SLOPE_ROWS};
pub use verify::{
    algorithm_grid, check_identities, check_lmo_enumeration, check_lower_bounds, check_objective,
    check_regret_games, lower_bound_violations, reference_configs, verify_suite, CheckResult,
};

use crate::algorithms::{
    run_fw, run_gd_pd, run_generalized_fw, run_hb_fw, run_optimistic_fw, GdOptions, GdRule,
    OptimisticOptions, OptimisticVariant, RunOptions, RunOutput,
};
use crate::error::{Error, Result};

/// Library version recorded in trace metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs a config on a prebuilt instance.
pub fn run_on(cfg: &ExperimentConfig, inst: &GeneratedInstance) -> Result<RunOutput> {
    cfg.validate()?;
    let inst = &inst.instance;
    let opts = RunOptions {
        iters: cfg.iters,
        epsilon: cfg.epsilon,
        report_hb: cfg.report_hb_gap,
        ..RunOptions::default()
    };
    match cfg.algo {
        Algo::Fw => run_fw(inst, cfg.fw_rule()?, &opts),
        Algo::HbFw => run_hb_fw(inst, cfg.fw_rule()?, &opts),
        Algo::GenFw(v) => run_generalized_fw(inst, v, &opts),
        Algo::OfwFtrl | Algo::OfwOmd => {
            let variant = if cfg.algo == Algo::OfwFtrl {
                OptimisticVariant::Oftrl
            } else {
                OptimisticVariant::Omd(cfg.subgradient)
            };
            let o = OptimisticOptions {
                variant,
                y_hook: cfg.y_hook,
                extra_lmo_gap: cfg.extra_lmo_gap,
            };
            run_optimistic_fw(inst, &o, &opts)
        }
        Algo::GdPd => {
            let rule = match cfg.step {
                StepSpec::Auto | StepSpec::PdShort => GdRule::PdShort,
                StepSpec::PdLine => GdRule::PdLine,
                StepSpec::Fixed => GdRule::Fixed,
                _ => return Err(Error::config("step", "unsupported for gd_pd")),
            };
            run_gd_pd(
                inst,
                &GdOptions {
                    rule,
                    d_bound: cfg.d_bound,
                },
                &opts,
            )
        }
    }
}

/// Validates, builds the instance and runs.
pub fn run_config(cfg: &ExperimentConfig) -> Result<(GeneratedInstance, RunOutput)> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let out = run_on(cfg, &inst)?;
    Ok((inst, out))
}

/// One line of a comparison table.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub label: String,
    pub final_primal: f64,
    /// Last HB-reported gap, or the native gap when HB reporting is off.
    pub final_gap: f64,
    /// Log-log slope of the same gap column over the last decade, if it can be fitted.
    pub slope: Option<f64>,
    pub output: RunOutput,
}

/// Result of [`compare`].
#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub instance: String,
}

impl Comparison {
    fn best_by(&self, key: impl Fn(&CompareRow) -> Option<f64>) -> Option<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| key(r).map(|v| (i, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    pub fn best_primal(&self) -> Option<usize> {
        self.best_by(|r| Some(r.final_primal))
    }

    pub fn best_gap(&self) -> Option<usize> {
        self.best_by(|r| Some(r.final_gap))
    }

    /// Steepest (most negative) slope.
    pub fn best_slope(&self) -> Option<usize> {
        self.best_by(|r| r.slope)
    }

    /// Plain-text table; `*` marks the best entry of each column.
    pub fn table(&self) -> String {
        let (bp, bg, bs) = (self.best_primal(), self.best_gap(), self.best_slope());
        let mark = |b: Option<usize>, i: usize| if b == Some(i) { "*" } else { " " };
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(4).max(4);
        let mut s = format!(
            "{:<width$}  {:>24}  {:>24}  {:>10}\n",
            "algo", "final_primal", "final_gap_hb", "slope"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let slope = r.slope.map_or("n/a".to_string(), |v| format!("{v:.4}"));
            s.push_str(&format!(
                "{:<width$}  {:>23.15e}{}  {:>23.15e}{}  {:>9}{}\n",
                r.label,
                r.final_primal,
                mark(bp, i),
                r.final_gap,
                mark(bg, i),
                slope,
                mark(bs, i),
            ));
        }
        s
    }
}

fn gap_series(out: &RunOutput) -> Vec<(usize, f64)> {
    out.trace
        .records
        .iter()
        .map(|r| (r.iter, r.gap_hb.unwrap_or(r.gap_aligned)))
        .collect()
}

/// Runs several configs on one shared instance, in parallel.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Comparison> {
    if configs.len() < 2 {
        return Err(Error::config("configs", "compare needs at least two configs"));
    }
    for c in configs {
        c.validate()?;
    }
    for c in &configs[1..] {
        for key in INSTANCE_KEYS {
            if c.value_of(key) != configs[0].value_of(key) {
                return Err(Error::config(
                    key,
                    format!(
                        "configs disagree on the instance ({} vs {})",
                        configs[0].value_of(key),
                        c.value_of(key)
                    ),
                ));
            }
        }
    }
    let inst = build_instance(&configs[0])?;
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                let inst = &inst;
                s.spawn(move || run_on(c, inst))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::State("run panicked".into()))))
            .collect()
    });
    let mut rows = Vec::with_capacity(configs.len());
    for (c, out) in configs.iter().zip(outputs) {
        let output = out?;
        let last = output
            .trace
            .last()
            .ok_or_else(|| Error::State("empty trace".into()))?;
        let series = gap_series(&output);
        rows.push(CompareRow {
            label: c.label(),
            final_primal: last.primal,
            final_gap: last.gap_hb.unwrap_or(last.gap_aligned),
            slope: loglog_slope(&series, Window::LastDecade).ok(),
            output,
        });
    }
    Ok(Comparison {
        rows,
        instance: inst.description,
    })
}
