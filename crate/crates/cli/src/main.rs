use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdfw::harness::{
    self, check_objective, compare, lower_bound_violations, run_config, slope_of, verify_suite,
    write_run, ExperimentConfig, Window,
};
use pdfw::Error;

#[derive(Parser)]
#[command(name = "pdfw", version, about = "Frank-Wolfe benchmarks with primal-dual gap certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its trace CSV plus a `.meta` sidecar.
    Run(RunArgs),
    /// Fit the log-log slope of a trace column.
    Slope(SlopeArgs),
    /// Run several configs on the same instance and tabulate the results.
    Compare(CompareArgs),
    /// Run the invariant checks.
    Verify(VerifyArgs),
}

/// One flag per config key; flags override values read from `--config`.
#[derive(Args, Default)]
struct ConfigFlags {
    /// Plain-text `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    obj: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    cond: Option<String>,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    a0: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    report_hb_gap: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    y_hook: Option<String>,
    #[arg(long)]
    subgradient: Option<String>,
    #[arg(long)]
    extra_lmo_gap: Option<String>,
    #[arg(long)]
    d_bound: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("algo", &self.algo),
            ("set", &self.set),
            ("dim", &self.dim),
            ("k", &self.k),
            ("obj", &self.obj),
            ("m", &self.m),
            ("cond", &self.cond),
            ("psi", &self.psi),
            ("step", &self.step),
            ("ell", &self.ell),
            ("a0", &self.a0),
            ("iters", &self.iters),
            ("seed", &self.seed),
            ("report_hb_gap", &self.report_hb_gap),
            ("epsilon", &self.epsilon),
            ("y_hook", &self.y_hook),
            ("subgradient", &self.subgradient),
            ("extra_lmo_gap", &self.extra_lmo_gap),
            ("d_bound", &self.d_bound),
        ]
    }

    fn build(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => read_config(p)?,
            None => ExperimentConfig::default(),
        };
        for (key, v) in self.pairs() {
            if let Some(v) = v {
                cfg.set_key(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_config(p: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(p)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", p.display())))?;
    ExperimentConfig::parse(&text)
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Output CSV; defaults to `<label>_seed<seed>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one row per this many iterations (with the gap extrema of each group).
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args)]
struct SlopeArgs {
    /// Trace CSV.
    trace: PathBuf,
    /// Column to fit.
    #[arg(long, default_value = "gap_aligned")]
    column: String,
    /// Fit iterations `t0..=t1` instead of the last decade.
    #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
    range: Option<Vec<usize>>,
}

#[derive(Args)]
struct CompareArgs {
    /// Config files; all must describe the same instance.
    #[arg(required = true, num_args = 2..)]
    configs: Vec<PathBuf>,
    /// `key=value` overrides applied to every config.
    #[arg(long = "with", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write each run's trace into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also check this config's objective and, when its optimum is known, its bounds.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_run(a: &RunArgs) -> Result<(), Error> {
    let cfg = a.cfg.build()?;
    let (inst, out) = run_config(&cfg)?;
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_seed{}.csv", cfg.label(), cfg.seed)));
    let meta = write_run(&path, &cfg, &inst, &out, a.stride)?;
    if let Some(r) = out.trace.last() {
        println!(
            "{}: {} iterations, primal {}, gap {}{}",
            cfg.label(),
            r.iter,
            r.primal,
            r.gap_aligned,
            r.gap_hb.map_or(String::new(), |g| format!(", hb gap {g}"))
        );
    }
    println!("wrote {} and {}", path.display(), meta.display());
    Ok(())
}

fn cmd_slope(a: &SlopeArgs) -> Result<(), Error> {
    let window = match a.range.as_deref() {
        Some([t0, t1]) => Window::Range(*t0, *t1),
        _ => Window::LastDecade,
    };
    println!("{}", slope_of(&a.trace, &a.column, window)?);
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Error> {
    let mut configs = Vec::new();
    for p in &a.configs {
        let mut c = read_config(p)?;
        for o in &a.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(o.as_str(), "expected KEY=VALUE"))?;
            c.set_key(k.trim(), v)?;
        }
        configs.push(c);
    }
    let cmp = compare(&configs)?;
    println!("instance: {}", cmp.instance);
    print!("{}", cmp.table());
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        let inst = harness::build_instance(&configs[0])?;
        for (i, (c, row)) in configs.iter().zip(&cmp.rows).enumerate() {
            let path = dir.join(format!("{i:02}_{}.csv", c.label()));
            write_run(&path, c, &inst, &row.output, 1)?;
        }
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool, Error> {
    let mut results = verify_suite(a.seed)?;
    if let Some(p) = &a.config {
        let cfg = read_config(p)?;
        cfg.validate()?;
        if cfg.set != harness::SetSpec::Unconstrained {
            results.push(check_objective(&cfg, 500)?);
        }
        let bad = lower_bound_violations(&cfg)?;
        results.push(harness::CheckResult {
            name: format!("bounds_{}", cfg.label()),
            passed: bad.is_empty(),
            detail: bad.first().cloned().unwrap_or_else(|| "ok".into()),
        });
    }
    let mut all = true;
    for r in &results {
        all &= r.passed;
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a).map(|_| true),
        Cmd::Slope(a) => cmd_slope(a).map(|_| true),
        Cmd::Compare(a) => cmd_compare(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
