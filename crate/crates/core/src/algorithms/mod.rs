//! Optimization loops: Frank-Wolfe variants, optimistic Frank-Wolfe and gradient descent with
//! primal-dual steps. Every loop emits one [`TraceRecord`](crate::trace::TraceRecord) per
//! iteration.

mod fw;
mod gd;
mod optimistic;

use std::time::Instant;

pub use fw::{
    run_fw, run_fw_observed, run_generalized_fw, run_generalized_fw_observed, run_hb_fw,
    run_hb_fw_observed, FwRule, GeneralizedVariant,
};
pub use gd::{run_gd_pd, run_gd_pd_observed, GdOptions, GdRule};
pub use optimistic::{
    run_optimistic_fw, run_optimistic_fw_observed, OptimisticOptions, OptimisticVariant, YHook,
    SEGMENT_SEARCH_BUDGET,
};

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, FEASIBILITY_TOL};
use crate::steps::SEARCH_TOL;
use crate::trace::Trace;

/// Options shared by every loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub iters: usize,
    /// Stop once `gap_aligned ≤ epsilon`; `0` disables early stopping.
    pub epsilon: f64,
    /// Track the heavy-ball lower bound for reporting (one extra LMO per iteration where the
    /// algorithm does not compute it anyway).
    pub report_hb: bool,
    /// Starting point; defaults to a minimizer of the regularizer (a vertex of the set), or
    /// the origin for unconstrained runs.
    pub x0: Option<Vec<f64>>,
    pub search_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            iters: 100,
            epsilon: 0.0,
            report_hb: true,
            x0: None,
            search_tol: SEARCH_TOL,
        }
    }
}

impl RunOptions {
    pub fn with_iters(iters: usize) -> Self {
        Self {
            iters,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::config("iters", "must be at least 1"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config("epsilon", "must be nonnegative"));
        }
        if !(self.search_tol > 0.0) {
            return Err(Error::config("search_tol", "must be positive"));
        }
        Ok(())
    }

    fn should_stop(&self, gap: f64) -> bool {
        self.epsilon > 0.0 && gap <= self.epsilon
    }
}

/// Cumulative oracle usage of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounts {
    pub lmo: u64,
    pub grad: u64,
    pub fval: u64,
    /// LMO calls made only to report a bound the algorithm itself does not use.
    pub reporting_lmo: u64,
}

/// What an observer sees after each iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterateView<'a> {
    pub t: usize,
    /// The iterate the row describes.
    pub x: &'a [f64],
    /// The vertex (FW family) or empty (gradient descent).
    pub v: &'a [f64],
    /// The vector handed to the LMO or min-oracle, or the gradient for gradient descent.
    pub oracle_input: &'a [f64],
    pub gamma_or_a: f64,
}

pub trait Observer {
    fn observe(&mut self, view: &IterateView<'_>);
}

impl<F: FnMut(&IterateView<'_>)> Observer for F {
    fn observe(&mut self, view: &IterateView<'_>) {
        self(view)
    }
}

/// An observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &IterateView<'_>) {}
}

/// Result of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    /// Last iterate.
    pub x: Vec<f64>,
    pub counts: OracleCounts,
}

fn start_point(inst: &ProblemInstance, x0: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    match x0 {
        Some(x) => {
            if x.len() != inst.dim() {
                return Err(Error::config("x0", "wrong dimension"));
            }
            if !inst.set().contains(x, FEASIBILITY_TOL) {
                return Err(Error::config("x0", "not in the feasible set"));
            }
            Ok(x.clone())
        }
        None => inst.regularizer.min_oracle(&vec![0.0; inst.dim()]),
    }
}

fn check_gradient(grad: &[f64], t: usize) -> Result<()> {
    if crate::linalg::all_finite(grad) {
        Ok(())
    } else {
        Err(Error::Input("gradient is not finite".into()).at_iter(t))
    }
}

fn check_value(v: f64, t: usize) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Input("objective value is not finite".into()).at_iter(t))
    }
}

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Clock(Instant::now())
    }

    fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
