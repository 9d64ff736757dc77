//! Objectives, feasible sets, regularizers, weight schedules and problem instances.

mod objective;
mod set;
mod verify;
pub mod weights;

use std::sync::Arc;

pub use objective::{
    make_distance_objective, make_lsq_objective, make_quadratic_objective, power_iteration,
    DistanceObjective, LeastSquaresObjective, Objective, QuadraticObjective,
};
pub use set::{FeasibleSet, Regularizer};
pub use verify::{verify_objective, ObjectiveReport};
pub use weights::{ScheduleKind, WeightSchedule, Weights};

use crate::error::{Error, Result};

/// Tolerance for membership checks of user-supplied points.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Known optimum of an instance, used for validation only.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub point: Option<Vec<f64>>,
    pub value: f64,
}

/// Relative slack allowed when comparing lower bounds against `f(x*)`.
pub fn reference_slack(value: f64) -> f64 {
    1e-7 * (1.0 + value.abs())
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub objective: Arc<dyn Objective>,
    pub regularizer: Arc<dyn Regularizer>,
    pub reference: Option<Reference>,
}

impl ProblemInstance {
    pub fn new(
        objective: Arc<dyn Objective>,
        regularizer: Arc<dyn Regularizer>,
        reference: Option<Reference>,
    ) -> Result<Self> {
        let n = objective.dim();
        if regularizer.dimension() != n {
            return Err(Error::Input(format!(
                "objective has dimension {n} but the regularizer has {}",
                regularizer.dimension()
            )));
        }
        if !(objective.smoothness() > 0.0 && objective.smoothness().is_finite()) {
            return Err(Error::Degenerate("smoothness constant must be positive".into()));
        }
        if let Some(r) = &reference {
            if !r.value.is_finite() {
                return Err(Error::Input("reference value is not finite".into()));
            }
            if let Some(p) = &r.point {
                if p.len() != n {
                    return Err(Error::Input("reference point has the wrong dimension".into()));
                }
                if !regularizer.domain().contains(p, FEASIBILITY_TOL) {
                    return Err(Error::Input("reference point is not feasible".into()));
                }
            }
        }
        Ok(Self {
            objective,
            regularizer,
            reference,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn set(&self) -> &dyn FeasibleSet {
        self.regularizer.domain()
    }

    pub fn smoothness(&self) -> f64 {
        self.objective.smoothness()
    }

    /// `f(x*)` (or `(f+ψ)(x*)` for composite instances) if known.
    pub fn reference_value(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| r.value)
    }

    pub fn reference_point(&self) -> Option<&[f64]> {
        self.reference.as_ref().and_then(|r| r.point.as_deref())
    }
}
